"""Benchmark objectives and the worst-case simulation experiment."""

from __future__ import annotations

import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .algorithm import (
    FunctionOracle,
    InsufficientDataError,
    Method,
    Trajectory,
    estimate_rate,
    run,
)
from .schedules import gd_rate, hb_rate, schedule, tm_rate

logger = logging.getLogger(__name__)

EXP_FLOOR = -700.0
RATE_FLOOR = 1e-12
DEFAULT_ITERS = 100_000


def max_workers() -> int:
    """Thread cap from ``MOMENTUM_LAB_THREADS`` (default: CPU count)."""
    raw = os.environ.get("MOMENTUM_LAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning("ignoring MOMENTUM_LAB_THREADS=%r", raw)
    return os.cpu_count() or 1


def _smooth_terms(w, r: float):
    """Value, first and second derivative of ``w^2 exp(-r/w) / 2`` (zero for w <= 0)."""
    w = np.asarray(w, dtype=float)
    pos = w > 0
    wp = np.where(pos, w, 1.0)
    t = np.where(pos, -r / wp, EXP_FLOOR)
    ex = np.where(t < EXP_FLOOR, 0.0, np.exp(np.maximum(t, EXP_FLOOR)))
    ex = np.where(pos, ex, 0.0)
    val = 0.5 * wp * wp * ex
    d1 = ex * (wp + 0.5 * r)
    d2 = ex * (1.0 + r / wp + 0.5 * (r / wp) ** 2)
    return val, d1, d2


def tmm_scalar_g(w, r: float):
    """``(g(w), g'(w))`` for the smoothed one-sided quadratic ``g``."""
    if not r > 0:
        raise ValueError("r must be positive")
    val, d1, _ = _smooth_terms(w, r)
    if np.ndim(w) == 0:
        return float(val), float(d1)
    return val, d1


@dataclass(frozen=True)
class TmmWorstCaseSpec:
    """``f(x) = (L-m) sum_i g(a_i.x - b_i) + m/2 |x|^2``.

    ``directions`` holds the ``a_i`` as rows.
    """

    m: float
    L: float
    r: float
    directions: tuple[tuple[float, ...], ...]
    offsets: tuple[float, ...]

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("r must be positive")
        if not 0 < self.m <= self.L:
            raise ValueError("need 0 < m <= L")
        A = self.matrix
        if A.ndim != 2 or A.shape[0] != len(self.offsets):
            raise ValueError("need one offset per direction")
        norm = np.linalg.norm(A, 2)
        if norm > 1 + 1e-12:
            raise ValueError(f"stacked directions have norm {norm} > 1")
        if norm < 1 - 1e-9:
            warnings.warn(f"stacked directions have norm {norm} < 1; f is still in the class "
                          "but the curvature L is not attained", stacklevel=2)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.directions, dtype=float)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]


def standard_tmm_spec() -> TmmWorstCaseSpec:
    """The two-dimensional worst-case instance with ``L = 1``, ``m = r = 1e-3``.

    The offsets are ``-100`` so that the smoothed terms are active at the
    common starting point ``x0 = 0``; with ``+100`` the origin is already
    the minimizer.
    """
    return TmmWorstCaseSpec(m=1e-3, L=1.0, r=1e-3,
                            directions=((1.0, 0.0), (0.0, 0.002)),
                            offsets=(-100.0, -100.0))


class MinimizerError(RuntimeError):
    pass


def _newton_polish(oracle: FunctionOracle, x: np.ndarray, tol: float, max_steps: int = 50):
    best_x, best_g = x, float(np.linalg.norm(oracle.gradient(x)))
    for _ in range(max_steps):
        if best_g <= tol:
            break
        step = np.linalg.solve(oracle.hessian(best_x), oracle.gradient(best_x))
        cand = best_x - step
        g = float(np.linalg.norm(oracle.gradient(cand)))
        if not g < best_g:
            break
        best_x, best_g = cand, g
    return best_x, best_g


def locate_minimizer(oracle: FunctionOracle, x0: Optional[np.ndarray] = None,
                     grad_tol: float = 1e-14, accept_tol: float = 1e-10) -> np.ndarray:
    """Minimizer of a strongly convex oracle: C2M to near convergence, then Newton.

    Newton polishing stops at ``grad_tol`` or when it stops improving (the
    gradient then sits at its floating-point floor); the result is rejected
    if the gradient norm is still above ``accept_tol``.
    """
    x0 = np.zeros(oracle.dimension) if x0 is None else np.asarray(x0, dtype=float)
    params = schedule(Method.C2M, oracle.m, oracle.L).params
    traj = run(params, _without_minimizer(oracle), x0, max_iters=200_000, stop_tol=1e-8)
    if traj.diverged:
        raise MinimizerError("C2M diverged while locating the minimizer")
    x = traj.iterates[-1]
    if oracle.hessian is not None:
        x, gnorm = _newton_polish(oracle, x, grad_tol)
    else:
        gnorm = float(np.linalg.norm(oracle.gradient(x)))
    if gnorm > accept_tol:
        raise MinimizerError(f"gradient norm {gnorm:.3e} after minimization")
    return x


def _without_minimizer(oracle: FunctionOracle) -> FunctionOracle:
    return FunctionOracle(oracle.dimension, oracle.value, oracle.gradient,
                          oracle.m, oracle.L, None, oracle.hessian, oracle.name)


def make_tmm_oracle(spec: TmmWorstCaseSpec, find_minimizer: bool = True) -> FunctionOracle:
    A = spec.matrix
    b = np.asarray(spec.offsets, dtype=float)
    m, L, r = spec.m, spec.L, spec.r
    scale = L - m

    def value(x):
        val, _, _ = _smooth_terms(A @ x - b, r)
        return float(scale * val.sum() + 0.5 * m * (x @ x))

    def gradient(x):
        _, d1, _ = _smooth_terms(A @ x - b, r)
        return scale * (A.T @ d1) + m * x

    def hessian(x):
        _, _, d2 = _smooth_terms(A @ x - b, r)
        return scale * (A.T * d2) @ A + m * np.eye(A.shape[1])

    oracle = FunctionOracle(spec.dimension, value, gradient, m, L,
                            hessian=hessian, name="tmm-worst-case")
    if find_minimizer:
        oracle.minimizer = locate_minimizer(oracle)
    return oracle


def make_quadratic_oracle(eigs: Sequence[float], x_star: Sequence[float] | None = None) -> FunctionOracle:
    """``f(x) = (x - x*)^T diag(eigs) (x - x*) / 2``."""
    q = np.asarray(eigs, dtype=float)
    if q.ndim != 1 or q.size == 0 or np.any(q <= 0):
        raise ValueError("eigenvalues must be a nonempty list of positive numbers")
    xs = np.zeros_like(q) if x_star is None else np.asarray(x_star, dtype=float)
    if xs.shape != q.shape:
        raise ValueError("x_star must match the number of eigenvalues")

    def value(x):
        d = x - xs
        return float(0.5 * d @ (q * d))

    return FunctionOracle(q.size, value, lambda x: q * (x - xs), float(q.min()), float(q.max()),
                          minimizer=xs.copy(), hessian=lambda x: np.diag(q), name="quadratic")


def reference_rates(kappa: float) -> dict[str, float]:
    """Minimax rates of GD, TM and HB at condition number ``kappa``, keyed by method."""
    return {"gd": gd_rate(kappa), "tm": tm_rate(kappa), "hb": hb_rate(kappa)}


@dataclass
class MethodRun:
    method: str
    designed_rho: float
    trajectory: Trajectory
    estimated_rate: Optional[float]
    converged: bool

    @property
    def diverged(self) -> bool:
        return self.trajectory.diverged


@dataclass
class ExperimentResult:
    runs: dict[str, MethodRun]
    reference_rates: dict[str, float]
    stop_tol: float
    iters: int

    def __getitem__(self, method: str) -> MethodRun:
        return self.runs[Method.parse(method).value]

    @property
    def divergence_flags(self) -> dict[str, bool]:
        return {k: v.diverged for k, v in self.runs.items()}

    @property
    def non_convergent(self) -> dict[str, bool]:
        return {k: not v.converged for k, v in self.runs.items()}


def error_floor(oracle: FunctionOracle, x0: np.ndarray) -> float:
    """Error level below which iterates are dominated by rounding.

    Slow methods stall once ``alpha * grad`` drops under the spacing of the
    iterates, which scales with their magnitude, so the floor does too.
    """
    scale = max(float(np.linalg.norm(oracle.minimizer)), float(np.linalg.norm(x0)), 1.0)
    return max(RATE_FLOOR, 1e3 * np.finfo(float).eps * scale)


def _one_run(method: Method, oracle: FunctionOracle, x0, iters: int, stop_tol: float) -> MethodRun:
    sched = schedule(method, oracle.m, oracle.L)
    traj = run(sched.params, oracle, x0, max_iters=iters, stop_tol=stop_tol)
    rate = None
    if not traj.diverged:
        try:
            rate = estimate_rate(traj, 0.5, floor=stop_tol)
        except InsufficientDataError:
            rate = None
    traj.estimated_rate = rate
    return MethodRun(method.value, float(sched.params.rho), traj, rate, traj.stopped_early)


def run_experiment(methods: Iterable[Method | str], oracle: FunctionOracle,
                   x0: Sequence[float] | None = None, iters: int = DEFAULT_ITERS,
                   stop_tol: Optional[float] = None) -> ExperimentResult:
    """Run every method from ``x0`` (and ``x_{-1} = x0``) on ``oracle``.

    A method counts as converged when its error reaches ``stop_tol`` within
    ``iters`` iterations; the default is :func:`error_floor`.  Rates are
    fitted on errors above the same level.
    """
    if oracle.minimizer is None:
        raise ValueError("the experiment needs an oracle with a known minimizer")
    methods = [Method.parse(mm) for mm in methods]
    x0 = np.zeros(oracle.dimension) if x0 is None else np.asarray(x0, dtype=float)
    if stop_tol is None:
        stop_tol = error_floor(oracle, x0)
    with ThreadPoolExecutor(max_workers=min(max_workers(), max(1, len(methods)))) as pool:
        futures = [pool.submit(_one_run, mm, oracle, x0, iters, stop_tol) for mm in methods]
        runs = {f.result().method: f.result() for f in futures}
    return ExperimentResult(runs, reference_rates(oracle.L / oracle.m), stop_tol, iters)


def hessian_eigs_fd(oracle: FunctionOracle, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Eigenvalues of a central-difference Hessian built from the gradient."""
    d = oracle.dimension
    H = np.empty((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        H[:, i] = (oracle.gradient(x + e) - oracle.gradient(x - e)) / (2 * h)
    return np.linalg.eigvalsh(0.5 * (H + H.T))
