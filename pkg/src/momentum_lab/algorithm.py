"""The three-parameter momentum family and its simulation.

Every method handled by the package is an instance of

    y_k     = x_k + eta * (x_k - x_{k-1})
    u_k     = grad f(y_k)
    x_{k+1} = x_k + beta * (x_k - x_{k-1}) - alpha * u_k

viewed as a linear system ``g`` in feedback with the gradient.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

DIVERGENCE_BOUND = 1e150


class Method(str, enum.Enum):
    GD = "gd"
    HB = "hb"
    TM = "tm"
    C2M = "c2m"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, value: "str | Method") -> "Method":
        if isinstance(value, Method):
            return value
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unknown method {value!r}; choose from "
                             f"{', '.join(m.value for m in cls)}") from None


class PoleError(ZeroDivisionError):
    """Transfer function evaluated at one of its poles."""


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class AlgorithmParams:
    """Tuning ``(alpha, beta, eta)`` together with the class constants.

    ``rho`` is the rate the parameters were designed for.  It may be ``None``
    for hand-made (``CUSTOM``) parameters; it is ``0`` only when ``m == L``.
    ``alpha == 0`` is accepted so the open-loop system can be represented.
    """

    alpha: float
    beta: float
    eta: float
    m: float
    L: float
    rho: Optional[float] = None
    method: Method = Method.CUSTOM

    def __post_init__(self):
        if not (self.m > 0 and self.L >= self.m and math.isfinite(self.L)):
            raise ValueError(f"need 0 < m <= L, got m={self.m}, L={self.L}")
        if self.rho is not None and not 0 <= self.rho < 1:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        if not (math.isfinite(self.beta) and math.isfinite(self.eta)):
            raise ValueError("beta and eta must be finite")
        object.__setattr__(self, "method", Method.parse(self.method))

    @property
    def kappa(self) -> float:
        return self.L / self.m


@dataclass(frozen=True)
class StateSpace:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def transfer(self, z: complex) -> complex:
        """``C (zI - A)^{-1} B``."""
        M = z * np.eye(2) - self.A
        return complex((self.C @ np.linalg.solve(M.astype(complex), self.B.astype(complex)))[0, 0])

    def closed_loop(self, q: float) -> np.ndarray:
        """``A + q B C``: the linearization at a point where the curvature is ``q``."""
        return self.A + q * (self.B @ self.C)


def make_state_space(params: AlgorithmParams) -> StateSpace:
    a, b, e = params.alpha, params.beta, params.eta
    return StateSpace(
        A=np.array([[1.0 + b, -b], [1.0, 0.0]]),
        B=np.array([[-a], [0.0]]),
        C=np.array([[1.0 + e, -e]]),
    )


def transfer_g(params: AlgorithmParams, z: complex) -> complex:
    """Evaluate ``g(z) = -alpha((1+eta) z - eta) / ((z-1)(z-beta))``."""
    a, b, e = params.alpha, params.beta, params.eta
    den = (z - 1.0) * (z - b)
    if den == 0:
        raise PoleError(f"g has a pole at z={z}")
    return -a * ((1.0 + e) * z - e) / den


@dataclass
class FunctionOracle:
    """A differentiable objective with known class constants ``(m, L)``.

    ``hessian`` is optional and only used by the benchmark helpers.
    """

    dimension: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    m: float
    L: float
    minimizer: Optional[np.ndarray] = None
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "f"

    @property
    def class_constants(self) -> tuple[float, float]:
        return self.m, self.L


@dataclass
class Trajectory:
    """Iterates ``x_0 .. x_N`` and their errors.

    ``errors`` holds ``||x_k - x*||`` when the oracle knows its minimizer and
    ``||grad f(x_k)||`` otherwise (``error_kind`` says which).
    """

    iterates: np.ndarray
    errors: np.ndarray
    gradient_evaluations: int
    error_kind: str = "distance"
    estimated_rate: Optional[float] = None
    diverged: bool = False
    diverged_at: Optional[int] = None
    stopped_early: bool = False

    def __len__(self) -> int:
        return len(self.errors)

    @property
    def final_error(self) -> float:
        return float(self.errors[-1])

    def first_below(self, threshold: float) -> Optional[int]:
        """Index of the first iterate whose error is ``<= threshold``."""
        hit = np.flatnonzero(self.errors <= threshold)
        return int(hit[0]) if hit.size else None


def run(
    params: AlgorithmParams,
    oracle: FunctionOracle,
    x0: Sequence[float] | np.ndarray,
    x_minus1: Sequence[float] | np.ndarray | None = None,
    max_iters: int = 1000,
    stop_tol: float = 0.0,
) -> Trajectory:
    """Iterate the method from ``(x0, x_minus1)``; ``x_minus1`` defaults to ``x0``.

    Stops after ``max_iters`` steps, or once the error drops to ``stop_tol``
    (only when ``stop_tol > 0``).  A non-finite iterate or one larger than
    ``DIVERGENCE_BOUND`` ends the run with ``diverged`` set.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    x = np.array(x0, dtype=float).reshape(-1)
    xp = x.copy() if x_minus1 is None else np.array(x_minus1, dtype=float).reshape(-1)
    if x.shape != (oracle.dimension,) or xp.shape != (oracle.dimension,):
        raise ValueError(f"initial points must have dimension {oracle.dimension}")

    a, b, e = params.alpha, params.beta, params.eta
    xstar = None if oracle.minimizer is None else np.asarray(oracle.minimizer, dtype=float)
    grad = oracle.gradient

    def error(pt: np.ndarray, u: Optional[np.ndarray] = None) -> float:
        if xstar is not None:
            return float(np.linalg.norm(pt - xstar))
        return float(np.linalg.norm(grad(pt) if u is None else u))

    iterates = [x.copy()]
    errors = [error(x)]
    n_grad = 0 if xstar is not None else 1
    diverged_at = None
    stopped = stop_tol > 0 and errors[0] <= stop_tol

    k = 0
    while not stopped and k < max_iters:
        y = x + e * (x - xp)
        u = grad(y)
        n_grad += 1
        x, xp = x + b * (x - xp) - a * u, x
        k += 1
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGENCE_BOUND:
            diverged_at = k
            logger.warning("%s diverged at iteration %d", params.method.value, k)
            break
        iterates.append(x.copy())
        err = error(x)
        if xstar is None:
            n_grad += 1
        errors.append(err)
        if stop_tol > 0 and err <= stop_tol:
            stopped = True

    return Trajectory(
        iterates=np.array(iterates),
        errors=np.array(errors),
        gradient_evaluations=n_grad,
        error_kind="distance" if xstar is not None else "gradient",
        diverged=diverged_at is not None,
        diverged_at=diverged_at,
        stopped_early=stopped,
    )


def estimate_rate(traj: Trajectory | Sequence[float] | np.ndarray,
                  window_fraction: float = 0.5,
                  floor: float = 0.0) -> float:
    """Empirical root-convergence factor of an error sequence.

    Least-squares slope of ``log(error)`` against ``k`` over the trailing
    ``window_fraction`` of the usable samples, exponentiated.  Usable samples
    lie strictly between a floor and the initial error; the floor is the
    largest of ``1e-300``, ``1e2 * eps * errors[0]`` and ``floor``.
    """
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must lie in (0, 1]")
    errors = np.asarray(traj.errors if isinstance(traj, Trajectory) else traj, dtype=float)
    if errors.size == 0:
        raise InsufficientDataError("empty error sequence")
    e0 = errors[0]
    lo = max(1e-300, 1e2 * np.finfo(float).eps * e0, floor)
    k = np.arange(errors.size)
    valid = np.isfinite(errors) & (errors > lo) & (errors < e0)
    kv, ev = k[valid], errors[valid]
    if kv.size < 10:
        raise InsufficientDataError(f"only {kv.size} usable error samples (need 10)")
    n = max(2, int(math.ceil(window_fraction * kv.size)))
    kv, ev = kv[-n:], ev[-n:]
    slope = np.polyfit(kv.astype(float), np.log(ev), 1)[0]
    return float(math.exp(slope))
