"""Convergence certificates for a tuned momentum method.

Local rate
    The closed loop ``A + qBC`` has characteristic polynomial
    ``z^2 + a1 z + a0`` with coefficients affine in the curvature ``q``.
    Jury's inequalities on ``chi(rho z)`` at ``q in {m, L}`` decide whether
    every eigenvalue for every ``q in [m, L]`` lies in the closed rho-disk.

Global stability
    Zames-Falb multiplier with ``h(z) = 1/z``; the frequency-domain
    inequality must be strictly negative on the whole unit circle.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .algorithm import AlgorithmParams, Method, PoleError, make_state_space
from .polynomial import KAPPA_THRESHOLD

JURY_TOL = 1e-12
FDI_GRID = 8192
RATE_GRID = 4096
ROOTLOCUS_TOL = 1e-9


@dataclass(frozen=True)
class Multiplier:
    """O'Shea-Zames-Falb multiplier for the sector ``[m, L]``."""

    m: float
    L: float
    h_kind: str = "unit_delay"

    def __post_init__(self):
        if self.h_kind != "unit_delay":
            raise NotImplementedError(f"only h(z)=1/z is supported, got {self.h_kind!r}")
        if not 0 < self.m <= self.L:
            raise ValueError("need 0 < m <= L")

    @property
    def impulse_response(self) -> dict[int, float]:
        return {1: 1.0}

    def h(self, z: complex) -> complex:
        return 1.0 / z

    def matrix(self, z: complex) -> np.ndarray:
        h = self.h(z)
        hs = np.conj(h)
        m, L = self.m, self.L
        return np.array([
            [-m * L * (2 - h - hs), L * (1 - hs) + m * (1 - h)],
            [L * (1 - h) + m * (1 - hs), -(2 - h - hs)],
        ])


def closed_loop_char_poly(params: AlgorithmParams, q: float) -> tuple[float, float]:
    """``(a1, a0)`` with ``chi(z) = z^2 + a1 z + a0``, the polynomial of ``A + qBC``."""
    a, b, e = params.alpha, params.beta, params.eta
    return q * a * (1 + e) - (1 + b), b - q * a * e


def _spectral_radius(a1, a0):
    a1 = np.asarray(a1, dtype=float)
    a0 = np.asarray(a0, dtype=float)
    disc = a1 * a1 - 4.0 * a0
    real = 0.5 * (np.abs(a1) + np.sqrt(np.maximum(disc, 0.0)))
    cplx = np.sqrt(np.maximum(a0, 0.0))
    return np.where(disc >= 0, real, cplx)


def spectral_radius(params: AlgorithmParams, q):
    """Spectral radius of ``A + qBC`` (vectorized over ``q``)."""
    a1, a0 = closed_loop_char_poly(params, np.asarray(q, dtype=float))
    return _spectral_radius(a1, a0)


@dataclass(frozen=True)
class JuryResult:
    passed: bool
    rho: float
    # four inequalities at q = m, then the same four at q = L
    margins: tuple[float, ...]

    @property
    def min_margin(self) -> float:
        return min(self.margins)


def jury_margins(params: AlgorithmParams, rho: float, q: float) -> tuple[float, float, float, float]:
    a, b, e = params.alpha, params.beta, params.eta
    return (
        (1 - rho) * (b - rho) + a * (e * rho - e + rho) * q,
        (1 + rho) * (b + rho) - a * (e * rho + e + rho) * q,
        rho**2 + b - a * e * q,
        rho**2 - b + a * e * q,
    )


def jury_rho_disk(params: AlgorithmParams, rho: float) -> JuryResult:
    """Are all closed-loop eigenvalues in the closed rho-disk for every q in [m, L]?

    The inequalities are affine in ``q``, so the endpoints suffice.
    """
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    margins = jury_margins(params, rho, params.m) + jury_margins(params, rho, params.L)
    return JuryResult(all(v >= -JURY_TOL for v in margins), rho, margins)


def worst_case_rate(params: AlgorithmParams, grid: int = RATE_GRID) -> tuple[float, float]:
    """``max_{q in [m, L]}`` of the spectral radius of ``A + qBC`` and its argmax.

    Candidates are the endpoints, the curvatures where the eigenvalues
    switch between real and complex (roots of the discriminant, which is
    quadratic in ``q``), and a uniform grid whose local maxima are refined
    with a bounded scalar search.
    """
    m, L = params.m, params.L
    a, b, e = params.alpha, params.beta, params.eta
    cands = [m, L]

    c1, c0 = a * (1 + e), a * e
    disc_coeffs = [c1 * c1, 4 * c0 - 2 * c1 * (1 + b), (1 - b) ** 2]
    if c1 != 0 or disc_coeffs[1] != 0:
        for r in np.roots(disc_coeffs):
            if abs(r.imag) < 1e-12 * max(1.0, abs(r.real)) and m <= r.real <= L:
                cands.append(float(r.real))

    if L > m:
        qs = np.linspace(m, L, grid)
        rad = spectral_radius(params, qs)
        interior = np.flatnonzero((rad[1:-1] >= rad[:-2]) & (rad[1:-1] >= rad[2:])) + 1
        for i in interior[np.argsort(rad[interior])[::-1][:8]]:
            res = minimize_scalar(lambda q: -float(spectral_radius(params, q)),
                                  bounds=(qs[i - 1], qs[i + 1]), method="bounded",
                                  options={"xatol": 1e-12 * max(1.0, L)})
            cands.append(float(res.x))
            cands.append(float(qs[i]))

    cands_arr = np.array(cands)
    rads = spectral_radius(params, cands_arr)
    i = int(np.argmax(rads))
    return float(rads[i]), float(cands_arr[i])


def _g_and_derivative(params: AlgorithmParams, z: float) -> tuple[float, float]:
    a, b, e = params.alpha, params.beta, params.eta
    num = -a * ((1 + e) * z - e)
    dnum = -a * (1 + e)
    den = (z - 1) * (z - b)
    dden = 2 * z - 1 - b
    return num / den, (dnum * den - num * dden) / den**2


def rootlocus_residuals(params: AlgorithmParams, rho: float) -> tuple[float, float, float]:
    """``(L g(-rho) - 1, m g(rho) - 1, g'(rho))``.

    All three vanish exactly for the C2M tuning: the locus passes through
    ``-rho`` at gain ``L`` and has a double root at ``rho`` at gain ``m``.
    """
    b = params.beta
    if rho == 1 or rho == b or -rho == b or rho == -1:
        raise PoleError(f"rho={rho} coincides with a pole of g (beta={b})")
    g_minus, _ = _g_and_derivative(params, -rho)
    g_plus, dg_plus = _g_and_derivative(params, rho)
    return params.L * g_minus - 1.0, params.m * g_plus - 1.0, dg_plus


def fdi_raw(params: AlgorithmParams, mult: Multiplier, z: complex) -> float:
    """``[g; 1]^* Pi(z) [g; 1]`` evaluated directly (undefined at the poles of g)."""
    a, b, e = params.alpha, params.beta, params.eta
    den = (z - 1) * (z - b)
    if den == 0:
        raise PoleError(f"g has a pole at z={z}")
    g = -a * ((1 + e) * z - e) / den
    v = np.array([g, 1.0])
    return float(np.real(np.conj(v) @ mult.matrix(z) @ v))


def fdi_value(params: AlgorithmParams, mult: Multiplier, z) -> np.ndarray | float:
    """FDI form with the pole of ``g`` at ``z = 1`` cancelled.

    Equals ``fdi_raw * |z - beta|^2`` on the unit circle, written so that it
    is a finite trigonometric polynomial everywhere, ``z = 1`` included.
    Negative means the strict inequality holds at ``z``.  Vectorized over z.
    """
    a, b, e = params.alpha, params.beta, params.eta
    m, L = mult.m, mult.L
    z = np.asarray(z, dtype=complex)
    num = -a * ((1 + e) * z - e)
    zb = z - b
    out = (-m * L * np.abs(num) ** 2
           + 2.0 * np.real(np.conj(num) * zb * (L * z - m))
           - np.abs(z - 1) ** 2 * np.abs(zb) ** 2)
    return float(out) if out.ndim == 0 else out


def fdi_sweep(params: AlgorithmParams, mult: Optional[Multiplier] = None,
              n: int = FDI_GRID) -> float:
    """Largest value of :func:`fdi_value` on an ``n``-point unit-circle grid."""
    mult = mult or Multiplier(params.m, params.L)
    z = np.exp(2j * np.pi * np.arange(n) / n)
    return float(np.max(fdi_value(params, mult, z)))


def fdi_reduced(kappa: float, rho: float, x):
    """The FDI for C2M written as a quadratic in ``x = Re z``."""
    k, r = kappa, rho
    s = k * (1 - r) ** 2
    return (-4 * r * (s - (1 + r)) * x**2
            - 2 * (1 - r) * (s * (1 + 2 * r) - (1 + r) ** 2) * x
            - (1 + r) * (s * (1 - 4 * r + r**2) + 6 * r - 2 * r**3))


def fdi_reduced_max(kappa: float, rho: float) -> tuple[float, float]:
    """Maximum of :func:`fdi_reduced` over ``x in [-1, 1]`` and where it occurs."""
    k, r = kappa, rho
    s = k * (1 - r) ** 2
    c2 = -4 * r * (s - (1 + r))
    c1 = -2 * (1 - r) * (s * (1 + 2 * r) - (1 + r) ** 2)
    xs = [-1.0, 1.0]
    if c2 != 0:
        xv = -c1 / (2 * c2)
        if -1 <= xv <= 1:
            xs.append(xv)
    vals = [fdi_reduced(k, r, x) for x in xs]
    i = int(np.argmax(vals))
    return float(vals[i]), float(xs[i])


def loop_transform_stable(params: AlgorithmParams) -> bool:
    """Is the loop-transformed plant stable, i.e. ``rho(A + (L+m)/2 BC) < 1``?"""
    q = 0.5 * (params.L + params.m)
    return bool(spectral_radius(params, q) < 1.0)


def in_c2m_regime(params: AlgorithmParams) -> bool:
    return params.method is Method.C2M and params.kappa >= KAPPA_THRESHOLD


@dataclass
class CertificateReport:
    method: str
    m: float
    L: float
    rho: float
    alpha: float
    beta: float
    eta: float
    jury_pass: bool
    jury_margins: tuple[float, ...]
    fdi_pass: bool
    fdi_max: float
    fdi_vertex_max: Optional[float]
    rootlocus_residuals: Optional[tuple[float, float, float]]
    loop_transform_stable: bool
    worst_case_rate: float
    q_at_worst: float
    notes: list[str] = field(default_factory=list)

    @property
    def rootlocus_pass(self) -> Optional[bool]:
        if self.rootlocus_residuals is None:
            return None
        return all(abs(r) < ROOTLOCUS_TOL for r in self.rootlocus_residuals)

    @property
    def rate_pass(self) -> bool:
        return self.worst_case_rate <= self.rho + 1e-6

    @property
    def passed(self) -> bool:
        ok = self.jury_pass and self.fdi_pass and self.loop_transform_stable and self.rate_pass
        if self.method == Method.C2M.value:
            ok = ok and bool(self.rootlocus_pass)
        return ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["jury_margins"] = list(self.jury_margins)
        if self.rootlocus_residuals is not None:
            d["rootlocus_residuals"] = list(self.rootlocus_residuals)
        d["rootlocus_pass"] = self.rootlocus_pass
        d["rate_pass"] = self.rate_pass
        d["passed"] = self.passed
        return d


def certify(params: AlgorithmParams, fdi_grid: int = FDI_GRID) -> CertificateReport:
    """Run every check against the designed rate ``params.rho``."""
    if params.rho is None or not 0 < params.rho < 1:
        raise ValueError("certify needs a designed rate 0 < rho < 1 on the parameters")
    rho = params.rho
    notes = []

    jury = jury_rho_disk(params, rho)
    mult = Multiplier(params.m, params.L)
    fdi_max = fdi_sweep(params, mult, fdi_grid)
    fdi_ok = fdi_max < 0
    vertex = None
    if in_c2m_regime(params):
        vertex, _ = fdi_reduced_max(params.kappa, rho)
        fdi_ok = fdi_ok and vertex < 0

    try:
        residuals = rootlocus_residuals(params, rho)
    except PoleError as exc:
        residuals = None
        notes.append(str(exc))

    rate, q_worst = worst_case_rate(params)
    return CertificateReport(
        method=params.method.value, m=params.m, L=params.L, rho=rho,
        alpha=params.alpha, beta=params.beta, eta=params.eta,
        jury_pass=jury.passed, jury_margins=jury.margins,
        fdi_pass=bool(fdi_ok), fdi_max=fdi_max, fdi_vertex_max=vertex,
        rootlocus_residuals=residuals,
        loop_transform_stable=loop_transform_stable(params),
        worst_case_rate=rate, q_at_worst=q_worst, notes=notes,
    )
