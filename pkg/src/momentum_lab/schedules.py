"""Parameter schedules for GD, HB, TM and C2M, plus iteration complexity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence

from .algorithm import AlgorithmParams, Method
from .polynomial import (
    DEFAULT_TOL,
    KAPPA_THRESHOLD,
    above_lower,
    build_p,
    rho_c2m,
)

DEFAULT_EPSILON = 1e-9


@dataclass(frozen=True)
class RhoWindow:
    """Interval ``((sqrt k - 1)/(sqrt k + 1), 1 - sqrt(2/k))`` of C2M rates."""

    lower: float
    upper: float
    kappa: float

    @property
    def empty(self) -> bool:
        return not self.lower < self.upper


@dataclass(frozen=True)
class MethodSchedule:
    method: Method
    rho_rule: str
    params: AlgorithmParams


def hb_rate(kappa: float) -> float:
    s = math.sqrt(kappa)
    return (s - 1.0) / (s + 1.0)


def gd_rate(kappa: float) -> float:
    return (kappa - 1.0) / (kappa + 1.0)


def tm_rate(kappa: float) -> float:
    return 1.0 - 1.0 / math.sqrt(kappa)


def rho_window(kappa: float) -> RhoWindow:
    if not kappa > 1:
        raise ValueError(f"kappa must exceed 1, got {kappa}")
    return RhoWindow(hb_rate(kappa), 1.0 - math.sqrt(2.0 / kappa), kappa)


def c2m_parameters(m: float, L: float, rho: float) -> AlgorithmParams:
    """C2M tuning for a given rate ``rho`` (no admissibility check on ``rho``).

    For ``m == L`` the formulas are singular; the limit is a Newton step.
    """
    kappa = L / m
    if kappa == 1:
        return AlgorithmParams(1.0 / m, 0.0, 0.0, m, L, rho, Method.C2M)
    alpha = (1 - rho) ** 2 / m
    beta = rho / (kappa - 1) * (1 - kappa * (1 - 3 * rho) / (1 + rho))
    eta = rho / (kappa - 1) * ((1 + rho) / (1 - rho) ** 2 - kappa / (1 + rho))
    return AlgorithmParams(alpha, beta, eta, m, L, rho, Method.C2M)


def _check_c2m_rho(kappa: float, rho: float) -> None:
    if kappa < KAPPA_THRESHOLD:
        expected = hb_rate(kappa)
        if not math.isclose(rho, expected, rel_tol=0, abs_tol=1e-12):
            raise ValueError(
                f"for kappa={kappa} < 9+4*sqrt(5) the C2M rate is fixed at {expected!r}")
        return
    # Inside (lower, upper], p < 0 exactly when rho exceeds rho_C2M.
    k, r = Fraction(kappa), Fraction(rho)
    ok = (0 < r < 1 and above_lower(k, r) and k * (1 - r) ** 2 >= 2
          and build_p(k).sign_at(r) < 0)
    if not ok:
        w = rho_window(kappa)
        raise ValueError(f"rho={rho} is not in (rho_C2M, {w.upper!r}] for kappa={kappa}")


def schedule(method: Method | str, m: float, L: float,
             rho_override: Optional[float] = None,
             epsilon: float = DEFAULT_EPSILON,
             tol: float = DEFAULT_TOL) -> MethodSchedule:
    """Designed rate and parameters of ``method`` for the class ``(m, L)``."""
    method = Method.parse(method)
    if not (0 < m <= L and math.isfinite(L)):
        raise ValueError(f"need 0 < m <= L, got m={m}, L={L}")
    kappa = L / m

    if method is Method.GD:
        rho = gd_rate(kappa)
        p = AlgorithmParams((1 - rho) / m, 0.0, 0.0, m, L, rho, method)
        return MethodSchedule(method, "(kappa-1)/(kappa+1)", p)
    if method is Method.HB:
        rho = hb_rate(kappa)
        p = AlgorithmParams((1 - rho) ** 2 / m, rho**2, 0.0, m, L, rho, method)
        return MethodSchedule(method, "(sqrt(kappa)-1)/(sqrt(kappa)+1)", p)
    if method is Method.TM:
        rho = tm_rate(kappa)
        p = AlgorithmParams((1 + rho) / L, rho**2 / (2 - rho),
                            rho**2 / ((1 + rho) * (2 - rho)), m, L, rho, method)
        return MethodSchedule(method, "1-1/sqrt(kappa)", p)
    if method is Method.C2M:
        if rho_override is not None:
            _check_c2m_rho(kappa, rho_override)
            return MethodSchedule(method, "override", c2m_parameters(m, L, rho_override))
        if kappa < KAPPA_THRESHOLD:
            return MethodSchedule(method, "(sqrt(kappa)-1)/(sqrt(kappa)+1)",
                                  c2m_parameters(m, L, hb_rate(kappa)))
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        rho = min(rho_c2m(kappa, tol) + epsilon, rho_window(kappa).upper)
        return MethodSchedule(method, f"rho_C2M+{epsilon!r}", c2m_parameters(m, L, rho))
    raise ValueError(f"no schedule for method {method.value!r}")


def inverse_log_rate(rho: float) -> float:
    """``-1/log(rho)``: iterations per factor-``e`` reduction of the error."""
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    return -1.0 / math.log(rho)


class CurveRow(NamedTuple):
    method: str
    kappa: float
    rho: float
    inv_log_rate: float


def designed_rate(method: Method | str, kappa: float, tol: float = DEFAULT_TOL) -> float:
    """Rate plotted for ``method`` at condition number ``kappa`` (C2M: the epsilon -> 0 limit)."""
    method = Method.parse(method)
    if method is Method.C2M:
        return rho_c2m(kappa, tol) if kappa >= KAPPA_THRESHOLD else hb_rate(kappa)
    return schedule(method, 1.0, kappa).params.rho


def complexity_curve(methods: Iterable[Method | str], kappa_grid: Sequence[float],
                     extra_rows: Iterable[tuple[str, float, float]] = ()) -> list[CurveRow]:
    """Rows ``(method, kappa, rho, -1/log rho)`` sorted by method, then kappa.

    ``extra_rows`` takes precomputed ``(name, kappa, rho)`` triples for methods
    this package does not schedule.
    """
    rows = []
    for method in methods:
        method = Method.parse(method)
        for kappa in kappa_grid:
            if not kappa > 1:
                raise ValueError(f"kappa must exceed 1, got {kappa}")
            rho = designed_rate(method, kappa)
            rows.append(CurveRow(method.value, float(kappa), rho, inverse_log_rate(rho)))
    for name, kappa, rho in extra_rows:
        rows.append(CurveRow(str(name), float(kappa), float(rho), inverse_log_rate(rho)))
    rows.sort(key=lambda r: (r.method, r.kappa))
    return rows
