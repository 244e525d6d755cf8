"""Exact rational polynomials, Sturm chains and the C2M certificate polynomial.

Everything in this module that decides a sign is done in exact rational
arithmetic (:class:`fractions.Fraction`).  Python floats are dyadic
rationals, so a float ``kappa`` or ``rho`` is converted without loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

Rational = Union[int, float, Fraction]

#: Smallest condition number for which the C2M rate differs from the HB rate.
KAPPA_THRESHOLD = 9.0 + 4.0 * math.sqrt(5.0)

DEFAULT_TOL = 1e-12


class RootIsolationError(ArithmeticError):
    """Raised when an interval cannot be certified (bad bracket, root on a sliver)."""


def _q(x: Rational) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float) and not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be made rational")
    return Fraction(x)


@dataclass(frozen=True)
class RationalPolynomial:
    """Univariate polynomial with exact rational coefficients, ascending order.

    The stored coefficient tuple is normalized: no trailing zeros, so the
    zero polynomial has ``coeffs == ()``.
    """

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Iterable[Rational] = ()):
        cs = [_q(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        """Degree; ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return self.degree <= 0

    def __call__(self, x: Rational) -> Fraction:
        x = _q(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def sign_at(self, x: Rational) -> int:
        v = self(x)
        return (v > 0) - (v < 0)

    def derivative(self) -> RationalPolynomial:
        return RationalPolynomial(i * c for i, c in enumerate(self.coeffs) if i)

    def __neg__(self) -> RationalPolynomial:
        return RationalPolynomial(-c for c in self.coeffs)

    def __add__(self, other: RationalPolynomial) -> RationalPolynomial:
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return RationalPolynomial(x + y for x, y in zip(a, b))

    def __sub__(self, other: RationalPolynomial) -> RationalPolynomial:
        return self + (-other)

    def __mul__(self, other: RationalPolynomial) -> RationalPolynomial:
        if self.is_zero() or other.is_zero():
            return RationalPolynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RationalPolynomial(out)

    def divmod(self, divisor: RationalPolynomial) -> tuple[RationalPolynomial, RationalPolynomial]:
        """Euclidean division ``self = q * divisor + r`` with ``deg r < deg divisor``."""
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dd = divisor.degree
        lead = divisor.leading
        quot = [Fraction(0)] * max(len(rem) - dd, 0)
        for shift in range(len(rem) - dd - 1, -1, -1):
            c = rem[shift + dd] / lead
            quot[shift] = c
            if c:
                for j, dc in enumerate(divisor.coeffs):
                    rem[shift + j] -= c * dc
        return RationalPolynomial(quot), RationalPolynomial(rem[:dd] if dd > 0 else ())

    def __repr__(self) -> str:
        return f"RationalPolynomial({[str(c) for c in self.coeffs]})"


@dataclass(frozen=True)
class SturmChain:
    """Sturm sequence ``p0, p1 = p0', p_{i+1} = -rem(p_{i-1}, p_i)``.

    For an input that is not squarefree every member is divided by the
    final nonzero remainder (the gcd of ``p`` and ``p'``), so the stored
    chain always ends in a nonzero constant and counts distinct roots.
    """

    polynomials: tuple[RationalPolynomial, ...]
    gcd: RationalPolynomial

    @property
    def squarefree(self) -> bool:
        return self.gcd.is_constant()

    def __len__(self) -> int:
        return len(self.polynomials)


def sturm_chain(p: RationalPolynomial) -> SturmChain:
    if p.is_zero():
        raise ValueError("Sturm chain of the zero polynomial is undefined")
    chain = [p]
    if p.degree >= 1:
        chain.append(p.derivative())
        while not chain[-1].is_constant():
            _, r = chain[-2].divmod(chain[-1])
            if r.is_zero():
                break
            chain.append(-r)
    g = chain[-1]
    if not g.is_constant():
        chain = [c.divmod(g)[0] for c in chain]
    return SturmChain(tuple(chain), g)


def _variations(signs: Iterable[int]) -> int:
    nz = [s for s in signs if s]
    return sum(1 for a, b in zip(nz, nz[1:]) if a != b)


def sign_variations(chain: SturmChain, x: Rational) -> int:
    """Number of sign changes of the chain evaluated at ``x`` (zeros skipped)."""
    x = _q(x)
    return _variations(poly.sign_at(x) for poly in chain.polynomials)


def _sign_right_of(poly: RationalPolynomial, x: Fraction) -> int:
    # sign on (x, x + eps) for infinitesimal eps: first nonvanishing derivative
    q = poly
    while not q.is_zero():
        s = q.sign_at(x)
        if s:
            return s
        q = q.derivative()
    return 0


def count_roots(chain: SturmChain, a: Rational, b: Rational) -> int:
    """Number of distinct real roots of ``chain.polynomials[0]`` in ``(a, b]``.

    If ``a`` is itself a root the chain is evaluated at ``a+`` (sign of the
    first nonvanishing derivative), which is the exact limit of nudging the
    endpoint to the right.
    """
    a, b = _q(a), _q(b)
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    va = _variations(_sign_right_of(poly, a) for poly in chain.polynomials)
    vb = sign_variations(chain, b)
    return va - vb


def build_p(kappa: Rational) -> RationalPolynomial:
    """The degree-7 polynomial in ``rho`` whose smallest positive root is rho_C2M."""
    k = _q(kappa)
    if not k > 1:
        raise ValueError(f"kappa must exceed 1, got {kappa}")
    return RationalPolynomial([
        (k - 1) ** 2,
        -2 * (k - 1) * (3 * k + 1),
        23 * k**2 - 30 * k + 23,
        -4 * (11 * k**2 - 4 * k - 11),
        31 * k**2 + 50 * k + 15,
        2 * (5 * k**2 - 14 * k - 7),
        -(23 * k**2 + 18 * k + 7),
        8 * k * (k + 1),
    ])


# Exact membership tests for the irrational window endpoints, valid for
# rational rho in [0, 1] and kappa > 1.

def above_lower(kappa: Rational, rho: Rational) -> bool:
    """``rho > (sqrt(kappa)-1)/(sqrt(kappa)+1)``, decided exactly."""
    k, r = _q(kappa), _q(rho)
    return k * (1 - r) ** 2 < (1 + r) ** 2


def below_upper(kappa: Rational, rho: Rational) -> bool:
    """``rho < 1 - sqrt(2/kappa)``, decided exactly."""
    k, r = _q(kappa), _q(rho)
    return k * (1 - r) ** 2 > 2


def _float_window(kappa: float) -> tuple[float, float]:
    s = math.sqrt(kappa)
    return (s - 1.0) / (s + 1.0), 1.0 - math.sqrt(2.0 / kappa)


def _inner_rationals(kappa: Fraction) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """Rationals ``lo_out < lower < lo_in`` and ``hi_in < upper < hi_out``."""
    lo_f, hi_f = _float_window(float(kappa))
    step = Fraction(1, 2**60)

    def walk(start: float, pred, direction: int) -> Fraction:
        x, h = Fraction(start), step
        while not pred(x):
            x += direction * h
            h *= 2
        return x

    lo_in = walk(lo_f, lambda x: above_lower(kappa, x), +1)
    lo_out = walk(lo_f, lambda x: not above_lower(kappa, x) and
                  kappa * (1 - x) ** 2 != (1 + x) ** 2, -1)
    hi_in = walk(hi_f, lambda x: below_upper(kappa, x), -1)
    hi_out = walk(hi_f, lambda x: not below_upper(kappa, x) and
                  kappa * (1 - x) ** 2 != 2, +1)
    return lo_out, lo_in, hi_in, hi_out


def window_root_count(kappa: Rational, chain: SturmChain | None = None) -> int:
    """Distinct roots of ``build_p(kappa)`` in the open window (lower, upper).

    The Sturm count runs between rational points just inside the irrational
    endpoints; the two slivers left over are certified root-free by a Sturm
    count on a slightly larger rational interval containing each of them.
    """
    k = _q(kappa)
    chain = chain or sturm_chain(build_p(k))
    lo_out, lo_in, hi_in, hi_out = _inner_rationals(k)
    if not lo_in < hi_in:
        return 0
    if count_roots(chain, lo_out, lo_in) or count_roots(chain, hi_in, hi_out):
        raise RootIsolationError(f"cannot certify window endpoints at kappa={kappa}")
    return count_roots(chain, lo_in, hi_in)


def rho_c2m_bracket(kappa: Rational, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Float bracket ``(lo, hi)`` with ``p(lo) > 0 > p(hi)`` and ``hi - lo <= tol``.

    Bisection over the admissible window; every sign is evaluated exactly.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    kf = float(kappa)
    if not kf >= KAPPA_THRESHOLD:
        raise ValueError(
            f"kappa={kf} is below the threshold 9+4*sqrt(5) = {KAPPA_THRESHOLD:.6f}"
        )
    k = _q(kappa)
    p = build_p(k)
    lo, hi = _float_window(kf)
    if p.sign_at(hi) >= 0:
        raise RootIsolationError(f"p(kappa, 1-sqrt(2/kappa)) is not negative at kappa={kf}")
    if p.sign_at(lo) <= 0:
        # only possible when kappa sits on the threshold to rounding: the root
        # coincides with the lower end of the window
        if math.isclose(kf, KAPPA_THRESHOLD, rel_tol=1e-9):
            return lo, lo
        raise RootIsolationError(f"no sign change across the window at kappa={kf}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if p.sign_at(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def rho_c2m(kappa: Rational, tol: float = DEFAULT_TOL) -> float:
    """Smallest positive root of the certificate polynomial, from above.

    Returns the upper end of the final bisection bracket, so the result is
    within ``tol`` of the root and ``p(kappa, result) < 0``, i.e. the result
    is itself an admissible C2M rate.
    """
    return rho_c2m_bracket(kappa, tol)[1]

