"""Special functions and bracketed scalar root finding.

The Gaussian tail is evaluated with an in-house erfc so that results depend
only on the platform's ``exp``/``log``/``sqrt``: a non-alternating power
series below ``_SERIES_CUTOFF`` and a Lentz-evaluated continued fraction
above it.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable

from .errors import BracketError, ConvergenceError, DomainError

__all__ = [
    "RootTolerance",
    "erf",
    "erfc",
    "q_function",
    "gaussian_pdf",
    "find_root",
    "expand_bracket",
]

_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_HALF_LOG_PI = 0.5 * math.log(math.pi)

_SERIES_CUTOFF = 2.0
_EPS = 4.0 * sys.float_info.epsilon  # stop within a couple of ulps of 1
_TINY = 1e-300
_CF_MAX_TERMS = 10_000


@dataclass(frozen=True)
class RootTolerance:
    """Stopping rule for :func:`find_root`.

    The returned root satisfies ``|x - x_true| <= rel_x * max(|x|, abs_floor)``.
    ``abs_floor = 1`` gives a mixed absolute/relative test; callers that
    know the root is bracketed away from zero can set it to 0 for a purely
    relative one.
    """

    rel_x: float = 1e-12
    max_iter: int = 200
    abs_floor: float = 1.0

    def __post_init__(self):
        if not self.rel_x > 0:
            raise DomainError(f"rel_x must be positive, got {self.rel_x}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.abs_floor < 0:
            raise DomainError(f"abs_floor must be >= 0, got {self.abs_floor}")


DEFAULT_TOLERANCE = RootTolerance()


def _check_finite(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"expected a finite argument, got {x}")
    return x


def _erf_series(z: float) -> float:
    # erf(z) = 2/sqrt(pi) * exp(-z^2) * sum_n (2 z^2)^n z / (1*3*...*(2n+1));
    # all terms positive, so no cancellation.
    two_z2 = 2.0 * z * z
    term = z
    total = z
    n = 0
    while term > _EPS * total:
        n += 1
        term *= two_z2 / (2 * n + 1)
        total += term
    return 2.0 * _INV_SQRT_PI * math.exp(-z * z) * total


def _log_erfc_cf(z: float) -> float:
    """log(erfc(z)) for z >= _SERIES_CUTOFF via the Laplace continued fraction.

    erfc(z) = exp(-z^2)/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    """
    # modified Lentz on F = z + a1/(z + a2/(z + ...)), a_n = n/2
    f = z
    c = z
    d = 0.0
    for n in range(1, _CF_MAX_TERMS):
        a = 0.5 * n
        d = z + a * d
        if d == 0.0:
            d = _TINY
        c = z + a / c
        if c == 0.0:
            c = _TINY
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:  # pragma: no cover - the fraction converges for z >= 2 in < 100 terms
        raise ConvergenceError(f"erfc continued fraction did not converge at z={z}")
    return -z * z - math.log(f) - _HALF_LOG_PI


def erfc(z: float) -> float:
    """Complementary error function, accurate to ~1e-14 relative for z >= 0."""
    z = _check_finite(z)
    if z < 0.0:
        return 2.0 - erfc(-z)
    if z < _SERIES_CUTOFF:
        return 1.0 - _erf_series(z)
    return math.exp(_log_erfc_cf(z))


def erf(z: float) -> float:
    """Error function; uses the series directly for small |z| (no 1 - erfc loss)."""
    z = _check_finite(z)
    if z < 0.0:
        return -erf(-z)
    if z < _SERIES_CUTOFF:
        return _erf_series(z)
    return 1.0 - math.exp(_log_erfc_cf(z))


def q_function(x: float) -> float:
    """Gaussian tail probability Q(x) = P(N(0,1) > x) = erfc(x/sqrt(2))/2.

    The large-argument branch works with log(Q), so the result stays
    non-zero (subnormal) up to x ~ 38 instead of underflowing early.
    """
    x = _check_finite(x)
    return 0.5 * erfc(x * _INV_SQRT2)


def gaussian_pdf(x: float) -> float:
    """Standard normal density."""
    x = _check_finite(x)
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: RootTolerance = DEFAULT_TOLERANCE,
) -> float:
    """Bisection on ``[lo, hi]``; ``f(lo)`` and ``f(hi)`` must differ in sign.

    An endpoint where ``f`` is exactly zero is returned as is. Bisection is
    used deliberately: every target in this package is monotone or
    unimodal, and the output is a deterministic function of the inputs.
    """
    lo = _check_finite(lo)
    hi = _check_finite(hi)
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    f_lo = f(lo)
    if f_lo == 0.0:
        return lo
    f_hi = f(hi)
    if f_hi == 0.0:
        return hi
    if math.isnan(f_lo) or math.isnan(f_hi) or (f_lo > 0) == (f_hi > 0):
        raise BracketError(
            f"no sign change on [{lo}, {hi}]: f(lo)={f_lo}, f(hi)={f_hi}"
        )
    for _ in range(tol.max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol.rel_x * max(abs(mid), tol.abs_floor) or mid in (lo, hi):
            return mid
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    raise ConvergenceError(
        f"bisection did not reach rel_x={tol.rel_x} in {tol.max_iter} iterations"
    )


def expand_bracket(
    f: Callable[[float], float], x0: float, max_doublings: int = 200
) -> tuple[float, float]:
    """Find ``(lo, hi)`` around a sign change of ``f`` on the positive axis.

    Probes ``x0 * 2**k`` and ``x0 / 2**k`` for k = 1, 2, ..., trying the
    upward probe first at each step, and returns the adjacent pair of probes
    across which ``f`` changes sign (or hits zero).
    """
    x0 = _check_finite(x0)
    if not x0 > 0:
        raise DomainError(f"x0 must be positive, got {x0}")
    f0 = f(x0)
    if f0 == 0.0:
        return x0, x0
    positive = f0 > 0
    up, down = x0, x0
    for _ in range(max_doublings):
        nxt = up * 2.0
        f_nxt = f(nxt)
        if f_nxt == 0.0 or (f_nxt > 0) != positive:
            return up, nxt
        up = nxt
        nxt = down * 0.5
        f_nxt = f(nxt)
        if f_nxt == 0.0 or (f_nxt > 0) != positive:
            return nxt, down
        down = nxt
    raise BracketError(
        f"no sign change within {max_doublings} doublings/halvings of x0={x0}"
    )
