"""Packet success and efficiency functions for square M-QAM.

A scheme carries ``b`` information bits per symbol (``M = 2**b``, ``b`` even),
a packet length ``L`` in bits and an optional trellis-coding gain table.
With coding, the efficiency is evaluated at the effective SIR ``gamma * G_b``
where ``G_b`` is a per-constellation constant gain.

All SIR arguments are linear (not dB) symbol SIRs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Optional

from .errors import ConfigurationError, DomainError, InfeasibleTargetError
from .numerics import (
    RootTolerance,
    erf,
    expand_bracket,
    find_root,
    gaussian_pdf,
    q_function,
)

__all__ = [
    "CodingGainModel",
    "ModulationScheme",
    "DEFAULT_TCM_GAINS_DB",
    "to_db",
    "from_db",
    "alpha",
    "beta",
    "max_efficiency",
    "packet_success",
    "efficiency",
    "efficiency_derivative",
    "efficiency_inverse",
    "log_slope",
    "optimal_sir",
    "peak_utility_coefficient",
]

_LN2 = math.log(2.0)

# Placeholder gains for an 8-state rate-2/3 TCM; override for quantitative work.
DEFAULT_TCM_GAINS_DB = {2: 3.0, 4: 3.6, 6: 3.6, 8: 3.6, 10: 3.6}

# bisection with a purely relative stopping rule: brackets never contain 0
_SIR_TOL = RootTolerance(rel_x=1e-12, max_iter=200, abs_floor=0.0)


def to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def from_db(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def _check_b(b: int) -> int:
    if isinstance(b, bool) or int(b) != b:
        raise DomainError(f"constellation size b must be an integer, got {b!r}")
    b = int(b)
    if b < 2 or b % 2:
        raise DomainError(f"only square constellations (even b >= 2) are supported, got b={b}")
    return b


@dataclass(frozen=True)
class CodingGainModel:
    """Constant effective coding gain per constellation size, in dB."""

    gains_db: Mapping[int, float]
    info: str = ""

    def __post_init__(self):
        items = []
        for b, g in dict(self.gains_db).items():
            b = _check_b(int(b))
            g = float(g)
            if not math.isfinite(g) or g < 0:
                raise ConfigurationError(f"coding gain for b={b} must be >= 0 dB, got {g}")
            items.append((b, g))
        # stored as a sorted tuple so schemes stay hashable
        object.__setattr__(self, "gains_db", tuple(sorted(items)))

    def gain_db(self, b: int) -> float:
        for bb, g in self.gains_db:
            if bb == b:
                return g
        raise ConfigurationError(f"no coding gain configured for b={b}")

    def gain(self, b: int) -> float:
        return from_db(self.gain_db(b))


@dataclass(frozen=True)
class ModulationScheme:
    b: int
    L: int = 100
    coding: Optional[CodingGainModel] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "b", _check_b(self.b))
        if isinstance(self.L, bool) or int(self.L) != self.L or self.L < 1:
            raise DomainError(f"packet length L must be a positive integer, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        if self.coding is not None:
            # fail early rather than on first evaluation
            self.coding.gain_db(self.b)

    @property
    def coded(self) -> bool:
        return self.coding is not None

    def gain(self) -> float:
        """Linear coding gain (1 for uncoded)."""
        return 1.0 if self.coding is None else self.coding.gain(self.b)

    def with_b(self, b: int) -> "ModulationScheme":
        return ModulationScheme(b, self.L, self.coding)

    def uncoded(self) -> "ModulationScheme":
        return ModulationScheme(self.b, self.L)


def alpha(b: int) -> float:
    b = _check_b(b)
    return 2.0 * (1.0 - 2.0 ** (-b / 2))


def beta(b: int) -> float:
    b = _check_b(b)
    return 3.0 / (2.0**b - 1.0)


def max_efficiency(L: int) -> float:
    """Supremum of f_b over gamma: 1 - 2**-L."""
    return -math.expm1(-L * _LN2)


def _check_sir(gamma: float) -> float:
    gamma = float(gamma)
    if not gamma >= 0:
        raise DomainError(f"SIR must be >= 0, got {gamma}")
    return gamma


def _log_base(b: int, gamma_eff: float) -> float:
    """log(1 - alpha_b Q(sqrt(beta_b gamma)))."""
    return math.log1p(-alpha(b) * q_function(math.sqrt(beta(b) * gamma_eff)))


def packet_success(scheme: ModulationScheme, gamma: float) -> float:
    """Probability that all 2L/b symbols of a packet are detected correctly.

    The coding gain, if any, is applied to ``gamma``.
    """
    gamma = _check_sir(gamma) * scheme.gain()
    if math.isinf(gamma):
        return 1.0
    n = 2.0 * scheme.L / scheme.b
    return math.exp(n * _log_base(scheme.b, gamma))


def efficiency(scheme: ModulationScheme, gamma: float) -> float:
    """Packet success rate shifted by 2**-L so that it vanishes at gamma = 0."""
    gamma = _check_sir(gamma) * scheme.gain()
    if gamma == 0.0:
        return 0.0
    if math.isinf(gamma):
        return max_efficiency(scheme.L)
    b, L = scheme.b, scheme.L
    n = 2.0 * L / b
    # Near gamma = 0 the difference ps - 2**-L cancels catastrophically, so
    # write 1 - alpha Q(u) = 2**(-b/2) * (1 + alpha 2**(b/2) erf(u/sqrt2)/2)
    # and use expm1 on the excess exponent.
    excess = _excess(b, n, gamma)
    if excess < 1.0:
        return math.exp(-L * _LN2) * math.expm1(excess)
    return math.exp(n * _log_base(b, gamma)) - math.exp(-L * _LN2)


def efficiency_derivative(scheme: ModulationScheme, gamma: float) -> float:
    """Analytic d f_b / d gamma (chain rule through Q), including the coding gain."""
    gamma = _check_sir(gamma)
    if gamma == 0.0:
        raise DomainError("efficiency derivative is singular at gamma = 0")
    g = scheme.gain()
    gamma_eff = gamma * g
    b, L = scheme.b, scheme.L
    n = 2.0 * L / b
    bb = beta(b)
    u = math.sqrt(bb * gamma_eff)
    power = math.exp((n - 1.0) * _log_base(b, gamma_eff))
    return n * power * alpha(b) * gaussian_pdf(u) * bb / (2.0 * u) * g


def efficiency_inverse(scheme: ModulationScheme, eta: float) -> float:
    """SIR at which the efficiency equals ``eta``."""
    eta = float(eta)
    if not eta >= 0:
        raise DomainError(f"target efficiency must be >= 0, got {eta}")
    if eta >= max_efficiency(scheme.L):
        raise InfeasibleTargetError(
            f"target efficiency {eta} is not below the supremum 1 - 2^-{scheme.L}"
        )
    if eta == 0.0:
        return 0.0

    def residual(g: float) -> float:
        return efficiency(scheme, g) - eta

    lo, hi = expand_bracket(residual, 1.0)
    if lo == hi:
        return lo
    return find_root(residual, lo, hi, _SIR_TOL)


def _excess(b: int, n: float, gamma_eff: float) -> float:
    """log(ps / 2**-L), the log-ratio of packet success to its gamma = 0 value."""
    u = math.sqrt(beta(b) * gamma_eff)
    return n * math.log1p(alpha(b) * 2.0 ** (b / 2) * 0.5 * erf(u / math.sqrt(2.0)))


def log_slope(scheme: ModulationScheme, gamma: float) -> float:
    """Elasticity gamma f'(gamma) / f(gamma), evaluated without forming f.

    Stays finite for packet lengths where f itself underflows.
    """
    gamma = _check_sir(gamma)
    if gamma == 0.0:
        raise DomainError("elasticity is undefined at gamma = 0")
    gamma_eff = gamma * scheme.gain()
    b = scheme.b
    n = 2.0 * scheme.L / b
    bb = beta(b)
    u = math.sqrt(bb * gamma_eff)
    a = alpha(b)
    dlog_ps = n * a * gaussian_pdf(u) * bb / (2.0 * u) / (1.0 - a * q_function(u))
    return gamma_eff * dlog_ps / -math.expm1(-_excess(b, n, gamma_eff))


def _stationarity(scheme: ModulationScheme):
    # same sign as gamma f' - f
    def g(gamma: float) -> float:
        return log_slope(scheme, gamma) - 1.0

    return g


@lru_cache(maxsize=256)
def optimal_sir(scheme: ModulationScheme) -> float:
    """Energy-optimal SIR: the root of gamma f'(gamma) = f(gamma) where
    b f(gamma)/gamma peaks.

    gamma f' - f is positive below the optimum and negative above it. Very
    close to gamma = 0 the 2**-L offset makes f behave like sqrt(gamma), so
    there is a second, physically irrelevant (-) -> (+) crossing down
    there; brackets of that kind are skipped by restarting the search above
    them.
    """
    g = _stationarity(scheme)
    lo, hi = expand_bracket(g, 1.0)
    if lo == hi:
        return lo
    if g(lo) <= 0 < g(hi):
        # landed on the low crossing: walk upward to the descending one
        for _ in range(200):
            lo, hi = hi, 2.0 * hi
            if g(hi) <= 0:
                break
        else:
            raise DomainError(f"could not isolate the energy-optimal SIR for {scheme}")
    return find_root(g, lo, hi, _SIR_TOL)


def peak_utility_coefficient(scheme: ModulationScheme) -> float:
    """b f_b(gamma*) / gamma*, i.e. the peak utility in units of B * h_eff."""
    gs = optimal_sir(scheme)
    return scheme.b * efficiency(scheme, gs) / gs
