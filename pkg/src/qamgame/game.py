"""Delay-constrained best responses and the matched-filter Nash equilibrium.

Each user's SIR-domain best response (constellation, symbol rate, target
SIR) depends only on its own traffic and the bandwidth, so the multi-user
game reduces to finding the power vector that meets all SIR targets at
once.  With a matched filter the SIR of user k is

    gamma_k = (B / R_k) p_k h_k / (sigma^2 + sum_{j != k} p_j h_j)

and the targets are jointly reachable iff the user sizes
``Phi_k = (1 + B / (R_k gamma_k))**-1`` sum to less than one.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .delay_qos import (
    TrafficQoS,
    feasible_at_bandwidth,
    omega_star,
    required_efficiency,
    sir_floor,
)
from .errors import ConvergenceError, DelayInfeasibleError, DomainError, SystemInfeasibleError
from .modulation import CodingGainModel, ModulationScheme, efficiency, optimal_sir

log = logging.getLogger(__name__)

__all__ = [
    "Policy",
    "UserProfile",
    "NetworkEnv",
    "Strategy",
    "EquilibriumResult",
    "select_constellation",
    "best_response",
    "user_size",
    "achieved_sir",
    "required_power",
    "closed_form_powers",
    "matched_filter_utility",
    "nash_equilibrium",
]


class Policy(enum.Enum):
    """Which point of the best-response rate interval to use.

    Any R_s in [Omega*/b, B] is a best response when Omega*/b <= B.
    """

    PARETO_DOMINANT = "pareto"
    MAX_RATE = "maxrate"


@dataclass(frozen=True)
class UserProfile:
    gain: float
    traffic: TrafficQoS
    packet_bits: int = 100
    b_max: int = 10
    coding: Optional[CodingGainModel] = None

    def __post_init__(self):
        if not self.gain > 0:
            raise DomainError(f"channel gain must be positive, got {self.gain}")
        if self.b_max < 2 or self.b_max % 2:
            raise DomainError(f"b_max must be an even integer >= 2, got {self.b_max}")

    def scheme(self, b: int) -> ModulationScheme:
        return ModulationScheme(b, self.packet_bits, self.coding)


@dataclass(frozen=True)
class NetworkEnv:
    bandwidth: float
    noise_power: float
    users: tuple

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise DomainError(f"bandwidth must be positive, got {self.bandwidth}")
        if not self.noise_power > 0:
            raise DomainError(f"noise power must be positive, got {self.noise_power}")
        object.__setattr__(self, "users", tuple(self.users))
        if not self.users:
            raise DomainError("a network needs at least one user")


@dataclass(frozen=True)
class Strategy:
    b: int
    symbol_rate: float
    sir: float
    power: Optional[float] = None


@dataclass
class EquilibriumResult:
    strategies: list
    utilities: list
    sum_size: float
    iterations: int
    converged: bool
    closed_form_powers: list = field(default_factory=list)
    max_rel_power_gap: float = float("nan")
    history: Optional[list] = None

    @property
    def powers(self) -> list:
        return [s.power for s in self.strategies]


def select_constellation(user: UserProfile, bandwidth: float) -> int:
    """Smallest even b <= b_max whose delay bound is reachable at R_s = B."""
    eta = float("nan")
    for b in range(2, user.b_max + 1, 2):
        scheme = user.scheme(b)
        if feasible_at_bandwidth(scheme, bandwidth, user.traffic):
            return b
        eta = required_efficiency(scheme, bandwidth, user.traffic)
    raise DelayInfeasibleError(
        f"delay bound {user.traffic.delay_bound} s cannot be met by any b <= {user.b_max}: "
        f"required efficiency at b={user.b_max}, R_s=B is {eta:.6g}",
        eta=eta,
    )


def best_response(
    user: UserProfile, bandwidth: float, policy: Policy = Policy.PARETO_DOMINANT
) -> Strategy:
    """Energy-optimal (b, R_s, gamma) for one user under its delay bound.

    The lowest feasible constellation is used. If the energy-optimal SIR can
    meet the bound at some rate up to B, the user runs at that SIR;
    otherwise it runs at R_s = B and sits on the delay-imposed SIR floor.
    """
    b = select_constellation(user, bandwidth)
    scheme = user.scheme(b)
    critical_rate = omega_star(scheme, user.traffic) / b
    if critical_rate <= bandwidth:
        rate = critical_rate if policy is Policy.PARETO_DOMINANT else bandwidth
        return Strategy(b, rate, optimal_sir(scheme))
    return Strategy(b, bandwidth, sir_floor(scheme, bandwidth, user.traffic))


def user_size(symbol_rate: float, sir: float, bandwidth: float) -> float:
    x = symbol_rate * sir
    return x / (x + bandwidth)


def achieved_sir(env: NetworkEnv, k: int, rates: Sequence[float], powers: Sequence[float]) -> float:
    interference = env.noise_power + sum(
        p * u.gain for j, (p, u) in enumerate(zip(powers, env.users)) if j != k
    )
    return env.bandwidth / rates[k] * powers[k] * env.users[k].gain / interference


def required_power(
    env: NetworkEnv,
    k: int,
    targets: Sequence[tuple[float, float]],
    powers: Sequence[float],
) -> float:
    """Power that puts user k exactly on its SIR target given the others' powers.

    ``targets`` holds one ``(R_s, gamma)`` pair per user.
    """
    rate, sir = targets[k]
    interference = env.noise_power + sum(
        p * u.gain for j, (p, u) in enumerate(zip(powers, env.users)) if j != k
    )
    return sir * (rate / env.bandwidth) * interference / env.users[k].gain


def closed_form_powers(env: NetworkEnv, targets: Sequence[tuple[float, float]]) -> list:
    """Unique power vector meeting every SIR target simultaneously:
    ``p_k = sigma^2 Phi_k / (h_k (1 - sum_j Phi_j))``."""
    sizes = [user_size(r, g, env.bandwidth) for r, g in targets]
    total = math.fsum(sizes)
    if total >= 1.0:
        raise SystemInfeasibleError(
            f"sum of user sizes {total:.6g} >= 1: SIR targets are not jointly reachable",
            sum_size=total,
        )
    slack = 1.0 - total
    return [env.noise_power * phi / (u.gain * slack) for phi, u in zip(sizes, env.users)]


def matched_filter_utility(
    bandwidth: float,
    f: float,
    gain: float,
    noise_power: float,
    sir: float,
    own_size: float,
    others_size: float,
) -> float:
    """Equilibrium utility per symbol, B f h/(sigma^2 gamma) (1 - S_-k/(1 - Phi_k)).

    Multiply by b to get bits per joule.
    """
    return bandwidth * f * gain / (noise_power * sir) * (1.0 - others_size / (1.0 - own_size))


def nash_equilibrium(
    env: NetworkEnv,
    policy: Policy = Policy.PARETO_DOMINANT,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    keep_history: bool = False,
) -> EquilibriumResult:
    """Best responses plus sequential (Gauss-Seidel) power iteration.

    Powers start at zero and are updated user by user; iteration stops when
    the largest relative power change in a sweep drops below ``tol``.  The
    fixed point is checked against :func:`closed_form_powers`.
    """
    strategies = []
    for k, user in enumerate(env.users):
        try:
            strategies.append(best_response(user, env.bandwidth, policy))
        except DelayInfeasibleError as exc:
            raise DelayInfeasibleError(f"user {k}: {exc}", user=k, eta=exc.eta) from exc

    targets = [(s.symbol_rate, s.sir) for s in strategies]
    closed = closed_form_powers(env, targets)
    sum_size = math.fsum(user_size(r, g, env.bandwidth) for r, g in targets)

    gains = [u.gain for u in env.users]
    powers = [0.0] * len(env.users)
    history = [list(powers)] if keep_history else None
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        total = math.fsum(p * h for p, h in zip(powers, gains))
        worst = 0.0
        for k, (rate, sir) in enumerate(targets):
            others = total - powers[k] * gains[k]
            new = sir * (rate / env.bandwidth) * (env.noise_power + others) / gains[k]
            worst = max(worst, abs(new - powers[k]) / new)
            total = others + new * gains[k]
            powers[k] = new
        if history is not None:
            history.append(list(powers))
        if worst < tol:
            converged = True
            break

    gap = max(abs(p - c) / c for p, c in zip(powers, closed))
    log.debug("power iteration: %d sweeps, converged=%s, gap to closed form %.3g", iterations, converged, gap)
    if converged and gap > 1e-8:
        raise ConvergenceError(
            f"power iteration settled {gap:.3g} away (relative) from the closed-form solution"
        )

    final = [Strategy(s.b, s.symbol_rate, s.sir, p) for s, p in zip(strategies, powers)]
    utilities = [
        s.b * s.symbol_rate * efficiency(u.scheme(s.b), s.sir) / s.power
        for s, u in zip(final, env.users)
    ]
    return EquilibriumResult(
        strategies=final,
        utilities=utilities,
        sum_size=sum_size,
        iterations=iterations,
        converged=converged,
        closed_form_powers=closed,
        max_rel_power_gap=gap,
        history=history,
    )
