"""Average-delay QoS for a Poisson source over a stop-and-retransmit link.

Packets of ``L`` bits arrive at rate ``lambda`` and are served FIFO.  Each
transmission takes ``tau = L / (b R_s)`` seconds and succeeds with
probability ``f_b(gamma)``; failed packets are resent until they get
through, so the service time is ``tau`` times a geometric number of
attempts.  That is an M/G/1 queue, and Pollaczek-Khinchine gives the mean
sojourn time

    W = tau (1 - lambda tau / 2) / (f - lambda tau),    f > lambda tau.

:func:`simulate_mg1` runs the queue directly and serves as an independent
check of that formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DelayInfeasibleError, DomainError, InfeasibleTargetError, InstabilityError
from .modulation import (
    ModulationScheme,
    efficiency,
    efficiency_inverse,
    max_efficiency,
    optimal_sir,
)

__all__ = [
    "TrafficQoS",
    "LinkOperatingPoint",
    "transmission_time",
    "service_rate",
    "avg_delay",
    "required_efficiency",
    "sir_floor",
    "omega_star",
    "feasible_at_bandwidth",
    "simulate_mg1",
]


@dataclass(frozen=True)
class TrafficQoS:
    """Poisson arrival rate (packets/s) and mean-delay bound (s)."""

    arrival_rate: float
    delay_bound: float

    def __post_init__(self):
        if not self.arrival_rate >= 0 or math.isinf(self.arrival_rate):
            raise DomainError(f"arrival rate must be finite and >= 0, got {self.arrival_rate}")
        if not self.delay_bound > 0:
            raise DomainError(f"delay bound must be > 0, got {self.delay_bound}")


@dataclass(frozen=True)
class LinkOperatingPoint:
    symbol_rate: float
    sir: float
    scheme: ModulationScheme

    def __post_init__(self):
        if not (self.symbol_rate > 0 and math.isfinite(self.symbol_rate)):
            raise DomainError(f"symbol rate must be positive, got {self.symbol_rate}")
        if not self.sir >= 0:
            raise DomainError(f"SIR must be >= 0, got {self.sir}")

    @property
    def tau(self) -> float:
        return transmission_time(self.scheme, self.symbol_rate)


def transmission_time(scheme: ModulationScheme, symbol_rate: float) -> float:
    """Seconds to send one packet: L / (b R_s)."""
    return scheme.L / (scheme.b * symbol_rate)


def service_rate(op: LinkOperatingPoint) -> float:
    """Successful packets per second while the queue is busy."""
    return op.symbol_rate * op.scheme.b * efficiency(op.scheme, op.sir) / op.scheme.L


def avg_delay(op: LinkOperatingPoint, traffic: TrafficQoS) -> float:
    tau = op.tau
    f = efficiency(op.scheme, op.sir)
    load = traffic.arrival_rate * tau
    if not f > load:
        raise InstabilityError(
            f"queue is unstable: f={f} <= lambda*tau={load}"
        )
    return tau * (1.0 - 0.5 * load) / (f - load)


def required_efficiency(
    scheme: ModulationScheme, symbol_rate: float, traffic: TrafficQoS
) -> float:
    """Packet success rate needed so the mean delay equals the bound.

    Equal to ``lambda tau + tau (1 - lambda tau / 2) / D``.
    """
    if not symbol_rate > 0:
        raise DomainError(f"symbol rate must be positive, got {symbol_rate}")
    L, b = scheme.L, scheme.b
    lam, D = traffic.arrival_rate, traffic.delay_bound
    rate = b * symbol_rate
    return L * lam / rate + L / (rate * D) - L * L * lam / (2.0 * rate * rate * D)


def _delay_feasible(scheme, symbol_rate, traffic) -> tuple[bool, float]:
    eta = required_efficiency(scheme, symbol_rate, traffic)
    load = traffic.arrival_rate * transmission_time(scheme, symbol_rate)
    # load >= 1 would let the quadratic term drag eta below 1 spuriously
    ok = load < 1.0 and eta < max_efficiency(scheme.L)
    return ok, eta


def sir_floor(scheme: ModulationScheme, symbol_rate: float, traffic: TrafficQoS) -> float:
    """Smallest SIR that meets the delay bound at ``symbol_rate``."""
    ok, eta = _delay_feasible(scheme, symbol_rate, traffic)
    if not ok:
        raise DelayInfeasibleError(
            f"delay bound {traffic.delay_bound} s unreachable with b={scheme.b} at "
            f"R_s={symbol_rate}: required efficiency {eta} >= 1 - 2^-{scheme.L}",
            eta=eta,
        )
    assert eta >= 0
    try:
        return efficiency_inverse(scheme, eta)
    except InfeasibleTargetError as exc:  # pragma: no cover - excluded by the check above
        raise DelayInfeasibleError(str(exc), eta=eta) from exc


def omega_star(scheme: ModulationScheme, traffic: TrafficQoS) -> float:
    """Bit rate b R_s at which running at the energy-optimal SIR meets the
    delay bound with equality."""
    L = scheme.L
    lam, D = traffic.arrival_rate, traffic.delay_bound
    f_star = efficiency(scheme, optimal_sir(scheme))
    dl = D * lam
    root = math.sqrt(1.0 + dl * dl + 2.0 * (1.0 - f_star) * dl)
    return (L / D) * (1.0 + dl + root) / (2.0 * f_star)


def feasible_at_bandwidth(
    scheme: ModulationScheme, bandwidth: float, traffic: TrafficQoS
) -> bool:
    """Whether the delay bound can be met with ``R_s = B`` (the largest rate)."""
    if not bandwidth > 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth}")
    return _delay_feasible(scheme, bandwidth, traffic)[0]


def simulate_mg1(
    op: LinkOperatingPoint,
    traffic: TrafficQoS,
    n_packets: int,
    seed: int,
    n_batches: int = 50,
) -> tuple[float, float]:
    """Monte Carlo mean sojourn time of the ARQ queue, with its standard error.

    Arrivals are Poisson, service is ``tau * Geometric(f)``, discipline FIFO,
    starting empty.  Departure times follow the max-plus form of the Lindley
    recursion, ``d_i = C_i + max_{j<=i}(a_j - C_{j-1})`` with ``C`` the
    cumulative service, so the whole run is vectorized.

    Sojourn times of consecutive packets are correlated, so the standard
    error comes from ``n_batches`` batch means rather than the raw sample.
    Randomness: ``numpy.random.default_rng(seed)`` (PCG64), drawing all
    interarrival times first and then all attempt counts.

    Epochs are absolute times, so each sojourn carries a rounding error of
    about ``n_packets / lambda * 2.2e-16``; irrelevant unless the load is
    many orders of magnitude below one.
    """
    if n_packets < 1:
        raise DomainError(f"n_packets must be >= 1, got {n_packets}")
    tau = op.tau
    f = efficiency(op.scheme, op.sir)
    lam = traffic.arrival_rate
    if not f > lam * tau:
        raise InstabilityError(f"queue is unstable: f={f} <= lambda*tau={lam * tau}")

    rng = np.random.default_rng(seed)
    if lam > 0:
        arrivals = np.cumsum(rng.exponential(1.0 / lam, size=n_packets))
    else:
        arrivals = None
    attempts = rng.geometric(min(f, 1.0), size=n_packets)
    service = tau * attempts

    if arrivals is None:
        # no queueing: every packet finds the server idle
        sojourn = service
    else:
        cum = np.cumsum(service)
        prev = np.concatenate(([0.0], cum[:-1]))
        departures = cum + np.maximum.accumulate(arrivals - prev)
        sojourn = departures - arrivals

    mean = float(np.mean(sojourn))
    k = min(n_batches, n_packets)
    if k < 2:
        return mean, float("nan")
    usable = (n_packets // k) * k
    batch_means = sojourn[:usable].reshape(k, -1).mean(axis=1)
    stderr = float(np.std(batch_means, ddof=1) / math.sqrt(k))
    return mean, stderr
