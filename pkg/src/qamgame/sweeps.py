"""Tabular experiment outputs: the constellation table, SIR and delay sweeps,
equilibrium reports and queue-simulation checks.

Every function returns plain rows/dicts; :func:`write_csv` renders them.
Normalizations: delay by 1/B, power by the effective gain h/sigma^2,
throughput by B and utility by B h/sigma^2, so all outputs are unit-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .config import ScenarioConfig
from .delay_qos import LinkOperatingPoint, avg_delay, simulate_mg1
from .errors import ConfigurationError, DelayInfeasibleError, DomainError
from .game import (
    NetworkEnv,
    best_response,
    closed_form_powers,
    nash_equilibrium,
)
from .modulation import (
    ModulationScheme,
    alpha,
    beta,
    efficiency,
    optimal_sir,
    to_db,
)

TABLE1_COLUMNS = (
    "b", "alpha", "beta", "gamma_star_db", "f_at_star", "b_over_gamma_db", "coefficient",
)
SIR_SWEEP_COLUMNS = ("sir_db", "coding", "b", "utility_norm")
DELAY_SWEEP_COLUMNS = (
    "coding", "delay_norm", "status", "b", "rs_over_b", "gamma_db",
    "power_norm", "throughput_norm", "utility_norm",
)
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    points: int
    spacing: str = "log"

    def __post_init__(self):
        if self.variable not in ("delay_norm", "sir_db"):
            raise DomainError(f"unknown sweep variable {self.variable!r}")
        if self.spacing not in ("log", "linear"):
            raise DomainError(f"spacing must be 'log' or 'linear', got {self.spacing!r}")
        if not self.start < self.stop:
            raise DomainError(f"sweep needs start < stop, got {self.start}, {self.stop}")
        if self.points < 2:
            raise DomainError(f"sweep needs at least 2 points, got {self.points}")
        if self.spacing == "log" and self.start <= 0:
            raise DomainError("log-spaced sweeps need a positive start")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.points)
        return np.linspace(self.start, self.stop, self.points)


DEFAULT_DELAY_SWEEP = SweepSpec("delay_norm", 10.0, 1e4, 200, "log")
DEFAULT_SIR_SWEEP = SweepSpec("sir_db", 0.0, 40.0, 400, "linear")


def cmd_table1(packet_bits: int = 100, b_list: Sequence[int] = (2, 4, 6, 8, 10)) -> list:
    rows = []
    for b in b_list:
        scheme = ModulationScheme(b, packet_bits)
        g = optimal_sir(scheme)
        f = efficiency(scheme, g)
        g_db = to_db(g)
        rows.append({
            "b": b,
            "alpha": alpha(b),
            "beta": beta(b),
            "gamma_star_db": g_db,
            "f_at_star": f,
            "b_over_gamma_db": to_db(b) - g_db,
            "coefficient": b * f / g,
        })
    return rows


def cmd_sir_sweep(schemes: Iterable[ModulationScheme], grid: SweepSpec = DEFAULT_SIR_SWEEP) -> list:
    """Normalized utility b f_b(gamma)/gamma on an SIR grid given in dB."""
    schemes = list(schemes)
    rows = []
    for sir_db in grid.values():
        g = 10.0 ** (sir_db / 10.0)
        for scheme in schemes:
            rows.append({
                "sir_db": float(sir_db),
                "coding": "coded" if scheme.coded else "uncoded",
                "b": scheme.b,
                "utility_norm": scheme.b * efficiency(scheme, g) / g,
            })
    return rows


def delay_point(
    config: ScenarioConfig, delay_norm: float, coded: bool = False
) -> dict:
    """One delay-sweep row for the config's single user at D = delay_norm / B."""
    B = config.bandwidth_hz
    row = {"coding": "coded" if coded else "uncoded", "delay_norm": float(delay_norm)}
    user = config.user_profile(0, delay_bound=delay_norm / B, coded=coded)
    try:
        s = best_response(user, B, config.policy)
    except DelayInfeasibleError:
        row["status"] = INFEASIBLE
        return row
    env = NetworkEnv(B, config.noise_w, [user])
    power = closed_form_powers(env, [(s.symbol_rate, s.sir)])[0]
    h_eff = user.gain / config.noise_w
    f = efficiency(user.scheme(s.b), s.sir)
    utility = s.b * s.symbol_rate * f / power
    row.update({
        "status": "ok",
        "b": s.b,
        "rs_over_b": s.symbol_rate / B,
        "gamma_db": to_db(s.sir),
        "power_norm": power * h_eff,
        "throughput_norm": s.b * s.symbol_rate / B,
        "utility_norm": utility / (B * h_eff),
    })
    return row


def cmd_delay_sweep(
    config: ScenarioConfig,
    grid: SweepSpec = DEFAULT_DELAY_SWEEP,
    coded: Optional[bool] = None,
) -> list:
    """Best response of a single user as the delay bound is varied.

    With coding enabled the uncoded rows come first, then the coded ones.
    """
    if len(config.users) != 1:
        raise ConfigurationError(
            f"delay sweep needs a single-user scenario, got {len(config.users)} users"
        )
    coded = config.coding_enabled if coded is None else coded
    modes = (False, True) if coded else (False,)
    return [delay_point(config, d, mode) for mode in modes for d in grid.values()]


def cmd_nash(config: ScenarioConfig, tol: float = 1e-12, max_iter: int = 100_000) -> dict:
    env = config.network()
    result = nash_equilibrium(env, config.policy, tol=tol, max_iter=max_iter)
    users = []
    for s, u in zip(result.strategies, result.utilities):
        users.append({
            "b": s.b,
            "rs_hz": s.symbol_rate,
            "gamma_db": to_db(s.sir),
            "power_w": s.power,
            "utility_bits_per_joule": u,
        })
    return {
        "version": 1,
        "policy": config.policy.value,
        "coded": config.coding_enabled,
        "users": users,
        "sum_size": result.sum_size,
        "iterations": result.iterations,
        "converged": result.converged,
        "diagnostics": {
            "iterated_power_w": [float(f"{p:.8e}") for p in result.powers],
            "closed_form_power_w": [float(f"{p:.8e}") for p in result.closed_form_powers],
            "max_rel_power_gap": result.max_rel_power_gap,
        },
    }


def cmd_validate_mg1(config: ScenarioConfig, n_packets: int = 10**6, seed: int = 1) -> dict:
    """Compare the analytic mean delay with a simulated queue at the user's
    best-response operating point."""
    if len(config.users) != 1:
        raise ConfigurationError(
            f"validate-mg1 needs a single-user scenario, got {len(config.users)} users"
        )
    user = config.user_profile(0, coded=config.coding_enabled)
    s = best_response(user, config.bandwidth_hz, config.policy)
    op = LinkOperatingPoint(s.symbol_rate, s.sir, user.scheme(s.b))
    analytic = avg_delay(op, user.traffic)
    mean, stderr = simulate_mg1(op, user.traffic, n_packets, seed)
    diff = mean - analytic
    if stderr > 0:
        z = diff / stderr
    else:
        z = 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return {
        "b": s.b,
        "rs_hz": s.symbol_rate,
        "gamma_db": to_db(s.sir),
        "n_packets": n_packets,
        "seed": seed,
        "analytic_delay_s": analytic,
        "simulated_delay_s": mean,
        "stderr_s": stderr,
        "z": z,
    }


def _fmt(value, digits: int) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, str)):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), f".{digits}g")


def write_csv(rows: Sequence[dict], columns: Sequence[str], out: TextIO, digits: int = 10) -> None:
    """Locale-independent CSV: '.' decimals, '\\n' line ends, header always."""
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(_fmt(row.get(c), digits) for c in columns) + "\n")
