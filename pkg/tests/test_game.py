import math
import random

import numpy as np
import pytest

from qamgame.delay_qos import (
    LinkOperatingPoint,
    TrafficQoS,
    avg_delay,
    omega_star,
    required_efficiency,
    sir_floor,
)
from qamgame.errors import DelayInfeasibleError, DomainError, SystemInfeasibleError
from qamgame.game import (
    NetworkEnv,
    Policy,
    UserProfile,
    achieved_sir,
    best_response,
    closed_form_powers,
    matched_filter_utility,
    nash_equilibrium,
    required_power,
    select_constellation,
    user_size,
)
from qamgame.modulation import ModulationScheme, efficiency, optimal_sir, to_db
from scenarios import random_dual_feasible_network, random_network

B = 1.0
L = 100
LAM = 0.1 * B / L  # source bit rate 0.1 B


def _user(delay_norm, lam=LAM, **kw):
    return UserProfile(1.0, TrafficQoS(lam, delay_norm / B), **kw)


def test_profile_and_env_validation():
    with pytest.raises(DomainError):
        UserProfile(0.0, TrafficQoS(1.0, 1.0))
    with pytest.raises(DomainError):
        UserProfile(1.0, TrafficQoS(1.0, 1.0), b_max=5)
    with pytest.raises(DomainError):
        NetworkEnv(1.0, 1.0, [])
    with pytest.raises(DomainError):
        NetworkEnv(0.0, 1.0, [_user(1e3)])


def test_select_constellation_loose():
    assert select_constellation(_user(1e4), B) == 2


def test_select_constellation_impossible():
    # below one packet time at the densest constellation and full rate
    u = _user(0.9 * L / (10 * B), lam=0.0)
    with pytest.raises(DelayInfeasibleError) as info:
        select_constellation(u, B)
    assert info.value.eta > 1


def test_select_constellation_monotone_in_delay():
    bs = []
    for d in np.geomspace(1e4, 11.0, 300):
        try:
            bs.append(select_constellation(_user(d), B))
        except DelayInfeasibleError:
            break
    assert bs[0] == 2
    assert all(a <= c for a, c in zip(bs, bs[1:]))
    assert set(bs) >= {2, 4, 6}


def test_best_response_unconstrained_limit():
    s = best_response(UserProfile(1.0, TrafficQoS(1e-12, 1e12)), B)
    assert s.b == 2
    assert to_db(s.sir) == pytest.approx(9.1, abs=0.1)
    assert s.sir == optimal_sir(ModulationScheme(2, L))


def test_best_response_floor_regime_on_higher_constellation():
    # D*B = 30: b = 2 infeasible, and Omega*_4 / 4 > B
    u = _user(30.0)
    s4 = ModulationScheme(4, L)
    assert omega_star(ModulationScheme(2, L), u.traffic) / 2 > B
    assert omega_star(s4, u.traffic) / 4 > B
    s = best_response(u, B)
    assert (s.b, s.symbol_rate) == (4, B)
    assert s.sir > optimal_sir(s4)
    w = avg_delay(LinkOperatingPoint(s.symbol_rate, s.sir, s4), u.traffic)
    assert w == pytest.approx(u.traffic.delay_bound, rel=1e-8)


def test_best_response_keeps_qpsk_while_feasible():
    # D*B = 55: Omega*_2/2 > B but QPSK still meets the bound on its SIR floor
    u = _user(55.0)
    s2 = ModulationScheme(2, L)
    assert omega_star(s2, u.traffic) / 2 > B
    s = best_response(u, B)
    assert (s.b, s.symbol_rate) == (2, B)
    assert s.sir == pytest.approx(sir_floor(s2, B, u.traffic), rel=1e-15)
    # and it beats the best that 16-QAM could do
    assert 2 * efficiency(s2, s.sir) / s.sir > 4 * efficiency(ModulationScheme(4, L), optimal_sir(ModulationScheme(4, L))) / optimal_sir(ModulationScheme(4, L))


def test_policies_differ_only_in_rate():
    u = _user(1e3)
    p = best_response(u, B, Policy.PARETO_DOMINANT)
    m = best_response(u, B, Policy.MAX_RATE)
    assert (p.b, p.sir) == (m.b, m.sir)
    assert p.symbol_rate < m.symbol_rate == B
    scheme = ModulationScheme(p.b, L)
    for s in (p, m):
        w = avg_delay(LinkOperatingPoint(s.symbol_rate, s.sir, scheme), u.traffic)
        assert w <= u.traffic.delay_bound * (1 + 1e-9)


def test_best_response_always_meets_delay():
    for d in np.geomspace(12.0, 1e5, 200):
        u = _user(d)
        try:
            s = best_response(u, B)
        except DelayInfeasibleError:
            continue
        w = avg_delay(LinkOperatingPoint(s.symbol_rate, s.sir, u.scheme(s.b)), u.traffic)
        assert w <= u.traffic.delay_bound * (1 + 1e-9)
        assert s.symbol_rate <= B


def test_user_size():
    assert user_size(1.0, 1.0, 1.0) == 0.5
    assert user_size(1.0, 1e-12, 1.0) < 1e-11
    rng = random.Random(0)
    for _ in range(100):
        r, g = 10 ** rng.uniform(-3, 3), 10 ** rng.uniform(-2, 3)
        phi = user_size(r, g, 1e3)
        assert 0 < phi < 1
        assert user_size(r * 1.01, g, 1e3) > phi
        assert user_size(r, g * 1.01, 1e3) > phi


def test_required_power_single_user():
    env = NetworkEnv(1e6, 1e-3, [UserProfile(0.5, TrafficQoS(1.0, 1.0))])
    p = required_power(env, 0, [(1e5, 8.0)], [0.0])
    assert p == pytest.approx(8.0 * 1e5 * 1e-3 / (1e6 * 0.5), rel=1e-15)


def test_required_power_gain_scaling_and_sir():
    users = [UserProfile(h, TrafficQoS(1.0, 1.0)) for h in (1.0, 0.3, 2.0)]
    env = NetworkEnv(1e6, 1e-3, users)
    targets = [(1e4, 8.0), (2e4, 30.0), (5e3, 100.0)]
    powers = [0.2, 0.1, 0.05]
    p0 = required_power(env, 0, targets, powers)
    doubled = NetworkEnv(1e6, 1e-3, [UserProfile(2.0, TrafficQoS(1.0, 1.0))] + users[1:])
    assert required_power(doubled, 0, targets, powers) == pytest.approx(p0 / 2, rel=1e-15)
    powers[0] = p0
    assert achieved_sir(env, 0, [t[0] for t in targets], powers) == pytest.approx(8.0, rel=1e-12)


def test_closed_form_single_user():
    env = NetworkEnv(1e6, 1e-3, [UserProfile(0.5, TrafficQoS(1.0, 1.0))])
    (p,) = closed_form_powers(env, [(1e5, 8.0)])
    assert p == pytest.approx(8.0 * 1e5 * 1e-3 / (1e6 * 0.5), rel=1e-13)


def test_closed_form_symmetric_users():
    # p = sigma^2 g R/B (1 + g R/B)^-1 ... solved by hand: p h = sigma^2 c / (1 - (K-1) c), c = g R / B
    K, h, sigma2, Bw, R, g = 5, 0.7, 2e-3, 1e6, 2e4, 8.0
    env = NetworkEnv(Bw, sigma2, [UserProfile(h, TrafficQoS(1.0, 1.0))] * K)
    c = g * R / Bw
    expected = sigma2 * c / (h * (1 - (K - 1) * c))
    phi = user_size(R, g, Bw)
    assert expected == pytest.approx(sigma2 * phi / (h * (1 - K * phi)), rel=1e-13)
    for p in closed_form_powers(env, [(R, g)] * K):
        assert p == pytest.approx(expected, rel=1e-13)


def test_closed_form_random_five_users():
    rng = random.Random(9)
    Bw = 1e6
    users = [UserProfile(10 ** rng.uniform(-1, 1), TrafficQoS(1.0, 1.0)) for _ in range(5)]
    env = NetworkEnv(Bw, 1e-2, users)
    # scale targets so that the sizes sum to 0.8
    raw = [rng.uniform(0.5, 1.5) for _ in range(5)]
    sizes = [0.8 * r / sum(raw) for r in raw]
    rates = [10 ** rng.uniform(3, 5) for _ in range(5)]
    targets = [(r, Bw * phi / ((1 - phi) * r)) for r, phi in zip(rates, sizes)]
    assert sum(user_size(r, g, Bw) for r, g in targets) == pytest.approx(0.8, rel=1e-12)
    powers = closed_form_powers(env, targets)
    for k, (_, g) in enumerate(targets):
        assert achieved_sir(env, k, rates, powers) == pytest.approx(g, rel=1e-10)


def test_closed_form_infeasible():
    env = NetworkEnv(1.0, 1.0, [UserProfile(1.0, TrafficQoS(1.0, 1.0))] * 2)
    with pytest.raises(SystemInfeasibleError) as info:
        closed_form_powers(env, [(1.0, 1.0), (1.0, 1.0)])
    assert info.value.sum_size == pytest.approx(1.0)


def test_nash_single_user_utility():
    h, sigma2 = 0.4, 0.01
    env = NetworkEnv(B, sigma2, [UserProfile(h, TrafficQoS(LAM, 1e3))])
    r = nash_equilibrium(env)
    s = r.strategies[0]
    assert r.converged and s.b == 2
    f = efficiency(ModulationScheme(2, L), s.sir)
    assert r.utilities[0] == pytest.approx(2 * B * f * h / (sigma2 * s.sir), rel=1e-12)


def test_nash_matches_closed_form_random():
    rng = random.Random(21)
    for _ in range(20):
        env = random_network(rng, max_users=4)
        r = nash_equilibrium(env)
        assert r.converged
        for p, c in zip(r.powers, r.closed_form_powers):
            assert p == pytest.approx(c, rel=1e-8)


def test_nash_iteration_monotone_from_zero():
    rng = random.Random(31)
    for _ in range(200):
        env = random_network(rng)
        r = nash_equilibrium(env, keep_history=True)
        assert r.converged
        for prev, cur in zip(r.history, r.history[1:]):
            assert all(c >= p for p, c in zip(prev, cur))


def test_nash_delay_constraints_hold():
    rng = random.Random(41)
    for _ in range(30):
        env = random_network(rng)
        r = nash_equilibrium(env)
        rates = [s.symbol_rate for s in r.strategies]
        for k, (s, u) in enumerate(zip(r.strategies, env.users)):
            g = achieved_sir(env, k, rates, r.powers)
            w = avg_delay(LinkOperatingPoint(s.symbol_rate, g, u.scheme(s.b)), u.traffic)
            assert w <= u.traffic.delay_bound * (1 + 1e-9)


def test_nash_scale_invariance():
    rng = random.Random(51)
    for _ in range(20):
        env = random_network(rng)
        c = 10 ** rng.uniform(-3, 3)
        scaled = NetworkEnv(
            env.bandwidth,
            env.noise_power * c,
            [UserProfile(u.gain * c, u.traffic, u.packet_bits, u.b_max) for u in env.users],
        )
        r1, r2 = nash_equilibrium(env), nash_equilibrium(scaled)
        assert r1.sum_size == r2.sum_size
        for s1, s2 in zip(r1.strategies, r2.strategies):
            assert (s1.b, s1.symbol_rate, s1.sir) == (s2.b, s2.symbol_rate, s2.sir)
            assert s2.power == pytest.approx(s1.power, rel=1e-10)


def test_nash_utility_is_b_times_matched_filter_formula():
    rng = random.Random(61)
    for _ in range(30):
        env = random_network(rng)
        r = nash_equilibrium(env)
        sizes = [user_size(s.symbol_rate, s.sir, env.bandwidth) for s in r.strategies]
        total = math.fsum(sizes)
        for k, (s, u) in enumerate(zip(r.strategies, env.users)):
            f = efficiency(u.scheme(s.b), s.sir)
            eq = matched_filter_utility(env.bandwidth, f, u.gain, env.noise_power, s.sir, sizes[k], total - sizes[k])
            assert r.utilities[k] == pytest.approx(s.b * eq, rel=1e-8)


def test_nash_errors():
    env = NetworkEnv(B, 1.0, [_user(1e3), _user(5.0)])
    with pytest.raises(DelayInfeasibleError) as info:
        nash_equilibrium(env)
    assert info.value.user == 1
    crowded = NetworkEnv(B, 1.0, [_user(1e3)] * 3)
    with pytest.raises(SystemInfeasibleError):
        nash_equilibrium(crowded)


def test_nash_reports_non_convergence():
    env = random_network(random.Random(71))
    r = nash_equilibrium(env, max_iter=1)
    assert not r.converged and r.iterations == 1


def test_pareto_dominates_max_rate():
    rng = random.Random(81)
    for _ in range(10):
        env = random_dual_feasible_network(rng)
        pd = nash_equilibrium(env, Policy.PARETO_DOMINANT)
        mr = nash_equilibrium(env, Policy.MAX_RATE)
        assert pd.sum_size < mr.sum_size
        assert all(a >= c for a, c in zip(pd.utilities, mr.utilities))
        assert any(a > c for a, c in zip(pd.utilities, mr.utilities))


def test_required_efficiency_consistent_with_selection():
    u = _user(40.0)
    b = select_constellation(u, B)
    assert required_efficiency(u.scheme(b), B, u.traffic) < 1
    assert required_efficiency(u.scheme(b - 2), B, u.traffic) >= 1 - 2.0**-L
