"""Monte Carlo engine tests.

The key check is that fluid-mode trial outcomes coincide, trial by trial,
with the admissible-interval membership test from the closed-form analysis.
"""

import json
import math

import numpy as np
import pytest

import ic_outage as ic
from ic_outage.simulator import (
    _offset_draws,
    fluid_outage_flags,
    overlap_fractions,
    simulate_tau,
)
from conftest import reference_point


# ---------------------------------------------------------------------------
# limiting schedule
# ---------------------------------------------------------------------------

def test_tau_bar_values():
    assert ic.tau_bar(1, 1.7) == 1.7
    assert ic.tau_bar(3, 1.1) == pytest.approx(3.3)
    assert ic.tau_bar(3, 0.8) == pytest.approx(2.8)
    # both branches agree at r = 1
    assert ic.tau_bar(4, 1.0) == pytest.approx(4.0)
    assert ic.tau_bar(4, 1.0 + 1e-12) == pytest.approx(4.0, abs=1e-9)
    with pytest.raises(ic.AnalysisError):
        ic.tau_bar(0, 1.5)


def test_subunit_rate_schedule_has_no_gap():
    # consecutive unit intervals touch exactly when r <= 1
    for r in (0.3, 0.8, 1.0):
        starts = [ic.tau_bar(j, r) for j in range(1, 6)]
        for a, b in zip(starts, starts[1:]):
            assert b - a == pytest.approx(1.0, abs=1e-12)


def test_bursty_schedule_has_gap_r():
    starts = [ic.tau_bar(j, 1.4) for j in range(1, 6)]
    for a, b in zip(starts, starts[1:]):
        assert b - a == pytest.approx(1.4, abs=1e-12)


# ---------------------------------------------------------------------------
# release-time recursion
# ---------------------------------------------------------------------------

def test_simulate_tau_deterministic_arrivals():
    # lambda = 1: one bit per slot, so xi_j = j * n/N exactly
    lam, n, n_packets, r = 1.0, 1000, 4, 0.8
    rng = np.random.default_rng(0)
    tau = simulate_tau(lam, n, n_packets, r, rng)
    n_theta = n / (n_packets * r * lam)
    xi = [n / n_packets * j for j in range(1, n_packets + 1)]
    expect = [xi[0]]
    for j in range(1, n_packets):
        expect.append(max(expect[-1] + n_theta, xi[j]))
    assert tau == pytest.approx(expect, abs=1e-9)


def test_simulate_tau_converges_to_limit_profile():
    lam, n, n_packets, r = 0.1, 10**5, 10, 1.5
    n_theta = n / (n_packets * r * lam)
    rng = np.random.default_rng(123)
    for _ in range(5):
        tau = simulate_tau(lam, n, n_packets, r, rng)
        scaled = tau / n_theta
        for j in range(n_packets):
            assert scaled[j] == pytest.approx(ic.tau_bar(j + 1, r), rel=0.05)


def test_simulate_tau_subunit_rate_profile():
    lam, n, n_packets, r = 0.2, 10**5, 8, 0.8
    n_theta = n / (n_packets * r * lam)
    rng = np.random.default_rng(7)
    tau = simulate_tau(lam, n, n_packets, r, rng)
    scaled = tau / n_theta
    for j in range(n_packets):
        assert scaled[j] == pytest.approx(ic.tau_bar(j + 1, r), rel=0.05)


def test_simulate_tau_rejects_zero_bit_packets():
    with pytest.raises(ic.AnalysisError, match="zero bits"):
        simulate_tau(0.5, 3, 10, 1.5, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# overlap geometry
# ---------------------------------------------------------------------------

def test_overlap_disjoint_schedules():
    s1 = ic.Schedule(np.array([1.5, 3.0, 4.5]))
    s2 = ic.Schedule(np.array([101.5, 103.0, 104.5]))
    mu1, mu2 = overlap_fractions(s1, s2)
    assert np.all(mu1 == 0) and np.all(mu2 == 0)


def test_overlap_identical_schedules():
    s = ic.Schedule(np.array([1.5, 3.0, 4.5]))
    mu1, mu2 = overlap_fractions(s, s)
    assert mu1 == pytest.approx([1.0, 1.0, 1.0])
    assert mu2 == pytest.approx([1.0, 1.0, 1.0])


def test_overlap_both_neighbors_case():
    # 1 < r < 2 with a shift that clips both neighboring codewords: the
    # interior codewords see a total overlapped fraction of exactly 2 - r.
    r = 1.5
    s1 = ic.Schedule(np.array([ic.tau_bar(j, r) for j in range(1, 6)]))
    s2 = ic.Schedule(s1.starts + 0.75)
    mu1, mu2 = overlap_fractions(s1, s2)
    assert mu1[1:] == pytest.approx([2.0 - r] * 4)
    assert mu2[:-1] == pytest.approx([2.0 - r] * 4)


def test_overlap_partial_single_neighbor():
    s1 = ic.Schedule(np.array([0.0]))
    s2 = ic.Schedule(np.array([0.6]))
    mu1, mu2 = overlap_fractions(s1, s2)
    assert mu1[0] == pytest.approx(0.4)
    assert mu2[0] == pytest.approx(0.4)


def test_schedule_intervals_are_unit_length():
    s = ic.Schedule(np.array([0.3, 1.9]))
    assert s.intervals() == [(0.3, 1.3), (1.9, 2.9)]


# ---------------------------------------------------------------------------
# decode thresholds
# ---------------------------------------------------------------------------

def test_decode_success_interference_free():
    info = reference_point()
    assert ic.decode_success(0.0, info, 1, 0.9, ic.TIN)
    assert not ic.decode_success(0.0, info, 1, 1.0, ic.TIN)   # strict at C*


def test_decode_success_full_overlap_threshold():
    info = reference_point()
    c1 = info.c[0]
    assert ic.decode_success(1.0, info, 1, c1 - 1e-9, ic.TIN)
    assert not ic.decode_success(1.0, info, 1, (c1 + 1.0) / 2.0, ic.TIN)


def test_decode_success_boundary_is_failure():
    # mu exactly at 1 - rho_i(r): mixed rate equals R_c, strict test fails
    info = reference_point()
    lam, r = 0.1, 1.1
    rho1 = ic.analysis.rho(info, 1, r, lam, ic.TIN).value
    mu = 1.0 - rho1
    r_code = r * lam
    mixed = (1.0 - mu) * info.c_star[0] + mu * info.c[0]
    assert mixed == pytest.approx(r_code, abs=1e-12)
    assert not ic.decode_success(mu, info, 1, r_code, ic.TIN)
    assert ic.decode_success(mu - 1e-9, info, 1, r_code, ic.TIN)


def test_decode_success_di_requires_both_inequalities():
    info = ic.InfoQuantities(
        c_star=(1.0, 1.0), c=(0.2, 0.2), c_cross=(0.9, 0.9),
        c_tilde_star=(0.45, 0.45), c_tilde=(0.05, 0.05),
    )
    # rate decodable against own signal but not against the interferer's
    r_code = 0.5
    assert ic.decode_success(0.1, info, 1, r_code, ic.TIN)
    assert not ic.decode_success(0.1, info, 1, r_code, ic.DI)


def test_decode_success_vectorized():
    info = reference_point()
    mu = np.array([0.0, 0.5, 1.0])
    out = ic.decode_success(mu, info, 1, 0.11, ic.TIN)
    assert out.shape == (3,)
    assert out.dtype == bool


# ---------------------------------------------------------------------------
# trial runner
# ---------------------------------------------------------------------------

def test_offset_draws_match_uniform_cdf():
    d1, d2 = _offset_draws(seed=42, trials=10**5, d_max=3.0)
    delta = np.abs(d1 - d2)
    grid = np.linspace(0.0, 3.0, 61)
    emp = np.searchsorted(np.sort(delta), grid) / delta.size
    ks = max(
        abs(e - ic.delta_cdf(g, 3.0)) for e, g in zip(emp, grid)
    )
    assert ks < 0.01


def test_fluid_trials_match_interval_membership():
    info = reference_point()
    scheme = ic.SchemeParams(lam=0.1, r=1.1, n_packets=4, d_max=15.0, decoder=ic.TIN)
    inputs = ic.outage_inputs(info, scheme)
    assert inputs.chi1 == (True, True)
    theta = 1.0 / (scheme.n_packets * scheme.code_rate)
    d1, d2 = _offset_draws(seed=99, trials=4000, d_max=scheme.d_max)
    out1, out2, fails = fluid_outage_flags(d1, d2, scheme, info)
    for j, (out, rho_j) in enumerate(zip((out1, out2), inputs.rho)):
        ivs = ic.admissible_intervals(scheme.r, rho_j, scheme.n_packets)
        for t in range(len(d1)):
            delta_prime = abs(d1[t] - d2[t]) / theta
            member = any(iv.contains(delta_prime) for iv in ivs)
            assert member == (not out[t]), (
                f"user {j+1}, trial {t}: membership {member} vs outage {out[t]}"
            )


def test_fluid_outage_matches_closed_form_band():
    info = reference_point()
    scheme = ic.SchemeParams(lam=0.1, r=1.1, n_packets=4, d_max=15.0, decoder=ic.TIN)
    inputs = ic.outage_inputs(info, scheme)
    config = ic.SimConfig(scheme=scheme, trials=20000, seed=7)
    res = ic.run_trials(config, info)
    for j in range(2):
        p = ic.analysis.outage_ub_finite_n(
            inputs.alpha, inputs.beta[j], scheme.n_packets,
            inputs.chi1[j], inputs.chi2[j],
        ).value
        sigma = math.sqrt(p * (1.0 - p) / config.trials)
        assert abs(res.outage[j] - p) < 3.0 * sigma


def test_run_trials_is_deterministic():
    info = reference_point()
    scheme = ic.SchemeParams(lam=0.1, r=1.1, n_packets=4, d_max=15.0, decoder=ic.TIN)
    config = ic.SimConfig(scheme=scheme, trials=3000, seed=5)
    a = ic.run_trials(config, info)
    b = ic.run_trials(config, info)
    assert a.to_json() == b.to_json()
    assert a == b


def test_fluid_partitioning_is_order_independent():
    info = reference_point()
    scheme = ic.SchemeParams(lam=0.1, r=1.1, n_packets=4, d_max=15.0, decoder=ic.TIN)
    d1, d2 = _offset_draws(seed=31, trials=5000, d_max=scheme.d_max)
    whole = fluid_outage_flags(d1, d2, scheme, info)
    cut = 1234
    first = fluid_outage_flags(d1[:cut], d2[:cut], scheme, info)
    second = fluid_outage_flags(d1[cut:], d2[cut:], scheme, info)
    assert np.array_equal(whole[0], np.concatenate([first[0], second[0]]))
    assert np.array_equal(whole[1], np.concatenate([first[1], second[1]]))
    assert np.array_equal(whole[2], first[2] + second[2])


def test_stochastic_mode_rates_and_determinism():
    info = reference_point()
    scheme = ic.SchemeParams(lam=0.1, r=1.5, n_packets=5, d_max=10.0, decoder=ic.TIN)
    config = ic.SimConfig(scheme=scheme, trials=40, seed=11, mode="stochastic", n=10**5)
    a = ic.run_trials(config, info)
    b = ic.run_trials(config, info)
    assert a.to_json() == b.to_json()
    expect = ic.avg_rate(scheme.n_packets, scheme.r, scheme.lam)
    for j in range(2):
        assert a.rates[j] == pytest.approx(expect, rel=0.02)


def test_sim_config_validation():
    scheme = ic.SchemeParams(lam=0.1, r=1.5, n_packets=5, d_max=10.0)
    with pytest.raises(ic.AnalysisError):
        ic.SimConfig(scheme=scheme, trials=0, seed=1)
    with pytest.raises(ic.AnalysisError, match="bits-per-source"):
        ic.SimConfig(scheme=scheme, trials=10, seed=1, mode="stochastic")
    with pytest.raises(ic.AnalysisError):
        ic.SimConfig(scheme=scheme, trials=10, seed=1, mode="exact")


def test_sim_result_json_schema():
    info = reference_point()
    scheme = ic.SchemeParams(lam=0.1, r=1.1, n_packets=2, d_max=5.0)
    res = ic.run_trials(ic.SimConfig(scheme=scheme, trials=100, seed=0), info)
    payload = json.loads(res.to_json())
    assert set(payload) == {
        "outage", "halfwidth", "rates", "trials", "seed", "mode",
        "per_codeword_failures",
    }
    for j in range(2):
        p = payload["outage"][j]
        assert 0.0 <= p <= 1.0
        assert payload["halfwidth"][j] == pytest.approx(
            1.96 * math.sqrt(p * (1.0 - p) / 100)
        )
    assert len(payload["per_codeword_failures"][0]) == 2
