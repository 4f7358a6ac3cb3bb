import math

import numpy as np
import pytest

from ris_crs.channel import ChannelSet, ScenarioConfig, build_channel_set
from ris_crs.rates import (PhaseConfig, TxDesign, composite_slot2_channel,
                           effective_channel, evaluate_design,
                           phase2_closed_form, slot1_rates, slot1_sinrs,
                           slot2_common_rate)


def toy_channel(nt=1, n=0, g1=None, g2=None, G=None, h1=None, h2=None,
                h12=0.0, h_1r=None, h_r2=None, noise=1.0):
    z = np.zeros(n, dtype=complex)
    return ChannelSet(
        G=np.zeros((n, nt), dtype=complex) if G is None else np.asarray(G, dtype=complex),
        g1=np.zeros(nt, dtype=complex) if g1 is None else np.asarray(g1, dtype=complex),
        g2=np.zeros(nt, dtype=complex) if g2 is None else np.asarray(g2, dtype=complex),
        h1=z.copy() if h1 is None else np.asarray(h1, dtype=complex),
        h2=z.copy() if h2 is None else np.asarray(h2, dtype=complex),
        h12=complex(h12),
        h_1r=z.copy() if h_1r is None else np.asarray(h_1r, dtype=complex),
        h_r2=z.copy() if h_r2 is None else np.asarray(h_r2, dtype=complex),
        noise_power=noise,
    )


def random_channel(seed, nt=2, n=4):
    cfg = ScenarioConfig(nt=nt, n_ris=n)
    return build_channel_set(cfg, seed)


def random_phases(rng, n):
    return np.exp(1j * rng.uniform(0, 2 * np.pi, n))


# ---------------------------------------------------------------- effective


def test_effective_channel_no_ris_is_direct():
    ch = toy_channel(nt=2, n=0, g1=[1 + 1j, 2.0], g2=[0.5, 0.25j])
    assert np.array_equal(effective_channel(1, ch, np.array([])), ch.g1)


def test_effective_channel_zero_ris_link_is_direct():
    ch = toy_channel(nt=2, n=3, g1=[1.0, 2.0], G=np.ones((3, 2)))
    theta = random_phases(np.random.default_rng(0), 3)
    assert np.allclose(effective_channel(1, ch, theta), ch.g1)


def test_effective_channel_destructive():
    # one antenna, one element: direct 1 plus reflected e^{-j pi} = 0
    ch = toy_channel(nt=1, n=1, g1=[1.0], G=[[1.0]], h1=[1.0])
    theta = np.array([np.exp(1j * np.pi)])
    assert abs(effective_channel(1, ch, theta)[0]) < 1e-15


def test_effective_channel_dimension_mismatch():
    ch = toy_channel(nt=1, n=2, G=np.ones((2, 1)), h1=np.ones(2))
    with pytest.raises(ValueError):
        effective_channel(1, ch, np.ones(3, dtype=complex))
    with pytest.raises(ValueError):
        effective_channel(3, ch, np.ones(2, dtype=complex))


def test_effective_channel_matches_received_form():
    # g_eff^H p equals (g^H + h^H diag(theta) G) p for random draws
    rng = np.random.default_rng(1)
    for seed in range(20):
        ch = random_channel(seed)
        theta = random_phases(rng, ch.n_ris)
        p = rng.standard_normal(ch.nt) + 1j * rng.standard_normal(ch.nt)
        for k in (1, 2):
            left = np.conj(effective_channel(k, ch, theta)) @ p
            row = ch.g(k).conj() + ch.h(k).conj() @ (np.diag(theta) @ ch.G)
            assert abs(left - row @ p) < 1e-12


# ------------------------------------------------------------------- slot 1


def test_slot1_hand_value():
    # |g^H p1|^2 = 3, |g^H p2|^2 = 1, noise 1: r1 = log2(1 + 3/2)
    ch = toy_channel(nt=1, g1=[1.0], g2=[1.0], noise=1.0)
    P = np.array([[0.0, math.sqrt(3.0), 1.0]], dtype=complex)
    c1, c2, r1, r2 = slot1_rates(ch, np.array([]), P, 1.0)
    assert r1 == pytest.approx(math.log2(2.5), abs=1e-12)
    assert c1 == 0.0  # no common power
    assert r2 == pytest.approx(math.log2(1 + 1.0 / 4.0), abs=1e-12)


def test_slot1_zero_common_power():
    ch = random_channel(0)
    rng = np.random.default_rng(2)
    P = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    P[:, 0] = 0
    theta = random_phases(rng, ch.n_ris)
    c1, c2, *_ = slot1_rates(ch, theta, P, 0.7)
    assert c1 == 0.0 and c2 == 0.0


def test_slot1_beta_scaling():
    ch = random_channel(1)
    rng = np.random.default_rng(3)
    P = 1e-4 * (rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3)))
    theta = random_phases(rng, ch.n_ris)
    full = np.array(slot1_rates(ch, theta, P, 0.8))
    half = np.array(slot1_rates(ch, theta, P, 0.4))
    assert np.allclose(half, 0.5 * full, rtol=1e-12)


def _independent_slot1(ch, theta, P, beta):
    # straight transliteration of the slot-1 rate definitions, kept separate
    # from the library implementation
    out = []
    for k in (1, 2):
        row = ch.g(k).conj() + ch.h(k).conj() @ (np.diag(theta) @ ch.G) \
            if ch.n_ris else ch.g(k).conj()
        s = [abs(row @ P[:, i]) ** 2 for i in range(3)]
        c = beta * math.log2(1 + s[0] / (s[1] + s[2] + ch.noise_power))
        i = 2 if k == 1 else 1
        r = beta * math.log2(1 + s[k] / (s[i] + ch.noise_power))
        out.append((c, r))
    return out[0][0], out[1][0], out[0][1], out[1][1]


def test_slot1_matches_independent_formula():
    rng = np.random.default_rng(4)
    for seed in range(25):
        ch = random_channel(seed)
        theta = random_phases(rng, ch.n_ris)
        P = 1e-4 * (rng.standard_normal((2, 3))
                    + 1j * rng.standard_normal((2, 3)))
        beta = rng.uniform(0.05, 1.0)
        got = slot1_rates(ch, theta, P, beta)
        want = _independent_slot1(ch, theta, P, beta)
        assert np.allclose(got, want, rtol=0, atol=1e-12)


def test_common_rate_monotone_in_common_power():
    rng = np.random.default_rng(5)
    for seed in range(10):
        ch = random_channel(seed)
        theta = random_phases(rng, ch.n_ris)
        P = 1e-4 * (rng.standard_normal((2, 3))
                    + 1j * rng.standard_normal((2, 3)))
        base = slot1_rates(ch, theta, P, 1.0)
        for c in (1.5, 3.0):
            Pc = P.copy()
            Pc[:, 0] *= c
            boosted = slot1_rates(ch, theta, Pc, 1.0)
            assert boosted[0] >= base[0] - 1e-12
            assert boosted[1] >= base[1] - 1e-12


# ------------------------------------------------------------------- slot 2


def test_slot2_zero_cases():
    ch = toy_channel(h12=1.0, noise=1.0)
    assert slot2_common_rate(ch, np.array([]), 3.0, 1.0) == 0.0
    assert slot2_common_rate(ch, np.array([]), 0.0, 0.5) == 0.0


def test_slot2_hand_value():
    # pr |h12|^2 / sigma^2 = 3 at beta = 1/2: rate = 0.5 log2(4) = 1
    ch = toy_channel(h12=1.0, noise=1.0)
    assert slot2_common_rate(ch, np.array([]), 3.0, 0.5) == pytest.approx(1.0)


def test_slot2_negative_power_rejected():
    ch = toy_channel(h12=1.0)
    with pytest.raises(ValueError):
        slot2_common_rate(ch, np.array([]), -1.0, 0.5)


# ----------------------------------------------------------- slot-2 phases


def test_phase2_aligned_channels_give_identity():
    ch = toy_channel(n=3, h12=2.0, h_1r=[1.0, 0.5, 2.0], h_r2=[1.0, 1.0, 0.5])
    theta2 = phase2_closed_form(ch)
    assert np.allclose(theta2, np.ones(3))


def test_phase2_hand_value():
    ch = toy_channel(n=1, h12=1j, h_1r=[1.0], h_r2=[1.0])
    theta2 = phase2_closed_form(ch)
    assert np.angle(theta2[0]) == pytest.approx(np.pi / 2)
    comp = composite_slot2_channel(ch, theta2)
    assert abs(comp) == pytest.approx(2.0)


def test_phase2_composite_magnitude_formula():
    for seed in range(10):
        ch = random_channel(seed, n=6)
        comp = composite_slot2_channel(ch, phase2_closed_form(ch))
        want = abs(ch.h12) + np.sum(np.abs(ch.h_1r) * np.abs(ch.h_r2))
        assert abs(comp) == pytest.approx(want, rel=1e-12)


def test_phase2_dominates_random_phases():
    rng = np.random.default_rng(6)
    for seed in range(5):
        ch = random_channel(seed, n=8)
        best = abs(composite_slot2_channel(ch, phase2_closed_form(ch)))
        for _ in range(1000):
            theta = random_phases(rng, 8)
            assert abs(composite_slot2_channel(ch, theta)) <= best + 1e-12


def test_phase2_zero_entries_get_phase_zero():
    ch = toy_channel(n=2, h12=1.0, h_1r=[0.0, 1.0], h_r2=[1.0, 1.0])
    theta2 = phase2_closed_form(ch)
    assert theta2[0] == pytest.approx(1.0)


# ----------------------------------------------------------------- evaluate


def test_evaluate_pure_sdma_behavior():
    ch = random_channel(0)
    rng = np.random.default_rng(7)
    P = 1e-4 * (rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3)))
    P[:, 0] = 0
    phases = PhaseConfig(random_phases(rng, 4), phase2_closed_form(ch))
    design = TxDesign(P=P, pr=0.0, a=np.zeros(2), beta=0.6)
    rep = evaluate_design(ch, phases, design)
    assert rep.min_rate == pytest.approx(min(rep.r1_1, rep.r2_1), abs=0)
    assert rep.feasible


def test_evaluate_common_rate_is_min_rule():
    rng = np.random.default_rng(8)
    for seed in range(10):
        ch = random_channel(seed)
        P = 1e-4 * (rng.standard_normal((2, 3))
                    + 1j * rng.standard_normal((2, 3)))
        phases = PhaseConfig(random_phases(rng, 4), phase2_closed_form(ch))
        design = TxDesign(P=P, pr=1e-8, a=np.zeros(2), beta=0.5)
        rep = evaluate_design(ch, phases, design)
        assert rep.rc == pytest.approx(min(rep.c1_1, rep.c2_1 + rep.c2_2),
                                       abs=0)
        assert rep.r_tot == (rep.r1_1, rep.r2_1)


def _independent_report(ch, phases, design):
    c1, c2, r1, r2 = _independent_slot1(ch, phases.theta1, design.P,
                                        design.beta)
    comp = ch.h12 + sum(np.conj(ch.h_r2[i]) * phases.theta2[i] * ch.h_1r[i]
                        for i in range(ch.n_ris))
    c2_2 = 0.0 if design.beta >= 1.0 else (1 - design.beta) * math.log2(
        1 + design.pr * abs(comp) ** 2 / ch.noise_power)
    rc = min(c1, c2 + c2_2)
    tot = (r1 + design.a[0], r2 + design.a[1])
    return rc, min(tot)


def test_evaluate_matches_independent_reimplementation():
    rng = np.random.default_rng(9)
    for seed in range(25):
        ch = random_channel(seed)
        P = 1e-4 * (rng.standard_normal((2, 3))
                    + 1j * rng.standard_normal((2, 3)))
        phases = PhaseConfig(random_phases(rng, 4), phase2_closed_form(ch))
        a = rng.uniform(0, 1e-6, 2)
        design = TxDesign(P=P, pr=1e-8, a=a, beta=rng.uniform(0.05, 1.0))
        rep = evaluate_design(ch, phases, design)
        rc, min_rate = _independent_report(ch, phases, design)
        assert rep.rc == pytest.approx(rc, abs=1e-12)
        assert rep.min_rate == pytest.approx(min_rate, abs=1e-12)


def test_evaluate_flags_oversubscribed_common_rate():
    ch = random_channel(0)
    rng = np.random.default_rng(10)
    P = 1e-6 * (rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3)))
    phases = PhaseConfig(random_phases(rng, 4), phase2_closed_form(ch))
    design = TxDesign(P=P, pr=0.0, a=np.array([5.0, 5.0]), beta=0.5)
    rep = evaluate_design(ch, phases, design)
    assert not rep.feasible
    assert "common_rate" in rep.violations


def test_evaluate_checks_design_invariants():
    ch = random_channel(0)
    rng = np.random.default_rng(11)
    P = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    phases = PhaseConfig(random_phases(rng, 4), phase2_closed_form(ch))
    design = TxDesign(P=P, pr=0.0, a=np.zeros(2), beta=0.5)
    rep = evaluate_design(ch, phases, design, pt=1e-6)
    assert "power" in rep.violations
    bad_phases = PhaseConfig(1.1 * random_phases(rng, 4),
                             phase2_closed_form(ch))
    rep = evaluate_design(ch, bad_phases, design)
    assert any(v.startswith("unit_modulus") for v in rep.violations)


def test_evaluate_is_pure():
    ch = random_channel(3)
    rng = np.random.default_rng(12)
    P = 1e-4 * (rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3)))
    phases = PhaseConfig(random_phases(rng, 4), phase2_closed_form(ch))
    design = TxDesign(P=P, pr=1e-8, a=np.zeros(2), beta=0.5)
    r1 = evaluate_design(ch, phases, design)
    r2 = evaluate_design(ch, phases, design)
    assert r1.min_rate == r2.min_rate and r1.rc == r2.rc


def test_slot1_sinrs_consistent_with_rates():
    ch = random_channel(4)
    rng = np.random.default_rng(13)
    P = 1e-4 * (rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3)))
    theta = random_phases(rng, 4)
    rho, rho_c = slot1_sinrs(ch, theta, P)
    c1, c2, r1, r2 = slot1_rates(ch, theta, P, 1.0)
    assert r1 == pytest.approx(math.log2(1 + rho[0]), rel=1e-12)
    assert c2 == pytest.approx(math.log2(1 + rho_c[1]), rel=1e-12)
