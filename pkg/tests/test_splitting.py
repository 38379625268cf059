import math

import numpy as np
import pytest
import scipy.stats

from toriclab.noise import log_weight_probability
from toriclab.splitting import (ChainSample, SplitSchedule, bennett_ratio,
                                g_bennett, geometric_schedule,
                                metropolis_chain, minimal_failing_config,
                                split_failure_rate)


def test_kernel_identity(rng):
    x = np.exp(rng.uniform(-30, 30, 1_000_000))
    assert np.allclose(g_bennett(x), g_bennett(1.0 / x) / x,
                       rtol=1e-12, atol=0.0)


def test_schedule_validation():
    with pytest.raises(ValueError):
        SplitSchedule(rates=(0.01, 0.05), anchor_p_hat=0.1, anchor_sigma=0.001)
    with pytest.raises(ValueError):
        SplitSchedule(rates=(0.05, 0.01), anchor_p_hat=0.1, anchor_sigma=0.05)
    SplitSchedule(rates=(0.05, 0.01), anchor_p_hat=0.1, anchor_sigma=0.005)


def test_geometric_schedule_shape():
    rates = geometric_schedule(0.001, 0.05, ratio=1.7)
    assert rates[0] == pytest.approx(0.05)
    assert rates[-1] == pytest.approx(0.001)
    ratios = [a / b for a, b in zip(rates, rates[1:])]
    assert all(r > 1.0 for r in ratios)
    assert max(ratios) / min(ratios) < 1.0001
    with pytest.raises(ValueError):
        geometric_schedule(0.05, 0.01)


def test_minimal_failing_config(rotated4):
    from toriclab.matching import decode
    from toriclab.noise import ErrorConfig
    bits = minimal_failing_config(rotated4)
    assert bits.sum() == 2
    assert decode(rotated4, ErrorConfig(bits)).winding.is_failure


def test_chain_requires_failing_start(rotated4):
    with pytest.raises(ValueError):
        metropolis_chain(rotated4, 0.05, 100,
                         np.zeros(16, dtype=np.uint8), seed=0)


def test_chain_bookkeeping(rotated4):
    init = minimal_failing_config(rotated4)
    chain = metropolis_chain(rotated4, 0.05, 20_000, init, seed=5)
    assert chain.accepted_failing <= chain.accepted_flip <= chain.proposed
    assert chain.proposed == 20_000
    assert len(chain.weights) == math.ceil((20_000 - chain.burn_in) / chain.thin)


def test_chain_stays_minimal_at_tiny_rate(rotated4):
    init = minimal_failing_config(rotated4)
    chain = metropolis_chain(rotated4, 1e-4, 50_000, init, seed=6)
    assert chain.weights.max() <= 4
    assert chain.weights.mean() < 2.5


def test_chain_seed_reproducible(rotated4):
    init = minimal_failing_config(rotated4)
    a = metropolis_chain(rotated4, 0.05, 10_000, init, seed=17)
    b = metropolis_chain(rotated4, 0.05, 10_000, init, seed=17)
    assert (a.weights == b.weights).all()
    assert (a.final_bits == b.final_bits).all()


def test_chain_stationary_distribution(rotated4, rotated4_tally):
    # Conditional weight distribution of failing errors at p = 0.05.
    p = 0.05
    logw = {}
    for (w, cls), count in rotated4_tally.counts.items():
        if cls != (0, 0):
            logw[w] = logw.get(w, 0.0) + count * math.exp(
                log_weight_probability(16, w, p))
    weights = sorted(logw)
    probs = np.array([logw[w] for w in weights])
    probs /= probs.sum()

    init = minimal_failing_config(rotated4)
    chain = metropolis_chain(rotated4, p, 400_000, init, seed=23, thin=16)
    observed = np.array([(chain.weights == w).sum() for w in weights])
    # Thinned samples still correlate slightly; an effective sample size
    # below the raw count keeps the test calibrated.
    ess_fraction = 0.25
    expected = probs * observed.sum()
    keep = expected > 5
    chi2 = (((observed - expected) ** 2 / expected)[keep].sum()
            * ess_fraction)
    pvalue = scipy.stats.chi2.sf(chi2, keep.sum() - 1)
    assert pvalue > 0.01


def _fake_chain(p, n, weights):
    weights = np.asarray(weights, dtype=np.int64)
    return ChainSample(p=p, n=n, weights=weights, proposed=len(weights),
                       accepted_flip=0, accepted_failing=0, burn_in=0,
                       thin=1, seed=0)


def test_bennett_two_atom_synthetic(rng):
    # Failing set restricted to two weights with known multiplicities makes
    # every quantity available in closed form.
    n = 16
    p_low, p_high = 0.02, 0.05
    mult = {2: 56, 3: 400}

    def z(p):
        return sum(m * math.exp(log_weight_probability(n, w, p))
                   for w, m in mult.items())

    def conditional(p, size):
        ws = np.array(sorted(mult))
        pr = np.array([mult[w] * math.exp(log_weight_probability(n, w, p))
                       for w in ws])
        pr /= pr.sum()
        return rng.choice(ws, size=size, p=pr)

    chain_low = _fake_chain(p_low, n, conditional(p_low, 200_000))
    chain_high = _fake_chain(p_high, n, conditional(p_high, 200_000))
    est = bennett_ratio(chain_low, chain_high)
    exact = z(p_low) / z(p_high)
    assert 0.0 < est.ratio <= 1.0
    assert abs(est.ratio - exact) < 3 * est.sigma
    assert est.c_star == est.ratio


def test_bennett_equal_rates(rotated4):
    init = minimal_failing_config(rotated4)
    a = metropolis_chain(rotated4, 0.05, 60_000, init, seed=31)
    b = metropolis_chain(rotated4, 0.05, 60_000, init, seed=32)
    est = bennett_ratio(a, b)
    assert est.ratio == pytest.approx(1.0, abs=4 * max(est.sigma, 1e-3))


def test_bennett_rejects_misordered_chains(rotated4):
    init = minimal_failing_config(rotated4)
    a = metropolis_chain(rotated4, 0.03, 5_000, init, seed=1)
    b = metropolis_chain(rotated4, 0.05, 5_000, init, seed=2)
    with pytest.raises(ValueError):
        bennett_ratio(b, a)


def test_ratio_matches_exhaustive_oracle(rotated4, rotated4_exact_rate):
    init = minimal_failing_config(rotated4)
    low = metropolis_chain(rotated4, 0.03, 300_000, init, seed=41)
    high = metropolis_chain(rotated4, 0.05, 300_000, init, seed=42)
    est = bennett_ratio(low, high)
    exact = rotated4_exact_rate(0.03) / rotated4_exact_rate(0.05)
    assert 0.0 < est.ratio <= 1.0
    assert abs(est.ratio - exact) < 3 * est.sigma


def test_split_telescopes_to_exact_rate(rotated4, rotated4_exact_rate):
    anchor_p = 0.05
    schedule = SplitSchedule(
        rates=tuple(geometric_schedule(0.01, anchor_p, ratio=1.8)),
        anchor_p_hat=rotated4_exact_rate(anchor_p),
        anchor_sigma=1e-4 * rotated4_exact_rate(anchor_p))
    result = split_failure_rate(rotated4, schedule, steps=250_000, seed=77)
    exact = rotated4_exact_rate(0.01)
    assert abs(result.p_hat - exact) < 3 * result.sigma
    assert all(0.0 < r.ratio <= 1.0 for r in result.ratios)
    per_rate = result.rate_estimates()
    assert [p for p, _, _ in per_rate] == list(schedule.rates)
    assert per_rate[-1][1] == pytest.approx(result.p_hat)
    sigmas = [s for _, _, s in per_rate]
    values = [v for _, v, _ in per_rate]
    rel = [s / v for s, v in zip(sigmas, values)]
    assert rel == sorted(rel)


def test_split_single_rate_returns_anchor(rotated4, rotated4_exact_rate):
    exact = rotated4_exact_rate(0.05)
    schedule = SplitSchedule(rates=(0.05,), anchor_p_hat=exact,
                             anchor_sigma=1e-4 * exact)
    result = split_failure_rate(rotated4, schedule, steps=1_000, seed=3)
    assert result.p_hat == pytest.approx(exact)
    assert result.ratios == []


def test_thinning_does_not_shift_estimates(rotated4, rotated4_exact_rate):
    exact = rotated4_exact_rate(0.03) / rotated4_exact_rate(0.05)
    init = minimal_failing_config(rotated4)
    estimates = []
    for thin in (8, 32):
        low = metropolis_chain(rotated4, 0.03, 200_000, init, seed=51,
                               thin=thin)
        high = metropolis_chain(rotated4, 0.05, 200_000, init, seed=52,
                                thin=thin)
        estimates.append(bennett_ratio(low, high))
    for est in estimates:
        assert abs(est.ratio - exact) < 4 * est.sigma
