import math

import numpy as np
import pytest
import scipy.stats

from toriclab import walks
from toriclab.geometry import build_geometry


def _dp_counts(l_max):
    """Dynamic-programming walk counts on the infinite lattice."""
    span = 2 * l_max + 1
    table = np.zeros((l_max + 1, span, span), dtype=object)
    table[0, l_max, l_max] = 1
    for l in range(l_max):
        cur = table[l]
        nxt = table[l + 1]
        nxt[1:, :] += cur[:-1, :]
        nxt[:-1, :] += cur[1:, :]
        nxt[:, 1:] += cur[:, :-1]
        nxt[:, :-1] += cur[:, 1:]
    return table, l_max


def test_unconstrained_matches_dp_full_grid():
    table, off = _dp_counts(16)
    for l in range(17):
        for x in range(-l, l + 1):
            for y in range(-l, l + 1):
                assert (walks.count_unconstrained(l, x, y).exact
                        == table[l, off + x, off + y])


def test_unconstrained_anchors():
    assert walks.count_unconstrained(6, 6, 0).exact == 1
    assert walks.count_unconstrained(2, 1, 1).exact == 2
    assert walks.count_unconstrained(4, 2, 0).exact == 16


def test_unconstrained_parity_and_range():
    assert walks.count_unconstrained(5, 2, 0).exact == 0
    assert walks.count_unconstrained(3, 2, 2).exact == 0
    with pytest.raises(ValueError):
        walks.count_unconstrained(-1, 0, 0)


def test_closed_form_accuracy():
    exact = math.log(walks.count_unconstrained(40, 10, 0).exact)
    approx = walks.unconstrained_closed_form(40, 10, 0).log_value
    assert abs(approx - exact) / exact < 0.01
    for x, y in ((0, 0), (4, 4), (12, 6), (20, 0)):
        exact = math.log(walks.count_unconstrained(40, x, y).exact)
        approx = walks.unconstrained_closed_form(40, x, y).log_value
        assert abs(approx - exact) / exact < 0.01


def test_closed_form_symmetry():
    a = walks.unconstrained_closed_form(30, 8, 2).log_value
    b = walks.unconstrained_closed_form(30, 2, 8).log_value
    c = walks.unconstrained_closed_form(30, -8, 2).log_value
    assert a == b == c


def test_closed_form_domain():
    with pytest.raises(ValueError):
        walks.unconstrained_closed_form(10, 6, 4)


def test_expansion_leading_term():
    # Loose paths forget the lattice frame: log N / l tends to log 4.
    val = walks.unconstrained_expansion(400, 6, 2) / 400
    exact = math.log(walks.count_unconstrained(400, 6, 2).exact) / 400
    assert val == pytest.approx(math.log(4.0), abs=0.01)
    assert val == pytest.approx(exact, abs=0.02)


@pytest.mark.parametrize("d", [4, 6])
def test_exact_minimal_cycles_square(d):
    g = build_geometry("square", d)
    assert walks.exact_constrained_small(g, d).exact == 2 * d


@pytest.mark.parametrize("d,expected", [(4, 28), (6, 126)])
def test_exact_minimal_cycles_rotated(d, expected):
    # d * C(d, d/2) staircases in the two diagonal families plus the d
    # straight diagonal cycles.
    g = build_geometry("rotated", d)
    assert expected == d * math.comb(d, d // 2) + d
    assert walks.exact_constrained_small(g, d).exact == expected


def test_below_distance_and_odd_lengths_vanish(rotated4):
    assert walks.exact_constrained_small(rotated4, 2).exact == 0
    assert walks.exact_constrained_small(rotated4, 5).exact == 0


def test_backtracking_guard(rotated4):
    with pytest.raises(ValueError):
        walks.exact_constrained_small(rotated4, 100)


def test_step_sampler_uniform(rng):
    total = walks.count_unconstrained(6, 2, 0).exact
    steps = walks.sample_step_sequences(6, 2, 0, 100_000, rng)
    codes = (steps * (4 ** np.arange(6))).sum(axis=1)
    counts = np.bincount(codes, minlength=4 ** 6)
    observed = counts[counts > 0]
    assert len(observed) == total
    _, pvalue = scipy.stats.chisquare(observed)
    assert pvalue > 0.01


def test_step_sampler_reaches_target(rng):
    deltas = np.array([(1, 0), (-1, 0), (0, 1), (0, -1)])
    steps = walks.sample_step_sequences(8, 2, -2, 2_000, rng)
    ends = deltas[steps].sum(axis=1)
    assert (ends == (2, -2)).all()


@pytest.mark.parametrize("orientation", ["square", "rotated"])
@pytest.mark.parametrize("l", [6, 8])
def test_sampled_cycles_match_backtracking(orientation, l):
    g = build_geometry(orientation, 4)
    exact = walks.exact_constrained_small(g, l).exact
    point = walks.sample_constrained(g, l, 100_000, seed=1000 + l)
    estimate = math.exp(point.log_ncon)
    sigma = estimate * point.sigma_log
    assert abs(estimate - exact) < 3 * max(sigma, 1e-9)


@pytest.mark.parametrize("orientation", ["square", "rotated"])
def test_sampling_exact_at_minimal_length(orientation):
    g = build_geometry(orientation, 6)
    point = walks.sample_constrained(g, 6, 100, seed=0)
    assert point.exact
    assert math.exp(point.log_ncon) == pytest.approx(
        walks.exact_constrained_small(g, 6).exact)


def test_sampling_below_distance(rotated4):
    point = walks.sample_constrained(rotated4, 2, 100, seed=0)
    assert point.log_ncon == -math.inf


def test_finite_size_fit_roundtrip():
    A, B, C = 0.98, 1.7, 2.3
    sqrt_n = np.array([8.0, 11.0, 14.0, 17.0, 20.0])
    values = A - (B / sqrt_n) * np.log(C * sqrt_n)
    a, b, c, residual = walks.fit_finite_size(sqrt_n, values)
    assert a == pytest.approx(A, abs=1e-9)
    assert b == pytest.approx(B, abs=1e-9)
    assert c == pytest.approx(C, rel=1e-6)
    assert residual < 1e-16
    with pytest.raises(ValueError):
        walks.fit_finite_size(sqrt_n[:3], values[:3])


def test_extrapolation_recovers_synthetic_ansatz():
    A, B, C = 1.1, 0.9, 3.0
    curves = {}
    for d in (8, 10, 12, 14):
        n = d * d
        sqrt_half = math.sqrt(n / 2.0)
        points = []
        for l in range(d, int(3 * sqrt_half) + 1, 2):
            l_hat = l / sqrt_half
            value = l_hat * (A - (B / math.sqrt(n))
                             * math.log(C * math.sqrt(n)))
            points.append(walks.ConstrainedPoint(
                d=d, n=n, l=l, log_ncon=value * sqrt_half, sigma_log=0.0,
                accepted=1, samples=1))
        curves[d] = points
    fit = walks.extrapolate_ncon(curves, l_hat_grid=np.array([1.5, 2.0, 2.5]))
    # The synthetic surface is linear in l, so interpolation is exact and
    # the per-l-hat fits must return the generating parameters.
    for i in range(3):
        assert not fit.degenerate[i]
        assert fit.A[i] == pytest.approx(fit.l_hat[i] * A, abs=1e-8)


def test_exact_rotated_anchor_extrapolates_to_sqrt2_log2():
    # The minimal-length cycle counts are known exactly at every size, so
    # the infinite-size limit of log N_con / sqrt(n/2) at the minimal
    # normalized length can be pinned without sampling.
    curves = {}
    for d in (8, 10, 12, 14):
        n = d * d
        exact = d * math.comb(d, d // 2) + d
        curves[d] = [math.sqrt(n), math.log(exact) / math.sqrt(n / 2.0)]
    sqrt_n = np.array([curves[d][0] for d in sorted(curves)])
    values = np.array([curves[d][1] for d in sorted(curves)])
    a, _, _, _ = walks.fit_finite_size(sqrt_n, values)
    assert a == pytest.approx(math.sqrt(2.0) * math.log(2.0), abs=0.02)
