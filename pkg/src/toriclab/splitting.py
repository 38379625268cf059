"""Rare-event failure-rate estimation by splitting with acceptance ratios.

The failure rate at a low error rate p0 is written as an anchor estimate at
a tractable rate p_L times a telescoping product of ratios
R_j = P(p_j) / P(p_{j+1}).  Each ratio is obtained with the acceptance
ratio method: two Metropolis chains over failing configurations, one at
each rate, and a crossing constant C* solving
<g(C A_j)>_j = <g(1/(C A_j))>_{j+1} with g(x) = 1/(1+x).  The likelihood
ratio A_j depends only on the configuration weight, so chains only need to
record their weight traces.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .geometry import CodeGeometry, logical_cycle
from .matching import decode_parity
from .noise import log_weight_probability


def g_bennett(x):
    """Acceptance-ratio kernel; satisfies g(x) = x^-1 g(x^-1)."""
    return 1.0 / (1.0 + np.asarray(x, dtype=float))


@dataclass(frozen=True)
class SplitSchedule:
    """Strictly decreasing error rates from the anchor p_L down to p_0."""

    rates: tuple[float, ...]
    anchor_p_hat: float
    anchor_sigma: float

    def __post_init__(self):
        r = self.rates
        if len(r) < 1 or any(r[i] <= r[i + 1] for i in range(len(r) - 1)):
            raise ValueError("rates must decrease strictly from the anchor")
        if not 0.0 < self.anchor_p_hat <= 1.0:
            raise ValueError("anchor estimate must lie in (0, 1]")
        if self.anchor_sigma > 0.1 * self.anchor_p_hat:
            raise ValueError("anchor estimate needs relative error <= 0.1")


def geometric_schedule(p0: float, p_anchor: float,
                       ratio: float = 1.7) -> list[float]:
    """Rates from p_anchor down to p0 with roughly constant spacing ratio.

    The spacing keeps each R_j large enough that the two chain weight
    distributions overlap.
    """
    if not 0.0 < p0 < p_anchor < 0.5:
        raise ValueError("need 0 < p0 < p_anchor < 1/2")
    if ratio <= 1.0:
        raise ValueError("spacing ratio must exceed 1")
    steps = max(1, math.ceil(math.log(p_anchor / p0) / math.log(ratio)))
    factor = (p_anchor / p0) ** (1.0 / steps)
    return [p0 * factor**k for k in range(steps, -1, -1)]


@dataclass
class ChainSample:
    """Weight trace of a Metropolis chain over failing configurations."""

    p: float
    n: int
    weights: np.ndarray          # recorded (thinned) weight trace
    proposed: int
    accepted_flip: int           # proposals passing the Metropolis test
    accepted_failing: int        # proposals that also stayed failing
    burn_in: int
    thin: int
    seed: int
    final_bits: np.ndarray = field(repr=False, default=None)

    def acceptance_row(self) -> dict:
        return {"p": self.p, "proposed": self.proposed,
                "accepted_flip": self.accepted_flip,
                "accepted_failing": self.accepted_failing,
                "recorded": len(self.weights)}


def minimal_failing_config(geom: CodeGeometry,
                           backend: str | None = None) -> np.ndarray:
    """A weight-d/2 error on which the matching decoder fails.

    Scans weight-d/2 subsets of one minimal non-contractible cycle; among
    them the decoder must fail on at least one, since a failing subset and
    its complement within the cycle share a syndrome.
    """
    cycle = logical_cycle(geom, axis=0)
    half = geom.d // 2
    for subset in itertools.combinations(range(len(cycle)), half):
        bits = np.zeros(geom.n, dtype=np.uint8)
        bits[cycle[list(subset)]] = 1
        if _decode_fails(geom, bits, backend):
            return bits
    raise RuntimeError("no failing half-cycle configuration found")


def _decode_fails(geom: CodeGeometry, bits: np.ndarray,
                  backend: str | None) -> bool:
    counts = np.zeros(geom.n_vertices, dtype=np.int64)
    on = np.nonzero(bits)[0]
    np.add.at(counts, geom.edges[on, 0], 1)
    np.add.at(counts, geom.edges[on, 1], 1)
    defects = np.nonzero(counts % 2)[0]
    parity = geom.edge_cross[on].sum(axis=0) % 2
    return decode_parity(geom, defects, parity, backend=backend) != (0, 0)


def metropolis_chain(geom: CodeGeometry, p: float, steps: int,
                     init_bits: np.ndarray, seed: int,
                     burn_in_fraction: float = 0.05,
                     thin: int | None = None,
                     backend: str | None = None) -> ChainSample:
    """Single-bit-flip Metropolis chain conditioned on decoder failure.

    Each step proposes flipping one uniformly chosen qubit, accepts with
    probability min(1, pi(E')/pi(E)), and then keeps the move only if the
    flipped configuration still decodes to failure.  Weight-increasing
    moves are pre-filtered by their acceptance draw before any decoding.
    """
    if not 0.0 < p < 0.5:
        raise ValueError(f"error rate must lie in (0, 1/2), got {p}")
    bits = np.array(init_bits, dtype=np.uint8).copy()
    if not _decode_fails(geom, bits, backend):
        raise ValueError("initial configuration must decode to failure")
    thin = geom.n if thin is None else thin
    burn_in = int(steps * burn_in_fraction)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))

    # Incrementally maintained syndrome state.
    vparity = np.zeros(geom.n_vertices, dtype=np.uint8)
    on = np.nonzero(bits)[0]
    np.add.at(vparity, geom.edges[on, 0], 1)
    np.add.at(vparity, geom.edges[on, 1], 1)
    vparity %= 2
    cparity = geom.edge_cross[on].sum(axis=0).astype(np.uint8) % 2
    weight = int(bits.sum())

    p_up = p / (1.0 - p)
    accepted_flip = 0
    accepted_failing = 0
    recorded = []
    block = 8192
    done = 0
    while done < steps:
        m = min(block, steps - done)
        idx = rng.integers(0, geom.n, m)
        coin = rng.random(m)
        for t in range(m):
            step = done + t
            e = int(idx[t])
            adding = bits[e] == 0
            if adding and coin[t] >= p_up:
                pass                      # Metropolis rejection, no decode
            else:
                accepted_flip += 1
                tail, head = geom.edges[e]
                bits[e] ^= 1
                vparity[tail] ^= 1
                vparity[head] ^= 1
                cparity ^= geom.edge_cross[e]
                defects = np.nonzero(vparity)[0]
                if decode_parity(geom, defects, cparity,
                                 backend=backend) != (0, 0):
                    accepted_failing += 1
                    weight += 1 if adding else -1
                else:
                    bits[e] ^= 1          # revert: must stay failing
                    vparity[tail] ^= 1
                    vparity[head] ^= 1
                    cparity ^= geom.edge_cross[e]
            if step >= burn_in and (step - burn_in) % thin == 0:
                recorded.append(weight)
        done += m
    return ChainSample(p=p, n=geom.n,
                       weights=np.array(recorded, dtype=np.int64),
                       proposed=steps, accepted_flip=accepted_flip,
                       accepted_failing=accepted_failing,
                       burn_in=burn_in, thin=thin, seed=seed,
                       final_bits=bits)


@dataclass
class RatioEstimate:
    """One splitting ratio R_j = P(p_low) / P(p_high) with its error."""

    p_low: float
    p_high: float
    ratio: float
    sigma: float
    c_star: float
    diagnostics: dict = field(default_factory=dict)

    def row(self) -> dict:
        return {"p_low": self.p_low, "p_high": self.p_high,
                "C_star": self.c_star, "R": self.ratio, "sigma": self.sigma}


def _crossing_terms(chain_low: ChainSample, chain_high: ChainSample):
    """log A evaluated on both chains' weight traces, A = pi_high / pi_low.

    With this orientation the identity pi_low(E) g(1/(C A)) =
    C pi_high(E) g(C A) makes the two expectation curves cross exactly at
    C* = P(p_low) / P(p_high), a value in (0, 1].
    """
    n = chain_low.n
    pl, ph = chain_low.p, chain_high.p
    log_a_low = (log_weight_probability(n, chain_low.weights, ph)
                 - log_weight_probability(n, chain_low.weights, pl))
    log_a_high = (log_weight_probability(n, chain_high.weights, ph)
                  - log_weight_probability(n, chain_high.weights, pl))
    return log_a_low, log_a_high


def bennett_ratio(chain_low: ChainSample, chain_high: ChainSample,
                  n_batches: int = 32) -> RatioEstimate:
    """Crossing constant of the two acceptance-ratio expectation curves.

    Solves F(C) = <g(C A)>_high - <g(1/(C A))>_low = 0 with
    A = pi_high / pi_low; at the crossing R_j = C*.  The error bar
    propagates batch-means variance of the two expectations through F'
    at the root.
    """
    if chain_low.n != chain_high.n:
        raise ValueError("chains must share one geometry")
    if chain_low.p > chain_high.p:
        raise ValueError("first chain must be at the lower error rate")
    log_a_low, log_a_high = _crossing_terms(chain_low, chain_high)

    def F(log_c):
        u = g_bennett(np.exp(log_c + log_a_high)).mean()
        v = g_bennett(np.exp(-log_c - log_a_low)).mean()
        return u - v

    # F decreases monotonically from +1 to -1 in C; bracket by scanning
    # log C over the span of the observed likelihood ratios.
    lo = float(-max(log_a_low.max(), log_a_high.max()) - 20.0)
    hi = float(-min(log_a_low.min(), log_a_high.min()) + 20.0)
    grid = np.linspace(lo, hi, 100)
    vals = np.array([F(x) for x in grid])
    sign_change = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
    if len(sign_change) == 0:
        raise RuntimeError(
            "no crossing found: chain overlap too small for this rate pair")
    a, b = grid[sign_change[0]], grid[sign_change[0] + 1]
    log_c = scipy.optimize.brentq(F, a, b, xtol=1e-12, rtol=1e-12)
    c_star = math.exp(log_c)

    def batch_var(values):
        m = len(values) - len(values) % n_batches
        if m < n_batches:
            return float("inf")
        batches = values[:m].reshape(n_batches, -1).mean(axis=1)
        return float(batches.var(ddof=1) / n_batches)

    var_u = batch_var(g_bennett(np.exp(log_c + log_a_high)))
    var_v = batch_var(g_bennett(np.exp(-log_c - log_a_low)))
    eps = 1e-4
    dF = (F(log_c + eps) - F(log_c - eps)) / (2 * eps)  # per unit log C
    sigma_log_c = math.sqrt(var_u + var_v) / max(abs(dF), 1e-300)
    return RatioEstimate(
        p_low=chain_low.p, p_high=chain_high.p,
        ratio=c_star, sigma=c_star * sigma_log_c, c_star=c_star,
        diagnostics={
            "low": chain_low.acceptance_row(),
            "high": chain_high.acceptance_row(),
            "sigma_log": sigma_log_c,
        })


@dataclass
class SplitResult:
    p0: float
    p_hat: float
    sigma: float
    ratios: list
    schedule: SplitSchedule

    def rate_estimates(self):
        """Failure rate with sigma at every scheduled rate, telescoped."""
        value = self.schedule.anchor_p_hat
        rel_var = (self.schedule.anchor_sigma / value) ** 2
        out = [(self.schedule.rates[0], value, value * math.sqrt(rel_var))]
        for est in self.ratios:
            value *= est.ratio
            rel_var += (est.sigma / est.ratio) ** 2
            out.append((est.p_low, value, value * math.sqrt(rel_var)))
        return out


def split_failure_rate(geom: CodeGeometry, schedule: SplitSchedule,
                       steps: int = 10**6, seed: int = 0,
                       backend: str | None = None,
                       thin: int | None = None) -> SplitResult:
    """Telescoping product of splitting ratios below the anchor rate.

    Runs one chain per scheduled rate (interior chains serve both adjacent
    ratios) and combines relative errors in quadrature.
    """
    rates = schedule.rates
    init = minimal_failing_config(geom, backend=backend)
    children = np.random.SeedSequence(seed).spawn(len(rates))
    chains = []
    for rate, child in zip(rates, children):
        chain = metropolis_chain(geom, rate, steps, init,
                                 seed=child.entropy + child.spawn_key[0],
                                 thin=thin, backend=backend)
        chains.append(chain)
    ratios = []
    value = schedule.anchor_p_hat
    rel_var = (schedule.anchor_sigma / schedule.anchor_p_hat) ** 2
    for k in range(len(rates) - 1):
        est = bennett_ratio(chain_low=chains[k + 1], chain_high=chains[k])
        ratios.append(est)
        value *= est.ratio
        rel_var += (est.sigma / est.ratio) ** 2
    return SplitResult(p0=rates[-1], p_hat=value,
                       sigma=value * math.sqrt(rel_var),
                       ratios=ratios, schedule=schedule)
