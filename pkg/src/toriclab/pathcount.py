"""Closed-form counts and bounds for minimal-weight failing errors.

The square-orientation count is exact.  For the rotated orientation the
count is bracketed by combinatorial path-counting bounds obtained by
classifying length-d non-contractible cycles by their number of right
turns; the bounds pin the exponential growth rate gamma of the count,
N_fail(d/2) ~ gamma^sqrt(n), between 2 + sqrt(2) and sqrt(27/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

GAMMA_SQUARE = 2.0 ** (1.0 / math.sqrt(2.0))
GAMMA_ROTATED_LOWER = 2.0 + math.sqrt(2.0)
GAMMA_ROTATED_UPPER = math.sqrt(27.0 / 2.0)


def _comb(a: int, b: int) -> int:
    if b < 0 or b > a or a < 0:
        return 0
    return math.comb(a, b)


def square_min_weight(d: int) -> int:
    """Exact number of weight-d/2 failing errors on the square lattice.

    Each of the 2d minimal cycles carries C(d, d/2) weight-d/2 subsets, and
    each degenerate syndrome is decoded correctly for exactly one of its two
    errors, hence the factor 1/2.
    """
    _check_distance(d)
    return (2 * d * math.comb(d, d // 2)) // 2


def turn_configurations(T: int, d: int) -> int:
    """Number of weight-d/2 errors mapping onto a fixed path with T right
    turns, under a decoder whose corrections contain no right turns.

    Each right turn must hold an error on one of its two adjacent edges; w
    of them hold two.  The remaining errors sit freely on the d - 2T edges
    away from the turns.
    """
    w_max = min(T, d // 4)
    return sum(2 ** (T - w) * _comb(T, w) * _comb(d - 2 * T, d // 2 - T - w)
               for w in range(w_max + 1))


def rotated_upper_bound(d: int) -> int:
    """Upper bound on the weight-d/2 failing-error count, rotated lattice.

    Sums turn configurations over all length-d non-contractible cycles,
    grouped by right-turn count T with the path census
    C(d/2, T)^2 - C(d/2 - 1, T)^2 + C(d/2 - 1, T - 1)^2, then adds the
    diagonal-cycle contribution d*C(d, d/2) and removes the 2d^2 straight
    runs counted three times.
    """
    _check_distance(d)
    h = d // 2
    total = 0
    for T in range(h + 1):
        paths = _comb(h, T) ** 2 - _comb(h - 1, T) ** 2 + _comb(h - 1, T - 1) ** 2
        total += paths * turn_configurations(T, d)
    return d * total + d * math.comb(d, h) - 2 * d * d


def rotated_lower_bound(d: int) -> int:
    """Lower bound from pairs of errors joined by a logical operator.

    Counts only errors whose right turns each hold exactly one error; such a
    set is closed under multiplication by the underlying logical, so any
    decoder fails on half of each pair.
    """
    _check_distance(d)
    return _pair_sum(d, 0, 0) - _pair_sum(d, 1, 0) + _pair_sum(d, 1, 1)


def _pair_sum(d: int, a: int, b: int) -> int:
    h = d // 2
    return sum(_comb(h - b, T - a) ** 2 * 2 ** T * _comb(d - 2 * T, h - T)
               for T in range(d // 4 + 1))


def gamma_asymptotics(orientation) -> tuple[float, float]:
    """Proven bracket for gamma, the failing-count growth rate per sqrt(n).

    The square value is exact; the rotated value is pinned between the
    pair lower bound and the turn-census upper bound.
    """
    name = getattr(orientation, "value", orientation)
    if name == "square":
        return (GAMMA_SQUARE, GAMMA_SQUARE)
    if name == "rotated":
        return (GAMMA_ROTATED_LOWER, GAMMA_ROTATED_UPPER)
    raise ValueError(f"unknown orientation: {orientation!r}")


@dataclass(frozen=True)
class LowPEstimate:
    """Leading-order failure rate N_fail(d/2) * p^(d/2) at small p."""

    n: int
    d: int
    coefficient: int
    exponent: int

    def rate(self, p: float) -> float:
        return float(self.coefficient) * p ** self.exponent


def low_p_failure(geom, p: float) -> float:
    """Leading-order failure rate at small p, from minimal-weight counts.

    Keeps only weight-d/2 failing errors: exact for the square lattice and
    the turn-census upper bound (believed tight for decoders that avoid
    right turns) for the rotated lattice.  Meaningful for p well below
    threshold, roughly p <= 0.01.
    """
    if geom.orientation.value == "square":
        coeff = square_min_weight(geom.d)
    else:
        coeff = rotated_upper_bound(geom.d)
    est = LowPEstimate(n=geom.n, d=geom.d, coefficient=coeff,
                       exponent=geom.d // 2)
    return est.rate(p)


def growth_rate(count_fn, d: int, step: int = 2) -> float:
    """Estimated gamma from the ratio of counts at distances d and d + step.

    Consecutive ratios cancel the polynomial prefactor of the asymptotic
    form gamma^d, so this converges much faster than count_fn(d)^(1/d).
    """
    lo = count_fn(d)
    hi = count_fn(d + step)
    return (hi / lo) ** (1.0 / step)


def _check_distance(d: int):
    if d < 2 or d % 2 != 0:
        raise ValueError(f"code distance must be a positive even integer, got {d}")
