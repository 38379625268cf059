"""Entropic failure model: free-energy decomposition, bounds, and xi(p).

The exact failure rate (1-p)^n sum_w N_fail(w) (p/(1-p))^w is rewritten as
a Boltzmann sum over the free energy F(w) = w - S(w)/beta with entropy
S(w) = log N_fail(w) and beta = log((1-p)/p).  Upper-bounding the failing
set by error configurations majority-covering a non-contractible
self-avoiding cycle gives a rigorous bound and a threshold lower bound;
replacing its 2^l inner-count by a fitted interaction strength xi(p)^l
turns the bound into a one-parameter model of the failure rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.optimize

XI_SQUARE_ZERO = 2.0
XI_ROTATED_ZERO = math.sqrt(27.0 / 8.0)
XI_THRESHOLD = 1.2471
# Square-lattice self-avoiding-walk connective constant (external value).
SAW_CONSTANT = 2.638


@dataclass(frozen=True)
class FreeEnergyProfile:
    """Energy/entropy split of the failing-set weight distribution."""

    d: int
    n: int
    p: float
    weights: tuple[int, ...]          # weights with N_fail(w) > 0
    n_fail: tuple[int, ...]
    partial: bool                      # True when not all weights included

    @property
    def beta(self) -> float:
        return math.log((1.0 - self.p) / self.p)

    def entropy(self) -> np.ndarray:
        return np.log(np.array(self.n_fail, dtype=float))

    def free_energy(self) -> np.ndarray:
        w = np.array(self.weights, dtype=float)
        return w - self.entropy() / self.beta

    def argmin_weight(self) -> int:
        return int(self.weights[int(np.argmin(self.free_energy()))])

    def reconstruct(self) -> float:
        """(1-p)^n sum_w exp(-beta F(w)), the failure rate itself."""
        return float((1.0 - self.p) ** self.n
                     * np.exp(-self.beta * self.free_energy()).sum())

    def reconstruct_exact(self) -> Fraction:
        """The same sum in rational arithmetic; exact for rational p."""
        p = Fraction(self.p).limit_denominator(10**12)
        q = 1 - p
        return sum((Fraction(c) * p**w * q**(self.n - w)
                    for w, c in zip(self.weights, self.n_fail)),
                   Fraction(0))


def free_energy_profile(geom, p: float, tally) -> FreeEnergyProfile:
    """Energy/entropy decomposition of an exhaustive failure tally.

    The tally must hold, for every included weight, the complete count of
    failing errors of that weight; weights absent from the tally mark the
    profile as partial.
    """
    if not 0.0 < p < 0.5:
        raise ValueError(f"error rate must lie in (0, 1/2), got {p}")
    by_weight = {}
    covered = set()
    for (w, cls), count in tally.counts.items():
        covered.add(w)
        if cls != (0, 0):
            by_weight[w] = by_weight.get(w, 0) + count
    weights = tuple(sorted(by_weight))
    partial = covered != set(range(geom.n + 1))
    return FreeEnergyProfile(
        d=geom.d, n=geom.n, p=p, weights=weights,
        n_fail=tuple(by_weight[w] for w in weights), partial=partial)


def _ncon_items(ncon, d: int):
    items = sorted((l, v) for l, v in ncon.items() if v > 0)
    if not items or items[0][0] < d:
        raise ValueError("cycle-count table must start at l = d")
    return items


def model_failure_rate(d: int, n: int, p: float, xi: float,
                       ncon: dict[int, float],
                       tail_tolerance: float = 1e-3,
                       filling: str = "uniform") -> float:
    """P_model = sum_l N_con(l) xi^l p^(l/2) (1-p)^(l/2).

    The sum runs over the cycle lengths present in ncon; a truncation
    error estimated from the geometric tail of the last term must stay
    below tail_tolerance of the total unless the table already reaches
    a negligible term.

    With filling="uniform" the per-cycle multiplicity is the literal
    xi^l of the formula above.  With filling="binomial" it is instead
    C(l, l/2) (xi/2)^l, reading xi/2 as the fraction of the half
    fillings of a length-l cycle that fail to it.  The two coincide as
    l grows but differ by the polynomial factor C(l, l/2)/2^l at finite
    length, which matters when pinning xi at small d.
    """
    if not 0.0 < p < 0.5:
        raise ValueError(f"error rate must lie in (0, 1/2), got {p}")
    if filling not in ("uniform", "binomial"):
        raise ValueError(f"unknown filling scheme: {filling!r}")
    items = _ncon_items(ncon, d)
    base = xi * math.sqrt(p * (1.0 - p))
    total = 0.0
    last = 0.0
    for l, n_con in items:
        last = n_con * base**l
        if filling == "binomial":
            last *= math.comb(l, l // 2) / 2.0**l
        total += last
    if last > tail_tolerance * total and base < 1.0:
        # Geometric continuation of the final term.
        tail = last * base**2 / (1.0 - base**2)
        if tail > tail_tolerance * total:
            raise ValueError(
                "cycle-count table too short: tail estimate "
                f"{tail:.3g} exceeds {tail_tolerance:.0e} of the sum")
    return total


def rigorous_upper_bound(d: int, n: int, p: float,
                         ncon: dict[int, float]) -> tuple[float, float]:
    """Returns (full, simplified) upper bounds on the failure rate.

    The full bound sums, per cycle length, the probability that at least
    half the cycle's edges carry errors; the simplified form replaces the
    inner sums by 2^l p^(l/2) (1-p)^(l/2) and is never smaller.
    """
    if not 0.0 < p < 0.5:
        raise ValueError(f"error rate must lie in (0, 1/2), got {p}")
    items = _ncon_items(ncon, d)
    x = p / (1.0 - p)
    full = 0.0
    simplified = 0.0
    for l, n_con in items:
        inner = sum(math.comb(l, u) * x**u for u in range((l + 1) // 2, l + 1))
        full += n_con * (1.0 - p) ** n * inner * (1.0 - p) ** -(n - l)
        simplified += n_con * (2.0 * math.sqrt(p * (1.0 - p))) ** l
    return full, simplified


def majority_sum_inequality(l: int, p: float) -> bool:
    """Check sum_{u>=l/2} C(l,u) x^u <= 2^l x^(l/2) with x = p/(1-p)."""
    x = p / (1.0 - p)
    lhs = sum(math.comb(l, u) * x**u for u in range((l + 1) // 2, l + 1))
    return lhs <= 2.0**l * x ** (l / 2.0) * (1.0 + 1e-12)


def threshold_lower_bound(c: float) -> float:
    """Smaller root of 2 c sqrt(p (1-p)) = 1, the provable threshold floor.

    Below this rate the simplified bound with N_con(l) < N0 c^l decays
    with growing l, so the failure rate vanishes for large n.
    """
    if c <= 1.0:
        raise ValueError("connective constant must exceed 1 for a real root")
    return 0.5 * (1.0 - math.sqrt(1.0 - 1.0 / (c * c)))


def critical_p(xi_th: float, c: float = SAW_CONSTANT) -> float:
    """Model threshold: where c xi sqrt(p (1-p)) reaches one."""
    if xi_th * c <= 2.0:
        raise ValueError("need xi_th * c > 2 for a threshold below 1/2")
    return 0.5 - math.sqrt(0.25 - 1.0 / (xi_th * xi_th * c * c))


@dataclass
class XiCurve:
    """Per-rate interaction strengths fitted to failure-rate data."""

    orientation: str
    d: int
    n: int
    p: np.ndarray
    xi: np.ndarray
    sigma: np.ndarray
    flagged: np.ndarray               # outside [1, 2] or no root found
    filling: str = "uniform"
    ncon: dict[int, float] = field(repr=False, default=None)

    def rows(self):
        for i in range(len(self.p)):
            yield {"p": float(self.p[i]), "xi": float(self.xi[i]),
                   "sigma": float(self.sigma[i]),
                   "flagged": bool(self.flagged[i])}


def xi_zero_limit(curve: "XiCurve", points: int = 3) -> float:
    """Extrapolate a fitted xi(p) curve to the zero-rate limit.

    The finite-p deficit of xi is dominated by the dressing of the
    minimal failing configurations by additional correctable errors,
    which enters log xi as a power series in p.  Fitting log xi with a
    quadratic in p over the lowest unflagged rates and evaluating the
    intercept removes the deficit to second order.
    """
    usable = [(float(curve.p[i]), float(curve.xi[i]))
              for i in range(len(curve.p)) if not curve.flagged[i]]
    usable.sort()
    if len(usable) < points or points < 2:
        raise ValueError("need at least two unflagged low-rate points")
    p = np.array([u[0] for u in usable[:points]])
    y = np.log([u[1] for u in usable[:points]])
    coef = np.polyfit(p, y, min(2, points - 1))
    return float(np.exp(coef[-1]))


XI_SEARCH_RANGE = (0.5, 2.5)


def fit_xi(estimates, ncon: dict[int, float],
           complete: bool = False, filling: str = "uniform") -> XiCurve:
    """Invert P_model(xi) = P_hat per rate by monotone root-finding.

    P_model increases strictly in xi, so each rate has at most one root in
    the search range; rates with no root, or with xi outside the physical
    window [1, 2], are flagged rather than clamped.  Error bars divide the
    estimator sigma by dP_model/dxi at the root.  Pass complete=True when
    ncon lists every nonzero cycle length, disabling the truncation guard.
    The filling scheme is forwarded to the model evaluation; "binomial"
    removes the C(l, l/2)/2^l polynomial bias and is the right choice
    when comparing small-d fits against the asymptotic limits of xi.
    """
    tail = math.inf if complete else 1e-3
    ests = sorted(estimates, key=lambda e: e.p)
    if not ests:
        raise ValueError("no failure estimates supplied")
    d, n = ests[0].d, ests[0].n
    orientation = ests[0].orientation
    ps, xis, sigmas, flags = [], [], [], []
    lo, hi = XI_SEARCH_RANGE
    for est in ests:
        if est.d != d or est.orientation != orientation:
            raise ValueError("xi fitting needs a single fixed geometry")
        target = est.p_hat
        def residual(xi):
            return model_failure_rate(d, n, est.p, xi, ncon,
                                      tail_tolerance=tail,
                                      filling=filling) - target
        ps.append(est.p)
        if target <= 0 or residual(lo) > 0 or residual(hi) < 0:
            xis.append(math.nan)
            sigmas.append(math.nan)
            flags.append(True)
            continue
        xi = scipy.optimize.brentq(residual, lo, hi, xtol=1e-12)
        eps = 1e-6
        slope = (residual(xi + eps) - residual(xi - eps)) / (2 * eps)
        xis.append(xi)
        sigmas.append(est.sigma / slope if slope > 0 else math.inf)
        flags.append(not 1.0 <= xi <= 2.0)
    return XiCurve(orientation=getattr(orientation, "value", orientation),
                   d=d, n=n, p=np.array(ps), xi=np.array(xis),
                   sigma=np.array(sigmas), flagged=np.array(flags),
                   filling=filling, ncon=dict(ncon))
