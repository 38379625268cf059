"""Counting non-contractible lattice paths, exactly and by sampling.

Unconstrained counts N_unc(l; x, y) over the infinite square lattice come
from an exact multinomial sum with a Gaussian closed form for large l.
Torus cycle counts N_con(l, n) restrict to vertex-self-avoiding closed
paths with nontrivial winding; they are enumerated exactly by backtracking
at small sizes and estimated elsewhere by sampling uniform unconstrained
closed paths and measuring the self-avoiding fraction.  A finite-size
ansatz log N_con / sqrt(n/2) = A - (B/sqrt(n)) log(C sqrt(n)) extrapolates
the curves to infinite size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.interpolate

from .geometry import CodeGeometry, Orientation

BACKTRACK_NODE_GUARD = 10**9

# Connective constant of square-lattice self-avoiding walks; external
# numerical value, not derived here.
SAW_CONNECTIVE_CONSTANT = 2.638


@dataclass(frozen=True)
class WalkCount:
    """A path count, exact or in logarithm with sampling error."""

    l: int
    x: int
    y: int
    exact: int | None = None
    log_value: float | None = None
    sigma_log: float = 0.0

    def log(self) -> float:
        if self.exact is not None:
            return math.log(self.exact) if self.exact > 0 else -math.inf
        return self.log_value


def _step_counts(l: int, x: int, y: int):
    """Yield (n_up, n_down, n_right, n_left) over all valid splits."""
    for n_up in range((l + abs(y)) // 2 + 1):
        n_down = n_up - y
        rest = l - n_up - n_down
        if n_down < 0 or rest < 0 or (rest + x) % 2 != 0:
            continue
        n_right = (rest + x) // 2
        n_left = n_right - x
        if n_right < 0 or n_left < 0:
            continue
        yield n_up, n_down, n_right, n_left


def count_unconstrained(l: int, x: int, y: int) -> WalkCount:
    """Exact number of length-l lattice paths from the origin to (x, y).

    Sums multinomials over the admissible step-count vectors; zero when
    the parity of l + x + y is odd or l < |x| + |y|.
    """
    if l < 0:
        raise ValueError(f"path length must be nonnegative, got {l}")
    if (l + x + y) % 2 != 0 or l < abs(x) + abs(y):
        return WalkCount(l=l, x=x, y=y, exact=0)
    total = 0
    for n_up, n_down, n_right, n_left in _step_counts(l, x, y):
        total += (math.factorial(l)
                  // math.factorial(n_up) // math.factorial(n_down)
                  // math.factorial(n_right) // math.factorial(n_left))
    return WalkCount(l=l, x=x, y=y, exact=total)


def _log_summand(l, x, y, n_up):
    """The continuous multinomial exponent B(n_up), via log-gamma.

    Keeping the full log-gamma (rather than the leading n log n Stirling
    terms) retains the half-log prefactors, which do not cancel between
    numerator and denominator and shift log N by O(log l).
    """
    n_down = n_up - y
    n_right = (l - n_up - n_down + x) / 2.0
    n_left = n_right - x
    return (math.lgamma(l + 1) - math.lgamma(n_up + 1)
            - math.lgamma(n_down + 1) - math.lgamma(n_right + 1)
            - math.lgamma(n_left + 1))


def unconstrained_closed_form(l: int, x: int, y: int) -> WalkCount:
    """Gaussian-sum approximation log N_unc = B(mu) + log sqrt(2 pi s^2).

    The multinomial summand peaks at mu = (l^2 - x^2 + 2ly + y^2) / (4l);
    replacing the sum over n_up by the Laplace integral with variance
    s^2 = -1/B''(mu) is accurate well inside the domain |x| + |y| < l.
    """
    if not abs(x) + abs(y) < l:
        raise ValueError("closed form needs |x| + |y| < l")
    # The count is invariant under axis relabeling and reflections; fix a
    # canonical representative so the symmetry holds to the last bit.
    x, y = max(abs(x), abs(y)), min(abs(x), abs(y))
    mu = (l * l - x * x + 2 * l * y + y * y) / (4.0 * l)
    n_down = mu - y
    n_right = (l - mu - n_down + x) / 2.0
    n_left = n_right - x
    curvature = 1.0 / mu + 1.0 / n_down + 1.0 / n_right + 1.0 / n_left
    log_n = _log_summand(l, x, y, mu) + 0.5 * math.log(2 * math.pi / curvature)
    return WalkCount(l=l, x=x, y=y, log_value=log_n)


def unconstrained_expansion(l: int, x: int, y: int) -> float:
    """Large-l series of log N_unc in powers of r/l, r^2 = x^2 + y^2.

    Leading behaviour l log 4 shows loose paths forget the lattice frame;
    the quartic cross term 2 x^2 y^2 / (3 l^3) carries the cos(4 theta)
    anisotropy that separates the two orientations for tight paths.
    """
    r2 = x * x + y * y
    return (l * math.log(4.0) - r2 / l
            - r2 * r2 / (6.0 * l**3) - 2.0 * x * x * y * y / (3.0 * l**3))


def _adjacency(geom: CodeGeometry):
    """Neighbor list: per vertex, (neighbor, crossing parity pair)."""
    nbrs = [[] for _ in range(geom.n_vertices)]
    for e in range(geom.n):
        t, h = (int(v) for v in geom.edges[e])
        a, b = (int(c) for c in geom.edge_cross[e])
        nbrs[t].append((h, a, b))
        nbrs[h].append((t, a, b))
    return nbrs


def exact_constrained_small(geom: CodeGeometry, l: int) -> WalkCount:
    """Exact count of non-contractible self-avoiding l-cycles on the torus.

    Depth-first search from a fixed origin counts directed rooted cycles
    with nontrivial winding parity; vertex transitivity converts them to
    undirected cycle totals via N_con = V * rooted / (2 l).
    """
    if l < 0:
        raise ValueError(f"cycle length must be nonnegative, got {l}")
    if 4 * 3 ** max(l - 1, 0) > BACKTRACK_NODE_GUARD:
        raise ValueError(f"backtracking guard exceeded for length {l}")
    if l < geom.d or l % 2 != 0:
        return WalkCount(l=l, x=0, y=0, exact=0)
    nbrs = _adjacency(geom)
    dist = geom.dist
    visited = np.zeros(geom.n_vertices, dtype=bool)
    origin = 0
    rooted = 0

    def extend(v, steps_left, wind_a, wind_b):
        nonlocal rooted
        for u, a, b in nbrs[v]:
            if steps_left == 1:
                if u == origin and (wind_a ^ a, wind_b ^ b) != (0, 0):
                    rooted += 1
            elif not visited[u] and dist[u, origin] <= steps_left - 1:
                visited[u] = True
                extend(u, steps_left - 1, wind_a ^ a, wind_b ^ b)
                visited[u] = False

    visited[origin] = True
    extend(origin, l, 0, 0)
    return WalkCount(l=l, x=0, y=0,
                     exact=geom.n_vertices * rooted // (2 * l))


def sample_step_sequences(l: int, x: int, y: int, samples: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Uniform random length-l paths to (x, y), as (samples, l) step codes.

    Draws the step-count vector with probability proportional to its
    multinomial coefficient, then shuffles the steps uniformly; the two
    stages together make every path equally likely.  Step codes are
    0: +x, 1: -x, 2: +y, 3: -y.
    """
    vectors = list(_step_counts(l, x, y))
    if not vectors:
        raise ValueError(f"no length-{l} paths reach ({x}, {y})")
    logw = np.array([
        (math.lgamma(l + 1) - math.lgamma(nu + 1) - math.lgamma(nd + 1)
         - math.lgamma(nr + 1) - math.lgamma(nl + 1))
        for nu, nd, nr, nl in vectors])
    probs = np.exp(logw - logw.max())
    probs /= probs.sum()
    choice = rng.choice(len(vectors), size=samples, p=probs)
    out = np.empty((samples, l), dtype=np.int8)
    for k in np.unique(choice):
        rows = np.nonzero(choice == k)[0]
        nu, nd, nr, nl = vectors[k]
        steps = np.repeat(np.arange(4, dtype=np.int8), (nr, nl, nu, nd))
        block = np.broadcast_to(steps, (len(rows), l))
        # Independent uniform shuffles of every row at once.
        order = rng.random((len(rows), l)).argsort(axis=1)
        out[rows] = np.take_along_axis(block, order, axis=1)
    return out


def _walk_families(geom: CodeGeometry, l: int):
    """Winding classes reachable at length l, as displacement vectors.

    A simple cycle winds (a, b) times around the two handles with a, b
    coprime; fixing the orientation sign (a > 0, or a = 0 with b > 0)
    counts each undirected class once.  A class contributes only when its
    lift displacement a*v1 + b*v2 fits within l steps.
    """
    v1, v2 = geom.periods
    bound = max(1, l // geom.d)
    families = []
    for a in range(0, bound + 1):
        for b in range(-bound, bound + 1):
            if a == 0 and b <= 0:
                continue
            if math.gcd(a, abs(b)) != 1:
                continue
            dx = a * v1[0] + b * v2[0]
            dy = a * v1[1] + b * v2[1]
            if abs(dx) + abs(dy) <= l:
                families.append((dx, dy))
    return families


@dataclass
class ConstrainedPoint:
    """Sampled N_con(l, n) with its error, for one geometry and length."""

    d: int
    n: int
    l: int
    log_ncon: float
    sigma_log: float
    accepted: int
    samples: int
    exact: bool = False

    def row(self) -> dict:
        return {"d": self.d, "n": self.n, "l": self.l,
                "log_ncon": self.log_ncon, "sigma_log": self.sigma_log,
                "accepted": self.accepted, "samples": self.samples}


def _self_avoiding_fraction(geom: CodeGeometry, steps: np.ndarray) -> int:
    """Count sampled closed walks whose vertices are all distinct.

    Vectorized: cumulative coordinates of every walk are folded into the
    fundamental domain at once and each row is checked for repeated
    vertex ids by sorting.
    """
    from .geometry import _canonicalize
    deltas = np.array([(1, 0), (-1, 0), (0, 1), (0, -1)], dtype=np.int64)
    moves = deltas[steps[:, :-1]]                  # (samples, l-1, 2)
    pos = np.cumsum(moves, axis=1)
    cx, cy, _, _ = _canonicalize(geom.orientation, geom.d,
                                 pos[:, :, 0], pos[:, :, 1])
    height = int(geom.vertex_coords[:, 1].max()) + 1
    ids = cx * height + cy                         # origin has id 0
    ids = np.concatenate([np.zeros((len(ids), 1), dtype=ids.dtype), ids],
                         axis=1)
    ids.sort(axis=1)
    distinct = (np.diff(ids, axis=1) != 0).all(axis=1)
    return int(distinct.sum())


def sample_constrained(geom: CodeGeometry, l: int, samples: int,
                       seed: int) -> ConstrainedPoint:
    """Estimated N_con(l, n) from the self-avoiding fraction of closed walks.

    Each winding family contributes V * fraction * N_unc(l; x, y) / l,
    since every undirected cycle arises from l rooted directed walks per
    direction and V equivalent origins.  Relative errors are binomial.
    """
    if l < geom.d or l % 2 != 0:
        return ConstrainedPoint(d=geom.d, n=geom.n, l=l, log_ncon=-math.inf,
                                sigma_log=0.0, accepted=0, samples=samples,
                                exact=True)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    total = 0.0
    var = 0.0
    accepted_all = 0
    for x, y in _walk_families(geom, l):
        n_unc = count_unconstrained(l, x, y).exact
        if n_unc == 0:
            continue
        scale = geom.n_vertices * n_unc / l
        if l == geom.d:
            # At the minimal length every partial displacement is shorter
            # than any period, so tight staircases cannot revisit a vertex.
            total += scale
            accepted_all += samples
            continue
        steps = sample_step_sequences(l, x, y, samples, rng)
        k = _self_avoiding_fraction(geom, steps)
        accepted_all += k
        f = k / samples
        total += scale * f
        if 0 < k:
            var += scale ** 2 * f * (1 - f) / samples
    if total == 0.0:
        # Zero acceptances: report the one-sided 95% binomial bound.
        bound = sum(geom.n_vertices * count_unconstrained(l, x, y).exact
                    * (3.0 / samples) / l
                    for x, y in _walk_families(geom, l))
        return ConstrainedPoint(d=geom.d, n=geom.n, l=l,
                                log_ncon=math.log(bound) if bound else -math.inf,
                                sigma_log=math.inf, accepted=0, samples=samples)
    return ConstrainedPoint(d=geom.d, n=geom.n, l=l,
                            log_ncon=math.log(total),
                            sigma_log=math.sqrt(var) / total,
                            accepted=accepted_all, samples=samples,
                            exact=l == geom.d)


@dataclass
class ExtrapolationFit:
    """Per-l-hat infinite-size limits A with the finite-size parameters."""

    l_hat: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    residual: np.ndarray
    distances: tuple[int, ...]
    degenerate: np.ndarray = field(default=None)


def fit_finite_size(sqrt_n: np.ndarray, values: np.ndarray):
    """Solve A - (B / sqrt(n)) log(C sqrt(n)) = value by least squares.

    Linear in (A, B, B log C); returns (A, B, C, residual).  C degenerates
    to NaN when B vanishes.
    """
    sqrt_n = np.asarray(sqrt_n, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(sqrt_n) < 4:
        raise ValueError("need at least 4 sizes to fit the finite-size form")
    M = np.column_stack([np.ones_like(sqrt_n),
                         -np.log(sqrt_n) / sqrt_n,
                         -1.0 / sqrt_n])
    coef, res, rank, _ = np.linalg.lstsq(M, values, rcond=None)
    if rank < 3:
        raise ValueError("degenerate finite-size fit")
    A, b, blogc = coef
    C = math.exp(blogc / b) if abs(b) > 1e-12 else math.nan
    residual = float(res[0]) if len(res) else 0.0
    return float(A), float(b), C, residual


def extrapolate_ncon(curves: dict[int, list[ConstrainedPoint]],
                     l_hat_grid=None) -> ExtrapolationFit:
    """Fit log N_con / sqrt(n/2) = A - (B / sqrt(n)) log(C sqrt(n)).

    Interpolates each distance's curve in l with a monotone cubic, samples
    it on the shared l-hat grid, and solves the ansatz, linear in
    (A, B, B log C), by least squares per grid point.  A is the reported
    infinite-size limit.
    """
    if l_hat_grid is None:
        l_hat_grid = np.arange(1.0, 3.05, 0.1)
    l_hat_grid = np.asarray(l_hat_grid, dtype=float)
    if len(curves) < 4:
        raise ValueError("need at least 4 distances to extrapolate")
    interps = {}
    for d, points in sorted(curves.items()):
        pts = sorted((pt for pt in points if math.isfinite(pt.log_ncon)),
                     key=lambda pt: pt.l)
        ls = np.array([pt.l for pt in pts], dtype=float)
        ys = np.array([pt.log_ncon for pt in pts])
        n = pts[0].n
        interps[d] = (n, scipy.interpolate.PchipInterpolator(ls, ys), ls.min(), ls.max())
    A = np.full(len(l_hat_grid), np.nan)
    B = np.full(len(l_hat_grid), np.nan)
    C = np.full(len(l_hat_grid), np.nan)
    resid = np.full(len(l_hat_grid), np.nan)
    degenerate = np.zeros(len(l_hat_grid), dtype=bool)
    for i, lh in enumerate(l_hat_grid):
        sqrt_ns, ys = [], []
        for d, (n, f, lmin, lmax) in interps.items():
            l = lh * math.sqrt(n / 2.0)
            if not lmin <= l <= lmax:
                continue
            sqrt_ns.append(math.sqrt(n))
            ys.append(float(f(l)) / math.sqrt(n / 2.0))
        if len(sqrt_ns) < 4:
            degenerate[i] = True
            continue
        try:
            A[i], B[i], C[i], resid[i] = fit_finite_size(
                np.array(sqrt_ns), np.array(ys))
        except ValueError:
            degenerate[i] = True
    return ExtrapolationFit(l_hat=l_hat_grid, A=A, B=B, C=C, residual=resid,
                            distances=tuple(sorted(curves)),
                            degenerate=degenerate)
