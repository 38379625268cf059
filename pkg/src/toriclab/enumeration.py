"""Exhaustive small-instance failure counts and coset analysis.

Every weight-w error is summarized by two integers: a syndrome key (bit mask
of defect vertices) and the 2-bit cut-crossing parity of its support.  Two
errors with the same syndrome are logically equivalent exactly when their
parities agree, so the coset structure of each syndrome follows from a sort
and a group-by, without storing configurations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import CodeGeometry
from .matching import decode_parity

COMBINATION_GUARD = 10**8

_CLASS_LABELS = {0: "success", 1: "vertical", 2: "horizontal", 3: "diagonal"}


@dataclass
class TallyResult:
    """Failure counts per (weight, winding class)."""

    orientation: str
    d: int
    policy: str
    counts: dict = field(default_factory=dict)  # (w, (h, v)) -> count

    def add(self, w: int, winding: tuple[int, int], k: int = 1):
        key = (w, winding)
        self.counts[key] = self.counts.get(key, 0) + k

    def failures(self, w: int) -> int:
        return sum(c for (ww, cls), c in self.counts.items()
                   if ww == w and cls != (0, 0))

    def horizontal_or_vertical(self, w: int) -> int:
        return sum(c for (ww, cls), c in self.counts.items()
                   if ww == w and cls in ((1, 0), (0, 1)))

    def diagonal(self, w: int) -> int:
        return self.counts.get((w, (1, 1)), 0)

    def by_direction(self, w: int) -> tuple[int, int]:
        """(horizontal, vertical) failure counts at one weight."""
        return (self.counts.get((w, (1, 0)), 0),
                self.counts.get((w, (0, 1)), 0))

    def rows(self):
        for (w, (h, v)), c in sorted(self.counts.items()):
            yield {"orientation": self.orientation, "d": self.d, "w": w,
                   "policy": self.policy,
                   "class": _CLASS_LABELS[2 * h + v], "count": c}


@dataclass
class CosetReport:
    """Per-syndrome coset sizes of weight-w errors (multi-coset syndromes)."""

    orientation: str
    d: int
    w: int
    # list of dicts: {"syndrome": int key, "by_parity": {par: size}}
    entries: list = field(default_factory=list)
    n_configs: int = 0
    n_syndromes: int = 0

    def sizes(self, entry) -> tuple[int, ...]:
        return tuple(sorted(entry["by_parity"].values(), reverse=True))


def _check_enumerable(geom: CodeGeometry, w: int):
    total = math.comb(geom.n, w)
    if total > COMBINATION_GUARD:
        raise ValueError(
            f"C({geom.n}, {w}) = {total} exceeds the enumeration guard")
    if geom.n_vertices > 64:
        raise ValueError("syndrome keys require at most 64 defect vertices")
    return total


def _scan(geom: CodeGeometry, w: int):
    """Syndrome key and crossing parity for every weight-w configuration."""
    total = _check_enumerable(geom, w)
    vmask = [(1 << int(t)) ^ (1 << int(h)) for t, h in geom.edges]
    pmask = [int(a) + 2 * int(b) for a, b in geom.edge_cross]
    syn = np.empty(total, dtype=np.uint64)
    par = np.empty(total, dtype=np.uint8)
    idx = 0
    for combo in itertools.combinations(range(geom.n), w):
        s = 0
        p = 0
        for e in combo:
            s ^= vmask[e]
            p ^= pmask[e]
        syn[idx] = s
        par[idx] = p
        idx += 1
    return syn, par


def _groups(syn: np.ndarray, par: np.ndarray):
    """Yield (syndrome_key, parity_counts) for every distinct syndrome."""
    order = np.argsort(syn, kind="stable")
    s = syn[order]
    p = par[order]
    boundaries = np.nonzero(np.diff(s))[0] + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [len(s)]])
    for lo, hi in zip(starts, ends):
        chunk = p[lo:hi]
        counts = np.bincount(chunk, minlength=4)
        yield int(s[lo]), counts


def _syndrome_defects(key: int) -> np.ndarray:
    return np.array([i for i in range(64) if (key >> i) & 1], dtype=np.int64)


def coset_report(geom: CodeGeometry, w: int) -> CosetReport:
    """Coset sizes of all syndromes with more than one equivalence class."""
    syn, par = _scan(geom, w)
    report = CosetReport(orientation=geom.orientation.value, d=geom.d, w=w,
                         n_configs=len(syn))
    for key, counts in _groups(syn, par):
        report.n_syndromes += 1
        present = np.nonzero(counts)[0]
        if len(present) > 1:
            report.entries.append({
                "syndrome": key,
                "by_parity": {int(c): int(counts[c]) for c in present},
            })
    return report


def _policy_choice(by_parity: dict, policy: str, geom=None, key=None) -> int:
    """Parity label of the coset the decoder corrects towards."""
    if policy == "best":
        return min(by_parity, key=lambda c: (-by_parity[c], c))
    if policy == "worst":
        return min(by_parity, key=lambda c: (by_parity[c], c))
    if policy == "implemented":
        h, v = decode_parity(geom, _syndrome_defects(key),
                             np.zeros(2, dtype=np.uint8))
        return h + 2 * v
    raise ValueError(f"unknown decoder policy {policy!r}")


def enumerate_failures(geom: CodeGeometry, w: int,
                       policy: str = "implemented",
                       report: CosetReport | None = None) -> TallyResult:
    """Count failing weight-w errors under a minimum-weight decoder policy.

    ``best``/``worst`` correct towards the largest/smallest coset (only
    defined at the minimal failing weight w = d/2); ``implemented`` uses the
    blossom decoder actually shipped.  Only syndromes with several cosets can
    produce failures at w = d/2, so the tally is assembled from the coset
    report.
    """
    if w != geom.d // 2:
        if policy != "implemented":
            raise ValueError("best/worst policies are defined at w = d/2")
        return _enumerate_by_decoding(geom, w)
    if report is None:
        report = coset_report(geom, w)
    tally = TallyResult(orientation=geom.orientation.value, d=geom.d,
                        policy=policy)
    tally.add(w, (0, 0), 0)
    for entry in report.entries:
        by_parity = entry["by_parity"]
        chosen = _policy_choice(by_parity, policy, geom=geom,
                                key=entry["syndrome"])
        for c, size in by_parity.items():
            rel = c ^ chosen
            if rel != 0:
                tally.add(w, (rel & 1, rel >> 1), size)
    return tally


def _enumerate_by_decoding(geom: CodeGeometry, w: int) -> TallyResult:
    """Direct per-syndrome decoding, valid at any weight."""
    syn, par = _scan(geom, w)
    tally = TallyResult(orientation=geom.orientation.value, d=geom.d,
                        policy="implemented")
    tally.add(w, (0, 0), 0)
    for key, counts in _groups(syn, par):
        h, v = decode_parity(geom, _syndrome_defects(key),
                             np.zeros(2, dtype=np.uint8))
        chosen = h + 2 * v
        for c in np.nonzero(counts)[0]:
            rel = int(c) ^ chosen
            if rel != 0:
                tally.add(w, (rel & 1, rel >> 1), int(counts[c]))
    return tally


def minimal_winding_cycles(geom: CodeGeometry) -> list[tuple[int, ...]]:
    """All length-d cycles with nontrivial winding, as sorted edge tuples.

    Depth-first search rooted at each vertex in turn, restricted to
    vertices with id at least the root and pruned by the distance back to
    the root; cycles are deduplicated across roots and directions by
    their edge set.
    """
    d = geom.d
    nbrs = [[] for _ in range(geom.n_vertices)]
    for e in range(geom.n):
        t, h = (int(x) for x in geom.edges[e])
        a, b = (int(c) for c in geom.edge_cross[e])
        nbrs[t].append((h, e, a, b))
        nbrs[h].append((t, e, a, b))
    dist = geom.dist
    cycles = set()
    visited = np.zeros(geom.n_vertices, dtype=bool)

    def extend(root, v, steps_left, wind_a, wind_b, path):
        for u, e, a, b in nbrs[v]:
            if steps_left == 1:
                if u == root and (wind_a ^ a, wind_b ^ b) != (0, 0):
                    cycles.add(frozenset(path + [e]))
            elif (u > root and not visited[u]
                  and dist[u, root] <= steps_left - 1):
                visited[u] = True
                path.append(e)
                extend(root, u, steps_left - 1, wind_a ^ a, wind_b ^ b, path)
                path.pop()
                visited[u] = False

    for root in range(geom.n_vertices):
        visited[root] = True
        extend(root, root, d, 0, 0, [])
        visited[root] = False
    return sorted(tuple(sorted(c)) for c in cycles)


def minimal_failure_count(geom: CodeGeometry) -> int:
    """Exact number of failing weight-d/2 errors under the shipped decoder.

    A weight-d/2 error fails only when its minimum-weight correction
    completes it to a closed winding subgraph of at most d edges, and the
    only such subgraphs are single length-d winding cycles.  Every
    failing error is therefore a half-edge subset of a minimal winding
    cycle, which reduces the census from all C(n, d/2) configurations to
    the cycle subsets, reaching sizes where exhaustive scans are out of
    range.  Each distinct candidate is decoded once per syndrome.
    """
    w = geom.d // 2
    candidates = set()
    for cycle in minimal_winding_cycles(geom):
        for combo in itertools.combinations(cycle, w):
            candidates.add(combo)
    pmask = [int(a) + 2 * int(b) for a, b in geom.edge_cross]
    chosen_by_syndrome: dict[tuple, int] = {}
    failures = 0
    for combo in candidates:
        degree = {}
        parity = 0
        for e in combo:
            for v in geom.edges[e]:
                degree[int(v)] = degree.get(int(v), 0) ^ 1
            parity ^= pmask[e]
        defects = tuple(sorted(v for v, odd in degree.items() if odd))
        chosen = chosen_by_syndrome.get(defects)
        if chosen is None:
            h, v = decode_parity(geom, np.array(defects, dtype=np.int64),
                                 np.zeros(2, dtype=np.uint8))
            chosen = h + 2 * v
            chosen_by_syndrome[defects] = chosen
        if parity ^ chosen:
            failures += 1
    return failures


def random_decoder_expectation(report: CosetReport) -> float:
    """Expected failing-error count of the uniform minimum-weight decoder."""
    total = 0.0
    for entry in report.entries:
        sizes = np.array(list(entry["by_parity"].values()), dtype=float)
        m = sizes.sum()
        total += m * (1.0 - float(((sizes / m) ** 2).sum()))
    return total


def exhaustive_weight_tally(geom: CodeGeometry, max_weight: int | None = None):
    """Failing-error counts N_fail(w) from decoding every configuration.

    Feasible for n <= 24 or so; used as the exact ground truth behind the
    free-energy decomposition and the Monte Carlo oracle.
    """
    if geom.n > 24:
        raise ValueError("exhaustive tally needs 2^n enumerable")
    from .noise import ErrorConfig
    from .matching import decode
    max_weight = geom.n if max_weight is None else max_weight
    counts = {}  # (w, (h, v)) -> count
    for code in range(1 << geom.n):
        bits = np.frombuffer(
            np.array([code], dtype=np.uint32).tobytes(), dtype=np.uint8)
        bits = np.unpackbits(bits, bitorder="little")[:geom.n]
        w = int(bits.sum())
        if w > max_weight:
            continue
        out = decode(geom, ErrorConfig(bits))
        key = (w, (out.winding.h, out.winding.v))
        counts[key] = counts.get(key, 0) + 1
    tally = TallyResult(orientation=geom.orientation.value, d=geom.d,
                        policy="implemented", counts=counts)
    return tally
