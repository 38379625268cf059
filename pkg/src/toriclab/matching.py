"""Syndrome extraction, minimum-weight perfect matching, failure classes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CodeGeometry, canonical_path
from .noise import ErrorConfig

try:
    from ._mwpm import min_weight_perfect_matching as _blossom_mwpm
except ImportError:          # extension not built; fall back to networkx
    _blossom_mwpm = None

DEFAULT_BACKEND = "blossom" if _blossom_mwpm is not None else "networkx"


@dataclass(frozen=True)
class Syndrome:
    defects: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "defects", tuple(sorted(self.defects)))


@dataclass(frozen=True)
class WindingClass:
    h: int
    v: int

    @property
    def is_failure(self) -> bool:
        return (self.h, self.v) != (0, 0)

    def label(self) -> str:
        return {(0, 0): "success", (1, 0): "horizontal",
                (0, 1): "vertical", (1, 1): "diagonal"}[(self.h, self.v)]


@dataclass(frozen=True)
class DecodeOutcome:
    correction: ErrorConfig
    winding: WindingClass
    matched_pairs: tuple[tuple[int, int], ...]


def extract_syndrome(geom: CodeGeometry, e: ErrorConfig) -> Syndrome:
    """Vertices with an odd number of flipped incident edges."""
    return Syndrome(tuple(int(v) for v in syndrome_vertices(geom, e.bits)))


def syndrome_vertices(geom: CodeGeometry, bits: np.ndarray) -> np.ndarray:
    counts = np.zeros(geom.n_vertices, dtype=np.int64)
    on = np.nonzero(bits)[0]
    np.add.at(counts, geom.edges[on, 0], 1)
    np.add.at(counts, geom.edges[on, 1], 1)
    return np.nonzero(counts % 2)[0]


def match_defects(geom: CodeGeometry, defects: np.ndarray,
                  backend: str | None = None,
                  prune_k: int | None = None) -> np.ndarray:
    """Minimum-weight perfect matching of the defects.

    Works on the complete graph over defects with torus Manhattan weights
    (exact blossom).  ``prune_k`` optionally restricts candidate edges to the
    k nearest neighbours of each defect; exactness then has to be validated
    for the instance family at hand, so the default is the complete graph.

    Returns an (m, 2) array of defect-vertex index pairs.
    """
    backend = backend or DEFAULT_BACKEND
    defects = np.asarray(defects, dtype=np.int64)
    k = len(defects)
    if k % 2 != 0:
        raise ValueError("odd defect count: corrupted syndrome")
    if k == 0:
        return np.empty((0, 2), dtype=np.int64)
    if k == 2:
        return defects.reshape(1, 2)
    sub = geom.dist[np.ix_(defects, defects)]
    if prune_k is not None and prune_k < k - 1:
        order = np.argsort(sub + np.eye(k, dtype=np.int64) * (geom.n + 1),
                           axis=1, kind="stable")[:, :prune_k]
        pairs = set()
        for i in range(k):
            for j in order[i]:
                pairs.add((min(i, int(j)), max(i, int(j))))
        local_edges = np.array(sorted(pairs), dtype=np.int32)
    else:
        iu = np.triu_indices(k, 1)
        local_edges = np.column_stack(iu).astype(np.int32)
    weights = sub[local_edges[:, 0], local_edges[:, 1]].astype(np.int64)

    if backend == "blossom":
        if _blossom_mwpm is None:
            raise RuntimeError("blossom matching extension is not available")
        flat = _blossom_mwpm(k, local_edges, weights)
        local = np.asarray(flat, dtype=np.int64).reshape(-1, 2)
    elif backend == "networkx":
        import networkx as nx
        G = nx.Graph()
        G.add_nodes_from(range(k))
        for (i, j), w in zip(local_edges, weights):
            G.add_edge(int(i), int(j), weight=int(w))
        mate = nx.min_weight_matching(G)
        local = np.array(sorted((min(a, b), max(a, b)) for a, b in mate),
                         dtype=np.int64)
    else:
        raise ValueError(f"unknown matching backend {backend!r}")
    if len(local) * 2 != k:
        raise RuntimeError("matching is not perfect; widen prune_k")
    return defects[local]


def mwpm_correction(geom: CodeGeometry, s: Syndrome,
                    backend: str | None = None) -> tuple[ErrorConfig, tuple]:
    """Correction realized as canonical paths joining the matched defects."""
    if len(s.defects) % 2 != 0:
        raise ValueError("odd syndrome cardinality: corrupted input")
    pairs = match_defects(geom, np.array(s.defects, dtype=np.int64),
                          backend=backend)
    bits = np.zeros(geom.n, dtype=np.uint8)
    for u, v in pairs:
        bits[canonical_path(geom, int(u), int(v))] ^= 1
    return ErrorConfig(bits), tuple((int(u), int(v)) for u, v in pairs)


def winding_class(geom: CodeGeometry, cycle: ErrorConfig) -> WindingClass:
    """Homology class of a closed edge set, from cut-crossing parities."""
    if len(syndrome_vertices(geom, cycle.bits)) != 0:
        raise ValueError("winding class is only defined for closed cycles")
    h, v = cycle_parity(geom, cycle.bits)
    return WindingClass(int(h), int(v))


def cycle_parity(geom: CodeGeometry, bits: np.ndarray) -> np.ndarray:
    on = np.nonzero(bits)[0]
    return geom.edge_cross[on].sum(axis=0) % 2


def decode(geom: CodeGeometry, e: ErrorConfig,
           backend: str | None = None) -> DecodeOutcome:
    """Full decode: syndrome -> matching -> homology class of C*E."""
    s = extract_syndrome(geom, e)
    correction, pairs = mwpm_correction(geom, s, backend=backend)
    winding = winding_class(geom, correction ^ e)
    return DecodeOutcome(correction=correction, winding=winding,
                         matched_pairs=pairs)


def decode_parity(geom: CodeGeometry, defects: np.ndarray,
                  error_parity: np.ndarray,
                  backend: str | None = None,
                  prune_k: int | None = None) -> tuple[int, int]:
    """Fast failure classification without building correction paths.

    ``error_parity`` is the cut-crossing parity pair of the error bits.  The
    winding class of C*E is that parity XORed with the homotopy parities of
    the matched canonical paths, which are precomputed per vertex pair.
    """
    pairs = match_defects(geom, defects, backend=backend, prune_k=prune_k)
    h, v = int(error_parity[0]), int(error_parity[1])
    for u, v2 in pairs:
        ph, pv = geom.pair_cross[u, v2]
        h ^= int(ph)
        v ^= int(pv)
    return h, v
