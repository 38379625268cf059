import itertools
import pathlib

import numpy as np
import pytest

from toriclab.geometry import build_geometry, logical_cycle
from toriclab.matching import (Syndrome, cycle_parity, decode,
                               extract_syndrome, match_defects,
                               mwpm_correction, winding_class, _blossom_mwpm)
from toriclab.noise import ErrorConfig

DATA = pathlib.Path(__file__).parent / "data"


def _min_pairing_weight(geom, defects):
    """Brute-force minimum over all perfect pairings of the defects."""
    defects = list(defects)
    if not defects:
        return 0
    first, rest = defects[0], defects[1:]
    best = None
    for i, partner in enumerate(rest):
        w = geom.dist[first, partner] + _min_pairing_weight(
            geom, rest[:i] + rest[i + 1:])
        if best is None or w < best:
            best = w
    return best


def test_empty_error_empty_syndrome(rotated4):
    assert extract_syndrome(rotated4, ErrorConfig(np.zeros(16))).defects == ()


def test_single_edge_two_endpoints(rotated4):
    for e in range(rotated4.n):
        bits = np.zeros(rotated4.n, dtype=np.uint8)
        bits[e] = 1
        defects = extract_syndrome(rotated4, ErrorConfig(bits)).defects
        assert sorted(defects) == sorted(int(v) for v in rotated4.edges[e])


def test_cycle_has_empty_syndrome():
    for orientation in ("square", "rotated"):
        g = build_geometry(orientation, 6)
        bits = np.zeros(g.n, dtype=np.uint8)
        bits[logical_cycle(g, 0)] ^= 1
        assert extract_syndrome(g, ErrorConfig(bits)).defects == ()


def test_syndrome_linearity(rotated4, rng):
    for _ in range(50):
        a = ErrorConfig(rng.random(16) < 0.3)
        b = ErrorConfig(rng.random(16) < 0.3)
        sa = set(extract_syndrome(rotated4, a).defects)
        sb = set(extract_syndrome(rotated4, b).defects)
        sab = set(extract_syndrome(rotated4, a ^ b).defects)
        assert sab == sa ^ sb


def test_empty_syndrome_empty_correction(rotated4):
    correction, pairs = mwpm_correction(rotated4, Syndrome(()))
    assert correction.weight == 0 and pairs == ()


def test_two_adjacent_defects(rotated4):
    t, h = (int(v) for v in rotated4.edges[5])
    correction, _ = mwpm_correction(rotated4, Syndrome((t, h)))
    assert correction.weight == 1


def test_odd_syndrome_rejected(rotated4):
    with pytest.raises(ValueError):
        mwpm_correction(rotated4, Syndrome((0, 1, 2)))


@pytest.mark.parametrize("backend", ["blossom", "networkx"])
def test_matching_weight_optimal(rotated4, rng, backend):
    for _ in range(60):
        bits = (rng.random(16) < 0.25).astype(np.uint8)
        s = extract_syndrome(rotated4, ErrorConfig(bits))
        correction, pairs = mwpm_correction(rotated4, s, backend=backend)
        weight = sum(rotated4.dist[u, v] for u, v in pairs)
        assert correction.weight == weight
        assert weight == _min_pairing_weight(rotated4, s.defects)


def test_backends_agree_on_weight(rng):
    g = build_geometry("rotated", 6)
    for _ in range(100):
        bits = (rng.random(g.n) < 0.15).astype(np.uint8)
        defects = extract_syndrome(g, ErrorConfig(bits)).defects
        total = {}
        for backend in ("blossom", "networkx"):
            pairs = match_defects(g, np.array(defects, dtype=np.int64),
                                  backend=backend)
            total[backend] = sum(g.dist[u, v] for u, v in pairs)
        assert total["blossom"] == total["networkx"]


def test_blossom_regression_instance():
    # A fuzzed dense instance that broke an earlier third-party matcher;
    # kept to pin the current solver against the networkx optimum.
    edges = np.load(DATA / "bad_edges.npy")
    weights = np.load(DATA / "bad_w.npy")
    k = int(edges.max()) + 1
    flat = _blossom_mwpm(k, edges.astype(np.int32), weights.astype(np.int64))
    pairs = np.asarray(flat, dtype=np.int64).reshape(-1, 2)
    assert len(pairs) * 2 == k
    lookup = {(min(i, j), max(i, j)): w for (i, j), w in zip(edges, weights)}
    ours = sum(lookup[(min(i, j), max(i, j))] for i, j in pairs)

    import networkx as nx
    G = nx.Graph()
    for (i, j), w in zip(edges, weights):
        G.add_edge(int(i), int(j), weight=int(w))
    mate = nx.min_weight_matching(G)
    reference = sum(lookup[(min(a, b), max(a, b))] for a, b in mate)
    assert ours == reference


def test_winding_rejects_open_strings(rotated4):
    bits = np.zeros(16, dtype=np.uint8)
    bits[0] = 1
    with pytest.raises(ValueError):
        winding_class(rotated4, ErrorConfig(bits))


def test_winding_of_generators():
    g = build_geometry("square", 4)
    empty = ErrorConfig(np.zeros(g.n, dtype=np.uint8))
    assert (winding_class(g, empty).h, winding_class(g, empty).v) == (0, 0)
    both = np.zeros(g.n, dtype=np.uint8)
    both[logical_cycle(g, 0)] ^= 1
    first = winding_class(g, ErrorConfig(both.copy()))
    assert first.is_failure
    both[logical_cycle(g, 1)] ^= 1
    combined = winding_class(g, ErrorConfig(both))
    assert combined.h == first.h ^ winding_class(
        g, _cycle_config(g, 1)).h
    assert combined.is_failure


def _cycle_config(geom, axis):
    bits = np.zeros(geom.n, dtype=np.uint8)
    bits[logical_cycle(geom, axis)] ^= 1
    return ErrorConfig(bits)


def test_weight_one_always_succeeds(rotated4):
    for e in range(16):
        bits = np.zeros(16, dtype=np.uint8)
        bits[e] = 1
        assert not decode(rotated4, ErrorConfig(bits)).winding.is_failure


@pytest.mark.parametrize("orientation", ["square", "rotated"])
@pytest.mark.parametrize("d", [4, 6])
def test_below_half_distance_never_fails(orientation, d):
    g = build_geometry(orientation, d)
    w = d // 2 - 1
    for combo in itertools.combinations(range(g.n), w):
        bits = np.zeros(g.n, dtype=np.uint8)
        bits[list(combo)] = 1
        assert not decode(g, ErrorConfig(bits)).winding.is_failure


def test_decode_deterministic(rotated4, rng):
    bits = (rng.random(16) < 0.3).astype(np.uint8)
    a = decode(rotated4, ErrorConfig(bits.copy()))
    b = decode(rotated4, ErrorConfig(bits.copy()))
    assert (a.winding, a.matched_pairs) == (b.winding, b.matched_pairs)
    assert (a.correction.bits == b.correction.bits).all()


def _contractible_four_cycles(geom, limit=4):
    """Brute-force weight-4 edge sets with even degrees and trivial winding."""
    loops = []
    for combo in itertools.combinations(range(geom.n), 4):
        bits = np.zeros(geom.n, dtype=np.uint8)
        bits[list(combo)] = 1
        degrees = np.bincount(geom.edges[bits == 1].ravel(),
                              minlength=geom.n_vertices)
        if (degrees % 2 == 0).all() and tuple(cycle_parity(geom, bits)) == (0, 0):
            loops.append(ErrorConfig(bits))
            if len(loops) == limit:
                break
    return loops


def test_stabilizer_closure(rotated4):
    # Multiplying the error by a contractible closed loop leaves the
    # syndrome, and hence the outcome class, unchanged.
    loops = _contractible_four_cycles(rotated4)
    assert loops
    for s in loops:
        assert not extract_syndrome(rotated4, s).defects
    for combo in itertools.combinations(range(16), 2):
        bits = np.zeros(16, dtype=np.uint8)
        bits[list(combo)] = 1
        e = ErrorConfig(bits)
        out = decode(rotated4, e).winding
        for s in loops:
            assert decode(rotated4, e ^ s).winding == out


def test_syndrome_correction_match(rotated4, rng):
    for _ in range(30):
        e = ErrorConfig((rng.random(16) < 0.4).astype(np.uint8))
        s = extract_syndrome(rotated4, e)
        correction, _ = mwpm_correction(rotated4, s)
        assert extract_syndrome(rotated4, correction).defects == s.defects
