"""Torus lattice geometry for the two surface-code orientations.

Both orientations are represented by their defect graph: a square-lattice
torus whose vertices carry the parity checks and whose edges carry the
qubits.  The square code uses periodicity vectors (d, 0), (0, d); the
rotated code lives in rotated coordinates with periodicity
(d/2, d/2), (d/2, -d/2), which halves the vertex count and makes the
minimal horizontal logical a monotone staircase of d steps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Winding shift candidates used when minimizing over torus representatives.
_SHIFT_RANGE = range(-2, 3)


class Orientation(str, Enum):
    SQUARE = "square"
    ROTATED = "rotated"


@dataclass(frozen=True)
class CodeGeometry:
    """Immutable torus lattice; safely shared read-only across workers."""

    orientation: Orientation
    d: int
    n: int                       # qubit (edge) count
    n_vertices: int
    periods: tuple[tuple[int, int], tuple[int, int]]
    vertex_coords: np.ndarray    # (V, 2) canonical integer coords
    edges: np.ndarray            # (n, 2) vertex indices (tail, head)
    edge_dirs: np.ndarray        # (n,) 0 = +x step, 1 = +y step
    edge_cross: np.ndarray       # (n, 2) winding-cut crossing parities
    dist: np.ndarray             # (V, V) torus graph distance
    pair_cross: np.ndarray       # (V, V, 2) crossing parities of canonical paths
    _vertex_index: dict = field(repr=False)
    _edge_index: dict = field(repr=False)

    @property
    def cuts(self) -> tuple[np.ndarray, np.ndarray]:
        """The two winding-detection cuts, as boolean edge masks."""
        return self.edge_cross[:, 0] == 1, self.edge_cross[:, 1] == 1

    def vertex_id(self, coord) -> int:
        return self._vertex_index[tuple(coord)]

    def edge_id(self, tail_vertex: int, direction: int) -> int:
        return self._edge_index[(tail_vertex, direction)]

    def summary(self) -> str:
        info = {
            "orientation": self.orientation.value,
            "d": self.d,
            "n": self.n,
            "vertices": self.n_vertices,
            "periods": self.periods,
        }
        return json.dumps(info)


def _canonicalize(orientation: Orientation, d: int, x, y):
    """Map integer coords to the fundamental domain.

    Returns (cx, cy, a, b) with (x, y) = (cx, cy) + a*v1 + b*v2 where
    v1, v2 are the periodicity vectors.  Works elementwise on arrays.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if orientation is Orientation.SQUARE:
        a, cx = np.divmod(x, d)
        b, cy = np.divmod(y, d)
        return cx, cy, a, b
    h = d // 2
    qa, cx = np.divmod(x, d)      # (d, 0) = v1 + v2
    qb, cy = np.divmod(y, d)      # (0, d) = v1 - v2
    a = qa + qb
    b = qa - qb
    hi = cx >= h                  # reduce by v1 = (h, h)
    cx = np.where(hi, cx - h, cx)
    cy = np.where(hi, cy - h, cy)
    a = a + hi.astype(a.dtype)
    neg = cy < 0                  # wrap back with (0, d) = v1 - v2
    cy = np.where(neg, cy + d, cy)
    a = a - neg.astype(a.dtype)
    b = b + neg.astype(b.dtype)
    return cx, cy, a, b


def _period_vectors(orientation: Orientation, d: int):
    if orientation is Orientation.SQUARE:
        return (d, 0), (0, d)
    return (d // 2, d // 2), (d // 2, -d // 2)


def build_geometry(orientation: Orientation | str, d: int) -> CodeGeometry:
    """Construct the defect-graph torus for one orientation and distance."""
    orientation = Orientation(orientation)
    if d < 2 or d % 2 != 0:
        raise ValueError(f"code distance must be a positive even integer, got {d}")
    v1, v2 = _period_vectors(orientation, d)
    if orientation is Orientation.SQUARE:
        width, height = d, d
    else:
        width, height = d // 2, d

    coords = np.array([(x, y) for x in range(width) for y in range(height)],
                      dtype=np.int64)
    vertex_index = {(int(x), int(y)): i for i, (x, y) in enumerate(coords)}
    n_vertices = len(coords)

    steps = ((1, 0), (0, 1))
    tails, heads, dirs, cross = [], [], [], []
    edge_index = {}
    for vi, (x, y) in enumerate(coords):
        for direction, (sx, sy) in enumerate(steps):
            cx, cy, a, b = _canonicalize(orientation, d, x + sx, y + sy)
            edge_index[(vi, direction)] = len(tails)
            tails.append(vi)
            heads.append(vertex_index[(int(cx), int(cy))])
            dirs.append(direction)
            cross.append((int(a) % 2, int(b) % 2))
    edges = np.column_stack([tails, heads]).astype(np.int32)
    edge_dirs = np.array(dirs, dtype=np.int8)
    edge_cross = np.array(cross, dtype=np.uint8)
    n = len(edges)

    dist, pair_cross = _pair_tables(coords, v1, v2)

    return CodeGeometry(
        orientation=orientation,
        d=d,
        n=n,
        n_vertices=n_vertices,
        periods=(v1, v2),
        vertex_coords=coords,
        edges=edges,
        edge_dirs=edge_dirs,
        edge_cross=edge_cross,
        dist=dist,
        pair_cross=pair_cross,
        _vertex_index=vertex_index,
        _edge_index=edge_index,
    )


def _shift_list():
    return [(a, b) for a in _SHIFT_RANGE for b in _SHIFT_RANGE]


def _pair_tables(coords, v1, v2):
    """All-pairs torus distances and canonical-path crossing parities.

    The minimal winding representative of the displacement between two
    vertices is chosen by scanning shifts in a fixed order and keeping the
    first minimum; its shift coefficients (mod 2) are the crossing parities
    of any shortest path realizing that representative.
    """
    dx = coords[None, :, 0] - coords[:, None, 0]
    dy = coords[None, :, 1] - coords[:, None, 1]
    shifts = _shift_list()
    norms = np.empty((len(shifts),) + dx.shape, dtype=np.int64)
    for k, (a, b) in enumerate(shifts):
        sx = a * v1[0] + b * v2[0]
        sy = a * v1[1] + b * v2[1]
        norms[k] = np.abs(dx - sx) + np.abs(dy - sy)
    best = norms.argmin(axis=0)      # first minimum in fixed shift order
    dist = np.take_along_axis(norms, best[None], axis=0)[0]
    parities = np.array([(a % 2, b % 2) for a, b in shifts], dtype=np.uint8)
    pair_cross = parities[best]
    return dist.astype(np.int32), pair_cross


def minimal_displacement(geom: CodeGeometry, u: int, v: int) -> tuple[int, int]:
    """The canonical minimal winding representative of coord[v] - coord[u]."""
    (v1, v2) = geom.periods
    dx = int(geom.vertex_coords[v, 0] - geom.vertex_coords[u, 0])
    dy = int(geom.vertex_coords[v, 1] - geom.vertex_coords[u, 1])
    best = None
    for a, b in _shift_list():
        cand = (dx - a * v1[0] - b * v2[0], dy - a * v1[1] - b * v2[1])
        norm = abs(cand[0]) + abs(cand[1])
        if best is None or norm < best[0]:
            best = (norm, cand)
    return best[1]


def logical_cycle(geom: CodeGeometry, axis: int = 0) -> np.ndarray:
    """A minimal non-contractible cycle winding once around one period.

    Walks the periodicity vector v1 (axis 0) or v2 (axis 1) from the origin,
    x-moves first, and returns the d edge ids of the resulting closed path.
    """
    vec = geom.periods[axis]
    edge_ids = []
    x, y = 0, 0
    for ax, delta in ((0, vec[0]), (1, vec[1])):
        step = 1 if delta >= 0 else -1
        for _ in range(abs(delta)):
            if ax == 0:
                tail = (x, y) if step > 0 else (x - 1, y)
                x += step
            else:
                tail = (x, y) if step > 0 else (x, y - 1)
                y += step
            cx, cy, _, _ = _canonicalize(geom.orientation, geom.d, *tail)
            edge_ids.append(geom.edge_id(geom.vertex_id((int(cx), int(cy))), ax))
    return np.array(edge_ids, dtype=np.int64)


def defect_distance(geom: CodeGeometry, u: int, v: int) -> int:
    """Graph distance on the defect torus (Manhattan over winding reps)."""
    return int(geom.dist[u, v])


def canonical_path(geom: CodeGeometry, u: int, v: int) -> np.ndarray:
    """One deterministic shortest path from u to v, as an edge-id array.

    All x-moves precede all y-moves in the frame of the minimal winding
    representative, so the path contains no right turns.
    """
    dx, dy = minimal_displacement(geom, u, v)
    edge_ids = []
    x, y = (int(c) for c in geom.vertex_coords[u])
    for axis, delta in ((0, dx), (1, dy)):
        step = 1 if delta >= 0 else -1
        for _ in range(abs(delta)):
            if axis == 0:
                tail = (x, y) if step > 0 else (x - 1, y)
                x += step
            else:
                tail = (x, y) if step > 0 else (x, y - 1)
                y += step
            cx, cy, _, _ = _canonicalize(geom.orientation, geom.d, *tail)
            edge_ids.append(geom.edge_id(geom.vertex_id((int(cx), int(cy))), axis))
    path = np.array(edge_ids, dtype=np.int64)
    if len(set(path.tolist())) != len(path):
        raise AssertionError("canonical path repeated an edge")
    return path
