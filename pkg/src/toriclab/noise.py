"""Sampling and scoring of iid dephasing errors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import CodeGeometry


@dataclass(frozen=True)
class ErrorConfig:
    """Bit vector over the qubits marking the flipped edges."""

    bits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bits", np.asarray(self.bits, dtype=np.uint8))

    @property
    def weight(self) -> int:
        return int(self.bits.sum())

    def __xor__(self, other: "ErrorConfig") -> "ErrorConfig":
        return ErrorConfig(self.bits ^ other.bits)


@dataclass(frozen=True)
class NoiseParams:
    """Physical error rate p < 1/2 and the inverse temperature it induces."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p < 0.5:
            raise ValueError(f"error rate must lie in [0, 1/2), got {self.p}")

    @property
    def beta(self) -> float:
        return math.log((1.0 - self.p) / self.p)


def sample_error(geom: CodeGeometry, params: NoiseParams,
                 rng: np.random.Generator) -> ErrorConfig:
    """One iid sample: each qubit flipped independently with probability p."""
    return ErrorConfig(rng.random(geom.n) < params.p)


def sample_error_batch(geom: CodeGeometry, p: float, rng: np.random.Generator,
                       count: int) -> np.ndarray:
    """(count, n) uint8 matrix of iid error configurations."""
    if not 0.0 <= p < 0.5:
        raise ValueError(f"error rate must lie in [0, 1/2), got {p}")
    return (rng.random((count, geom.n)) < p).astype(np.uint8)


def log_probability(geom: CodeGeometry, e: ErrorConfig,
                    params: NoiseParams) -> float:
    """log pi(E) = (n - wt) log(1-p) + wt log p."""
    wt = e.weight
    if params.p == 0.0:
        return 0.0 if wt == 0 else -math.inf
    return (geom.n - wt) * math.log1p(-params.p) + wt * math.log(params.p)


def log_weight_probability(n: int, weight, p: float):
    """log probability of a specific configuration of the given weight."""
    weight = np.asarray(weight)
    return (n - weight) * math.log1p(-p) + weight * math.log(p)
