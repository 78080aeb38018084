"""Double-indexed sequences {a_{j,l}} with row j of length K^(j+2)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mnlab.means import lq_norm


@dataclass(frozen=True)
class DoubleIndexSeq:
    """Rows j = first_ring..first_ring+len(rows)-1; row j has K^(j+2) entries."""

    K: int
    rows: tuple
    first_ring: int = 1

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("K must be at least 2")
        rows = tuple(np.asarray(r) for r in self.rows)
        for i, row in enumerate(rows):
            j = self.first_ring + i
            if row.ndim != 1 or row.size != self.K ** (j + 2):
                raise ValueError(f"row {j} must have length K^(j+2) = {self.K ** (j + 2)}")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def zeros(cls, K: int, j_max: int) -> "DoubleIndexSeq":
        return cls(K, tuple(np.zeros(K ** (j + 2)) for j in range(1, j_max + 1)))

    @classmethod
    def from_function(cls, K: int, j_max: int, fn) -> "DoubleIndexSeq":
        """Row j given by fn(j, l) for l an integer array."""
        return cls(K, tuple(np.asarray(fn(j, np.arange(K ** (j + 2))), dtype=float) for j in range(1, j_max + 1)))

    @classmethod
    def random(cls, K: int, j_max: int, seed: int) -> "DoubleIndexSeq":
        """Nonnegative entries, uniform on [0, 1), from numpy's default generator."""
        rng = np.random.default_rng(seed)
        return cls(K, tuple(rng.random(K ** (j + 2)) for j in range(1, j_max + 1)))

    @property
    def j_max(self) -> int:
        return self.first_ring + len(self.rows) - 1

    def ring_indices(self) -> range:
        return range(self.first_ring, self.j_max + 1)

    def row(self, j: int) -> np.ndarray:
        return self.rows[j - self.first_ring]

    def __getitem__(self, idx: tuple[int, int]):
        j, l = idx
        return self.row(j)[l]

    def indices(self) -> set[tuple[int, int]]:
        return {(j, l) for j in self.ring_indices() for l in range(self.row(j).size)}

    def map_rows(self, fn) -> "DoubleIndexSeq":
        """New sequence with row j replaced by fn(j, row)."""
        return DoubleIndexSeq(self.K, tuple(np.asarray(fn(j, self.row(j))) for j in self.ring_indices()), self.first_ring)

    def __mul__(self, other: "DoubleIndexSeq") -> "DoubleIndexSeq":
        if other.K != self.K or other.first_ring != self.first_ring or len(other.rows) != len(self.rows):
            raise ValueError("sequences are not on the same index set")
        return DoubleIndexSeq(self.K, tuple(a * b for a, b in zip(self.rows, other.rows)), self.first_ring)

    def scaled(self, c: complex) -> "DoubleIndexSeq":
        return DoubleIndexSeq(self.K, tuple(c * r for r in self.rows), self.first_ring)

    def row_norms(self, p: float) -> np.ndarray:
        return np.array([lq_norm(r, p) for r in self.rows])


def lpq_norm(a: DoubleIndexSeq, p: float, q: float) -> float:
    """|| { || {a_{j,l}}_l ||_{l^p} }_j ||_{l^q}; max for infinite exponents."""
    if not (p > 0 and q > 0):
        raise ValueError("exponents must be positive")
    if not a.rows:
        return 0.0
    return lq_norm(a.row_norms(p), q)


def conjugate(x: float) -> float:
    """x' = x / (x - 1) for x > 1, infinity for 0 < x <= 1."""
    if not x > 0:
        raise ValueError("conjugate exponent needs x > 0")
    if math.isinf(x):
        return 1.0
    return x / (x - 1) if x > 1 else math.inf
