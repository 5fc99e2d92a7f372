"""Coordinate subsets, Fourier-Walsh monomials, and the parity rule.

Points of the hypercube {-1,+1}^d are plain numpy vectors of signs.  A
monomial x^S is the product of the coordinates indexed by a subset S of
{0,...,d-1}; under the uniform measure these monomials are orthonormal,
and the expectation of a product of monomials is 1 exactly when the
symmetric difference (XOR) of the index sets is empty, 0 otherwise.
Subsets are stored as integer bitmasks, so the XOR fold costs O(d/64).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError

# Masks are fixed-width parity words; desk-scale experiments stay far below this.
MAX_DIMENSION = 1024

# Identifier of the dataset sampler, recorded in output metadata.  Entries are
# 2*u - 1 with u drawn row-major from Philox4x64-10 via Generator.integers.
RNG_ALGORITHM = "numpy-philox4x64-10/signs-v1"


@dataclass(frozen=True, order=True)
class SubsetMask:
    """A subset of {0,...,d-1} as a parity word.

    Coordinates are 0-indexed.  `bits` has bit i set exactly when
    coordinate i belongs to the subset.
    """

    d: int
    bits: int

    def __post_init__(self) -> None:
        if not 1 <= self.d <= MAX_DIMENSION:
            raise ValueError(f"dimension must be in [1, {MAX_DIMENSION}], got {self.d}")
        if self.bits < 0 or self.bits >> self.d:
            raise ValueError(f"bits {self.bits:#x} has coordinates >= d={self.d}")

    @classmethod
    def from_coords(cls, d: int, coords: Iterable[int] = ()) -> "SubsetMask":
        bits = 0
        for c in coords:
            if not 0 <= c < d:
                raise ValueError(f"coordinate {c} out of range for d={d}")
            bits |= 1 << c
        return cls(d, bits)

    @classmethod
    def empty(cls, d: int) -> "SubsetMask":
        return cls(d, 0)

    @property
    def degree(self) -> int:
        """|S|, the degree of the monomial x^S."""
        return self.bits.bit_count()

    def coords(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.d) if self.bits >> i & 1)

    def __xor__(self, other: "SubsetMask") -> "SubsetMask":
        if self.d != other.d:
            raise DimensionMismatchError(f"dimensions differ: {self.d} vs {other.d}")
        return SubsetMask(self.d, self.bits ^ other.bits)

    def __contains__(self, coord: int) -> bool:
        return 0 <= coord < self.d and bool(self.bits >> coord & 1)

    def __repr__(self) -> str:
        return f"SubsetMask(d={self.d}, {{{', '.join(map(str, self.coords()))}}})"


def xor(a: SubsetMask, b: SubsetMask) -> SubsetMask:
    """Symmetric difference of two coordinate subsets."""
    return a ^ b


def as_sign_vector(values: Sequence[int] | np.ndarray) -> np.ndarray:
    """Validate and return a point of {-1,+1}^d as an int8 vector."""
    x = np.asarray(values, dtype=np.int8)
    if x.ndim != 1:
        raise ValueError(f"sign vector must be 1-d, got shape {x.shape}")
    if not np.isin(x, (-1, 1)).all():
        raise ValueError("sign vector entries must be -1 or +1")
    return x


@dataclass(frozen=True, eq=False)
class Dataset:
    """n sample points of the hypercube {-1,+1}^d.

    `seed` records the sampler seed when the rows came from
    `sample_dataset`; explicitly constructed datasets carry seed None.
    Regeneration from (n, d, seed) is bit-identical for the recorded
    `rng` algorithm.
    """

    n: int
    d: int
    rows: np.ndarray
    seed: int | None = None
    rng: str | None = None

    def __post_init__(self) -> None:
        if self.rows.shape != (self.n, self.d):
            raise ValueError(f"rows shape {self.rows.shape} != ({self.n}, {self.d})")
        if not np.isin(self.rows, (-1, 1)).all():
            raise ValueError("dataset entries must be -1 or +1")
        self.rows.setflags(write=False)


def dataset_from_rows(rows: np.ndarray | Sequence[Sequence[int]]) -> Dataset:
    """Wrap explicit sign rows (shape n x d) as a Dataset."""
    arr = np.asarray(rows, dtype=np.int8)
    if arr.ndim != 2:
        raise ValueError(f"rows must be 2-d, got shape {arr.shape}")
    return Dataset(n=arr.shape[0], d=arr.shape[1], rows=arr)


def sample_dataset(n: int, d: int, seed: int) -> Dataset:
    """Draw n points uniformly from {-1,+1}^d, deterministically in (n, d, seed)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 1 <= d <= MAX_DIMENSION:
        raise ValueError(f"d must be in [1, {MAX_DIMENSION}], got {d}")
    gen = np.random.Generator(np.random.Philox(key=seed))
    rows = gen.integers(0, 2, size=(n, d), dtype=np.int8) * 2 - 1
    return Dataset(n=n, d=d, rows=rows, seed=seed, rng=RNG_ALGORITHM)


def enumerate_cube(d: int) -> np.ndarray:
    """All 2^d sign vectors, row i having coordinate j = 1 - 2*((i >> j) & 1)."""
    if not 1 <= d <= 24:
        raise ValueError(f"exhaustive cube enumeration supports 1 <= d <= 24, got {d}")
    codes = np.arange(1 << d, dtype=np.uint32)
    bits = (codes[:, None] >> np.arange(d, dtype=np.uint32)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def full_cube_dataset(d: int) -> Dataset:
    """The dataset whose n = 2^d rows enumerate the cube exactly once."""
    return dataset_from_rows(enumerate_cube(d))


def monomial_eval(s: SubsetMask, x: np.ndarray) -> int:
    """Evaluate x^S = prod_{i in S} x_i at a sign vector; +1 for the empty set."""
    if s.d != len(x):
        raise DimensionMismatchError(f"subset dimension {s.d} != point dimension {len(x)}")
    if s.bits == 0:
        return 1
    idx = list(s.coords())
    negatives = int(np.count_nonzero(x[idx] == -1))
    return -1 if negatives & 1 else 1


def expectation_of_product(sets: Sequence[SubsetMask]) -> int:
    """E[x^{S_1} ... x^{S_q}] under the uniform measure: 1 iff the XOR fold is empty.

    The empty product has expectation 1.
    """
    if not sets:
        return 1
    d = sets[0].d
    acc = 0
    for s in sets:
        if s.d != d:
            raise DimensionMismatchError(f"mixed dimensions: {d} vs {s.d}")
        acc ^= s.bits
    return 1 if acc == 0 else 0
