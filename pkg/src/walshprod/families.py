"""Set families, weight vectors, blocked constructions, and chain validation.

A chain of families is admissible when any two of its families are either
identical (as ordered member lists, so they share column indexing) or
completely disjoint.  `validate_chain` computes the resulting equality
pattern and rejects partial overlaps.
"""

from __future__ import annotations

import functools
import itertools
import operator
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, TrivialIntersectionViolation
from .hypercube import SubsetMask


@dataclass(frozen=True)
class SetFamily:
    """An ordered list of distinct coordinate subsets of common dimension.

    `degree_bound` is the maximum member degree.  `effective_degree` is
    set by the blocked construction (sum of block exponent times block
    degree); for plain families it equals the degree bound.
    """

    d: int
    members: tuple[SubsetMask, ...]
    degree_bound: int = field(init=False)
    effective_degree: float | None = None

    def __post_init__(self) -> None:
        seen = set()
        for s in self.members:
            if s.d != self.d:
                raise DimensionMismatchError(
                    f"member {s} has dimension {s.d}, family has {self.d}"
                )
            if s.bits in seen:
                raise ValueError(f"duplicate member {s}")
            seen.add(s.bits)
        bound = max((s.degree for s in self.members), default=0)
        object.__setattr__(self, "degree_bound", bound)
        if self.effective_degree is None:
            object.__setattr__(self, "effective_degree", float(bound))

    def __len__(self) -> int:
        return len(self.members)

    def index_of(self, s: SubsetMask) -> int | None:
        for i, m in enumerate(self.members):
            if m.bits == s.bits:
                return i
        return None

    def member_bits(self) -> tuple[int, ...]:
        return tuple(s.bits for s in self.members)


@dataclass(frozen=True, eq=False)
class WeightedFamily:
    """A set family with one nonnegative weight per member."""

    family: SetFamily
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (len(self.family),):
            raise ValueError(
                f"weights shape {w.shape} != family size {len(self.family)}"
            )
        if not np.isfinite(w).all() or (w < 0).any():
            raise ValueError("weights must be finite and nonnegative")
        object.__setattr__(self, "weights", w)
        w.setflags(write=False)

    def __len__(self) -> int:
        return len(self.family)


def all_subsets_of_size(
    d: int, sizes: Iterable[int], coords: Sequence[int] | None = None
) -> SetFamily:
    """Every subset of the given sizes, drawn from `coords` (default all of [d]).

    Members are ordered by size, lexicographically within each size, so the
    column indexing of equal constructions always agrees.
    """
    pool = tuple(range(d)) if coords is None else tuple(coords)
    for c in pool:
        if not 0 <= c < d:
            raise ValueError(f"coordinate {c} out of range for d={d}")
    if len(set(pool)) != len(pool):
        raise ValueError("coords must be distinct")
    members: list[SubsetMask] = []
    for size in sorted(set(sizes)):
        if size > len(pool):
            raise ValueError(f"size {size} exceeds the {len(pool)} available coordinates")
        if size < 0:
            raise ValueError(f"size must be >= 0, got {size}")
        for combo in itertools.combinations(pool, size):
            members.append(SubsetMask.from_coords(d, combo))
    return SetFamily(d=d, members=tuple(members))


@dataclass(frozen=True)
class BlockStructure:
    """Disjoint coordinate blocks with size exponents and per-block degree caps."""

    d: int
    blocks: tuple[SubsetMask, ...]
    exponents: tuple[float, ...]
    degree_caps: tuple[int, ...]

    def __post_init__(self) -> None:
        if not (len(self.blocks) == len(self.exponents) == len(self.degree_caps)):
            raise ValueError("blocks, exponents, degree_caps must have equal length")
        acc = 0
        for b in self.blocks:
            if b.d != self.d:
                raise DimensionMismatchError("block dimension mismatch")
            if acc & b.bits:
                raise ValueError("blocks must be pairwise disjoint")
            acc |= b.bits
        for s in self.exponents:
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"exponent {s} outside [0, 1]")

    @property
    def effective_degree(self) -> float:
        return float(sum(s * p for s, p in zip(self.exponents, self.degree_caps)))


def build_block_structure(
    d: int, exponents: Sequence[float], degree_caps: Sequence[int]
) -> BlockStructure:
    """Allocate disjoint blocks with |T_k| = round(d^{s_k}) clipped to what remains.

    Coordinates are handed out in order of increasing exponent so that
    sublinear blocks get their full target size before the near-linear
    blocks absorb the rest; block k then occupies a contiguous coordinate
    range, in block order.
    """
    ell = len(exponents)
    if ell == 0:
        raise ValueError("need at least one block")
    if ell > d:
        raise ValueError(f"cannot fit {ell} nonempty blocks in dimension {d}")
    sizes = [0] * ell
    remaining = d
    order = sorted(range(ell), key=lambda k: (exponents[k], k))
    for rank, k in enumerate(order):
        # Blocks still waiting each need at least one coordinate.
        reserve = ell - 1 - rank
        target = max(1, round(d ** exponents[k]))
        sizes[k] = max(1, min(target, remaining - reserve))
        remaining -= sizes[k]
    blocks = []
    start = 0
    for k in range(ell):
        blocks.append(SubsetMask.from_coords(d, range(start, start + sizes[k])))
        start += sizes[k]
    return BlockStructure(
        d=d,
        blocks=tuple(blocks),
        exponents=tuple(float(s) for s in exponents),
        degree_caps=tuple(int(p) for p in degree_caps),
    )


def blocked_family(structure: BlockStructure, per_block_sizes: Sequence[int]) -> SetFamily:
    """All unions of one size-k_j subset per block; records the effective degree.

    Member count is the product over blocks of C(|T_k|, size_k).
    """
    if len(per_block_sizes) != len(structure.blocks):
        raise ValueError("per_block_sizes must name one size per block")
    choices: list[list[int]] = []
    for block, size, cap in zip(structure.blocks, per_block_sizes, structure.degree_caps):
        if size > block.degree:
            raise ValueError(
                f"per-block size {size} exceeds block cardinality {block.degree}"
            )
        if size > cap:
            raise ValueError(f"per-block size {size} exceeds declared degree cap {cap}")
        coords = block.coords()
        choices.append(
            [sum(1 << c for c in combo) for combo in itertools.combinations(coords, size)]
        )
    members = tuple(
        SubsetMask(structure.d, functools.reduce(operator.or_, pick, 0))
        for pick in itertools.product(*choices)
    )
    return SetFamily(
        d=structure.d, members=members, effective_degree=structure.effective_degree
    )


@dataclass(frozen=True)
class EqualityPattern:
    """groups[i] = smallest chain position holding a family equal to position i."""

    groups: tuple[int, ...]

    def same(self, i: int, j: int) -> bool:
        return self.groups[i] == self.groups[j]

    def __repr__(self) -> str:
        cells: dict[int, list[int]] = {}
        for i, g in enumerate(self.groups):
            cells.setdefault(g, []).append(i + 1)
        body = ", ".join("=".join(map(str, v)) for v in cells.values() if len(v) > 1)
        return f"EqualityPattern({body or 'all distinct'})"


def validate_chain(families: Sequence[SetFamily]) -> EqualityPattern:
    """Accept a chain where any two families are identical or disjoint.

    Equality is equality of *ordered* member lists, so equal families share
    column indexing.  A partial overlap raises TrivialIntersectionViolation
    naming the offending pair and one shared member.
    """
    if not families:
        raise ValueError("empty chain")
    d = families[0].d
    for f in families:
        if f.d != d:
            raise DimensionMismatchError("chain families must share one dimension")
    groups = list(range(len(families)))
    member_sets = [set(f.member_bits()) for f in families]
    for i, j in itertools.combinations(range(len(families)), 2):
        if families[i].member_bits() == families[j].member_bits():
            groups[j] = min(groups[j], groups[i])
        else:
            shared = member_sets[i] & member_sets[j]
            if shared:
                bits = min(shared)
                raise TrivialIntersectionViolation(i, j, SubsetMask(d, bits))
    return EqualityPattern(groups=tuple(groups))
