"""Set partitions of {0,...,k-1} and falling factorials.

Partitions are enumerated through restricted growth strings: a[0] = 0 and
a[i] <= max(a[0..i-1]) + 1, with a[i] naming the block of element i.  The
enumeration order is the lexicographic order of these strings, and the
total count is the Bell number B(k).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

# Bell(12) = 4 213 597; anything larger is not a desk-scale enumeration.
MAX_PARTITION_SIZE = 12


@dataclass(frozen=True)
class SetPartition:
    """A partition of {0,...,size-1} into disjoint nonempty blocks.

    Canonical form: each block sorted ascending, blocks ordered by least
    element.
    """

    size: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for block in self.blocks:
            if not block:
                raise ValueError("blocks must be nonempty")
            if tuple(sorted(block)) != block:
                raise ValueError(f"block {block} is not sorted")
            if seen & set(block):
                raise ValueError("blocks must be disjoint")
            seen.update(block)
        if seen != set(range(self.size)):
            raise ValueError(f"blocks do not cover 0..{self.size - 1}")
        if list(self.blocks) != sorted(self.blocks, key=lambda b: b[0]):
            raise ValueError("blocks must be ordered by least element")

    @classmethod
    def from_labels(cls, labels: list[int]) -> "SetPartition":
        """Build from an element -> block-label assignment."""
        cells: dict[int, list[int]] = {}
        for i, lab in enumerate(labels):
            cells.setdefault(lab, []).append(i)
        blocks = tuple(
            tuple(v) for v in sorted(cells.values(), key=lambda b: b[0])
        )
        return cls(size=len(labels), blocks=blocks)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def block_of(self, element: int) -> int:
        for b, block in enumerate(self.blocks):
            if element in block:
                return b
        raise ValueError(f"element {element} not in partition of size {self.size}")


def set_partitions(k: int) -> Iterator[SetPartition]:
    """Yield every partition of {0,...,k-1} once, in restricted-growth order."""
    if not 1 <= k <= MAX_PARTITION_SIZE:
        raise ValueError(f"k must be in [1, {MAX_PARTITION_SIZE}], got {k}")
    a = [0] * k
    while True:
        yield SetPartition.from_labels(a)
        # Advance the restricted growth string.
        i = k - 1
        while i > 0:
            if a[i] <= max(a[:i]):
                a[i] += 1
                for j in range(i + 1, k):
                    a[j] = 0
                break
            a[i] = 0
            i -= 1
        else:
            return


def bell_number(k: int) -> int:
    """Number of partitions of a k-element set, by the triangle recurrence."""
    if k == 0:
        return 1
    row = [1]
    for _ in range(k - 1):
        prev = row
        row = [prev[-1]]
        for v in prev:
            row.append(row[-1] + v)
    return row[-1] if k > 1 else 1


def falling_factorial(n: int, q: int) -> int:
    """n (n-1) ... (n-q+1); 1 when q = 0, and 0 when q > n.

    Counts injective assignments of q distinct sample values out of n.
    """
    if q < 0:
        raise ValueError(f"q must be >= 0, got {q}")
    out = 1
    for i in range(q):
        out *= n - i
        if out == 0:
            return 0
    return out
