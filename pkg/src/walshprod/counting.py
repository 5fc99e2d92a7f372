"""Counting binary d x q matrices under row-parity and column-sum constraints.

Two engines cross-validate each other:

* an exhaustive bitmask scan over all 2^(d*q) matrices (the trusted
  oracle, capped at d*q <= 24 bits), vectorised in chunks;
* a per-row dynamic program -- a generating-function convolution for the
  even-row-sum count, and a column-load DP for prescribed row parities.

Both engines work in exact integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

# Exhaustive scans stop at this many matrix bits.
EXHAUSTIVE_LIMIT_BITS = 24
_CHUNK_BITS = 18
_CACHE_BITS = 20  # full decode tables kept in memory up to 2^20 matrices


@dataclass(frozen=True)
class BinMatrixSpec:
    """Constraints on binary d x q matrices.

    Either `total` (sum of all entries, with every row sum even) or
    `col_caps` plus `row_parity` (column sums bounded, row sums prescribed
    mod 2) is set.
    """

    d: int
    q: int
    total: int | None = None
    col_caps: tuple[int, ...] | None = None
    row_parity: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.d < 1 or self.q < 1:
            raise ValueError("d and q must be >= 1")
        if (self.total is None) == (self.col_caps is None):
            raise ValueError("set exactly one of total / col_caps")
        if self.col_caps is not None:
            if len(self.col_caps) != self.q or any(c < 0 for c in self.col_caps):
                raise ValueError("col_caps must be q nonnegative integers")
            if self.row_parity is None or len(self.row_parity) != self.d:
                raise ValueError("row_parity must list d values in {0,1}")
            if any(v not in (0, 1) for v in self.row_parity):
                raise ValueError("row_parity entries must be 0 or 1")

    def bound(self) -> float:
        """The closed-form cardinality bound for this constraint shape."""
        if self.total is not None:
            return float(self.q * self.q * self.d) ** (self.total / 2)
        s = sum(self.row_parity)
        p1 = sum(self.col_caps)
        return 2.0 ** (self.q * s + 2) * float(self.q * self.q * self.d) ** ((p1 - s) / 2)


def _scan_chunks(d: int, q: int) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Yield (row_parity_code, col_sums, totals) over all 2^(dq) matrices."""
    nbits = d * q
    n = 1 << nbits
    chunk = min(n, 1 << _CHUNK_BITS)
    shifts = np.arange(nbits, dtype=np.uint64)
    pow2d = (1 << np.arange(d, dtype=np.uint64)).astype(np.uint64)
    for start in range(0, n, chunk):
        codes = np.arange(start, min(start + chunk, n), dtype=np.uint64)
        bits = ((codes[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
        bits = bits.reshape(-1, d, q)
        row_sums = bits.sum(axis=2, dtype=np.int64)
        parity_code = ((row_sums & 1).astype(np.uint64) * pow2d[None, :]).sum(axis=1)
        col_sums = bits.sum(axis=1, dtype=np.int64)
        totals = row_sums.sum(axis=1)
        yield parity_code, col_sums, totals


@lru_cache(maxsize=8)
def _full_tables(d: int, q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    parts = list(_scan_chunks(d, q))
    return (
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
        np.concatenate([p[2] for p in parts]),
    )


def _check_exhaustive_range(d: int, q: int) -> None:
    if d * q > EXHAUSTIVE_LIMIT_BITS:
        raise ValueError(
            f"exhaustive scan limited to d*q <= {EXHAUSTIVE_LIMIT_BITS} bits, "
            f"got {d}*{q}={d * q}"
        )


@lru_cache(maxsize=64)
def _even_row_histogram(d: int, q: int) -> tuple[int, ...]:
    """hist[p] = number of matrices with all row sums even and total p."""
    _check_exhaustive_range(d, q)
    hist = np.zeros(d * q + 1, dtype=np.int64)
    for parity_code, _, totals in _scan_chunks(d, q):
        sel = totals[parity_code == 0]
        hist += np.bincount(sel, minlength=d * q + 1)
    return tuple(int(v) for v in hist)


def count_even_rows(d: int, q: int, total: int, mode: str = "auto") -> int:
    """|{A in {0,1}^{d x q} : sum(A) = total, every row sum even}|."""
    if total < 0:
        raise ValueError(f"total must be >= 0, got {total}")
    if d < 1 or q < 1:
        raise ValueError("d and q must be >= 1")
    if mode == "auto":
        mode = "exhaustive" if d * q <= EXHAUSTIVE_LIMIT_BITS else "dp"
    if mode == "exhaustive":
        hist = _even_row_histogram(d, q)
        return hist[total] if total < len(hist) else 0
    if mode == "dp":
        return _count_even_rows_dp(d, q, total)
    raise ValueError(f"unknown mode {mode!r}")


def _count_even_rows_dp(d: int, q: int, total: int) -> int:
    # One row contributes an even number k of ones in C(q, k) ways; the
    # d-row count is the coefficient of z^total in that polynomial^d.
    row = [math.comb(q, k) if k % 2 == 0 else 0 for k in range(min(q, total) + 1)]
    poly = [1]
    for _ in range(d):
        out = [0] * min(len(poly) + len(row) - 1, total + 1)
        for i, a in enumerate(poly):
            if a == 0:
                continue
            for j, b in enumerate(row):
                if b == 0 or i + j > total:
                    continue
                out[i + j] += a * b
        poly = out
    return poly[total] if total < len(poly) else 0


def count_with_row_parity(
    d: int,
    q: int,
    col_caps: Sequence[int],
    row_parity: Sequence[int],
    mode: str = "auto",
) -> int:
    """|{A in {0,1}^{d x q} : row sums = row_parity mod 2, column sums <= col_caps}|."""
    spec = BinMatrixSpec(
        d=d, q=q, col_caps=tuple(col_caps), row_parity=tuple(row_parity)
    )
    if mode == "auto":
        mode = "exhaustive" if d * q <= EXHAUSTIVE_LIMIT_BITS else "dp"
    if mode == "exhaustive":
        return _count_with_row_parity_exhaustive(spec)
    if mode == "dp":
        return _count_with_row_parity_dp(spec)
    raise ValueError(f"unknown mode {mode!r}")


def _count_with_row_parity_exhaustive(spec: BinMatrixSpec) -> int:
    _check_exhaustive_range(spec.d, spec.q)
    v_code = np.uint64(sum(b << i for i, b in enumerate(spec.row_parity)))
    caps = np.asarray(spec.col_caps, dtype=np.int64)
    if spec.d * spec.q <= _CACHE_BITS:
        parity_code, col_sums, _ = _full_tables(spec.d, spec.q)
        sel = (parity_code == v_code) & (col_sums <= caps[None, :]).all(axis=1)
        return int(sel.sum())
    count = 0
    for parity_code, col_sums, _ in _scan_chunks(spec.d, spec.q):
        sel = (parity_code == v_code) & (col_sums <= caps[None, :]).all(axis=1)
        count += int(sel.sum())
    return count


def _count_with_row_parity_dp(spec: BinMatrixSpec) -> int:
    # DP over rows; state = column loads so far, clipped by the caps.
    patterns: dict[int, list[tuple[int, ...]]] = {0: [], 1: []}
    for code in range(1 << spec.q):
        pat = tuple((code >> j) & 1 for j in range(spec.q))
        patterns[sum(pat) & 1].append(pat)
    states: dict[tuple[int, ...], int] = {tuple([0] * spec.q): 1}
    for i in range(spec.d):
        nxt: dict[tuple[int, ...], int] = {}
        for load, cnt in states.items():
            for pat in patterns[spec.row_parity[i]]:
                new = tuple(l + p for l, p in zip(load, pat))
                if any(nl > cap for nl, cap in zip(new, spec.col_caps)):
                    continue
                nxt[new] = nxt.get(new, 0) + cnt
        states = nxt
        if not states:
            return 0
    return sum(states.values())


@dataclass(frozen=True)
class RecursionRow:
    p: int
    count: int
    prev_count: int
    bound: int
    ratio: float
    ok: bool


def recursion_report(d: int, q: int, p_max: int, mode: str = "auto") -> list[RecursionRow]:
    """Check m_p <= d * C(q,2) * m_{p-2} for even p up to p_max, with ratios.

    Vacuously empty for p_max < 2.
    """
    rows: list[RecursionRow] = []
    factor = d * math.comb(q, 2)
    for p in range(2, p_max + 1, 2):
        m_p = count_even_rows(d, q, p, mode=mode)
        m_prev = count_even_rows(d, q, p - 2, mode=mode)
        bound = factor * m_prev
        ratio = m_p / bound if bound else (0.0 if m_p == 0 else math.inf)
        rows.append(
            RecursionRow(
                p=p, count=m_p, prev_count=m_prev, bound=bound, ratio=ratio, ok=m_p <= bound
            )
        )
    return rows
