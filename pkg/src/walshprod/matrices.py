"""Empirical Fourier-Walsh matrices, chain products, and the MC estimator.

The chain product is

    M = A_1^T (A_2 A_2^T) ... (A_m A_m^T) A_{m+1},

where A_i is the n x |S_i| sign matrix of monomial evaluations with its
columns scaled by the weight vector.  Two association orders are exposed:
"paired" multiplies the small cross-Gram factors (A_i^T A_{i+1}) and never
materialises an n x n matrix; "grams" follows the defining left-to-right
order through the n x n factors A_i A_i^T.  Entries are exact signs times
weights, so the only rounding is in accumulation.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError
from .families import EqualityPattern, SetFamily, WeightedFamily, validate_chain
from .hypercube import Dataset, sample_dataset, RNG_ALGORITHM

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Documented per-trial seed derivation, recorded in estimator metadata.
SEED_MIXER = "splitmix64(master + (trial+1)*0x9E3779B97F4A7C15)"

# Kahan-compensated accumulation kicks in above this many accumulated terms.
KAHAN_THRESHOLD = 10**6


def mix_seed(master_seed: int, trial: int) -> int:
    """SplitMix64 finalizer on master_seed advanced by (trial+1) increments."""
    z = (master_seed + (trial + 1) * _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True, eq=False)
class ProductSpec:
    """A chain (n; A_1, ..., A_{m+1}) with its validated equality pattern."""

    n: int
    chain: tuple[WeightedFamily, ...]
    pattern: EqualityPattern = field(init=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if len(self.chain) < 2:
            raise ValueError("a chain needs at least two families (m >= 1)")
        pattern = validate_chain([wf.family for wf in self.chain])
        object.__setattr__(self, "pattern", pattern)

    @property
    def m(self) -> int:
        return len(self.chain) - 1

    @property
    def d(self) -> int:
        return self.chain[0].family.d

    def digest(self) -> str:
        """Stable hash of (n, d, members, weights) for output metadata."""
        h = hashlib.sha256()
        h.update(f"n={self.n};d={self.d};".encode())
        for wf in self.chain:
            h.update(b"F:")
            h.update(",".join(map(str, wf.family.member_bits())).encode())
            h.update(b";W:")
            h.update(np.asarray(wf.weights, dtype="<f8").tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class ExpectationMatrix:
    """E[M] (or one stratum of it), indexed by S_1 x S_{m+1}."""

    values: np.ndarray
    rows: SetFamily
    cols: SetFamily
    meta: dict

    def __post_init__(self) -> None:
        if self.values.shape != (len(self.rows), len(self.cols)):
            raise ValueError(
                f"values shape {self.values.shape} != "
                f"({len(self.rows)}, {len(self.cols)})"
            )
        if not np.isfinite(self.values).all():
            raise ValueError("entries must be finite")


@dataclass(frozen=True, eq=False)
class MCEstimate:
    mean: ExpectationMatrix
    stderr: np.ndarray
    trials: int
    master_seed: int

    def __post_init__(self) -> None:
        if self.trials < 2:
            raise ValueError("stderr needs at least 2 trials")
        if (self.stderr < 0).any():
            raise ValueError("stderr must be nonnegative")


def walsh_matrix(family: SetFamily, data: Dataset) -> np.ndarray:
    """n x |family| matrix with entry (i, S) = x^S evaluated at sample i."""
    if family.d != data.d:
        raise DimensionMismatchError(
            f"family dimension {family.d} != data dimension {data.d}"
        )
    out = np.ones((data.n, len(family)), dtype=np.float64)
    for j, s in enumerate(family.members):
        coords = s.coords()
        if coords:
            out[:, j] = data.rows[:, coords].prod(axis=1)
    return out


def weighted_walsh_matrix(wf: WeightedFamily, data: Dataset) -> np.ndarray:
    """walsh_matrix with column S scaled by the weight of S."""
    return walsh_matrix(wf.family, data) * wf.weights[None, :]


def _cost_paired(n: int, sizes: list[int]) -> int:
    cost = sum(n * sizes[j] * sizes[j + 1] for j in range(len(sizes) - 1))
    acc = sizes[0]
    for j in range(1, len(sizes) - 1):
        cost += acc * sizes[j] * sizes[j + 1]
    return cost


def _cost_grams(n: int, sizes: list[int]) -> int:
    cost = sum(n * n * s for s in sizes[1:-1])  # forming each A_j A_j^T
    cost += sum(sizes[0] * n * n for _ in sizes[1:-1])
    cost += sizes[0] * n * sizes[-1]
    return cost


def chain_product(spec: ProductSpec, data: Dataset, order: str = "auto") -> np.ndarray:
    """One realisation of M = A_1^T (A_2 A_2^T) ... (A_m A_m^T) A_{m+1}."""
    if data.n != spec.n:
        raise DimensionMismatchError(f"dataset has n={data.n}, spec expects {spec.n}")
    if data.d != spec.d:
        raise DimensionMismatchError(f"dataset has d={data.d}, spec expects {spec.d}")
    mats = [weighted_walsh_matrix(wf, data) for wf in spec.chain]
    sizes = [len(wf) for wf in spec.chain]
    if order == "auto":
        order = "paired" if _cost_paired(spec.n, sizes) <= _cost_grams(spec.n, sizes) else "grams"
    if order == "paired":
        out = mats[0].T @ mats[1]
        for j in range(1, len(mats) - 1):
            out = out @ (mats[j].T @ mats[j + 1])
        return out
    if order == "grams":
        out = mats[0].T
        for j in range(1, len(mats) - 1):
            out = (out @ mats[j]) @ mats[j].T
        return out @ mats[-1]
    raise ValueError(f"unknown association order {order!r}")


class _KahanSum:
    """Compensated elementwise accumulation of equally shaped arrays."""

    def __init__(self, shape: tuple[int, ...]) -> None:
        self.total = np.zeros(shape)
        self._comp = np.zeros(shape)

    def add(self, x: np.ndarray) -> None:
        y = x - self._comp
        t = self.total + y
        self._comp = (t - self.total) - y
        self.total = t


class _PlainSum:
    def __init__(self, shape: tuple[int, ...]) -> None:
        self.total = np.zeros(shape)

    def add(self, x: np.ndarray) -> None:
        self.total += x


def mc_expected_product(
    spec: ProductSpec, trials: int, master_seed: int, threads: int = 1
) -> MCEstimate:
    """Monte Carlo estimate of E[M] over independent datasets.

    Per-trial seeds come from `mix_seed(master_seed, t)`; the reduction runs
    in trial order regardless of thread count, so results are identical to
    sequential execution.
    """
    if trials < 2:
        raise ValueError(f"trials must be >= 2, got {trials}")
    shape = (len(spec.chain[0]), len(spec.chain[-1]))
    accum_cls = _KahanSum if spec.n * trials > KAHAN_THRESHOLD else _PlainSum
    total = accum_cls(shape)
    total_sq = accum_cls(shape)

    def one(t: int) -> np.ndarray:
        return chain_product(spec, sample_dataset(spec.n, spec.d, mix_seed(master_seed, t)))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for mat in pool.map(one, range(trials)):
                total.add(mat)
                total_sq.add(mat * mat)
    else:
        for t in range(trials):
            mat = one(t)
            total.add(mat)
            total_sq.add(mat * mat)

    mean = total.total / trials
    var = np.maximum(total_sq.total - trials * mean * mean, 0.0) / (trials - 1)
    stderr = np.sqrt(var / trials)
    meta = {
        "method": "mc",
        "trials": trials,
        "master_seed": master_seed,
        "rng": RNG_ALGORITHM,
        "seed_mixer": SEED_MIXER,
        "spec": spec.digest(),
    }
    mat = ExpectationMatrix(
        values=mean, rows=spec.chain[0].family, cols=spec.chain[-1].family, meta=meta
    )
    return MCEstimate(mean=mat, stderr=stderr, trials=trials, master_seed=master_seed)
