"""Exact expectation of the chain product by set-partition expansion.

Expanding M entrywise over sample indices (i_1, ..., i_m) and feature
indices (k_1, ..., k_{m+1}) gives, for the (k_1, k_{m+1}) entry,

    w^(1)_{k_1} w^(m+1)_{k_{m+1}} * sum over middle features of
        prod_j (w^(j)_{k_j})^2 *
        sum over partitions pi of the m sample slots of
            ff(n, |pi|) * prod over blocks T of
                E[ x^{XOR_{j in T} (S_{k_j} XOR S_{k_{j+1}})} ],

where ff is the falling factorial counting injective block assignments and
each block expectation is 0/1 by the parity rule.  Partition weights and
parity indicators are exact integers; floats enter only through weights.

Strata: fixing the partition of sample slots and the equality pattern of
the feature tuple picks out one additive contribution; the contributions
over all valid pairs of partitions sum to the full expectation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import BudgetExceededError, DimensionMismatchError
from .families import SetFamily
from .hypercube import SubsetMask
from .matrices import ExpectationMatrix, ProductSpec
from .partitions import SetPartition, falling_factorial, set_partitions

# Elementary parity evaluations allowed per call unless overridden.
DEFAULT_BUDGET = 10**8


def _check_budget(required: int, budget: int | None, what: str) -> None:
    cap = DEFAULT_BUDGET if budget is None else budget
    if required > cap:
        raise BudgetExceededError(required, cap, what)


@dataclass(frozen=True)
class StratumKey:
    """A partition of the m sample slots and one of the m+1 feature slots.

    The feature partition may only merge slots whose families are equal
    under the chain's equality pattern.
    """

    pi1: SetPartition
    pi2: SetPartition

    def validate(self, spec: ProductSpec) -> None:
        if self.pi1.size != spec.m:
            raise ValueError(f"pi1 must partition {spec.m} sample slots")
        if self.pi2.size != spec.m + 1:
            raise ValueError(f"pi2 must partition {spec.m + 1} feature slots")
        for block in self.pi2.blocks:
            for r in block[1:]:
                if not spec.pattern.same(block[0], r):
                    raise ValueError(
                        f"feature slots {block[0]} and {r} hold distinct families "
                        "and cannot share a block"
                    )


def compatible_feature_partitions(spec: ProductSpec) -> Iterator[SetPartition]:
    """Partitions of the feature slots whose blocks respect family equality."""
    for pi in set_partitions(spec.m + 1):
        if all(
            spec.pattern.same(block[0], r) for block in pi.blocks for r in block[1:]
        ):
            yield pi


def valid_stratum_keys(spec: ProductSpec) -> Iterator[StratumKey]:
    for pi2 in compatible_feature_partitions(spec):
        for pi1 in set_partitions(spec.m):
            yield StratumKey(pi1=pi1, pi2=pi2)


def _partition_data(n: int, m: int) -> list[tuple[int, tuple[tuple[int, ...], ...]]]:
    """(falling factorial, blocks) for each partition of the m sample slots."""
    return [
        (falling_factorial(n, pi.num_blocks), pi.blocks) for pi in set_partitions(m)
    ]


def exact_expected_product(spec: ProductSpec, budget: int | None = None) -> ExpectationMatrix:
    """E[M], exactly, as a |S_1| x |S_{m+1}| matrix."""
    m = spec.m
    first, last = spec.chain[0], spec.chain[-1]
    mids = spec.chain[1:-1]
    nrow, ncol = len(first), len(last)
    parts = _partition_data(spec.n, m)
    mid_card = math.prod(len(wf) for wf in mids)
    _check_budget(
        mid_card * len(parts) * nrow * ncol,
        budget,
        f"|S_1| x |S_m+1| x middle tuples x partitions = "
        f"{nrow} x {ncol} x {mid_card} x {len(parts)}",
    )

    bits = [wf.family.member_bits() for wf in spec.chain]
    out = np.zeros((nrow, ncol))
    w_sq = [np.asarray(wf.weights) ** 2 for wf in mids]

    for mid in itertools.product(*(range(len(wf)) for wf in mids)):
        w_mid = 1.0
        for arr, k in zip(w_sq, mid):
            w_mid *= float(arr[k])
        # Middle differences D_j = S_{k_j} xor S_{k_{j+1}} for slots not
        # touching either end (slots are 0-based: D_0 uses k_1, D_{m-1} uses
        # k_{m+1}).
        mid_d = {
            j: bits[j][mid[j - 1]] ^ bits[j + 1][mid[j]] for j in range(1, m - 1)
        }
        # Pre-screen each sample partition: blocks made only of middle slots
        # have a fixed parity verdict.
        live: list[tuple[int, list[tuple[int, ...]]]] = []
        for ff, blocks in parts:
            if ff == 0:
                continue
            var_blocks = []
            ok = True
            for block in blocks:
                if 0 in block or (m - 1) in block:
                    var_blocks.append(block)
                    continue
                acc = 0
                for j in block:
                    acc ^= mid_d[j]
                if acc:
                    ok = False
                    break
            if ok:
                live.append((ff, var_blocks))
        if not live:
            continue
        for k1 in range(nrow):
            b1 = bits[0][k1]
            for kl in range(ncol):
                # Every block parity must vanish, and the block XORs fold to
                # S_{k_1} xor S_{k_{m+1}}; unequal end sets contribute nothing.
                if b1 != bits[m][kl]:
                    continue
                count = 0
                for ff, var_blocks in live:
                    ok = True
                    for block in var_blocks:
                        acc = 0
                        for j in block:
                            if j == 0:
                                acc ^= b1 ^ (bits[1][mid[0]] if m > 1 else bits[1][kl])
                            elif j == m - 1:
                                acc ^= bits[m - 1][mid[-1]] ^ bits[m][kl]
                            else:
                                acc ^= mid_d[j]
                        if acc:
                            ok = False
                            break
                    if ok:
                        count += ff
                if count:
                    out[k1, kl] += w_mid * count
    out *= np.asarray(first.weights)[:, None] * np.asarray(last.weights)[None, :]
    meta = {
        "method": "exact",
        "partitions": len(parts),
        "spec": spec.digest(),
    }
    return ExpectationMatrix(values=out, rows=first.family, cols=last.family, meta=meta)


def stratum_contribution(
    spec: ProductSpec, key: StratumKey, budget: int | None = None
) -> ExpectationMatrix:
    """The part of E[M] carried by one (sample, feature) partition pair.

    The feature tuple is restricted to tuples inducing *exactly* key.pi2
    (equal indices iff same block) and the sample-count factor is the number
    of sample tuples inducing exactly key.pi1, i.e. ff(n, |pi1|).
    """
    key.validate(spec)
    m = spec.m
    first, last = spec.chain[0], spec.chain[-1]
    nrow, ncol = len(first), len(last)
    bits = [wf.family.member_bits() for wf in spec.chain]
    sizes = [len(wf) for wf in spec.chain]
    blocks2 = key.pi2.blocks
    block_sizes = [sizes[b[0]] for b in blocks2]
    _check_budget(
        math.prod(block_sizes),
        budget,
        f"feature assignments for stratum = {math.prod(block_sizes)}",
    )
    ff = falling_factorial(spec.n, key.pi1.num_blocks)
    out = np.zeros((nrow, ncol))
    meta = {
        "method": "stratum",
        "pi1": key.pi1.blocks,
        "pi2": key.pi2.blocks,
        "spec": spec.digest(),
    }
    if ff == 0:
        return ExpectationMatrix(values=out, rows=first.family, cols=last.family, meta=meta)

    groups = spec.pattern.groups
    weights = [np.asarray(wf.weights) for wf in spec.chain]
    for choice in itertools.product(*(range(s) for s in block_sizes)):
        # "Exactly pi2": comparable blocks (equal families) must pick
        # distinct indices; blocks of distinct families can never collide.
        clash = False
        for a, b in itertools.combinations(range(len(blocks2)), 2):
            if groups[blocks2[a][0]] == groups[blocks2[b][0]] and choice[a] == choice[b]:
                clash = True
                break
        if clash:
            continue
        k = [0] * (m + 1)
        for b, block in enumerate(blocks2):
            for pos in block:
                k[pos] = choice[b]
        ok = True
        for block in key.pi1.blocks:
            acc = 0
            for j in block:
                acc ^= bits[j][k[j]] ^ bits[j + 1][k[j + 1]]
            if acc:
                ok = False
                break
        if not ok:
            continue
        w = float(weights[0][k[0]]) * float(weights[m][k[m]])
        for j in range(1, m):
            w *= float(weights[j][k[j]]) ** 2
        out[k[0], k[m]] += w * ff
    return ExpectationMatrix(values=out, rows=first.family, cols=last.family, meta=meta)


def weighted_monomial_sum(
    families: Sequence[SetFamily],
    b: Sequence[float] | np.ndarray,
    a: Sequence[float] | np.ndarray | None = None,
    target: SubsetMask | None = None,
    constraint: Callable[[tuple[SubsetMask, ...]], bool] | None = None,
    budget: int | None = None,
) -> float:
    """Sum over tuples (S_1,...,S_q) of b_{S_q} (a_{S_{q-1}}) E[x^{S_1}...x^{S_q} x^T].

    `b` weights the last family and the optional `a` the second-to-last;
    `target` multiplies one more fixed monomial into the product; the
    optional `constraint` keeps only tuples it accepts.  Only the first
    q-1 slots are enumerated: the parity rule forces the last set, which is
    then looked up in the final family.
    """
    q = len(families)
    if q == 0:
        raise ValueError("need at least one family")
    d = families[0].d
    for f in families:
        if f.d != d:
            raise DimensionMismatchError("families must share one dimension")
    if target is not None and target.d != d:
        raise DimensionMismatchError("target dimension mismatch")
    b_arr = np.asarray(b, dtype=np.float64)
    if b_arr.shape != (len(families[-1]),):
        raise ValueError("b must have one weight per member of the last family")
    if a is not None:
        if q < 2:
            raise ValueError("a requires at least two families")
        a_arr = np.asarray(a, dtype=np.float64)
        if a_arr.shape != (len(families[-2]),):
            raise ValueError("a must weight the second-to-last family")
    if any(len(f) == 0 for f in families):
        return 0.0
    _check_budget(
        math.prod(len(f) for f in families[:-1]),
        budget,
        "tuples over the leading families",
    )
    lead_bits = [f.member_bits() for f in families[:-1]]
    last_index = {s: i for i, s in enumerate(families[-1].member_bits())}
    t_bits = target.bits if target is not None else 0
    total = 0.0
    for tup in itertools.product(*(range(len(f)) for f in families[:-1])):
        acc = t_bits
        for fam_bits, kk in zip(lead_bits, tup):
            acc ^= fam_bits[kk]
        k_last = last_index.get(acc)
        if k_last is None:
            continue
        if constraint is not None:
            members = tuple(
                f.members[kk] for f, kk in zip(families[:-1], tup)
            ) + (families[-1].members[k_last],)
            if not constraint(members):
                continue
        term = float(b_arr[k_last])
        if a is not None:
            term *= float(a_arr[tup[-1]])
        total += term
    return total


def count_nonzero_tuples(
    families: Sequence[SetFamily],
    target: SubsetMask | None = None,
    budget: int | None = None,
) -> int:
    """Number of tuples whose monomial product coincides with x^target on the cube."""
    q = len(families)
    if q == 0:
        raise ValueError("need at least one family")
    d = families[0].d
    for f in families:
        if f.d != d:
            raise DimensionMismatchError("families must share one dimension")
    if target is not None and target.d != d:
        raise DimensionMismatchError("target dimension mismatch")
    if any(len(f) == 0 for f in families):
        return 0
    _check_budget(
        math.prod(len(f) for f in families[:-1]),
        budget,
        "tuples over the leading families",
    )
    lead_bits = [f.member_bits() for f in families[:-1]]
    last_set = set(families[-1].member_bits())
    t_bits = target.bits if target is not None else 0
    count = 0
    for tup in itertools.product(*lead_bits):
        acc = t_bits
        for s in tup:
            acc ^= s
        if acc in last_set:
            count += 1
    return count
