"""Experiment configuration: JSON schema, loading, and chain construction.

Configs are single JSON files with a top-level ``schema_version`` field
(currently 1).  Families are described either by generators or by explicit
member lists (arrays of coordinate arrays); weight rules are evaluated
against the (n, d) of each sweep point.

Family descriptors::

    {"kind": "all_size", "sizes": [1], "coords": [0, 1, 2]}   # coords optional
    {"kind": "blocked", "exponents": [1, 0.5], "block_sizes": [1, 1]}
    {"kind": "explicit", "members": [[0, 1], [2]]}

Weight rules::

    {"kind": "constant", "value": 0.25}
    {"kind": "n_inv_sqrt", "c": 1.0}          # c / sqrt(n)
    {"kind": "min_n_d", "c": 1.0}             # c * min(n^-1/2, d^-p/2)
    {"kind": "explicit", "values": [...]}

The ``min_n_d`` rule uses the family's effective degree, which for plain
families equals the degree bound.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any

import numpy as np

from .errors import ConfigError
from .families import (
    SetFamily,
    WeightedFamily,
    all_subsets_of_size,
    blocked_family,
    build_block_structure,
)
from .hypercube import SubsetMask

SCHEMA_VERSION = 1


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    version = cfg.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {version!r}; this build reads version {SCHEMA_VERSION}"
        )
    return cfg


def config_hash(cfg: dict) -> str:
    """Stable hash of the canonicalised config, recorded in summaries."""
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def require(cfg: dict, key: str, kind: type | tuple[type, ...], what: str = "config") -> Any:
    if key not in cfg:
        raise ConfigError(f"{what} is missing required key {key!r}")
    value = cfg[key]
    if not isinstance(value, kind):
        raise ConfigError(f"{what} key {key!r} has wrong type {type(value).__name__}")
    return value


def build_family(desc: dict, d: int) -> SetFamily:
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError(f"family descriptor must be an object with 'kind': {desc!r}")
    kind = desc["kind"]
    try:
        if kind == "all_size":
            sizes = require(desc, "sizes", list, "all_size family")
            coords = desc.get("coords")
            return all_subsets_of_size(d, sizes, coords=coords)
        if kind == "blocked":
            exponents = require(desc, "exponents", list, "blocked family")
            block_sizes = require(desc, "block_sizes", list, "blocked family")
            structure = build_block_structure(d, exponents, block_sizes)
            return blocked_family(structure, block_sizes)
        if kind == "explicit":
            members = require(desc, "members", list, "explicit family")
            return SetFamily(
                d=d, members=tuple(SubsetMask.from_coords(d, m) for m in members)
            )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad family descriptor {desc!r}: {exc}") from exc
    raise ConfigError(f"unknown family kind {kind!r}")


def build_weights(desc: dict, family: SetFamily, n: int, d: int) -> np.ndarray:
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError(f"weight rule must be an object with 'kind': {desc!r}")
    kind = desc["kind"]
    size = len(family)
    if kind == "constant":
        value = float(require(desc, "value", (int, float), "constant weights"))
        return np.full(size, value)
    if kind == "n_inv_sqrt":
        c = float(desc.get("c", 1.0))
        return np.full(size, c / math.sqrt(n))
    if kind == "min_n_d":
        c = float(desc.get("c", 1.0))
        p_eff = family.effective_degree
        return np.full(size, c * min(n ** -0.5, d ** (-p_eff / 2)))
    if kind == "explicit":
        values = require(desc, "values", list, "explicit weights")
        if len(values) != size:
            raise ConfigError(
                f"explicit weights list has {len(values)} entries, family has {size}"
            )
        return np.asarray(values, dtype=np.float64)
    raise ConfigError(f"unknown weight rule {kind!r}")


def build_chain(descs: list[dict], n: int, d: int) -> tuple[WeightedFamily, ...]:
    if not isinstance(descs, list) or len(descs) < 2:
        raise ConfigError("chain must list at least two positions")
    out = []
    for pos, entry in enumerate(descs):
        if not isinstance(entry, dict):
            raise ConfigError(f"chain position {pos} must be an object")
        family = build_family(require(entry, "family", dict, f"chain[{pos}]"), d)
        weights = build_weights(
            require(entry, "weights", dict, f"chain[{pos}]"), family, n, d
        )
        try:
            out.append(WeightedFamily(family=family, weights=weights))
        except ValueError as exc:
            raise ConfigError(f"chain position {pos}: {exc}") from exc
    return tuple(out)


def n_from_rule(rule: dict, d: int, index: int) -> int:
    """Sample count for the sweep point at dimension d (schedule position index)."""
    if not isinstance(rule, dict) or "kind" not in rule:
        raise ConfigError(f"n rule must be an object with 'kind': {rule!r}")
    kind = rule["kind"]
    if kind == "power":
        alpha = float(require(rule, "alpha", (int, float), "power n rule"))
        coeff = float(rule.get("coeff", 1.0))
        n = round(coeff * d**alpha)
        if n < 1:
            raise ConfigError(f"n rule gives n={n} < 1 at d={d}")
        return n
    if kind == "explicit":
        values = require(rule, "values", list, "explicit n rule")
        if index >= len(values):
            raise ConfigError("explicit n rule shorter than the dimension schedule")
        return int(values[index])
    raise ConfigError(f"unknown n rule kind {kind!r}")


def power_alpha(rule: dict) -> float | None:
    """Exponent of a power-law n rule, None for explicit schedules."""
    if isinstance(rule, dict) and rule.get("kind") == "power":
        return float(rule.get("alpha", 0.0))
    return None
