"""Operator (spectral) norm of dense real matrices by power iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000
_TINY = 1e-300


@dataclass(frozen=True)
class NormResult:
    """Largest singular value with the power-iteration diagnostics."""

    value: float
    iterations: int
    converged: bool
    residual: float


def _power_iteration(gram: np.ndarray, start: np.ndarray, tol: float, max_iter: int):
    """Top eigenvalue of the PSD matrix `gram` from a fixed start vector.

    Returns (eigenvalue, iterations, converged, last relative change,
    annihilated) where `annihilated` flags that the iterate fell into the
    nullspace.
    """
    x = start / np.linalg.norm(start)
    lam = 0.0
    resid = np.inf
    for it in range(1, max_iter + 1):
        y = gram @ x
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            return 0.0, it, False, resid, True
        lam_new = float(x @ y)
        resid = abs(lam_new - lam) / max(abs(lam_new), _TINY)
        x = y / ny
        lam = lam_new
        if it >= 2 and resid <= tol:
            return lam, it, True, resid, False
    return lam, max_iter, False, resid, False


def operator_norm(
    mat: np.ndarray, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> NormResult:
    """Largest singular value via power iteration on the smaller Gram matrix.

    The start vector is the normalized all-ones vector; if the iterate is
    annihilated (the start lay in the nullspace) the iteration restarts
    from the first standard basis vector.  Converged means the relative
    change of the eigenvalue estimate dropped below `tol`.
    """
    m = np.asarray(mat, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix entries must be finite")
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if m.size == 0:
        return NormResult(value=0.0, iterations=0, converged=True, residual=0.0)
    gram = m.T @ m if m.shape[1] <= m.shape[0] else m @ m.T
    if not gram.any():
        return NormResult(value=0.0, iterations=0, converged=True, residual=0.0)
    k = gram.shape[0]
    lam, its, conv, resid, dead = _power_iteration(gram, np.ones(k), tol, max_iter)
    if dead or (conv and lam <= 0.0):
        e1 = np.zeros(k)
        e1[0] = 1.0
        lam2, its2, conv2, resid2, dead2 = _power_iteration(gram, e1, tol, max_iter)
        if not dead2 and lam2 > lam:
            lam, its, conv, resid = lam2, its + its2, conv2, resid2
        else:
            its += its2
    return NormResult(
        value=float(np.sqrt(max(lam, 0.0))),
        iterations=its,
        converged=conv,
        residual=resid,
    )
