"""Batched training-error kernels for naive Bayes over feature subsets.

Both backends take the same precomputed log tables and return identical
error counts. Set ``RELSEQ_DISABLE_NUMBA=1`` to force the numpy path (numba
is also skipped when it cannot be imported).
"""

import os

import numpy as np

# Discriminants within this relative distance of the maximum count as tied.
TIE_TOL = 1e-9

_disabled = os.environ.get("RELSEQ_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def choose(g: np.ndarray, log_prior: np.ndarray) -> int:
    """Index of the winning class: largest discriminant, then largest prior,
    then lowest index."""
    gmax = g.max()
    tol = TIE_TOL * max(1.0, abs(gmax))
    best = -1
    for j in range(len(g)):
        if g[j] >= gmax - tol and (best < 0 or log_prior[j] > log_prior[best]):
            best = j
    return best


def subset_errors_numpy(X, y, alpha, log1mp, log_prior, subsets):
    """Errors of each subset (rows of ``subsets``, padded with -1)."""
    k = subsets.shape[0]
    d = alpha.shape[0]
    if k == 0:
        return np.zeros(0, dtype=np.int64)
    mask = np.zeros((k, d), dtype=np.float64)
    rows, cols = np.nonzero(subsets >= 0)
    mask[rows, subsets[rows, cols]] = 1.0
    beta = log_prior[None, :] + mask @ log1mp                        # k x Q
    g = beta[:, None, :] + np.einsum("ic,kc,cj->kij", X.astype(np.float64), mask, alpha,
                                     optimize=True)                  # k x m x Q
    gmax = g.max(axis=2, keepdims=True)
    tol = TIE_TOL * np.maximum(1.0, np.abs(gmax))
    tied = g >= gmax - tol
    prior = np.where(tied, log_prior[None, None, :], -np.inf)
    best_prior = prior.max(axis=2, keepdims=True)
    pred = np.argmax(tied & (prior == best_prior), axis=2)
    return (pred != y[None, :]).sum(axis=1).astype(np.int64)


def _subset_errors_loops(X, y, alpha, log1mp, log_prior, subsets):
    k, width = subsets.shape
    m = X.shape[0]
    q = alpha.shape[1]
    out = np.zeros(k, dtype=np.int64)
    g = np.empty(q)
    beta = np.empty(q)
    for s in range(k):
        for j in range(q):
            beta[j] = log_prior[j]
        for t in range(width):
            c = subsets[s, t]
            if c >= 0:
                for j in range(q):
                    beta[j] += log1mp[c, j]
        errors = 0
        for i in range(m):
            for j in range(q):
                g[j] = beta[j]
            for t in range(width):
                c = subsets[s, t]
                if c >= 0 and X[i, c] != 0:
                    for j in range(q):
                        g[j] += alpha[c, j]
            gmax = g[0]
            for j in range(1, q):
                if g[j] > gmax:
                    gmax = g[j]
            tol = TIE_TOL * max(1.0, abs(gmax))
            best = -1
            for j in range(q):
                if g[j] >= gmax - tol and (best < 0 or log_prior[j] > log_prior[best]):
                    best = j
            if best != y[i]:
                errors += 1
        out[s] = errors
    return out


if HAVE_NUMBA:
    subset_errors_numba = njit(cache=True, nogil=True)(_subset_errors_loops)
    subset_errors = subset_errors_numba
    BACKEND = "numba"
else:
    subset_errors_numba = None
    subset_errors = subset_errors_numpy
    BACKEND = "numpy"


def pack_subsets(subsets) -> np.ndarray:
    """List of column collections -> sorted, -1 padded int64 matrix."""
    subsets = [sorted(s) for s in subsets]
    width = max((len(s) for s in subsets), default=0)
    out = np.full((len(subsets), max(width, 1)), -1, dtype=np.int64)
    for r, s in enumerate(subsets):
        out[r, :len(s)] = s
    return out
