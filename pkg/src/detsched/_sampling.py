"""Inner loop of the spectral sampler.

Phase 1 (eigenvector selection) lives in the caller; this module holds the
sequential point-selection phase, written as explicit loops so numba can
compile it.  Without numba the same function runs as plain Python, which is
adequate for small ground sets.  Both paths consume the pre-drawn uniforms
identically, one per selected point.
"""

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None


def _phase2_loops(V, u):
    """Select one point per remaining dimension of the projection kernel.

    Each step: pick a row with probability proportional to its squared norm
    (driven by u[t]), eliminate the chosen row via its largest pivot column,
    drop that column, and re-orthonormalize the rest with modified
    Gram-Schmidt.
    """
    n = V.shape[0]
    m = V.shape[1]
    k = m
    chosen = np.empty(k, dtype=np.int64)
    w = np.empty(n, dtype=np.float64)
    for t in range(k):
        total = 0.0
        for i in range(n):
            s = 0.0
            for j in range(m):
                s += V[i, j] * V[i, j]
            w[i] = s
            total += s
        target = u[t] * total
        acc = 0.0
        x = n - 1
        for i in range(n):
            acc += w[i]
            if acc >= target:
                x = i
                break
        # pivot column: largest magnitude at the chosen row
        jbest = 0
        best = -1.0
        for j in range(m):
            v = abs(V[x, j])
            if v > best:
                best = v
                jbest = j
        if best == 0.0:
            # degenerate draw landed on a zero-mass row; fall back to the
            # heaviest row, which must have a nonzero pivot
            x = 0
            hw = -1.0
            for i in range(n):
                if w[i] > hw:
                    hw = w[i]
                    x = i
            best = -1.0
            for j in range(m):
                v = abs(V[x, j])
                if v > best:
                    best = v
                    jbest = j
        chosen[t] = x
        if m == 1:
            break
        # eliminate the chosen row from every other column
        pivot = V[x, jbest]
        for j in range(m):
            if j == jbest:
                continue
            c = V[x, j] / pivot
            if c != 0.0:
                for i in range(n):
                    V[i, j] -= c * V[i, jbest]
        # drop the pivot column by swapping in the last one
        if jbest != m - 1:
            for i in range(n):
                V[i, jbest] = V[i, m - 1]
        m -= 1
        # modified Gram-Schmidt on the surviving columns
        for j in range(m):
            for jj in range(j):
                d = 0.0
                for i in range(n):
                    d += V[i, j] * V[i, jj]
                for i in range(n):
                    V[i, j] -= d * V[i, jj]
            s = 0.0
            for i in range(n):
                s += V[i, j] * V[i, j]
            nrm = math.sqrt(s)
            if nrm > 0.0:
                inv = 1.0 / nrm
                for i in range(n):
                    V[i, j] *= inv
    return chosen


if njit is not None:
    _phase2 = njit(cache=True)(_phase2_loops)
else:  # pragma: no cover
    _phase2 = _phase2_loops


def draw_mask(lvals: np.ndarray, vecs: np.ndarray, rng) -> np.ndarray:
    """One scheduling draw as a boolean mask over ground-set positions.

    ``lvals``/``vecs`` are the eigendecomposition of the likelihood kernel.
    Consumes n uniforms for the eigenvector coin flips, then one per
    selected point.
    """
    n = lvals.shape[0]
    coins = rng.random(n)
    sel = coins < lvals / (1.0 + lvals)
    mask = np.zeros(n, dtype=bool)
    k = int(sel.sum())
    if k == 0:
        return mask
    V = np.ascontiguousarray(vecs[:, sel])
    u = rng.random(k)
    mask[_phase2(V, u)] = True
    return mask
