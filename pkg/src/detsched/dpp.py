"""Probability calculus for determinantal scheduling laws.

Everything here operates on the kernel types from :mod:`detsched.kernels`:
containment and exact-outcome probabilities, full enumeration of the
outcome distribution, Palm conditioning (the law seen from a node known to
be scheduled), thinning-style kernel scaling, the Laplace functional of
the scheduled set, and exact sampling.
"""

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from . import _sampling
from .errors import (
    BadArgument,
    BadFunction,
    BadScaling,
    BadSubset,
    EnumerationTooLarge,
    NeverScheduled,
    SameNode,
)
from .kernels import LEnsemble, MarginalKernel, _frozen

PALM_PIVOT_TOL = 1e-12
CLAMP_TOL = 1e-12
ENUMERATION_CAP = 20


@dataclass(frozen=True)
class PalmKernel:
    """Marginal kernel of the scheduling law conditioned on given nodes.

    ``conditioned_on`` records the conditioning steps as (node, kind) pairs,
    where kind is "reduced" (node removed from the ground set) or
    "retained" (node kept, pinned as scheduled with probability one).
    """

    matrix: np.ndarray
    node_ids: tuple
    conditioned_on: tuple

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def index(self, node) -> int:
        try:
            return self.node_ids.index(node)
        except ValueError:
            raise BadSubset(f"unknown node id {node!r}") from None


AnyMarginal = Union[MarginalKernel, PalmKernel]


def _clamp01(x: float) -> float:
    if -CLAMP_TOL <= x < 0.0:
        return 0.0
    if 1.0 < x <= 1.0 + CLAMP_TOL:
        return 1.0
    return float(x)


def inclusion_probability(K: AnyMarginal, nodes) -> float:
    """Probability that every node in ``nodes`` is scheduled together.

    The determinant of the kernel submatrix on ``nodes``; 1 for the empty
    set.
    """
    if isinstance(K, PalmKernel):
        idx = np.array([K.index(x) for x in nodes], dtype=np.intp)
        if len(set(nodes)) != idx.size:
            raise BadSubset("duplicate node ids in subset")
    else:
        idx = K.indices(nodes)
    if idx.size == 0:
        return 1.0
    sub = K.matrix[np.ix_(idx, idx)]
    return _clamp01(float(np.linalg.det(sub)))


def subset_probability(L: LEnsemble, nodes) -> float:
    """Probability that the scheduled set is exactly ``nodes``.

    det(L restricted to nodes) / det(L + I).
    """
    idx = L.indices(nodes)
    sub = L.matrix[np.ix_(idx, idx)]
    d = float(np.linalg.det(sub)) if idx.size else 1.0
    return _clamp01(d / L.normalization)


def exact_pmf_array(kernel, max_size: int = ENUMERATION_CAP) -> np.ndarray:
    """Exact outcome distribution as an array indexed by subset bitmask.

    Bit b of the index corresponds to position b of the kernel's node
    ordering.  Cost grows as n * 2^n; ground sets larger than ``max_size``
    raise EnumerationTooLarge.
    """
    n = kernel.n
    if n > max_size:
        raise EnumerationTooLarge(f"ground set of {n} nodes exceeds cap {max_size}")
    size = 1 << n
    masks = np.arange(size)
    out = np.empty(size, dtype=float)
    mat = kernel.matrix
    positions = [np.flatnonzero([(m >> b) & 1 for b in range(n)]) for m in range(size)]
    if isinstance(kernel, LEnsemble):
        norm = kernel.normalization
        for m in range(size):
            idx = positions[m]
            out[m] = float(np.linalg.det(mat[np.ix_(idx, idx)])) / norm if m else 1.0 / norm
    else:
        # containment determinants, then Moebius inversion down the
        # superset lattice turns them into exact-outcome probabilities
        for m in range(size):
            idx = positions[m]
            out[m] = float(np.linalg.det(mat[np.ix_(idx, idx)])) if m else 1.0
        for b in range(n):
            bit = 1 << b
            without = masks[(masks & bit) == 0]
            out[without] -= out[without | bit]
    tiny = (out < 0.0) & (out >= -CLAMP_TOL)
    out[tiny] = 0.0
    return out


def exact_pmf(kernel, max_size: int = ENUMERATION_CAP) -> dict:
    """Exact outcome distribution as {sorted node-id tuple: probability}."""
    arr = exact_pmf_array(kernel, max_size)
    ids = kernel.node_ids
    n = kernel.n
    return {
        tuple(sorted(ids[b] for b in range(n) if (m >> b) & 1)): float(arr[m])
        for m in range(arr.size)
    }


def _conditioning_of(kernel) -> tuple:
    return kernel.conditioned_on if isinstance(kernel, PalmKernel) else ()


def palm_reduced(kernel: AnyMarginal, node) -> PalmKernel:
    """Condition on ``node`` being scheduled and drop it from the ground set.

    Entries become K[z, z'] - K[z, x] K[z', x] / K[x, x] over the remaining
    nodes.  A node scheduled with probability below 1e-12 cannot be
    conditioned on and raises NeverScheduled.
    """
    idx = kernel.index(node)
    mat = kernel.matrix
    pivot = float(mat[idx, idx])
    if pivot <= PALM_PIVOT_TOL:
        raise NeverScheduled(
            f"node {node!r} has scheduling probability {pivot:.3g}, cannot condition on it"
        )
    keep = np.array([i for i in range(kernel.n) if i != idx], dtype=np.intp)
    col = mat[keep, idx]
    sub = mat[np.ix_(keep, keep)] - np.outer(col, col) / pivot
    sub = (sub + sub.T) / 2.0
    ids = tuple(kernel.node_ids[i] for i in keep)
    return PalmKernel(_frozen(sub), ids, _conditioning_of(kernel) + ((node, "reduced"),))


def palm_retained(kernel: AnyMarginal, node) -> PalmKernel:
    """Condition on ``node`` being scheduled but keep it in the ground set.

    Same off-node entries as the reduced form; the conditioned node keeps a
    diagonal entry of one and zero cross terms, pinning it as scheduled.
    """
    idx = kernel.index(node)
    reduced = palm_reduced(kernel, node)
    n = kernel.n
    out = np.zeros((n, n))
    keep = np.array([i for i in range(n) if i != idx], dtype=np.intp)
    out[np.ix_(keep, keep)] = reduced.matrix
    out[idx, idx] = 1.0
    return PalmKernel(
        _frozen(out), kernel.node_ids, _conditioning_of(kernel) + ((node, "retained"),)
    )


def palm_semi_reduced(kernel: AnyMarginal, first, second) -> PalmKernel:
    """Two-fold Palm kernel: reduce at ``first``, then retain at ``second``.

    The result lives on the ground set without ``first``; ``second`` stays,
    pinned as scheduled.  Raises NeverScheduled if either conditioning
    pivot is below tolerance, SameNode if the two nodes coincide.
    """
    if first == second:
        raise SameNode(f"need two distinct nodes, got {first!r} twice")
    step1 = palm_reduced(kernel, first)
    return palm_retained(step1, second)


def _matrix_and_ids(kernel_or_matrix):
    if isinstance(kernel_or_matrix, (MarginalKernel, LEnsemble, PalmKernel)):
        return kernel_or_matrix.matrix, kernel_or_matrix.node_ids
    a = np.asarray(kernel_or_matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise BadArgument(f"expected a square matrix, got shape {a.shape}")
    return a, tuple(range(a.shape[0]))


def _per_node_values(values, ids, n: int, what: str, err) -> np.ndarray:
    if isinstance(values, Mapping):
        try:
            vec = np.array([float(values[x]) for x in ids], dtype=float)
        except KeyError as e:
            raise err(f"no {what} value for node {e.args[0]!r}") from None
    else:
        vec = np.asarray(values, dtype=float)
        if vec.shape != (n,):
            raise err(f"expected {n} {what} values, got shape {vec.shape}")
    return vec


def scale_kernel(kernel_or_matrix, weights) -> np.ndarray:
    """Scale a marginal kernel by per-node weights in [0, 1].

    Entry (i, j) becomes sqrt(1 - w_i) * K_ij * sqrt(1 - w_j).  With w_i
    the probability of independently dropping node i, this is the marginal
    kernel of the thinned law; determinants of I minus the scaled kernel
    give averages of products of the weights over the scheduled set.
    Returns a plain array; weights outside [0, 1] (beyond a 1e-12 slack)
    raise BadScaling.
    """
    mat, ids = _matrix_and_ids(kernel_or_matrix)
    n = mat.shape[0]
    vec = _per_node_values(weights, ids, n, "scaling", BadScaling)
    if np.any(vec < -CLAMP_TOL) or np.any(vec > 1.0 + CLAMP_TOL):
        bad = vec[(vec < -CLAMP_TOL) | (vec > 1.0 + CLAMP_TOL)][0]
        raise BadScaling(f"scaling values must lie in [0, 1], found {bad!r}")
    s = np.sqrt(1.0 - np.clip(vec, 0.0, 1.0))
    return mat * np.outer(s, s)


def laplace_functional(kernel_or_matrix, rates) -> float:
    """Expected value of exp(-sum of rates over the scheduled nodes).

    Computed as det(I - K') where K' scales the marginal kernel by factors
    sqrt(1 - exp(-rate)) per node.  Rates must be nonnegative; infinite
    rates are allowed and pin the factor at 1.
    """
    mat, ids = _matrix_and_ids(kernel_or_matrix)
    n = mat.shape[0]
    vec = _per_node_values(rates, ids, n, "rate", BadFunction)
    if np.any(np.isnan(vec)) or np.any(vec < 0):
        raise BadFunction("rates must be nonnegative")
    scaled = scale_kernel(mat, np.exp(-vec))
    return _clamp01(float(np.linalg.det(np.eye(n) - scaled)))


def sample_mask(L: LEnsemble, rng: np.random.Generator) -> np.ndarray:
    """One exact draw of the scheduled set, as a boolean mask over positions.

    Spectral two-phase sampler: a Bernoulli coin per eigenvector with
    success rate x / (1 + x), then sequential point selection inside the
    sampled eigenspace.  Consumes n uniforms plus one per scheduled node.
    """
    if not isinstance(L, LEnsemble):
        raise BadArgument("sampling needs a likelihood kernel (LEnsemble)")
    vals, vecs = L.eigh
    return _sampling.draw_mask(vals, vecs, rng)


def sample(L: LEnsemble, rng: np.random.Generator) -> tuple:
    """One exact draw of the scheduled set, as a sorted tuple of node ids."""
    mask = sample_mask(L, rng)
    return tuple(sorted(L.node_ids[i] for i in np.flatnonzero(mask)))
