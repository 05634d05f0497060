"""Closed-form SINR coverage under determinantal scheduling.

The central quantity: the probability a link's SINR clears the threshold,
averaged over both the random medium access (who transmits this slot) and
exponential fading.  Conditioning on the intended transmitter being
scheduled turns the access law into its Palm version, and the fading
average factors into one discount per interferer, so the whole coverage
probability collapses to a determinant of a scaled Palm kernel times a
noise discount.  Local delay statistics follow from coverage through the
geometric law of the first successful slot.
"""

import hashlib
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dpp import (
    CLAMP_TOL,
    PALM_PIVOT_TOL,
    _clamp01,
    palm_reduced,
    palm_semi_reduced,
    scale_kernel,
)
from .errors import AlwaysScheduledReceiver, BadArgument, DetschedError, SameNode
from .kernels import MarginalKernel
from .propagation import (
    NetworkGeometry,
    PropagationParams,
    _distance,
    interferer_factor,
    noise_factor,
)


def _require(geometry: NetworkGeometry, K: MarginalKernel, mode: str):
    if geometry.mode != mode:
        raise BadArgument(f"this computation needs {mode!r} geometry, got {geometry.mode!r}")
    if K.n != geometry.n:
        raise BadArgument(
            f"kernel has {K.n} nodes but geometry has {geometry.n}"
        )


def _check_index(i: int, n: int, what: str):
    if not isinstance(i, (int, np.integer)) or not (0 <= i < n):
        raise BadArgument(f"{what} index {i!r} out of range for {n} nodes")


def _discounts(geometry, params, transmitter: int, slot: int):
    """Per-interferer coverage discounts at the link's receiver, for every
    node except the transmitter, in ground-set order.  Also returns the
    signal distance."""
    pts = geometry.transmitter_points()
    y = geometry.receiver_location(slot)
    d_sig = _distance(pts[transmitter], y)
    vals = np.empty(geometry.n - 1)
    pos = 0
    for z in range(geometry.n):
        if z == transmitter:
            continue
        vals[pos] = interferer_factor(_distance(pts[z], y), d_sig, params)
        pos += 1
    return vals, d_sig


def conditional_pair_coverage(
    geometry: NetworkGeometry, K: MarginalKernel, link: int, params: PropagationParams
) -> float:
    """Coverage of dedicated link ``link`` given its transmitter is scheduled.

    det(I - Palm kernel scaled by the interferer discounts) times the noise
    discount.  The Palm step raises NeverScheduled for a transmitter with
    zero scheduling probability.
    """
    _require(geometry, K, "pairs")
    _check_index(link, K.n, "link")
    palm = palm_reduced(K, K.node_ids[link])
    hv, d_sig = _discounts(geometry, params, link, link)
    det = float(np.linalg.det(np.eye(K.n - 1) - scale_kernel(palm.matrix, hv)))
    return _clamp01(det * noise_factor(d_sig, params))


def pair_coverage(
    geometry: NetworkGeometry, K: MarginalKernel, link: int, params: PropagationParams
) -> float:
    """Unconditional coverage of dedicated link ``link``.

    Scheduling probability times conditional coverage; exactly 0 for a
    never-scheduled transmitter.
    """
    _require(geometry, K, "pairs")
    _check_index(link, K.n, "link")
    sel = float(K.matrix[link, link])
    if sel <= PALM_PIVOT_TOL:
        return 0.0
    return sel * conditional_pair_coverage(geometry, K, link, params)


def coverage_kernel(
    geometry: NetworkGeometry, K: MarginalKernel, link: int, params: PropagationParams
) -> np.ndarray:
    """Single matrix whose determinant is the unconditional pair coverage.

    Block structure on the full ground set: the scaled-Palm block
    I - K'{h} on the other nodes, the entry w * K_ll at (link, link), and
    zero cross terms.
    """
    _require(geometry, K, "pairs")
    _check_index(link, K.n, "link")
    n = K.n
    palm = palm_reduced(K, K.node_ids[link])
    hv, d_sig = _discounts(geometry, params, link, link)
    out = np.zeros((n, n))
    others = np.array([i for i in range(n) if i != link], dtype=np.intp)
    out[np.ix_(others, others)] = np.eye(n - 1) - scale_kernel(palm.matrix, hv)
    out[link, link] = noise_factor(d_sig, params) * float(K.matrix[link, link])
    return out


def _txrx_conditional_raw(
    geometry: NetworkGeometry,
    K: MarginalKernel,
    transmitter: int,
    receiver: int,
    params: PropagationParams,
    use_semi_reduced: Optional[bool],
) -> float:
    _require(geometry, K, "txrx")
    _check_index(transmitter, K.n, "transmitter")
    _check_index(receiver, K.n, "receiver")
    if transmitter == receiver:
        raise SameNode(f"node {transmitter} cannot transmit to itself")
    tx_id = K.node_ids[transmitter]
    rx_id = K.node_ids[receiver]
    palm = palm_reduced(K, tx_id)
    q = float(palm.matrix[palm.index(rx_id), palm.index(rx_id)])
    if q >= 1.0 - CLAMP_TOL:
        raise AlwaysScheduledReceiver(
            f"node {receiver} transmits with conditional probability {q:.12g}, "
            "so it can never listen"
        )
    hv, d_sig = _discounts(geometry, params, transmitter, receiver)
    m = K.n - 1
    det1 = float(np.linalg.det(np.eye(m) - scale_kernel(palm.matrix, hv)))
    if use_semi_reduced is None:
        # under a path loss singular at zero the receiver's own discount is
        # exactly 0, which forces the semi-reduced determinant to 0; skip it
        use_semi_reduced = not params.pathloss.singular_at_zero
    term = 0.0
    if use_semi_reduced and q > PALM_PIVOT_TOL:
        semi = palm_semi_reduced(K, tx_id, rx_id)
        det2 = float(np.linalg.det(np.eye(m) - scale_kernel(semi.matrix, hv)))
        term = q * det2
    return (noise_factor(d_sig, params) / (1.0 - q)) * (det1 - term)


def txrx_conditional_coverage(
    geometry: NetworkGeometry,
    K: MarginalKernel,
    transmitter: int,
    receiver: int,
    params: PropagationParams,
    use_semi_reduced: Optional[bool] = None,
) -> float:
    """Coverage of the link transmitter -> receiver, given the transmitter
    is scheduled and the receiver is not.

    Both nodes belong to the same scheduled set, so the receiver's own
    potential transmission is averaged out: the one-fold Palm determinant
    minus the receiver-retained two-fold correction, rescaled by the
    conditional probability the receiver stays silent.  With
    ``use_semi_reduced`` unset the correction is skipped automatically
    when the path loss is singular at zero (it vanishes identically);
    forcing it on or off selects the variant explicitly.
    """
    raw = _txrx_conditional_raw(
        geometry, K, transmitter, receiver, params, use_semi_reduced
    )
    return min(max(raw, 0.0), 1.0)


def txrx_coverage(
    geometry: NetworkGeometry,
    K: MarginalKernel,
    transmitter: int,
    receiver: int,
    params: PropagationParams,
) -> float:
    """Unconditional coverage of the link transmitter -> receiver.

    Probability the transmitter is scheduled and the receiver silent,
    times the conditional coverage; exactly 0 when that event has
    (near-)zero probability.
    """
    _require(geometry, K, "txrx")
    _check_index(transmitter, K.n, "transmitter")
    _check_index(receiver, K.n, "receiver")
    if transmitter == receiver:
        raise SameNode(f"node {transmitter} cannot transmit to itself")
    pair = K.matrix[np.ix_((transmitter, receiver), (transmitter, receiver))]
    sel = float(K.matrix[transmitter, transmitter]) - float(np.linalg.det(pair))
    if sel <= PALM_PIVOT_TOL:
        return 0.0
    return sel * txrx_conditional_coverage(geometry, K, transmitter, receiver, params)


@dataclass(frozen=True)
class LocalDelay:
    """Slots until first success for a link with per-slot coverage p."""

    success_probability: float
    mean: float

    def cdf(self, slots: int) -> float:
        """Probability of at least one success within ``slots`` attempts."""
        if not isinstance(slots, (int, np.integer)) or slots < 0:
            raise BadArgument(f"slot count must be a nonnegative integer, got {slots!r}")
        return 1.0 - (1.0 - self.success_probability) ** slots


def local_delay(coverage_probability: float) -> LocalDelay:
    """Geometric local delay for i.i.d. slots with the given coverage.

    Mean 1/p; infinite mean when the link is never covered.
    """
    p = float(coverage_probability)
    if not (0.0 <= p <= 1.0):
        raise BadArgument(f"coverage probability must lie in [0, 1], got {p!r}")
    mean = math.inf if p == 0.0 else 1.0 / p
    return LocalDelay(success_probability=p, mean=mean)


def min_coverage_for_success(epsilon: float, slots: int) -> float:
    """Smallest per-slot coverage giving success probability ``epsilon``
    within ``slots`` attempts: 1 - (1 - epsilon) ** (1 / slots)."""
    e = float(epsilon)
    if not (0.0 <= e < 1.0):
        raise BadArgument(f"target probability must lie in [0, 1), got {epsilon!r}")
    if not isinstance(slots, (int, np.integer)) or slots < 1:
        raise BadArgument(f"slot count must be a positive integer, got {slots!r}")
    return 1.0 - (1.0 - e) ** (1.0 / slots)


@dataclass(frozen=True)
class LinkReport:
    transmitter: int
    receiver: Optional[int]
    selection_probability: float
    conditional_coverage: Optional[float]
    coverage: Optional[float]
    delay_mean: Optional[float]
    flags: tuple = ()
    error: Optional[str] = None


@dataclass(frozen=True)
class CoverageReport:
    mode: str
    links: tuple
    kernel_fingerprint: str
    params: PropagationParams


def kernel_fingerprint(K: MarginalKernel) -> str:
    h = hashlib.sha256()
    h.update(str(K.matrix.shape).encode())
    h.update(np.ascontiguousarray(K.matrix).tobytes())
    return h.hexdigest()


def _pairs_link_report(geometry, K, i, params) -> LinkReport:
    sel = float(K.matrix[i, i])
    if sel <= PALM_PIVOT_TOL:
        return LinkReport(i, None, sel, None, 0.0, math.inf, flags=("never_scheduled",))
    try:
        cond = conditional_pair_coverage(geometry, K, i, params)
    except DetschedError as e:
        return LinkReport(i, None, sel, None, None, None, error=str(e))
    cov = sel * cond
    return LinkReport(i, None, sel, cond, cov, local_delay(cov).mean)


def _txrx_link_report(geometry, K, i, j, params) -> LinkReport:
    pair = K.matrix[np.ix_((i, j), (i, j))]
    sel = max(float(K.matrix[i, i]) - float(np.linalg.det(pair)), 0.0)
    if sel <= PALM_PIVOT_TOL:
        flag = (
            "never_scheduled"
            if float(K.matrix[i, i]) <= PALM_PIVOT_TOL
            else "receiver_always_scheduled"
        )
        return LinkReport(i, j, sel, None, 0.0, math.inf, flags=(flag,))
    try:
        raw = _txrx_conditional_raw(geometry, K, i, j, params, None)
    except DetschedError as e:
        return LinkReport(i, j, sel, None, None, None, error=str(e))
    cond = min(max(raw, 0.0), 1.0)
    flags = ("clamped",) if abs(raw - cond) > 1e-9 else ()
    cov = sel * cond
    return LinkReport(i, j, sel, cond, cov, local_delay(cov).mean, flags=flags)


def full_report(
    geometry: NetworkGeometry, K: MarginalKernel, params: PropagationParams
) -> CoverageReport:
    """Coverage, conditional coverage, and mean delay for every link.

    Pairs mode reports one entry per dedicated link; txrx mode one entry
    per ordered node pair.  Per-link failures are captured as error
    strings rather than aborting the report.
    """
    if K.n != geometry.n:
        raise BadArgument(f"kernel has {K.n} nodes but geometry has {geometry.n}")
    links = []
    if geometry.mode == "pairs":
        for i in range(geometry.n):
            links.append(_pairs_link_report(geometry, K, i, params))
    else:
        for i in range(geometry.n):
            for j in range(geometry.n):
                if i != j:
                    links.append(_txrx_link_report(geometry, K, i, j, params))
    return CoverageReport(
        mode=geometry.mode,
        links=tuple(links),
        kernel_fingerprint=kernel_fingerprint(K),
        params=params,
    )
