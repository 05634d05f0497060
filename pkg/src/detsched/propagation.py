"""Radio propagation: path loss, geometry, fading, and SINR.

Two network layouts are supported.  In "pairs" mode each transmitter i has
its own dedicated receiver at a fixed offset; in "txrx" mode a single set
of nodes both transmits and receives, and links are ordered node pairs.
Signal power through a link is fading * pathloss(distance); a link is
covered when its SINR clears the detection threshold.
"""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import (
    BadArgument,
    DegenerateSignal,
    IncompleteFading,
    SameNode,
    SingularDistance,
)

SINGULAR_DISTANCE_TOL = 1e-12


@dataclass(frozen=True)
class PowerLawPathLoss:
    """Path loss (kappa * r) ** (-exponent), singular at zero distance."""

    kappa: float
    exponent: float

    def __post_init__(self):
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise BadArgument(f"kappa must be positive and finite, got {self.kappa}")
        if not (self.exponent > 0 and math.isfinite(self.exponent)):
            raise BadArgument(f"exponent must be positive and finite, got {self.exponent}")

    singular_at_zero = True

    def evaluate(self, r: float) -> float:
        if r <= SINGULAR_DISTANCE_TOL:
            raise SingularDistance(
                f"power-law path loss is singular at distance {r!r}"
            )
        return (self.kappa * r) ** (-self.exponent)


@dataclass(frozen=True)
class TabulatedPathLoss:
    """Piecewise-linear path loss from measured (radius, value) samples.

    Bounded everywhere on its range, so zero-distance interferers are
    allowed.  Evaluation outside the tabulated radii is refused rather
    than extrapolated.
    """

    radii: np.ndarray
    values: np.ndarray

    singular_at_zero = False

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size < 2:
            raise BadArgument("need matching 1-d radius and value tables, length >= 2")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
            raise BadArgument("path loss table must be finite")
        if r[0] < 0 or np.any(np.diff(r) <= 0):
            raise BadArgument("radii must be nonnegative and strictly increasing")
        if np.any(v < 0):
            raise BadArgument("path loss values must be nonnegative")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", v)

    def evaluate(self, r: float) -> float:
        if r < self.radii[0] or r > self.radii[-1]:
            raise BadArgument(
                f"distance {r!r} outside tabulated range "
                f"[{self.radii[0]!r}, {self.radii[-1]!r}]"
            )
        return float(np.interp(r, self.radii, self.values))


PathLoss = Union[PowerLawPathLoss, TabulatedPathLoss]


def path_loss(model: PathLoss, r: float) -> float:
    """Mean received-power fraction at distance ``r`` under ``model``."""
    return model.evaluate(float(r))


@dataclass(frozen=True)
class PropagationParams:
    """Channel model shared by every link: path loss, Rayleigh-style
    exponential fading with the given mean, thermal noise power, and the
    SINR detection threshold."""

    pathloss: PathLoss
    threshold: float
    fading_mean: float = 1.0
    noise: float = 0.0

    def __post_init__(self):
        if not (self.threshold >= 0 and math.isfinite(self.threshold)):
            raise BadArgument(f"threshold must be finite and >= 0, got {self.threshold}")
        if not (self.fading_mean > 0 and math.isfinite(self.fading_mean)):
            raise BadArgument(f"fading mean must be positive, got {self.fading_mean}")
        if not (self.noise >= 0 and math.isfinite(self.noise)):
            raise BadArgument(f"noise must be finite and >= 0, got {self.noise}")


@dataclass(frozen=True)
class NetworkGeometry:
    """Node coordinates for one of the two supported layouts."""

    mode: str
    transmitters: Optional[np.ndarray] = None
    receivers: Optional[np.ndarray] = None
    nodes: Optional[np.ndarray] = None

    @staticmethod
    def _points(arr, what: str) -> np.ndarray:
        a = np.asarray(arr, dtype=float)
        if a.ndim != 2 or a.shape[0] == 0:
            raise BadArgument(f"{what} must be a nonempty (n, dim) array, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise BadArgument(f"{what} coordinates must be finite")
        a = a.copy()
        a.flags.writeable = False
        return a

    @classmethod
    def pairs(cls, transmitters, receivers) -> "NetworkGeometry":
        tx = cls._points(transmitters, "transmitters")
        rx = cls._points(receivers, "receivers")
        if tx.shape != rx.shape:
            raise BadArgument(
                f"transmitters {tx.shape} and receivers {rx.shape} must match"
            )
        return cls(mode="pairs", transmitters=tx, receivers=rx)

    @classmethod
    def txrx(cls, nodes) -> "NetworkGeometry":
        return cls(mode="txrx", nodes=cls._points(nodes, "nodes"))

    @property
    def n(self) -> int:
        return self.transmitter_points().shape[0]

    def transmitter_points(self) -> np.ndarray:
        return self.transmitters if self.mode == "pairs" else self.nodes

    def receiver_location(self, link: int) -> np.ndarray:
        """Receiver coordinates: the paired receiver in pairs mode, the
        receiving node itself in txrx mode."""
        if self.mode == "pairs":
            return self.receivers[link]
        return self.nodes[link]


def distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix between two point sets, shape (len a, len b)."""
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _distance(p: np.ndarray, q: np.ndarray) -> float:
    return float(math.sqrt(float(np.sum((p - q) ** 2))))


def interferer_factor(
    interferer_distance: float, signal_distance: float, params: PropagationParams
) -> float:
    """Coverage discount from one active interferer at the given distance.

    Equals 1 / (threshold * pathloss(s) / pathloss(r) + 1), the chance the
    intended link survives that interferer under exponential fading.  Under
    a path loss singular at zero, an interferer on top of the receiver
    drowns any signal, so the factor is 0 regardless of the threshold.
    """
    ell_r = path_loss(params.pathloss, signal_distance)
    if ell_r <= 0:
        raise DegenerateSignal(
            f"path loss at signal distance {signal_distance!r} is {ell_r!r}"
        )
    if params.pathloss.singular_at_zero and interferer_distance <= SINGULAR_DISTANCE_TOL:
        return 0.0
    if params.threshold == 0:
        return 1.0
    ell_s = path_loss(params.pathloss, interferer_distance)
    return 1.0 / (params.threshold * ell_s / ell_r + 1.0)


def noise_factor(signal_distance: float, params: PropagationParams) -> float:
    """Coverage discount from thermal noise alone.

    exp(-(threshold / fading_mean) * noise / pathloss(r)); equals 1 when
    the threshold or the noise power is zero.
    """
    ell_r = path_loss(params.pathloss, signal_distance)
    if ell_r <= 0:
        raise DegenerateSignal(
            f"path loss at signal distance {signal_distance!r} is {ell_r!r}"
        )
    if params.threshold == 0 or params.noise == 0:
        return 1.0
    return math.exp(-(params.threshold / params.fading_mean) * params.noise / ell_r)


def _fading_value(fading, tx: int, slot: int) -> float:
    if isinstance(fading, np.ndarray):
        try:
            v = float(fading[tx, slot])
        except IndexError:
            raise IncompleteFading(
                f"fading array has no entry for transmitter {tx}, receiver slot {slot}"
            ) from None
    else:
        try:
            v = float(fading[(tx, slot)])
        except KeyError:
            raise IncompleteFading(
                f"no fading value for transmitter {tx}, receiver slot {slot}"
            ) from None
    if not v >= 0:
        raise BadArgument(f"fading must be nonnegative, got {v!r}")
    return v


def _resolve_link(geometry: NetworkGeometry, transmitter: int, receiver):
    n = geometry.n
    if not (0 <= transmitter < n):
        raise BadArgument(f"transmitter index {transmitter} out of range")
    if geometry.mode == "pairs":
        if receiver is not None and receiver != transmitter:
            raise BadArgument("pairs mode has a dedicated receiver per transmitter")
        return transmitter
    if receiver is None:
        raise BadArgument("txrx mode needs an explicit receiver node")
    if not (0 <= receiver < n):
        raise BadArgument(f"receiver index {receiver} out of range")
    if receiver == transmitter:
        raise SameNode(f"node {transmitter} cannot transmit to itself")
    return receiver


def _check_interferers(interferers, transmitter: int, slot: int, geometry) -> list:
    zs = list(interferers)
    if len(set(zs)) != len(zs):
        raise BadArgument("duplicate interferer indices")
    for z in zs:
        if not (0 <= z < geometry.n):
            raise BadArgument(f"interferer index {z} out of range")
    if transmitter in zs:
        raise BadArgument("the intended transmitter cannot interfere with itself")
    if geometry.mode == "txrx" and slot in zs:
        raise BadArgument("the receiving node is silent and cannot interfere")
    return zs


def sinr(
    geometry: NetworkGeometry,
    params: PropagationParams,
    transmitter: int,
    interferers,
    fading,
    receiver: Optional[int] = None,
) -> float:
    """Realized SINR of one link given active interferers and fading.

    ``fading`` maps (transmitter, receiver slot) to a nonnegative draw,
    either as a mapping or an (n, n) array.  An interferer at zero distance
    under a singular path loss gives SINR 0; returns +inf only when the
    denominator is exactly zero and the signal power is positive.
    """
    slot = _resolve_link(geometry, transmitter, receiver)
    zs = _check_interferers(interferers, transmitter, slot, geometry)
    pts = geometry.transmitter_points()
    y = geometry.receiver_location(slot)
    d_sig = _distance(pts[transmitter], y)
    signal = _fading_value(fading, transmitter, slot) * path_loss(params.pathloss, d_sig)
    interference = 0.0
    for z in zs:
        dz = _distance(pts[z], y)
        if params.pathloss.singular_at_zero and dz <= SINGULAR_DISTANCE_TOL:
            return 0.0
        interference += _fading_value(fading, z, slot) * path_loss(params.pathloss, dz)
    denom = params.noise + interference
    if denom == 0.0:
        return math.inf if signal > 0 else 0.0
    return signal / denom


def pair_coverage_fixed(
    geometry: NetworkGeometry,
    params: PropagationParams,
    transmitter: int,
    interferers,
    receiver: Optional[int] = None,
) -> float:
    """Coverage probability of a link against a FIXED set of interferers.

    Averages only over fading: the noise discount times the product of
    per-interferer discounts.  This is the building block the scheduling
    average is taken over.
    """
    slot = _resolve_link(geometry, transmitter, receiver)
    zs = _check_interferers(interferers, transmitter, slot, geometry)
    pts = geometry.transmitter_points()
    y = geometry.receiver_location(slot)
    d_sig = _distance(pts[transmitter], y)
    value = noise_factor(d_sig, params)
    for z in zs:
        value *= interferer_factor(_distance(pts[z], y), d_sig, params)
    return value
