"""Monte Carlo estimation of coverage and local delay.

Every replication draws one scheduled set and one full fading matrix, then
checks the SINR of each link directly, with no reuse of the closed-form
machinery.  Replication r always uses substream(seed, r) regardless of how
replications are distributed over workers, and each replication consumes
its stream in a fixed order (scheduling draw, then the n-by-n fading
block, row major; delay replications repeat that per slot), so results are
bit-identical for any worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _sampling
from .errors import BadArgument, SingularDistance
from .kernels import LEnsemble
from .propagation import (
    SINGULAR_DISTANCE_TOL,
    NetworkGeometry,
    PowerLawPathLoss,
    PropagationParams,
    distances,
)
from .rng import substream

DEFAULT_DELAY_CAP = 1_000_000


VALID_TARGET_KINDS = ("coverage", "delay")


@dataclass(frozen=True)
class SimulationPlan:
    """Replication count, base seed, what to estimate, and the delay cap.

    Targets are "coverage" or "delay" (every link), or ("delay", link) for
    one link.  The estimator functions themselves always cover every link;
    targets drive which estimators a driver runs and what it reports.
    """

    replications: int
    seed: int
    targets: tuple = ("coverage",)
    delay_cap: int = DEFAULT_DELAY_CAP

    def __post_init__(self):
        if not isinstance(self.replications, (int, np.integer)) or self.replications < 1:
            raise BadArgument(f"replications must be >= 1, got {self.replications!r}")
        if not isinstance(self.seed, (int, np.integer)):
            raise BadArgument(f"seed must be an integer, got {self.seed!r}")
        if not self.targets:
            raise BadArgument("simulation plan needs at least one target")
        for t in self.targets:
            kind = t[0] if isinstance(t, tuple) else t
            if kind not in VALID_TARGET_KINDS:
                raise BadArgument(f"unknown simulation target {t!r}")
        if not isinstance(self.delay_cap, (int, np.integer)) or self.delay_cap < 1:
            raise BadArgument(f"delay cap must be >= 1, got {self.delay_cap!r}")

    def delay_links(self):
        """Explicit delay links named in targets, or None for all links."""
        picked = [t[1] for t in self.targets if isinstance(t, tuple) and t[0] == "delay"]
        return picked or None

    def wants(self, kind: str) -> bool:
        return any(
            (t[0] if isinstance(t, tuple) else t) == kind for t in self.targets
        )


@dataclass(frozen=True)
class Estimate:
    """Sample mean of per-replication success indicators, with its
    standard error (sample standard deviation / sqrt(replications))."""

    mean: float
    std_error: float
    replications: int


@dataclass(frozen=True)
class DelayEstimate:
    """Sample mean of per-replication first-success slots.

    Replications that never succeed within the cap are recorded at the cap
    and counted in ``censored``, which biases the mean low when nonzero.
    """

    mean: float
    std_error: float
    replications: int
    censored: int


def _bernoulli_estimate(successes: int, reps: int) -> Estimate:
    p = successes / reps
    if reps > 1:
        std = math.sqrt(max(reps * p * (1.0 - p), 0.0) / (reps - 1))
    else:
        std = 0.0
    return Estimate(mean=p, std_error=std / math.sqrt(reps), replications=reps)


def _loss_matrix(model, dist: np.ndarray) -> np.ndarray:
    """Elementwise path loss; +inf marks singular (zero-distance) entries
    under a power law."""
    if isinstance(model, PowerLawPathLoss):
        singular = dist <= SINGULAR_DISTANCE_TOL
        safe = np.where(singular, 1.0, dist)
        out = (model.kappa * safe) ** (-model.exponent)
        out[singular] = np.inf
        return out
    lo, hi = model.radii[0], model.radii[-1]
    if float(dist.min()) < lo or float(dist.max()) > hi:
        raise BadArgument(
            f"a link distance falls outside the tabulated range [{lo!r}, {hi!r}]"
        )
    return np.interp(dist, model.radii, model.values)


def _split_reps(reps: int, workers: int):
    return [range(w, reps, workers) for w in range(workers)]


def _run_workers(workers: int, fn, rep_ranges):
    if workers <= 1:
        return [fn(r) for r in rep_ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, rep_ranges))


class _PairsArena:
    """Precomputed quantities for pairs-mode replications."""

    def __init__(self, geometry: NetworkGeometry, L: LEnsemble, params: PropagationParams):
        if geometry.mode != "pairs":
            raise BadArgument(f"pairs-mode simulation got {geometry.mode!r} geometry")
        if L.n != geometry.n:
            raise BadArgument(f"kernel has {L.n} nodes but geometry has {geometry.n}")
        self.n = geometry.n
        # loss[z, i] is the path loss from transmitter z to receiver i
        loss = _loss_matrix(params.pathloss, distances(geometry.transmitters, geometry.receivers))
        diag = np.diagonal(loss)
        if np.any(np.isinf(diag)):
            bad = int(np.flatnonzero(np.isinf(diag))[0])
            raise SingularDistance(f"link {bad} has zero length under a singular path loss")
        self.inf_mask = np.isinf(loss).astype(float)
        self.loss = np.where(np.isinf(loss), 0.0, loss)
        self.diag_idx = np.arange(self.n)
        self.lvals, self.lvecs = L.eigh
        self.params = params

    def covered(self, rng) -> np.ndarray:
        """One slot: scheduling draw + fading, success indicator per link."""
        p = self.params
        n = self.n
        mask = _sampling.draw_mask(self.lvals, self.lvecs, rng)
        fading = -p.fading_mean * np.log1p(-rng.random((n, n)))
        power = fading * self.loss
        maskf = mask.astype(float)
        total = maskf @ power
        own = power[self.diag_idx, self.diag_idx]
        interference = total - maskf * own
        drowned = (maskf @ self.inf_mask) > 0.0
        return mask & ~drowned & (own > p.threshold * (p.noise + interference))


class _TxRxArena:
    """Precomputed quantities for txrx-mode replications."""

    def __init__(self, geometry: NetworkGeometry, L: LEnsemble, params: PropagationParams):
        if geometry.mode != "txrx":
            raise BadArgument(f"txrx-mode simulation got {geometry.mode!r} geometry")
        if L.n != geometry.n:
            raise BadArgument(f"kernel has {L.n} nodes but geometry has {geometry.n}")
        self.n = geometry.n
        dist = distances(geometry.nodes, geometry.nodes)
        np.fill_diagonal(dist, 1.0)  # self distances are never used
        loss = _loss_matrix(params.pathloss, dist)
        np.fill_diagonal(loss, 0.0)
        # links between coincident nodes have no defined signal; mark them
        offdiag = ~np.eye(self.n, dtype=bool)
        self.singular_links = np.isinf(loss) & offdiag
        self.inf_mask = np.where(self.singular_links, 1.0, 0.0)
        self.loss = np.where(np.isinf(loss), 0.0, loss)
        self.lvals, self.lvecs = L.eigh
        self.params = params

    def covered(self, rng) -> np.ndarray:
        """One slot: (n, n) success indicators for every ordered link."""
        p = self.params
        n = self.n
        mask = _sampling.draw_mask(self.lvals, self.lvecs, rng)
        fading = -p.fading_mean * np.log1p(-rng.random((n, n)))
        power = fading * self.loss
        maskf = mask.astype(float)
        total = maskf @ power  # scheduled power arriving at each node
        drowned = (maskf @ self.inf_mask) > 0.0
        interference = total[None, :] - power
        ok = power > p.threshold * (p.noise + interference)
        return (
            mask[:, None]
            & ~mask[None, :]
            & ~drowned[None, :]
            & ok
            & ~self.singular_links
        )


def simulate_pair_coverage(
    geometry: NetworkGeometry,
    L: LEnsemble,
    params: PropagationParams,
    plan: SimulationPlan,
    workers: int = 1,
) -> list:
    """Coverage estimate for every dedicated link, one Estimate per link."""
    arena = _PairsArena(geometry, L, params)
    reps = plan.replications

    def run(rep_range):
        counts = np.zeros(arena.n, dtype=np.int64)
        for r in rep_range:
            counts += arena.covered(substream(plan.seed, r))
        return counts

    counts = sum(_run_workers(workers, run, _split_reps(reps, max(1, workers))))
    return [_bernoulli_estimate(int(c), reps) for c in counts]


def simulate_txrx(
    geometry: NetworkGeometry,
    L: LEnsemble,
    params: PropagationParams,
    plan: SimulationPlan,
    workers: int = 1,
) -> dict:
    """Coverage estimate for every ordered node pair, as {(tx, rx): Estimate}.

    Links between coincident nodes have no defined signal and are omitted.
    """
    arena = _TxRxArena(geometry, L, params)
    reps = plan.replications

    def run(rep_range):
        counts = np.zeros((arena.n, arena.n), dtype=np.int64)
        for r in rep_range:
            counts += arena.covered(substream(plan.seed, r))
        return counts

    counts = sum(_run_workers(workers, run, _split_reps(reps, max(1, workers))))
    out = {}
    for i in range(arena.n):
        for j in range(arena.n):
            if i != j and not arena.singular_links[i, j]:
                out[(i, j)] = _bernoulli_estimate(int(counts[i, j]), reps)
    return out


def _delay_targets(geometry: NetworkGeometry, links) -> list:
    if links is not None:
        targets = list(links)
        if not targets:
            raise BadArgument("empty target list for the delay simulation")
        return targets
    if geometry.mode == "pairs":
        return list(range(geometry.n))
    return [(i, j) for i in range(geometry.n) for j in range(geometry.n) if i != j]


def simulate_local_delay(
    geometry: NetworkGeometry,
    L: LEnsemble,
    params: PropagationParams,
    plan: SimulationPlan,
    links: Optional[list] = None,
    workers: int = 1,
) -> dict:
    """First-success slot estimates, as {link: DelayEstimate}.

    Links are ints in pairs mode and (tx, rx) tuples in txrx mode; by
    default every link is tracked.  Each replication plays slots until all
    tracked links have succeeded or the plan's delay cap is reached.
    """
    if geometry.mode == "pairs":
        arena = _PairsArena(geometry, L, params)
        def lookup(cov, tgt):
            return bool(cov[tgt])
    else:
        arena = _TxRxArena(geometry, L, params)
        def lookup(cov, tgt):
            return bool(cov[tgt[0], tgt[1]])
    targets = _delay_targets(geometry, links)
    for tgt in targets:
        if geometry.mode == "pairs":
            if not (isinstance(tgt, (int, np.integer)) and 0 <= tgt < arena.n):
                raise BadArgument(f"bad pairs-mode delay target {tgt!r}")
        else:
            if not (
                isinstance(tgt, tuple)
                and len(tgt) == 2
                and tgt[0] != tgt[1]
                and 0 <= tgt[0] < arena.n
                and 0 <= tgt[1] < arena.n
            ):
                raise BadArgument(f"bad txrx-mode delay target {tgt!r}")
    reps = plan.replications
    cap = plan.delay_cap
    ntgt = len(targets)

    def run(rep_range):
        rows = []
        for r in rep_range:
            rng = substream(plan.seed, r)
            waiting = dict.fromkeys(range(ntgt))
            delays = np.full(ntgt, cap, dtype=np.int64)
            censored = np.ones(ntgt, dtype=bool)
            slot = 0
            while waiting and slot < cap:
                slot += 1
                cov = arena.covered(rng)
                done = [t for t in waiting if lookup(cov, targets[t])]
                for t in done:
                    delays[t] = slot
                    censored[t] = False
                    del waiting[t]
            rows.append((r, delays, censored))
        return rows

    all_rows = []
    for chunk in _run_workers(workers, run, _split_reps(reps, max(1, workers))):
        all_rows.extend(chunk)
    all_rows.sort(key=lambda row: row[0])
    delays = np.stack([row[1] for row in all_rows])  # (reps, ntgt)
    censored = np.stack([row[2] for row in all_rows])
    out = {}
    for t, tgt in enumerate(targets):
        vals = delays[:, t].astype(float)
        std = float(vals.std(ddof=1)) if reps > 1 else 0.0
        out[tgt] = DelayEstimate(
            mean=float(vals.mean()),
            std_error=std / math.sqrt(reps),
            replications=reps,
            censored=int(censored[:, t].sum()),
        )
    return out
