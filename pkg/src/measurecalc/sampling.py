"""Monte Carlo counterparts of the exact measure algebra.

Random numbers come from counter-based Philox generators, one per stream,
keyed by ``(seed, stream)``.  Work is split across streams by a fixed rule
and results are concatenated in stream order, so the output depends only on
the :class:`SamplerConfig` and never on how many threads ran it.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numba
import numpy as np

from .errors import (
    AttemptBudgetExhausted,
    EmptyCloud,
    NotProbability,
    SpaceMismatch,
    UnboundedLikelihood,
    ZeroAcceptance,
    ZeroMassSampling,
)
from .mapping import CellMapping, ExprMapping
from .measure import GridMeasure, intersect, total_mass
from .space import CellSet, CoordinateDomain, Space

__all__ = [
    "SamplerConfig",
    "ParticleMeasure",
    "stream_generator",
    "sample_grid",
    "sample_source",
    "ProductLognormal",
    "coincidence_intersect",
    "rejection_posterior",
    "transport",
    "bin_particles",
    "histogram",
    "tv_distance",
    "particle_probability",
]

MAX_ATTEMPTS = 10**9
PILOT_SIZE = 10_000
PILOT_HEADROOM = 1.2
_PILOT_ROUNDS = 8
_PILOT_STREAM = 1 << 62
_MIN_BATCH = 1 << 14
_MAX_BATCH = 1 << 21


@dataclass(frozen=True)
class SamplerConfig:
    """Sampler settings.

    Parameters
    ----------
    seed : int
        64-bit seed shared by all streams.
    streams : int
        Number of independent random streams; the work is split evenly.
    n_samples : int
        Number of samples, or of acceptances for rejection-style samplers.
    acceptance_scale : float or "auto"
        The constant ``k`` of the rejection sampler.
    workers : int
        Threads used to run streams.  Has no effect on the output.
    max_attempts : int
        Global cap on attempted draws for rejection-style samplers.
    """

    seed: int = 0
    streams: int = 1
    n_samples: int = 10_000
    acceptance_scale: Union[float, str] = "auto"
    workers: int = 1
    max_attempts: int = MAX_ATTEMPTS

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.streams < 1 or self.n_samples < 1 or self.workers < 1:
            raise ValueError("streams, n_samples and workers must be positive")
        k = self.acceptance_scale
        if k != "auto" and not (isinstance(k, (int, float)) and math.isfinite(k) and k > 0):
            raise ValueError(f"acceptance_scale must be 'auto' or a positive number, not {k!r}")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be positive")

    def split(self, total=None):
        """Per-stream share of ``total`` (default ``n_samples``)."""
        total = self.n_samples if total is None else total
        base, extra = divmod(total, self.streams)
        return [base + (s < extra) for s in range(self.streams)]


def stream_generator(seed: int, stream: int) -> np.random.Generator:
    """Philox generator keyed by ``(seed, stream)``."""
    return np.random.Generator(np.random.Philox(key=(int(stream) << 64) | int(seed)))


def _run_streams(cfg: SamplerConfig, work: Callable):
    jobs = [(s, stream_generator(cfg.seed, s), n) for s, n in enumerate(cfg.split())]
    if cfg.workers == 1 or cfg.streams == 1:
        return [work(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda job: work(*job), jobs))


class ParticleMeasure:
    """Weighted cloud of points.

    ``points`` holds cell indices (shape ``(n,)``) when ``space`` is a
    :class:`Space`, or coordinates (shape ``(n, d)``) when it is a
    :class:`CoordinateDomain`.  ``streams[i]`` records which random stream
    produced particle ``i``; ``info`` carries sampler bookkeeping such as
    attempt counts.
    """

    def __init__(self, space, points, weights=None, streams=None, info=None):
        if isinstance(space, Space):
            points = np.asarray(points, dtype=np.int64).reshape(-1)
            if points.size and (points.min() < 0 or points.max() >= len(space)):
                raise SpaceMismatch("particle cell index outside the space")
        elif isinstance(space, CoordinateDomain):
            points = np.asarray(points, dtype=float).reshape(len(points), space.dim)
        else:
            raise TypeError("space must be a Space or a CoordinateDomain")
        n = points.shape[0]
        weights = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
        if weights.shape != (n,) or not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ValueError("weights must be finite, >= 0 and one per point")
        streams = np.zeros(n, dtype=np.int64) if streams is None else np.asarray(streams, dtype=np.int64)
        self.space = space
        self.points = points
        self.weights = weights
        self.streams = streams
        self.info = dict(info or {})

    @property
    def is_cellular(self) -> bool:
        return isinstance(self.space, Space)

    def __len__(self):
        return self.points.shape[0]

    def __repr__(self):
        return f"ParticleMeasure({len(self)} points on {self.space!r})"

    @property
    def total_weight(self) -> float:
        return math.fsum(self.weights)


def _concat(space, parts, info=None):
    points = [p for p, _ in parts]
    streams = [np.full(len(p), s, dtype=np.int64) for p, s in parts]
    if isinstance(space, CoordinateDomain):
        pts = np.concatenate(points) if points else np.empty((0, space.dim))
    else:
        pts = np.concatenate(points) if points else np.empty(0, dtype=np.int64)
    return ParticleMeasure(space, pts, None, np.concatenate(streams), info)


class _AliasTable:
    """Walker/Vose alias table over the cells with positive probability."""

    def __init__(self, probs):
        probs = np.asarray(probs, dtype=float)
        self.cells = np.flatnonzero(probs > 0)
        p = probs[self.cells] / probs[self.cells].sum()
        k = p.size
        scaled = p * k
        prob = np.ones(k)
        alias = np.arange(k)
        small = [i for i in range(k) if scaled[i] < 1.0]
        large = [i for i in range(k) if scaled[i] >= 1.0]
        while small and large:
            s, g = small.pop(), large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = (scaled[g] + scaled[s]) - 1.0
            (small if scaled[g] < 1.0 else large).append(g)
        self.prob = prob
        self.alias = alias

    def draw(self, rng, size):
        return _alias_pick(rng.random(size), self.prob, self.alias, self.cells)


@numba.njit(cache=True, nogil=True)
def _alias_pick(u, prob, alias, cells):
    k = prob.size
    out = np.empty(u.size, dtype=np.int64)
    for i in range(u.size):
        x = u[i] * k
        j = min(int(x), k - 1)
        out[i] = cells[j] if x - j < prob[j] else cells[alias[j]]
    return out


def _cell_probabilities(m: GridMeasure):
    masses = m.masses
    total = math.fsum(masses)
    if total <= 0:
        raise ZeroMassSampling("cannot sample from a measure with zero total mass")
    return masses / total


def sample_grid(m: GridMeasure, cfg: SamplerConfig) -> ParticleMeasure:
    """Draw ``cfg.n_samples`` cells i.i.d. with probability proportional to mass."""
    table = _AliasTable(_cell_probabilities(m))
    parts = _run_streams(cfg, lambda s, rng, n: (table.draw(rng, n), s))
    return _concat(m.space, parts)


class ProductLognormal:
    """Independent lognormal coordinates: ``log x_j ~ Normal(log c_j, s_j)``.

    Drawn as ``c_j * exp(s_j * z)`` with standard normal ``z``, so a zero
    spread reproduces the centre exactly.
    """

    def __init__(self, names, centers, sigmas):
        self.domain = CoordinateDomain(tuple(names))
        self.centers = np.asarray(centers, dtype=float)
        self.sigmas = np.asarray(sigmas, dtype=float)
        shape = (self.domain.dim,)
        if self.centers.shape != shape or self.sigmas.shape != shape:
            raise ValueError("need one centre and one sigma per coordinate")
        if np.any(self.centers <= 0) or np.any(self.sigmas < 0):
            raise ValueError("centres must be > 0 and sigmas >= 0")

    def __repr__(self):
        return f"ProductLognormal({self.domain.names}, {self.centers.tolist()}, {self.sigmas.tolist()})"

    def draw(self, rng, size):
        z = rng.standard_normal((size, self.domain.dim))
        return self.centers * np.exp(self.sigmas * z)


def sample_source(source, cfg: SamplerConfig) -> ParticleMeasure:
    """``cfg.n_samples`` draws from any object with ``domain`` and ``draw``."""
    parts = _run_streams(cfg, lambda s, rng, n: (source.draw(rng, n), s))
    return _concat(source.domain, parts)


def _batch(need, rate):
    want = int(1.1 * need / max(rate, 1e-12)) + 64
    return int(min(max(want, _MIN_BATCH), _MAX_BATCH))


def _take(accepted_idx, need):
    """Number of attempts consumed to collect ``need`` of the accepted indices."""
    if accepted_idx.size >= need:
        return accepted_idx[:need], int(accepted_idx[need - 1]) + 1
    return accepted_idx, None


def _check_probability(m: GridMeasure, name: str):
    if not m.is_probability:
        raise NotProbability(f"{name} must be a probability measure")


def coincidence_intersect(p1: GridMeasure, p2: GridMeasure, cfg: SamplerConfig) -> ParticleMeasure:
    """Sample ``p1 ∩ p2`` by drawing pairs and keeping coincident cells.

    Each attempt draws one cell from each measure; the cell is kept only when
    both draws land in the same cell.  Sampling stops after ``n_samples``
    acceptances.  With equal cell volumes (equal-area tiles) this is the
    whole procedure.  When volumes differ, a coincidence in cell ``i`` is
    further kept with probability ``min(vol) / vol[i]``, since coincidences
    alone occur with probability proportional to the product of cell masses
    while the intersection weights cell ``i`` by that product over ``vol[i]``.  The exact intersection is computed first so disjoint
    supports fail fast with :class:`ZeroOverlap`.

    ``info`` records ``attempts``, ``accepted`` and ``acceptance_rate``.
    """
    _check_probability(p1, "p1")
    _check_probability(p2, "p2")
    intersect(p1, p2)  # raises ZeroOverlap / SpaceMismatch
    q1, q2 = _cell_probabilities(p1), _cell_probabilities(p2)
    t1, t2 = _AliasTable(q1), _AliasTable(q2)
    vol = p1.space.volumes
    # unequal cells: keep a coincidence in cell i with probability min(vol) / vol[i]
    thin = None if np.all(vol == vol[0]) else vol.min() / vol
    rate = math.fsum(q1 * q2 * (1.0 if thin is None else thin))
    budget = max(cfg.max_attempts // cfg.streams, 1)

    def work(s, rng, need):
        got, attempts = [], 0
        while need > 0:
            size = min(_batch(need, rate), budget - attempts)
            if size <= 0:
                raise AttemptBudgetExhausted(
                    f"stream {s} used its {budget} attempts with {need} acceptances missing"
                )
            a, b = t1.draw(rng, size), t2.draw(rng, size)
            same = a == b
            if thin is not None:
                same &= rng.random(size) < thin[a]
            hit, used = _take(np.flatnonzero(same), need)
            got.append(a[hit])
            need -= hit.size
            attempts += size if used is None else used
        return (np.concatenate(got) if got else np.empty(0, np.int64)), s, attempts

    results = _run_streams(cfg, work)
    attempts = sum(r[2] for r in results)
    out = _concat(p1.space, [(r[0], r[1]) for r in results])
    out.info.update(attempts=attempts, accepted=len(out), acceptance_rate=len(out) / attempts)
    return out


class _GridPrior:
    def __init__(self, prior: GridMeasure):
        self.space = prior.space
        self.table = _AliasTable(_cell_probabilities(prior))
        self.support = prior.masses > 0

    def draw(self, rng, size):
        return self.table.draw(rng, size)


def _likelihood_values(likelihood, points):
    if callable(likelihood):
        vals = np.asarray(likelihood(points), dtype=float)
    else:
        vals = np.asarray(likelihood, dtype=float)[points]
    return np.broadcast_to(vals, (len(points),))


def _pilot_max(source, likelihood, cfg: SamplerConfig):
    rng = stream_generator(cfg.seed, _PILOT_STREAM)
    best = None
    for _ in range(_PILOT_ROUNDS):
        vals = _likelihood_values(likelihood, source.draw(rng, PILOT_SIZE))
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise UnboundedLikelihood("likelihood is not finite and >= 0 on pilot samples")
        m = float(vals.max())
        if best is not None and m <= PILOT_HEADROOM * best:
            return max(best, m), float(vals.mean())
        best = m if best is None else max(best, m)
    raise UnboundedLikelihood(
        f"pilot maximum kept growing over {_PILOT_ROUNDS} rounds of {PILOT_SIZE} samples"
    )


def rejection_posterior(prior, likelihood, cfg: SamplerConfig) -> ParticleMeasure:
    """Thin prior samples with conservation probability ``k * L(x)``.

    Parameters
    ----------
    prior : GridMeasure, ParticleMeasure, or sampler
        A grid measure (sampled internally), an existing particle cloud
        (each particle is tested once), or any object with a ``domain``
        attribute and a ``draw(rng, size)`` method returning points.
    likelihood : array_like or callable
        Per-cell values for grid priors, or a function mapping an array of
        points to an array of nonnegative values.
    cfg : SamplerConfig
        ``n_samples`` is the number of conserved points requested (ignored
        for particle priors).  ``acceptance_scale="auto"`` uses ``1 / max L``
        over the prior support for grid priors, and ``1 / (1.2 * pilot max)``
        from a pilot run otherwise.

    Returns
    -------
    ParticleMeasure
        Conserved points.  ``info`` holds ``k``, ``attempts``, ``accepted``,
        ``acceptance_rate``, ``evidence`` (rate / k) and ``evidence_sigma``.
    """
    if isinstance(prior, GridMeasure):
        source = _GridPrior(prior)
        space = prior.space
        lik = np.asarray(likelihood(np.arange(len(space))) if callable(likelihood) else likelihood, dtype=float)
        if lik.shape != (len(space),):
            raise SpaceMismatch("likelihood must have one value per prior cell")
        if not np.all(np.isfinite(lik)) or np.any(lik < 0):
            raise UnboundedLikelihood("likelihood values must be finite and >= 0")
        lmax = float(lik[source.support].max())
        exact_rate = math.fsum(_cell_probabilities(prior) * lik)
        likelihood = lik
    elif isinstance(prior, ParticleMeasure):
        return _thin_particles(prior, likelihood, cfg)
    else:
        source = prior
        space = prior.domain
        lmax = None
        exact_rate = None

    k = cfg.acceptance_scale
    if k == "auto":
        if lmax is None:
            pilot_max, pilot_mean = _pilot_max(source, likelihood, cfg)
            lmax = PILOT_HEADROOM * pilot_max
            exact_rate = pilot_mean
        if lmax <= 0:
            raise ZeroAcceptance("the likelihood vanishes on the prior support")
        k = 1.0 / lmax
    elif lmax is not None and k * lmax > 1.0:
        raise UnboundedLikelihood(f"k * max(L) = {k * lmax!r} exceeds 1")
    k = float(k)
    rate_guess = k * exact_rate if exact_rate else 0.01
    budget = max(cfg.max_attempts // cfg.streams, 1)

    def work(s, rng, need):
        got, attempts = [], 0
        while need > 0:
            size = min(_batch(need, rate_guess), budget - attempts)
            if size <= 0:
                if not got or sum(len(g) for g in got) == 0:
                    raise ZeroAcceptance(f"no point conserved in {budget} attempts (stream {s})")
                raise AttemptBudgetExhausted(
                    f"stream {s} used its {budget} attempts with {need} acceptances missing"
                )
            pts = source.draw(rng, size)
            vals = _likelihood_values(likelihood, pts)
            keep_p = k * vals
            if not np.all(keep_p <= 1.0 + 1e-12):
                raise UnboundedLikelihood(
                    f"conservation probability {float(np.nanmax(keep_p))!r} exceeds 1; "
                    "the likelihood bound was underestimated"
                )
            hit, used = _take(np.flatnonzero(rng.random(size) < keep_p), need)
            got.append(pts[hit])
            need -= hit.size
            attempts += size if used is None else used
        if got:
            pts = np.concatenate(got)
        else:
            pts = np.empty((0, space.dim)) if isinstance(space, CoordinateDomain) else np.empty(0, np.int64)
        return pts, s, attempts

    results = _run_streams(cfg, work)
    attempts = sum(r[2] for r in results)
    out = _concat(space, [(r[0], r[1]) for r in results])
    rate = len(out) / attempts
    out.info.update(
        k=k,
        attempts=attempts,
        accepted=len(out),
        acceptance_rate=rate,
        evidence=rate / k,
        evidence_sigma=math.sqrt(rate * (1 - rate) / attempts) / k,
    )
    return out


def _thin_particles(prior: ParticleMeasure, likelihood, cfg: SamplerConfig) -> ParticleMeasure:
    vals = _likelihood_values(likelihood, prior.points)
    if not np.all(np.isfinite(vals)) or np.any(vals < 0):
        raise UnboundedLikelihood("likelihood values must be finite and >= 0")
    k = cfg.acceptance_scale
    if k == "auto":
        if vals.max() <= 0:
            raise ZeroAcceptance("the likelihood vanishes on every particle")
        k = 1.0 / float(vals.max())
    elif np.any(k * vals > 1.0):
        raise UnboundedLikelihood("k * L exceeds 1 on some particle")
    rng = stream_generator(cfg.seed, 0)
    keep = rng.random(len(prior)) < k * vals
    if not keep.any():
        raise ZeroAcceptance("no particle conserved")
    rate = keep.mean()
    out = ParticleMeasure(prior.space, prior.points[keep], prior.weights[keep], prior.streams[keep])
    out.info.update(
        k=k,
        attempts=len(prior),
        accepted=int(keep.sum()),
        acceptance_rate=float(rate),
        evidence=float(rate) / k,
        evidence_sigma=math.sqrt(rate * (1 - rate) / len(prior)) / k,
    )
    return out


def transport(p: ParticleMeasure, phi) -> ParticleMeasure:
    """Move every particle through ``phi``; weights and stream tags are kept."""
    if isinstance(phi, CellMapping):
        if not p.is_cellular or p.space != phi.domain:
            raise SpaceMismatch("particles are not on the mapping's domain")
        pts = phi.apply(p.points)
    elif isinstance(phi, ExprMapping):
        if p.is_cellular or p.space.names != phi.domain.names:
            raise SpaceMismatch(
                f"particles on {p.space!r} do not match mapping inputs {phi.domain.names}"
            )
        pts = phi.apply(p.points)
    else:
        raise TypeError("phi must be a CellMapping or an ExprMapping")
    return ParticleMeasure(phi.codomain, pts, p.weights.copy(), p.streams.copy(), p.info)


def bin_particles(p: ParticleMeasure, target: Space):
    """Per-cell particle weight on ``target`` and the out-of-range weight count.

    Cell particles must already live on ``target``.  One-dimensional
    coordinate particles are binned by ``target.edges`` (half-open cells).
    Returns ``(cell_weights, out_of_range)`` where ``out_of_range`` is the
    number of particles outside every cell.
    """
    if p.is_cellular:
        if p.space != target:
            raise SpaceMismatch("particles live on a different space than the target")
        return np.bincount(p.points, weights=p.weights, minlength=len(target)), 0
    if p.space.dim != 1 or target.edges is None:
        raise SpaceMismatch("coordinate particles need a 1-D target space with edges")
    x = p.points[:, 0]
    idx = np.searchsorted(target.edges, x, side="right") - 1
    inside = (idx >= 0) & (idx < len(target))
    w = np.bincount(idx[inside], weights=p.weights[inside], minlength=len(target))
    return w, int((~inside).sum())


def histogram(p: ParticleMeasure, target: Space) -> GridMeasure:
    """Empirical probability measure of a particle cloud on ``target``.

    Particles outside every cell are excluded from the normalisation and
    reported through a :class:`RuntimeWarning`.
    """
    if len(p) == 0:
        raise EmptyCloud("cannot histogram an empty cloud")
    w, out_of_range = bin_particles(p, target)
    if out_of_range:
        warnings.warn(
            f"{out_of_range} particle(s) fell outside the target cells (out_of_range)",
            RuntimeWarning,
            stacklevel=2,
        )
    total = math.fsum(w)
    if total <= 0:
        raise EmptyCloud("no particle weight inside the target cells")
    return GridMeasure.from_masses(target, w / total, "probability")


def tv_distance(a: GridMeasure, b: GridMeasure) -> float:
    """Total variation distance ``0.5 * sum |p_i - q_i|`` of cell probabilities."""
    if a.space != b.space:
        raise SpaceMismatch("measures live on different spaces")
    for m in (a, b):
        if not m.is_probability:
            raise NotProbability(f"total mass {total_mass(m)!r} is not 1")
    return 0.5 * math.fsum(np.abs(a.masses - b.masses))


def particle_probability(p: ParticleMeasure, e: CellSet) -> float:
    """Weighted fraction of cell particles that fall in ``e``."""
    if not p.is_cellular or e.space != p.space:
        raise SpaceMismatch("cell set and particles live on different spaces")
    total = p.total_weight
    if total <= 0:
        raise EmptyCloud("cloud has no weight")
    return math.fsum(p.weights[e.mask[p.points]]) / total
