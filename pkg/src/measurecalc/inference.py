"""Inverse problems: prior, observation and forward map to posteriors.

Given a prior ``pi_prior`` on the model space, an observation ``tau_obs`` on
the data space and a forward map ``phi``, the model posterior is
``pi_prior ∩ phi^-1[tau_obs]`` and the data posterior is its image
``phi[pi_post]``, which equals ``phi[pi_prior] ∩ tau_obs``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import InconsistentOracles, SpaceMismatch, ZeroEvidence
from .mapping import CellMapping, ExprMapping, image, preimage, pullback, pushforward
from .measure import (
    GridMeasure,
    NormalizationMode,
    _mode,
    intersect,
    measure_of,
    measure_set,
    support,
    total_mass,
)
from .sampling import (
    ParticleMeasure,
    SamplerConfig,
    particle_probability,
    rejection_posterior,
    transport,
)
from .space import CellSet

__all__ = [
    "InferenceProblem",
    "Posterior",
    "SetInference",
    "likelihood",
    "solve_exact",
    "solve_sampled",
    "posterior_probability",
    "data_probability",
    "set_inference_demo",
]


@dataclass(frozen=True)
class InferenceProblem:
    """Prior on the model space, observation on the data space, forward map.

    ``prior`` is a :class:`GridMeasure` on ``forward.domain`` for grid
    problems.  With an :class:`ExprMapping` it is a sampler (an object with a
    ``domain`` and ``draw(rng, size)``) or a :class:`ParticleMeasure`.
    ``observed`` is a :class:`GridMeasure` on ``forward.codomain``; for
    analytic maps it may live on a 1-D interval space (a space with edges),
    or be a callable returning the observed density at data points.
    """

    prior: object
    observed: object
    forward: Union[CellMapping, ExprMapping]
    mode: NormalizationMode = NormalizationMode.RENORMALIZE

    def __post_init__(self):
        object.__setattr__(self, "mode", _mode(self.mode))
        if self.mode is not NormalizationMode.RENORMALIZE:
            raise ValueError("the inference workflow works with probability measures only")
        fwd = self.forward
        if isinstance(self.prior, GridMeasure):
            if not isinstance(fwd, CellMapping) or self.prior.space != fwd.domain:
                raise SpaceMismatch("grid prior must live on the forward map's domain")
            if total_mass(self.prior) <= 0:
                raise ZeroEvidence("prior has zero total mass")
        if isinstance(self.observed, GridMeasure):
            if total_mass(self.observed) <= 0:
                raise ZeroEvidence("observation has zero total mass")
            if isinstance(fwd, CellMapping) and self.observed.space != fwd.codomain:
                raise SpaceMismatch("observation must live on the forward map's codomain")
            if isinstance(fwd, ExprMapping):
                if self.observed.space.edges is None or fwd.codomain.dim != 1:
                    raise SpaceMismatch(
                        "with an analytic map the observation needs a 1-D interval space"
                    )
        elif not callable(self.observed):
            raise TypeError("observed must be a GridMeasure or a callable density")

    @property
    def model_space(self):
        return self.forward.domain

    @property
    def data_space(self):
        return self.forward.codomain

    def observed_density(self, y) -> np.ndarray:
        """Observed density (w.r.t. the data-space volume measure) at ``y``.

        ``y`` is an array of codomain cell indices for grid problems, or an
        ``(n, q)`` array of data coordinates for analytic ones.
        """
        obs = self.observed
        if not isinstance(obs, GridMeasure):
            return np.asarray(obs(y), dtype=float)
        if isinstance(self.forward, CellMapping):
            return obs.density[np.asarray(y, dtype=np.int64)]
        y = np.asarray(y, dtype=float)[:, 0]
        edges = obs.space.edges
        idx = np.searchsorted(edges, y, side="right") - 1
        inside = (idx >= 0) & (idx < len(obs.space))
        out = np.zeros(y.shape)
        out[inside] = obs.density[idx[inside]]
        return out

    def likelihood_values(self, x) -> np.ndarray:
        """Vectorised likelihood ``x -> (dtau/dnu)(phi(x))``."""
        return self.observed_density(self.forward.apply(x))


@dataclass(frozen=True)
class Posterior:
    """Model and data posteriors with their normalisation constant.

    Grid solutions carry ``compat_gap`` (largest cellwise gap between the
    image of the model posterior and ``phi[pi_prior] ∩ tau_obs``); sampled
    solutions carry the acceptance bookkeeping.
    """

    model_posterior: Union[GridMeasure, ParticleMeasure]
    data_posterior: Union[GridMeasure, ParticleMeasure]
    evidence: float
    compat_gap: Optional[float] = None
    acceptance_rate: Optional[float] = None
    evidence_sigma: Optional[float] = None
    k: Optional[float] = None

    def summary(self) -> dict:
        out = {"evidence": self.evidence}
        if self.acceptance_rate is not None:
            out["acceptance_rate"] = self.acceptance_rate
        if self.compat_gap is not None:
            out["compat_gap"] = self.compat_gap
        return out


def likelihood(problem: InferenceProblem, x):
    """Likelihood at a model cell index / coordinate vector, or at an array of them."""
    if isinstance(problem.forward, CellMapping):
        arr = np.asarray(x, dtype=np.int64)
        vals = problem.likelihood_values(arr.reshape(-1))
        return float(vals[0]) if arr.ndim == 0 else vals
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        return float(problem.likelihood_values(arr[None, :])[0])
    return problem.likelihood_values(arr)


def solve_exact(problem: InferenceProblem) -> Posterior:
    """Grid posterior through the measure algebra.

    Raises
    ------
    ZeroEvidence
        The observation gives no weight to the image of the prior.
    """
    prior, obs, phi = problem.prior, problem.observed, problem.forward
    if not (isinstance(prior, GridMeasure) and isinstance(phi, CellMapping)):
        raise TypeError("solve_exact needs a grid prior and a cell mapping; use solve_sampled")
    lik = obs.density[phi.table]
    n = math.fsum(prior.masses * lik)
    if n == 0:
        raise ZeroEvidence("the observation is incompatible with the prior through the forward map")
    model = intersect(prior, pullback(obs, phi, problem.mode), problem.mode)
    data = pushforward(model, phi)
    direct = intersect(pushforward(prior, phi), obs, problem.mode)
    gap = float(np.max(np.abs(data.density - direct.density)))
    return Posterior(model, data, n, compat_gap=gap)


def solve_sampled(problem: InferenceProblem, cfg: SamplerConfig) -> Posterior:
    """Posterior samples by rejection: thin prior draws with probability ``k L(x)``."""
    prior, phi = problem.prior, problem.forward
    if isinstance(prior, GridMeasure):
        lik = problem.likelihood_values(np.arange(len(prior.space)))
        cloud = rejection_posterior(prior, lik, cfg)
    else:
        cloud = rejection_posterior(prior, problem.likelihood_values, cfg)
    data = transport(cloud, phi)
    info = cloud.info
    return Posterior(
        cloud,
        data,
        info["evidence"],
        acceptance_rate=info["acceptance_rate"],
        evidence_sigma=info["evidence_sigma"],
        k=info["k"],
    )


def _probability(m, e: CellSet) -> float:
    if isinstance(m, GridMeasure):
        return measure_of(m, e) / total_mass(m)
    return particle_probability(m, e)


def posterior_probability(post: Posterior, e: CellSet) -> float:
    """``pi_post[E]``: exact for grid posteriors, particle fraction otherwise."""
    return _probability(post.model_posterior, e)


def data_probability(post: Posterior, f: CellSet) -> float:
    """``tau_post[F]``."""
    return _probability(post.data_posterior, f)


@dataclass(frozen=True)
class SetInference:
    x_post: CellSet
    y_post: CellSet


def set_inference_demo(x_prior: CellSet, y_obs: CellSet, phi: CellMapping) -> SetInference:
    """Set-level inference, computed by set operations and by measure-sets.

    The direct route is ``X_post = X_prior ∩ phi^-1[Y_obs]`` and
    ``Y_post = phi[X_prior] ∩ Y_obs``.  The measure route takes supports of
    the same pipeline run on unit-constant measure-sets.  Both routes must
    agree with each other and with ``Y_post == phi[X_post]``.
    """
    x_post = x_prior & preimage(phi, y_obs)
    y_post = image(phi, x_prior) & y_obs

    unit = NormalizationMode.UNIT_CONSTANT
    mu_a = measure_set(phi.domain, x_prior, unit)
    nu_b = measure_set(phi.codomain, y_obs, unit)
    x_meas = support(intersect(mu_a, pullback(nu_b, phi, unit), unit))
    y_meas = support(intersect(pushforward(mu_a, phi), nu_b, unit))
    y_img = image(phi, x_post)

    if x_meas != x_post or y_meas != y_post or y_img != y_post:
        raise InconsistentOracles(
            f"set route ({x_post}, {y_post}) disagrees with measure route "
            f"({x_meas}, {y_meas}) or image {y_img}"
        )
    return SetInference(x_post, y_post)
