"""Built-in worked examples.

* :func:`run_resistance_demo` propagates lognormal voltage and current
  uncertainties through ``R = V / I`` by transporting samples, and compares
  with the closed-form lognormal image.
* :func:`run_sphere_demo` runs the tile-coincidence sampler for two
  densities on the sphere at several equal-area tilings and measures the
  distance to the normalised product density.
* :func:`run_sets_demo` draws a random set-level inference instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .inference import SetInference, set_inference_demo
from .mapping import CellMapping, ExprMapping
from .measure import GridMeasure, intersect
from .sampling import (
    ParticleMeasure,
    ProductLognormal,
    SamplerConfig,
    coincidence_intersect,
    histogram,
    sample_source,
    stream_generator,
    transport,
    tv_distance,
)
from .space import CellSet, log_interval_space, make_space
from .sphere import SphereTiling, VonMisesFisher, tile_integrals

__all__ = [
    "ResistanceReport",
    "SphereReport",
    "SetsReport",
    "lognormal_density",
    "resistance_density_by_slack",
    "lognormal_cell_probabilities",
    "run_resistance_demo",
    "run_sphere_demo",
    "run_sets_demo",
    "DEFAULT_SPHERE_TILINGS",
    "DEFAULT_SPHERE_DENSITIES",
]


# ---------------------------------------------------------------- resistance


def lognormal_density(r, r0: float, sigma: float):
    """Lognormal density in ``r`` (w.r.t. ``dr``) with median ``r0``."""
    r = np.asarray(r, dtype=float)
    return np.exp(-np.log(r / r0) ** 2 / (2 * sigma**2)) / (math.sqrt(2 * math.pi) * sigma * r)


def _vi_density(v, i, v0, i0, sv, si):
    return (
        np.exp(-np.log(v / v0) ** 2 / (2 * sv**2) - np.log(i / i0) ** 2 / (2 * si**2))
        / (2 * math.pi * sv * si * v * i)
    )


def resistance_density_by_slack(r: float, v0, i0, sigma_v, sigma_i, slack: str = "VI") -> float:
    """Density of ``R = V / I`` obtained by integrating out a slack variable.

    With ``slack="VI"`` the change of variables is ``(V, I) -> (R, P = V I)``
    (Jacobian ``1 / (2R)``); with ``slack="V"`` it is ``(V, I) -> (R, V)``
    (Jacobian ``V / R**2``).  The slack integral runs in log coordinates.
    """

    def f(v, i):
        return _vi_density(v, i, v0, i0, sigma_v, sigma_i)

    if slack == "VI":
        def integrand(t):
            p = math.exp(t)
            return f(math.sqrt(r * p), math.sqrt(p / r)) / (2 * r) * p
        centre = math.log(v0 * i0)
    elif slack == "V":
        def integrand(t):
            v = math.exp(t)
            return f(v, v / r) * v / r**2 * v
        centre = math.log(v0)
    else:
        raise ValueError("slack must be 'VI' or 'V'")
    width = 12 * (sigma_v + sigma_i)
    val, _ = integrate.quad(integrand, centre - width, centre + width, limit=200, epsabs=0, epsrel=1e-11)
    return val


def lognormal_cell_probabilities(edges, center: float, sigma: float) -> np.ndarray:
    """Probability of each interval ``[e_i, e_{i+1})`` under a lognormal law."""
    z = (np.log(np.asarray(edges, dtype=float)) - math.log(center)) / sigma
    cdf = ndtr(z)
    return np.diff(cdf)


@dataclass(frozen=True)
class ResistanceReport:
    R0_hat: float
    sigmaR_hat: float
    R0_expected: float
    sigmaR_expected: float
    tv_lognormal: float
    n: int
    samples: ParticleMeasure = field(repr=False)
    histogram: GridMeasure = field(repr=False)
    expected: GridMeasure = field(repr=False)

    def summary(self) -> dict:
        return {
            "R0_hat": self.R0_hat,
            "sigmaR_hat": self.sigmaR_hat,
            "R0_expected": self.R0_expected,
            "sigmaR_expected": self.sigmaR_expected,
            "tv": self.tv_lognormal,
        }


def run_resistance_demo(
    v0: float = 10.0,
    i0: float = 2.0,
    sigma_v: float = 0.3,
    sigma_i: float = 0.4,
    cfg: SamplerConfig | None = None,
    grid_cells: int = 48,
    grid_halfwidth: float = 6.0,
) -> ResistanceReport:
    """Propagate lognormal (V, I) uncertainty to ``R = V / I`` by sampling.

    The fitted ``R0_hat = exp(mean log R)`` and ``sigmaR_hat = std log R`` are
    compared with ``V0 / I0`` and ``sqrt(sigma_V**2 + sigma_I**2)``.  The
    sample histogram on a logarithmic grid spanning ``grid_halfwidth``
    standard deviations is compared in total variation with the lognormal
    image law (its cell probabilities renormalised to the grid).
    """
    cfg = cfg or SamplerConfig(seed=1, n_samples=1_000_000)
    if cfg.n_samples < 10_000:
        raise ValueError("the resistance demo needs at least 10^4 samples")
    vi = sample_source(ProductLognormal(("V", "I"), (v0, i0), (sigma_v, sigma_i)), cfg)
    r_cloud = transport(vi, ExprMapping(vi.space, {"R": "V/I"}))
    log_r = np.log(r_cloud.points[:, 0])
    r0_hat = math.exp(float(np.mean(log_r)))
    s_hat = float(np.std(log_r))
    r0 = v0 / i0
    s = math.hypot(sigma_v, sigma_i)

    if s > 0:
        edges = r0 * np.exp(np.linspace(-grid_halfwidth * s, grid_halfwidth * s, grid_cells + 1))
        grid = log_interval_space(edges, name="R")
        probs = lognormal_cell_probabilities(edges, r0, s)
        expected = GridMeasure.from_masses(grid, probs / probs.sum(), "probability")
        hist = histogram(r_cloud, grid)
        tv = tv_distance(hist, expected)
    else:
        grid = log_interval_space([r0 / 2, r0 * 2], name="R")
        expected = GridMeasure(grid, [1.0 / grid.volumes[0]], "probability")
        hist = histogram(r_cloud, grid)
        tv = tv_distance(hist, expected)
    return ResistanceReport(r0_hat, s_hat, r0, s, tv, len(r_cloud), r_cloud, hist, expected)


# ---------------------------------------------------------------- sphere

DEFAULT_SPHERE_TILINGS = ("8x8", "8x16", "16x16")
DEFAULT_SPHERE_DENSITIES = (
    {"kind": "vmf", "lat": 25.0, "lon": 17.0, "kappa": 4.0},
    {"kind": "vmf", "lat": -25.0, "lon": 37.0, "kappa": 4.0},
)


class _Cap:
    """Uniform density on a spherical cap of angular radius ``radius_deg``."""

    def __init__(self, lat, lon, radius_deg):
        from .sphere import unit_vector

        self.centre = unit_vector(lat, lon)
        self.cos_r = math.cos(math.radians(radius_deg))
        self.value = 1.0 / (2 * math.pi * (1 - self.cos_r))

    def __call__(self, xyz):
        return np.where(np.asarray(xyz) @ self.centre >= self.cos_r, self.value, 0.0)


def sphere_density(spec):
    """Density from a spec dict: ``uniform``, ``vmf`` or ``cap``."""
    spec = dict(spec)
    kind = spec.pop("kind", "vmf")
    if kind == "uniform":
        return VonMisesFisher([0.0, 0.0, 1.0], 0.0)
    if kind == "vmf":
        return VonMisesFisher.at(spec["lat"], spec["lon"], spec["kappa"])
    if kind == "cap":
        return _Cap(spec["lat"], spec["lon"], spec["radius"])
    raise ValueError(f"unknown sphere density kind {kind!r}")


@dataclass(frozen=True)
class SphereResolution:
    tiling: str
    n_tiles: int
    tile_area: float
    tv_to_product: float
    tv_to_grid_intersection: float
    acceptance_rate: float
    attempts: int
    histogram: GridMeasure = field(repr=False)
    product: GridMeasure = field(repr=False)


@dataclass(frozen=True)
class SphereReport:
    resolutions: list

    def summary(self) -> dict:
        out = {}
        for r in self.resolutions:
            out[f"tv_to_product[{r.tiling}]"] = r.tv_to_product
            out[f"acceptance_rate[{r.tiling}]"] = r.acceptance_rate
        return out


def _tile_measure(space, masses):
    masses = np.asarray(masses, dtype=float)
    masses = np.where(masses > 0, masses, 0.0)
    return GridMeasure.from_masses(space, masses / masses.sum(), "probability")


def run_sphere_demo(
    resolutions: Sequence = DEFAULT_SPHERE_TILINGS,
    f1_spec=DEFAULT_SPHERE_DENSITIES[0],
    f2_spec=DEFAULT_SPHERE_DENSITIES[1],
    cfg: SamplerConfig | None = None,
    quadrature_order: int = 8,
) -> SphereReport:
    """Coincidence sampling of ``P1 ∩ P2`` on successively finer tilings.

    For each tiling, the tile probabilities of both densities are computed
    by quadrature, the coincidence sampler draws pairs of tiles until
    ``cfg.n_samples`` coincidences, and the histogram of accepted tiles is
    compared with the tile integrals of ``f1 f2 / int f1 f2 dS``.
    """
    cfg = cfg or SamplerConfig(seed=1, n_samples=1_000_000)
    f1, f2 = sphere_density(f1_spec), sphere_density(f2_spec)
    out = []
    for res in resolutions:
        tiling = res if isinstance(res, SphereTiling) else SphereTiling.parse(str(res))
        space = tiling.space()
        p1 = _tile_measure(space, tile_integrals(f1, tiling, quadrature_order))
        p2 = _tile_measure(space, tile_integrals(f2, tiling, quadrature_order))
        cloud = coincidence_intersect(p1, p2, cfg)
        hist = histogram(cloud, space)
        product = _tile_measure(
            space, tile_integrals(lambda x: f1(x) * f2(x), tiling, quadrature_order)
        )
        out.append(
            SphereResolution(
                str(tiling),
                tiling.n_tiles,
                tiling.tile_area,
                tv_distance(hist, product),
                tv_distance(hist, intersect(p1, p2)),
                cloud.info["acceptance_rate"],
                cloud.info["attempts"],
                hist,
                product,
            )
        )
    return SphereReport(out)


# ---------------------------------------------------------------- sets


@dataclass(frozen=True)
class SetsReport:
    x_prior: CellSet
    y_obs: CellSet
    mapping: CellMapping
    result: SetInference

    def summary(self) -> dict:
        return {
            "x_prior": " ".join(self.x_prior.labels),
            "y_obs": " ".join(self.y_obs.labels),
            "x_post": " ".join(self.result.x_post.labels),
            "y_post": " ".join(self.result.y_post.labels),
        }


def run_sets_demo(n_x: int = 8, n_y: int = 5, seed: int = 1) -> SetsReport:
    """Random set-level inference instance checked by both routes."""
    rng = stream_generator(seed, 0)
    x = make_space([f"x{i}" for i in range(n_x)], np.ones(n_x), name="X")
    y = make_space([f"y{j}" for j in range(n_y)], np.ones(n_y), name="Y")
    phi = CellMapping(x, y, rng.integers(0, n_y, n_x))
    x_prior = CellSet.from_mask(x, rng.random(n_x) < 0.6)
    y_obs = CellSet.from_mask(y, rng.random(n_y) < 0.5)
    return SetsReport(x_prior, y_obs, phi, set_inference_demo(x_prior, y_obs, phi))
