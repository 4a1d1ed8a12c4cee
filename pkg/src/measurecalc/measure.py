"""Measures given by a density over a space's base measure.

A :class:`GridMeasure` stores one Radon-Nikodym density value per cell, so
``m[F] = sum_{i in F} density[i] * volume[i]``.  The intersection of two
measures multiplies their densities cellwise and divides by a normalisation
constant chosen by :class:`NormalizationMode`.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import (
    EmptySetRenormalize,
    ForeignCellSet,
    InvalidDensity,
    NotProbability,
    SpaceMismatch,
    ZeroOverlap,
    ZeroProbabilityConditioning,
)
from .space import CellSet, Space

__all__ = [
    "PROBABILITY_TOL",
    "NormalizationMode",
    "GridMeasure",
    "total_mass",
    "measure_of",
    "measure_set",
    "uniform",
    "intersect",
    "intersection_constant",
    "measure_set_overlap_constant",
    "condition",
    "normalize",
    "support",
]

#: absolute tolerance on the total mass of a probability measure
PROBABILITY_TOL = 1e-12


class NormalizationMode(str, enum.Enum):
    """How the constant ``n`` of an intersection or reciprocal image is chosen.

    ``UNIT_CONSTANT`` takes ``n = 1`` (arbitrary measures); ``RENORMALIZE``
    takes ``n`` equal to the total mass of the unnormalised result so the
    output is a probability measure.
    """

    UNIT_CONSTANT = "unit_constant"
    RENORMALIZE = "renormalize"


def _mode(mode) -> NormalizationMode:
    try:
        return NormalizationMode(mode)
    except ValueError:
        raise ValueError(
            f"unknown normalization mode {mode!r}; "
            f"expected one of {[m.value for m in NormalizationMode]}"
        ) from None


class GridMeasure:
    """Measure absolutely continuous w.r.t. the base measure of a Space.

    Parameters
    ----------
    space : Space
    density : array_like
        Nonnegative finite density, one value per cell.
    kind : {"raw", "probability"}
        ``"probability"`` asserts total mass 1 within :data:`PROBABILITY_TOL`.
    """

    __slots__ = ("space", "density", "kind")

    def __init__(self, space: Space, density, kind: str = "raw"):
        density = np.array(density, dtype=float)
        if density.shape != (len(space),):
            raise InvalidDensity(
                f"density has {density.size} values but the space has {len(space)} cells"
            )
        if not np.all(np.isfinite(density)) or np.any(density < 0):
            raise InvalidDensity("density values must be finite and >= 0")
        if kind not in ("raw", "probability"):
            raise ValueError(f"kind must be 'raw' or 'probability', not {kind!r}")
        density.setflags(write=False)
        self.space = space
        self.density = density
        self.kind = kind
        if kind == "probability":
            mass = total_mass(self)
            if abs(mass - 1.0) > PROBABILITY_TOL:
                raise NotProbability(f"total mass {mass!r} is not 1")

    @classmethod
    def from_masses(cls, space: Space, masses, kind: str = "raw") -> "GridMeasure":
        """Measure with the given per-cell masses (density times volume)."""
        return cls(space, np.asarray(masses, dtype=float) / space.volumes, kind)

    @property
    def masses(self) -> np.ndarray:
        """Per-cell measure ``density * volume``."""
        return self.density * self.space.volumes

    @property
    def is_probability(self) -> bool:
        return abs(total_mass(self) - 1.0) <= PROBABILITY_TOL

    def __repr__(self):
        return (
            f"GridMeasure({self.kind}, {len(self.space)} cells, "
            f"mass={total_mass(self):.6g})"
        )

    def __getitem__(self, f: CellSet) -> float:
        return measure_of(self, f)


def _same_space(a: Space, b: Space, what="measures"):
    if a != b:
        raise SpaceMismatch(f"{what} live on different spaces: {a!r} vs {b!r}")


def total_mass(m: GridMeasure) -> float:
    return math.fsum(m.density * m.space.volumes)


def measure_of(m: GridMeasure, f: CellSet) -> float:
    """``m[F]``: integral of the density over the cells of ``f``."""
    if f.space != m.space:
        raise ForeignCellSet("cell set does not belong to the measure's space")
    idx = list(f.members)
    return math.fsum(m.density[idx] * m.space.volumes[idx])


def support(m: GridMeasure) -> CellSet:
    """Cells where the density is nonzero."""
    return CellSet(m.space, np.flatnonzero(m.density > 0))


def uniform(space: Space) -> GridMeasure:
    """The base measure normalised to a probability measure."""
    return measure_set(space, space.all(), NormalizationMode.RENORMALIZE)


def normalize(m: GridMeasure) -> GridMeasure:
    mass = total_mass(m)
    if mass == 0:
        raise NotProbability("cannot normalise a zero measure")
    return GridMeasure(m.space, m.density / mass, "probability")


def measure_set(s: Space, a: CellSet, mode=NormalizationMode.RENORMALIZE) -> GridMeasure:
    """Measure whose density is the indicator of ``a`` divided by ``n_A``.

    ``n_A = 1`` in unit-constant mode; ``n_A`` is the volume of ``a`` in
    renormalize mode, which makes the result a probability measure.
    """
    mode = _mode(mode)
    if a.space != s:
        raise ForeignCellSet("cell set does not belong to this space")
    chi = a.mask.astype(float)
    if mode is NormalizationMode.UNIT_CONSTANT:
        return GridMeasure(s, chi, "raw")
    if not a:
        raise EmptySetRenormalize("cannot renormalise the measure-set of an empty set")
    n_a = math.fsum(s.volumes[list(a.members)])
    return GridMeasure(s, chi / n_a, "probability")


def intersection_constant(nu1: GridMeasure, nu2: GridMeasure) -> float:
    """Integral of the first density against the second measure."""
    _same_space(nu1.space, nu2.space)
    return math.fsum(nu1.density * nu2.density * nu1.space.volumes)


def intersect(nu1: GridMeasure, nu2: GridMeasure, mode=NormalizationMode.RENORMALIZE) -> GridMeasure:
    """Intersection of two measures: cellwise density product over ``n``.

    Raises
    ------
    SpaceMismatch
        The measures live on different spaces.
    ZeroOverlap
        ``n == 0`` in renormalize mode.
    """
    mode = _mode(mode)
    _same_space(nu1.space, nu2.space)
    product = nu1.density * nu2.density
    if mode is NormalizationMode.UNIT_CONSTANT:
        return GridMeasure(nu1.space, product, "raw")
    n = math.fsum(product * nu1.space.volumes)
    if n == 0:
        raise ZeroOverlap("the two measures have no overlapping mass")
    if not math.isfinite(n):
        raise InvalidDensity("intersection normalisation constant is not finite")
    return GridMeasure(nu1.space, product / n, "probability")


def measure_set_overlap_constant(s: Space, a: CellSet, b: CellSet, mode) -> float:
    """The ``k`` in ``mu_A ∩ mu_B = k * mu_{A∩B}``: ``n_{A∩B} / (n_A n_B)``."""
    mode = _mode(mode)
    if mode is NormalizationMode.UNIT_CONSTANT:
        return 1.0
    vol = s.volumes
    n_a = math.fsum(vol[list(a.members)])
    n_b = math.fsum(vol[list(b.members)])
    n_ab = math.fsum(vol[list((a & b).members)])
    return n_ab / (n_a * n_b)


def condition(nu: GridMeasure, a: CellSet) -> GridMeasure:
    """Conditional probability measure ``nu[. | A]`` as ``nu ∩ mu_A``."""
    if not nu.is_probability:
        raise NotProbability("conditioning requires a probability measure")
    if a.space != nu.space:
        raise ForeignCellSet("cell set does not belong to the measure's space")
    if not a or measure_of(nu, a) == 0:
        raise ZeroProbabilityConditioning(f"the measure gives zero mass to {a!r}")
    return intersect(nu, measure_set(nu.space, a, NormalizationMode.RENORMALIZE))
