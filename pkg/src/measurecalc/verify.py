"""Randomized instance generators and the compatibility verification suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroOverlap, ZeroPullbackMass
from .mapping import CellMapping, check_compatibility
from .measure import GridMeasure, NormalizationMode, normalize
from .sampling import stream_generator
from .space import Space

__all__ = [
    "random_space",
    "random_density",
    "random_measure",
    "random_mapping",
    "CompatSuiteResult",
    "verify_compat_suite",
]


def random_space(rng: np.random.Generator, n: int, name=None, unit=False) -> Space:
    """``n`` cells labelled ``c0..``, volumes in ``[0.1, 3)`` or all 1."""
    vols = np.ones(n) if unit else rng.uniform(0.1, 3.0, n)
    prefix = (name or "c").lower()
    return Space([f"{prefix}{i}" for i in range(n)], vols, name=name)


def random_density(rng: np.random.Generator, n: int, zero_prob: float = 0.0) -> np.ndarray:
    """Positive random densities; each cell is zeroed with ``zero_prob``."""
    d = rng.uniform(0.05, 2.0, n)
    if zero_prob > 0:
        d[rng.random(n) < zero_prob] = 0.0
    return d


def random_measure(rng, space: Space, zero_prob: float = 0.0, probability=True) -> GridMeasure:
    """Random measure on ``space``; if every cell was zeroed, one is restored."""
    d = random_density(rng, len(space), zero_prob)
    if not d.any():
        d[rng.integers(len(space))] = rng.uniform(0.05, 2.0)
    m = GridMeasure(space, d)
    return normalize(m) if probability else m


def random_mapping(rng, domain: Space, codomain: Space) -> CellMapping:
    return CellMapping(domain, codomain, rng.integers(0, len(codomain), len(domain)))


@dataclass(frozen=True)
class CompatSuiteResult:
    trials: int
    checked: int
    zero_normalisation: int
    max_abs_gap: float
    max_measure_gap: float

    def summary(self) -> dict:
        return {
            "trials": self.trials,
            "checked": self.checked,
            "zero_normalisation": self.zero_normalisation,
            "max_abs_gap": self.max_abs_gap,
            "max_measure_gap": self.max_measure_gap,
        }


def verify_compat_suite(
    cells: int,
    trials: int,
    seed: int,
    mode=NormalizationMode.RENORMALIZE,
    adversarial_fraction: float = 0.3,
) -> CompatSuiteResult:
    """Check the compatibility identity on random instances.

    Each instance draws domain and codomain sizes in ``1..cells``, random
    volumes, densities and a random mapping.  A fraction of instances zero
    out cells of both densities.  Instances where the normalisation vanishes
    raise on both sides together; they are counted in ``zero_normalisation``.
    """
    if cells < 1 or trials < 0:
        raise ValueError("need cells >= 1 and trials >= 0")
    rng = stream_generator(seed, 0)
    gap = mgap = 0.0
    checked = zero = 0
    for _ in range(trials):
        nx, ny = rng.integers(1, cells + 1, 2)
        x, y = random_space(rng, int(nx), "X"), random_space(rng, int(ny), "Y")
        zp = 0.5 if rng.random() < adversarial_fraction else 0.0
        pi = random_measure(rng, x, zp)
        tau = random_measure(rng, y, zp)
        phi = random_mapping(rng, x, y)
        try:
            rep = check_compatibility(pi, tau, phi, mode)
        except (ZeroOverlap, ZeroPullbackMass):
            zero += 1
            continue
        checked += 1
        gap = max(gap, rep.max_abs_gap)
        mgap = max(mgap, rep.max_measure_gap)
    return CompatSuiteResult(trials, checked, zero, gap, mgap)
