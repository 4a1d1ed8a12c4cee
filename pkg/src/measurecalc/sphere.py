"""Equal-area tilings of the unit sphere and smooth densities on it.

Tiles are latitude bands of equal height in ``z = sin(latitude)`` (hence of
equal area, by Archimedes' hat-box theorem) cut into equal longitude
sectors.  Every tile of a ``bands x sectors`` tiling has area exactly
``4 pi / (bands * sectors)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .space import Space

__all__ = ["SphereTiling", "VonMisesFisher", "tile_integrals", "unit_vector"]


def unit_vector(lat_deg: float, lon_deg: float) -> np.ndarray:
    lat, lon = math.radians(lat_deg), math.radians(lon_deg)
    return np.array([math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat)])


@dataclass(frozen=True)
class SphereTiling:
    bands: int
    sectors: int

    def __post_init__(self):
        if self.bands < 1 or self.sectors < 1:
            raise ValueError("bands and sectors must be positive")

    @classmethod
    def parse(cls, text: str) -> "SphereTiling":
        """``"16x8"`` -> 16 bands, 8 sectors."""
        try:
            b, s = text.lower().split("x")
            return cls(int(b), int(s))
        except ValueError:
            raise ValueError(f"tiling must look like '<bands>x<sectors>', got {text!r}") from None

    def __str__(self):
        return f"{self.bands}x{self.sectors}"

    @property
    def n_tiles(self) -> int:
        return self.bands * self.sectors

    @property
    def tile_area(self) -> float:
        return 4.0 * math.pi / self.n_tiles

    @property
    def z_edges(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.bands + 1)

    @property
    def lon_edges(self) -> np.ndarray:
        return np.linspace(0.0, 2.0 * math.pi, self.sectors + 1)

    def space(self) -> Space:
        labels = [f"b{i}s{j}" for i in range(self.bands) for j in range(self.sectors)]
        return Space(labels, np.full(self.n_tiles, self.tile_area), name=f"sphere-{self}")

    def locate(self, xyz) -> np.ndarray:
        """Tile index of each unit vector in an ``(n, 3)`` array."""
        xyz = np.atleast_2d(xyz)
        z = np.clip(xyz[:, 2], -1.0, 1.0)
        lon = np.mod(np.arctan2(xyz[:, 1], xyz[:, 0]), 2.0 * math.pi)
        i = np.minimum(((z + 1.0) * 0.5 * self.bands).astype(np.int64), self.bands - 1)
        j = np.minimum((lon / (2.0 * math.pi) * self.sectors).astype(np.int64), self.sectors - 1)
        return i * self.sectors + j


class VonMisesFisher:
    """Von Mises-Fisher probability density on the unit sphere (w.r.t. area).

    ``kappa = 0`` is the uniform density ``1 / (4 pi)``.
    """

    def __init__(self, mean, kappa: float):
        mean = np.asarray(mean, dtype=float)
        norm = np.linalg.norm(mean)
        if kappa < 0 or (kappa > 0 and norm == 0):
            raise ValueError("need kappa >= 0 and a nonzero mean direction")
        self.mean = mean / norm if norm > 0 else np.array([0.0, 0.0, 1.0])
        self.kappa = float(kappa)

    @classmethod
    def at(cls, lat_deg: float, lon_deg: float, kappa: float) -> "VonMisesFisher":
        return cls(unit_vector(lat_deg, lon_deg), kappa)

    def __repr__(self):
        return f"VonMisesFisher(mean={np.round(self.mean, 6).tolist()}, kappa={self.kappa:g})"

    def __call__(self, xyz) -> np.ndarray:
        xyz = np.asarray(xyz, dtype=float)
        k = self.kappa
        if k == 0:
            return np.full(xyz.shape[:-1], 1.0 / (4.0 * math.pi))
        # kappa / (4 pi sinh kappa) * exp(kappa m.x), written to avoid overflow
        c = k / (2.0 * math.pi * -math.expm1(-2.0 * k))
        return c * np.exp(k * (xyz @ self.mean - 1.0))

    def product(self, other: "VonMisesFisher") -> "VonMisesFisher":
        """Normalised pointwise product: again a von Mises-Fisher density."""
        v = self.kappa * self.mean + other.kappa * other.mean
        return VonMisesFisher(v, float(np.linalg.norm(v)))


def tile_integrals(f, tiling: SphereTiling, order: int = 8) -> np.ndarray:
    """Integral of ``f`` over every tile by tensor Gauss-Legendre quadrature.

    ``f`` maps an ``(..., 3)`` array of unit vectors to values.  Integration
    uses the area element ``dz dlon``.
    """
    x, w = leggauss(order)
    ze, le = tiling.z_edges, tiling.lon_edges
    zm, zh = 0.5 * (ze[1:] + ze[:-1]), 0.5 * np.diff(ze)
    lm, lh = 0.5 * (le[1:] + le[:-1]), 0.5 * np.diff(le)
    z = zm[:, None] + zh[:, None] * x[None, :]              # (bands, order)
    lon = lm[:, None] + lh[:, None] * x[None, :]            # (sectors, order)
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    pts = np.empty((tiling.bands, order, tiling.sectors, order, 3))
    pts[..., 0] = r[:, :, None, None] * np.cos(lon)[None, None, :, :]
    pts[..., 1] = r[:, :, None, None] * np.sin(lon)[None, None, :, :]
    pts[..., 2] = z[:, :, None, None]
    vals = f(pts)
    tile = np.einsum("a,iajb,b->ij", w, vals, w)
    return (tile * zh[:, None] * lh[None, :]).reshape(-1)
