"""Measurable maps, image and reciprocal image of measures.

A :class:`CellMapping` sends every cell of a domain space to one cell of a
codomain space; with partition sigma-fields this is exactly a measurable map.
An :class:`ExprMapping` is an analytic map between coordinate domains, used
to move particle clouds.

The compatibility identity

    pushforward(intersect(pi, pullback(tau, phi)), phi)
        == intersect(pushforward(pi, phi), tau)

is exposed as :func:`check_compatibility`, which evaluates both sides along
independent code paths and reports the gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ForeignCellSet,
    InconsistentOracles,
    MappingDomainError,
    MeasureError,
    SpaceMismatch,
    ZeroPullbackMass,
)
from .expr import Expr, parse_expr
from .measure import GridMeasure, NormalizationMode, _mode, intersect, total_mass
from .space import CellSet, CoordinateDomain, Space

__all__ = [
    "CellMapping",
    "ExprMapping",
    "TestFunction",
    "CompatibilityReport",
    "preimage",
    "image",
    "pushforward",
    "pullback",
    "integrate_against",
    "change_of_variables_sides",
    "check_compatibility",
]


class CellMapping:
    """Total map from the cells of ``domain`` to the cells of ``codomain``.

    ``table[i]`` is the codomain index of domain cell ``i``.
    """

    __slots__ = ("domain", "codomain", "table")

    def __init__(self, domain: Space, codomain: Space, table):
        table = np.array(table, dtype=np.int64)
        if table.shape != (len(domain),):
            raise SpaceMismatch(
                f"mapping table has {table.size} entries for a {len(domain)}-cell domain"
            )
        if table.size and (table.min() < 0 or table.max() >= len(codomain)):
            raise ForeignCellSet("mapping table refers to cells outside the codomain")
        table.setflags(write=False)
        self.domain = domain
        self.codomain = codomain
        self.table = table

    @classmethod
    def from_labels(cls, domain: Space, codomain: Space, labels: Sequence[str]) -> "CellMapping":
        """Mapping given as one codomain label per domain cell."""
        if len(labels) != len(domain):
            raise SpaceMismatch(
                f"mapping lists {len(labels)} images for a {len(domain)}-cell domain"
            )
        return cls(domain, codomain, [codomain.index_of(lab) for lab in labels])

    @classmethod
    def identity(cls, space: Space) -> "CellMapping":
        return cls(space, space, np.arange(len(space)))

    def __call__(self, i: int) -> int:
        return int(self.table[i])

    def __repr__(self):
        return f"CellMapping({len(self.domain)} -> {len(self.codomain)} cells)"

    def apply(self, cells) -> np.ndarray:
        cells = np.asarray(cells, dtype=np.int64)
        if cells.size and (cells.min() < 0 or cells.max() >= len(self.domain)):
            bad = int(np.flatnonzero((cells < 0) | (cells >= len(self.domain)))[0])
            raise MappingDomainError("cell index outside the mapping's domain", index=bad)
        return self.table[cells]


class ExprMapping:
    """Analytic map between coordinate domains.

    Parameters
    ----------
    domain : CoordinateDomain or sequence of str
        Input coordinate names, in particle column order.
    outputs : mapping of str to str or Expr
        One expression per output coordinate, e.g. ``{"R": "V/I"}``.
    """

    def __init__(self, domain, outputs: Mapping[str, object]):
        if not isinstance(domain, CoordinateDomain):
            domain = CoordinateDomain(tuple(domain))
        exprs = {
            name: (e if isinstance(e, Expr) else parse_expr(e))
            for name, e in outputs.items()
        }
        for name, e in exprs.items():
            unknown = e.variables - set(domain.names)
            if unknown:
                raise MappingDomainError(
                    f"expression for {name!r} uses unknown coordinates {sorted(unknown)}"
                )
        self.domain = domain
        self.codomain = CoordinateDomain(tuple(exprs))
        self.exprs = exprs

    def __repr__(self):
        body = ", ".join(f"{k}={e.source}" for k, e in self.exprs.items())
        return f"ExprMapping({body})"

    def __call__(self, *x):
        out = self.apply(np.atleast_2d(np.asarray(x, dtype=float)))
        return out[0] if out.shape[1] > 1 else float(out[0, 0])

    def apply(self, points) -> np.ndarray:
        """Map an ``(n, d)`` array of points to an ``(n, q)`` array."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.domain.dim:
            raise SpaceMismatch(
                f"expected points of shape (n, {self.domain.dim}), got {points.shape}"
            )
        bindings = {name: points[:, j] for j, name in enumerate(self.domain.names)}
        cols = [
            np.broadcast_to(e.evaluate(bindings), (points.shape[0],))
            for e in self.exprs.values()
        ]
        return np.column_stack(cols) if cols else np.empty((points.shape[0], 0))


class TestFunction:
    """Simple measurable function: one real value per cell of ``space``."""

    __test__ = False  # not a pytest class

    __slots__ = ("space", "values")

    def __init__(self, space: Space, values):
        values = np.array(values, dtype=float)
        if values.shape != (len(space),):
            raise SpaceMismatch("test function length does not match the space")
        if not np.all(np.isfinite(values)):
            raise ValueError("test function values must be finite")
        values.setflags(write=False)
        self.space = space
        self.values = values

    @classmethod
    def indicator(cls, f: CellSet) -> "TestFunction":
        return cls(f.space, f.mask.astype(float))

    def compose(self, phi: CellMapping) -> "TestFunction":
        """``K o phi`` as a test function on ``phi``'s domain."""
        if phi.codomain != self.space:
            raise SpaceMismatch("test function is not defined on the mapping's codomain")
        return TestFunction(phi.domain, self.values[phi.table])


def _check_on(m: GridMeasure, space: Space, role: str):
    if m.space != space:
        raise SpaceMismatch(f"measure is not defined on the mapping's {role}")


def preimage(phi: CellMapping, f: CellSet) -> CellSet:
    """Domain cells whose image lies in ``f``."""
    if f.space != phi.codomain:
        raise ForeignCellSet("cell set is not on the mapping's codomain")
    return CellSet(phi.domain, np.flatnonzero(f.mask[phi.table]))


def image(phi: CellMapping, a: CellSet) -> CellSet:
    """Set image ``{phi(i) : i in a}``."""
    if a.space != phi.domain:
        raise ForeignCellSet("cell set is not on the mapping's domain")
    return CellSet(phi.codomain, phi.table[list(a.members)])


def _group_fsum(values, table, n_out):
    out = np.zeros(n_out)
    order = np.argsort(table, kind="stable")
    bounds = np.cumsum(np.bincount(table, minlength=n_out))
    start = 0
    for alpha, stop in enumerate(bounds):
        if stop > start:
            out[alpha] = math.fsum(values[order[start:stop]])
        start = stop
    return out


def pushforward(pi: GridMeasure, phi: CellMapping) -> GridMeasure:
    """Image measure ``phi[pi] = pi o phi^-1``, as a density on the codomain."""
    _check_on(pi, phi.domain, "domain")
    n_out = len(phi.codomain)
    masses = _group_fsum(pi.masses, phi.table, n_out)
    density = masses / phi.codomain.volumes
    # a cell reached from one domain cell of equal volume keeps its density bit-for-bit
    counts = np.bincount(phi.table, minlength=n_out)
    single = np.flatnonzero(counts[phi.table] == 1)
    same = single[phi.domain.volumes[single] == phi.codomain.volumes[phi.table[single]]]
    density[phi.table[same]] = pi.density[same]
    return GridMeasure(phi.codomain, density, "probability" if pi.kind == "probability" else "raw")


def pullback(tau: GridMeasure, phi: CellMapping, mode=NormalizationMode.RENORMALIZE) -> GridMeasure:
    """Reciprocal image ``phi^-1[tau]``: density ``(dtau/dnu o phi) / n``.

    Raises
    ------
    ZeroPullbackMass
        ``n == 0`` in renormalize mode (tau has no density on the range of phi).
    """
    mode = _mode(mode)
    _check_on(tau, phi.codomain, "codomain")
    composed = tau.density[phi.table]
    if mode is NormalizationMode.UNIT_CONSTANT:
        return GridMeasure(phi.domain, composed, "raw")
    n = math.fsum(composed * phi.domain.volumes)
    if n == 0:
        raise ZeroPullbackMass("the measure has no density on the range of the mapping")
    return GridMeasure(phi.domain, composed / n, "probability")


def integrate_against(k: TestFunction, m: GridMeasure, f: CellSet | None = None) -> float:
    """``int_F K dm``; ``f`` defaults to the whole space."""
    if k.space != m.space:
        raise SpaceMismatch("test function and measure live on different spaces")
    if f is None:
        f = m.space.all()
    elif f.space != m.space:
        raise ForeignCellSet("cell set does not belong to the measure's space")
    idx = list(f.members)
    return math.fsum(k.values[idx] * m.density[idx] * m.space.volumes[idx])


def change_of_variables_sides(k: TestFunction, pi: GridMeasure, phi: CellMapping, f: CellSet):
    """Both sides of ``int_F K d(phi[pi]) = int_{phi^-1 F} K o phi dpi``.

    The left side integrates over the codomain against the pushforward; the
    right side never forms the pushforward and sums over domain cells.
    """
    lhs = integrate_against(k, pushforward(pi, phi), f)
    rhs = integrate_against(k.compose(phi), pi, preimage(phi, f))
    return lhs, rhs


@dataclass(frozen=True)
class CompatibilityReport:
    """Outcome of :func:`check_compatibility`.

    ``max_abs_gap`` is the largest cellwise density gap; ``max_measure_gap``
    the largest gap over singleton cell sets.  ``degenerate`` is set when both
    sides are the zero measure (unit-constant mode only).
    """

    lhs: GridMeasure
    rhs: GridMeasure
    max_abs_gap: float
    max_measure_gap: float
    degenerate: bool = False


def check_compatibility(
    pi: GridMeasure,
    tau: GridMeasure,
    phi: CellMapping,
    mode=NormalizationMode.RENORMALIZE,
) -> CompatibilityReport:
    """Evaluate ``phi[pi ∩ phi^-1[tau]]`` and ``phi[pi] ∩ tau`` and compare.

    In renormalize mode both sides are probability measures.  When the
    normalisation constant vanishes, both sides fail; the error of the left
    side is re-raised after confirming the right side failed as well.
    """
    mode = _mode(mode)
    _check_on(pi, phi.domain, "domain")
    _check_on(tau, phi.codomain, "codomain")
    lhs_err = rhs_err = None
    try:
        lhs = pushforward(intersect(pi, pullback(tau, phi, mode), mode), phi)
    except MeasureError as exc:
        lhs_err = exc
    try:
        rhs = intersect(pushforward(pi, phi), tau, mode)
    except MeasureError as exc:
        rhs_err = exc
    if (lhs_err is None) != (rhs_err is None):
        raise InconsistentOracles(
            f"only one side of the compatibility identity failed: {lhs_err or rhs_err!r}"
        )
    if lhs_err is not None:
        raise lhs_err
    if mode is NormalizationMode.UNIT_CONSTANT and total_mass(lhs) == 0 and total_mass(rhs) == 0:
        return CompatibilityReport(lhs, rhs, 0.0, 0.0, degenerate=True)
    gap = float(np.max(np.abs(lhs.density - rhs.density)))
    mgap = float(np.max(np.abs(lhs.masses - rhs.masses)))
    return CompatibilityReport(lhs, rhs, gap, mgap)
