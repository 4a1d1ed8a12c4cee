"""Finite-partition measure spaces.

A :class:`Space` is a finite ordered partition of some sample set.  Every
cell carries a strictly positive volume under the space's base measure, and
the measurable sets are exactly the unions of cells, represented by
:class:`CellSet`.

All sums over cells use :func:`math.fsum`, which is correctly rounded and
therefore independent of summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateLabel,
    EmptySpace,
    ForeignCellSet,
    NonincreasingEdges,
    NonpositiveEdge,
    NonpositiveVolume,
)

__all__ = [
    "Space",
    "CellSet",
    "make_space",
    "log_interval_space",
    "interval_space",
    "set_volume",
    "CoordinateDomain",
]


@dataclass(frozen=True)
class CoordinateDomain:
    """Continuous coordinate space named by its coordinates, e.g. ``("V", "I")``.

    Used where a measure is only available through samples (particle clouds
    moved by analytic maps) and no finite partition is involved.
    """

    names: tuple

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if not self.names or len(set(self.names)) != len(self.names):
            raise ValueError(f"coordinate names must be unique and nonempty: {self.names}")

    @property
    def dim(self) -> int:
        return len(self.names)


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


class Space:
    """Ordered partition with per-cell base-measure volumes.

    Parameters
    ----------
    labels : sequence of str
        Unique cell labels, in cell order.
    volumes : sequence of float
        Finite, strictly positive volume of each cell.
    name : str, optional
        Opaque identifier, only used in messages and serialisation.
    edges : sequence of float, optional
        For one-dimensional interval partitions, the ``len(labels) + 1``
        increasing cell boundaries.  Needed to bin real-valued particles.
    """

    __slots__ = ("labels", "volumes", "name", "edges", "_index")

    def __init__(self, labels, volumes, name=None, edges=None):
        labels = tuple(str(lab) for lab in labels)
        volumes = _frozen(volumes)
        if len(labels) == 0:
            raise EmptySpace("a space needs at least one cell")
        if volumes.shape != (len(labels),):
            raise ValueError(
                f"got {len(labels)} labels but {volumes.size} volumes"
            )
        if not np.all(np.isfinite(volumes)) or np.any(volumes <= 0):
            bad = int(np.flatnonzero(~(np.isfinite(volumes) & (volumes > 0)))[0])
            raise NonpositiveVolume(
                f"cell {labels[bad]!r} has volume {volumes[bad]!r}; "
                "volumes must be finite and > 0"
            )
        index = {}
        for i, lab in enumerate(labels):
            if lab in index:
                raise DuplicateLabel(f"label {lab!r} appears more than once")
            index[lab] = i
        if not math.isfinite(math.fsum(volumes)):
            raise NonpositiveVolume("total volume must be finite")
        if edges is not None:
            edges = _frozen(edges)
            if edges.shape != (len(labels) + 1,):
                raise ValueError("edges must have one more entry than labels")
        self.labels = labels
        self.volumes = volumes
        self.name = name
        self.edges = edges
        self._index = index

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        tag = f"{self.name!r}, " if self.name else ""
        return f"Space({tag}{len(self)} cells, total={self.total_volume:g})"

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Space):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(
            self.volumes, other.volumes
        )

    def __hash__(self):
        return hash((self.labels, self.volumes.tobytes()))

    @property
    def total_volume(self) -> float:
        return math.fsum(self.volumes)

    def index_of(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ForeignCellSet(f"no cell labelled {label!r} in {self!r}") from None

    def cells(self, labels: Iterable[str]) -> "CellSet":
        """CellSet from cell labels."""
        return CellSet(self, [self.index_of(lab) for lab in labels])

    def all(self) -> "CellSet":
        return CellSet(self, range(len(self)))

    def empty(self) -> "CellSet":
        return CellSet(self, ())


class CellSet:
    """A measurable set: a union of cells of one :class:`Space`.

    Members are stored as a sorted tuple of cell indices.  Set operators
    ``|``, ``&``, ``-`` and ``~`` (complement) are supported between sets of
    the same space.
    """

    __slots__ = ("space", "members")

    def __init__(self, space: Space, members: Iterable[int]):
        members = sorted({int(m) for m in members})
        n = len(space)
        if members and (members[0] < 0 or members[-1] >= n):
            raise ForeignCellSet(
                f"cell indices {members} out of range for a {n}-cell space"
            )
        self.space = space
        self.members = tuple(members)

    @classmethod
    def from_mask(cls, space: Space, mask) -> "CellSet":
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (len(space),):
            raise ForeignCellSet("mask length does not match the space")
        return cls(space, np.flatnonzero(mask))

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(len(self.space), dtype=bool)
        m[list(self.members)] = True
        return m

    @property
    def labels(self) -> tuple:
        return tuple(self.space.labels[i] for i in self.members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, i):
        return i in self.members

    def __bool__(self):
        return bool(self.members)

    def __repr__(self):
        return f"CellSet({list(self.labels)})"

    def __eq__(self, other):
        if not isinstance(other, CellSet):
            return NotImplemented
        return self.space == other.space and self.members == other.members

    def __hash__(self):
        return hash(self.members)

    def _check(self, other):
        if not isinstance(other, CellSet) or other.space != self.space:
            raise ForeignCellSet("cell sets belong to different spaces")

    def __or__(self, other):
        self._check(other)
        return CellSet(self.space, set(self.members) | set(other.members))

    def __and__(self, other):
        self._check(other)
        return CellSet(self.space, set(self.members) & set(other.members))

    def __sub__(self, other):
        self._check(other)
        return CellSet(self.space, set(self.members) - set(other.members))

    def __invert__(self):
        return CellSet(self.space, set(range(len(self.space))) - set(self.members))

    def issubset(self, other) -> bool:
        self._check(other)
        return set(self.members) <= set(other.members)


def make_space(labels: Sequence[str], volumes: Sequence[float], name=None) -> Space:
    """Build a :class:`Space` from labels and per-cell volumes."""
    return Space(labels, volumes, name=name)


def _check_edges(edges):
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise EmptySpace("need at least two edges to form one cell")
    if not np.all(np.isfinite(edges)):
        raise NonincreasingEdges("edges must be finite")
    if np.any(np.diff(edges) <= 0):
        raise NonincreasingEdges(f"edges must be strictly increasing: {edges.tolist()}")
    return edges


def _edge_labels(edges):
    return [f"[{lo:.17g},{hi:.17g})" for lo, hi in zip(edges[:-1], edges[1:])]


def log_interval_space(t_edges: Sequence[float], labels=None, name=None) -> Space:
    """Interval partition of the positive half-line with logarithmic volumes.

    The volume of the interval ``(t1, t2)`` is ``log(t2 / t1)``, which is the
    same whether the axis is parameterised by a quantity or by its
    reciprocal (period versus frequency, say).
    """
    edges = _check_edges(t_edges)
    if np.any(edges <= 0):
        raise NonpositiveEdge("log-interval edges must all be > 0")
    volumes = [math.log(hi / lo) for lo, hi in zip(edges[:-1], edges[1:])]
    if labels is None:
        labels = _edge_labels(edges)
    return Space(labels, volumes, name=name, edges=edges)


def interval_space(edges: Sequence[float], labels=None, name=None) -> Space:
    """Interval partition of the real line with Lebesgue (length) volumes."""
    edges = _check_edges(edges)
    volumes = np.diff(edges)
    if labels is None:
        labels = _edge_labels(edges)
    return Space(labels, volumes, name=name, edges=edges)


def set_volume(s: Space, a: CellSet) -> float:
    """Base-measure volume of a cell set."""
    if a.space != s:
        raise ForeignCellSet("cell set does not belong to this space")
    return math.fsum(s.volumes[list(a.members)])
