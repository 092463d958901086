"""Finite topological spaces, listed extensionally.

Opens are stored once, in canonical order (by size, then lexicographically on
sorted point names), and everything downstream refers to them by index.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

DEFAULT_MAX_POINTS = 16


class TopologyError(ValueError):
    pass


class MissingEmptyOrFull(TopologyError):
    pass


class NotClosedUnderUnion(TopologyError):
    def __init__(self, witness):
        self.witness = witness
        a, b = witness
        super().__init__(f"union of {_fmt(a)} and {_fmt(b)} is not open")


class NotClosedUnderIntersection(TopologyError):
    def __init__(self, witness):
        self.witness = witness
        a, b = witness
        super().__init__(f"intersection of {_fmt(a)} and {_fmt(b)} is not open")


class UnknownPoint(TopologyError):
    pass


class TooManyPoints(TopologyError):
    pass


class DifferentTopologies(TopologyError):
    pass


class NotOpen(TopologyError):
    pass


def _fmt(s: Iterable[str]) -> str:
    return "{" + ",".join(sorted(s)) + "}"


def _canonical_key(s: frozenset) -> tuple:
    return (len(s), sorted(s))


def point_cap() -> int:
    env = os.environ.get("SHEAFKIT_MAX_POINTS")
    return int(env) if env else DEFAULT_MAX_POINTS


@dataclass(frozen=True, eq=False)
class FiniteTopology:
    points: tuple[str, ...]
    opens: tuple[frozenset, ...]

    def __eq__(self, other):
        if not isinstance(other, FiniteTopology):
            return NotImplemented
        return self.points == other.points and self.opens == other.opens

    def __hash__(self):
        return hash((self.points, self.opens))

    @cached_property
    def _index(self) -> dict[frozenset, int]:
        return {u: i for i, u in enumerate(self.opens)}

    @property
    def empty(self) -> int:
        return 0

    @property
    def full(self) -> int:
        return len(self.opens) - 1

    def index(self, subset: Iterable[str]) -> int:
        s = frozenset(subset)
        try:
            return self._index[s]
        except KeyError:
            raise NotOpen(f"{_fmt(s)} is not open") from None

    def is_open(self, subset: Iterable[str]) -> bool:
        return frozenset(subset) in self._index

    def open(self, which: int | Iterable[str]) -> "OpenSet":
        if isinstance(which, int):
            if not 0 <= which < len(self.opens):
                raise NotOpen(f"no open with index {which}")
            return OpenSet(self, which)
        return OpenSet(self, self.index(which))

    def subset(self, i: int, j: int) -> bool:
        """Is open i contained in open j?"""
        return self._leq[i][j]

    @cached_property
    def _leq(self) -> list[list[bool]]:
        return [[u <= v for v in self.opens] for u in self.opens]

    def meet(self, i: int, j: int) -> int:
        return self._index[self.opens[i] & self.opens[j]]

    def join(self, i: int, j: int) -> int:
        return self._index[self.opens[i] | self.opens[j]]

    def meet_all(self, idxs: Iterable[int]) -> int:
        s = frozenset(self.points)
        for i in idxs:
            s &= self.opens[i]
        return self._index[s]

    def subopens(self, i: int) -> list[int]:
        return [j for j in range(len(self.opens)) if self._leq[j][i]]

    def inclusions(self) -> list[tuple[int, int]]:
        """All pairs (v, u) with open v contained in open u, including v == u."""
        n = len(self.opens)
        return [(v, u) for u in range(n) for v in range(n) if self._leq[v][u]]

    @cached_property
    def hasse_edges(self) -> tuple[tuple[int, int], ...]:
        """Covering pairs (v, u): v strictly inside u with no open strictly between."""
        n = len(self.opens)
        edges = []
        for u in range(n):
            for v in range(n):
                if v == u or not self._leq[v][u]:
                    continue
                if not any(w not in (u, v) and self._leq[v][w] and self._leq[w][u] for w in range(n)):
                    edges.append((v, u))
        return tuple(edges)

    @cached_property
    def _minimal(self) -> dict[str, int]:
        out = {}
        for x in self.points:
            s = frozenset(self.points)
            for u in self.opens:
                if x in u:
                    s &= u
            out[x] = self._index[s]
        return out

    def minimal_open_index(self, x: str) -> int:
        try:
            return self._minimal[x]
        except KeyError:
            raise UnknownPoint(f"unknown point {x!r}") from None

    def minimal_opens_in(self, i: int) -> list[int]:
        """Distinct minimal opens U_x for x in open i, in canonical order."""
        return sorted({self._minimal[x] for x in self.opens[i]})

    def label(self, i: int) -> str:
        return _fmt(self.opens[i]) if self.opens[i] else "{}"

    def __repr__(self):
        return f"FiniteTopology(points={list(self.points)}, opens={[self.label(i) for i in range(len(self.opens))]})"


@dataclass(frozen=True)
class OpenSet:
    topology: FiniteTopology = field(repr=False)
    index: int

    @property
    def points(self) -> frozenset:
        return self.topology.opens[self.index]

    def __le__(self, other: "OpenSet") -> bool:
        _same(self, other)
        return self.topology.subset(self.index, other.index)

    def __str__(self):
        return self.topology.label(self.index)


@dataclass(frozen=True)
class Inclusion:
    source: OpenSet
    target: OpenSet

    @property
    def is_identity(self) -> bool:
        return self.source.index == self.target.index


@dataclass(frozen=True)
class Cover:
    covered: OpenSet
    parts: tuple[OpenSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        for p in self.parts:
            _same(self.covered, p)

    @property
    def topology(self) -> FiniteTopology:
        return self.covered.topology

    @property
    def part_indices(self) -> tuple[int, ...]:
        return tuple(p.index for p in self.parts)


@dataclass(frozen=True)
class CoverReport:
    valid: bool
    uncovered: frozenset = frozenset()
    stray_parts: tuple[int, ...] = ()


def _same(a: OpenSet, b: OpenSet) -> None:
    if a.topology != b.topology:
        raise DifferentTopologies("open sets belong to different topologies")


def validate_topology(points: Sequence[str], candidate_opens: Iterable[Iterable[str]],
                      max_points: int | None = None) -> FiniteTopology:
    """Check the open-set axioms and return the canonical topology."""
    cap = point_cap() if max_points is None else max_points
    pts = sorted(set(points))
    if not pts:
        raise TopologyError("a topology needs at least one point")
    if len(pts) != len(points):
        raise TopologyError("duplicate point identifiers")
    if len(pts) > cap:
        raise TooManyPoints(f"{len(pts)} points exceeds the cap of {cap}")
    ground = frozenset(pts)
    opens = set()
    for cand in candidate_opens:
        s = frozenset(cand)
        if not s <= ground:
            raise UnknownPoint(f"open {_fmt(s)} mentions unknown points {_fmt(s - ground)}")
        opens.add(s)
    if frozenset() not in opens or ground not in opens:
        raise MissingEmptyOrFull("the empty set and the whole space must be open")
    ordered = sorted(opens, key=_canonical_key)
    for a, b in combinations(ordered, 2):
        if a | b not in opens:
            raise NotClosedUnderUnion((a, b))
        if a & b not in opens:
            raise NotClosedUnderIntersection((a, b))
    return FiniteTopology(tuple(pts), tuple(ordered))


def topology_from_poset(points: Sequence[str], below: dict[str, Iterable[str]]) -> FiniteTopology:
    """Topology whose opens are the down-sets of a finite poset.

    ``below[x]`` lists points strictly below x; the minimal open of x is x
    together with everything below it.  Used to build the stock spaces.
    """
    pts = sorted(points)
    down = {x: {x} | set(below.get(x, ())) for x in pts}
    changed = True
    while changed:
        changed = False
        for x in pts:
            extra = set().union(*(down[y] for y in down[x])) - down[x]
            if extra:
                down[x] |= extra
                changed = True
    opens = {frozenset()}
    frontier = [frozenset(d) for d in down.values()]
    opens.update(frontier)
    while frontier:
        new = []
        for a in frontier:
            for b in list(opens):
                c = a | b
                if c not in opens:
                    opens.add(c)
                    new.append(c)
        frontier = new
    return validate_topology(pts, opens, max_points=max(len(pts), point_cap()))


def hom_set(V: OpenSet, W: OpenSet) -> Inclusion | None:
    """The unique inclusion V -> W, or None when V is not contained in W."""
    _same(V, W)
    return Inclusion(V, W) if V <= W else None


def minimal_open(T: FiniteTopology, x: str) -> OpenSet:
    return OpenSet(T, T.minimal_open_index(x))


def check_cover(c: Cover) -> CoverReport:
    covered = c.covered.points
    union = frozenset().union(*(p.points for p in c.parts))
    stray = tuple(i for i, p in enumerate(c.parts) if not p.points <= covered)
    uncovered = covered - union
    return CoverReport(not uncovered and not stray, uncovered, stray)


def minimal_open_cover(T: FiniteTopology, U: OpenSet | None = None) -> Cover:
    U = T.open(T.full) if U is None else U
    return Cover(U, tuple(OpenSet(T, i) for i in T.minimal_opens_in(U.index)))
