"""Presheaves of free abelian groups on a finite topology.

F(U) is Z^rank(U).  The restriction r^U_V : F(U) -> F(V) for V inside U is an
integer matrix of shape rank(V) x rank(U), stored under the key (V, U) with
opens given by their index in the topology.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

from .algebra import IntMatrix, kernel_basis, rank, smith_normal_form, solve, solve_matrix
from .topology import Cover, FiniteTopology, OpenSet, check_cover


class PresheafError(ValueError):
    pass


class MissingRestriction(PresheafError):
    def __init__(self, pair):
        self.pair = pair
        super().__init__(f"no restriction for inclusion {pair[0]} <= {pair[1]}")


class ShapeMismatch(PresheafError):
    def __init__(self, pair, expected, got):
        self.pair = pair
        self.expected = expected
        self.got = got
        super().__init__(f"restriction {pair[0]} <= {pair[1]} has shape {got}, expected {expected}")


class NotIncluded(PresheafError):
    pass


class WrongSectionCount(PresheafError):
    pass


class Presheaf:
    """A contravariant functor from the opens of ``topology`` to free Z-modules.

    The constructor does not check the functor laws; run
    :func:`validate_presheaf` for that.
    """

    def __init__(self, topology: FiniteTopology, ranks: Sequence[int],
                 restrictions: Mapping[tuple[int, int], IntMatrix]):
        if len(ranks) != len(topology.opens):
            raise PresheafError(f"{len(ranks)} ranks given for {len(topology.opens)} opens")
        if any(r < 0 for r in ranks):
            raise PresheafError("ranks must be nonnegative")
        self.topology = topology
        self.ranks = tuple(ranks)
        self.restrictions = dict(restrictions)

    @classmethod
    def from_hasse(cls, topology: FiniteTopology, ranks: Sequence[int],
                   edge_maps: Mapping[tuple[int, int], IntMatrix]) -> "Presheaf":
        """Build all restrictions by composing maps given on Hasse edges.

        For V strictly inside U the composite goes through the lowest-indexed
        Hasse child of U that still contains V.  Disagreement between different
        paths is left for :func:`validate_presheaf` to report.
        """
        T = topology
        edges = set(T.hasse_edges)
        for pair in edge_maps:
            if pair not in edges:
                raise PresheafError(f"{pair} is not a Hasse edge")
        for pair in edges:
            if pair not in edge_maps:
                raise MissingRestriction(pair)
        for (v, u), m in edge_maps.items():
            if m.shape != (ranks[v], ranks[u]):
                raise ShapeMismatch((v, u), (ranks[v], ranks[u]), m.shape)
        children: dict[int, list[int]] = {}
        for v, u in sorted(edges):
            children.setdefault(u, []).append(v)
        res: dict[tuple[int, int], IntMatrix] = {}
        for u in range(len(T.opens)):
            res[u, u] = IntMatrix.identity(ranks[u])
        for u in range(len(T.opens)):
            for v in T.subopens(u):
                if v == u:
                    continue
                w = next(c for c in children[u] if T.subset(v, c))
                res[v, u] = res[v, w] @ edge_maps[w, u]
        return cls(T, ranks, res)

    def rank(self, i: int) -> int:
        return self.ranks[i]

    def restriction(self, v: int, u: int) -> IntMatrix:
        """r^U_V : F(U) -> F(V) for open v contained in open u."""
        try:
            return self.restrictions[v, u]
        except KeyError:
            if not self.topology.subset(v, u):
                raise NotIncluded(f"open {v} is not contained in open {u}") from None
            raise MissingRestriction((v, u)) from None

    def hasse_maps(self) -> dict[tuple[int, int], IntMatrix]:
        return {e: self.restrictions[e] for e in self.topology.hasse_edges}

    def __eq__(self, other):
        if not isinstance(other, Presheaf):
            return NotImplemented
        return (self.topology == other.topology and self.ranks == other.ranks
                and self.restrictions == other.restrictions)

    def __repr__(self):
        return f"Presheaf(ranks={list(self.ranks)})"


@dataclass(frozen=True)
class PresheafReport:
    identity_violations: tuple[int, ...] = ()
    composition_violations: tuple[tuple[int, int, int], ...] = ()

    @property
    def valid(self) -> bool:
        return not self.identity_violations and not self.composition_violations


def validate_presheaf(P: Presheaf) -> PresheafReport:
    """Check r^U_U = 1 and r^V_W r^U_V = r^U_W on every chain W <= V <= U."""
    T = P.topology
    for v, u in T.inclusions():
        m = P.restrictions.get((v, u))
        if m is None:
            raise MissingRestriction((v, u))
        if m.shape != (P.ranks[v], P.ranks[u]):
            raise ShapeMismatch((v, u), (P.ranks[v], P.ranks[u]), m.shape)
    ident = tuple(u for u in range(len(T.opens))
                  if P.restrictions[u, u] != IntMatrix.identity(P.ranks[u]))
    bad = []
    n = len(T.opens)
    for u in range(n):
        for v in T.subopens(u):
            for w in T.subopens(v):
                if P.restrictions[w, v] @ P.restrictions[v, u] != P.restrictions[w, u]:
                    bad.append((w, v, u))
    return PresheafReport(ident, tuple(bad))


def constant_presheaf(T: FiniteTopology, r: int = 1) -> Presheaf:
    ident = IntMatrix.identity(r)
    return Presheaf(T, [r] * len(T.opens), {pair: ident for pair in T.inclusions()})


class Stalk(NamedTuple):
    open: int
    rank: int


def stalk(P: Presheaf, x: str) -> Stalk:
    u = P.topology.minimal_open_index(x)
    return Stalk(u, P.ranks[u])


# sections and gluing


@dataclass(frozen=True)
class Section:
    presheaf: Presheaf
    open: int
    coords: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if len(self.coords) != self.presheaf.ranks[self.open]:
            raise PresheafError(
                f"section over open {self.open} needs {self.presheaf.ranks[self.open]} coordinates, got {len(self.coords)}")


def _index(V: OpenSet | int) -> int:
    return V if isinstance(V, int) else V.index


def restrict(P: Presheaf, s: Section, V: OpenSet | int) -> Section:
    v = _index(V)
    if not P.topology.subset(v, s.open):
        raise NotIncluded(f"open {v} is not contained in open {s.open}")
    return Section(P, v, P.restriction(v, s.open).apply(s.coords))


@dataclass(frozen=True)
class CompatibleFamily:
    cover: Cover
    sections: tuple[Section, ...]


@dataclass(frozen=True)
class Conflict:
    parts: tuple[int, int]
    overlap: int
    values: tuple[tuple[int, ...], tuple[int, ...]]


def check_compatibility(cover: Cover, sections: Sequence[Section]) -> CompatibleFamily | Conflict:
    """Compare every pair of sections on the overlap of their parts.

    Returns the family when all overlaps agree, otherwise the first
    conflicting pair (in index order) with both restricted values.
    """
    if len(sections) != len(cover.parts):
        raise WrongSectionCount(f"{len(sections)} sections for {len(cover.parts)} cover parts")
    T = cover.topology
    for part, s in zip(cover.parts, sections):
        if s.open != part.index:
            raise PresheafError(f"section lives over open {s.open}, cover part is {part.index}")
    for i in range(len(sections)):
        for j in range(i + 1, len(sections)):
            si, sj = sections[i], sections[j]
            w = T.meet(si.open, sj.open)
            a = restrict(si.presheaf, si, w).coords
            b = restrict(sj.presheaf, sj, w).coords
            if a != b:
                return Conflict((i, j), w, (a, b))
    return CompatibleFamily(cover, tuple(sections))


@dataclass(frozen=True)
class GlueResult:
    kind: str  # "unique", "multiple" or "none"
    section: Section | None = None
    kernel: IntMatrix | None = None


def glue(P: Presheaf, family: CompatibleFamily) -> GlueResult:
    """Find f in F(V) restricting to every member of the family."""
    u = family.cover.covered.index
    blocks = [P.restriction(p.index, u) for p in family.cover.parts]
    A = IntMatrix.vstack(blocks, cols=P.ranks[u])
    b = [x for s in family.sections for x in s.coords]
    sol = solve(A, b)
    if sol is None:
        return GlueResult("none")
    section = Section(P, u, sol.particular)
    if sol.unique:
        return GlueResult("unique", section)
    return GlueResult("multiple", section, sol.kernel)


def family_lattice(P: Presheaf, parts: Sequence[int]) -> IntMatrix:
    """Basis of the compatible families over ``parts`` (pairwise overlaps agree).

    Families are vectors in the direct sum of F(part) in the given order.
    """
    T = P.topology
    offsets = _offsets([P.ranks[p] for p in parts])
    total = offsets[-1]
    rows = []
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            w = T.meet(parts[i], parts[j])
            ri = P.restriction(w, parts[i])
            rj = P.restriction(w, parts[j])
            for k in range(P.ranks[w]):
                row = [0] * total
                row[offsets[i]:offsets[i + 1]] = ri.row(k)
                for c, x in enumerate(rj.row(k)):
                    row[offsets[j] + c] -= x
                rows.append(row)
    return kernel_basis(IntMatrix.from_rows(rows, total))


def _offsets(sizes: Iterable[int]) -> list[int]:
    out = [0]
    for s in sizes:
        out.append(out[-1] + s)
    return out


# sheaf condition and sheafification


class _Limit:
    """lim over x in U of F(U_x), as a sublattice of the direct sum of stalks."""

    def __init__(self, P: Presheaf, u: int):
        T = P.topology
        self.parts = T.minimal_opens_in(u)
        self.offsets = _offsets(P.ranks[m] for m in self.parts)
        total = self.offsets[-1]
        rows = []
        for a, m in enumerate(self.parts):
            for b, m2 in enumerate(self.parts):
                if m2 == m or not T.subset(m2, m):
                    continue
                r = P.restriction(m2, m)
                for k in range(P.ranks[m2]):
                    row = [0] * total
                    row[self.offsets[a]:self.offsets[a + 1]] = r.row(k)
                    row[self.offsets[b] + k] -= 1
                    rows.append(row)
        self.basis = kernel_basis(IntMatrix.from_rows(rows, total))
        # F(U) -> direct sum of stalks
        self.stack = IntMatrix.vstack([P.restriction(m, u) for m in self.parts], cols=P.ranks[u])

    def block_rows(self, keep: Sequence[int]) -> list[int]:
        out = []
        for a, m in enumerate(self.parts):
            if m in keep:
                out.extend(range(self.offsets[a], self.offsets[a + 1]))
        return out


def _comparison(P: Presheaf) -> dict[int, tuple[_Limit, IntMatrix]]:
    out = {}
    for u in range(len(P.topology.opens)):
        lim = _Limit(P, u)
        coords = solve_matrix(lim.basis, lim.stack)
        # restrictions of a section always form a compatible family
        assert coords is not None
        out[u] = (lim, coords)
    return out


@dataclass(frozen=True)
class SheafFailure:
    open: int
    kind: str  # "existence", "uniqueness" or "empty-set"


@dataclass(frozen=True)
class SheafReport:
    failures: tuple[SheafFailure, ...]

    @property
    def is_sheaf(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.is_sheaf


def is_sheaf(P: Presheaf) -> SheafReport:
    """Decide the sheaf axiom through the comparison maps F(U) -> lim F(U_x).

    F is a sheaf exactly when every comparison map is an isomorphism over Z;
    the empty open must carry the zero module.
    """
    failures = []
    for u, (lim, c) in _comparison(P).items():
        if u == P.topology.empty:
            if P.ranks[u]:
                failures.append(SheafFailure(u, "empty-set"))
            continue
        if rank(c) < c.cols:
            failures.append(SheafFailure(u, "uniqueness"))
        if not _onto(c):
            failures.append(SheafFailure(u, "existence"))
    return SheafReport(tuple(failures))


def _onto(c: IntMatrix) -> bool:
    d = smith_normal_form(c).diagonal
    return len(d) == c.rows and all(x == 1 for x in d)


def is_isomorphism(m: IntMatrix) -> bool:
    return m.rows == m.cols and _onto(m)


class Sheafification(NamedTuple):
    sheaf: Presheaf
    unit: dict[int, IntMatrix]


def sheafify(P: Presheaf) -> Sheafification:
    """P+(U) = lim over x in U of P(U_x), with the unit P -> P+.

    P+(U) is the kernel of the map sending a family (s_m) over the minimal
    opens m in U to the differences r(s_m) - s_m' for m' inside m.  Its
    restrictions forget the members that are not in the smaller open.
    """
    T = P.topology
    comp = _comparison(P)
    ranks = [comp[u][0].basis.cols for u in range(len(T.opens))]
    res = {}
    for v, u in T.inclusions():
        lu, lv = comp[u][0], comp[v][0]
        if u == v:
            res[v, u] = IntMatrix.identity(ranks[u])
            continue
        keep = lu.block_rows(lv.parts)
        proj = lu.basis.submatrix(keep, range(lu.basis.cols))
        m = solve_matrix(lv.basis, proj)
        assert m is not None
        res[v, u] = m
    unit = {u: comp[u][1] for u in range(len(T.opens))}
    return Sheafification(Presheaf(T, ranks, res), unit)
