"""Čech cochain complexes and their cohomology over Z.

:func:`cohomology` works relative to any explicit cover.  For the cohomology
of the whole space, :func:`cohomology_of_space` uses the chains of the
minimal-open cover (tuples U_0 < U_1 < ... < U_n under inclusion), which is
the part of the Čech complex of that cover that sees the sheaf's higher
cohomology on overlaps correctly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from .algebra import FGAbelianGroup, IntMatrix, kernel_basis, quotient_group
from .presheaf import Presheaf
from .topology import Cover, check_cover, minimal_open_cover


class InvalidCover(ValueError):
    pass


class CoboundaryError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Degree:
    tuples: tuple[tuple[int, ...], ...]  # positions into the cover parts
    opens: tuple[int, ...]               # intersection open of each tuple
    offsets: tuple[int, ...]

    @property
    def rank(self) -> int:
        return self.offsets[-1]


@dataclass(frozen=True)
class CechComplex:
    presheaf: Presheaf = field(repr=False)
    cover: Cover = field(repr=False)
    degrees: tuple[Degree, ...]
    coboundaries: tuple[IntMatrix, ...]  # coboundaries[n] : C^n -> C^(n+1)
    kind: str = "cech"

    def rank(self, n: int) -> int:
        return self.degrees[n].rank if 0 <= n < len(self.degrees) else 0

    def delta(self, n: int) -> IntMatrix:
        if 0 <= n < len(self.coboundaries):
            return self.coboundaries[n]
        return IntMatrix.zeros(self.rank(n + 1), self.rank(n))


@dataclass(frozen=True)
class CohomologyResult:
    groups: tuple[FGAbelianGroup, ...]
    cover: tuple[int, ...] = ()
    kind: str = "cech"

    def group(self, n: int) -> FGAbelianGroup:
        return self.groups[n] if 0 <= n < len(self.groups) else FGAbelianGroup()

    def bettis(self) -> tuple[int, ...]:
        return tuple(g.betti for g in self.groups)


def _assemble(P: Presheaf, cover: Cover, tuples_by_degree: list[list[tuple[int, ...]]],
              kind: str) -> CechComplex:
    T = P.topology
    parts = cover.part_indices
    degrees = []
    for tuples in tuples_by_degree:
        opens = tuple(T.meet_all(parts[i] for i in t) for t in tuples)
        offs = [0]
        for o in opens:
            offs.append(offs[-1] + P.ranks[o])
        degrees.append(Degree(tuple(tuples), opens, tuple(offs)))

    deltas = []
    for n in range(len(degrees) - 1):
        src, dst = degrees[n], degrees[n + 1]
        where = {t: k for k, t in enumerate(src.tuples)}
        rows = [[0] * src.rank for _ in range(dst.rank)]
        for b, t in enumerate(dst.tuples):
            target = dst.opens[b]
            for k in range(len(t)):
                face = t[:k] + t[k + 1:]
                a = where.get(face)
                if a is None:
                    continue
                r = P.restriction(target, src.opens[a])
                sign = -1 if k % 2 else 1
                for i in range(r.rows):
                    row = rows[dst.offsets[b] + i]
                    for j, x in enumerate(r.row(i)):
                        row[src.offsets[a] + j] += sign * x
        deltas.append(IntMatrix.from_rows(rows, src.rank))

    for n in range(len(deltas) - 1):
        if not (deltas[n + 1] @ deltas[n]).is_zero():
            raise CoboundaryError(f"delta^{n + 1} delta^{n} != 0")
    return CechComplex(P, cover, tuple(degrees), tuple(deltas), kind)


def build_cech_complex(P: Presheaf, c: Cover) -> CechComplex:
    """Alternating Čech complex on strictly increasing tuples of cover parts.

    The (i0..i_{n+1}) block of delta(s) is the alternating sum over k of s on
    the tuple with i_k removed, restricted to U_{i0..i_{n+1}}.
    """
    report = check_cover(c)
    if not report.valid:
        raise InvalidCover(f"cover misses points {sorted(report.uncovered)} "
                           f"or has stray parts {list(report.stray_parts)}")
    if c.topology != P.topology:
        raise InvalidCover("cover and presheaf live on different topologies")
    m = len(c.parts)
    tuples = [list(combinations(range(m), n + 1)) for n in range(m)]
    return _assemble(P, c, tuples, "cech")


def build_chain_complex(P: Presheaf, c: Cover | None = None) -> CechComplex:
    """The part of the Čech complex spanned by nested tuples.

    A tuple (i0, ..., in) is kept when U_{i0} is strictly inside U_{i1}, and so
    on up the chain;
    its block is then F(U_{i0}).  On the minimal-open cover this is the
    cochain complex of the poset of minimal opens with coefficients in the
    stalks, which computes sheaf cohomology of a finite space.
    """
    T = P.topology
    c = minimal_open_cover(T) if c is None else c
    if not check_cover(c).valid:
        raise InvalidCover("invalid cover")
    parts = c.part_indices
    m = len(parts)
    below = [{j for j in range(m) if parts[j] != parts[i] and T.subset(parts[j], parts[i])}
             for i in range(m)]

    tuples: list[list[tuple[int, ...]]] = [[(i,) for i in range(m)]]
    while tuples[-1]:
        nxt = []
        for t in tuples[-1]:
            for j in range(m):
                if t[-1] in below[j]:
                    nxt.append(t + (j,))
        tuples.append(sorted(nxt))
    tuples.pop()
    return _assemble(P, c, tuples, "chain")


def _cohomology_of(K: CechComplex) -> tuple[FGAbelianGroup, ...]:
    groups = []
    for n in range(len(K.degrees)):
        ker = kernel_basis(K.delta(n))
        im = K.delta(n - 1) if n > 0 else IntMatrix.zeros(K.rank(0), 0)
        groups.append(quotient_group(ker, im))
    return tuple(groups)


def cohomology(P: Presheaf, c: Cover) -> CohomologyResult:
    """H^n = ker delta^n / im delta^(n-1) of the Čech complex of ``c``."""
    K = build_cech_complex(P, c)
    return CohomologyResult(_cohomology_of(K), c.part_indices, "cech")


def cohomology_of_space(P: Presheaf) -> CohomologyResult:
    """Cohomology of the whole space, from the minimal-open cover."""
    c = minimal_open_cover(P.topology)
    K = build_chain_complex(P, c)
    return CohomologyResult(_cohomology_of(K), c.part_indices, "chain")
