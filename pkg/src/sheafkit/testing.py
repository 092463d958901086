"""Random finite spaces, presheaves and covers for property tests."""

from __future__ import annotations

import random

from .algebra import IntMatrix
from .presheaf import Presheaf, family_lattice
from .topology import Cover, FiniteTopology, OpenSet, topology_from_poset


def random_topology(rng: random.Random, max_points: int = 6, min_points: int = 1) -> FiniteTopology:
    """Down-set topology of a random partial order."""
    n = rng.randint(min_points, max_points)
    pts = [chr(ord("a") + i) for i in range(n)]
    # x_i may only sit above x_j for j < i, so the relation is acyclic
    below = {p: [q for q in pts[:i] if rng.random() < 0.4] for i, p in enumerate(pts)}
    return topology_from_poset(pts, below)


def random_presheaf(rng: random.Random, T: FiniteTopology, max_rank: int = 3,
                    empty_rank: int | None = None, coeff: int = 1) -> Presheaf:
    """A presheaf that satisfies the functor laws by construction.

    Opens are handled smallest first.  The map out of F(U) into its Hasse
    children must agree on pairwise overlaps, so each column is drawn from
    the lattice of compatible families over the children.
    """
    n = len(T.opens)
    ranks = [rng.randint(0, max_rank) for _ in range(n)]
    ranks[T.empty] = rng.randint(0, max_rank) if empty_rank is None else empty_rank
    children: dict[int, list[int]] = {u: [] for u in range(n)}
    for v, u in T.hasse_edges:
        children[u].append(v)

    res: dict[tuple[int, int], IntMatrix] = {}
    for u in range(n):
        res[u, u] = IntMatrix.identity(ranks[u])
        kids = sorted(children[u])
        if not kids:
            continue
        partial = Presheaf(T, ranks, res)
        K = family_lattice(partial, kids)
        cols = []
        for _ in range(ranks[u]):
            c = [rng.randint(-coeff, coeff) for _ in range(K.cols)]
            cols.append(K.apply(c) if K.cols else (0,) * K.rows)
        fam = IntMatrix.from_cols(cols, K.rows) if cols else IntMatrix.zeros(K.rows, 0)
        off = 0
        for w in kids:
            block = fam.submatrix(range(off, off + ranks[w]), range(ranks[u]))
            off += ranks[w]
            res[w, u] = block
            for v in T.subopens(w):
                if v != w and (v, u) not in res:
                    res[v, u] = res[v, w] @ block
    return Presheaf(T, ranks, res)


def random_cover(rng: random.Random, T: FiniteTopology, max_parts: int = 4) -> Cover:
    """A cover of the whole space by up to ``max_parts`` opens (at least one per point)."""
    full = T.full
    parts: list[int] = []
    pool = list(range(1, len(T.opens)))
    while True:
        k = rng.randint(1, max_parts)
        parts = sorted(rng.sample(pool, min(k, len(pool))))
        if set().union(*(T.opens[i] for i in parts)) == set(T.points):
            break
    rng.shuffle(parts)
    return Cover(OpenSet(T, full), tuple(OpenSet(T, i) for i in parts))
