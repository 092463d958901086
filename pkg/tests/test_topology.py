import random
from itertools import combinations

import pytest

from sheafkit.spaces import discrete, pseudocircle, sierpinski, sphere6
from sheafkit.testing import random_topology
from sheafkit.topology import (Cover, DifferentTopologies, MissingEmptyOrFull, NotClosedUnderIntersection,
                               NotClosedUnderUnion, NotOpen, TooManyPoints, UnknownPoint, check_cover,
                               hom_set, minimal_open, minimal_open_cover, topology_from_poset,
                               validate_topology)


def _labels(T, parts):
    return [T.label(p.index if hasattr(p, "index") else p) for p in parts]


def test_discrete_two_points():
    T = validate_topology(["a", "b"], [[], ["a"], ["b"], ["a", "b"]])
    assert len(T.opens) == 4
    assert T.label(T.full) == "{a,b}" and T.label(T.empty) == "{}"


def test_sierpinski():
    T = validate_topology(["a", "b"], [[], ["a"], ["a", "b"]])
    assert [T.label(i) for i in range(3)] == ["{}", "{a}", "{a,b}"]


def test_union_witness():
    with pytest.raises(NotClosedUnderUnion) as err:
        validate_topology(["a", "b", "c"], [[], ["a"], ["b"], ["a", "b", "c"]])
    assert {frozenset(w) for w in err.value.witness} == {frozenset("a"), frozenset("b")}


def test_intersection_witness():
    with pytest.raises(NotClosedUnderIntersection):
        validate_topology(["a", "b", "c"], [[], ["a", "b"], ["b", "c"], ["a", "b", "c"]])


def test_missing_empty_or_full():
    with pytest.raises(MissingEmptyOrFull):
        validate_topology(["a"], [["a"]])
    with pytest.raises(MissingEmptyOrFull):
        validate_topology(["a", "b"], [[], ["a"]])


def test_unknown_point_in_open():
    with pytest.raises(UnknownPoint):
        validate_topology(["a"], [[], ["a"], ["z"]])


def test_point_cap(monkeypatch):
    pts = [f"p{i}" for i in range(17)]
    with pytest.raises(TooManyPoints):
        validate_topology(pts, [[], pts])
    monkeypatch.setenv("SHEAFKIT_MAX_POINTS", "20")
    assert len(validate_topology(pts, [[], pts]).points) == 17
    with pytest.raises(TooManyPoints):
        validate_topology(pts, [[], pts], max_points=4)


def test_canonical_order_is_input_independent():
    a = validate_topology(["b", "a"], [["a", "b"], ["b"], [], ["a"]])
    b = validate_topology(["a", "b"], [[], ["a"], ["b"], ["a", "b"]])
    assert a == b
    assert a.opens == b.opens


def test_hom_sets():
    T = sierpinski()
    a, X = T.open("a"), T.open("ab")
    inc = hom_set(a, X)
    assert inc is not None and inc.source == a and inc.target == X
    assert hom_set(a, a).is_identity
    assert hom_set(X, a) is None
    with pytest.raises(DifferentTopologies):
        hom_set(a, discrete().open("a"))


def test_open_rejects_non_open():
    with pytest.raises(NotOpen):
        sierpinski().open("b")


def test_minimal_opens_examples():
    S = sierpinski()
    assert minimal_open(S, "a").points == frozenset("a")
    assert minimal_open(S, "b").points == frozenset("ab")
    assert minimal_open(discrete(), "a").points == frozenset("a")
    assert minimal_open(pseudocircle(), "c").points == frozenset("abc")
    with pytest.raises(UnknownPoint):
        minimal_open(S, "q")


def test_pseudocircle_from_generators():
    # opens generated by {a},{b},{a,b,c},{a,b,d} under unions and intersections
    gens = [frozenset("a"), frozenset("b"), frozenset("abc"), frozenset("abd")]
    opens = {frozenset(), frozenset("abcd")}
    opens |= set(gens)
    changed = True
    while changed:
        changed = False
        for x, y in combinations(list(opens), 2):
            for z in (x | y, x & y):
                if z not in opens:
                    opens.add(z)
                    changed = True
    T = validate_topology("abcd", opens)
    assert T == pseudocircle()


def _brute_minimal(T, x):
    s = set(T.points)
    for u in T.opens:
        if x in u:
            s &= u
    return frozenset(s)


def test_check_cover_examples():
    D = discrete()
    assert check_cover(Cover(D.open("ab"), (D.open("a"), D.open("b")))).valid
    rep = check_cover(Cover(D.open("ab"), (D.open("a"),)))
    assert not rep.valid and set(rep.uncovered) == {"b"}
    P = pseudocircle()
    assert check_cover(Cover(P.open("abcd"), (P.open("abc"), P.open("abd")))).valid


def test_cover_with_stray_part():
    P = pseudocircle()
    rep = check_cover(Cover(P.open("abc"), (P.open("abd"), P.open("abc"))))
    assert not rep.valid and rep.stray_parts


def test_minimal_open_cover_examples():
    S = sierpinski()
    assert _labels(S, minimal_open_cover(S).parts) == ["{a}", "{a,b}"]
    D = discrete()
    assert _labels(D, minimal_open_cover(D).parts) == ["{a}", "{b}"]
    P = pseudocircle()
    assert _labels(P, minimal_open_cover(P).parts) == ["{a}", "{b}", "{a,b,c}", "{a,b,d}"]
    assert _labels(P, minimal_open_cover(P, P.open("ab")).parts) == ["{a}", "{b}"]


def test_sphere_minimal_opens():
    T = sphere6()
    assert minimal_open(T, "e").points == frozenset("abcde")
    assert len(minimal_open_cover(T).parts) == 6


def test_hasse_edges_are_covering_relations():
    T = pseudocircle()
    edges = set(T.hasse_edges)
    for v, u in T.inclusions():
        if v == u:
            continue
        between = [w for w in range(len(T.opens))
                   if w not in (v, u) and T.subset(v, w) and T.subset(w, u)]
        assert ((v, u) in edges) == (not between)


# properties over random spaces


@pytest.mark.parametrize("seed", range(40))
def test_random_topologies_are_closed(seed):
    T = random_topology(random.Random(seed), max_points=6)
    opens = set(T.opens)
    assert frozenset() in opens and frozenset(T.points) in opens
    for x, y in combinations(T.opens, 2):
        assert x | y in opens and x & y in opens
    for x in T.points:
        assert T.opens[T.minimal_open_index(x)] == _brute_minimal(T, x)
    # revalidating the open list is a fixed point
    assert validate_topology(T.points, T.opens) == T


@pytest.mark.parametrize("seed", range(20))
def test_minimal_cover_is_valid(seed):
    T = random_topology(random.Random(100 + seed), max_points=6)
    for u in range(len(T.opens)):
        c = minimal_open_cover(T, T.open(u))
        assert check_cover(c).valid
        assert all(T.subset(p, u) for p in c.part_indices)


def test_poset_topology_matches_down_sets():
    T = topology_from_poset("abc", {"c": "ab"})
    assert set(T.opens) == {frozenset(), frozenset("a"), frozenset("b"), frozenset("ab"), frozenset("abc")}
