"""Entities, entanglement and measurement over a generalized time category.

An entity assigns to every time period V (an open of a finite topology) one
value per world: time (0), micro (1) and macro (2).  Each world is a presheaf
of free Z-modules, so morphisms are integer matrices and every naturality
square is an exact matrix identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, NamedTuple, Sequence

from .algebra import IntMatrix, solve_matrix
from .presheaf import Presheaf, validate_presheaf
from .topology import FiniteTopology

TIME, MICRO, MACRO = 0, 1, 2
WORLDS = ("time", "micro", "macro")


class EPRError(ValueError):
    pass


class UnknownPeriod(EPRError):
    pass


class PeriodOffChain(EPRError):
    pass


class MissingComponent(EPRError):
    def __init__(self, period: int):
        self.period = period
        super().__init__(f"no component given at period {period}")


class ShapeMismatch(EPRError):
    pass


class CorrelationNotNatural(EPRError):
    def __init__(self, square: "Square", reason: str = "square does not commute"):
        self.square = square
        self.reason = reason
        super().__init__(f"correlation square for period {square.smaller} inside {square.larger}: {reason}")


# finite categories


@dataclass(frozen=True)
class FiniteCategory:
    """Objects, named morphisms per hom-set, a composition table and identities.

    ``compose[g, f]`` is the name of g after f, for f : X -> Y and g : Y -> Z.
    Morphism names are global, so a name lives in exactly one hom-set.
    """

    objects: tuple
    homs: Mapping[tuple[Any, Any], tuple[str, ...]]
    compose: Mapping[tuple[str, str], str]
    identity: Mapping[Any, str]

    def ends(self) -> dict[str, tuple[Any, Any]]:
        return {m: st for st, ms in self.homs.items() for m in ms}


@dataclass
class CategoryReport:
    missing: list = field(default_factory=list)
    wrong_hom: list = field(default_factory=list)
    identity: list = field(default_factory=list)
    associativity: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not (self.missing or self.wrong_hom or self.identity or self.associativity)


def validate_category(C: FiniteCategory) -> CategoryReport:
    """Check closure, identity laws and associativity on every composable triple."""
    rep = CategoryReport()
    ends = C.ends()
    for x in C.objects:
        i = C.identity.get(x)
        if i is None or ends.get(i) != (x, x):
            rep.identity.append(("missing identity", x))
    composable = [(g, f) for f, (_, y) in ends.items() for g, (y2, _) in ends.items() if y == y2]
    for g, f in composable:
        h = C.compose.get((g, f))
        if h is None:
            rep.missing.append((g, f))
        elif ends.get(h) != (ends[f][0], ends[g][1]):
            rep.wrong_hom.append((g, f, h))
    if rep.missing or rep.wrong_hom:
        return rep
    for f, (x, y) in ends.items():
        if C.compose[f, C.identity[x]] != f:
            rep.identity.append((f, C.identity[x]))
        if C.compose[C.identity[y], f] != f:
            rep.identity.append((C.identity[y], f))
    for f, (_, y) in ends.items():
        for g, (y2, z) in ends.items():
            if y2 != y:
                continue
            gf = C.compose[g, f]
            for h, (z2, _) in ends.items():
                if z2 != z:
                    continue
                if C.compose[h, gf] != C.compose[C.compose[h, g], f]:
                    rep.associativity.append((h, g, f))
    return rep


def poset_category(T: FiniteTopology) -> FiniteCategory:
    """Opens of T with one morphism per inclusion."""
    n = len(T.opens)
    name = lambda v, u: f"{v}<={u}"  # noqa: E731
    homs = {(v, u): ((name(v, u),) if T.subset(v, u) else ()) for v in range(n) for u in range(n)}
    compose = {}
    for v, u in T.inclusions():
        for w in range(n):
            if T.subset(u, w):
                compose[name(u, w), name(v, u)] = name(v, w)
    return FiniteCategory(tuple(range(n)), homs, compose, {u: name(u, u) for u in range(n)})


# time


@dataclass(frozen=True)
class GeneralizedTimeCategory:
    """A finite topology of time periods with a designated increasing chain."""

    topology: FiniteTopology
    chain: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "chain", tuple(self.chain))
        T = self.topology
        for i in self.chain:
            if not 0 <= i < len(T.opens):
                raise UnknownPeriod(f"no period with index {i}")
        for a, b in zip(self.chain, self.chain[1:]):
            if a == b or not T.subset(a, b):
                raise EPRError(f"chain is not increasing at {T.label(a)}, {T.label(b)}")

    def check_period(self, V: int) -> int:
        if not isinstance(V, int) or not 0 <= V < len(self.topology.opens):
            raise UnknownPeriod(f"no period {V!r}")
        return V


@dataclass(frozen=True)
class TimeLabels:
    """Rational time stamps on the designated chain, nondecreasing along it."""

    time: GeneralizedTimeCategory
    stamps: tuple[Fraction, ...]

    def __post_init__(self):
        stamps = tuple(Fraction(s) for s in self.stamps)
        object.__setattr__(self, "stamps", stamps)
        if len(stamps) != len(self.time.chain):
            raise EPRError(f"{len(stamps)} stamps for a chain of length {len(self.time.chain)}")
        if any(b < a for a, b in zip(stamps, stamps[1:])):
            raise EPRError("time stamps must be nondecreasing along the chain")


def induce_time(tau: TimeLabels, V: int) -> Fraction:
    try:
        return tau.stamps[tau.time.chain.index(V)]
    except ValueError:
        raise PeriodOffChain(f"period {V} is not on the designated chain") from None


# entities


class FreeModule(NamedTuple):
    rank: int

    def __str__(self):
        return "0" if self.rank == 0 else ("Z" if self.rank == 1 else f"Z^{self.rank}")


@dataclass(frozen=True, eq=False)
class Entity:
    name: str
    time: Presheaf
    micro: Presheaf
    macro: Presheaf

    def __post_init__(self):
        T = self.time.topology
        for world, P in zip(WORLDS, self.components):
            if P.topology != T:
                raise EPRError(f"{self.name}: {world} component lives on another topology")
            rep = validate_presheaf(P)
            if not rep.valid:
                raise EPRError(f"{self.name}: {world} component breaks the functor laws: {rep}")

    @property
    def components(self) -> tuple[Presheaf, Presheaf, Presheaf]:
        return (self.time, self.micro, self.macro)

    @property
    def topology(self) -> FiniteTopology:
        return self.time.topology


def evaluate(e: Entity, V: int, position: str | None = None) -> tuple[FreeModule, ...]:
    """Value of ``e`` at period V, one module per world.

    ``position`` is accepted and ignored: the value depends on V alone.
    """
    if not isinstance(V, int) or not 0 <= V < len(e.topology.opens):
        raise UnknownPeriod(f"no period {V!r}")
    return tuple(FreeModule(P.ranks[V]) for P in e.components)


@dataclass(frozen=True)
class Square:
    """Naturality square for the inclusion smaller <= larger."""

    smaller: int
    larger: int
    lhs: IntMatrix  # target restriction after component at larger
    rhs: IntMatrix  # component at smaller after source restriction

    @property
    def commutes(self) -> bool:
        return self.lhs == self.rhs


def naturality_squares(source: Presheaf, target: Presheaf, components: Mapping[int, IntMatrix],
                       periods: Sequence[int]):
    """Yield the square of every inclusion among ``periods``."""
    T = source.topology
    ps = sorted(periods)
    for u in ps:
        for v in ps:
            if v != u and T.subset(v, u):
                yield Square(v, u, target.restriction(v, u) @ components[u],
                             components[v] @ source.restriction(v, u))


def _check_shapes(source: Presheaf, target: Presheaf, components: Mapping[int, IntMatrix], periods):
    for v in periods:
        if components[v].shape != (target.ranks[v], source.ranks[v]):
            raise ShapeMismatch(f"component at period {v} has shape {components[v].shape}, "
                                f"expected {(target.ranks[v], source.ranks[v])}")


@dataclass(frozen=True, eq=False)
class EntangledPair:
    left: Entity
    right: Entity
    correlation: Mapping[int, IntMatrix]  # right.micro(V) -> left.micro(V)

    def evaluate(self, V: int, position: str | None = None):
        return (evaluate(self.left, V, position), evaluate(self.right, V, position))

    def as_entity(self) -> Entity:
        """The pair as one entity: componentwise direct sums."""
        return Entity(f"({self.left.name},{self.right.name})",
                      *(direct_sum(a, b) for a, b in zip(self.left.components, self.right.components)))


def direct_sum(A: Presheaf, B: Presheaf) -> Presheaf:
    res = {}
    for (v, u), ra in A.restrictions.items():
        rb = B.restrictions[v, u]
        top = IntMatrix.hstack([ra, IntMatrix.zeros(ra.rows, rb.cols)], rows=ra.rows)
        bot = IntMatrix.hstack([IntMatrix.zeros(rb.rows, ra.cols), rb], rows=rb.rows)
        res[v, u] = IntMatrix.vstack([top, bot], cols=ra.cols + rb.cols)
    return Presheaf(A.topology, [a + b for a, b in zip(A.ranks, B.ranks)], res)


def entangle(e: Entity, e2: Entity, correlation: Mapping[int, IntMatrix]) -> EntangledPair:
    """Pair two entities through micro morphisms e2(V) -> e(V).

    Periods missing from ``correlation`` are filled in from the smallest given
    period containing them, by solving that naturality square.  Every square
    is then checked.
    """
    if e.topology != e2.topology:
        raise EPRError("entities live over different time categories")
    T = e.topology
    L, R = e.micro, e2.micro
    given = dict(correlation)
    _check_shapes(R, L, given, given)
    full = dict(given)
    for v in range(len(T.opens)):
        if v in full:
            continue
        sup = [u for u in sorted(given) if T.subset(v, u)]
        if not sup:
            raise MissingComponent(v)
        u = sup[0]
        rhs = L.restriction(v, u) @ given[u]
        m = solve_matrix(R.restriction(v, u).T, rhs.T)
        if m is None:
            raise CorrelationNotNatural(Square(v, u, rhs, R.restriction(v, u)),
                                        "no morphism at the smaller period makes the square commute")
        full[v] = m.T
    for sq in naturality_squares(R, L, full, range(len(T.opens))):
        if not sq.commutes:
            raise CorrelationNotNatural(sq)
    return EntangledPair(e, e2, full)


def compose_pairs(outer: EntangledPair, inner: EntangledPair) -> EntangledPair:
    """(e, e') and (e', e'') give (e, e'') with the composite correlation."""
    if outer.right is not inner.left:
        raise EPRError("pairs do not chain")
    return EntangledPair(outer.left, inner.right,
                         {v: outer.correlation[v] @ inner.correlation[v] for v in outer.correlation})


# measurement


@dataclass(frozen=True, eq=False)
class NaturalTransformation:
    source: Entity
    target: Entity
    period: int
    components: Mapping[int, IntMatrix]
    world: int = MICRO


@dataclass(frozen=True)
class Measurement:
    transformation: NaturalTransformation | None
    failure: Square | None = None
    squares: int = 0

    @property
    def measurable(self) -> bool:
        return self.transformation is not None

    def __bool__(self):
        return self.measurable


def is_measurable(P: Entity, Q: Entity, U: int, candidate: Mapping[int, IntMatrix],
                  world: int = MICRO) -> Measurement:
    """Is P observable by Q over period U through ``candidate``?

    ``candidate`` needs a morphism P(V) -> Q(V) for every period V inside U.
    """
    T = P.topology
    if not 0 <= U < len(T.opens):
        raise UnknownPeriod(f"no period {U!r}")
    periods = T.subopens(U)
    for v in periods:
        if v not in candidate:
            raise MissingComponent(v)
    src, tgt = P.components[world], Q.components[world]
    _check_shapes(src, tgt, candidate, periods)
    count = 0
    for sq in naturality_squares(src, tgt, candidate, periods):
        count += 1
        if not sq.commutes:
            return Measurement(None, sq, count)
    comps = {v: candidate[v] for v in periods}
    return Measurement(NaturalTransformation(P, Q, U, comps, world), None, count)


def induced_measurement(pair: EntangledPair, P: Entity, V: int, obs: IntMatrix) -> IntMatrix:
    """obs : e(V) -> P(V) induces obs . correlation(V) : e'(V) -> P(V)."""
    expected = (P.micro.ranks[V], pair.left.micro.ranks[V])
    if obs.shape != expected:
        raise ShapeMismatch(f"observation at period {V} has shape {obs.shape}, expected {expected}")
    return obs @ pair.correlation[V]


def pair_morphism(pair: EntangledPair, P: Entity, V: int, obs: IntMatrix) -> IntMatrix:
    """The morphism (e(V), e'(V)) -> P(V) assembled from obs and its induced map."""
    return IntMatrix.hstack([obs, induced_measurement(pair, P, V, obs)], rows=obs.rows)


# scenarios


@dataclass
class Scenario:
    name: str
    time: GeneralizedTimeCategory
    labels: TimeLabels
    entities: dict[str, Entity]
    left: str
    right: str
    correlation: dict[int, IntMatrix] | None
    observer: str
    period: int
    components: dict[int, IntMatrix]
    positions: tuple[str, ...] = ("here", "there", "far away")


def _fmt_matrix(m: IntMatrix) -> str:
    return str(m.to_lists()) if m.rows else f"[] ({m.rows}x{m.cols})"


def run_scenario(sc: Scenario) -> dict:
    """Run the three EPR checks; the result is a plain, JSON-ready dict."""
    T = sc.time.topology
    e, e2, obs_by = sc.entities[sc.left], sc.entities[sc.right], sc.entities[sc.observer]
    periods = [v for v in range(len(T.opens)) if v != T.empty]

    # (i) position independence
    rows = []
    independent = True
    for v in periods:
        vals = {p: (evaluate(e, v, p), evaluate(e2, v, p)) for p in sc.positions}
        first = vals[sc.positions[0]]
        same = all(x == first for x in vals.values())
        independent &= same
        rows.append({"period": T.label(v),
                     "left": [str(m) for m in first[0]],
                     "right": [str(m) for m in first[1]],
                     "positions": len(sc.positions), "equal": same})
    check1 = {"name": "position independence", "passed": independent and len(sc.positions) >= 3,
              "periods": rows}

    # (ii) measurability of the left entity
    meas = is_measurable(e, obs_by, sc.period, sc.components)
    check2 = {"name": f"naturality of {sc.left} -> {sc.observer} over {T.label(sc.period)}",
              "passed": meas.measurable, "squares": meas.squares}
    if meas.failure is not None:
        f = meas.failure
        check2["witness"] = {"smaller": T.label(f.smaller), "larger": T.label(f.larger),
                             "lhs": _fmt_matrix(f.lhs), "rhs": _fmt_matrix(f.rhs)}

    # (iii) induced measurement on the right entity
    check3 = {"name": f"induced measurement {sc.right} -> {sc.observer}", "passed": False}
    pair = None
    if sc.correlation is None:
        check3["status"] = "unavailable: no correlation between the entities"
    else:
        try:
            pair = entangle(e, e2, sc.correlation)
        except CorrelationNotNatural as err:
            sq = err.square
            check3["status"] = f"correlation is not natural: {err.reason}"
            check3["witness"] = {"smaller": T.label(sq.smaller), "larger": T.label(sq.larger),
                                 "lhs": _fmt_matrix(sq.lhs), "rhs": _fmt_matrix(sq.rhs)}
    if pair is not None and not meas.measurable:
        check3["status"] = f"unavailable: {sc.left} is not measurable"
    elif pair is not None:
        sub = T.subopens(sc.period)
        induced = {v: induced_measurement(pair, obs_by, v, sc.components[v]) for v in sub}
        exact = all(induced[v] == sc.components[v] @ pair.correlation[v] for v in sub)
        natural = all(sq.commutes for sq in naturality_squares(e2.micro, obs_by.micro, induced, sub))
        whole = {v: pair_morphism(pair, obs_by, v, sc.components[v]) for v in sub}
        joint = pair.as_entity()
        pair_natural = all(sq.commutes for sq in naturality_squares(joint.micro, obs_by.micro, whole, sub))
        check3["passed"] = exact and natural and pair_natural
        check3["status"] = "ok" if check3["passed"] else "mismatch"
        check3["periods"] = [{"period": T.label(v),
                              "obs": _fmt_matrix(sc.components[v]),
                              "correlation": _fmt_matrix(pair.correlation[v]),
                              "induced": _fmt_matrix(induced[v]),
                              "pair morphism": _fmt_matrix(whole[v])}
                             for v in sub if v != T.empty]
        check3["induced natural"] = natural
        check3["pair morphism natural"] = pair_natural

    stamps = [{"period": T.label(v), "t": str(induce_time(sc.labels, v))} for v in sc.time.chain]
    return {"scenario": sc.name, "time chain": stamps, "positions": list(sc.positions),
            "checks": [check1, check2, check3],
            "passed": all(c["passed"] for c in (check1, check2, check3))}


def render_report(rep: dict) -> str:
    out = [f"scenario: {rep['scenario']}"]
    out.append("time chain: " + " < ".join(f"{s['period']} (t={s['t']})" for s in rep["time chain"]))
    out.append("positions: " + ", ".join(rep["positions"]))
    for k, c in enumerate(rep["checks"], 1):
        out.append(f"[{k}] {c['name']}: {'PASS' if c['passed'] else 'FAIL'}")
        if "status" in c:
            out.append(f"    status: {c['status']}")
        if "squares" in c:
            out.append(f"    squares checked: {c['squares']}")
        for row in c.get("periods", ()):
            out.append("    " + "; ".join(f"{key}={_plain(val)}" for key, val in row.items()))
        if "witness" in c:
            w = c["witness"]
            out.append(f"    witness square {w['smaller']} <= {w['larger']}: {w['lhs']} != {w['rhs']}")
        for key in ("induced natural", "pair morphism natural"):
            if key in c:
                out.append(f"    {key}: {c[key]}")
    out.append("result: " + ("all checks passed" if rep["passed"] else "some checks failed"))
    return "\n".join(out) + "\n"


def _plain(val) -> str:
    if isinstance(val, list):
        return "(" + ", ".join(val) + ")"
    return str(val)


def builtin_scenario(correlated: bool = True) -> Scenario:
    """Two identical spin-like entities anticorrelated over a 3-period chain."""
    from .topology import validate_topology

    T = validate_topology(["t1", "t2", "t3"], [[], ["t1"], ["t1", "t2"], ["t1", "t2", "t3"]])
    V1, V2, V3 = T.index(["t1"]), T.index(["t1", "t2"]), T.full
    time = GeneralizedTimeCategory(T, (V1, V2, V3))
    labels = TimeLabels(time, (Fraction(0), Fraction(1), Fraction(2)))

    M = IntMatrix.from_rows
    spin = Presheaf.from_hasse(T, [0, 2, 2, 2], {
        (0, V1): IntMatrix.zeros(0, 2),
        (V1, V2): IntMatrix.identity(2),
        (V2, V3): M([[1, 1], [0, 1]]),
    })
    one = Presheaf.from_hasse(T, [0, 1, 1, 1], {
        (0, V1): IntMatrix.zeros(0, 1),
        (V1, V2): IntMatrix.identity(1),
        (V2, V3): IntMatrix.identity(1),
    })
    e = Entity("e", one, spin, one)
    e2 = Entity("e'", one, spin, one)
    P = Entity("P", one, one, one)
    corr = {v: IntMatrix.scalar(spin.ranks[v], -1) for v in range(len(T.opens))}
    obs = {0: IntMatrix.zeros(0, 0), V1: M([[1, 0]]), V2: M([[1, 0]]), V3: M([[1, 1]])}
    return Scenario("builtin", time, labels, {"e": e, "e'": e2, "P": P}, "e", "e'",
                    corr if correlated else None, "P", V3, obs,
                    ("lab-A", "lab-B", "andromeda"))


def epr_demo(correlated: bool = True) -> dict:
    return run_scenario(builtin_scenario(correlated))
