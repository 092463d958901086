"""Workspace files: one JSON document holding a topology and named data on it.

Opens are referred to by index into the canonical open ordering.  Presheaf
restrictions are given on Hasse edges only and composed at load time.

    {
      "format": "sheafkit/1",
      "topology": {"points": [...], "opens": [[...], ...]},
      "presheaves": {NAME: {"ranks": [...],
                            "restrictions": [{"from": U, "to": V, "matrix": [[...]]}]}},
      "covers": {NAME: {"covered": U, "parts": [U, ...]}},
      "units": {NAME: {"source": NAME, "matrices": [[[...]], ...]}},
      "scenario": {...}
    }
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .algebra import IntMatrix
from .epr import Entity, GeneralizedTimeCategory, Scenario, TimeLabels
from .presheaf import Presheaf
from .topology import Cover, FiniteTopology, OpenSet, validate_topology

FORMAT = "sheafkit/1"


class ParseError(ValueError):
    """Malformed input; ``where`` is a line/column or a JSON path."""

    def __init__(self, message: str, where: str = ""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class ShapeError(ValueError):
    """A well-formed matrix whose shape disagrees with the ranks it connects."""

    def __init__(self, where: str, expected, got):
        self.where = where
        super().__init__(f"{where}: matrix has shape {got}, expected {expected}")


@dataclass(frozen=True)
class Unit:
    source: str
    matrices: tuple[IntMatrix, ...]


@dataclass
class Workspace:
    topology: FiniteTopology
    presheaves: dict[str, Presheaf] = field(default_factory=dict)
    covers: dict[str, Cover] = field(default_factory=dict)
    units: dict[str, Unit] = field(default_factory=dict)
    scenario: Scenario | None = None

    def __eq__(self, other):
        if not isinstance(other, Workspace):
            return NotImplemented
        return to_json(self) == to_json(other)


# reading


def _expect(cond: bool, message: str, where: str) -> None:
    if not cond:
        raise ParseError(message, where)


def _int(x, where: str) -> int:
    _expect(isinstance(x, int) and not isinstance(x, bool), f"expected an integer, got {x!r}", where)
    return x


def _int_list(x, where: str) -> list[int]:
    _expect(isinstance(x, list), f"expected a list, got {type(x).__name__}", where)
    return [_int(v, f"{where}[{i}]") for i, v in enumerate(x)]


def _matrix(x, rows: int, cols: int, where: str) -> IntMatrix:
    _expect(isinstance(x, list), "matrix must be a list of rows", where)
    parsed = [_int_list(r, f"{where}[{i}]") for i, r in enumerate(x)]
    widths = {len(r) for r in parsed}
    _expect(len(widths) <= 1, "ragged matrix rows", where)
    got_cols = widths.pop() if widths else cols
    if (len(parsed), got_cols) != (rows, cols):
        raise ShapeError(where, (rows, cols), (len(parsed), got_cols))
    return IntMatrix(rows, cols, (v for r in parsed for v in r))


def _open_index(x, T: FiniteTopology, where: str) -> int:
    i = _int(x, where)
    _expect(0 <= i < len(T.opens), f"no open with index {i}", where)
    return i


def parse_workspace(text: str) -> Workspace:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(err.msg, f"line {err.lineno}, column {err.colno}") from None
    return from_json(doc)


def load_workspace(path: str) -> Workspace:
    with open(path, encoding="utf-8") as fh:
        return parse_workspace(fh.read())


def from_json(doc: Any) -> Workspace:
    _expect(isinstance(doc, dict), "workspace must be a JSON object", "$")
    _expect(doc.get("format") == FORMAT, f"unknown format version {doc.get('format')!r}", "$.format")
    top = doc.get("topology")
    _expect(isinstance(top, dict), "missing topology block", "$.topology")
    points = top.get("points")
    _expect(isinstance(points, list) and all(isinstance(p, str) for p in points),
            "points must be a list of strings", "$.topology.points")
    opens = top.get("opens")
    _expect(isinstance(opens, list), "opens must be a list", "$.topology.opens")
    for i, o in enumerate(opens):
        _expect(isinstance(o, list) and all(isinstance(p, str) for p in o),
                "each open must be a list of point names", f"$.topology.opens[{i}]")
    T = validate_topology(points, opens)
    ws = Workspace(T)

    for name, block in _named(doc, "presheaves"):
        where = f"$.presheaves.{name}"
        _expect(isinstance(block, dict), "presheaf block must be an object", where)
        ranks = _int_list(block.get("ranks"), f"{where}.ranks")
        _expect(len(ranks) == len(T.opens), f"{len(ranks)} ranks for {len(T.opens)} opens", f"{where}.ranks")
        _expect(all(r >= 0 for r in ranks), "ranks must be nonnegative", f"{where}.ranks")
        edges = {}
        restr = block.get("restrictions", [])
        _expect(isinstance(restr, list), "restrictions must be a list", f"{where}.restrictions")
        for k, item in enumerate(restr):
            w = f"{where}.restrictions[{k}]"
            _expect(isinstance(item, dict), "restriction must be an object", w)
            u = _open_index(item.get("from"), T, f"{w}.from")
            v = _open_index(item.get("to"), T, f"{w}.to")
            _expect((v, u) not in edges, "duplicate restriction", w)
            edges[v, u] = _matrix(item.get("matrix"), ranks[v], ranks[u], f"{w}.matrix")
        ws.presheaves[name] = Presheaf.from_hasse(T, ranks, edges)

    for name, block in _named(doc, "covers"):
        where = f"$.covers.{name}"
        _expect(isinstance(block, dict), "cover block must be an object", where)
        covered = _open_index(block.get("covered"), T, f"{where}.covered")
        parts = block.get("parts")
        _expect(isinstance(parts, list), "parts must be a list", f"{where}.parts")
        idx = [_open_index(p, T, f"{where}.parts[{i}]") for i, p in enumerate(parts)]
        ws.covers[name] = Cover(OpenSet(T, covered), tuple(OpenSet(T, i) for i in idx))

    for name, block in _named(doc, "units"):
        where = f"$.units.{name}"
        _expect(isinstance(block, dict), "unit block must be an object", where)
        src = block.get("source")
        _expect(src in ws.presheaves and name in ws.presheaves,
                "unit must connect two presheaves of this workspace", where)
        mats = block.get("matrices")
        _expect(isinstance(mats, list) and len(mats) == len(T.opens), "one matrix per open", f"{where}.matrices")
        P, Q = ws.presheaves[src], ws.presheaves[name]
        ws.units[name] = Unit(src, tuple(_matrix(m, Q.ranks[i], P.ranks[i], f"{where}.matrices[{i}]")
                                         for i, m in enumerate(mats)))

    if doc.get("scenario") is not None:
        ws.scenario = _scenario(doc["scenario"], ws)
    return ws


def _named(doc: dict, key: str):
    block = doc.get(key, {})
    _expect(isinstance(block, dict), f"{key} must be an object", f"$.{key}")
    return sorted(block.items())


def _scenario(block, ws: Workspace) -> Scenario:
    where = "$.scenario"
    T = ws.topology
    _expect(isinstance(block, dict), "scenario must be an object", where)
    chain = [_open_index(c, T, f"{where}.chain[{i}]") for i, c in enumerate(block.get("chain") or [])]
    stamps = block.get("stamps")
    _expect(isinstance(stamps, list) and all(isinstance(s, (str, int)) for s in stamps),
            "stamps must be rationals written as strings or integers", f"{where}.stamps")
    try:
        stamps = [Fraction(s) for s in stamps]
    except (ValueError, ZeroDivisionError):
        raise ParseError("bad rational stamp", f"{where}.stamps") from None
    time = GeneralizedTimeCategory(T, tuple(chain))
    labels = TimeLabels(time, tuple(stamps))

    ents = block.get("entities")
    _expect(isinstance(ents, dict) and ents, "entities must be a nonempty object", f"{where}.entities")
    entities = {}
    for name, comp in sorted(ents.items()):
        w = f"{where}.entities.{name}"
        _expect(isinstance(comp, dict), "entity must map worlds to presheaf names", w)
        parts = []
        for world in ("time", "micro", "macro"):
            ref = comp.get(world)
            _expect(ref in ws.presheaves, f"unknown presheaf {ref!r}", f"{w}.{world}")
            parts.append(ws.presheaves[ref])
        entities[name] = Entity(name, *parts)

    def ref(key):
        v = block.get(key)
        _expect(v in entities, f"unknown entity {v!r}", f"{where}.{key}")
        return v

    left, right, observer = ref("left"), ref("right"), ref("observer")
    period = _open_index(block.get("period"), T, f"{where}.period")

    def morphisms(key, source: Presheaf, target: Presheaf):
        items = block.get(key)
        _expect(isinstance(items, list), f"{key} must be a list", f"{where}.{key}")
        out = {}
        for k, item in enumerate(items):
            w = f"{where}.{key}[{k}]"
            _expect(isinstance(item, dict), "entry must be an object", w)
            v = _open_index(item.get("period"), T, f"{w}.period")
            out[v] = _matrix(item.get("matrix"), target.ranks[v], source.ranks[v], f"{w}.matrix")
        return out

    corr = None
    if block.get("correlation") is not None:
        corr = morphisms("correlation", entities[right].micro, entities[left].micro)
    comps = morphisms("components", entities[left].micro, entities[observer].micro)
    positions = block.get("positions", [])
    _expect(isinstance(positions, list) and all(isinstance(p, str) for p in positions),
            "positions must be a list of strings", f"{where}.positions")
    name = block.get("name", "scenario")
    _expect(isinstance(name, str), "name must be a string", f"{where}.name")
    return Scenario(name, time, labels, entities, left, right, corr, observer, period, comps,
                    tuple(positions))


# writing


def _matrix_json(m: IntMatrix) -> list:
    return m.to_lists()


def to_json(ws: Workspace) -> dict:
    T = ws.topology
    doc: dict[str, Any] = {
        "format": FORMAT,
        "topology": {"points": list(T.points), "opens": [sorted(o) for o in T.opens]},
    }
    if ws.presheaves:
        doc["presheaves"] = {
            name: {"ranks": list(P.ranks),
                   "restrictions": [{"from": u, "to": v, "matrix": _matrix_json(P.restrictions[v, u])}
                                    for v, u in sorted(T.hasse_edges, key=lambda e: (e[1], e[0]))]}
            for name, P in ws.presheaves.items()}
    if ws.covers:
        doc["covers"] = {name: {"covered": c.covered.index, "parts": list(c.part_indices)}
                         for name, c in ws.covers.items()}
    if ws.units:
        doc["units"] = {name: {"source": u.source, "matrices": [_matrix_json(m) for m in u.matrices]}
                        for name, u in ws.units.items()}
    if ws.scenario is not None:
        doc["scenario"] = _scenario_json(ws.scenario, ws)
    return doc


def _scenario_json(sc: Scenario, ws: Workspace) -> dict:
    def name_of(P: Presheaf) -> str:
        for n, Q in sorted(ws.presheaves.items()):
            if Q == P:
                return n
        raise ValueError("scenario uses a presheaf missing from the workspace")

    def morphisms(d):
        return [{"period": v, "matrix": _matrix_json(m)} for v, m in sorted(d.items())]

    return {
        "name": sc.name,
        "chain": list(sc.time.chain),
        "stamps": [str(s) for s in sc.labels.stamps],
        "positions": list(sc.positions),
        "entities": {n: {"time": name_of(e.time), "micro": name_of(e.micro), "macro": name_of(e.macro)}
                     for n, e in sc.entities.items()},
        "left": sc.left,
        "right": sc.right,
        "observer": sc.observer,
        "period": sc.period,
        "correlation": None if sc.correlation is None else morphisms(sc.correlation),
        "components": morphisms(sc.components),
    }


def _is_flat(x) -> bool:
    return isinstance(x, list) and all(
        not isinstance(v, (dict, list)) or (isinstance(v, list) and all(not isinstance(w, (dict, list)) for w in v))
        for v in x)


def dumps(doc: Any, indent: int = 0) -> str:
    """Canonical JSON: sorted keys, two-space indent, short lists on one line."""
    pad = "  " * indent
    if isinstance(doc, dict):
        if not doc:
            return "{}"
        items = [f'{pad}  {json.dumps(k, ensure_ascii=False)}: {dumps(v, indent + 1)}' for k, v in sorted(doc.items())]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(doc, list):
        if _is_flat(doc):
            return json.dumps(doc, separators=(", ", ": "), ensure_ascii=False)
        items = [f"{pad}  {dumps(v, indent + 1)}" for v in doc]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return json.dumps(doc, ensure_ascii=False)


def serialize(ws: Workspace) -> str:
    return dumps(to_json(ws)) + "\n"


def digest(data: str | bytes) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return "sha256:" + hashlib.sha256(data).hexdigest()[:16]
