"""Stock finite spaces and the builtin workspaces shipped with the CLI."""

from __future__ import annotations

from .epr import builtin_scenario
from .presheaf import constant_presheaf, sheafify
from .topology import Cover, FiniteTopology, topology_from_poset, validate_topology
from .workspace import Workspace


def point() -> FiniteTopology:
    return validate_topology(["a"], [[], ["a"]])


def sierpinski() -> FiniteTopology:
    return validate_topology(["a", "b"], [[], ["a"], ["a", "b"]])


def discrete(n: int = 2) -> FiniteTopology:
    from itertools import combinations

    pts = [chr(ord("a") + i) for i in range(n)]
    opens = [list(c) for k in range(n + 1) for c in combinations(pts, k)]
    return validate_topology(pts, opens)


def pseudocircle() -> FiniteTopology:
    """Four points: a, b open; c and d each sit above both."""
    return topology_from_poset("abcd", {"c": "ab", "d": "ab"})


def sphere6() -> FiniteTopology:
    """Minimal finite model of the 2-sphere: the pseudocircle suspended once more."""
    return topology_from_poset("abcdef", {"c": "ab", "d": "ab", "e": "cd", "f": "cd"})


SPACES = {
    "point": point,
    "sierpinski": sierpinski,
    "discrete2": discrete,
    "pseudocircle": pseudocircle,
    "sphere6": sphere6,
}


def space_workspace(name: str) -> Workspace:
    """Constant presheaf ``const``, its sheafification ``sheaf`` and the unit."""
    T = SPACES[name]()
    const = constant_presheaf(T, 1)
    sheaf, unit = sheafify(const)
    ws = Workspace(T, {"const": const, "sheaf": sheaf})
    from .workspace import Unit

    ws.units["sheaf"] = Unit("const", tuple(unit[i] for i in range(len(T.opens))))
    ws.covers["whole"] = Cover(T.open(T.full), (T.open(T.full),))
    if name == "pseudocircle":
        ws.covers["halves"] = Cover(T.open(T.full), (T.open("abc"), T.open("abd")))
    if name == "sphere6":
        ws.covers["hemispheres"] = Cover(T.open(T.full), (T.open("abcde"), T.open("abcdf")))
    return ws


def epr_workspace() -> Workspace:
    sc = builtin_scenario()
    e = sc.entities["e"]
    ws = Workspace(sc.time.topology, {"one": e.time, "spin": e.micro})
    ws.scenario = sc
    return ws


def builtin_workspaces() -> dict[str, Workspace]:
    out = {name: space_workspace(name) for name in SPACES}
    out["epr"] = epr_workspace()
    return out


def write_builtin_workspaces(directory: str) -> list[str]:
    """Write every builtin workspace as ``<name>.json``; returns the paths."""
    import os

    from .workspace import serialize

    os.makedirs(directory, exist_ok=True)
    paths = []
    for name, ws in builtin_workspaces().items():
        path = os.path.join(directory, f"{name}.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(serialize(ws))
        paths.append(path)
    return paths


if __name__ == "__main__":
    import sys

    for p in write_builtin_workspaces(sys.argv[1] if len(sys.argv) > 1 else "workspaces"):
        print(p)
