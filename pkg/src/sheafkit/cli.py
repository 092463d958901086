"""sheafkit command line.

Exit codes: 0 success, 1 parse or I/O error, 2 domain failure.
"""

from __future__ import annotations

import argparse
import sys
from typing import Any

from . import __version__
from .algebra import AlgebraError
from .cech import InvalidCover, cohomology, cohomology_of_space
from .epr import EPRError, render_report, run_scenario
from .presheaf import PresheafError, is_sheaf, sheafify, validate_presheaf
from .spaces import epr_workspace
from .topology import NotClosedUnderIntersection, NotClosedUnderUnion, TopologyError, check_cover
from .workspace import (ParseError, ShapeError, Unit, Workspace, digest, dumps, parse_workspace,
                        serialize)

OK, PARSE_ERROR, DOMAIN_FAILURE = 0, 1, 2
DOMAIN_ERRORS = (TopologyError, PresheafError, AlgebraError, EPRError, ShapeError, InvalidCover)


class Failure(Exception):
    """Domain failure carrying a report payload."""

    def __init__(self, message: str, payload: dict | None = None):
        super().__init__(message)
        self.payload = payload or {}


def _read(path: str) -> tuple[Workspace, str]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as err:
        raise ParseError(f"cannot read file: {err.strerror}", path) from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise ParseError("file is not UTF-8", path) from None
    return parse_workspace(text), digest(raw)


def _presheaf(ws: Workspace, name: str):
    if name not in ws.presheaves:
        raise Failure(f"UnknownPresheaf: {name!r}", {"known": sorted(ws.presheaves)})
    P = ws.presheaves[name]
    rep = validate_presheaf(P)
    if not rep.valid:
        raise Failure(f"presheaf {name!r} breaks the functor laws", _presheaf_payload(ws, rep))
    return P


def _presheaf_payload(ws: Workspace, rep) -> dict:
    T = ws.topology
    return {"valid": rep.valid,
            "identity violations": [T.label(u) for u in rep.identity_violations],
            "composition violations": [" <= ".join(T.label(i) for i in t) for t in rep.composition_violations]}


def _group(g) -> dict:
    return {"betti": g.betti, "torsion": list(g.torsion), "group": str(g)}


# commands


def cmd_validate(ws: Workspace, args) -> tuple[int, dict]:
    T = ws.topology
    payload: dict[str, Any] = {"topology": {"points": len(T.points), "opens": len(T.opens)}}
    ok = True
    pre = {}
    for name, P in ws.presheaves.items():
        rep = validate_presheaf(P)
        ok &= rep.valid
        pre[name] = _presheaf_payload(ws, rep)
    if pre:
        payload["presheaves"] = pre
    covers = {}
    for name, c in ws.covers.items():
        rep = check_cover(c)
        ok &= rep.valid
        covers[name] = {"valid": rep.valid, "uncovered": sorted(rep.uncovered),
                        "stray parts": list(rep.stray_parts)}
    if covers:
        payload["covers"] = covers
    for name, u in ws.units.items():
        good = _unit_is_natural(ws, name, u)
        ok &= good
        payload.setdefault("units", {})[name] = {"source": u.source, "natural": good}
    if ws.scenario is not None:
        payload["scenario"] = {"name": ws.scenario.name, "entities": sorted(ws.scenario.entities)}
    return (OK if ok else DOMAIN_FAILURE), payload


def _unit_is_natural(ws: Workspace, name: str, u: Unit) -> bool:
    P, Q = ws.presheaves[u.source], ws.presheaves[name]
    return all(Q.restrictions[v, w] @ u.matrices[w] == u.matrices[v] @ P.restrictions[v, w]
               for v, w in ws.topology.inclusions())


def cmd_check_sheaf(ws: Workspace, args) -> tuple[int, dict]:
    P = _presheaf(ws, args.presheaf)
    rep = is_sheaf(P)
    T = ws.topology
    failures = [{"open": T.label(f.open), "kind": f.kind} for f in rep.failures]
    if rep.is_sheaf:
        verdict = "sheaf"
    else:
        verdict = "not a sheaf: " + ", ".join(f"{f['kind']} failure at {f['open']}" for f in failures)
    payload = {"presheaf": args.presheaf, "sheaf": rep.is_sheaf, "verdict": verdict, "failures": failures}
    return (OK if rep.is_sheaf else DOMAIN_FAILURE), payload


def cmd_sheafify(ws: Workspace, args) -> tuple[int, dict]:
    P = _presheaf(ws, args.presheaf)
    sheaf, unit = sheafify(P)
    T = ws.topology
    new_name = args.presheaf + "+"
    out = Workspace(T, {args.presheaf: P, new_name: sheaf},
                    units={new_name: Unit(args.presheaf, tuple(unit[i] for i in range(len(T.opens))))})
    text = serialize(out)
    try:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as err:
        raise ParseError(f"IoError: cannot write: {err.strerror}", args.output) from None
    payload = {"presheaf": args.presheaf, "sheafified": new_name, "output": args.output,
               "output digest": digest(text),
               "ranks": {T.label(i): r for i, r in enumerate(sheaf.ranks)}}
    return OK, payload


def cmd_cohomology(ws: Workspace, args) -> tuple[int, dict]:
    P = _presheaf(ws, args.presheaf)
    T = ws.topology
    if args.cover is not None:
        if args.cover not in ws.covers:
            raise Failure(f"UnknownCover: {args.cover!r}", {"known": sorted(ws.covers)})
        c = ws.covers[args.cover]
        res = cohomology(P, c)
        cover_name, method = args.cover, "Čech complex of the cover"
    else:
        res = cohomology_of_space(P)
        cover_name, method = "minimal", "chains of the minimal-open cover"
    payload = {"presheaf": args.presheaf, "cover": cover_name,
               "parts": [T.label(i) for i in res.cover], "method": method,
               "degrees": [dict(degree=n, **_group(g)) for n, g in enumerate(res.groups)]}
    return OK, payload


def cmd_epr_demo(ws: Workspace, args) -> tuple[int, dict]:
    if ws.scenario is None:
        raise Failure("workspace has no scenario block")
    rep = run_scenario(ws.scenario)
    return (OK if rep["passed"] else DOMAIN_FAILURE), rep


# rendering


def render_human(report: dict) -> str:
    lines = [f"sheafkit {report['version']} | {report['command']} | input {report['input digest']}"]
    lines.append(f"status: {report['status']} (exit {report['exit code']})")
    if "error" in report:
        lines.append(f"error: {report['error']}")
    payload = report.get("payload", {})
    if report["command"].startswith("epr-demo") and "checks" in payload:
        lines.append(render_report(payload).rstrip("\n"))
    elif report["command"].startswith("cohomology") and "degrees" in payload:
        lines.append(f"presheaf: {payload['presheaf']}")
        lines.append(f"cover: {payload['cover']} [{', '.join(payload['parts'])}]")
        lines.append(f"method: {payload['method']}")
        for d in payload["degrees"]:
            tors = ",".join(map(str, d["torsion"])) or "-"
            lines.append(f"H^{d['degree']}: {d['group']}  (betti {d['betti']}, torsion {tors})")
    else:
        lines.extend(_render_tree(payload, 0))
    return "\n".join(lines) + "\n"


def _render_tree(obj, depth: int) -> list[str]:
    pad = "  " * depth
    out = []
    for key, val in obj.items():
        if isinstance(val, dict):
            out.append(f"{pad}{key}:")
            out.extend(_render_tree(val, depth + 1))
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            out.append(f"{pad}{key}:")
            for item in val:
                out.append(f"{pad}  - " + "; ".join(f"{k}={v}" for k, v in item.items()))
        elif isinstance(val, list):
            out.append(f"{pad}{key}: " + (", ".join(map(str, val)) if val else "none"))
        else:
            out.append(f"{pad}{key}: {val}")
    return out


# entry point


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--machine", action="store_true", default=argparse.SUPPRESS,
                        help="emit the report as JSON")
    p = argparse.ArgumentParser(prog="sheafkit", description="Sheaves, Čech cohomology and the EPR model on finite spaces.")
    p.add_argument("--machine", action="store_true", help="emit the report as JSON")
    p.add_argument("--version", action="version", version=f"sheafkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check a workspace file")
    s.add_argument("file")

    s = sub.add_parser("check-sheaf", parents=[common], help="decide the sheaf axiom for a presheaf")
    s.add_argument("file")
    s.add_argument("--presheaf", required=True)

    s = sub.add_parser("sheafify", parents=[common], help="write the sheafification of a presheaf")
    s.add_argument("file")
    s.add_argument("--presheaf", required=True)
    s.add_argument("-o", "--output", required=True)

    s = sub.add_parser("cohomology", parents=[common], help="cohomology groups of a presheaf")
    s.add_argument("file")
    s.add_argument("--presheaf", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--cover")
    g.add_argument("--minimal", action="store_true", help="use the minimal-open cover (default)")

    s = sub.add_parser("epr-demo", parents=[common], help="run the EPR entanglement scenario")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--builtin", action="store_true")
    g.add_argument("scenario", nargs="?")
    return p


COMMANDS = {
    "validate": cmd_validate,
    "check-sheaf": cmd_check_sheaf,
    "sheafify": cmd_sheafify,
    "cohomology": cmd_cohomology,
    "epr-demo": cmd_epr_demo,
}


def _echo(args) -> str:
    parts = [args.command]
    for key in ("file", "scenario"):
        if getattr(args, key, None):
            parts.append(getattr(args, key))
    if getattr(args, "builtin", False):
        parts.append("--builtin")
    for key in ("presheaf", "cover"):
        if getattr(args, key, None):
            parts.append(f"--{key} {getattr(args, key)}")
    if getattr(args, "minimal", False):
        parts.append("--minimal")
    return " ".join(parts)


def run(argv: list[str] | None = None) -> tuple[int, dict]:
    args = _parser().parse_args(argv)
    report: dict[str, Any] = {"version": __version__, "command": _echo(args), "input digest": "-"}
    try:
        if args.command == "epr-demo" and args.builtin:
            ws = epr_workspace()
            report["input digest"] = digest(serialize(ws))
        else:
            ws, report["input digest"] = _read(args.file if args.command != "epr-demo" else args.scenario)
        code, payload = COMMANDS[args.command](ws, args)
        report["payload"] = payload
    except ParseError as err:
        code = PARSE_ERROR
        report["error"] = f"ParseError: {err}"
    except Failure as err:
        code = DOMAIN_FAILURE
        report["error"] = str(err)
        report["payload"] = err.payload
    except (NotClosedUnderUnion, NotClosedUnderIntersection) as err:
        code = DOMAIN_FAILURE
        report["error"] = f"{type(err).__name__}: {err}"
        report["payload"] = {"witness": [sorted(s) for s in err.witness]}
    except DOMAIN_ERRORS as err:
        code = DOMAIN_FAILURE
        report["error"] = f"{type(err).__name__}: {err}"
    report["status"] = {OK: "ok", PARSE_ERROR: "parse error", DOMAIN_FAILURE: "failed"}[code]
    report["exit code"] = code
    report["machine"] = bool(getattr(args, "machine", False))
    return code, report


def main(argv: list[str] | None = None) -> int:
    code, report = run(argv)
    machine = report.pop("machine")
    if machine:
        sys.stdout.write(dumps(report) + "\n")
    else:
        sys.stdout.write(render_human(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
