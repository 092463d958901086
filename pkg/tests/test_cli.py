import json
import os
import random
from pathlib import Path

import pytest

from sheafkit import __version__
from sheafkit.cli import main, run
from sheafkit.presheaf import is_isomorphism, is_sheaf, sheafify
from sheafkit.spaces import builtin_workspaces, epr_workspace
from sheafkit.testing import random_cover, random_presheaf, random_topology
from sheafkit.workspace import (ParseError, ShapeError, Workspace, digest, load_workspace, parse_workspace,
                                serialize)

ROOT = Path(__file__).resolve().parent.parent
WS = ROOT / "workspaces"
GOLDEN = Path(__file__).resolve().parent / "golden"
UPDATE = os.environ.get("SHEAFKIT_UPDATE_GOLDEN") == "1"


@pytest.fixture(autouse=True)
def at_root(monkeypatch):
    monkeypatch.chdir(ROOT)


def cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def machine(capsys, *argv):
    code, out = cli(capsys, "--machine", *argv)
    return code, json.loads(out)


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc), encoding="utf-8")
    return str(p)


def sierpinski_doc():
    return json.loads((WS / "sierpinski.json").read_text())


# shipped workspaces


@pytest.mark.parametrize("name", sorted(builtin_workspaces()))
def test_shipped_workspace_files_are_current(name):
    assert (WS / f"{name}.json").read_text(encoding="utf-8") == serialize(builtin_workspaces()[name])


@pytest.mark.parametrize("name", sorted(builtin_workspaces()))
def test_round_trip(name):
    ws = builtin_workspaces()[name]
    text = serialize(ws)
    again = parse_workspace(text)
    assert again == ws
    assert serialize(again) == text


@pytest.mark.parametrize("seed", range(15))
def test_random_round_trip(seed):
    rng = random.Random(seed)
    T = random_topology(rng, max_points=5)
    ws = Workspace(T, {"p": random_presheaf(rng, T, coeff=3)}, {"c": random_cover(rng, T)})
    assert parse_workspace(serialize(ws)) == ws


def test_load_workspace():
    ws = load_workspace(str(WS / "pseudocircle.json"))
    assert set(ws.covers) == {"whole", "halves"}


# validate


def test_validate_ok(capsys):
    code, rep = machine(capsys, "validate", "workspaces/sierpinski.json")
    assert code == 0 and rep["status"] == "ok"
    assert rep["version"] == __version__
    assert rep["input digest"] == digest((WS / "sierpinski.json").read_bytes())


def test_validate_union_witness(capsys, tmp_path):
    doc = {"format": "sheafkit/1", "topology": {"points": ["a", "b", "c"], "opens": [[], ["a"], ["b"], ["a", "b", "c"]]}}
    code, rep = machine(capsys, "validate", write(tmp_path, "bad.json", doc))
    assert code == 2
    assert "NotClosedUnderUnion" in rep["error"]
    assert sorted(rep["payload"]["witness"]) == [["a"], ["b"]]


def test_validate_malformed_matrix(capsys, tmp_path):
    doc = sierpinski_doc()
    doc["presheaves"]["const"]["restrictions"][1]["matrix"] = [[1, 2], [3]]
    code, rep = machine(capsys, "validate", write(tmp_path, "bad.json", doc))
    assert code == 1 and "ragged" in rep["error"]
    doc["presheaves"]["const"]["restrictions"][1]["matrix"] = [["x"]]
    code, rep = machine(capsys, "validate", write(tmp_path, "bad.json", doc))
    assert code == 1 and "ParseError" in rep["error"]


def test_wrong_shape_is_domain_failure(tmp_path):
    doc = sierpinski_doc()
    doc["presheaves"]["const"]["restrictions"][1]["matrix"] = [[1], [1]]
    with pytest.raises(ShapeError):
        parse_workspace(json.dumps(doc))


def test_wrong_shape_exit_code(capsys, tmp_path):
    doc = sierpinski_doc()
    doc["presheaves"]["const"]["restrictions"][1]["matrix"] = [[1, 2]]
    code, rep = machine(capsys, "validate", write(tmp_path, "bad.json", doc))
    assert code == 2 and "ShapeError" in rep["error"]


def test_validate_reports_functor_violation(capsys, tmp_path):
    doc = json.loads((WS / "pseudocircle.json").read_text())
    edges = doc["presheaves"]["const"]["restrictions"]
    # {a} <= {a,b} <= {a,b,c}: change one leg only, so two paths disagree
    target = next(e for e in edges if e["to"] == 1 and e["from"] == 3)
    target["matrix"] = [[2]]
    code, rep = machine(capsys, "validate", write(tmp_path, "v.json", doc))
    assert code == 2
    assert rep["payload"]["presheaves"]["const"]["composition violations"]


def test_bad_json_reports_position(capsys, tmp_path):
    code, rep = machine(capsys, "validate", write(tmp_path, "x.json", '{"format": "sheafkit/1",\n  "topology": }'))
    assert code == 1
    assert "line 2" in rep["error"]


def test_unknown_format(capsys, tmp_path):
    doc = sierpinski_doc()
    doc["format"] = "sheafkit/99"
    code, _ = machine(capsys, "validate", write(tmp_path, "x.json", doc))
    assert code == 1


def test_missing_file(capsys):
    code, rep = machine(capsys, "validate", "no/such/file.json")
    assert code == 1 and rep["status"] == "parse error"


def test_point_cap_env(capsys, tmp_path, monkeypatch):
    pts = [f"p{i:02d}" for i in range(17)]
    path = write(tmp_path, "big.json", {"format": "sheafkit/1", "topology": {"points": pts, "opens": [[], pts]}})
    code, rep = machine(capsys, "validate", path)
    assert code == 2 and "TooManyPoints" in rep["error"]
    monkeypatch.setenv("SHEAFKIT_MAX_POINTS", "32")
    assert machine(capsys, "validate", path)[0] == 0


# check-sheaf


def test_check_sheaf(capsys):
    code, rep = machine(capsys, "check-sheaf", "workspaces/discrete2.json", "--presheaf", "const")
    assert code == 2
    assert "existence failure at {a,b}" in rep["payload"]["verdict"]
    code, rep = machine(capsys, "check-sheaf", "workspaces/discrete2.json", "--presheaf", "sheaf")
    assert code == 0 and rep["payload"]["verdict"] == "sheaf"


def test_unknown_presheaf(capsys):
    code, rep = machine(capsys, "check-sheaf", "workspaces/discrete2.json", "--presheaf", "nope")
    assert code == 2 and "UnknownPresheaf" in rep["error"]


# sheafify


def test_sheafify_round_trip(capsys, tmp_path):
    out = str(tmp_path / "out.json")
    code, rep = machine(capsys, "sheafify", "workspaces/discrete2.json", "--presheaf", "const", "-o", out)
    assert code == 0
    assert rep["payload"]["ranks"]["{a,b}"] == 2
    first = Path(out).read_bytes()
    assert rep["payload"]["output digest"] == digest(first)

    assert machine(capsys, "validate", out)[0] == 0
    assert machine(capsys, "check-sheaf", out, "--presheaf", "const+")[0] == 0

    again = str(tmp_path / "again.json")
    assert machine(capsys, "sheafify", out, "--presheaf", "const+", "-o", again)[0] == 0
    ws = load_workspace(again)
    F, FF = ws.presheaves["const+"], ws.presheaves["const++"]
    assert F.ranks == FF.ranks
    assert all(is_isomorphism(m) for m in ws.units["const++"].matrices)

    # rerun gives identical bytes
    machine(capsys, "sheafify", "workspaces/discrete2.json", "--presheaf", "const", "-o", out)
    assert Path(out).read_bytes() == first


def test_sheafify_a_sheaf_keeps_ranks(capsys, tmp_path):
    out = str(tmp_path / "o.json")
    assert machine(capsys, "sheafify", "workspaces/sphere6.json", "--presheaf", "sheaf", "-o", out)[0] == 0
    ws = load_workspace(out)
    assert ws.presheaves["sheaf"].ranks == ws.presheaves["sheaf+"].ranks


def test_sheafify_unwritable(capsys, tmp_path):
    code, rep = machine(capsys, "sheafify", "workspaces/point.json", "--presheaf", "const",
                        "-o", str(tmp_path / "missing" / "dir" / "o.json"))
    assert code == 1


# cohomology


def _bettis(rep):
    return [d["betti"] for d in rep["payload"]["degrees"]]


def test_cohomology_commands(capsys):
    assert _bettis(machine(capsys, "cohomology", "workspaces/pseudocircle.json", "--presheaf", "sheaf", "--minimal")[1]) == [1, 1]
    assert _bettis(machine(capsys, "cohomology", "workspaces/point.json", "--presheaf", "sheaf")[1]) == [1]
    rep = machine(capsys, "cohomology", "workspaces/sphere6.json", "--presheaf", "sheaf")[1]
    assert _bettis(rep) == [1, 0, 1]
    assert rep["payload"]["cover"] == "minimal"
    rep = machine(capsys, "cohomology", "workspaces/pseudocircle.json", "--presheaf", "sheaf", "--cover", "halves")[1]
    assert _bettis(rep) == [1, 1]
    assert rep["payload"]["parts"] == ["{a,b,c}", "{a,b,d}"]


def test_unknown_cover(capsys):
    code, rep = machine(capsys, "cohomology", "workspaces/point.json", "--presheaf", "sheaf", "--cover", "zzz")
    assert code == 2 and "UnknownCover" in rep["error"]


# epr-demo


def test_epr_demo_builtin(capsys):
    code, a = cli(capsys, "epr-demo", "--builtin")
    assert code == 0 and "result: all checks passed" in a
    _, b = cli(capsys, "epr-demo", "--builtin")
    assert a == b


def test_epr_demo_from_file_matches_builtin(capsys):
    code, rep = machine(capsys, "epr-demo", "workspaces/epr.json")
    code2, rep2 = machine(capsys, "epr-demo", "--builtin")
    assert code == code2 == 0
    assert rep["payload"] == rep2["payload"]
    assert rep["input digest"] == rep2["input digest"]


def test_epr_demo_broken_naturality(capsys, tmp_path):
    doc = json.loads((WS / "epr.json").read_text())
    for c in doc["scenario"]["components"]:
        if c["period"] == 3:
            c["matrix"] = [[1, 0]]
    path = write(tmp_path, "broken.json", doc)
    code, out = cli(capsys, "epr-demo", path)
    assert code == 2
    assert "witness square {t1} <= {t1,t2,t3}: [[1, 0]] != [[1, 1]]" in out
    assert "e is not measurable" in out


# reports


def _leaves(obj):
    if isinstance(obj, dict):
        for v in obj.values():
            yield from _leaves(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _leaves(v)
    else:
        yield obj


GOLDEN_COMMANDS = {
    "point": [["validate"], ["check-sheaf", "--presheaf", "const"], ["check-sheaf", "--presheaf", "sheaf"],
              ["cohomology", "--presheaf", "sheaf", "--minimal"]],
    "sierpinski": [["validate"], ["check-sheaf", "--presheaf", "const"], ["check-sheaf", "--presheaf", "sheaf"],
                   ["cohomology", "--presheaf", "sheaf", "--minimal"]],
    "discrete2": [["validate"], ["check-sheaf", "--presheaf", "const"], ["check-sheaf", "--presheaf", "sheaf"],
                  ["cohomology", "--presheaf", "sheaf", "--minimal"]],
    "pseudocircle": [["validate"], ["check-sheaf", "--presheaf", "sheaf"],
                     ["cohomology", "--presheaf", "sheaf", "--minimal"],
                     ["cohomology", "--presheaf", "sheaf", "--cover", "halves"]],
    "sphere6": [["validate"], ["check-sheaf", "--presheaf", "sheaf"],
                ["cohomology", "--presheaf", "sheaf", "--minimal"],
                ["cohomology", "--presheaf", "sheaf", "--cover", "hemispheres"]],
    "epr": [["validate"], ["epr-demo"]],
}
GOLDEN_CASES = [(name, cmd) for name, cmds in GOLDEN_COMMANDS.items() for cmd in cmds]


def _argv(name, cmd):
    return [cmd[0], f"workspaces/{name}.json", *cmd[1:]]


def _golden_name(name, cmd):
    return "_".join([name] + [c.lstrip("-") for c in cmd]) + ".txt"


@pytest.mark.parametrize("name,cmd", GOLDEN_CASES, ids=[_golden_name(n, c)[:-4] for n, c in GOLDEN_CASES])
def test_golden(capsys, name, cmd):
    _, out = cli(capsys, *_argv(name, cmd))
    path = GOLDEN / _golden_name(name, cmd)
    if UPDATE:
        GOLDEN.mkdir(exist_ok=True)
        path.write_text(out, encoding="utf-8")
    assert out == path.read_text(encoding="utf-8")


@pytest.mark.parametrize("name,cmd", GOLDEN_CASES, ids=[_golden_name(n, c)[:-4] for n, c in GOLDEN_CASES])
def test_machine_is_projection_of_human(capsys, name, cmd):
    code, human = cli(capsys, *_argv(name, cmd))
    code2, rep = machine(capsys, *_argv(name, cmd))
    assert code == code2
    for leaf in _leaves(rep):
        text = ", ".join(leaf) if isinstance(leaf, list) else str(leaf)
        assert text in human, leaf


def test_run_returns_report_dict():
    code, rep = run(["validate", "workspaces/point.json"])
    assert code == 0 and rep["exit code"] == 0 and rep["command"] == "validate workspaces/point.json"


def test_epr_builtin_digest_is_stable():
    assert digest(serialize(epr_workspace())) == digest((WS / "epr.json").read_text(encoding="utf-8"))


def test_parse_error_has_location():
    with pytest.raises(ParseError) as err:
        parse_workspace('{"format": "sheafkit/1", "topology": {"points": ["a"], "opens": 3}}')
    assert "topology" in str(err.value)


def test_loaded_sheaf_is_sheaf():
    ws = load_workspace(str(WS / "sphere6.json"))
    assert is_sheaf(ws.presheaves["sheaf"])
    assert sheafify(ws.presheaves["const"]).sheaf == ws.presheaves["sheaf"]


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as err:
        main(["--version"])
    assert err.value.code == 0
    assert __version__ in capsys.readouterr().out
