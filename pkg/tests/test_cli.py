import json
import subprocess
import sys

import jsonschema

from fibrations import fixtures
from fibrations.cli import main
from fibrations.verify import REPORT_SCHEMA, verify_paper


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, "--json", *argv)
    return code, json.loads(out)


def test_complex_commands(capsys):
    code, data = run_json(capsys, "complex", "betti", "--fixture", "k4", "--h0", "3")
    assert code == 0 and data["betti"] == [1, 3] and data["h0_matches"]
    code, _, _ = run(capsys, "complex", "betti", "--h0", "2")
    assert code == 1
    code, data = run_json(capsys, "complex", "cone", "--fixture", "three-cycle")
    assert code == 0 and data["euler_characteristic"] == 1


def test_complex_from_file(tmp_path, capsys):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(fixtures.raw("three-cycle")))
    code, data = run_json(capsys, "complex", "build", "--input", str(path))
    assert code == 0 and data["f_vector"] == [3, 3]


def test_atlas_monodromy(capsys):
    code, data = run_json(capsys, "atlas", "monodromy", "--conjugate-to", "[[-1,0],[0,-1]]")
    assert code == 0 and data["duality"]
    assert data["rho_lagr"] == [[-1, 0], [0, -1]] and data["conjugator"] is not None


def test_atlas_base_and_loop(capsys):
    code, data = run_json(capsys, "atlas", "monodromy", "--loop", "K1,L12,K2,L23,K3,L13,K1", "--base", "K2")
    assert code == 0 and data["loop"][0] == "K2"
    code, _, err = run(capsys, "atlas", "monodromy", "--base", "L12")
    assert code == 2 and "star cell" in err


def test_atbd_mutate_shear_check(tmp_path, capsys):
    code, data = run_json(capsys, "atbd", "mutate")
    assert code == 0
    path = tmp_path / "m.json"
    path.write_text(json.dumps(data["diagram"]))
    code, data = run_json(capsys, "atbd", "check", "--input", str(path), "--against", "paper-rectangle")
    assert code == 0 and data["transform"] == {"matrix": [[1, -1], [0, 1]], "translation": [3, 0]}
    code, data = run_json(capsys, "atbd", "shear", "--input", str(path), "--matrix", "[[1,-1],[0,1]]",
                          "--translation", "3,0")
    assert code == 0 and sorted(map(tuple, data["diagram"]["polygon"])) == [(0, 0), (0, 3), (4, 0), (4, 3)]
    code, data = run_json(capsys, "atbd", "check")
    assert code == 0 and all(data["straight_edges"].values())
    assert data["facets"]["B3"]["edge_lengths"] == [3, 3, 3]


def test_atbd_render(tmp_path, capsys):
    out = tmp_path / "b3.svg"
    code, _, _ = run(capsys, "atbd", "render", "--facet", "B3", "--svg", str(out))
    assert code == 0 and out.read_bytes().startswith(b"<?xml")
    code, _, err = run(capsys, "atbd", "render")
    assert code == 2 and "--svg" in err


def test_negvertex_commands(tmp_path, capsys):
    code, data = run_json(capsys, "negvertex", "critical-points", "--c", "-0.8")
    assert code == 0 and data["report"]["ok"] and data["report"]["hessian"]
    code, data = run_json(capsys, "negvertex", "flow", "--start=0,-0.5")
    assert code == 0 and data["flow"]["nearest_critical_point"] == "P1"
    code, _, err = run(capsys, "negvertex", "flow", "--start=-0.5,-1.5")
    assert code == 2 and "amoeba" in err
    svg = tmp_path / "a.svg"
    code, data = run_json(capsys, "negvertex", "amoeba", "--resolution", "60", "--svg", str(svg))
    assert code == 0 and data["all_in_amoeba"] and svg.exists()


def test_group_commands(capsys):
    code, data = run_json(capsys, "group", "power", "--word", "abAB")
    assert code == 0 and data["proper_power"] is None
    code, data = run_json(capsys, "group", "power", "--word", "abab")
    assert data["proper_power"] == {"root": "ab", "k": 2}
    code, data = run_json(capsys, "group", "snf", "--matrix", "[[2,4],[6,8]]")
    assert code == 0 and data["diagonal"] == [2, 4]
    code, data = run_json(capsys, "group", "abelianize", "--relators", "abAB")
    assert data["abelianization"] == {"free_rank": 2, "torsion": []}
    code, data = run_json(capsys, "group", "conjugate", "--word", "bbababBB", "--c", "ab", "--max-length", "2")
    assert code == 0 and data["search"]["found"] and data["search"]["k"] == 2
    code, _, err = run(capsys, "group", "snf", "--matrix", "oops")
    assert code == 2 and "JSON" in err


def test_evalmap_command(tmp_path, capsys):
    csv_path = tmp_path / "e.csv"
    code, data = run_json(capsys, "evalmap", "check", "--n", "2", "--samples", "2000", "--csv", str(csv_path))
    assert code == 0 and data["fullness"]["12"]["coverage"] >= 0.95
    assert csv_path.read_text().startswith("re_z1")
    code, _ = run_json(capsys, "evalmap", "check", "--n", "2", "--samples", "500", "--tol", "1e-20")
    assert code == 1


def test_global_flags_after_verb(capsys):
    code, out, _ = run(capsys, "group", "snf", "--matrix", "[[1]]", "--json")
    assert code == 0 and json.loads(out)["diagonal"] == [1]


def test_render_and_fixture_commands(tmp_path, capsys):
    for what in ("complex", "diagram"):
        path = tmp_path / f"{what}.svg"
        assert run(capsys, "render", what, "--svg", str(path))[0] == 0
        assert path.exists()
    assert run(capsys, "render", "facet", "--facet", "B2", "--svg", str(tmp_path / "f.svg"))[0] == 0
    code, out, _ = run(capsys, "fixture")
    assert code == 0 and "negative-vertex-3d" in out


def test_verify_report_schema():
    rep = verify_paper(only=[1, 3, 4, 5])
    jsonschema.validate(rep.to_dict(), REPORT_SCHEMA)
    assert rep.ok and [i.id for i in rep.items] == [1, 3, 4, 5]
    assert all(line.startswith("[PASS]") for line in rep.lines())


def test_verify_negative_control(tmp_path, capsys):
    data = fixtures.raw("negative-vertex-3d")
    data["walls"]["upper"] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    rep = verify_paper({"negative-vertex-3d": data}, only=[4])
    assert not rep.ok and rep.items[0].measured["straight_B12"] is False
    code, out, _ = run(capsys, "--json", "verify-paper", "--override", f"negative-vertex-3d={path}")
    report = json.loads(out)
    jsonschema.validate(report, REPORT_SCHEMA)
    assert code == 1 and not report["ok"]
    failed = [i["id"] for i in report["items"] if not i["passed"]]
    assert 4 in failed


def test_verify_broken_fixture_is_a_failure_not_a_crash():
    rep = verify_paper({"k4": {"n": 2, "components": ["A", "A"], "strata": []}}, only=[1])
    assert not rep.ok and "PresentationError" in rep.items[0].error


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fibrations", "verify-paper"], capture_output=True, text=True,
                         timeout=120)
    assert res.returncode == 0, res.stdout + res.stderr
    assert res.stdout.count("[PASS]") == 9
