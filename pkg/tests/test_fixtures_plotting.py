import json

import pytest

from fibrations import fixtures
from fibrations.atbd import facet_extract
from fibrations.complex import build_dual_complex
from fibrations.negvertex import NegVertexConfig
from fibrations.plotting import count_gids, render_amoeba, render_complex, render_diagram


@pytest.mark.parametrize("name", fixtures.names())
def test_fixture_json_round_trip(name):
    obj = fixtures.load(name)
    data = json.loads(json.dumps(obj.to_dict()))
    again = fixtures.load(name, data)
    assert again.to_dict() == obj.to_dict()


def test_raw_returns_copies():
    a = fixtures.raw("k4")
    a["components"].append("junk")
    assert "junk" not in fixtures.raw("k4")["components"]


def test_unknown_fixture():
    with pytest.raises(KeyError):
        fixtures.raw("nope")


def test_k4_svg():
    svg = render_complex(build_dual_complex(fixtures.load("k4")))
    assert count_gids(svg, "vertex-") == 4
    assert count_gids(svg, "edge-") == 6


def test_b3_svg_has_two_dots_per_edge():
    svg = render_diagram(facet_extract(fixtures.load("negative-vertex-3d"), "B3"))
    assert count_gids(svg, "edge-") == 3
    for i in range(3):
        assert count_gids(svg, f"dot-{i}-") == 2


def test_quadrilateral_svg_marks_node_and_cut():
    svg = render_diagram(fixtures.load("paper-quadrilateral"), title="glued facet")
    assert count_gids(svg, "node-") == 1 and count_gids(svg, "cut-") == 1


def test_amoeba_svg_marks_p1():
    svg = render_amoeba(NegVertexConfig(), resolution=400).decode()
    assert "−ln 2" in svg
    assert 'id="critical-P1"' in svg and 'id="critical-P2"' in svg


def test_svg_is_deterministic(tmp_path):
    d = fixtures.load("paper-quadrilateral")
    a = render_diagram(d, tmp_path / "a.svg")
    b = render_diagram(d, tmp_path / "b.svg")
    assert a == b == (tmp_path / "a.svg").read_bytes()
    assert b"<dc:date>" not in a


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        render_complex(build_dual_complex(fixtures.load("k4")), tmp_path / "missing" / "x.svg")
