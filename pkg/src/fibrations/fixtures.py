"""Bundled example inputs, stored as plain JSON-compatible data."""

from __future__ import annotations

import copy
from typing import Any, Callable

from .atbd import AlmostToricDiagram2D, BaseDiagram3D
from .atlas import AffineAtlas, line_bundle_cycle_atlas
from .complex import SncPresentation


def _pairs(names):
    return [{"J": [a, b], "count": 1} for i, a in enumerate(names) for b in names[i + 1:]]


K4_PRESENTATION = {
    "n": 2,
    "components": ["Y1", "Y2", "Y3", "Y4"],
    "strata": _pairs(["Y1", "Y2", "Y3", "Y4"]),
}

THREE_CYCLE_PRESENTATION = {
    "n": 2,
    "components": ["Y1", "Y2", "Y3"],
    "strata": _pairs(["Y1", "Y2", "Y3"]),
}

SMOOTH_DIVISOR_PRESENTATION = {"n": 2, "components": ["Y1"], "strata": []}

NEGATIVE_VERTEX_PRESENTATION = {
    "n": 3,
    "components": ["Y1", "Y2", "Y3", "Y4"],
    "strata": _pairs(["Y1", "Y2", "Y3", "Y4"]) + [
        {"J": list(t), "count": 1}
        for t in (("Y1", "Y2", "Y3"), ("Y1", "Y2", "Y4"), ("Y1", "Y3", "Y4"), ("Y2", "Y3", "Y4"))
    ],
}

CUBIC_ATLAS = line_bundle_cycle_atlas((-1, -1, -1)).to_dict()

NEGATIVE_VERTEX_3D = {
    "vertices": {
        "P": [0, 0, 0],
        "Q": [0, 0, 3],
        "B134": [1, 0, 0],
        "B123": [4, 0, 3],
        "B124": [0, 3, 3],
        "B234": [1, 3, 3],
    },
    "facets": {
        "B1": ["P", "B134", "B123", "Q"],
        "B1'": ["P", "Q", "B124"],
        "B2": ["B124", "Q", "B123", "B234"],
        "B3": ["B134", "B123", "B234"],
        "B4": ["B124", "B234", "B134", "P"],
    },
    "edges": {
        "B12": ["Q", "B123"],
        "B'12": ["B124", "Q"],
        "B13": ["B134", "B123"],
        "B14": ["P", "B134"],
        "B'14": ["B124", "P"],
        "B11'": ["P", "Q"],
        "B23": ["B123", "B234"],
        "B24": ["B124", "B234"],
        "B34": ["B134", "B234"],
    },
    "glued_facets": {"B1∪B1'": {"facets": ["B1", "B1'"], "wall": "upper"}},
    "excised": {"center": ["1/2", "1/2", "3/2"], "radius": "1/4"},
    "branch_plane": {
        "point": ["1/2", "1/2", 0],
        "line": [0, 0, 1],
        "span": [-1, -1, 0],
        "from_side": [1, -1, 0],
    },
    "walls": {
        "upper": [[2, -1, 0], [1, 0, 0], [0, 0, 1]],
        "lower": [[2, -1, 0], [1, 0, 0], [1, -1, 1]],
    },
    "rays": [
        {"base": ["1/2", "1/2", 3], "direction": [0, 0, -1]},
        {"base": ["1/2", "1/2", "1/2"], "direction": [0, 0, 1]},
        {"base": [0, 0, "3/2"], "direction": [1, 1, 0]},
    ],
}

# The two planar pictures of the glued facet; the first carries the node of
# the drawn figure, whose cut runs from the boundary point (0, 0) up to it.
PAPER_QUADRILATERAL = {
    "polygon": [[0, 0], [1, 0], [4, 3], [-3, 3]],
    "nodes": [{"position": [0, 1], "cut": [0, -1], "eigen": [0, 1], "shear": 1}],
    "edge_labels": ["B14", "B13", "B12∪B'12", "B'14"],
}

PAPER_RECTANGLE = {
    "polygon": [[0, 0], [4, 0], [4, 3], [0, 3]],
    "nodes": [{"position": [2, 1], "cut": [-1, 1], "eigen": [-1, 1], "shear": 1}],
}

NEGVERTEX_CONFIG = {"c": -0.8}


def _negvertex_config(data):
    from .negvertex import NegVertexConfig
    return NegVertexConfig.from_dict(data)


_REGISTRY: dict[str, tuple[dict[str, Any], Callable[[dict], Any]]] = {
    "k4": (K4_PRESENTATION, SncPresentation.from_dict),
    "three-cycle": (THREE_CYCLE_PRESENTATION, SncPresentation.from_dict),
    "smooth-divisor": (SMOOTH_DIVISOR_PRESENTATION, SncPresentation.from_dict),
    "negative-vertex-divisor": (NEGATIVE_VERTEX_PRESENTATION, SncPresentation.from_dict),
    "cubic-atlas": (CUBIC_ATLAS, AffineAtlas.from_dict),
    "negative-vertex-3d": (NEGATIVE_VERTEX_3D, BaseDiagram3D.from_dict),
    "paper-quadrilateral": (PAPER_QUADRILATERAL, AlmostToricDiagram2D.from_dict),
    "paper-rectangle": (PAPER_RECTANGLE, AlmostToricDiagram2D.from_dict),
    "negvertex-config": (NEGVERTEX_CONFIG, _negvertex_config),
}


def names() -> list[str]:
    return list(_REGISTRY)


def raw(name: str) -> dict[str, Any]:
    """A fresh deep copy of the fixture's JSON data."""
    try:
        return copy.deepcopy(_REGISTRY[name][0])
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(_REGISTRY)}") from None


def load(name: str, data: dict[str, Any] | None = None):
    parse = _REGISTRY[name][1]
    return parse(raw(name) if data is None else data)
