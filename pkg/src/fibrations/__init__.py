"""Combinatorial and numerical tools for Lagrangian torus fibrations near divisors."""

from .atbd import AlmostToricDiagram2D, BaseDiagram3D, facet_extract, mutate, shear
from .atlas import AffineAtlas, LoopWord, check_duality, monodromy_lagr, monodromy_nonarch
from .complex import SncPresentation, betti, build_dual_complex, cone
from .groups import FreeWord, Presentation, abelianization, is_proper_power, smith_normal_form

__version__ = "0.1.0"

__all__ = [
    "AffineAtlas", "AlmostToricDiagram2D", "BaseDiagram3D", "FreeWord", "LoopWord", "Presentation",
    "SncPresentation", "abelianization", "betti", "build_dual_complex", "check_duality", "cone",
    "facet_extract", "is_proper_power", "monodromy_lagr", "monodromy_nonarch", "mutate", "shear",
    "smith_normal_form",
]
