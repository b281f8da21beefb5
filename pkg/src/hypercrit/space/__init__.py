"""Geometry of the two models: the Cayley tree of F_k and the hyperbolic plane.

The functions here dispatch on argument type; mixing models is an error.
"""

from __future__ import annotations

import math

from hypercrit.errors import InvalidInputError, UnsupportedOperationError
from hypercrit.space import plane, tree
from hypercrit.space.plane import PlaneIsometry, PlanePoint
from hypercrit.space.tree import IDENTITY, BoundaryPoint, Word, reduce_word

__all__ = [
    "BoundaryPoint",
    "IDENTITY",
    "PlaneIsometry",
    "PlanePoint",
    "Word",
    "axis_endpoints",
    "busemann",
    "classify_isometry",
    "dist",
    "gromov_product",
    "reduce_word",
    "translation_length",
    "visual_distance",
]


def _model(*points) -> str:
    kinds = set()
    for p in points:
        if isinstance(p, Word):
            kinds.add("tree")
        elif isinstance(p, PlanePoint):
            kinds.add("plane")
        else:
            raise InvalidInputError(f"not a point of either model: {p!r}")
    if len(kinds) != 1:
        raise InvalidInputError("arguments come from different models")
    return kinds.pop()


def dist(x, y):
    if _model(x, y) == "tree":
        return tree.dist(x, y)
    return plane.dist(x, y)


def gromov_product(x, y, base=None):
    if _model(x, y, *([base] if base is not None else [])) == "tree":
        return tree.gromov_product(x, y, base if base is not None else IDENTITY)
    if base is None:
        base = PlanePoint(0.0, 1.0)
    return plane.gromov_product(x, y, base)


def visual_distance(xi, eta, base=IDENTITY, a: float = math.e) -> float:
    if not (isinstance(xi, BoundaryPoint) and isinstance(eta, BoundaryPoint)):
        raise UnsupportedOperationError(
            "visual distance is only implemented on the tree; use angular coordinates on the plane"
        )
    return tree.visual_distance(xi, eta, base, a)


def busemann(xi, x, y):
    model = _model(x, y)
    if model == "tree":
        if not isinstance(xi, BoundaryPoint):
            raise InvalidInputError("tree Busemann functions need a tree boundary point")
        return tree.busemann(xi, x, y)
    if isinstance(xi, BoundaryPoint):
        raise InvalidInputError("plane Busemann functions need a real boundary point or infinity")
    return plane.busemann(float(xi), x, y)


def classify_isometry(g) -> str:
    if isinstance(g, Word):
        return tree.classify(g)
    if isinstance(g, PlaneIsometry):
        return plane.classify(g)
    raise InvalidInputError(f"not an isometry: {g!r}")


def axis_endpoints(h):
    if isinstance(h, Word):
        return tree.axis_endpoints(h)
    if isinstance(h, PlaneIsometry):
        return plane.axis_endpoints(h)
    raise InvalidInputError(f"not an isometry: {h!r}")


def translation_length(h):
    if isinstance(h, Word):
        return tree.translation_length(h)
    if isinstance(h, PlaneIsometry):
        return plane.translation_length(h)
    raise InvalidInputError(f"not an isometry: {h!r}")
