"""Boundary of the tree: cylinders, shadows, densities and the quasi-cocycle."""

from hypercrit.boundary.cocycle import (
    CocycleReport,
    ShadowLemmaTable,
    pi_sphere_sums,
    quasi_cocycle,
    shadow_lemma_check,
)
from hypercrit.boundary.cylinders import (
    BusemannBoundsReport,
    CoverReport,
    Shadow,
    busemann_shadow_bounds_check,
    canonicalize,
    intersection,
    shadow,
    shadow_cover_check,
    translate_cylinder,
    union,
)
from hypercrit.boundary.measures import (
    EPSILON_LADDER,
    CylinderMeasure,
    DensityFamily,
    OrbitMeasure,
    boundary_project,
    density_for,
    density_ladder,
    exact_conformal_density,
    full_group_density,
    projected_density,
    ws_measure,
)

__all__ = [
    "EPSILON_LADDER",
    "BusemannBoundsReport",
    "CocycleReport",
    "CoverReport",
    "CylinderMeasure",
    "DensityFamily",
    "OrbitMeasure",
    "Shadow",
    "ShadowLemmaTable",
    "boundary_project",
    "busemann_shadow_bounds_check",
    "canonicalize",
    "intersection",
    "density_for",
    "density_ladder",
    "exact_conformal_density",
    "full_group_density",
    "pi_sphere_sums",
    "projected_density",
    "quasi_cocycle",
    "shadow",
    "shadow_cover_check",
    "shadow_lemma_check",
    "translate_cylinder",
    "union",
    "ws_measure",
]
