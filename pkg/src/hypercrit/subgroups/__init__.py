"""Subgroups of F_k: handles, membership, exact orbit counting."""

from hypercrit.subgroups.counting import (
    AnnulusCount,
    CoornaertTable,
    annulus_count,
    ball_counts,
    coornaert_ratio,
    elements,
    orbit_sphere_counts,
    sphere_count,
    sphere_counts,
)
from hypercrit.subgroups.graphs import CosetTable, FiniteAction, StallingsGraph
from hypercrit.subgroups.handles import (
    CosetStabilizer,
    KernelAbelian,
    KernelFinite,
    Stallings,
    SubgroupHandle,
    conjugate_subgroup,
    contains,
    full_group,
    subgroup_from_json,
)


def stallings_fold(generators, rank: int | None = None) -> StallingsGraph:
    """Folded core graph of the subgroup generated by ``generators``."""
    from hypercrit.space.tree import as_word

    words = [as_word(g, rank) for g in generators]
    if rank is None:
        rank = max([2] + [w.max_letter() for w in words])
    return StallingsGraph.fold(rank, words)


__all__ = [
    "AnnulusCount",
    "CoornaertTable",
    "CosetStabilizer",
    "CosetTable",
    "FiniteAction",
    "KernelAbelian",
    "KernelFinite",
    "Stallings",
    "StallingsGraph",
    "SubgroupHandle",
    "annulus_count",
    "ball_counts",
    "conjugate_subgroup",
    "contains",
    "coornaert_ratio",
    "elements",
    "full_group",
    "orbit_sphere_counts",
    "sphere_count",
    "sphere_counts",
    "stallings_fold",
    "subgroup_from_json",
]
