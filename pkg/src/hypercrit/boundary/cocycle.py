"""Shadow-lemma ratios and the Poincare quasi-cocycle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from hypercrit.boundary.cylinders import shadow
from hypercrit.boundary.measures import DensityFamily, Mass
from hypercrit.errors import InvalidInputError, NotFoundError
from hypercrit.space.tree import Letters, Word, as_word, iter_sphere
from hypercrit.subgroups.counting import elements
from hypercrit.subgroups.handles import SubgroupHandle


def _fmt(m: Mass):
    return f"{m.numerator}/{m.denominator}" if isinstance(m, Fraction) else m


@dataclass(frozen=True)
class ShadowLemmaTable:
    radius: int
    delta: float
    rows: list[tuple[Word, Mass, Mass, Mass]]
    minimum: Mass
    maximum: Mass
    normalized_min: Mass
    normalized_max: Mass

    @property
    def spread(self) -> float:
        return float(self.maximum) / float(self.minimum)

    def to_json(self) -> dict:
        return {
            "R": self.radius,
            "delta": self.delta,
            "min": _fmt(self.minimum),
            "max": _fmt(self.maximum),
            "normalizedMin": _fmt(self.normalized_min),
            "normalizedMax": _fmt(self.normalized_max),
            "rows": [
                {"gamma": str(g), "shadowMass": _fmt(m), "ratio": _fmt(r), "normalizedRatio": _fmt(q)}
                for g, m, r, q in self.rows
            ],
        }


def shadow_lemma_check(
    h: SubgroupHandle, delta: float | None, radius: int, rmax: int, density: DensityFamily
) -> ShadowLemmaTable:
    """nu_o(S_R(o, gamma^-1 o)) e^{delta |gamma|} for gamma in H, 1 <= |gamma| <= rmax.

    With ``delta`` None the density's own dimension is used, which keeps the
    ratios exact for exact densities. The normalised column divides by
    pi(gamma) = ||nu_{gamma^-1 o}||.
    """
    if delta is not None and delta <= 0:
        raise InvalidInputError("delta must be positive")
    if density.rank != h.rank:
        raise InvalidInputError("density and subgroup have different ranks")
    rows = []
    for g in elements(h, rmax):
        if not g.letters:
            continue
        sh = shadow(Word(), g.inverse(), radius, h.rank)
        m = density.base.mass_of(sh.stems)
        weight = density.growth(len(g)) if delta is None else math.exp(delta * len(g))
        ratio = m * weight
        rows.append((g, m, ratio, ratio / density.pi(g)))
    if not rows:
        raise NotFoundError(f"no nontrivial element of length <= {rmax}", radius=rmax)
    ratios = [r[2] for r in rows]
    normed = [r[3] for r in rows]
    d = density.delta if delta is None else delta
    return ShadowLemmaTable(radius, d, rows, min(ratios), max(ratios), min(normed), max(normed))


@dataclass(frozen=True)
class CocycleReport:
    g: Word
    h: Word
    pi_g: Mass
    pi_h: Mass
    pi_gh: Mass
    pi_g_conj: Mass
    residual: float

    def to_json(self) -> dict:
        return {
            "g": str(self.g),
            "h": str(self.h),
            "pi(g,H)": _fmt(self.pi_g),
            "pi(h,H)": _fmt(self.pi_h),
            "pi(gh,H)": _fmt(self.pi_gh),
            "pi(g,hHh^-1)": _fmt(self.pi_g_conj),
            "residual": self.residual,
        }


def _lookup(densities: Mapping[tuple, DensityFamily], sub: SubgroupHandle) -> DensityFamily:
    fam = densities.get(sub.key)
    if fam is None:
        raise NotFoundError(f"no density supplied for the conjugate {sub!r}")
    return fam


def quasi_cocycle(
    densities: Mapping[tuple, DensityFamily], h_sub: SubgroupHandle, g: Word | str, h: Word | str
) -> CocycleReport:
    """pi values and |ln pi(gh,H) - ln pi(g,hHh^-1) - ln pi(h,H)|.

    ``densities`` maps canonical subgroup keys to density families.
    """
    g, h = as_word(g, h_sub.rank), as_word(h, h_sub.rank)
    fam = _lookup(densities, h_sub)
    fam_conj = _lookup(densities, h_sub.conjugate(h))
    pi_g = fam.pi(g)
    pi_h = fam.pi(h)
    pi_gh = fam.pi(g * h)
    pi_gc = fam_conj.pi(g)
    if isinstance(pi_gh, Fraction) and isinstance(pi_gc, Fraction) and isinstance(pi_h, Fraction):
        ratio = pi_gh / (pi_gc * pi_h)
        residual = 0.0 if ratio == 1 else abs(math.log(ratio))
    else:
        residual = abs(math.log(pi_gh) - math.log(pi_gc) - math.log(pi_h))
    return CocycleReport(g, h, pi_g, pi_h, pi_gh, pi_gc, residual)


def pi_sphere_sums(density: DensityFamily, nmax: int) -> list[Mass]:
    """[sum over |gamma| = n of pi(gamma)] for n = 0..nmax, over the whole of F_k.

    pi(gamma) only depends on the first ``depth`` letters of gamma^-1 and on
    |gamma|, so longer spheres are summed one depth-word at a time.
    """
    rank = density.rank
    depth = density.base.depth
    zero: Mass = Fraction(0) if density.exact else 0.0
    out = []
    for n in range(nmax + 1):
        if n <= depth:
            out.append(sum((density.total_at(Word(w)) for w in iter_sphere(rank, n)), zero))
            continue
        fill = (2 * rank - 1) ** (n - depth)
        acc = zero
        for w in iter_sphere(rank, depth):
            rep = _extend_letter(w, n)
            acc += density.total_at(Word(rep)) * fill
        out.append(acc)
    return out


def _extend_letter(w: Letters, n: int) -> Letters:
    # any extension gives the same pi; repeat the last letter
    return w + (w[-1],) * (n - len(w))
