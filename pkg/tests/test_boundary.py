import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import corpus
import oracles
from hypercrit.boundary import (
    boundary_project,
    busemann_shadow_bounds_check,
    EPSILON_LADDER,
    canonicalize,
    density_for,
    density_ladder,
    exact_conformal_density,
    full_group_density,
    intersection,
    projected_density,
    quasi_cocycle,
    shadow,
    shadow_cover_check,
    shadow_lemma_check,
    translate_cylinder,
    union,
    ws_measure,
)
from hypercrit.boundary.cocycle import pi_sphere_sums
from hypercrit.boundary.cylinders import children, contains_end, random_end_in, refine, whole_boundary
from hypercrit.errors import InvalidInputError, NotFoundError
from hypercrit.space import BoundaryPoint, Word, busemann
from hypercrit.space.tree import iter_sphere, letter_char
from hypercrit.subgroups import CosetStabilizer, KernelAbelian, KernelFinite, Stallings

F2 = Stallings.full(2)
LN3 = math.log(3)


def S(w):
    return Word.parse(w).letters


def text(letters):
    return "".join(letter_char(c) for c in letters)


short_words = st.text(alphabet="aAbB", max_size=5).map(oracles.reduce)
tiny_words = st.text(alphabet="aAbB", max_size=3).map(oracles.reduce)
stem_sets = st.lists(st.text(alphabet="aAbB", min_size=1, max_size=4).map(oracles.reduce).filter(bool), max_size=6)


class TestCylinders:
    @given(stem_sets)
    def test_canonicalize_idempotent(self, stems):
        c = canonicalize([S(s) for s in stems], 2)
        assert canonicalize(c, 2) == c
        for s in c:
            assert not any(t != s and s[: len(t)] == t for t in c)

    @given(stem_sets, st.integers(0, 5))
    def test_refining_one_cylinder_is_invisible(self, stems, pick):
        c = canonicalize([S(s) for s in stems], 2)
        if not c:
            return
        s = c[pick % len(c)]
        split = [t for t in c if t != s] + children(s, 2)
        assert canonicalize(split, 2) == c

    @given(stem_sets, stem_sets, st.randoms(use_true_random=False))
    def test_union_intersection_pointwise(self, a, b, rng):
        a = canonicalize([S(s) for s in a], 2)
        b = canonicalize([S(s) for s in b], 2)
        u, i = union(a, b, 2), intersection(a, b, 2)
        for _ in range(500 // 60 + 1):
            xi = random_end_in(whole_boundary(2), 2, rng, 6)
            in_a, in_b = contains_end(a, xi), contains_end(b, xi)
            assert contains_end(u, xi) == (in_a or in_b)
            assert contains_end(i, xi) == (in_a and in_b)

    def test_pointwise_500_samples(self):
        rng = random.Random(5)
        a = canonicalize([S("ab"), S("B"), S("aBa")], 2)
        b = canonicalize([S("a"), S("BB")], 2)
        u, i = union(a, b, 2), intersection(a, b, 2)
        for _ in range(500):
            xi = random_end_in(whole_boundary(2), 2, rng, 6)
            assert contains_end(u, xi) == (contains_end(a, xi) or contains_end(b, xi))
            assert contains_end(i, xi) == (contains_end(a, xi) and contains_end(b, xi))

    def test_whole_boundary_merge(self):
        assert canonicalize([S(x) for x in "aAbB"], 2) == whole_boundary(2)
        assert canonicalize([S("ab"), S("aa"), S("aB")], 2) == (S("a"),)
        assert canonicalize([()], 2) == whole_boundary(2)

    @given(tiny_words, tiny_words.filter(bool))
    def test_translate_cylinder(self, g, w):
        stems = translate_cylinder(S(g), S(w), 2)
        depth = len(g) + len(w) + 1
        # g . Cyl(w) is exactly the set of ends g . xi with xi in Cyl(w)
        for leaf in iter_sphere(2, depth):
            lt = text(leaf)
            back = oracles.mul(oracles.inverse(g), lt)
            if len(back) < len(w) + 1:
                continue
            assert contains_end(stems, leaf) == back.startswith(w)


def _brute_shadow_members(x, y, radius, depth):
    out = []
    for leaf in oracles.sphere(2, depth):
        end = leaf + leaf[-1] * (len(x) + len(y) + radius + 4)
        out.append((leaf, oracles.in_shadow(x, y, radius, end)))
    return out


def _check_against_rays(x, y, radius):
    sh = shadow(x or "e", y or "e", radius)
    depth = len(x) + len(y) + 1
    for leaf, inside in _brute_shadow_members(x, y, radius, depth):
        assert contains_end(sh.stems, S(leaf)) == inside, (x, y, radius, leaf)


class TestShadows:
    def test_examples(self):
        assert shadow("", "ab", 0).stems == (S("ab"),)
        assert shadow("", "ab", 1).stems == (S("a"),)
        assert shadow("", "", 2).is_whole
        assert shadow("", "ab", 2).is_whole

    def test_ray_enumeration_depth_five(self):
        sh = shadow("", "ab", 1)
        for leaf, inside in _brute_shadow_members("", "ab", 1, 5):
            assert contains_end(sh.stems, S(leaf)) == inside

    @pytest.mark.parametrize("x,y,radius", [("abA", "bbab", 2), ("Ba", "aab", 0), ("ab", "ab", 3), ("bAA", "", 1)])
    def test_fixed_cases_against_rays(self, x, y, radius):
        _check_against_rays(x, y, radius)

    @given(tiny_words, tiny_words, st.integers(0, 3))
    def test_against_rays(self, x, y, radius):
        _check_against_rays(x, y, radius)

    def test_negative_radius(self):
        with pytest.raises(InvalidInputError):
            shadow("a", "b", -1)


class TestCover:
    def test_examples(self):
        rep = shadow_cover_check(F2, 0, 0, 3)
        assert rep.covered and rep.max_multiplicity == 1 == rep.min_multiplicity
        rep = shadow_cover_check(F2, 1, 1, 4)
        assert rep.covered and rep.max_multiplicity <= 9
        assert shadow_cover_check(KernelFinite.cyclic(2, [1, 0]), 2, 2, 5).covered

    @pytest.mark.parametrize(
        "h,k,radius,r",
        [
            (F2, 1, 1, 4),
            (F2, 2, 0, 2),
            (KernelFinite.cyclic(2, [1, 0]), 2, 2, 5),
            (CosetStabilizer(corpus.S3, 0), 1, 1, 3),
            (Stallings(2, ["a"]), 1, 0, 2),
            (KernelAbelian.commutator(2), 2, 2, 4),
        ],
        ids=["F2", "F2-k2", "parity", "index3", "cyclic", "commutator"],
    )
    def test_against_leaf_count(self, h, k, radius, r):
        rep = shadow_cover_check(h, k, radius, r)
        depth = r + k + radius + 1
        stems = []
        for g in oracles.ball(2, r + k):
            if len(g) >= r and h.contains(g or "e"):
                stems.append(g[: max(len(g) - radius, 0)])
        mult = [sum(1 for s in stems if leaf.startswith(s)) for leaf in oracles.sphere(2, depth)]
        assert rep.max_multiplicity == max(mult)
        assert rep.min_multiplicity == min(mult)
        assert rep.covered == (min(mult) >= 1)

    def test_repeatable(self):
        a = shadow_cover_check(F2, 1, 1, 4)
        b = shadow_cover_check(F2, 1, 1, 4)
        assert a == b


class TestBusemannBounds:
    def test_examples(self):
        rep = busemann_shadow_bounds_check("", "ab", 0, 5)
        assert rep.violations == 0 and rep.beta_min == rep.beta_max == 2
        rep = busemann_shadow_bounds_check("", "ab", 1, 6)
        assert rep.violations == 0 and rep.beta_min == 0
        xi = BoundaryPoint.parse("aB(a)")
        assert busemann(xi, Word.parse(""), Word.parse("ab")) == 0
        with pytest.raises(InvalidInputError):
            busemann_shadow_bounds_check("a", "a", 1, 3)

    @given(short_words, short_words, st.integers(0, 3), st.randoms(use_true_random=False))
    def test_random_ends(self, x, y, radius, rng):
        if x == y:
            return
        sh = shadow(x or "e", y or "e", radius)
        d = oracles.dist(x, y)
        for _ in range(10):
            xi = random_end_in(sh.stems, 2, rng, len(x) + len(y) + radius + 2)
            far = text(xi.head(len(x) + len(y) + 12))
            b = oracles.busemann(far, x, y)
            assert d - 2 * radius <= b <= d


class TestMeasures:
    def test_ws_examples(self):
        m = ws_measure(F2, math.log(4), 2)
        assert m.atoms[0][1] == pytest.approx(1 / 2.75, rel=1e-14)
        assert m.mass_with_prefix(S("a")) == pytest.approx((1 / 4 + 3 / 16) / 2.75, rel=1e-13)
        assert m.total_mass == pytest.approx(1, abs=1e-12)
        cyc = ws_measure(Stallings(2, ["a"]), 1.0, 1)
        weights = sorted(w for _, w in cyc.atoms)
        z = 1 + 2 * math.exp(-1)
        assert weights == pytest.approx(sorted([1 / z, math.exp(-1) / z, math.exp(-1) / z]), rel=1e-14)
        assert all(w > 0 for _, w in m.atoms)

    def test_projection_examples(self):
        proj = boundary_project(ws_measure(F2, math.log(4), 2), 1)
        for x in "aAbB":
            assert proj.mass(x) == pytest.approx(0.25, rel=1e-13)
        assert proj.total_mass == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("case", corpus.RANK2_CASES[:10], ids=lambda c: c.name)
    @pytest.mark.parametrize("depth", [1, 3])
    def test_projection_additive(self, case, depth):
        proj = boundary_project(ws_measure(case.handle, 1.3, 6), depth)
        assert proj.additivity_defect() <= 1e-9
        assert proj.total_mass == pytest.approx(1, abs=1e-12)
        assert all(v >= 0 for v in proj.masses.values())

    def test_symmetric_subgroup(self):
        proj = boundary_project(ws_measure(KernelAbelian.commutator(2), 1.2, 8), 1)
        vals = [proj.mass(x) for x in "aAbB"]
        assert max(vals) - min(vals) <= 1e-12

    def test_exact_examples(self):
        assert exact_conformal_density(2, "", 1).mass("a") == Fraction(1, 4)
        assert exact_conformal_density(2, "a", 1).mass("a") == Fraction(3, 4)
        assert exact_conformal_density(2, "a", 1).total_mass == 1

    def test_exact_additivity(self):
        m = exact_conformal_density(2, "abA", 5)
        assert m.additivity_defect() == 0
        assert m.exact

    @pytest.mark.parametrize("x", oracles.ball(2, 4)[::7])
    def test_conformal_property(self, x):
        depth = 6
        dens = full_group_density(2, depth).at(x or "e", depth)
        leaf_mass = {}
        for leaf in oracles.sphere(2, depth):
            far = leaf + leaf[-1] * (len(x) + 2)
            leaf_mass[leaf] = Fraction(1, 4 * 3 ** (depth - 1)) * Fraction(3) ** oracles.busemann(far, "", x)
        # coarser cylinders: sum the depth-6 leaves by prefix
        totals = {}
        for leaf, v in leaf_mass.items():
            for n in range(1, depth + 1):
                totals[leaf[:n]] = totals.get(leaf[:n], 0) + v
        for stem, expect in totals.items():
            assert dens.mass(stem) == expect

    def test_conformal_oracle_spot(self):
        assert oracles.conformal_mass(2, "ab", "a", 4) == exact_conformal_density(2, "ab", 4).mass("a")

    @pytest.mark.parametrize("g", [w for w in oracles.ball(2, 4) if w][::5])
    def test_conjugation_property(self, g):
        # nu_{g^-1 o}(g^-1 Cyl(w)) = nu_o(Cyl(w)) for the full group
        fam = full_group_density(2, 3)
        ginv = oracles.inverse(g)
        at = fam.at(ginv, max(3, len(g)))
        for w in oracles.ball(2, 3):
            if not w:
                continue
            moved = translate_cylinder(S(ginv), S(w), 2)
            assert at.mass_of(moved) == fam.base.mass(w)

    def test_projected_density_notes(self):
        fam = projected_density(KernelAbelian.commutator(2), 1.2, 8, 2)
        assert not fam.exact
        assert any("uncontrolled" in n for n in fam.notes)

    def test_ladder(self):
        h = KernelAbelian.commutator(2)
        rungs = density_ladder(h, 1.0, 6, 2)
        assert [f.delta for f in rungs] == [1.0 + e for e in EPSILON_LADDER]
        for f in rungs:
            assert float(f.base.total_mass) == pytest.approx(1, abs=1e-12)
            # the commutator subgroup is invariant under a <-> A, so is its measure
            assert f.base.mass(S("a")) == pytest.approx(f.base.mass(S("A")), rel=1e-12)
        assert density_for(h, 1.0, 6, 2).delta == rungs[-1].delta
        assert density_for(CosetStabilizer(corpus.S3, 0)).exact


class TestShadowLemma:
    def test_radius_zero_exact(self):
        t = shadow_lemma_check(F2, None, 0, 8, full_group_density(2, 1))
        assert t.minimum == t.maximum == Fraction(3, 4)
        assert len(t.rows) == sum(4 * 3 ** (n - 1) for n in range(1, 9))
        assert all(r[0].letters for r in t.rows)

    def test_radius_one_range(self):
        t = shadow_lemma_check(F2, None, 1, 8, full_group_density(2, 1))
        assert Fraction(3, 4) <= t.minimum and t.maximum <= 3

    def test_rows_against_ray_oracle(self):
        t = shadow_lemma_check(F2, None, 1, 4, full_group_density(2, 1))
        for g, mass, ratio, _ in t.rows:
            gs = str(g)
            depth = len(gs) + 2
            inside = [leaf for leaf, ok in _brute_shadow_members("", oracles.inverse(gs), 1, depth) if ok]
            brute = Fraction(len(inside), 4 * 3 ** (depth - 1))
            assert mass == brute
            assert ratio == brute * 3 ** len(gs)

    def test_spread_stable(self):
        fam = full_group_density(2, 1)
        a = shadow_lemma_check(F2, None, 1, 6, fam)
        b = shadow_lemma_check(F2, None, 1, 10, fam)
        # |gamma| = 1 gives 3 (whole boundary), longer gamma give 9/4
        assert a.spread == b.spread == 4 / 3

    def test_identity_excluded(self):
        with pytest.raises(NotFoundError):
            shadow_lemma_check(Stallings(2, ["aab"]), None, 0, 2, full_group_density(2, 1))


class TestCocycle:
    def test_pi_is_one(self):
        fam = full_group_density(2, 2)
        for g in oracles.ball(2, 4):
            assert fam.pi(g or "e") == 1
        assert oracles.conformal_mass(2, "aB", "", 4) == 1

    def test_residual_zero(self):
        fam = full_group_density(2, 1)
        dens = {F2.key: fam}
        for g in ["", "a", "bA", "abAB"]:
            for h in ["", "B", "aab"]:
                rep = quasi_cocycle(dens, F2, g or "e", h or "e")
                assert rep.residual == 0 and rep.pi_gh == 1

    def test_normal_projected(self):
        h = KernelAbelian.commutator(2)
        fam = projected_density(h, 1.2, 8, 2)
        rep = quasi_cocycle({h.key: fam}, h, "ab", "bA")
        assert rep.residual >= 0 and math.isfinite(rep.residual)

    def test_missing_conjugate(self):
        h = CosetStabilizer(corpus.S3, 0)
        fam = full_group_density(2, 1)
        with pytest.raises(NotFoundError):
            quasi_cocycle({h.key: fam}, h, "a", "a")

    def test_pi_sphere_sums(self):
        sums = pi_sphere_sums(full_group_density(2, 2), 6)
        assert sums == [1] + [4 * 3 ** (n - 1) for n in range(1, 7)]

    def test_refine_lists_leaves(self):
        leaves = list(refine([S("a")], 2, 3))
        assert sorted(text(w) for w in leaves) == sorted(w for w in oracles.sphere(2, 3) if w.startswith("a"))
