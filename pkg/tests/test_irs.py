import math

import pytest

import corpus
import oracles
from hypercrit.boundary import full_group_density
from hypercrit.errors import FiniteMemberError, InvalidInputError, InvalidIRSError
from hypercrit.irs import (
    FiniteIRS,
    divergence_pipeline,
    expected_critical_exponent,
    irs_from_finite_index,
    irs_from_json,
    irs_from_normal,
    recurrence_counts,
    summed_cocycle_check,
    theorem_one_check,
)
from hypercrit.space import Word
from hypercrit.subgroups import CosetStabilizer, FiniteAction, KernelAbelian, KernelFinite, Stallings, annulus_count

LN3 = math.log(3)
F2 = Stallings.full(2)
COMM = KernelAbelian.commutator(2)
PARITY = KernelFinite.cyclic(2, [1, 0])
INDEX3 = CosetStabilizer(corpus.S3, 0)
S3_ACTION = FiniteAction(tuple(tuple(p) for p in corpus.S3))


def closed_under_conjugation(mu):
    keys = {h.key: w for h, w in mu.support}
    for h, w in mu.support:
        for g in ("a", "A", "b", "B"):
            c = h.conjugate(Word.parse(g))
            if keys.get(c.key) != w:
                return False
    return True


class TestConstruction:
    def test_finite_index_examples(self):
        mu = irs_from_finite_index(PARITY)
        assert len(mu.support) == 1 and mu.support[0][1] == 1.0
        mu = irs_from_finite_index(INDEX3)
        assert len(mu.support) == 3
        assert all(w == pytest.approx(1 / 3, abs=1e-15) for _, w in mu.support)
        mu = irs_from_finite_index(F2)
        assert len(mu.support) == 1 and mu.support[0][0].key == F2.key

    def test_fibers_of_non_faithful_table(self):
        # the regular action of S3: all six stabilizers are the same normal kernel
        mu = irs_from_finite_index(KernelFinite(corpus.S3))
        assert len(mu.support) == 1

    @pytest.mark.parametrize("case", [c for c in corpus.CASES if c.handle.finite_index], ids=lambda c: c.name)
    def test_closure(self, case):
        mu = irs_from_finite_index(case.handle)
        assert closed_under_conjugation(mu)
        assert math.fsum(w for _, w in mu.support) == pytest.approx(1, abs=1e-12)

    def test_normal_examples(self):
        assert len(irs_from_normal(COMM).support) == 1
        assert len(irs_from_normal(KernelFinite.cyclic(3, [1, 1])).support) == 1
        with pytest.raises(InvalidInputError):
            irs_from_normal(Stallings(2, ["a"]))

    def test_invalid_supports(self):
        with pytest.raises(InvalidIRSError):
            FiniteIRS.dirac(Stallings(2, ["aa", "ab"]))
        with pytest.raises(InvalidIRSError):
            FiniteIRS(())
        with pytest.raises(InvalidIRSError):
            FiniteIRS(((COMM, 0.5),))
        with pytest.raises(InvalidIRSError):
            FiniteIRS(((COMM, 0.5), (KernelAbelian([[1, 0], [0, 1]]), 0.5)))
        members = [(CosetStabilizer(corpus.S3, p), w) for p, w in zip(range(3), (0.5, 0.25, 0.25))]
        with pytest.raises(InvalidIRSError):
            FiniteIRS(tuple(members))
        with pytest.raises(InvalidIRSError):
            FiniteIRS(((COMM, 0.5), (KernelAbelian.commutator(3), 0.5)))

    def test_json(self):
        mu = irs_from_json({"construct": "finiteIndex", "subgroup": INDEX3.to_json()})
        again = irs_from_json(mu.to_json())
        assert [h.key for h, _ in again.support] == [h.key for h, _ in mu.support]
        assert len(irs_from_json({"construct": "normal", "subgroup": COMM.to_json()}).support) == 1
        with pytest.raises(InvalidInputError):
            irs_from_json({"construct": "finiteIndex", "subgroup": INDEX3.to_json(), "seed": 1})
        with pytest.raises(InvalidInputError):
            irs_from_json({"support": [{"subgroup": COMM.to_json()}]})
        with pytest.raises(InvalidInputError):
            irs_from_json({"construct": "sample", "subgroup": COMM.to_json()})


class TestExponents:
    def test_dirac_free(self):
        assert expected_critical_exponent(FiniteIRS.dirac(F2), 20).value == LN3

    def test_index_three(self):
        # the coset walk's subdominant eigenvalue still shows at R = 14
        value = expected_critical_exponent(irs_from_finite_index(INDEX3), 14).value
        assert abs(value - LN3) < 0.01
        assert abs(expected_critical_exponent(irs_from_finite_index(INDEX3), 30).value - LN3) < 1e-4

    def test_commutator(self):
        value = expected_critical_exponent(FiniteIRS.dirac(COMM), 40).value
        assert 0.95 <= value <= 1.0987

    @pytest.mark.parametrize("g", ["a", "b", "ab", "bAA"])
    def test_conjugation_invariance(self, g):
        mu = irs_from_finite_index(CosetStabilizer(corpus.INDEX4, 0))
        moved = FiniteIRS(tuple((h.conjugate(Word.parse(g)), w) for h, w in mu.support))
        assert expected_critical_exponent(moved, 16).value == expected_critical_exponent(mu, 16).value
        normal = FiniteIRS.dirac(COMM)
        normal_moved = FiniteIRS.dirac(COMM.conjugate(Word.parse(g)))
        assert expected_critical_exponent(normal_moved, 20).value == expected_critical_exponent(normal, 20).value

    def test_theorem_verdicts(self):
        assert theorem_one_check(FiniteIRS.dirac(COMM), 40).verdict == "PASS"
        assert theorem_one_check(irs_from_finite_index(INDEX3), 14).verdict == "PASS"
        assert theorem_one_check(irs_from_finite_index(PARITY), 14).verdict == "PASS"
        # too short a window to see past ln 3 / 2 is not a contradiction
        assert theorem_one_check(FiniteIRS.dirac(COMM), 6).verdict in ("PASS", "INCONCLUSIVE")

    def test_finite_member(self):
        with pytest.raises(FiniteMemberError):
            theorem_one_check(FiniteIRS.dirac(Stallings(2, [])), 10)


RECURRENCE_ACTIONS = {
    "S3": corpus.S3,
    "index4": corpus.INDEX4,
    "point": [[0], [0]],
    "rank3": corpus.S3_RANK3,
    "Z5": [[1, 2, 3, 4, 0], [2, 3, 4, 0, 1]],
}


class TestRecurrence:
    def test_example(self):
        rep = recurrence_counts(S3_ACTION, 0, [0, 1], 1, 12, LN3)
        assert rep.infimum > 0
        assert 0 < rep.kappa <= 1

    def test_empty_subset(self):
        rep = recurrence_counts(S3_ACTION, 0, [], 1, 6, LN3)
        assert rep.counts == [0] * 7 and rep.infimum == 0

    def test_one_point(self):
        act = FiniteAction(((0,), (0,)))
        rep = recurrence_counts(act, 0, [0], 2, 8, LN3)
        assert rep.counts == [annulus_count(F2, r, r + 2).count for r in range(9)]
        # normalized annuli of the free group stay above a positive constant
        assert rep.infimum >= 1

    @pytest.mark.parametrize("name", sorted(RECURRENCE_ACTIONS))
    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_against_ball_tracing(self, name, k):
        perms = RECURRENCE_ACTIONS[name]
        act = FiniteAction(tuple(tuple(p) for p in perms))
        rank = len(perms)
        rmax = 8 - k if rank == 2 else 5 - k
        for x in range(act.size):
            subsets = [list(range(act.size)), [x], [q for q in range(act.size) if q != x] or [x]]
            for subset in subsets:
                rep = recurrence_counts(act, x, subset, k, rmax, LN3)
                assert rep.counts == oracles.recurrence(rank, perms, x, subset, k, rmax)

    def test_measure_margin(self):
        rep = recurrence_counts(S3_ACTION, 0, [0, 1], 1, 8, LN3)
        assert rep.measure_margin == pytest.approx(2 / 3 - (1 - rep.kappa), abs=1e-15)

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            recurrence_counts(S3_ACTION, 0, [7], 1, 6, LN3)
        with pytest.raises(InvalidInputError):
            recurrence_counts(S3_ACTION, 0, [0], 1, 6, 0.0)


class TestPipeline:
    def test_parity(self):
        rep = divergence_pipeline(PARITY, ["aa"], 8)
        assert rep.first_holds and rep.second_holds
        assert rep.lhs > 0 and rep.middle > 0 and rep.rhs > 0
        assert rep.half_violations == 0

    def test_commutator(self):
        rep = divergence_pipeline(COMM, ["abAB"], 6)
        assert rep.first_holds and rep.second_holds and not rep.empty_chain

    def test_empty_chain(self):
        rep = divergence_pipeline(COMM, ["aa"], 3)
        assert rep.empty_chain

    @pytest.mark.parametrize("radius", [0, 2, 4, 6])
    def test_index_three_members(self, radius):
        # a^3 acts trivially on three cosets, so it lies in every member
        for h, _ in irs_from_finite_index(INDEX3).support:
            rep = divergence_pipeline(h, ["aaa"], radius)
            assert rep.first_holds and rep.second_holds

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            divergence_pipeline(PARITY, [], 3)
        with pytest.raises(InvalidInputError):
            divergence_pipeline(PARITY, ["aA"], 3)


class TestSummedCocycle:
    def test_dirac_free_exact(self):
        dens = {F2.key: full_group_density(2, 2)}
        rep = summed_cocycle_check(FiniteIRS.dirac(F2), 1, 8, dens)
        for row in rep.members[0]["rows"]:
            assert row.pi_sum == row.annulus
            assert row.margin >= 0
        assert rep.distortion == 1
        # distortion 1: the inverse trick reads sum |E| <= 2 sum pi
        for r, lhs, rhs in rep.inverse_rows:
            assert rhs == 2 * lhs

    def test_finite_index(self):
        rep = summed_cocycle_check(irs_from_finite_index(INDEX3), 1, 10)
        assert rep.min_cocycle_margin >= 0
        assert rep.min_inverse_margin >= 0
