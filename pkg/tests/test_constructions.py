# tests/test_constructions.py
import numpy as np
import pytest

from src.algebra.constructions import (
    ActionPair,
    CocycleMap,
    GroupActionPair,
    TransassociantGroup,
    build_matched_table,
    coboundary,
    cocycle_conditions,
    cocycle_extension,
    cocycle_witness,
    direct_product,
    extension_loop,
    group_matched_pair,
    group_matched_pair_conditions,
    is_2cocycle,
    lambda_example,
    matched_pair_loop,
    odd_invertible_loop,
    sabinin_product,
    semidirect_group_theta,
    semidirect_m_inverse,
    verify_matched_pair,
    verify_semidirect,
)
from src.algebra.errors import MalformedTableError, PreconditionError, ResourceCapError
from src.algebra.inverse_classify import aut_power_order, is_m_inverse, right_inverse_permutation
from src.algebra.loops_core import find_isomorphism, is_associative, is_group, table_direct_product
from src.extractors.presets import (
    cyclic_group,
    lambda_s3_z2z2,
    s3_matched_actions,
    symmetric_group_s3,
)


def with_j(loop):
    return loop, right_inverse_permutation(loop)


@pytest.fixture
def z3_z2():
    return cyclic_group(3), cyclic_group(2)


@pytest.fixture
def dihedral_phi():
    """φ(s, r) = (-1)^s r on Z3, indexed [s, r]."""
    r = np.arange(3)
    return np.stack([r, (-r) % 3])


class TestCocycles:
    def test_zero_cocycle_gives_z6(self, z3_z2):
        g, v = z3_z2
        c = CocycleMap.zero(g, v)
        assert is_2cocycle(c)
        loop = extension_loop(g, v, c)
        assert is_group(loop)
        assert find_isomorphism(loop, cyclic_group(6)) is not None

    def test_odd_cocycle_is_not_a_2cocycle(self, z3_z2):
        g, v = z3_z2
        c = CocycleMap.from_entries(g, v, {(1, 1): 1})
        assert cocycle_witness(c) == (1, 1, 2)
        assert not is_associative(cocycle_extension(g, v, c))

    def test_coboundaries_are_cocycles(self, z3_z2):
        g, v = z3_z2
        assert is_2cocycle(coboundary([0, 1, 1], g, v))

    def test_named_constraints(self, z3_z2):
        g, v = z3_z2
        report = cocycle_conditions(CocycleMap.from_entries(g, v, {(1, 1): 1}))
        assert report.passed("quasi-0")
        assert report.passed("quasi-I")
        assert report.passed("quasi-II")
        assert not report.passed("cocycle")
        assert report.passed("trivial-action")

    def test_unknown_constraint(self, z3_z2):
        with pytest.raises(ValueError, match="unknown cocycle constraint"):
            cocycle_conditions(CocycleMap.zero(*z3_z2), ["quasi-9"])

    def test_values_out_of_range(self, z3_z2):
        g, v = z3_z2
        with pytest.raises(MalformedTableError):
            CocycleMap(g, v, np.full((3, 3), 2))

    def test_extension_without_unit(self, z3_z2):
        g, v = z3_z2
        c = CocycleMap.from_entries(g, v, {(0, 1): 1})
        assert cocycle_extension(g, v, c).is_quasigroup
        with pytest.raises(PreconditionError) as info:
            extension_loop(g, v, c)
        assert info.value.report.first_failure.name == "quasi-0"

    def test_odd_invertible_loop_needs_quasi_i(self, z3_z2):
        g, v = z3_z2
        with pytest.raises(PreconditionError) as info:
            odd_invertible_loop(g, v, CocycleMap.from_entries(g, v, {(1, 2): 1}))
        assert info.value.report.first_failure.name == "quasi-I"

    def test_nonabelian_coefficients_rejected(self):
        g = cyclic_group(2)
        s3 = symmetric_group_s3()
        with pytest.raises(PreconditionError, match="abelian"):
            cocycle_extension(g, s3, CocycleMap.zero(g, s3))

    def test_odd_invertible_loop(self, odd_loop):
        loop, j = odd_loop
        assert j.power(2).is_identity()
        assert aut_power_order(loop, j) == 2
        assert [m for m in range(-3, 4) if is_m_inverse(loop, j, m)] == [-3, -1, 1, 3]


class TestDirectProduct:
    def test_s3_times_z3(self, s3, z3):
        dp = direct_product(*s3, *z3)
        assert (dp.h1, dp.h2) == (2, 1)
        assert dp.residues1 == [1] and dp.residues2 == [0]
        assert dp.solutions == [1]
        assert dp.period == 2
        assert dp.loop is not None and dp.loop.n == 18
        assert is_m_inverse(dp.table, dp.j, 3)

    def test_incompatible_exponents(self, s3):
        dp = direct_product(*s3, *s3, m1=1, m2=0)
        assert dp.solutions == []
        assert dp.valid_m is None

    def test_odd_loops_combine(self, odd_loop, s3):
        dp = direct_product(*odd_loop, *s3, m1=1, m2=1)
        assert dp.solutions == [1]
        assert dp.to_dict()["order"] == 36


class TestSemidirect:
    def test_dihedral_group_as_semidirect_product(self, z3_z2, dihedral_phi):
        r, s = z3_z2
        loop, j = semidirect_m_inverse(*with_j(r), *with_j(s), dihedral_phi, m=1)
        assert find_isomorphism(loop, symmetric_group_s3()) is not None
        assert j == right_inverse_permutation(loop)

    def test_even_m_with_nontrivial_phi(self, z3_z2, dihedral_phi):
        r, s = z3_z2
        outcome = verify_semidirect(*with_j(r), *with_j(s), dihedral_phi, m=2)
        failure = outcome.report.first_failure
        assert failure.name == "m-inverse-cond"
        assert failure.witness == (1, 1)
        assert not outcome.report.passed("m-inv")
        with pytest.raises(PreconditionError):
            semidirect_m_inverse(*with_j(r), *with_j(s), dihedral_phi, m=2)

    def test_group_theta(self, z3_z2, dihedral_phi):
        r, s = z3_z2
        # θ(g)(h) on H = Z3 indexed [g, h]
        table = semidirect_group_theta(s, r, dihedral_phi)
        assert is_group(table)
        with pytest.raises(PreconditionError):
            semidirect_group_theta(s, r, np.array([[0, 1, 2], [0, 0, 0]]))


class TestMatchedPair:
    def test_trivial_table_is_the_direct_product(self, z3_z2):
        r, s = z3_z2
        table = build_matched_table(r, s, ActionPair.trivial(3, 2))
        assert table == table_direct_product(r, s)

    def test_trivial_actions_give_direct_product(self, z3_z2):
        r, s = z3_z2
        loop, j = matched_pair_loop(*with_j(r), *with_j(s), ActionPair.trivial(3, 2), m=0)
        assert find_isomorphism(loop, cyclic_group(6)) is not None
        assert is_m_inverse(loop, j, 0)

    def test_dihedral_action(self, z3_z2, dihedral_phi):
        r, s = z3_z2
        a = ActionPair(dihedral_phi, ActionPair.trivial(3, 2).psi)
        outcome = verify_matched_pair(*with_j(r), *with_j(s), a, m=1)
        assert outcome.report.ok
        assert outcome.report.passed("incerse-of-left-action")
        assert outcome.report.passed("m-inv")
        assert find_isomorphism(outcome.loop, symmetric_group_s3()) is not None

    def test_unit_law_witness(self, z3_z2):
        r, s = z3_z2
        phi = np.array([[0, 2, 1], [0, 2, 1]])
        a = ActionPair(phi, ActionPair.trivial(3, 2).psi)
        outcome = verify_matched_pair(*with_j(r), *with_j(s), a, m=1)
        failure = outcome.report.first_failure
        assert failure.name == "unit-action-QR-matched-I"
        assert failure.witness == (1,)
        assert outcome.loop is None

    def test_even_m_needs_trivial_actions(self, z3_z2, dihedral_phi):
        r, s = z3_z2
        a = ActionPair(dihedral_phi, ActionPair.trivial(3, 2).psi)
        with pytest.raises(PreconditionError) as info:
            matched_pair_loop(*with_j(r), *with_j(s), a, m=2)
        assert info.value.report.first_failure.name == "m-inverse-cond-matched"

    def test_wrong_action_shape(self, z3_z2):
        r, s = z3_z2
        with pytest.raises(MalformedTableError):
            verify_matched_pair(*with_j(r), *with_j(s), ActionPair.trivial(2, 3), m=0)


class TestGroupMatchedPair:
    def test_s3_from_z3_and_z2(self, z3_z2):
        g, h = z3_z2
        loop = group_matched_pair(g, h, s3_matched_actions())
        assert loop.n == 6
        assert find_isomorphism(loop, symmetric_group_s3()) is not None

    def test_broken_left_action(self, z3_z2):
        g, h = z3_z2
        tri = np.array([[0, 1, 2], [0, 1, 1]])
        a = GroupActionPair(tri, s3_matched_actions().triangleleft)
        report = group_matched_pair_conditions(g, h, a)
        assert report.first_failure.name == "left-action"
        assert report.first_failure.witness == (1, 1, 2)
        with pytest.raises(PreconditionError):
            group_matched_pair(g, h, a)


class TestTransassociant:
    def test_group_has_trivial_transassociant(self):
        assert TransassociantGroup.of(cyclic_group(3)).order == 1
        assert sabinin_product(cyclic_group(4)) == cyclic_group(4).q

    def test_closure_cap(self, nonassoc5):
        with pytest.raises(ResourceCapError):
            TransassociantGroup.of(nonassoc5, cap=1)

    def test_ell_fixes_identity(self, nonassoc5):
        group = TransassociantGroup.of(nonassoc5)
        assert all(p(0) == 0 for p in group.elements)
        assert group.ell(1, 2)(0) == 0


class TestLambdaExample:
    def test_order_24_bundle(self):
        bundle = lambda_s3_z2z2()
        assert bundle.q.n == 24
        assert (bundle.r.n, bundle.s.n, bundle.group.n) == (6, 4, 6)
        assert bundle.report.ok
        assert is_m_inverse(bundle.q, bundle.j_q, 1)
        manifest = bundle.to_manifest()
        assert manifest["h"] == 2
        assert len(manifest["r_embed"]) == 6

    def test_even_m_refused(self):
        with pytest.raises(PreconditionError, match="odd"):
            lambda_s3_z2z2(m=2)

    def test_vp_invariance_violation(self, z3_z2):
        g, h = z3_z2
        v, w = cyclic_group(2), cyclic_group(2)
        phi = CocycleMap.from_entries(g, v, {(1, 1): 1})
        with pytest.raises(PreconditionError) as info:
            lambda_example(g, h, s3_matched_actions(), v, w, phi, CocycleMap.zero(h, w))
        failure = info.value.report.first_failure
        assert failure.name == "vp-invariance"
        assert failure.witness == (1, 1, 1)
