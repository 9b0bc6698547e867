# tests/test_hopf.py
import dataclasses
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from config.config import cfg
from src.algebra import hopf as hopf_module
from src.algebra.constructions import ActionPair
from src.algebra.errors import (
    InternalConsistencyError,
    MalformedTableError,
    PreconditionError,
    ResourceCapError,
    SingularAntipodeError,
)
from src.algebra.hopf import (
    ONE,
    HopfQuasigroupData,
    LinearActionPair,
    antipode_power,
    group_algebra,
    hopf_aut_power_order,
    is_hopf_automorphism,
    hopf_from_dict,
    hopf_matched_conditions,
    hopf_matched_pair,
    hopf_to_dict,
    is_hopf_shift_closed,
    linear_actions_from_sets,
    linearize_matched_pair,
    tensor_exponents,
    tensor_product,
    to_exact,
    trivial_hopf_algebra,
    verify_hopf_quasigroup,
    zeros,
)
from src.algebra.inverse_classify import right_inverse_permutation
from src.algebra.loops_core import loop_direct_product
from src.extractors.presets import load_preset


@pytest.fixture
def ks3(s3):
    return group_algebra(*s3)


@pytest.fixture
def kz3(z3):
    return group_algebra(*z3)


@pytest.fixture
def kz2(z2):
    return group_algebra(*z2)


@pytest.fixture
def dihedral_actions():
    r = np.arange(3)
    return ActionPair(np.stack([r, (-r) % 3]), ActionPair.trivial(3, 2).psi)


def function_algebra(q) -> HopfQuasigroupData:
    """k^Q on the idempotents p_x: Δ(p_x) = Σ_{yz=x} p_y⊗p_z, ε(p_x) = [x = δ], S(p_x) = p_{J(x)}."""
    loop, j = q
    n = loop.n
    idx = np.arange(n)
    mu = zeros((n, n, n))
    mu[idx, idx, idx] = ONE
    delta = zeros((n, n, n))
    delta[loop.table, idx[:, None], idx[None, :]] = ONE
    eps = zeros((n,))
    eps[loop.delta] = ONE
    antipode = zeros((n, n))
    antipode[idx, j.as_array()] = ONE
    return HopfQuasigroupData(mu, np.full(n, ONE, dtype=object), delta, eps, antipode)


def _sign_psi(signs):
    """ψ(s, r) = ±s on Z3 with the sign picked by r."""
    s = np.arange(3)[:, None]
    return np.where(np.array(signs)[None, :] == 0, s, (-s) % 3)


# (R, S, φ, ψ, m, law expected to fail)
FAILING_LAWS = [
    ("Z3", "Z2", [[0, 1, 2], [1, 2, 0]], None, 1, "unit-action-QR-matched-II-Hopf-a'"),
    ("Z4", "Z3", None, _sign_psi([0, 0, 1, 0]), 1, "unit-action-QR-matched-II-Hopf-b"),
    ("Z4", "Z3", None, _sign_psi([0, 1, 0, 0]), 1, "unit-action-QR-matched-II-Hopf-b'"),
    ("Z4", "Z2", [[0, 1, 2, 3], [0, 2, 1, 3]], None, 1, "unit-action-QR-matched-III-Hopf"),
    ("Z4", "Z2", [[0, 1, 2, 3], [0, 2, 1, 3]], None, 0, "unit-action-QR-matched-III-Hopf"),
    ("Z4", "Z2", [[0, 1, 2, 3], [0, 2, 1, 3]], None, 1, "unit-action-QR-matched-III-Hopf-a"),
    ("Z2", "Z3", None, [[0, 1], [1, 2], [2, 0]], 1, "unit-action-QR-matched-IV-Hopf-a"),
    ("Z4", "Z2", [[0, 1, 2, 3], [0, 2, 1, 3]], None, 1, "m-inverse-cond-matched-Hopf"),
]


class TestExactScalars:
    def test_accepts_rationals(self):
        assert to_exact("1/2") == Fraction(1, 2)
        assert to_exact(3) == Fraction(3)
        assert to_exact(sp.Rational(-2, 3)) == Fraction(-2, 3)

    def test_refuses_floats(self):
        with pytest.raises(MalformedTableError, match="floating point"):
            to_exact(0.5)

    def test_refuses_garbage(self):
        with pytest.raises(MalformedTableError):
            to_exact("half")

    def test_shape_mismatch(self):
        with pytest.raises(MalformedTableError, match="mu"):
            HopfQuasigroupData([[1]], [1], [[[1]]], [1], [[1]])


class TestVerifyHopfQuasigroup:
    """Group algebras of m-inverse loops are m-invertible Hopf quasigroups."""

    def test_trivial_algebra(self):
        assert verify_hopf_quasigroup(trivial_hopf_algebra(), 0).ok

    def test_ks3_at_m_1(self, ks3):
        report = verify_hopf_quasigroup(ks3, 1)
        assert report.ok
        assert [c.name for c in report.checks][:4] == [
            "unital",
            "coassociative",
            "counital",
            "unit-group-like",
        ]

    def test_ks3_fails_s_m_prop_at_m_0(self, ks3):
        report = verify_hopf_quasigroup(ks3, 0)
        assert report.first_failure.name == "S-m-prop"
        assert report.passed("S-prop")

    def test_odd_loop_algebra(self, odd_loop):
        h = group_algebra(*odd_loop)
        assert verify_hopf_quasigroup(h, 1).ok
        assert not verify_hopf_quasigroup(h, 0).ok

    def test_perturbed_antipode(self, ks3):
        mat = np.array(ks3.antipode)
        mat[1, 0] = ONE
        report = verify_hopf_quasigroup(dataclasses.replace(ks3, antipode=mat), 1)
        assert report.passed("S-invertible")
        assert report.first_failure.name == "S-anti-coalgebra"
        assert report.first_failure.witness == (1,)
        assert report.get("S-prop").witness == (1,)

    def test_singular_antipode(self):
        h = HopfQuasigroupData([[[1]]], [1], [[[1]]], [1], [[0]])
        report = verify_hopf_quasigroup(h, 0)
        assert report.first_failure.name == "S-invertible"
        with pytest.raises(SingularAntipodeError):
            antipode_power(h, -1)

    def test_candidate_antipodes(self, kz3):
        identity = np.eye(3, dtype=int).tolist()
        report = verify_hopf_quasigroup(kz3, 0, candidates=[kz3.antipode, identity])
        assert report.ok
        assert report.passed("S-unique")


class TestAntipodePowers:
    def test_inversion_is_an_automorphism_only_when_abelian(self, ks3, kz3):
        assert hopf_aut_power_order(ks3) == 2
        assert hopf_aut_power_order(kz3) == 1

    def test_negative_power_inverts(self, ks3):
        product = np.dot(antipode_power(ks3, -1), ks3.antipode)
        assert all(product[i, j] == (ONE if i == j else 0) for i in range(6) for j in range(6))

    def test_shift_closed(self, ks3):
        assert is_hopf_shift_closed(ks3, 1)

    def test_antipode_as_automorphism(self, ks3, kz3):
        assert is_hopf_automorphism(kz3, kz3.antipode)
        assert not is_hopf_automorphism(ks3, ks3.antipode)
        assert is_hopf_automorphism(ks3, np.eye(6, dtype=int).tolist())
        assert not is_hopf_automorphism(kz3, np.zeros((3, 3), dtype=int).tolist())


class TestTensorProduct:
    def test_mixed_exponents(self, kz3, ks3):
        assert tensor_exponents(kz3, 0, ks3, 1) == [1]

    def test_incompatible_exponents(self, ks3):
        assert tensor_exponents(ks3, 0, ks3, 1) == []

    @pytest.mark.slow
    def test_ks3_squared(self, ks3):
        assert tensor_exponents(ks3, 1, ks3, 1) == [1]

    def test_matches_group_algebra_of_direct_product(self, z3, z2, kz3, kz2):
        product = loop_direct_product(z3[0], z2[0])
        expected = group_algebra(product, right_inverse_permutation(product))
        assert tensor_product(kz3, kz2).same_structure(expected)

    def test_dimension_cap(self, monkeypatch, ks3):
        monkeypatch.setattr(cfg, "dim_cap", 8)
        with pytest.raises(ResourceCapError) as info:
            tensor_product(ks3, ks3)
        assert info.value.partial_size == 36


class TestHopfMatchedPair:
    def test_trivial_actions_at_even_m(self, kz3, kz2, z3, z2):
        result = hopf_matched_pair(kz3, kz2, LinearActionPair.trivial(kz3, kz2), m=0)
        assert result.report.ok
        assert result.data.dim == 6
        product = loop_direct_product(z3[0], z2[0])
        assert result.data.same_structure(group_algebra(product, right_inverse_permutation(product)))

    def test_even_m_needs_trivial_actions(self, kz3, kz2, dihedral_actions):
        with pytest.raises(PreconditionError) as info:
            hopf_matched_pair(kz3, kz2, linear_actions_from_sets(dihedral_actions), m=0)
        assert info.value.report.first_failure.name == "m-inverse-cond-matched-Hopf"

    def test_trivial_actions_at_odd_m(self, kz3, kz2, z3, z2):
        result = hopf_matched_pair(kz3, kz2, LinearActionPair.trivial(kz3, kz2), m=1)
        assert result.report.passed("m-inverse-cond-matched-Hopf")
        product = loop_direct_product(z3[0], z2[0])
        assert result.data.same_structure(group_algebra(product, right_inverse_permutation(product)))

    def test_odd_m_rejects_a_non_automorphic_action(self, kz2):
        kz4 = group_algebra(*load_preset("Z4"))
        actions = ActionPair([[0, 1, 2, 3], [0, 2, 1, 3]], ActionPair.trivial(4, 2).psi)
        with pytest.raises(PreconditionError) as info:
            hopf_matched_pair(kz4, kz2, linear_actions_from_sets(actions), m=1)
        report = info.value.report
        assert report.first_failure.name == "unit-action-QR-matched-III-Hopf"
        assert report.get("S-prop") is None

    @pytest.mark.parametrize("r_name, s_name, phi, psi, m, law", FAILING_LAWS)
    def test_each_law_gates(self, r_name, s_name, phi, psi, m, law):
        (r, j_r), (s, j_s) = load_preset(r_name), load_preset(s_name)
        trivial = ActionPair.trivial(r.n, s.n)
        actions = ActionPair(trivial.phi if phi is None else phi, trivial.psi if psi is None else psi)
        report = hopf_matched_conditions(
            group_algebra(r, j_r), group_algebra(s, j_s), linear_actions_from_sets(actions), m
        )
        check = report.get(law)
        assert not check.ok
        assert check.gating
        assert check.witness is not None
        assert not report.ok

    @pytest.mark.parametrize("field, law", [("phi", "module-coalg-I"), ("psi", "module-coalg-II")])
    def test_module_coalgebra_laws(self, kz3, kz2, field, law):
        trivial = LinearActionPair.trivial(kz3, kz2)
        tables = {"phi": np.array(trivial.phi), "psi": np.array(trivial.psi)}
        tables[field][1, 1, 1] = 2
        report = hopf_matched_conditions(kz3, kz2, LinearActionPair(**tables), m=1)
        assert report.get(law).witness == (1, 1)
        assert not report.ok

    def test_side_switch_needs_matching_legs(self, kz2, s3):
        h2 = function_algebra(s3)
        loop = s3[0]
        t = next(x for x in range(loop.n) if x != loop.delta)
        phi, psi = zeros((loop.n, 2, 2)), zeros((loop.n, 2, loop.n))
        for x in range(loop.n):
            phi[x, 0, 0] = h2.eps[x]
            phi[x, 1, 1] = ONE if x == t else 0
            psi[x, 0, x] = psi[x, 1, x] = ONE
        report = hopf_matched_conditions(kz2, h2, LinearActionPair(phi, psi), m=1)
        assert report.passed("unit-action-QR-matched-I-Hopf")
        assert not report.passed("unit-action-QR-matched-V-Hopf")
        assert not report.ok

    def test_failed_post_check_raises(self, monkeypatch, kz3, kz2):
        def identity_antipode(h1, h2, a, u1, u2):
            return hopf_module._tensor(u1, u2)

        monkeypatch.setattr(hopf_module, "_matched_antipode", identity_antipode)
        with pytest.raises(InternalConsistencyError, match="S-prop"):
            hopf_matched_pair(kz3, kz2, LinearActionPair.trivial(kz3, kz2), m=0)

    def test_wrong_action_dimensions(self, kz3, kz2):
        with pytest.raises(MalformedTableError):
            hopf_matched_pair(kz3, kz2, LinearActionPair.trivial(kz2, kz3), m=0)

    def test_linearization_commutes(self, z3, z2, dihedral_actions):
        lin = linearize_matched_pair(*z3, *z2, dihedral_actions, m=1)
        assert lin.set_level.same_structure(lin.hopf.data)
        assert lin.hopf.report.ok
        assert lin.hopf.report.passed("lemma-antipode")
        assert lin.hopf.report.passed("T-I")
        assert lin.hopf.report.passed("T-II")
        assert lin.hopf.report.passed("unit-action-QR-matched-III-Hopf-a")
        assert lin.hopf.report.passed("m-inverse-cond-matched-Hopf")
        assert lin.loop.n == 6


class TestJsonForm:
    def test_round_trip_keeps_structure(self, ks3):
        payload = hopf_to_dict(ks3)
        assert payload["dim"] == 6
        assert hopf_from_dict(payload).same_structure(ks3)

    def test_rational_entries(self):
        h = HopfQuasigroupData([[[1]]], [1], [[[1]]], [1], [["1/2"]])
        assert hopf_to_dict(h)["S"] == [[0, 0, 1, 2]]

    def test_missing_key(self):
        with pytest.raises(MalformedTableError):
            hopf_from_dict({"dim": 1, "mu": []})
