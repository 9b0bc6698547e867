# tests/test_factorization.py
import numpy as np
import pytest

from src.algebra.errors import FactorizationImpossibleError, MalformedTableError, PreconditionError
from src.algebra.factorization import (
    canonical_maps,
    exact_factorization,
    verify_moufang_decomposition,
)
from src.algebra.inverse_classify import right_inverse_permutation
from src.algebra.loops_core import find_isomorphism
from src.extractors.presets import cyclic_group, lambda_s3_z2z2

# S3 as sorted permutations: the 3-cycles sit at 3 and 4, (0 2 1) at 1
A3 = [0, 3, 4]
TRANSPOSITION = [0, 1]


@pytest.fixture
def z6():
    loop = cyclic_group(6)
    return loop, right_inverse_permutation(loop)


class TestExactFactorization:
    def test_s3_as_a3_times_z2(self, s3):
        witness = exact_factorization(*s3, A3, TRANSPOSITION, m=1)
        assert witness.ok
        assert (witness.r.n, witness.s.n) == (3, 2)
        assert witness.report.passed("compatibilities")
        assert witness.report.passed("J-on-Q")
        assert witness.report.passed("theta-isomorphism")
        assert witness.report.passed("m-inv")
        assert not witness.actions.is_trivial
        assert find_isomorphism(witness.r, cyclic_group(3)) is not None

    def test_abelian_factorization_has_trivial_actions(self, z6):
        witness = exact_factorization(*z6, [0, 2, 4], [0, 3], m=0)
        assert witness.ok
        assert witness.actions.is_trivial
        assert witness.to_dict()["bijective"] is True

    def test_sizes_must_multiply_to_order(self, s3):
        with pytest.raises(FactorizationImpossibleError, match="differs"):
            exact_factorization(*s3, [0, 1], [0, 2], m=1)

    def test_collision(self):
        z4 = cyclic_group(4)
        with pytest.raises(FactorizationImpossibleError, match="collides"):
            exact_factorization(z4, right_inverse_permutation(z4), [0, 2], [0, 2], m=0)

    def test_factor_must_be_a_subloop(self, z6):
        with pytest.raises(PreconditionError) as info:
            exact_factorization(*z6, [0, 1, 2], [0, 3], m=0)
        assert info.value.report.first_failure.name == "subloop-R"

    def test_embedding_out_of_range(self, z6):
        with pytest.raises(MalformedTableError):
            exact_factorization(*z6, [0, 2, 9], [0, 3], m=0)

    def test_lambda_example_factorizes(self):
        bundle = lambda_s3_z2z2()
        witness = exact_factorization(
            bundle.q, bundle.j_q, bundle.r_embed, bundle.s_embed, m=1
        )
        assert witness.ok
        assert witness.actions == bundle.actions


class TestDecomposition:
    @pytest.mark.parametrize("variant", ["matched", "semidirect"])
    def test_s3_decompositions(self, s3, variant):
        loop, j = s3
        witness = exact_factorization(loop, j, A3, TRANSPOSITION, m=1)
        maps = canonical_maps(loop, A3, TRANSPOSITION)
        outcome = verify_moufang_decomposition(loop, witness.r, witness.s, variant=variant, **maps)
        assert outcome.ok
        assert outcome.report.passed("displayed-shape")
        assert np.array_equal(outcome.actions.phi, witness.actions.phi)

    def test_canonical_maps_are_sections(self, s3):
        loop, _ = s3
        maps = canonical_maps(loop, A3, TRANSPOSITION)
        assert maps["p_r"][A3].tolist() == [0, 1, 2]
        assert maps["p_s"][TRANSPOSITION].tolist() == [0, 1]

    def test_broken_projection(self, s3):
        loop, j = s3
        witness = exact_factorization(loop, j, A3, TRANSPOSITION, m=1)
        maps = canonical_maps(loop, A3, TRANSPOSITION)
        maps["p_r"] = np.zeros(6, dtype=int)
        outcome = verify_moufang_decomposition(loop, witness.r, witness.s, **maps)
        assert not outcome.ok
        assert outcome.report.first_failure.name == "p_R-section"
        assert outcome.actions is None

    def test_unknown_variant(self, s3):
        loop, _ = s3
        maps = canonical_maps(loop, A3, TRANSPOSITION)
        with pytest.raises(ValueError):
            verify_moufang_decomposition(loop, loop, loop, variant="twisted", **maps)

    def test_uncovered_quotient(self):
        z4 = cyclic_group(4)
        with pytest.raises(FactorizationImpossibleError):
            canonical_maps(z4, [0, 2], [0, 2])
