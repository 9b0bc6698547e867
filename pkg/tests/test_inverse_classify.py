# tests/test_inverse_classify.py
import pytest

from src.algebra.inverse_classify import (
    InversePermutation,
    RstTriple,
    aut_power_order,
    classify,
    combine_rst,
    crt_solve,
    is_ci,
    is_m_inverse,
    is_rst_inverse,
    is_rst_shift_closed,
    is_wip,
    normalize_window,
    right_inverse_permutation,
    rst_witness,
)
from src.algebra.loops_core import Permutation
from src.extractors.presets import cyclic_group


class TestRstTriple:
    def test_named_triples(self):
        assert RstTriple.m_inverse(2) == RstTriple(2, 3, 2)
        assert RstTriple.ci() == RstTriple(0, 1, 0)
        assert RstTriple.wip() == RstTriple(-1, 0, -1)

    def test_shift(self):
        assert RstTriple(1, 2, 1).shifted(-1, 4) == RstTriple(-3, -2, -3)


class TestCongruences:
    @pytest.mark.parametrize(
        "m1,h1,m2,h2,expected",
        [(1, 2, 0, 3, 3), (2, 4, 0, 6, 6), (0, 1, 5, 7, 5), (1, 2, 0, 4, None)],
    )
    def test_crt_solve(self, m1, h1, m2, h2, expected):
        assert crt_solve(m1, h1, m2, h2) == expected

    def test_crt_rejects_non_positive_modulus(self):
        with pytest.raises(ValueError):
            crt_solve(0, 0, 1, 2)

    def test_combine_rst(self):
        assert combine_rst(RstTriple(1, 2, 1), 2, RstTriple(0, 1, 0), 3) == RstTriple(3, 4, 3)
        assert combine_rst(RstTriple(1, 2, 1), 2, RstTriple(0, 2, 0), 3) is None


class TestInverseProperties:
    """Abelian groups satisfy every m; S3 only the odd ones."""

    def test_abelian_group_is_m_inverse_for_all_m(self):
        z5 = cyclic_group(5)
        j = right_inverse_permutation(z5)
        assert j == Permutation((0, 4, 3, 2, 1))
        assert all(is_m_inverse(z5, j, m) for m in range(-3, 4))
        assert aut_power_order(z5, j) == 1

    def test_s3_first_failure_of_ci(self, s3):
        loop, j = s3
        # (xy)x⁻¹ = y fails first for the transpositions 1 and 2
        assert rst_witness(loop, j, RstTriple.ci()) == (1, 2)
        assert not is_ci(loop, j)
        assert is_wip(loop, j)
        assert is_m_inverse(loop, j, 1)

    def test_rst_inverse_of_s3(self, s3):
        loop, j = s3
        assert is_rst_inverse(loop, j, RstTriple.wip())
        assert not is_rst_inverse(loop, j, RstTriple(0, 1, 0))

    def test_inversion_of_s3_has_h_2(self, s3):
        loop, j = s3
        assert aut_power_order(loop, j) == 2
        assert InversePermutation(loop, j).h == 2

    def test_shift_closure(self, s3, odd_loop):
        for loop, j in (s3, odd_loop):
            assert is_rst_shift_closed(loop, j, RstTriple.m_inverse(1))
            assert is_rst_shift_closed(loop, j, RstTriple.m_inverse(0))


class TestClassify:
    def test_window_normalization(self):
        assert normalize_window((-1, 2)) == range(-1, 3)
        assert normalize_window(range(0, 4)) == range(0, 4)
        assert normalize_window([3, -2, 0]) == range(-2, 4)

    @pytest.mark.parametrize("window", [[], (), (3, 1), range(2, 2)])
    def test_empty_window_is_rejected(self, window):
        with pytest.raises(ValueError, match="empty"):
            normalize_window(window)

    def test_s3(self, s3):
        report = classify(*s3, window=(-3, 3))
        assert report.h == 2
        assert report.valid_m == [-3, -1, 1, 3]
        assert report.residues == [1]
        assert report.wip and not report.ci

    def test_odd_invertible_loop(self, odd_loop):
        loop, j = odd_loop
        report = classify(loop, j, (-3, 3))
        assert report.order == 6
        assert report.h == 2
        assert report.valid_m == [-3, -1, 1, 3]
        assert not report.ci

    def test_nonassociative_ci_loop(self, nonassoc5):
        report = classify(nonassoc5)
        assert right_inverse_permutation(nonassoc5).is_identity()
        assert report.h == 1
        assert report.ci and report.wip
        assert report.residues == [0]

    def test_default_j_and_to_dict(self, z3):
        loop, _ = z3
        data = classify(loop, window=(0, 2)).to_dict()
        assert data == {
            "order": 3,
            "h": 1,
            "valid_m": [0, 1, 2],
            "wip": True,
            "ci": True,
            "residues": [0],
            "window": [0, 2],
        }
