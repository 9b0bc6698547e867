# tests/test_presets.py
import pytest

from src.algebra.errors import MalformedTableError
from src.algebra.inverse_classify import is_m_inverse
from src.algebra.loops_core import find_isomorphism, is_abelian_group, is_group
from src.extractors.presets import (
    GROUP_PRESETS,
    PRESETS,
    dihedral_group_d4,
    load_lambda_preset,
    load_preset,
    quaternion_group,
    symmetric_group_s3,
)


class TestCatalog:
    @pytest.mark.parametrize("name", GROUP_PRESETS)
    def test_group_presets_are_groups(self, name):
        loop, j = load_preset(name)
        assert is_group(loop)
        assert is_m_inverse(loop, j, 1)

    def test_catalog_names(self):
        assert {"Z1", "Z8", "klein", "S3", "D4", "Q8", "odd-z3z2", "s3-z2z2"} <= set(PRESETS)

    def test_unknown_preset(self):
        with pytest.raises(MalformedTableError, match="unknown preset"):
            load_preset("A5")

    def test_unknown_lambda_preset(self):
        with pytest.raises(MalformedTableError):
            load_lambda_preset("Z3")


class TestGroups:
    def test_s3_element_order(self):
        s3 = symmetric_group_s3()
        # index 3 is the 3-cycle (1, 2, 0); its square is (2, 0, 1) at index 4
        assert s3.mul(3, 3) == 4
        assert s3.mul(3, 4) == 0

    def test_quaternion_units(self):
        q8 = quaternion_group()
        i, j, k, minus_one = 2, 4, 6, 1
        assert q8.mul(i, i) == minus_one
        assert q8.mul(i, j) == k
        assert q8.mul(j, i) == k + 1
        assert not is_abelian_group(q8)

    def test_d4_and_q8_differ(self):
        assert find_isomorphism(dihedral_group_d4(), quaternion_group()) is None

    def test_odd_preset_is_not_a_group(self):
        loop, j = load_preset("odd-z3z2")
        assert loop.n == 6
        assert not is_group(loop)
        assert is_m_inverse(loop, j, 1) and not is_m_inverse(loop, j, 0)
