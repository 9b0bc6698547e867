# tests/test_search.py
import numpy as np
import pytest

from src.algebra.constructions import odd_invertible_loop
from src.algebra.errors import SearchCapError
from src.algebra.inverse_classify import aut_power_order, right_inverse_permutation
from src.algebra.loops_core import CayleyTable, Pique, is_group
from src.algebra.search import (
    SearchSpec,
    count_loops,
    enumerate_loops,
    is_central_pique,
    sample_loops,
    search_cocycles,
    search_matched_actions,
    search_semidirect_actions,
)
from src.extractors.presets import cyclic_group

QUASI = ["quasi-0", "quasi-I", "quasi-II"]


@pytest.fixture
def z3_z2():
    return cyclic_group(3), cyclic_group(2)


def with_j(loop):
    return loop, right_inverse_permutation(loop)


class TestSearchSpec:
    def test_rejects_non_positive_caps(self):
        with pytest.raises(ValueError):
            SearchSpec(max_candidates=0)
        with pytest.raises(ValueError):
            SearchSpec(budget=-1)

    def test_rejects_unknown_constraint(self):
        with pytest.raises(ValueError, match="unknown constraints"):
            SearchSpec(constraints=("quasi-9",))


class TestCocycleSearch:
    """Z3 × Z3 → Z2 under quasi-0, quasi-I and quasi-II leaves two free cells."""

    def test_pruned_enumeration(self, z3_z2):
        result = search_cocycles(*z3_z2, QUASI)
        assert result.count == 4
        assert result.complete
        assert not result.items[0].values.any()
        assert any(c.values[1, 1] == 1 and c.values.sum() == 1 for c in result)

    def test_unpruned_agrees(self, z3_z2):
        pruned = search_cocycles(*z3_z2, QUASI)
        unpruned = search_cocycles(*z3_z2, QUASI, pruned=False)
        assert unpruned.examined == 2 ** 9
        assert [c.values.tolist() for c in unpruned] == [c.values.tolist() for c in pruned]

    def test_count_only_skips_enumeration(self, z3_z2):
        result = search_cocycles(*z3_z2, QUASI, count_only=True)
        assert result.count == 4
        assert result.items == []
        assert result.examined == 0

    def test_cocycle_constraint_filters(self, z3_z2):
        result = search_cocycles(*z3_z2, QUASI + ["cocycle"])
        assert 0 < result.count < 4
        assert all(c.values[1, 1] == c.values[2, 2] for c in result)

    def test_found_maps_build_loops(self, z3_z2):
        g, v = z3_z2
        loops = [odd_invertible_loop(g, v, c) for c in search_cocycles(g, v, QUASI)]
        orders = sorted(aut_power_order(loop, j) for loop, j in loops)
        assert orders[0] == 1
        assert orders[-1] == 2

    def test_candidate_cap_marks_partial(self, z3_z2):
        spec = SearchSpec(constraints=tuple(QUASI), max_candidates=2)
        result = search_cocycles(*z3_z2, QUASI, spec=spec, pruned=False)
        assert result.partial
        assert result.examined == 3

    def test_unknown_constraint(self, z3_z2):
        with pytest.raises(ValueError):
            search_cocycles(*z3_z2, ["bogus"], spec=SearchSpec())


class TestActionSearch:
    def test_semidirect_actions_at_odd_m(self, z3_z2):
        r, s = z3_z2
        result = search_semidirect_actions(*with_j(r), *with_j(s), m=1)
        assert result.count == 2
        assert result.items[1].phi[1].tolist() == [0, 2, 1]

    def test_semidirect_actions_at_even_m(self, z3_z2):
        r, s = z3_z2
        result = search_semidirect_actions(*with_j(r), *with_j(s), m=2)
        assert result.count == 1
        assert result.items[0].is_trivial

    def test_matched_actions(self, z3_z2):
        r, s = z3_z2
        result = search_matched_actions(*with_j(r), *with_j(s), m=1)
        assert result.count == 2
        assert result.items[0].is_trivial

    def test_unpruned_matched_actions_contain_pruned(self, z3_z2):
        r, s = z3_z2
        pruned = search_matched_actions(*with_j(r), *with_j(s), m=0)
        unpruned = search_matched_actions(*with_j(r), *with_j(s), m=0, pruned=False)
        assert unpruned.examined == 3 ** 2 * 2 ** 2
        assert pruned.count == 1
        assert unpruned.count >= pruned.count


class TestLoopEnumeration:
    @pytest.mark.parametrize("n,expected", [(1, 1), (2, 1), (3, 1), (4, 4), (5, 56)])
    def test_normalized_counts(self, n, expected):
        assert count_loops(n) == expected

    @pytest.mark.slow
    def test_order_six(self):
        assert count_loops(6) == 9408

    def test_groups_of_order_four(self):
        groups = list(enumerate_loops(4, is_group))
        assert len(groups) == count_loops(4)
        assert all(loop.delta == 0 for loop in groups)

    def test_exhaustive_limit(self):
        with pytest.raises(SearchCapError):
            next(enumerate_loops(7))

    def test_order_must_be_positive(self):
        with pytest.raises(ValueError):
            next(enumerate_loops(0))

    def test_sampling_is_reproducible(self):
        first = [loop.table.tolist() for loop in sample_loops(7, 3, seed=11)]
        second = [loop.table.tolist() for loop in sample_loops(7, 3, seed=11)]
        assert first == second
        assert all(np.array_equal(np.sort(row), np.arange(7)) for t in first for row in np.array(t))


class TestCentralPique:
    def test_negated_sum_is_central(self):
        idx = np.arange(3)
        pique = Pique(CayleyTable((-idx[:, None] - idx[None, :]) % 3), 0)
        assert is_central_pique(pique)

    def test_nonabelian_cloop(self, s3):
        loop, _ = s3
        assert not is_central_pique(Pique(loop.q, 0))
