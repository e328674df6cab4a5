import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from multirisk.debtrank import (
    EconomicValue,
    debtrank_all_singletons,
    debtrank_run,
    economic_value,
    impact_matrix,
)
from multirisk.model import ExposureLayer

from conftest import make_registry


def mutual_2bank():
    """Two banks fully wiping each other out: X_12 = X_21 = 100, C = 50."""
    layer = ExposureLayer("DL", [[0.0, 100.0], [100.0, 0.0]])
    registry = make_registry([50.0, 50.0])
    return impact_matrix(layer, registry), economic_value(layer)


class TestImpactMatrix:
    def test_caps_at_one(self):
        layer = ExposureLayer("DL", [[0.0, 100.0], [0.0, 0.0]])
        W = impact_matrix(layer, make_registry([50.0, 50.0]))
        assert W[0, 1] == 1.0

    def test_direct_ratio(self):
        layer = ExposureLayer("DL", [[0.0, 25.0], [0.0, 0.0]])
        W = impact_matrix(layer, make_registry([200.0, 100.0]))
        assert W[0, 1] == 0.25

    def test_zero_matrix(self):
        layer = ExposureLayer("DL", np.zeros((3, 3)))
        W = impact_matrix(layer, make_registry([1.0, 2.0, 3.0]))
        np.testing.assert_array_equal(W, 0.0)

    def test_dimension_mismatch_rejected(self):
        layer = ExposureLayer("DL", np.zeros((3, 3)))
        with pytest.raises(ValueError, match="registry has 2 banks"):
            impact_matrix(layer, make_registry([1.0, 2.0]))

    def test_nonpositive_equity_rejected(self):
        layer = ExposureLayer("DL", np.zeros((2, 2)))
        registry = make_registry([1.0, 0.0])
        with pytest.raises(ValueError, match="non-positive equity"):
            impact_matrix(layer, registry)


class TestEconomicValue:
    def test_symmetric_offdiagonal(self):
        matrix = np.full((3, 3), 7.0)
        np.fill_diagonal(matrix, 0.0)
        values = economic_value(ExposureLayer("DL", matrix))
        assert_allclose(values.weights, 1.0 / 3.0)

    def test_single_exposure(self):
        values = economic_value(ExposureLayer("DL", [[0.0, 100.0], [0.0, 0.0]]))
        assert_allclose(values.weights, [0.0, 1.0])
        assert values.total_value == 100.0

    def test_zero_matrix_rejected(self):
        with pytest.raises(ValueError, match="degenerate layer"):
            economic_value(ExposureLayer("DL", np.zeros((2, 2))))

    def test_weights_sum_to_one(self, rng):
        matrix = rng.uniform(0.0, 10.0, (6, 6))
        values = economic_value(ExposureLayer("DL", matrix))
        assert abs(values.weights.sum() - 1.0) < 1e-9


class TestDebtrankRun:
    def test_mutual_default_cascade(self):
        W, values = mutual_2bank()
        result = debtrank_run(W, values, 0, 1.0)
        assert abs(result.debtrank_incl - 1.0) < 1e-12
        assert abs(result.debtrank_excl - 0.5) < 1e-12
        assert_allclose(result.final_distress, [1.0, 1.0])
        assert result.rounds <= 3
        assert list(result.node_states) == ["I", "I"]

    def test_isolated_bank_no_propagation(self):
        W = np.zeros((3, 3))
        values = EconomicValue(np.array([0.5, 0.25, 0.25]), 100.0)
        result = debtrank_run(W, values, 1, 1.0)
        assert result.debtrank_excl == 0.0
        assert result.debtrank_incl == 0.25

    def test_one_step_partial_distress(self):
        layer = ExposureLayer("DL", [[0.0, 20.0], [0.0, 0.0]])
        registry = make_registry([50.0, 50.0])
        W = impact_matrix(layer, registry)
        result = debtrank_run(W, economic_value(layer), 0, 0.5)
        # h_2(T) = 0.5 * min(1, 20/50)
        assert abs(result.final_distress[1] - 0.2) < 1e-12

    def test_self_loop_amplifies_secondary_node_once(self):
        # bank 1 distresses bank 2 (W=0.4); bank 2 has a self-loop (W=0.5)
        W = np.array([[0.0, 0.4], [0.0, 0.5]])
        values = EconomicValue(np.array([0.5, 0.5]), 1.0)
        result = debtrank_run(W, values, 0, 0.5)
        # 0.5*0.4 = 0.2 arrives, then the self-loop adds 0.5*0.2 once
        assert abs(result.final_distress[1] - 0.3) < 1e-12

    def test_self_loop_inert_for_defaulted_seed(self):
        W = np.array([[0.7]])
        values = EconomicValue(np.array([1.0]), 1.0)
        result = debtrank_run(W, values, 0, 1.0)
        assert result.final_distress[0] == 1.0
        assert result.debtrank_incl == 1.0

    def test_empty_seed_set_rejected(self):
        W, values = mutual_2bank()
        with pytest.raises(ValueError, match="non-empty"):
            debtrank_run(W, values, [], 1.0)

    def test_bad_psi_rejected(self):
        W, values = mutual_2bank()
        with pytest.raises(ValueError, match="psi"):
            debtrank_run(W, values, 0, 1.5)

    def test_out_of_range_seed_rejected(self):
        W, values = mutual_2bank()
        with pytest.raises(ValueError, match="out of range"):
            debtrank_run(W, values, 5, 1.0)

    def test_multi_seed_generalization(self):
        W, values = mutual_2bank()
        result = debtrank_run(W, values, {0, 1}, 1.0)
        assert abs(result.debtrank_incl - 1.0) < 1e-12
        assert abs(result.debtrank_excl - 0.0) < 1e-12


class TestAllSingletons:
    def test_disconnected_network(self):
        W = np.zeros((4, 4))
        values = EconomicValue(np.full(4, 0.25), 10.0)
        for result in debtrank_all_singletons(W, values, 1.0):
            assert result.debtrank_excl == 0.0

    def test_star_center_defaults_all_leaves(self):
        # center = bank 0; a center default costs each leaf more than its capital
        matrix = np.zeros((4, 4))
        matrix[0, 1:] = 100.0
        layer = ExposureLayer("DL", matrix)
        registry = make_registry([50.0, 50.0, 50.0, 50.0])
        W = impact_matrix(layer, registry)
        values = economic_value(layer)
        results = debtrank_all_singletons(W, values, 1.0)
        assert abs(results[0].debtrank_incl - 1.0) < 1e-12

    def test_matches_individual_runs(self, rng):
        W = rng.uniform(0.0, 1.0, (5, 5)) * (rng.random((5, 5)) < 0.5)
        values = EconomicValue(np.full(5, 0.2), 5.0)
        batch = debtrank_all_singletons(W, values, 0.7)
        for i, expected in enumerate(batch):
            single = debtrank_run(W, values, i, 0.7)
            assert single.debtrank_incl == expected.debtrank_incl
            assert single.debtrank_excl == expected.debtrank_excl
            np.testing.assert_array_equal(
                single.final_distress, expected.final_distress
            )


def _random_case(seed):
    rng = np.random.default_rng(seed)
    b = int(rng.integers(1, 9))
    W = rng.uniform(0.0, 1.0, (b, b)) * (rng.random((b, b)) < 0.6)
    w = rng.uniform(0.0, 1.0, b)
    total = w.sum()
    values = EconomicValue(w / total if total > 0 else np.full(b, 1.0 / b), 100.0)
    seeds = sorted(rng.choice(b, size=int(rng.integers(1, b + 1)), replace=False))
    psi = float(rng.uniform(0.0, 1.0))
    return W, values, seeds, psi


class TestProperties:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=80, deadline=None)
    def test_bounds_and_termination(self, seed):
        W, values, seeds, psi = _random_case(seed)
        result = debtrank_run(W, values, seeds, psi)
        b = W.shape[0]
        assert result.rounds <= b + 1
        assert np.all(result.final_distress >= 0.0)
        assert np.all(result.final_distress <= 1.0)
        assert -1e-12 <= result.debtrank_excl <= result.debtrank_incl <= 1.0 + 1e-12

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_zero_psi_is_neutral(self, seed):
        W, values, seeds, _ = _random_case(seed)
        result = debtrank_run(W, values, seeds, 0.0)
        assert result.debtrank_incl == 0.0
        assert result.debtrank_excl == 0.0

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_permutation_equivariance(self, seed):
        W, values, seeds, psi = _random_case(seed)
        b = W.shape[0]
        perm = np.random.default_rng(seed + 1).permutation(b)
        W_p = W[np.ix_(perm, perm)]
        values_p = EconomicValue(values.weights[perm], values.total_value)
        seeds_p = [int(np.nonzero(perm == s)[0][0]) for s in seeds]

        base = debtrank_run(W, values, seeds, psi)
        permuted = debtrank_run(W_p, values_p, seeds_p, psi)
        assert_allclose(
            permuted.final_distress, base.final_distress[perm], rtol=0, atol=1e-12
        )
        assert abs(permuted.debtrank_incl - base.debtrank_incl) < 1e-12
        assert permuted.rounds == base.rounds

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_single_seed_excl_incl_identity(self, seed):
        W, values, seeds, psi = _random_case(seed)
        i = seeds[0]
        result = debtrank_run(W, values, i, psi)
        assert result.debtrank_excl == result.debtrank_incl - psi * values.weights[i]

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_final_distress_dominates_initial(self, seed):
        W, values, seeds, psi = _random_case(seed)
        result = debtrank_run(W, values, seeds, psi)
        h0 = np.zeros(W.shape[0])
        h0[list(seeds)] = psi
        assert np.all(result.final_distress >= h0 - 1e-15)
