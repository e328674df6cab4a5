import numpy as np
import pytest

from multirisk.losses import (
    BankLimitError,
    expected_loss_approx,
    expected_loss_exact,
    marginal_exposure_loss,
    marginal_scan,
)
from multirisk.model import ExposureLayer
from multirisk.multilayer import build_network, combine_layers, without_exposure
from multirisk.generator import GeneratorConfig, generate_synthetic

from conftest import make_registry, random_snapshot


def two_bank_fixture():
    """X_12 = 30, X_21 = 80, C = (100, 50), p = (0.1, 0.2).

    Hand trace: W_12 = 0.6, W_21 = 0.8, v = (80, 30)/110, V = 110,
    R_{1} = 98/110, R_{2} = 94/110, R_{1,2} = 1.
    """
    layer = ExposureLayer("DL", [[0.0, 30.0], [80.0, 0.0]])
    registry = make_registry([100.0, 50.0], p=[0.1, 0.2])
    return layer, registry


class TestExpectedLossExact:
    def test_two_bank_hand_expansion(self):
        layer, registry = two_bank_fixture()
        result = expected_loss_exact(layer, registry, psi=1.0)
        expected = (
            0.1 * 0.8 * 98.0  # only bank 1 defaults
            + 0.9 * 0.2 * 94.0  # only bank 2 defaults
            + 0.1 * 0.2 * 110.0  # both default
        )
        assert result.value == pytest.approx(expected, rel=1e-12)
        assert result.method == "exact"
        assert result.terms_evaluated == 4

    def test_single_bank_self_loop(self):
        layer = ExposureLayer("OP", [[50.0]])
        registry = make_registry([100.0], p=[0.3])
        result = expected_loss_exact(layer, registry, psi=1.0)
        assert result.value == pytest.approx(50.0 * 0.3, rel=1e-12)

    def test_no_default_probability_no_loss(self):
        layer, _ = two_bank_fixture()
        registry = make_registry([100.0, 50.0], p=[0.0, 0.0])
        assert expected_loss_exact(layer, registry).value == 0.0

    def test_certain_default_gives_full_set_debtrank(self):
        layer, _ = two_bank_fixture()
        registry = make_registry([100.0, 50.0], p=[1.0, 1.0])
        result = expected_loss_exact(layer, registry)
        # only the full set carries weight; its DebtRank is 1
        assert result.value == pytest.approx(110.0, rel=1e-12)

    def test_weight_sum_is_one(self, rng):
        snap = random_snapshot(rng, banks=7, assets=8)
        network = build_network(snap)
        result = expected_loss_exact(network, snap.registry)
        assert abs(result.weight_sum - 1.0) <= 1e-12

    def test_bank_limit_enforced(self):
        registry = make_registry(np.full(17, 100.0))
        matrix = np.zeros((17, 17))
        matrix[0, 1] = 5.0
        layer = ExposureLayer("DL", matrix)
        with pytest.raises(BankLimitError, match="expected_loss_approx"):
            expected_loss_exact(layer, registry, max_banks=16)

    def test_psi_zero_prices_to_zero(self):
        layer, registry = two_bank_fixture()
        assert expected_loss_exact(layer, registry, psi=0.0).value == 0.0


class TestExpectedLossApprox:
    def test_no_default_probability_no_loss(self):
        layer, _ = two_bank_fixture()
        registry = make_registry([100.0, 50.0], p=[0.0, 0.0])
        assert expected_loss_approx(layer, registry).value == 0.0

    def test_single_bank_matches_exact(self):
        layer = ExposureLayer("OP", [[50.0]])
        registry = make_registry([100.0], p=[0.3])
        exact = expected_loss_exact(layer, registry)
        approx = expected_loss_approx(layer, registry)
        assert approx.value == pytest.approx(exact.value, rel=1e-15)

    def test_small_probability_agreement(self):
        # power-set enumeration is the oracle for the first-order formula
        for seed in (1, 2, 3):
            snap = generate_synthetic(GeneratorConfig(banks=8, assets=10, seed=seed))
            registry = make_registry(
                snap.registry.equity, p=np.full(8, 0.001), prefix="B00"
            )
            network = build_network(snap)
            exact = expected_loss_exact(network, registry)
            approx = expected_loss_approx(network, registry)
            assert approx.value == pytest.approx(exact.value, rel=0.01)

    def test_two_bank_closed_form(self):
        layer, registry = two_bank_fixture()
        result = expected_loss_approx(layer, registry)
        expected = 0.1 * 98.0 + 0.2 * 94.0
        assert result.value == pytest.approx(expected, rel=1e-12)
        assert result.method == "approximate"
        assert result.terms_evaluated == 2


class TestMarginalExposureLoss:
    def test_zero_delta_zero_change(self, rng):
        snap = random_snapshot(rng, banks=5, assets=6)
        network = build_network(snap)
        record = marginal_exposure_loss(
            network, snap.registry, "B0", "B1", "direct", 0.0
        )
        assert record.delta_el == 0.0

    def test_zero_probabilities_zero_change(self, rng):
        snap = random_snapshot(rng, banks=5, assets=6)
        registry = make_registry(snap.registry.equity, p=np.zeros(5))
        network = build_network(snap)
        record = marginal_exposure_loss(network, registry, "B0", "B1", "direct", 50.0)
        assert record.delta_el == 0.0

    def test_matches_direct_double_evaluation(self, rng):
        snap = random_snapshot(rng, banks=5, assets=6)
        network = build_network(snap)
        row, col = map(int, np.argwhere(network.layer("direct").matrix > 0)[0])
        reduced, size = without_exposure(network, "direct", row, col)

        record = marginal_exposure_loss(
            reduced,
            snap.registry,
            snap.registry.bank_ids[row],
            snap.registry.bank_ids[col],
            "direct",
            size,
        )
        el_with = expected_loss_approx(network, snap.registry).value
        el_without = expected_loss_approx(reduced, snap.registry).value
        assert record.delta_el == el_with - el_without

    def test_remove_then_re_add_nets_to_zero(self, rng):
        snap = random_snapshot(rng, banks=5, assets=6)
        network = build_network(snap)
        row, col = map(int, np.argwhere(network.layer("direct").matrix > 0)[0])
        reduced, size = without_exposure(network, "direct", row, col)
        re_added = marginal_exposure_loss(
            reduced,
            snap.registry,
            snap.registry.bank_ids[row],
            snap.registry.bank_ids[col],
            "direct",
            size,
        )
        removed_el = expected_loss_approx(reduced, snap.registry).value
        full_el = expected_loss_approx(network, snap.registry).value
        # re-adding restores the exposure bitwise, so the changes cancel exactly
        assert (full_el - removed_el) - re_added.delta_el == 0.0

    def test_unknown_bank_rejected(self, rng):
        network = build_network(random_snapshot(rng))
        with pytest.raises(KeyError, match="nope"):
            marginal_exposure_loss(
                network, random_snapshot(rng).registry, "nope", "B0", "direct", 1.0
            )

    def test_negative_delta_rejected(self, rng):
        snap = random_snapshot(rng)
        network = build_network(snap)
        with pytest.raises(ValueError, match="nonnegative"):
            marginal_exposure_loss(network, snap.registry, "B0", "B1", "direct", -1.0)


class TestReportedDiagnostics:
    """Printed distributions the contract asks to report but not assert."""

    def test_report_agreement_curve_across_p(self, capsys):
        rows = []
        for p in (0.001, 0.01, 0.05, 0.1, 0.2):
            errors = []
            for seed in range(10):
                snap = generate_synthetic(GeneratorConfig(banks=8, assets=10, seed=seed))
                registry = make_registry(
                    snap.registry.equity, p=np.full(8, p), prefix="B00"
                )
                network = build_network(snap)
                exact = expected_loss_exact(network, registry)
                approx = expected_loss_approx(network, registry)
                errors.append(abs(approx.value - exact.value) / exact.value)
            rows.append((p, float(np.mean(errors))))
        with capsys.disabled():
            print("\nexact-vs-approx mean relative error by default probability:")
            for p, err in rows:
                print(f"  p={p:<6} mean_rel_err={err:.4%}")
        # only the small-p end is a hard bound
        assert rows[0][1] <= 0.01

    def test_report_negative_delta_el_fraction(self, rng, capsys):
        negative = 0
        total = 0
        for seed in range(5):
            snap = random_snapshot(np.random.default_rng(seed), banks=8, assets=8)
            network = build_network(snap)
            records = marginal_scan(network, snap.registry)
            total += len(records)
            negative += sum(r.delta_el < 0 for r in records)
        with capsys.disabled():
            print(
                f"\nnegative marginal expected-loss records: {negative}/{total} "
                f"({negative / total:.2%}) on 5 random 8-bank networks"
            )
        assert total > 0


class TestMarginalScan:
    def test_single_exposure_network(self):
        matrix = np.zeros((3, 3))
        matrix[0, 2] = 40.0
        registry = make_registry([50.0, 50.0, 50.0], p=[0.1, 0.1, 0.1])
        network = combine_layers([ExposureLayer("DL", matrix)])
        records = marginal_scan(network, registry)
        assert len(records) == 1
        full_el = expected_loss_approx(network, registry).value
        # the empty network prices to zero, so the record carries the full loss
        assert records[0].delta_el == pytest.approx(full_el, rel=1e-12)
        assert records[0].exposure_size == 40.0
        assert records[0].from_bank == "B0"
        assert records[0].to_bank == "B2"

    def test_record_count_includes_op_diagonal(self, rng):
        snap = random_snapshot(rng, banks=5, assets=6)
        network = build_network(snap)
        records = marginal_scan(network, snap.registry)
        expected = sum(
            np.count_nonzero(layer.matrix) for layer in network.layers
        )
        assert len(records) == expected
        assert any(r.layer == "OP" and r.from_bank == r.to_bank for r in records)

    def test_entries_match_individual_calls(self, rng):
        snap = random_snapshot(rng, banks=10, assets=8)
        network = build_network(snap)
        records = marginal_scan(network, snap.registry)
        for record in records[:12]:
            row = snap.registry.index_of(record.from_bank)
            col = snap.registry.index_of(record.to_bank)
            reduced, size = without_exposure(network, record.layer, row, col)
            again = marginal_exposure_loss(
                reduced,
                snap.registry,
                record.from_bank,
                record.to_bank,
                record.layer,
                size,
            )
            assert again.delta_el == record.delta_el
            assert again.exposure_size == record.exposure_size
