import math

import numpy as np
import pytest

from wcce import loss, simulation
from wcce.errors import ValidationError
from wcce.simulation import SimConfig

REGIME_1 = SimConfig(w_c=0.4, w_f=0.05)
REGIME_2 = SimConfig(w_c=0.1, w_f=0.05)
REGIME_3 = SimConfig(w_c=0.4, w_f=0.5)


class TestConfig:
    def test_regime_labels(self):
        assert simulation.regime_label(0.4, 0.05) == "explicable-vs-inexplicable"
        assert simulation.regime_label(0.1, 0.05) == "both-inexplicable"
        assert simulation.regime_label(0.4, 0.5) == "both-explicable"

    def test_invalid_config(self):
        with pytest.raises(ValidationError):
            SimConfig(w_c=-0.1, w_f=0.5)
        with pytest.raises(ValidationError):
            SimConfig(w_c=0.4, w_f=0.05, p_true_grid=(0.0,))

    def test_infeasible_grid(self):
        config = SimConfig(w_c=0.4, w_f=0.05, p_true_grid=(0.995,))
        with pytest.raises(ValidationError) as err:
            simulation.sweep(config)
        assert err.value.kind == "infeasible-grid"


class TestSweep:
    def test_point_counts_and_simplex(self):
        curves = simulation.sweep(REGIME_1)
        assert len(curves) == 4
        for curve in curves:
            # p_f from step to 1 - p_true - step inclusive
            expected = round((1 - curve.p_true - 0.01) / 0.01)
            assert len(curve.points) == expected
            for pt in curve.points:
                assert curve.p_true + pt.p_f + pt.p_c == pytest.approx(1.0, abs=1e-12)
                assert pt.p_f > 0 and pt.p_c > 0

    def test_losses_match_loss_module_exactly(self):
        curves = simulation.sweep(REGIME_1)
        for curve in curves[:2]:
            for pt in curve.points[::7]:
                probs = (curve.p_true, pt.p_c, pt.p_f)
                assert pt.loss_weighted == loss.weighted_cce((1.0, 0.4, 0.05), probs)
                assert pt.loss_cce == loss.weighted_cce((1.0, 0.0, 0.0), probs)

    def test_reference_comparison_at_p_true_03(self):
        config = SimConfig(w_c=0.4, w_f=0.05, p_true_grid=(0.3,), p_f_step=0.1)
        curve = simulation.sweep(config)[0]
        by_pf = {round(pt.p_f, 6): pt.loss_weighted for pt in curve.points}
        low_conf = -(math.log(0.3) + 0.4 * math.log(0.4) + 0.05 * math.log(0.3))
        high_conf = -(math.log(0.3) + 0.4 * math.log(0.1) + 0.05 * math.log(0.6))
        assert by_pf[0.3] == pytest.approx(low_conf, abs=1e-12)
        assert by_pf[0.6] == pytest.approx(high_conf, abs=1e-12)
        assert by_pf[0.6] > by_pf[0.3]

    def test_equal_weights_symmetric_under_swap(self):
        config = SimConfig(w_c=0.2, w_f=0.2, p_true_grid=(0.5,), p_f_step=0.05)
        curve = simulation.sweep(config)[0]
        losses = {round(pt.p_f, 6): pt.loss_weighted for pt in curve.points}
        for pt in curve.points:
            mirrored = round(pt.p_c, 6)
            if mirrored in losses:
                assert losses[mirrored] == pytest.approx(pt.loss_weighted, abs=1e-12)

    def test_larger_p_true_shrinks_correct_class_term(self):
        grid = (0.1, 0.3, 0.5, 0.7)
        terms = [-1.0 * math.log(p) for p in grid]
        assert all(a > b for a, b in zip(terms, terms[1:]))

    def test_cce_curve_is_flat(self):
        curve = simulation.sweep(REGIME_1)[0]
        values = {pt.loss_cce for pt in curve.points}
        assert len(values) == 1
        assert values.pop() == pytest.approx(-math.log(0.1), abs=1e-12)


class TestRegimeReport:
    def test_regime_one_consistent_and_clean_where_condition_holds(self):
        curves = simulation.sweep(REGIME_1)
        verdict = simulation.regime_report(curves, REGIME_1)
        assert verdict.condition_consistent
        assert verdict.violations_where_condition_holds == 0

    @pytest.mark.parametrize("config", [REGIME_2, REGIME_3], ids=["regime2", "regime3"])
    def test_other_regimes_violate_monotonicity(self, config):
        curves = simulation.sweep(config)
        verdict = simulation.regime_report(curves, config)
        assert verdict.condition_consistent
        assert verdict.violations >= 1
        assert not verdict.monotone_overall
        assert verdict.violations_where_condition_holds == 0

    def test_sign_agreement_recomputed_pointwise(self):
        config = SimConfig(w_c=0.4, w_f=0.05, p_true_grid=(0.3,), p_f_step=0.02)
        curve = simulation.sweep(config)[0]
        pts = curve.points
        for left, right in zip(pts[:-1], pts[1:]):
            gap = right.loss_weighted - left.loss_weighted
            trial = loss.LemmaTrial(
                weight_row=(1.0, 0.4, 0.05),
                base_probs=(curve.p_true, left.p_c, left.p_f),
                class_a=1,
                class_b=2,
                epsilon=right.p_f - left.p_f,
            )
            check = loss.lemma2_check(trial)
            if not check.boundary and abs(gap) > 1e-12:
                assert (gap > 0) == (check.margin > 0)

    def test_verdict_counts_add_up(self):
        curves = simulation.sweep(REGIME_2)
        verdict = simulation.regime_report(curves, REGIME_2)
        per_curve_pairs = sum(len(c.points) - 1 for c in curves)
        assert verdict.pairs_checked == per_curve_pairs


class TestCsv:
    def test_curve_csv_header_and_determinism(self):
        curves = simulation.sweep(REGIME_1)
        text = simulation.curves_to_csv(curves)
        assert text.splitlines()[0] == "regime,p_true,p_f,p_c,loss_weighted,loss_cce"
        assert text == simulation.curves_to_csv(simulation.sweep(REGIME_1))

    def test_verdict_csv(self):
        curves = simulation.sweep(REGIME_3)
        verdict = simulation.regime_report(curves, REGIME_3)
        lines = simulation.verdict_to_csv([verdict]).splitlines()
        assert lines[0] == "regime,monotone_overall,condition_consistent,violations"
        assert lines[1].startswith("both-explicable,false,true,")
