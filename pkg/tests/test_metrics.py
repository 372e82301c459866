from fractions import Fraction

import numpy as np
import pytest

from wcce import loss, metrics, taxonomy, weights
from wcce.errors import ValidationError
from wcce.metrics import Mistake, MisclassifiedSet, PredictionSet


def make_set(name, ids, true, probs):
    return PredictionSet(name, tuple(ids), np.asarray(true), np.asarray(probs, dtype=float))


def one_hot_rows(preds, n):
    out = np.zeros((len(preds), n))
    out[np.arange(len(preds)), preds] = 1.0
    return out


def brute_force_scores(mistakes, sim_values, k):
    """Independent enumeration oracle for hard/soft scores."""
    hard = [0] * k
    soft = [Fraction(0)] * k
    for mistake in mistakes:
        v = [sim_values[mistake.true_class][p] for p in mistake.predicted]
        best = max(v)
        winners = [c for c in range(k) if v[c] == best]
        if len(winners) == 1:
            hard[winners[0]] += 1
        for c in winners:
            soft[c] += Fraction(1, len(winners))
    return hard, soft


class TestPredictionSet:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValidationError) as err:
            make_set("m", ["a", "a"], [0, 1], [[1, 0], [0, 1]])
        assert err.value.kind == "duplicate-instance"

    def test_prob_rows_validated(self):
        with pytest.raises(ValidationError) as err:
            make_set("m", ["a"], [0], [[0.9, 0.3]])
        assert err.value.kind == "invariant-violation"

    def test_argmax_ties_to_lowest_index(self):
        pset = make_set("m", ["a"], [1], [[0.5, 0.5]])
        assert pset.predicted_classes()[0] == 0


class TestIntersection:
    def test_both_perfect_gives_empty(self):
        ids, true = ["x1", "x2"], [0, 1]
        a = make_set("a", ids, true, one_hot_rows([0, 1], 2))
        b = make_set("b", ids, true, one_hot_rows([0, 1], 2))
        assert len(metrics.misclassified_intersection([a, b])) == 0

    def test_set_intersection(self):
        ids, true = ["x1", "x2", "x3"], [0, 0, 0]
        a = make_set("a", ids, true, one_hot_rows([1, 1, 0], 2))  # wrong on x1, x2
        b = make_set("b", ids, true, one_hot_rows([0, 1, 1], 2))  # wrong on x2, x3
        mset = metrics.misclassified_intersection([a, b])
        assert [m.instance_id for m in mset.mistakes] == ["x2"]
        assert mset.mistakes[0].predicted == (1, 1)

    def test_coverage_mismatch(self):
        a = make_set("a", ["x1"], [0], one_hot_rows([1], 2))
        b = make_set("b", ["x9"], [0], one_hot_rows([1], 2))
        with pytest.raises(ValidationError) as err:
            metrics.misclassified_intersection([a, b])
        assert err.value.kind == "instance-coverage-mismatch"

    def test_true_class_disagreement(self):
        a = make_set("a", ["x1"], [0], one_hot_rows([1], 2))
        b = make_set("b", ["x1"], [1], one_hot_rows([0], 2))
        with pytest.raises(ValidationError) as err:
            metrics.misclassified_intersection([a, b])
        assert err.value.kind == "true-class-disagreement"

    def test_requires_two_sets(self):
        a = make_set("a", ["x1"], [0], one_hot_rows([1], 2))
        with pytest.raises(ValidationError) as err:
            metrics.misclassified_intersection([a])
        assert err.value.kind == "too-few-sets"


class TestSimilarityVector:
    def sim_matrix(self, toy_tax):
        names = ("dog", "cat", "car")
        labels = taxonomy.LabelMap(names, names)
        values = np.array(
            [
                [taxonomy.path_similarity(toy_tax, a, b) for b in names]
                for a in names
            ]
        )
        return weights.WeightMatrix(names, values)

    def test_taxonomy_similarities(self, toy_tax):
        sim = self.sim_matrix(toy_tax)
        mistake = Mistake("x", 0, (1, 2))  # true dog; one says cat, other car
        v = metrics.similarity_of_mistakes(mistake, sim)
        assert v[0] == 1 / 3 and v[1] == 1 / 5

    def test_equal_predictions_equal_values(self, toy_tax):
        sim = self.sim_matrix(toy_tax)
        v = metrics.similarity_of_mistakes(Mistake("x", 0, (2, 2, 2)), sim)
        assert np.all(v == v[0])

    def test_identity_matrix_gives_zero(self):
        sim = weights.identity(("a", "b", "c"))
        v = metrics.similarity_of_mistakes(Mistake("x", 0, (1, 2)), sim)
        assert np.array_equal(v, [0.0, 0.0])

    def test_index_out_of_range(self):
        sim = weights.identity(("a", "b"))
        with pytest.raises(ValidationError) as err:
            metrics.similarity_of_mistakes(Mistake("x", 0, (5,)), sim)
        assert err.value.kind == "index-out-of-range"


class TestHardSoft:
    def test_reference_example(self):
        sim = weights.WeightMatrix(
            ("t", "p", "q"), np.array([[1.0, 0.5, 0.3], [0.5, 1.0, 0.4], [0.3, 0.4, 1.0]])
        )
        mset = MisclassifiedSet(
            ("A", "B"),
            (
                Mistake("x1", 0, (1, 2)),  # v = (0.5, 0.3): A wins outright
                Mistake("x2", 0, (1, 1)),  # v = (0.5, 0.5): tie
            ),
        )
        report = metrics.hard_soft_scores(mset, sim)
        assert report.hard == (1, 0)
        assert report.soft == (Fraction(3, 2), Fraction(1, 2))
        assert sum(report.soft) == report.intersection_size == 2

    def test_all_tied_gives_no_hard_points(self):
        sim = weights.identity(("a", "b"))
        mset = MisclassifiedSet(
            ("m1", "m2", "m3"),
            tuple(Mistake(f"x{i}", 0, (1, 1, 1)) for i in range(6)),
        )
        report = metrics.hard_soft_scores(mset, sim)
        assert report.hard == (0, 0, 0)
        assert report.soft == (Fraction(2), Fraction(2), Fraction(2))

    def test_single_classifier_degenerate(self):
        sim = weights.identity(("a", "b"))
        mset = MisclassifiedSet(("only",), tuple(Mistake(f"x{i}", 0, (1,)) for i in range(5)))
        report = metrics.hard_soft_scores(mset, sim)
        assert report.hard == (5,)
        assert report.soft == (Fraction(5),)

    def test_classifier_order_permutes_report(self, toy_tax):
        names = ("dog", "cat", "car")
        sim = weights.WeightMatrix(
            names,
            np.array(
                [[taxonomy.path_similarity(toy_tax, a, b) for b in names] for a in names]
            ),
        )
        mistakes = (
            Mistake("x1", 0, (1, 2)),
            Mistake("x2", 1, (0, 2)),
            Mistake("x3", 2, (0, 0)),
        )
        fwd = metrics.hard_soft_scores(MisclassifiedSet(("A", "B"), mistakes), sim)
        swapped = MisclassifiedSet(
            ("B", "A"), tuple(Mistake(m.instance_id, m.true_class, m.predicted[::-1]) for m in mistakes)
        )
        rev = metrics.hard_soft_scores(swapped, sim)
        assert fwd.hard == rev.hard[::-1]
        assert fwd.soft == rev.soft[::-1]

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(19)
        tie_scenarios = 0
        for scenario in range(60):
            n_classes = int(rng.integers(3, 6))
            k = int(rng.integers(1, 5))
            size = int(rng.integers(1, 21))
            values = rng.uniform(0.05, 0.9, (n_classes, n_classes))
            np.fill_diagonal(values, 1.0)
            sim = weights.WeightMatrix(tuple(f"c{i}" for i in range(n_classes)), values)
            force_ties = scenario % 3 == 0
            mistakes = []
            for i in range(size):
                true = int(rng.integers(0, n_classes))
                wrong = [c for c in range(n_classes) if c != true]
                if force_ties:
                    pick = int(rng.choice(wrong))
                    preds = tuple([pick] * k)
                    tie_scenarios += 1
                else:
                    preds = tuple(int(rng.choice(wrong)) for _ in range(k))
                mistakes.append(Mistake(f"x{i}", true, preds))
            mset = MisclassifiedSet(tuple(f"m{j}" for j in range(k)), tuple(mistakes))
            report = metrics.hard_soft_scores(mset, sim)
            hard, soft = brute_force_scores(mistakes, sim.values, k)
            assert report.hard == tuple(hard)
            assert report.soft == tuple(soft)
            assert sum(report.soft) == len(mistakes)
            assert sum(report.hard) <= len(mistakes)
        assert tie_scenarios >= 20

    def test_score_csv(self):
        report = metrics.ScoreReport(("A", "B"), (1, 0), (Fraction(3, 2), Fraction(1, 2)), 2)
        text = metrics.score_report_to_csv(report)
        assert text.splitlines()[0] == "classifier,hard,soft"
        assert text.splitlines()[1] == "A,1,1.5"


class TestLossTable:
    def predictions(self, probs_by_model, true):
        ids = [f"x{i}" for i in range(len(true))]
        return [
            make_set(name, ids, true, probs) for name, probs in probs_by_model.items()
        ]

    def test_identity_column_is_vanilla_cce(self):
        rng = np.random.default_rng(4)
        true = [0, 1, 2, 1]
        probs = rng.dirichlet(np.ones(3), size=4)
        sets = self.predictions({"m": probs}, true)
        table = metrics.loss_table(sets, [("cce", weights.identity(("a", "b", "c")))])
        expected = np.mean([loss.categorical_cce(p, t) for p, t in zip(probs, true)])
        assert table.values[0, 0] == pytest.approx(expected, abs=1e-12)

    def test_confident_correct_beats_confident_wrong_in_every_column(self):
        # with a strictly dominant diagonal, a confidently-correct classifier
        # always undercuts an equally-confident wrong one
        true = [0, 1, 2]
        right = np.array([[0.98, 0.01, 0.01], [0.01, 0.98, 0.01], [0.01, 0.01, 0.98]])
        wrong = np.array([[0.01, 0.98, 0.01], [0.01, 0.01, 0.98], [0.98, 0.01, 0.01]])
        sets = self.predictions({"right": right, "wrong": wrong}, true)
        matrix = weights.normalize_rows(
            weights.WeightMatrix(("a", "b", "c"), np.array([[1, 0.4, 0.1], [0.4, 1, 0.1], [0.1, 0.1, 1.0]]))
        )
        table = metrics.loss_table(sets, [("w", matrix), ("cce", weights.identity(("a", "b", "c")))])
        assert table.column_argmin("w") == 0
        assert table.column_argmin("cce") == 0

    def test_class_mismatch(self):
        sets = self.predictions({"m": np.array([[0.5, 0.5]])}, [0])
        with pytest.raises(ValidationError) as err:
            metrics.loss_table(sets, [("w", weights.identity(("a", "b", "c")))])
        assert err.value.kind == "class-mismatch"

    def test_csv_layout(self):
        table = metrics.LossTable(("m1", "m2"), ("L1", "L2"), np.array([[1.0, 2.0], [3.0, 4.0]]))
        lines = metrics.loss_table_to_csv(table).splitlines()
        assert lines[0] == "model,L1,L2"
        assert lines[1] == "m1,1,2"
