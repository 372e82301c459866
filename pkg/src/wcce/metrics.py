"""Explicability scoring of competing classifiers over shared mispredictions.

Scores operate on the set M of instances that every compared classifier gets
wrong. For each such instance, every classifier's prediction is mapped to a
similarity-to-truth value v through a weight-matrix-shaped similarity table;
the classifier(s) with the most forgivable prediction collect credit:

* Hard score - one point per instance, awarded only on a strict maximum of v
  (ties award nothing, so no classifier is favored by its position);
* Soft score - each instance distributes exactly one unit, split 1/n among
  the n classifiers attaining the maximum.

Soft credit is accumulated as exact rationals so the per-instance unit is
conserved exactly; CSV output renders them as floats.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .backend import kernels
from .errors import ValidationError
from .loss import PROB_SUM_TOL
from .weights import FLOAT_FMT, WeightMatrix


@dataclass(frozen=True)
class PredictionSet:
    """One classifier's predicted distributions over a shared instance set."""

    classifier_name: str
    instance_ids: tuple[str, ...]
    true_classes: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        ids = tuple(str(i) for i in self.instance_ids)
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate-instance", f"{self.classifier_name}: repeated instance ids")
        true = np.asarray(self.true_classes, dtype=np.int64)
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 2 or probs.shape[0] != len(ids) or true.shape != (len(ids),):
            raise ValidationError(
                "shape-mismatch",
                f"{self.classifier_name}: {len(ids)} ids, {true.shape} labels, {probs.shape} probs",
            )
        if len(ids) and (true.min() < 0 or true.max() >= probs.shape[1]):
            raise ValidationError("index-out-of-range", f"{self.classifier_name}: bad true class")
        if len(ids) and np.abs(probs.sum(axis=1) - 1.0).max() > PROB_SUM_TOL:
            raise ValidationError(
                "invariant-violation", f"{self.classifier_name}: probability rows must sum to 1"
            )
        true.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "instance_ids", ids)
        object.__setattr__(self, "true_classes", true)
        object.__setattr__(self, "probs", probs)

    @property
    def n_classes(self) -> int:
        return self.probs.shape[1]

    def predicted_classes(self) -> np.ndarray:
        # argmax takes the lowest index on exact ties, matching the trainer
        return np.argmax(self.probs, axis=1)


@dataclass(frozen=True)
class Mistake:
    """One instance misclassified by every compared classifier."""

    instance_id: str
    true_class: int
    predicted: tuple[int, ...]


@dataclass(frozen=True)
class MisclassifiedSet:
    """The shared-mistake set M, ordered by instance id."""

    classifier_names: tuple[str, ...]
    mistakes: tuple[Mistake, ...]

    def __len__(self) -> int:
        return len(self.mistakes)


@dataclass(frozen=True)
class ScoreReport:
    classifier_names: tuple[str, ...]
    hard: tuple[int, ...]
    soft: tuple[Fraction, ...]
    intersection_size: int


def misclassified_intersection(sets) -> MisclassifiedSet:
    """Instances every classifier got wrong, with each classifier's prediction.

    All prediction sets must cover identical instance ids with identical true
    classes. Requires at least two sets (a one-classifier "comparison" is
    degenerate; build a MisclassifiedSet directly if you need it).
    """
    sets = list(sets)
    if len(sets) < 2:
        raise ValidationError("too-few-sets", f"need >= 2 prediction sets, got {len(sets)}")
    names = tuple(s.classifier_name for s in sets)
    first = sets[0]
    id_to_row = {inst: i for i, inst in enumerate(first.instance_ids)}
    for s in sets[1:]:
        if set(s.instance_ids) != set(first.instance_ids):
            raise ValidationError(
                "instance-coverage-mismatch",
                f"{s.classifier_name} covers different instances than {first.classifier_name}",
            )
    rows = {s.classifier_name: {inst: i for i, inst in enumerate(s.instance_ids)} for s in sets}
    preds = {s.classifier_name: s.predicted_classes() for s in sets}
    mistakes = []
    for inst in sorted(first.instance_ids):
        true = int(first.true_classes[id_to_row[inst]])
        for s in sets[1:]:
            other = int(s.true_classes[rows[s.classifier_name][inst]])
            if other != true:
                raise ValidationError(
                    "true-class-disagreement",
                    f"instance {inst!r}: true class {true} vs {other} in {s.classifier_name}",
                )
        chosen = tuple(int(preds[s.classifier_name][rows[s.classifier_name][inst]]) for s in sets)
        if all(c != true for c in chosen):
            mistakes.append(Mistake(inst, true, chosen))
    return MisclassifiedSet(names, tuple(mistakes))


def similarity_of_mistakes(mistake: Mistake, sim: WeightMatrix) -> np.ndarray:
    """Per-classifier similarity of the predicted class to the true class."""
    n = sim.n_classes
    if not 0 <= mistake.true_class < n:
        raise ValidationError("index-out-of-range", f"true class {mistake.true_class} outside 0..{n - 1}")
    for p in mistake.predicted:
        if not 0 <= p < n:
            raise ValidationError("index-out-of-range", f"predicted class {p} outside 0..{n - 1}")
    return np.array([sim.values[mistake.true_class, p] for p in mistake.predicted])


def hard_soft_scores(mset: MisclassifiedSet, sim: WeightMatrix) -> ScoreReport:
    """Accumulate Hard and Soft credit over the shared-mistake set."""
    k = len(mset.classifier_names)
    hard = [0] * k
    soft = [Fraction(0)] * k
    for mistake in mset.mistakes:
        v = similarity_of_mistakes(mistake, sim)
        best = v.max()
        winners = [c for c in range(k) if v[c] == best]
        if len(winners) == 1:
            hard[winners[0]] += 1
        share = Fraction(1, len(winners))
        for c in winners:
            soft[c] += share
    return ScoreReport(
        classifier_names=mset.classifier_names,
        hard=tuple(hard),
        soft=tuple(soft),
        intersection_size=len(mset),
    )


def score_report_to_csv(report: ScoreReport) -> str:
    """Serialize as 'classifier,hard,soft' rows (soft rendered as float)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["classifier", "hard", "soft"])
    for name, h, s in zip(report.classifier_names, report.hard, report.soft):
        writer.writerow([name, h, FLOAT_FMT.format(float(s))])
    return out.getvalue()


# ---------------------------------------------------------------------------
# Cross-loss evaluation table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LossTable:
    classifier_names: tuple[str, ...]
    loss_names: tuple[str, ...]
    values: np.ndarray  # (classifiers, losses)

    def column_argmin(self, loss_name: str) -> int:
        j = self.loss_names.index(loss_name)
        return int(np.argmin(self.values[:, j]))


def loss_table(sets, losses) -> LossTable:
    """Mean loss of every classifier under every named weight matrix.

    ``losses`` is a sequence of (name, WeightMatrix) pairs. Instances are
    visited in instance-id order so the accumulation is reproducible.
    """
    sets = list(sets)
    losses = list(losses)
    if not sets or not losses:
        raise ValidationError("empty-list", "need at least one prediction set and one loss")
    values = np.zeros((len(sets), len(losses)))
    for i, pred_set in enumerate(sets):
        order = np.argsort(np.asarray(pred_set.instance_ids))
        true = pred_set.true_classes[order]
        probs = pred_set.probs[order]
        for j, (_, matrix) in enumerate(losses):
            if matrix.n_classes != pred_set.n_classes:
                raise ValidationError(
                    "class-mismatch",
                    f"{pred_set.classifier_name} has {pred_set.n_classes} classes, "
                    f"loss matrix has {matrix.n_classes}",
                )
            per_sample = kernels.wcce_loss(matrix.values[true], probs)
            values[i, j] = float(per_sample.mean())
    return LossTable(
        classifier_names=tuple(s.classifier_name for s in sets),
        loss_names=tuple(name for name, _ in losses),
        values=values,
    )


def loss_table_to_csv(table: LossTable) -> str:
    """Rows are models, columns are loss names."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["model"] + list(table.loss_names))
    for i, name in enumerate(table.classifier_names):
        writer.writerow([name] + [FLOAT_FMT.format(v) for v in table.values[i]])
    return out.getvalue()


def parse_predictions_csv(text: str, classifier_name: str) -> PredictionSet:
    """Parse 'instance,true_class,p_0..p_{n-1}' rows into a PredictionSet."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ValidationError("empty-input", "predictions file is empty") from None
    n = len(header) - 2
    if n < 1 or header != ["instance", "true_class"] + [f"p_{j}" for j in range(n)]:
        raise ValidationError(
            "malformed-line", "expected header 'instance,true_class,p_0..'", line=1
        )
    ids, true, probs = [], [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != n + 2:
            raise ValidationError(
                "malformed-line", f"expected {n + 2} fields, got {len(row)}", line=lineno
            )
        try:
            ids.append(row[0])
            true.append(int(row[1]))
            probs.append([float(v) for v in row[2:]])
        except ValueError:
            raise ValidationError("malformed-line", f"bad number in {row!r}", line=lineno) from None
    return PredictionSet(classifier_name, tuple(ids), np.array(true, dtype=np.int64), np.array(probs))
