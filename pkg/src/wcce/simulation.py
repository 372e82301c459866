"""Numerical characterization of the weighted loss on a three-class problem.

A sweep fixes the correct-class probability and slides probability mass from
the semantically-closer wrong class (weight ``w_c``) to the farther one
(weight ``w_f``), recording the weighted loss and the vanilla cross-entropy
at every grid point. The per-step loss change is then compared against the
confidence-shift threshold test from :mod:`wcce.loss`: each step is exactly a
shift of ``p_f_step`` probability from the closer class to the farther one,
so the sign of the loss difference must match the sign of
``w_c - tau * w_f`` at that point. Whether the curve rises monotonically
over the whole sweep depends on the weight regime, which is what the three
canonical settings (0.4/0.05, 0.1/0.05, 0.4/0.5) demonstrate.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .errors import ValidationError
from .loss import LemmaTrial, lemma2_check, weighted_cce
from .weights import FLOAT_FMT

DEFAULT_P_TRUE_GRID = (0.1, 0.3, 0.5, 0.7)
EXPLICABLE_WEIGHT = 0.25  # midpoint of the 0..1 credit range

REGIME_MIXED = "explicable-vs-inexplicable"
REGIME_BOTH_INEXPLICABLE = "both-inexplicable"
REGIME_BOTH_EXPLICABLE = "both-explicable"

# floor below which a loss difference is float noise, not a real trend
NOISE_TOL = 1e-12


@dataclass(frozen=True)
class SimConfig:
    w_c: float
    w_f: float
    w_correct: float = 1.0
    p_true_grid: tuple[float, ...] = DEFAULT_P_TRUE_GRID
    p_f_step: float = 0.01
    epsilon: float | None = None  # shift size for the threshold test; defaults to p_f_step

    def __post_init__(self):
        if self.w_c < 0 or self.w_f < 0 or self.w_correct < 0:
            raise ValidationError("invariant-violation", "weights must be >= 0")
        if not 0 < self.p_f_step < 1:
            raise ValidationError("invariant-violation", f"p_f_step {self.p_f_step} outside (0, 1)")
        if not self.p_true_grid:
            raise ValidationError("invariant-violation", "empty p_true grid")
        for p in self.p_true_grid:
            if not 0 < p < 1:
                raise ValidationError("invariant-violation", f"p_true {p} outside (0, 1)")
        object.__setattr__(self, "p_true_grid", tuple(self.p_true_grid))

    @property
    def weight_row(self) -> tuple[float, float, float]:
        return (self.w_correct, self.w_c, self.w_f)


@dataclass(frozen=True)
class CurvePoint:
    p_f: float
    p_c: float
    loss_weighted: float
    loss_cce: float


@dataclass(frozen=True)
class LossCurve:
    p_true: float
    regime_label: str
    points: tuple[CurvePoint, ...] = field(repr=False)


@dataclass(frozen=True)
class RegimeVerdict:
    """Aggregated adjacent-pair checks over every curve of one regime."""

    regime_label: str
    monotone_overall: bool
    condition_consistent: bool
    violations: int
    violations_where_condition_holds: int
    boundary_pairs: int
    pairs_checked: int


def regime_label(w_c: float, w_f: float) -> str:
    """Classify a weight pair by which wrong classes carry real credit."""
    c_high = w_c >= EXPLICABLE_WEIGHT
    f_high = w_f >= EXPLICABLE_WEIGHT
    if c_high and f_high:
        return REGIME_BOTH_EXPLICABLE
    if not c_high and not f_high:
        return REGIME_BOTH_INEXPLICABLE
    return REGIME_MIXED


def sweep(config: SimConfig) -> list[LossCurve]:
    """One loss curve per grid value of the correct-class probability.

    For each curve, p_f runs from p_f_step to 1 - p_true - p_f_step in steps
    of p_f_step and p_c takes the remaining mass, so every point sits on the
    probability simplex.
    """
    label = regime_label(config.w_c, config.w_f)
    w_row = config.weight_row
    one_hot = (1.0, 0.0, 0.0)
    step = config.p_f_step
    curves = []
    for p_true in config.p_true_grid:
        k_max = int((1.0 - p_true - step) / step + 1e-9)
        if k_max < 1:
            raise ValidationError(
                "infeasible-grid",
                f"p_true={p_true} leaves no interior point at step {step}",
            )
        points = []
        for k in range(1, k_max + 1):
            p_f = k * step
            p_c = 1.0 - p_true - p_f
            probs = (p_true, p_c, p_f)
            points.append(
                CurvePoint(
                    p_f=p_f,
                    p_c=p_c,
                    loss_weighted=weighted_cce(w_row, probs),
                    loss_cce=weighted_cce(one_hot, probs),
                )
            )
        curves.append(LossCurve(p_true=p_true, regime_label=label, points=tuple(points)))
    return curves


def regime_report(curves, config: SimConfig) -> RegimeVerdict:
    """Check every adjacent grid pair against the confidence-shift threshold.

    Each step from p_f to p_f + step moves that much probability from the
    closer class to the farther class; the loss difference's sign must agree
    with the sign of ``w_c - tau * w_f`` (pairs inside the threshold's
    boundary band, or with a sub-noise loss difference, are not scored).
    """
    pairs = violations = violations_cond = boundary = 0
    consistent = True
    for curve in curves:
        pts = curve.points
        for left, right in zip(pts[:-1], pts[1:]):
            eps = right.p_f - left.p_f
            trial = LemmaTrial(
                weight_row=config.weight_row,
                base_probs=(curve.p_true, left.p_c, left.p_f),
                class_a=1,
                class_b=2,
                epsilon=eps,
            )
            check = lemma2_check(trial)
            gap = right.loss_weighted - left.loss_weighted
            pairs += 1
            if gap < 0:
                violations += 1
            if check.boundary or abs(gap) <= NOISE_TOL:
                boundary += 1
                continue
            if (gap > 0) != (check.margin > 0):
                consistent = False
            if gap < 0 and check.margin > 0:
                violations_cond += 1
    return RegimeVerdict(
        regime_label=curves[0].regime_label if curves else regime_label(config.w_c, config.w_f),
        monotone_overall=violations == 0,
        condition_consistent=consistent,
        violations=violations,
        violations_where_condition_holds=violations_cond,
        boundary_pairs=boundary,
        pairs_checked=pairs,
    )


def curves_to_csv(curves) -> str:
    """Serialize as 'regime,p_true,p_f,p_c,loss_weighted,loss_cce' rows."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["regime", "p_true", "p_f", "p_c", "loss_weighted", "loss_cce"])
    for curve in curves:
        for pt in curve.points:
            writer.writerow(
                [curve.regime_label]
                + [FLOAT_FMT.format(v) for v in (curve.p_true, pt.p_f, pt.p_c)]
                + [FLOAT_FMT.format(v) for v in (pt.loss_weighted, pt.loss_cce)]
            )
    return out.getvalue()


def verdict_to_csv(verdicts) -> str:
    """Serialize as 'regime,monotone_overall,condition_consistent,violations' rows."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["regime", "monotone_overall", "condition_consistent", "violations"])
    for v in verdicts:
        writer.writerow(
            [
                v.regime_label,
                str(v.monotone_overall).lower(),
                str(v.condition_consistent).lower(),
                v.violations,
            ]
        )
    return out.getvalue()
