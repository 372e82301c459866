"""Construction, normalization, and persistence of class-penalty weight matrices.

A weight matrix W is n-by-n with rows indexed by the true class and columns by
the predicted class; W[i][j] is the credit granted when class i is predicted
as class j, so larger off-diagonal entries mark misclassifications a person
would find reasonable. Three constructors cover the supported sources:

* ``from_instance_ratings`` - per-instance human label distributions, pooled
  by true class;
* ``from_class_ratings`` - per-class-pair 0..4 ratings, averaged and mapped
  linearly onto [0, 1];
* ``from_taxonomy`` - path similarity between the classes' taxonomy nodes.

Rows are normalized to sum to 1 by default so the weighted cross-entropy is a
proper cross-entropy against a soft target and the identity matrix reproduces
the vanilla loss. Raw matrices remain constructible for threshold experiments
where only relative weights matter.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .taxonomy import LabelMap, Taxonomy, path_similarity, validate_label_map

ROW_SUM_TOL = 1e-9
LIKERT_MAX = 4
FLOAT_FMT = "{:.12g}"


@dataclass(frozen=True)
class WeightMatrix:
    """Validated n-by-n weight matrix plus its class-name ordering.

    Invariants enforced at construction: all entries finite and >= 0, the
    diagonal entry strictly dominates its row (the correct class is never
    credited below a misclassification), and row sums equal 1 within
    ``ROW_SUM_TOL`` when ``normalized`` is set.
    """

    class_names: tuple[str, ...]
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        names = tuple(str(c) for c in self.class_names)
        vals = np.array(self.values, dtype=np.float64)
        n = len(names)
        if vals.shape != (n, n):
            raise ValidationError(
                "shape-mismatch", f"expected a {n}x{n} matrix, got shape {vals.shape}"
            )
        if n == 0:
            raise ValidationError("empty-input", "weight matrix has no classes")
        if len(set(names)) != n:
            raise ValidationError("duplicate-class-name", f"class names not unique: {names}")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("non-finite-weight", "matrix has non-finite entries")
        if vals.min() < 0:
            raise ValidationError("negative-weight", f"minimum entry {vals.min()} < 0")
        for i in range(n):
            off = np.delete(vals[i], i)
            if off.size and vals[i, i] <= off.max():
                raise ValidationError(
                    "diagonal-not-maximal",
                    f"row {names[i]!r}: diagonal {vals[i, i]} is not the strict row maximum",
                )
        if self.normalized:
            sums = vals.sum(axis=1)
            bad = np.abs(sums - 1.0) > ROW_SUM_TOL
            if bad.any():
                i = int(np.argmax(bad))
                raise ValidationError(
                    "row-not-normalized", f"row {names[i]!r} sums to {sums[i]!r}"
                )
        vals.setflags(write=False)
        object.__setattr__(self, "class_names", names)
        object.__setattr__(self, "values", vals)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def row(self, true_class: int) -> np.ndarray:
        return self.values[true_class]


@dataclass(frozen=True)
class InstanceRating:
    """One instance's human label tally: votes per class for a known true class."""

    instance_id: str
    true_class: int
    label_counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.label_counts)
        if any(c < 0 for c in counts):
            raise ValidationError("negative-count", f"{self.instance_id}: negative label count")
        if sum(counts) == 0:
            raise ValidationError(
                "empty-rating", f"{self.instance_id}: all label counts are zero"
            )
        object.__setattr__(self, "label_counts", counts)


@dataclass(frozen=True)
class RatingRecord:
    """One rater's 0..4 judgment of how reasonable one misclassification is.

    0 maps to "Highly Unreasonable (surprised)", 4 to "Highly Reasonable
    (Explicable)".
    """

    rater_id: str
    true_class: int
    predicted_class: int
    score: int

    def __post_init__(self):
        if not isinstance(self.score, (int, np.integer)) or isinstance(self.score, bool):
            raise ValidationError("score-out-of-range", f"score {self.score!r} is not an integer")
        if not 0 <= self.score <= LIKERT_MAX:
            raise ValidationError(
                "score-out-of-range", f"score {self.score} outside 0..{LIKERT_MAX}"
            )
        if self.true_class == self.predicted_class:
            raise ValidationError(
                "self-pair", f"true and predicted class both {self.true_class}"
            )


def _default_names(n: int) -> tuple[str, ...]:
    return tuple(f"class_{i}" for i in range(n))


def _check_index(idx: int, n: int, what: str) -> None:
    if not 0 <= idx < n:
        raise ValidationError("index-out-of-range", f"{what} {idx} outside 0..{n - 1}")


def _normalize(values: np.ndarray) -> np.ndarray:
    sums = values.sum(axis=1, keepdims=True)
    if (sums <= 0).any():
        i = int(np.argmax(sums.ravel() <= 0))
        raise ValidationError("zero-row", f"row {i} sums to {float(sums.ravel()[i])}")
    return values / sums


def identity(class_names) -> WeightMatrix:
    """The vanilla-loss matrix: full credit on the diagonal, zero elsewhere."""
    names = tuple(class_names)
    return WeightMatrix(names, np.eye(len(names)), normalized=True)


def from_instance_ratings(
    ratings, n: int, class_names=None, *, pool_counts: bool = True
) -> WeightMatrix:
    """Aggregate per-instance label tallies into a row-normalized matrix.

    With ``pool_counts`` (default) raw counts are summed per true class before
    normalizing, so instances with more raters weigh more; otherwise each
    instance is normalized first and instances weigh equally.
    """
    names = tuple(class_names) if class_names is not None else _default_names(n)
    if len(names) != n:
        raise ValidationError("shape-mismatch", f"{len(names)} names for {n} classes")
    rows = np.zeros((n, n), dtype=np.float64)
    seen = np.zeros(n, dtype=np.int64)
    for r in ratings:
        _check_index(r.true_class, n, f"true_class of {r.instance_id!r}")
        if len(r.label_counts) != n:
            raise ValidationError(
                "index-out-of-range",
                f"{r.instance_id!r} has {len(r.label_counts)} counts for {n} classes",
            )
        counts = np.asarray(r.label_counts, dtype=np.float64)
        rows[r.true_class] += counts if pool_counts else counts / counts.sum()
        seen[r.true_class] += 1
    if (seen == 0).any():
        missing = [names[i] for i in np.flatnonzero(seen == 0)]
        raise ValidationError(
            "class-with-no-instances", f"no instances for: {', '.join(missing)}"
        )
    return WeightMatrix(names, _normalize(rows), normalized=True)


def from_class_ratings(ratings, n: int, class_names=None) -> WeightMatrix:
    """Average per-pair 0..4 ratings into a row-normalized matrix.

    Off-diagonal entries are mean(score)/4; the diagonal is fixed at 1 (the
    largest value an off-diagonal average can approach) before normalization.
    Every ordered pair of distinct classes needs at least one rating.
    """
    names = tuple(class_names) if class_names is not None else _default_names(n)
    if len(names) != n:
        raise ValidationError("shape-mismatch", f"{len(names)} names for {n} classes")
    totals = np.zeros((n, n), dtype=np.float64)
    counts = np.zeros((n, n), dtype=np.int64)
    for r in ratings:
        _check_index(r.true_class, n, "true_class")
        _check_index(r.predicted_class, n, "predicted_class")
        totals[r.true_class, r.predicted_class] += r.score
        counts[r.true_class, r.predicted_class] += 1
    off_diagonal = ~np.eye(n, dtype=bool)
    if (counts[off_diagonal] == 0).any():
        i, j = np.argwhere((counts == 0) & off_diagonal)[0]
        raise ValidationError(
            "missing-pair", f"no rating for pair ({names[i]!r} -> {names[j]!r})"
        )
    values = np.eye(n)
    with np.errstate(invalid="ignore"):
        means = np.where(counts > 0, totals / np.maximum(counts, 1), 0.0)
    values[off_diagonal] = means[off_diagonal] / LIKERT_MAX
    return WeightMatrix(names, _normalize(values), normalized=True)


def from_taxonomy(tax: Taxonomy, labels: LabelMap) -> WeightMatrix:
    """Fill the matrix with pairwise path similarity of the mapped nodes."""
    validate_label_map(labels, tax)
    n = len(labels)
    values = np.empty((n, n), dtype=np.float64)
    for i, node_i in enumerate(labels.nodes):
        for j, node_j in enumerate(labels.nodes):
            values[i, j] = path_similarity(tax, node_i, node_j)
    return WeightMatrix(labels.class_names, _normalize(values), normalized=True)


def average_matrices(ms) -> WeightMatrix:
    """Element-wise mean of same-shaped matrices, re-normalized by row."""
    ms = list(ms)
    if not ms:
        raise ValidationError("empty-list", "no matrices to average")
    names = ms[0].class_names
    for m in ms[1:]:
        if m.values.shape != ms[0].values.shape:
            raise ValidationError(
                "shape-mismatch", f"shape {m.values.shape} != {ms[0].values.shape}"
            )
        if m.class_names != names:
            raise ValidationError(
                "class-order-mismatch", f"class order {m.class_names} != {names}"
            )
    mean = np.mean([m.values for m in ms], axis=0)
    return WeightMatrix(names, _normalize(mean), normalized=True)


def normalize_rows(m: WeightMatrix) -> WeightMatrix:
    """Divide each row by its sum. Idempotent; ranking within rows unchanged."""
    return WeightMatrix(m.class_names, _normalize(m.values.copy()), normalized=True)


# ---------------------------------------------------------------------------
# CSV formats
# ---------------------------------------------------------------------------


def weight_matrix_to_csv(m: WeightMatrix) -> str:
    """Serialize as ',name_0,...' header plus one 'name_i,w_i0,...' row per class."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([""] + list(m.class_names))
    for i, name in enumerate(m.class_names):
        writer.writerow([name] + [FLOAT_FMT.format(v) for v in m.values[i]])
    return out.getvalue()


def parse_weight_matrix_csv(text: str) -> WeightMatrix:
    """Inverse of :func:`weight_matrix_to_csv`; re-detects the normalized flag."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("empty-input", "weight matrix file is empty") from None
    if len(header) < 2 or header[0].strip():
        raise ValidationError("malformed-line", "expected ',name_0,...' header", line=1)
    names = tuple(h.strip() for h in header[1:])
    n = len(names)
    values = np.zeros((n, n), dtype=np.float64)
    row_names = []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != n + 1:
            raise ValidationError(
                "malformed-line", f"expected {n + 1} fields, got {len(row)}", line=lineno
            )
        row_names.append(row[0].strip())
        try:
            values[len(row_names) - 1] = [float(v) for v in row[1:]]
        except (ValueError, IndexError):
            raise ValidationError("malformed-line", f"bad float in row {row[0]!r}", line=lineno) from None
    if tuple(row_names) != names:
        raise ValidationError(
            "class-order-mismatch", f"row names {tuple(row_names)} != header names {names}"
        )
    normalized = bool(np.all(np.abs(values.sum(axis=1) - 1.0) <= ROW_SUM_TOL))
    return WeightMatrix(names, values, normalized=normalized)


def parse_instance_ratings_csv(text: str) -> tuple[list[InstanceRating], int]:
    """Parse 'instance_id,true_class,count_0..count_{n-1}' rows; returns (ratings, n)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ValidationError("empty-input", "instance ratings file is empty") from None
    n = len(header) - 2
    if n < 1 or header[:2] != ["instance_id", "true_class"] or header[2:] != [
        f"count_{i}" for i in range(n)
    ]:
        raise ValidationError(
            "malformed-line", "expected header 'instance_id,true_class,count_0..'", line=1
        )
    ratings = []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != n + 2:
            raise ValidationError(
                "malformed-line", f"expected {n + 2} fields, got {len(row)}", line=lineno
            )
        try:
            ratings.append(
                InstanceRating(row[0], int(row[1]), tuple(int(c) for c in row[2:]))
            )
        except ValueError:
            raise ValidationError("malformed-line", f"bad integer in {row!r}", line=lineno) from None
    return ratings, n


def parse_rating_records_csv(text: str) -> list[RatingRecord]:
    """Parse 'rater_id,true_class,predicted_class,score' rows."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ValidationError("empty-input", "ratings file is empty") from None
    if header != ["rater_id", "true_class", "predicted_class", "score"]:
        raise ValidationError(
            "malformed-line",
            "expected header 'rater_id,true_class,predicted_class,score'",
            line=1,
        )
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 4:
            raise ValidationError("malformed-line", f"expected 4 fields, got {len(row)}", line=lineno)
        try:
            records.append(RatingRecord(row[0], int(row[1]), int(row[2]), int(row[3])))
        except ValueError:
            raise ValidationError("malformed-line", f"bad integer in {row!r}", line=lineno) from None
    return records


def rating_records_to_csv(records) -> str:
    """Inverse of :func:`parse_rating_records_csv`."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["rater_id", "true_class", "predicted_class", "score"])
    for r in records:
        writer.writerow([r.rater_id, r.true_class, r.predicted_class, r.score])
    return out.getvalue()
