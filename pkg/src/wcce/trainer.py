"""Desk-scale softmax classifiers trained with vanilla or weighted cross-entropy.

The model family is deliberately small - linear softmax regression or one
tanh hidden layer - because the mechanism under study is the loss, not the
backbone. Training is plain mini-batch SGD and is bit-reproducible: the seed
fixes parameter initialization and shuffling, batches are visited in
permutation order, and reductions happen in a fixed order. Passing
``weight_matrix=None`` to :func:`train` selects a hard-coded vanilla
cross-entropy path; training with the identity weight matrix follows the
weighted path yet produces bit-identical parameter trajectories, which is
tested as the baseline-reduction guarantee.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import ValidationError
from .weights import FLOAT_FMT, WeightMatrix

MODEL_FORMAT = "wcce-model"
MODEL_VERSION = 1
INIT_SCALE = 0.05


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (m, d), integer labels (m,), and the class-name order."""

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValidationError("shape-mismatch", f"features must be 2-D, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValidationError("non-finite-feature", "features contain non-finite values")
        if y.shape != (x.shape[0],):
            raise ValidationError(
                "shape-mismatch", f"{y.shape[0] if y.ndim == 1 else y.shape} labels for {x.shape[0]} rows"
            )
        n = len(self.class_names)
        if n == 0:
            raise ValidationError("empty-input", "no class names")
        if y.min() < 0 or y.max() >= n:
            raise ValidationError("index-out-of-range", f"labels outside 0..{n - 1}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    epochs: int
    batch_size: int
    seed: int
    hidden_units: int = 0
    l2: float = 0.0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValidationError("invariant-violation", f"learning_rate {self.learning_rate} <= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValidationError("invariant-violation", "epochs and batch_size must be >= 1")
        if self.hidden_units < 0 or self.l2 < 0:
            raise ValidationError("invariant-violation", "hidden_units and l2 must be >= 0")


@dataclass(frozen=True)
class Model:
    """Trained parameters. ``w2 is None`` means a plain linear softmax model."""

    class_names: tuple[str, ...]
    hidden_units: int
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray | None = None
    b2: np.ndarray | None = None

    def __post_init__(self):
        for arr in (self.w1, self.b1, self.w2, self.b2):
            if arr is not None and not np.all(np.isfinite(arr)):
                raise ValidationError("non-finite-parameter", "model has non-finite parameters")

    @property
    def n_features(self) -> int:
        return self.w1.shape[0]


@dataclass(frozen=True)
class TrainResult:
    model: Model
    loss_trace: tuple[float, ...]


def generate_synthetic(
    n_classes: int,
    per_class: int,
    dims: int,
    centers,
    spread: float,
    seed: int,
    class_names=None,
) -> Dataset:
    """Isotropic Gaussian blobs, one per class, deterministic under the seed."""
    centers = np.asarray(centers, dtype=np.float64)
    if centers.shape != (n_classes, dims):
        raise ValidationError(
            "shape-mismatch", f"centers shape {centers.shape} != ({n_classes}, {dims})"
        )
    if not spread > 0:
        raise ValidationError("invariant-violation", f"spread {spread} must be > 0")
    names = tuple(class_names) if class_names is not None else tuple(
        f"class_{i}" for i in range(n_classes)
    )
    rng = np.random.default_rng(seed)
    features = np.vstack(
        [rng.normal(loc=c, scale=spread, size=(per_class, dims)) for c in centers]
    )
    labels = np.repeat(np.arange(n_classes, dtype=np.int64), per_class)
    return Dataset(features, labels, names)


def _forward(x, w1, b1, w2, b2):
    if w2 is None:
        return x @ w1 + b1, None
    hidden = np.tanh(x @ w1 + b1)
    return hidden @ w2 + b2, hidden


def train(data: Dataset, weight_matrix: WeightMatrix | None, cfg: TrainConfig) -> TrainResult:
    """Mini-batch SGD on the mean weighted (or vanilla) cross-entropy.

    ``weight_matrix=None`` runs the hard-coded vanilla path. The returned
    trace holds the full-dataset mean loss after each epoch's updates.
    """
    if weight_matrix is not None and weight_matrix.class_names != data.class_names:
        raise ValidationError(
            "class-mismatch",
            f"weight matrix classes {weight_matrix.class_names} != dataset classes {data.class_names}",
        )
    w_values = weight_matrix.values if weight_matrix is not None else None
    x, y = data.features, data.labels
    m, d = x.shape
    n = len(data.class_names)
    h = cfg.hidden_units
    rng = np.random.default_rng(cfg.seed)

    if h > 0:
        w1 = rng.uniform(-INIT_SCALE, INIT_SCALE, (d, h))
        b1 = np.zeros(h)
        w2 = rng.uniform(-INIT_SCALE, INIT_SCALE, (h, n))
        b2 = np.zeros(n)
    else:
        w1 = rng.uniform(-INIT_SCALE, INIT_SCALE, (d, n))
        b1 = np.zeros(n)
        w2 = b2 = None

    lr = cfg.learning_rate
    trace = []
    for epoch in range(cfg.epochs):
        perm = rng.permutation(m)
        for start in range(0, m, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            xb, yb = x[idx], y[idx]
            logits, hidden = _forward(xb, w1, b1, w2, b2)
            probs = kernels.softmax(logits)
            if w_values is None:
                grad = kernels.cce_grad(probs, yb)
            else:
                grad = kernels.wcce_grad(w_values[yb], probs)
            dz = grad / idx.size
            if w2 is not None:
                gw2 = hidden.T @ dz + cfg.l2 * w2
                gb2 = dz.sum(axis=0)
                dh = (dz @ w2.T) * (1.0 - hidden * hidden)
                gw1 = xb.T @ dh + cfg.l2 * w1
                gb1 = dh.sum(axis=0)
                w2 = w2 - lr * gw2
                b2 = b2 - lr * gb2
            else:
                gw1 = xb.T @ dz + cfg.l2 * w1
                gb1 = dz.sum(axis=0)
            w1 = w1 - lr * gw1
            b1 = b1 - lr * gb1
        logits, _ = _forward(x, w1, b1, w2, b2)
        probs = kernels.softmax(logits)
        if w_values is None:
            losses = kernels.cce_loss(probs, y)
        else:
            losses = kernels.wcce_loss(w_values[y], probs)
        mean_loss = float(losses.mean())
        if not np.isfinite(mean_loss):
            raise ValidationError("divergence", f"non-finite training loss at epoch {epoch}")
        trace.append(mean_loss)

    model = Model(data.class_names, h, w1, b1, w2, b2)
    return TrainResult(model=model, loss_trace=tuple(trace))


def predict_proba(model: Model, features) -> np.ndarray:
    """Class probabilities for a (m, d) feature matrix."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ValidationError(
            "dimension-mismatch", f"features shape {x.shape} incompatible with d={model.n_features}"
        )
    logits, _ = _forward(x, model.w1, model.b1, model.w2, model.b2)
    return kernels.softmax(logits)


def predict(model: Model, features) -> np.ndarray:
    """Probability vector for a single feature vector."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1 or x.size != model.n_features:
        raise ValidationError(
            "dimension-mismatch", f"feature vector of size {x.size}, model expects {model.n_features}"
        )
    return predict_proba(model, x[None, :])[0]


def confusion(model: Model, data: Dataset) -> np.ndarray:
    """Counts[i, j] = instances of true class i predicted as j.

    Argmax ties resolve to the lowest class index.
    """
    if len(model.class_names) != len(data.class_names):
        raise ValidationError("class-mismatch", "model and dataset class counts differ")
    probs = predict_proba(model, data.features)
    preds = np.argmax(probs, axis=1)
    n = len(data.class_names)
    counts = np.zeros((n, n), dtype=np.int64)
    np.add.at(counts, (data.labels, preds), 1)
    return counts


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def dataset_to_csv(data: Dataset) -> str:
    """Serialize as 'f_0..f_{d-1},label' rows (class names are not stored)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    d = data.n_features
    writer.writerow([f"f_{i}" for i in range(d)] + ["label"])
    for row, label in zip(data.features, data.labels):
        writer.writerow([FLOAT_FMT.format(v) for v in row] + [int(label)])
    return out.getvalue()


def parse_dataset_csv(text: str, class_names=None) -> Dataset:
    """Inverse of :func:`dataset_to_csv`; names default to class_0..class_{k}."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ValidationError("empty-input", "dataset file is empty") from None
    d = len(header) - 1
    if d < 1 or header != [f"f_{i}" for i in range(d)] + ["label"]:
        raise ValidationError("malformed-line", "expected header 'f_0..f_{d-1},label'", line=1)
    features, labels = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != d + 1:
            raise ValidationError(
                "malformed-line", f"expected {d + 1} fields, got {len(row)}", line=lineno
            )
        try:
            features.append([float(v) for v in row[:-1]])
            labels.append(int(row[-1]))
        except ValueError:
            raise ValidationError("malformed-line", f"bad number in {row!r}", line=lineno) from None
    if not features:
        raise ValidationError("empty-input", "dataset has no rows")
    labels_arr = np.asarray(labels, dtype=np.int64)
    if class_names is None:
        class_names = tuple(f"class_{i}" for i in range(int(labels_arr.max()) + 1))
    return Dataset(np.asarray(features), labels_arr, tuple(class_names))


def model_to_text(model: Model) -> str:
    """Versioned flat-text serialization: dimensions, names, then parameters."""
    lines = [f"{MODEL_FORMAT} {MODEL_VERSION}"]
    n = len(model.class_names)
    lines.append(f"{model.n_features} {model.hidden_units} {n}")
    lines.extend(model.class_names)
    arrays = [("w1", model.w1), ("b1", model.b1)]
    if model.w2 is not None:
        arrays += [("w2", model.w2), ("b2", model.b2)]
    for name, arr in arrays:
        flat = np.asarray(arr, dtype=np.float64).ravel()
        lines.append(f"{name} {' '.join(str(dim) for dim in np.shape(arr))}")
        lines.append(" ".join(f"{v:.17g}" for v in flat))
    return "\n".join(lines) + "\n"


def parse_model_text(text: str) -> Model:
    """Inverse of :func:`model_to_text`."""
    lines = [ln for ln in text.splitlines()]
    if not lines or not lines[0].startswith(MODEL_FORMAT):
        raise ValidationError("malformed-line", f"not a {MODEL_FORMAT} file", line=1)
    version = lines[0].split()[-1]
    if version != str(MODEL_VERSION):
        raise ValidationError("unsupported-version", f"model format version {version}")
    try:
        d, h, n = (int(v) for v in lines[1].split())
        names = tuple(lines[2 : 2 + n])
        pos = 2 + n
        arrays = {}
        while pos < len(lines) and lines[pos].strip():
            head = lines[pos].split()
            shape = tuple(int(v) for v in head[1:])
            values = np.array(lines[pos + 1].split(), dtype=np.float64)
            arrays[head[0]] = values.reshape(shape)
            pos += 2
        if h > 0:
            return Model(names, h, arrays["w1"], arrays["b1"], arrays["w2"], arrays["b2"])
        return Model(names, 0, arrays["w1"], arrays["b1"])
    except (ValueError, KeyError, IndexError) as exc:
        raise ValidationError("malformed-line", f"bad model file: {exc}") from None


def predictions_to_csv(instance_ids, true_classes, probs) -> str:
    """Serialize predictions as 'instance,true_class,p_0..p_{n-1}' rows."""
    probs = np.asarray(probs, dtype=np.float64)
    n = probs.shape[1]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["instance", "true_class"] + [f"p_{j}" for j in range(n)])
    for inst, true, row in zip(instance_ids, true_classes, probs):
        writer.writerow([inst, int(true)] + [FLOAT_FMT.format(v) for v in row])
    return out.getvalue()
