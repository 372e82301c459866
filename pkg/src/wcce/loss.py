"""Weighted categorical cross-entropy, its gradient, and swap/threshold checks.

The loss for a sample of true class i with weight row w and predicted
distribution p is ``-sum_j w[j] * log(clip(p[j]))``. With a one-hot weight row
this is exactly the vanilla categorical cross-entropy; a soft row spreads
credit onto misclassifications a person would accept. Probabilities are
clipped at ``PROB_CLIP`` before the log and zero weights contribute exactly 0,
so the loss is finite for every valid input.

Two executable diagnostics accompany the loss:

* ``lemma1_check`` - swapping the probability mass between a higher-weighted
  and a lower-weighted wrong class changes the loss by
  ``(log l - log h) * (w_hi - w_lo)``, which is negative whenever the
  higher-weighted class holds the larger probability; keeping credible
  mistakes more probable is always cheaper.
* ``lemma2_check`` - moving ``eps`` of confidence from class a to class b
  raises the loss exactly when ``w[a] > tau * w[b]`` for the confidence-shift
  threshold ``tau`` reported in the result (see ``lemma2_check`` for its
  orientation relative to :func:`lemma2_tau`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import PROB_CLIP, kernels
from .errors import ValidationError

PROB_SUM_TOL = 1e-9
BOUNDARY_TOL = 1e-9


def as_prob_vector(values, *, what: str = "probs") -> np.ndarray:
    """Validate and return a probability vector (entries in [0,1], sum 1)."""
    p = np.asarray(values, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError("invariant-violation", f"{what} must be a non-empty vector")
    if not np.all(np.isfinite(p)):
        raise ValidationError("invariant-violation", f"{what} has non-finite entries")
    if p.min() < -1e-12 or p.max() > 1.0 + 1e-12:
        raise ValidationError("invariant-violation", f"{what} entries outside [0, 1]")
    total = float(p.sum())
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ValidationError("invariant-violation", f"{what} sums to {total!r}, not 1")
    return p


def _as_weight_row(values, *, n: int | None = None) -> np.ndarray:
    w = np.asarray(values, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValidationError("negative-weight", "weight row must be a non-empty vector")
    if not np.all(np.isfinite(w)):
        raise ValidationError("negative-weight", "weight row has non-finite entries")
    if w.min() < 0:
        raise ValidationError("negative-weight", f"weight {w.min()} < 0")
    if n is not None and w.size != n:
        raise ValidationError("shape-mismatch", f"weight row has {w.size} entries, expected {n}")
    return w


def softmax(logits) -> np.ndarray:
    """Stable softmax of a 1-D logit vector (row maximum subtracted first)."""
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1 or z.size == 0:
        raise ValidationError("invariant-violation", "logits must be a non-empty vector")
    if not np.all(np.isfinite(z)):
        raise ValidationError("invariant-violation", "logits must be finite")
    return kernels.softmax(z[None, :])[0]


def weighted_cce(w_row, probs) -> float:
    """Loss of one prediction against one weight row (see module docstring)."""
    p = as_prob_vector(probs)
    w = _as_weight_row(w_row, n=p.size)
    return float(kernels.wcce_loss(w[None, :], p[None, :])[0])


def weighted_cce_grad(w_row, logits) -> np.ndarray:
    """Gradient of ``weighted_cce(w, softmax(z))`` wrt z: ``p*sum(w) - w``.

    For a row-normalized w this reduces to ``p - w``, the soft-target form of
    the usual softmax cross-entropy gradient.
    """
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1 or not np.all(np.isfinite(z)):
        raise ValidationError("invariant-violation", "logits must be a finite vector")
    w = _as_weight_row(w_row, n=z.size)
    p = kernels.softmax(z[None, :])
    return kernels.wcce_grad(w[None, :], p)[0]


def categorical_cce(probs, true_class: int) -> float:
    """Vanilla categorical cross-entropy, hard-coded (no weight row)."""
    p = as_prob_vector(probs)
    if not 0 <= true_class < p.size:
        raise ValidationError("index-out-of-range", f"class {true_class} outside 0..{p.size - 1}")
    return float(kernels.cce_loss(p[None, :], np.array([true_class], dtype=np.int64))[0])


# ---------------------------------------------------------------------------
# Probability-swap check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SwapCheckResult:
    """Losses of the two-way swap and their (factored-form) difference."""

    loss_explicable: float
    loss_inexplicable: float
    difference: float


def lemma1_check(w_ce: float, w_ci: float, h: float, l: float) -> SwapCheckResult:
    """Compare the loss before/after swapping probabilities h and l.

    ``loss_explicable`` puts the larger probability h on the class with weight
    ``w_ce``; ``loss_inexplicable`` swaps h and l. ``difference`` is their gap
    in the factored form ``(log l - log h) * (w_ce - w_ci)``, which is
    strictly negative whenever ``w_ce > w_ci``: the swap toward the
    lower-weighted class always costs more.
    """
    if not (0.0 < l < h < 1.0):
        raise ValidationError("domain-violation", f"need 0 < l < h < 1, got l={l}, h={h}")
    if not (math.isfinite(w_ce) and math.isfinite(w_ci)) or w_ce < 0 or w_ci < 0:
        raise ValidationError("domain-violation", "weights must be finite and >= 0")
    log_h, log_l = math.log(h), math.log(l)
    loss_explicable = -(w_ce * log_h + w_ci * log_l)
    loss_inexplicable = -(w_ce * log_l + w_ci * log_h)
    difference = (log_l - log_h) * (w_ce - w_ci)
    return SwapCheckResult(loss_explicable, loss_inexplicable, difference)


# ---------------------------------------------------------------------------
# Confidence-shift threshold check
# ---------------------------------------------------------------------------


def lemma2_tau(p_a: float, p_b: float, epsilon: float) -> float:
    """Ratio of relative log-bumps: log((p_a+eps)/p_a) / log((p_b+eps)/p_b).

    Exceeds 1 whenever p_a < p_b (a fixed increment lifts a small probability
    by a larger relative amount) and tends to p_b/p_a as eps tends to 0.
    """
    if not (p_a > 0 and p_b > 0 and epsilon > 0):
        raise ValidationError(
            "domain-violation", f"need p_a, p_b, epsilon > 0, got {p_a}, {p_b}, {epsilon}"
        )
    if p_a + epsilon > 1.0 + 1e-12 or p_b + epsilon > 1.0 + 1e-12:
        raise ValidationError(
            "domain-violation", f"p+epsilon exceeds 1 for p_a={p_a}, p_b={p_b}, eps={epsilon}"
        )
    return math.log((p_a + epsilon) / p_a) / math.log((p_b + epsilon) / p_b)


@dataclass(frozen=True)
class LemmaTrial:
    """One confidence-shift scenario over a full class distribution.

    ``base_probs`` is the lower-confidence split: class_a holds its larger
    share (p_a + epsilon) and class_b its smaller share (p_b). The compared
    scenario moves epsilon from class_a to class_b; all other classes keep
    their probability, so their loss terms cancel in the comparison.
    """

    weight_row: np.ndarray
    base_probs: np.ndarray
    class_a: int
    class_b: int
    epsilon: float

    def __post_init__(self):
        w = _as_weight_row(self.weight_row)
        q = as_prob_vector(self.base_probs, what="base_probs")
        if w.size != q.size:
            raise ValidationError(
                "invariant-violation", f"weight row size {w.size} != probs size {q.size}"
            )
        a, b = self.class_a, self.class_b
        for idx in (a, b):
            if not 0 <= idx < q.size:
                raise ValidationError(
                    "invariant-violation", f"class index {idx} outside 0..{q.size - 1}"
                )
        if a == b:
            raise ValidationError("invariant-violation", "class_a and class_b must differ")
        if not self.epsilon > 0:
            raise ValidationError("invariant-violation", f"epsilon {self.epsilon} must be > 0")
        if q[b] + self.epsilon > 1.0 + 1e-12:
            raise ValidationError(
                "invariant-violation", f"base_probs[class_b] + epsilon = {q[b] + self.epsilon} > 1"
            )
        if not q[a] - self.epsilon > 0:
            raise ValidationError(
                "invariant-violation",
                f"class_a must keep positive probability after the shift "
                f"(base {q[a]!r}, epsilon {self.epsilon!r})",
            )
        w.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "weight_row", w)
        object.__setattr__(self, "base_probs", q)


@dataclass(frozen=True)
class ShiftCheckResult:
    """Outcome of one confidence-shift trial.

    ``penalized`` is True when the higher-confidence-on-b scenario has the
    larger loss. ``tau`` is the exact decision threshold for this trial and
    ``margin`` is ``weight_row[class_a] - tau * weight_row[class_b]``: off the
    ``boundary`` band, ``penalized`` holds iff ``margin > 0``.
    """

    loss_low: float
    loss_high: float
    penalized: bool
    tau: float
    boundary: bool
    margin: float


def lemma2_check(trial: LemmaTrial, *, boundary_tol: float = BOUNDARY_TOL) -> ShiftCheckResult:
    """Evaluate both scenarios of a trial and the weight-threshold condition.

    ``loss_low`` keeps the lower confidence on class_b (base_probs as given);
    ``loss_high`` moves epsilon of probability from class_a to class_b. The
    reported ``tau`` is ``lemma2_tau(p_b, p_a, epsilon)`` - the receiving
    class's relative log-bump over the donating class's - which is the exact
    threshold: the shift is penalized iff ``w[a] > tau * w[b]``. Note the
    argument order: ``lemma2_tau(p_a, p_b, epsilon)`` itself states the same
    condition from the donor's perspective, where it is a sufficient bound
    (its value is >= the exact threshold whenever p_a < p_b).
    """
    w, q = trial.weight_row, trial.base_probs
    a, b, eps = trial.class_a, trial.class_b, trial.epsilon
    high = q.copy()
    high[a] = q[a] - eps
    high[b] = q[b] + eps
    loss_low = float(kernels.wcce_loss(w[None, :], q[None, :])[0])
    loss_high = float(kernels.wcce_loss(w[None, :], high[None, :])[0])
    p_a = q[a] - eps
    p_b = q[b]
    tau = lemma2_tau(p_b, p_a, eps)
    margin = float(w[a] - tau * w[b])
    return ShiftCheckResult(
        loss_low=loss_low,
        loss_high=loss_high,
        penalized=loss_high > loss_low,
        tau=tau,
        boundary=abs(margin) <= boundary_tol,
        margin=margin,
    )


# ---------------------------------------------------------------------------
# Randomized verification suites
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SwapSuiteResult:
    trials: int
    failures: int
    max_factored_error: float

    @property
    def passes(self) -> int:
        return self.trials - self.failures


@dataclass(frozen=True)
class ShiftSuiteResult:
    trials: int
    failures: int
    boundary: int

    @property
    def passes(self) -> int:
        return self.trials - self.failures


def lemma1_suite(trials: int = 10_000, seed: int = 0) -> SwapSuiteResult:
    """Random probability-swap trials: difference < 0 and factored == direct.

    Samples w_ce > w_ci >= 0 and 0 < l < h < 1, then checks that the factored
    difference is strictly negative and agrees with the direct two-loss
    subtraction within 1e-12.
    """
    rng = np.random.default_rng(seed)
    w_ci = rng.uniform(0.0, 2.0, trials)
    w_ce = w_ci + rng.uniform(1e-6, 2.0, trials)
    lo = rng.uniform(1e-6, 1.0 - 1e-6, trials)
    hi = rng.uniform(1e-6, 1.0 - 1e-6, trials)
    l = np.minimum(lo, hi)
    h = np.maximum(lo, hi)
    # exact float ties are vanishingly rare; nudge them apart deterministically
    ties = l == h
    h[ties] = (1.0 + h[ties]) / 2.0
    log_l, log_h = np.log(l), np.log(h)
    loss_explicable = -(w_ce * log_h + w_ci * log_l)
    loss_inexplicable = -(w_ce * log_l + w_ci * log_h)
    direct = loss_explicable - loss_inexplicable
    factored = (log_l - log_h) * (w_ce - w_ci)
    errors = np.abs(direct - factored)
    ok = (factored < 0) & (errors <= 1e-12)
    return SwapSuiteResult(
        trials=trials,
        failures=int(np.count_nonzero(~ok)),
        max_factored_error=float(errors.max()) if trials else 0.0,
    )


def lemma2_suite(
    trials: int = 10_000,
    seed: int = 0,
    *,
    boundary_tol: float = BOUNDARY_TOL,
    max_classes: int = 8,
) -> ShiftSuiteResult:
    """Random confidence-shift trials: sign(loss gap) matches the threshold test.

    Each trial draws a class count in 2..max_classes, a full probability
    vector, a non-negative weight row, two distinct classes and a feasible
    epsilon, then compares the brute-force loss difference (full vectors, all
    class terms included) against the sign of ``w[a] - tau * w[b]``. Trials
    within ``boundary_tol`` of the threshold are counted separately.
    """
    rng = np.random.default_rng(seed)
    ns = rng.integers(2, max_classes + 1, trials)
    failures = 0
    boundary = 0
    for n in range(2, max_classes + 1):
        m = int(np.count_nonzero(ns == n))
        if m == 0:
            continue
        base = rng.dirichlet(np.ones(n), m)
        w = rng.uniform(0.0, 2.0, (m, n))
        a = rng.integers(0, n, m)
        b = (a + rng.integers(1, n, m)) % n
        rows = np.arange(m)
        base_a = base[rows, a]
        base_b = base[rows, b]
        eps = rng.uniform(0.05, 1.0, m) * 0.95 * np.minimum(base_a, 1.0 - base_b)
        high = base.copy()
        high[rows, a] = base_a - eps
        high[rows, b] = base_b + eps
        loss_low = kernels.wcce_loss(w, base)
        loss_high = kernels.wcce_loss(w, high)
        gap = loss_high - loss_low
        p_a = base_a - eps
        p_b = base_b
        tau = np.log((p_b + eps) / p_b) / np.log((p_a + eps) / p_a)
        margin = w[rows, a] - tau * w[rows, b]
        on_boundary = np.abs(margin) <= boundary_tol
        agree = (gap > 0) == (margin > 0)
        failures += int(np.count_nonzero(~(agree | on_boundary)))
        boundary += int(np.count_nonzero(on_boundary))
    return ShiftSuiteResult(trials=trials, failures=failures, boundary=boundary)
