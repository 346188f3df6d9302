"""Exact (non-differentiable) AUROC computation.

AUROC is computed here as a probability: the chance that a uniformly chosen
positive sample scores higher than a uniformly chosen negative one, with
tied scores counting one half. Two routes produce the same number:

* ``auroc_pairwise`` enumerates every (positive, negative) pair and applies
  the unit step to the score difference. O(n_pos * n_neg); this is the slow
  ground truth the fast path is held to.
* ``auroc_rank_scores`` / ``auroc_rank`` use the rank-sum identity with
  midranks for ties. O(n log n); prefer it beyond ~10^4 samples.

Both routes reduce to the same exact pair-win count (ties contribute 0.5,
and all intermediate sums are exact in float64 for any realistic n), so they
agree bit for bit, not just within tolerance.

Scores may be logits or probabilities; the metric depends only on their
ordering, so no normalization is applied or checked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.stats import rankdata

from .errors import EmptyClassError

__all__ = [
    "PredictionBatch",
    "AurocValue",
    "MacroAuroc",
    "heaviside",
    "auroc_pairwise",
    "auroc_rank_scores",
    "auroc_rank",
    "auroc_multiclass_ovr",
    "monotone_check",
]


@dataclass(frozen=True)
class PredictionBatch:
    """Per-sample scores and true class labels, the unit metrics and losses consume.

    ``scores`` is an (n_samples, n_classes) float matrix with one column per
    class, holding raw logits unless ``probabilities`` is set. ``labels``
    holds integer class indices in [0, n_classes). Arrays are validated at
    construction and must not be mutated afterwards.
    """

    scores: np.ndarray
    labels: np.ndarray
    probabilities: bool = False

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        labels = np.asarray(self.labels)
        if scores.ndim != 2:
            raise ValueError(f"scores must be 2-D (n_samples, n_classes), got shape {scores.shape}")
        if scores.shape[1] < 2:
            raise ValueError(f"need at least 2 score columns, got {scores.shape[1]}")
        if labels.ndim != 1:
            raise ValueError(f"labels must be 1-D, got shape {labels.shape}")
        if labels.shape[0] != scores.shape[0]:
            raise ValueError(
                f"labels length {labels.shape[0]} does not match scores rows {scores.shape[0]}"
            )
        if labels.dtype.kind == "f":
            rounded = labels.astype(np.int64)
            if not np.array_equal(rounded, labels):
                raise ValueError("labels must be integers")
            labels = rounded
        elif labels.dtype.kind not in "iu":
            raise ValueError(f"labels must be integers, got dtype {labels.dtype}")
        labels = labels.astype(np.int64)
        if scores.shape[0] == 0:
            raise ValueError("batch must contain at least one sample")
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores must be finite (no NaN/inf)")
        if labels.min() < 0 or labels.max() >= scores.shape[1]:
            raise ValueError(
                f"labels must lie in [0, {scores.shape[1]}), got range "
                f"[{labels.min()}, {labels.max()}]"
            )
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.scores.shape[0]

    @property
    def n_classes(self) -> int:
        return self.scores.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True)
class AurocValue:
    """An AUROC in [0, 1] plus the positive/negative counts that produced it."""

    value: float
    n_pos: int
    n_neg: int

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"AUROC must lie in [0, 1], got {self.value}")
        if self.n_pos < 1 or self.n_neg < 1:
            raise ValueError("AUROC requires at least one positive and one negative")


@dataclass(frozen=True)
class MacroAuroc:
    """Macro (unweighted) mean of per-class one-vs-rest AUROCs.

    ``per_class[c]`` is None when class c was skipped in lenient mode.
    """

    value: float
    per_class: tuple[Optional[AurocValue], ...]


def heaviside(x: float) -> float:
    """Unit step: 1 for x > 0, 0.5 for x = 0, 0 for x < 0.

    This is the comparator that turns a score difference into a pair win;
    the half at zero is what makes ties count 0.5.
    """
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"heaviside requires finite input, got {x}")
    if x > 0.0:
        return 1.0
    if x == 0.0:
        return 0.5
    return 0.0


def _as_score_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite (no NaN/inf)")
    return arr


def _auc_from_win_sum(win_sum: float, n_pos: int, n_neg: int) -> float:
    # Swapping the positive/negative roles swaps win_sum with loss_sum, and
    # the two AUROCs must be exact float complements. A plain win_sum /
    # n_pairs division cannot promise that (1 - fl(s/m) may differ from
    # fl((m-s)/m) by one ulp), so both sides are derived from one division:
    # big = 1 - q rounds once, and small = 1 - big is exact because big lies
    # in [0.5, 1], making the pair closed under 1 - x.
    n_pairs = float(n_pos) * float(n_neg)
    loss_sum = n_pairs - win_sum  # exact: both are half-integer-valued floats
    q = min(win_sum, loss_sum) / n_pairs
    big = 1.0 - q
    small = 1.0 - big
    return small if win_sum <= loss_sum else big


def auroc_pairwise(pos_scores, neg_scores) -> AurocValue:
    """AUROC by full pair enumeration: mean of heaviside(pos - neg) over all pairs.

    The definitional route. Quadratic in the class sizes; kept as the oracle
    the rank-based route is verified against.
    """
    pos = _as_score_vector(pos_scores, "pos_scores")
    neg = _as_score_vector(neg_scores, "neg_scores")
    if pos.size == 0:
        raise EmptyClassError("no positive samples: AUROC is undefined", class_index=1)
    if neg.size == 0:
        raise EmptyClassError("no negative samples: AUROC is undefined", class_index=0)
    diffs = pos[:, None] - neg[None, :]
    win_sum = float(np.heaviside(diffs, 0.5).sum())
    value = _auc_from_win_sum(win_sum, pos.size, neg.size)
    return AurocValue(value=value, n_pos=pos.size, n_neg=neg.size)


def auroc_rank_scores(pos_scores, neg_scores) -> AurocValue:
    """AUROC via the rank-sum identity with midranks for ties.

    Equivalent to ``auroc_pairwise`` on the same inputs (midranks make tied
    pairs count 0.5), at O(n log n) cost.
    """
    pos = _as_score_vector(pos_scores, "pos_scores")
    neg = _as_score_vector(neg_scores, "neg_scores")
    if pos.size == 0:
        raise EmptyClassError("no positive samples: AUROC is undefined", class_index=1)
    if neg.size == 0:
        raise EmptyClassError("no negative samples: AUROC is undefined", class_index=0)
    ranks = rankdata(np.concatenate([pos, neg]), method="average")
    pos_rank_sum = float(ranks[: pos.size].sum())
    win_sum = pos_rank_sum - pos.size * (pos.size + 1) / 2.0
    value = _auc_from_win_sum(win_sum, pos.size, neg.size)
    return AurocValue(value=value, n_pos=pos.size, n_neg=neg.size)


def auroc_rank(batch: PredictionBatch, positive_class: int) -> AurocValue:
    """Binary AUROC of a two-class batch, scoring by the positive class column."""
    if batch.n_classes != 2:
        raise ValueError(f"auroc_rank requires a binary batch, got {batch.n_classes} classes")
    if positive_class not in (0, 1):
        raise ValueError(f"positive_class must be 0 or 1, got {positive_class}")
    col = batch.scores[:, positive_class]
    pos_mask = batch.labels == positive_class
    return auroc_rank_scores(col[pos_mask], col[~pos_mask])


def auroc_multiclass_ovr(batch: PredictionBatch, lenient: bool = False) -> MacroAuroc:
    """One-vs-rest AUROC per class, macro-averaged.

    For each class c the class-c score column ranks class-c samples
    (positives) against everything else (negatives). The macro value is the
    unweighted mean over classes.

    In strict mode (default) a class with no samples raises
    ``EmptyClassError``. In lenient mode such classes are skipped: their
    ``per_class`` entry is None and the mean is renormalized over the
    classes that remain.
    """
    counts = batch.class_counts()
    n = batch.n_samples
    per_class: list[Optional[AurocValue]] = []
    values = []
    for c in range(batch.n_classes):
        if counts[c] == 0 or counts[c] == n:
            if not lenient:
                which = "no" if counts[c] == 0 else "only"
                raise EmptyClassError(
                    f"class {c} has {which} samples: one-vs-rest AUROC is undefined",
                    class_index=c,
                )
            per_class.append(None)
            continue
        col = batch.scores[:, c]
        pos_mask = batch.labels == c
        result = auroc_rank_scores(col[pos_mask], col[~pos_mask])
        per_class.append(result)
        values.append(result.value)
    if not values:
        raise EmptyClassError("no class has both positives and negatives", class_index=None)
    macro = float(np.mean(values))
    return MacroAuroc(value=macro, per_class=tuple(per_class))


def monotone_check(
    batch: PredictionBatch,
    transform: Callable[[np.ndarray], np.ndarray],
    tol: float = 1e-12,
) -> bool:
    """True iff AUROC is unchanged (within ``tol``) after transforming the scores.

    A strictly increasing transform preserves every pairwise ordering, so
    AUROC must not move; a decreasing one flips it to its complement and the
    check reports False. Compares the macro value and every per-class value.
    """
    transformed = np.asarray(transform(batch.scores), dtype=np.float64)
    if transformed.shape != batch.scores.shape:
        raise ValueError(
            f"transform changed the score shape: {batch.scores.shape} -> {transformed.shape}"
        )
    before = auroc_multiclass_ovr(batch)
    after = auroc_multiclass_ovr(
        PredictionBatch(transformed, batch.labels, probabilities=False)
    )
    if abs(before.value - after.value) > tol:
        return False
    for b, a in zip(before.per_class, after.per_class):
        if abs(b.value - a.value) > tol:
            return False
    return True
