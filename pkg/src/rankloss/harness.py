"""Monte Carlo evaluation: repeated random splits, paired arm training,
confidence intervals, and a two-sample t-test.

Each trial draws one 60/20/20 (by default) train/validation/test split,
trains every arm on that split from a shared model initialization, and
records each arm's test AUROC. Trials are embarrassingly parallel; all
randomness derives from (base_seed, trial), so the aggregate report is
byte-identical regardless of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import repeat
from typing import Optional, Sequence

import numpy as np
from scipy.special import stdtr

from .data import Dataset
from .errors import DegenerateVarianceError, RanklossError, TooSmallError, TrialError
from .losses import DEFAULT_SURROGATE, LOSS_KINDS, SurrogateParams, softmax
from .metrics import PredictionBatch, auroc_multiclass_ovr, auroc_rank
from .network import TrainConfig, forward, init_model, train

__all__ = [
    "SplitSpec",
    "ArmConfig",
    "ExperimentConfig",
    "TrialSeeds",
    "ArmResult",
    "Comparison",
    "AggregateReport",
    "trial_seeds",
    "monte_carlo_split",
    "run_trial",
    "run_experiment",
    "mean_ci",
    "t_test",
]

Z_95 = 1.96


@dataclass(frozen=True)
class SplitSpec:
    """Monte Carlo splitting parameters: ratios, stratification, repeat count, seed."""

    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2)
    stratified: bool = True
    n_repeats: int = 100
    base_seed: int = 0

    def __post_init__(self):
        ratios = tuple(float(r) for r in self.ratios)
        if len(ratios) != 3:
            raise ValueError(f"ratios must be (train, val, test), got {ratios}")
        if any(r <= 0 for r in ratios):
            raise ValueError(f"ratios must be positive, got {ratios}")
        if abs(sum(ratios) - 1.0) > 1e-9:
            raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")
        if self.n_repeats < 1:
            raise ValueError(f"n_repeats must be at least 1, got {self.n_repeats}")
        if self.base_seed < 0:
            raise ValueError(f"base_seed must be nonnegative, got {self.base_seed}")
        object.__setattr__(self, "ratios", ratios)


@dataclass(frozen=True)
class ArmConfig:
    """One experiment arm: a named loss/batch-size/optimizer setting."""

    name: str
    loss_kind: str
    batch_size: int
    learning_rate: float = 0.1
    max_epochs: int = 40
    surrogate: SurrogateParams = DEFAULT_SURROGATE

    def __post_init__(self):
        if not self.name:
            raise ValueError("arm name must be non-empty")
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"loss_kind must be one of {LOSS_KINDS}, got {self.loss_kind!r}")
        if self.batch_size < 2:
            raise ValueError(f"batch_size must be at least 2, got {self.batch_size}")
        if not np.isfinite(self.learning_rate) or self.learning_rate < 0:
            raise ValueError(f"learning_rate must be nonnegative, got {self.learning_rate}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be at least 1, got {self.max_epochs}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Arms, split protocol, and the shared model shape for one experiment."""

    arms: tuple[ArmConfig, ...]
    split: SplitSpec
    hidden_dims: tuple[int, ...] = (16,)

    def __post_init__(self):
        arms = tuple(self.arms)
        if not arms:
            raise ValueError("at least one arm is required")
        names = [a.name for a in arms]
        if len(set(names)) != len(names):
            raise ValueError(f"arm names must be unique, got {names}")
        hidden = tuple(int(d) for d in self.hidden_dims)
        if len(hidden) > 2:
            raise ValueError(f"at most 2 hidden layers are supported, got {hidden}")
        if any(d < 1 for d in hidden):
            raise ValueError(f"hidden dims must be positive, got {hidden}")
        object.__setattr__(self, "arms", arms)
        object.__setattr__(self, "hidden_dims", hidden)


@dataclass(frozen=True)
class TrialSeeds:
    """The three per-trial random streams, derived from (base_seed, trial)."""

    split: int
    init: int
    shuffle: int


def trial_seeds(base_seed: int, trial: int) -> TrialSeeds:
    state = np.random.SeedSequence([int(base_seed), int(trial)]).generate_state(3)
    return TrialSeeds(split=int(state[0]), init=int(state[1]), shuffle=int(state[2]))


def monte_carlo_split(
    n: int,
    labels,
    spec: SplitSpec,
    trial: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One random (train, val, test) partition of range(n), seeded by (base_seed, trial).

    Sizes follow floor(ratio * n) for train and validation with the
    remainder as test; stratified mode applies that rule inside each class
    and merges, raising ``TooSmallError`` if any partition would receive no
    samples of some class.
    """
    if n < 5:
        raise ValueError(f"need at least 5 samples to split, got {n}")
    rng = np.random.default_rng(trial_seeds(spec.base_seed, trial).split)
    r_train, r_val, _ = spec.ratios

    def cut(indices: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        m = indices.size
        n_train = int(math.floor(r_train * m))
        n_val = int(math.floor(r_val * m))
        return indices[:n_train], indices[n_train : n_train + n_val], indices[n_train + n_val :]

    if not spec.stratified:
        train_idx, val_idx, test_idx = cut(rng.permutation(n))
    else:
        y = np.asarray(labels)
        if y.shape != (n,):
            raise ValueError(f"labels must have shape ({n},), got {y.shape}")
        parts: list[list[np.ndarray]] = [[], [], []]
        for c in np.unique(y):
            tr, va, te = cut(rng.permutation(np.flatnonzero(y == c)))
            for name, part, chunk in zip(("train", "validation", "test"), parts, (tr, va, te)):
                if chunk.size == 0:
                    raise TooSmallError(
                        f"class {c}: the {name} partition would receive no samples "
                        f"(class count {np.count_nonzero(y == c)})"
                    )
                part.append(chunk)
        train_idx = np.concatenate(parts[0])
        val_idx = np.concatenate(parts[1])
        test_idx = np.concatenate(parts[2])
    return np.sort(train_idx), np.sort(val_idx), np.sort(test_idx)


def _test_auroc(model, features, labels, n_classes: int) -> float:
    probs = softmax(forward(model, features))
    batch = PredictionBatch(probs, labels, probabilities=True)
    if n_classes == 2:
        return auroc_rank(batch, positive_class=1).value
    return auroc_multiclass_ovr(batch).value


def run_trial(dataset: Dataset, config: ExperimentConfig, trial: int) -> list[float]:
    """Run one trial: split once, train every arm on it, return test AUROCs.

    All arms share the split and the model initialization seed, so arm
    differences are down to the training configuration alone. Errors are
    re-raised as ``TrialError`` carrying the trial index.
    """
    try:
        train_idx, val_idx, test_idx = monte_carlo_split(
            dataset.n_samples, dataset.labels, config.split, trial
        )
        seeds = trial_seeds(config.split.base_seed, trial)
        dims = (dataset.n_features, *config.hidden_dims, dataset.n_classes)
        model0 = init_model(dims, seeds.init)
        results = []
        for arm in config.arms:
            train_cfg = TrainConfig(
                batch_size=arm.batch_size,
                loss_kind=arm.loss_kind,
                max_epochs=arm.max_epochs,
                learning_rate=arm.learning_rate,
                surrogate=arm.surrogate,
                shuffle_each_epoch=True,
                seed=seeds.shuffle,
            )
            trained, _ = train(
                model0,
                dataset.features[train_idx],
                dataset.labels[train_idx],
                dataset.features[val_idx],
                dataset.labels[val_idx],
                train_cfg,
            )
            results.append(
                _test_auroc(
                    trained,
                    dataset.features[test_idx],
                    dataset.labels[test_idx],
                    dataset.n_classes,
                )
            )
        return results
    except RanklossError as exc:
        raise TrialError(f"trial {trial}: {type(exc).__name__}: {exc}", trial=trial) from exc


def mean_ci(values) -> tuple[float, float, float]:
    """Mean and normal-approximation 95% CI: mean +- 1.96 * std(ddof=1) / sqrt(n)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError(f"need at least 2 values for a CI, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("values must be finite")
    mean = float(arr.mean())
    half = Z_95 * float(arr.std(ddof=1)) / math.sqrt(arr.size)
    return mean, mean - half, mean + half


def t_test(a, b) -> tuple[float, float]:
    """Two-sample, two-sided, equal-variance Student's t-test.

    Returns (t, p) with p from the t CDF at n_a + n_b - 2 degrees of
    freedom. If the pooled variance is zero: equal means raise
    ``DegenerateVarianceError`` (the statistic is 0/0); unequal means return
    (+-inf, 0.0), the limit of a vanishing-variance difference.
    """
    xa = np.asarray(a, dtype=np.float64)
    xb = np.asarray(b, dtype=np.float64)
    if xa.size < 2 or xb.size < 2:
        raise ValueError("each sample needs at least 2 values")
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(xb))):
        raise ValueError("samples must be finite")
    n_a, n_b = xa.size, xb.size
    df = n_a + n_b - 2
    pooled = ((n_a - 1) * xa.var(ddof=1) + (n_b - 1) * xb.var(ddof=1)) / df
    diff = float(xa.mean() - xb.mean())
    if pooled == 0.0:
        if diff == 0.0:
            raise DegenerateVarianceError(
                "both samples are constant and equal; t is undefined"
            )
        return (math.inf if diff > 0 else -math.inf), 0.0
    t = diff / math.sqrt(pooled * (1.0 / n_a + 1.0 / n_b))
    p = 2.0 * float(stdtr(df, -abs(t)))
    return t, p


@dataclass(frozen=True)
class ArmResult:
    """Per-arm trial outcomes and their summary statistics."""

    name: str
    aurocs: tuple[float, ...]
    mean: float
    std: Optional[float]
    ci: Optional[tuple[float, float]]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "aurocs": list(self.aurocs),
            "mean": self.mean,
            "std": self.std,
            "ci": list(self.ci) if self.ci is not None else None,
        }


@dataclass(frozen=True)
class Comparison:
    """t-test of one arm against the reference arm; None fields when undefined."""

    arm_a: str
    arm_b: str
    t: Optional[float]
    p: Optional[float]

    def to_dict(self) -> dict:
        return {"arm_a": self.arm_a, "arm_b": self.arm_b, "t": self.t, "p": self.p}


@dataclass(frozen=True)
class AggregateReport:
    """Everything the experiment produced, ordered by trial index."""

    arms: tuple[ArmResult, ...]
    comparisons: tuple[Comparison, ...]
    n_repeats: int
    trial_seeds: tuple[TrialSeeds, ...]

    def to_dict(self) -> dict:
        return {
            "arms": [a.to_dict() for a in self.arms],
            "comparisons": [c.to_dict() for c in self.comparisons],
            "n_repeats": self.n_repeats,
            "trial_seeds": [
                {"trial": i, "split": s.split, "init": s.init, "shuffle": s.shuffle}
                for i, s in enumerate(self.trial_seeds)
            ],
        }


def _validate_arms(dataset: Dataset, config: ExperimentConfig) -> None:
    for arm in config.arms:
        if arm.loss_kind == "auc_binary" and dataset.n_classes != 2:
            raise ValueError(
                f"arm {arm.name!r} uses the binary ranking loss but the dataset "
                f"has {dataset.n_classes} classes"
            )


def run_experiment(
    dataset: Dataset,
    config: ExperimentConfig,
    jobs: int = 1,
) -> AggregateReport:
    """Run all trials, then aggregate per-arm statistics and arm comparisons.

    With jobs > 1 trials run in worker processes; results are collected in
    trial order, so the report does not depend on the worker count.
    """
    _validate_arms(dataset, config)
    n_repeats = config.split.n_repeats
    trials = range(n_repeats)
    if jobs > 1 and n_repeats > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, n_repeats)) as pool:
            rows = list(pool.map(run_trial, repeat(dataset), repeat(config), trials))
    else:
        rows = [run_trial(dataset, config, t) for t in trials]

    matrix = np.asarray(rows, dtype=np.float64)  # (n_repeats, n_arms)
    arm_results = []
    for j, arm in enumerate(config.arms):
        aurocs = tuple(float(v) for v in matrix[:, j])
        if n_repeats >= 2:
            mean, lo, hi = mean_ci(aurocs)
            std = float(np.std(aurocs, ddof=1))
            arm_results.append(ArmResult(arm.name, aurocs, mean, std, (lo, hi)))
        else:
            arm_results.append(ArmResult(arm.name, aurocs, float(aurocs[0]), None, None))

    comparisons = []
    reference = arm_results[0]
    for other in arm_results[1:]:
        if n_repeats >= 2:
            try:
                t, p = t_test(reference.aurocs, other.aurocs)
            except DegenerateVarianceError:
                t, p = None, None
        else:
            t, p = None, None
        comparisons.append(Comparison(reference.name, other.name, t, p))

    seeds = tuple(trial_seeds(config.split.base_seed, t) for t in trials)
    return AggregateReport(
        arms=tuple(arm_results),
        comparisons=tuple(comparisons),
        n_repeats=n_repeats,
        trial_seeds=seeds,
    )
