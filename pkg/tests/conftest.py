import numpy as np
import pytest

from rankloss import PredictionBatch


def pairwise_oracle(pos, neg):
    """Pure-Python enumeration of the AUROC probability definition."""
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def random_pos_neg(seed, max_n=300, ties=False):
    """A random positive/negative score split; ties=True quantizes heavily."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_n + 1))
    n_pos = int(rng.integers(1, n))
    scores = rng.normal(size=n)
    if ties:
        scores = np.round(scores, 1)
    return scores[:n_pos], scores[n_pos:]


def random_batch(seed, n, n_classes, scale=1.0):
    """Random logits batch guaranteed to contain every class."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, n_classes, size=n)
    while len(np.unique(labels)) < n_classes:
        labels = rng.integers(0, n_classes, size=n)
    return PredictionBatch(scale * rng.normal(size=(n, n_classes)), labels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
