"""Shared fixtures: small clustered sets sized for fast unit runs."""

import numpy as np
import pytest

from annkit import EmbeddingSet, gen_synthetic


@pytest.fixture(scope="session")
def tiny_set() -> EmbeddingSet:
    """3 classes x 20 points in 8 dims; small enough for brute-force oracles."""
    return gen_synthetic(n_classes=3, per_class=20, dim=8, spread=0.05, seed=3)


@pytest.fixture(scope="session")
def small_set() -> EmbeddingSet:
    """6 classes x 50 points in 16 dims; the workhorse for index tests."""
    return gen_synthetic(n_classes=6, per_class=50, dim=16, spread=0.05, seed=5)


@pytest.fixture(scope="session")
def random_set() -> EmbeddingSet:
    """Unstructured vectors (no cluster geometry), ids offset from row numbers."""
    rng = np.random.default_rng(17)
    n, dim = 120, 12
    return EmbeddingSet(
        ids=np.arange(1000, 1000 + n, dtype=np.uint64),
        labels=rng.integers(0, 4, size=n).astype(np.uint32),
        vectors=rng.standard_normal((n, dim)).astype(np.float32),
    )


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(0)
