"""
Shared pytest fixtures for the nmfbench test suite.

The results store is pointed at an in-memory database before any nmfbench
module is imported, so running the tests never creates nmfbench.db.
"""

import os

os.environ.setdefault("NMFBENCH_DATABASE_URL", "sqlite://")

import numpy as np
import pytest

from nmfbench.datasets import synth_dataset


@pytest.fixture
def rng():
    """Seeded generator for test fixtures."""
    return np.random.default_rng(12345)


@pytest.fixture
def positive_matrix(rng):
    """Factory for strictly positive random matrices."""
    def make(m, n):
        return rng.random((m, n)) + 0.1
    return make


@pytest.fixture
def noiseless_synth():
    """Factory for noiseless synthetic datasets X = W* H*."""
    def make(m=15, n=12, r=4, seed=0):
        return synth_dataset(m, n, r, density=1.0, noise=0.0, seed=seed)
    return make
