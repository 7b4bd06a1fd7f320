"""Shared builders for small test datasets."""

from __future__ import annotations

import numpy as np
import pytest

from ppboot import LabeledDataset, RngStream, UnlabeledDataset


def make_pair(n=20, N=50, seed=0, pred_noise=0.5, d=1):
    """Gaussian labeled/unlabeled pair with noisy-but-informative predictions."""
    g = np.random.default_rng(seed)
    Xl = g.standard_normal((n, d))
    yl = Xl @ np.arange(1, d + 1) + g.standard_normal(n)
    fl = yl + pred_noise * g.standard_normal(n)
    Xu = g.standard_normal((N, d))
    yu = Xu @ np.arange(1, d + 1) + g.standard_normal(N)
    fu = yu + pred_noise * g.standard_normal(N)
    return LabeledDataset(Xl, yl, fl), UnlabeledDataset(Xu, fu)


def make_binary_pair(n=40, N=120, seed=0, flip=0.1):
    """Binary outcomes with binary predictions wrong with probability ``flip``."""
    g = np.random.default_rng(seed)
    Xl = g.standard_normal((n, 1))
    yl = (g.random(n) < 0.5).astype(float)
    fl = np.where(g.random(n) < flip, 1.0 - yl, yl)
    Xu = g.standard_normal((N, 1))
    yu = (g.random(N) < 0.5).astype(float)
    fu = np.where(g.random(N) < flip, 1.0 - yu, yu)
    return LabeledDataset(Xl, yl, fl), UnlabeledDataset(Xu, fu)


@pytest.fixture
def stream():
    return RngStream(42)
