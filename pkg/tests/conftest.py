from __future__ import annotations

import numpy as np
import pytest

import thetapi.intlinalg


@pytest.fixture(autouse=True, scope="session")
def _enable_snf_self_checks():
    """Run every Smith-normal-form call under its internal contract checks."""
    old = thetapi.intlinalg.CHECK_SNF
    thetapi.intlinalg.CHECK_SNF = True
    yield
    thetapi.intlinalg.CHECK_SNF = old


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def random_cloud(rng, n: int, dim: int = 2, scale: float = 1.0):
    from thetapi.spaces import FiniteMetricSpace

    pts = rng.uniform(0.0, scale, (n, dim))
    return FiniteMetricSpace.from_points(pts)
