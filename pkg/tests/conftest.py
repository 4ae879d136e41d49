"""Shared fixtures: the calibrated synthetic benchmark used across tests.

FIXTURE_DATA and fixture_config() define the reference synthetic problem:
three views of 150 instances in 3 clusters, each cluster spanning its own
low-dimensional subspace, with moderate feature noise.  The solver config
is the package default (fixed penalty, simplex-projected affinity rows),
with a 50-iteration cap.
"""

import warnings

import pytest

from uimc import MaskSpec, apply_mask, make_synthetic
from uimc.solver import SolverConfig

FIXTURE_DATA = dict(
    m=150,
    c=3,
    dims=(25, 20, 15),
    noise=0.1,
    separation=2.5,
    within_spread=2.5,
)


def fixture_config(**overrides):
    base = dict(seed=0, max_iters=50)
    base.update(overrides)
    return SolverConfig(**base)


@pytest.fixture(scope="session")
def synthetic_complete():
    return make_synthetic(seed=0, **FIXTURE_DATA)


@pytest.fixture(scope="session")
def synthetic_unbalanced(synthetic_complete):
    """Fixture dataset masked at distinct per-view rates."""
    with warnings.catch_warnings():
        # a few instances end up missing from every view; that is fine here
        warnings.simplefilter("ignore", UserWarning)
        return apply_mask(synthetic_complete, MaskSpec(rates=(0.1, 0.3, 0.6), seed=100))
