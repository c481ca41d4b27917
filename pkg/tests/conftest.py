"""Shared fixtures: the seeded random-walk environment family."""

import numpy as np
import pytest

from dynregret import gen_random_walk

WALK_DIM = 5
WALK_HORIZON = 1000
WALK_MU = 1.0
WALK_L = 4.0
WALK_STEP_BOUND = 0.1
WALK_SEEDS = range(100)


@pytest.fixture(scope="session")
def walk_family():
    """The 100 seeded random-walk environments used across acceptance checks."""
    return [
        gen_random_walk(WALK_DIM, WALK_HORIZON, WALK_MU, WALK_L, WALK_STEP_BOUND, seed=s)
        for s in WALK_SEEDS
    ]


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def random_spd(rng, n, lo=0.5, hi=3.0):
    """Random SPD matrix with spectrum inside [lo, hi]."""
    evals = rng.uniform(lo, hi, size=n)
    M = rng.normal(size=(n, n))
    Q, _ = np.linalg.qr(M)
    A = (Q * evals) @ Q.T
    return 0.5 * (A + A.T)
