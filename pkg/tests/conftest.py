"""Shared fixtures.

The statistical reproductions all start from one committed distribution
near the centroid ray of the pyramid base rays; it is derived once per
session (seeded run from uniform, see ``derive_centroid_start``).
"""

import numpy as np
import pytest

import entroray as er

# committed seed of the centroid-start construction
CENTROID_SEED = 1
# committed seed set for the statistical batches
SEEDS_100 = tuple(range(1, 101))


@pytest.fixture(scope="session")
def binary4():
    return er.AlphabetSpec((2, 2, 2, 2))


@pytest.fixture(scope="session")
def fc_vector():
    return er.load_fixture_rays("reference_points").get("fc")


@pytest.fixture(scope="session")
def pyramid():
    apex, base = er.pyramid_rays()
    return apex, base


@pytest.fixture(scope="session")
def centroid_start(binary4, pyramid):
    _, base = pyramid
    pmf, outcome = er.derive_centroid_start(binary4, base, seed=CENTROID_SEED)
    # the construction must land on the Ingleton-violating side, close to
    # the centroid ray; this pins the committed recipe
    assert outcome.final_dnorm < 0.02
    return pmf


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)


def random_pmf(rng, spec, concentration=1.0):
    mass = rng.dirichlet(np.full(spec.num_cells, concentration))
    return er.JointPmf(spec, mass)
