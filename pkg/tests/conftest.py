import numpy as np
import pytest

from tdcs.spectrum import DEFAULT_SCENARIO, build_availability


@pytest.fixture(scope="session")
def avail_256():
    return build_availability(DEFAULT_SCENARIO, 256)


@pytest.fixture(scope="session")
def avail_1024():
    return build_availability(DEFAULT_SCENARIO, 1024)


def direct_sidelobes(cluster, n_bins):
    """Independent O(N * |cluster|) evaluation of the normalized sidelobes."""
    cluster = np.asarray(cluster)
    taus = np.arange(1, n_bins)
    out = np.zeros(n_bins - 1, dtype=complex)
    for tau in taus:
        out[tau - 1] = np.exp(2j * np.pi * cluster * tau / n_bins).sum() / cluster.size
    return out
