import numpy as np
import pytest

from ordbridge import data as odata


@pytest.fixture(scope="session")
def small_three_level():
    """~170-observation three-level dataset with known truth."""
    truth = odata.TrueParams(
        alpha_c=np.array([-0.3, 1.5]),
        beta_c=np.array([0.5, -0.8, 1.2]),
        phi_ustar=0.9, phi_v=0.8,
        n_regions=4, families_per_region=14, family_sizes=(2, 3, 4))
    rng = np.random.default_rng(2024)
    dataset, u, v = odata.generate(truth, rng)
    return truth, dataset, u, v


@pytest.fixture(scope="session")
def tiny_fixture():
    """20+ observations over 3 regions / 6 families, for gradient checks."""
    truth = odata.TrueParams(
        alpha_c=np.array([-0.4, 1.1]),
        beta_c=np.array([0.6, -0.9]),
        phi_ustar=0.85, phi_v=0.75,
        n_regions=3, families_per_region=2, family_sizes=(3, 4, 5))
    rng = np.random.default_rng(99)
    dataset, u, v = odata.generate(truth, rng)
    assert dataset.n_obs >= 20 and dataset.n_families >= 6
    return dataset
