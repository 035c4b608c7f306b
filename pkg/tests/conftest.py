import numpy as np
import pytest

from sparsedyn import dynamics, model


@pytest.fixture(scope="session")
def lorenz_traj():
    """The canonical chaotic training set: dt=0.002 over [0, 10)."""
    times = np.arange(0.0, 10.0, 0.002)
    return dynamics.generate(dynamics.lorenz(), [-8.0, 8.0, 27.0], times)


@pytest.fixture(scope="session")
def lorenz_model(lorenz_traj):
    return model.fit(lorenz_traj)
