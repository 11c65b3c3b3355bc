import pytest

import ecodrive as ed
from ecodrive.experiment import ExperimentMatrix, make_controller, run_matrix


@pytest.fixture(scope="session")
def default_cfg():
    return ed.validate(ed.default_config())


@pytest.fixture(scope="session")
def benchmark_traj(default_cfg):
    return ed.benchmark_episode(default_cfg)


@pytest.fixture(scope="session")
def identity_records(default_cfg, benchmark_traj):
    """Zero-disturbance, zero-extension episodes for both eco controllers."""
    records = {}
    for name in ("analytical", "optimal"):
        controller = make_controller(name, default_cfg)
        records[name] = ed.run_episode(default_cfg, controller, benchmark=benchmark_traj)
    return records


@pytest.fixture(scope="session")
def full_matrix_result():
    """The complete default matrix: 2 controllers x 4 extensions x 3 levels x 5 seeds."""
    return run_matrix(ExperimentMatrix())
