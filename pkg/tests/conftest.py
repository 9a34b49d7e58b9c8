import pytest

from yawmpc import MpcConfig, VehicleParams, run_scenario
from yawmpc.cli import load_scenario


@pytest.fixture(scope="session")
def params():
    return VehicleParams()


@pytest.fixture(scope="session")
def config():
    return MpcConfig()


def _bundled(name):
    scenario, _, _ = load_scenario(name)
    return scenario


@pytest.fixture(scope="session")
def s1():
    return _bundled("s1")


@pytest.fixture(scope="session")
def s2():
    return _bundled("s2")


@pytest.fixture(scope="session")
def s3():
    return _bundled("s3")


@pytest.fixture(scope="session")
def s1_runs(s1, params, config):
    return run_scenario(s1, params, config), run_scenario(s1.uncontrolled(), params, config)


@pytest.fixture(scope="session")
def s2_runs(s2, params, config):
    return run_scenario(s2, params, config), run_scenario(s2.uncontrolled(), params, config)


@pytest.fixture(scope="session")
def s3_runs(s3, params, config):
    return run_scenario(s3, params, config), run_scenario(s3.uncontrolled(), params, config)
