import pytest

from qfdc.calibration import CalibrationTargets, calibrate, calibrated_chain


@pytest.fixture(scope="session")
def calibration():
    return calibrate()


@pytest.fixture(scope="session")
def chain(calibration):
    """Calibrated chain with the interferometer in place."""
    return calibrated_chain(calibration)


@pytest.fixture(scope="session")
def bare_chain(chain):
    """Calibrated chain with the interferometer removed (count-rate scenarios)."""
    return chain.without_interferometer()


@pytest.fixture(scope="session")
def targets():
    return CalibrationTargets()
