import numpy as np
import pytest

from nmrqc.spin_system import load_system


@pytest.fixture
def chloroform():
    """Heteronuclear 1H-13C pair, per-spin channels, on resonance."""
    return load_system(
        {
            "spins": [
                {"label": "H", "offset_hz": 0.0, "channel": 0, "t1_s": 20.0, "t2_s": 1.0},
                {"label": "C", "offset_hz": 0.0, "channel": 1, "t1_s": 25.0, "t2_s": 0.8},
            ],
            "j_hz": [{"i": 0, "j": 1, "value": 215.0}],
        }
    )


@pytest.fixture
def two_spin_offsets():
    return load_system(
        {
            "spins": [{"offset_hz": 130.0}, {"offset_hz": -440.0}],
            "j_hz": [{"i": 0, "j": 1, "value": 215.0}],
        }
    )


@pytest.fixture
def three_spin():
    return load_system(
        {
            "spins": [{"offset_hz": 40.0}, {"offset_hz": -75.0}, {"offset_hz": 210.0}],
            "j_hz": [
                {"i": 0, "j": 1, "value": 100.0},
                {"i": 0, "j": 2, "value": 30.0},
                {"i": 1, "j": 2, "value": -45.0},
            ],
        }
    )


@pytest.fixture
def four_spin():
    return load_system(
        {
            "spins": [
                {"offset_hz": 40.0},
                {"offset_hz": -75.0},
                {"offset_hz": 210.0},
                {"offset_hz": -20.0},
            ],
            "j_hz": [
                {"i": 0, "j": 1, "value": 100.0},
                {"i": 0, "j": 2, "value": 30.0},
                {"i": 0, "j": 3, "value": 15.0},
                {"i": 1, "j": 2, "value": -45.0},
                {"i": 1, "j": 3, "value": 25.0},
                {"i": 2, "j": 3, "value": 60.0},
            ],
        }
    )


@pytest.fixture
def chain3():
    """a - b - c coupling chain; a and c are uncoupled."""
    return load_system(
        {
            "spins": [{"offset_hz": 0.0}, {"offset_hz": 10.0}, {"offset_hz": -20.0}],
            "j_hz": [{"i": 0, "j": 1, "value": 50.0}, {"i": 1, "j": 2, "value": 80.0}],
        }
    )


def random_deviation(n, rng):
    from nmrqc.states import DensityMatrix

    a = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    h = (a + a.conj().T) / 2
    h -= np.trace(h) / 2**n * np.eye(2**n)
    return DensityMatrix(h, "deviation")
