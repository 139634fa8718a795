import numpy as np
import pytest

from qhybrid import ProtocolInputs


def random_state_amps(rng, n_qubits):
    raw = rng.normal(size=2 ** n_qubits) + 1j * rng.normal(size=2 ** n_qubits)
    return raw / np.linalg.norm(raw)


def random_inputs(rng) -> ProtocolInputs:
    t1, t2 = rng.uniform(0, np.pi / 2, size=2)
    ph1, ph2 = rng.uniform(0, 2 * np.pi, size=2)
    return ProtocolInputs(np.cos(t1) * np.exp(1j * ph1),
                          np.sin(t1) * np.exp(1j * ph2),
                          float(np.cos(t2)), float(np.sin(t2)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
