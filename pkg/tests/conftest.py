import hypothesis
import numpy as np
import pytest

import ctxpoly as cp
from ctxpoly.quantum import PAULI_X, PAULI_Y, PAULI_Z

hypothesis.settings.register_profile(
    "default", deadline=None, max_examples=25, derandomize=True
)
hypothesis.settings.load_profile("default")


@pytest.fixture(scope="session")
def b_si():
    return cp.make_simplest_scenario()


@pytest.fixture(scope="session")
def canonical_realization():
    return cp.canonical_simplest_realization()


@pytest.fixture(scope="session")
def canonical_behavior(canonical_realization):
    return cp.behavior_from_quantum(canonical_realization)


@pytest.fixture(scope="session")
def si_vertices(b_si):
    return cp.enumerate_behavior_vertices(b_si)


@pytest.fixture(scope="session")
def b6_scenario():
    return cp.make_simplest_scenario(n_meas=6)


@pytest.fixture(scope="session")
def b6_realization(canonical_realization):
    # Canonical pair plus four arbitrary projective measurements.
    tilted = (PAULI_Z + PAULI_X) / np.sqrt(2.0)
    extra = np.stack([cp.dichotomic_povm(obs) for obs in (PAULI_Z, PAULI_X, PAULI_Y, tilted)])
    povms = np.concatenate([canonical_realization.povms, extra])
    return cp.QuantumRealization(states=canonical_realization.states, povms=povms)


@pytest.fixture(scope="session")
def b6_behavior(b6_realization):
    return cp.behavior_from_quantum(b6_realization)
