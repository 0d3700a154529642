import numpy as np
import pytest

from dfscodes import codes, dynamics


@pytest.fixture(scope="session")
def code2():
    return codes.singlet_basis(2, 1)


@pytest.fixture(scope="session")
def code4():
    return codes.singlet_basis(4, 1)


@pytest.fixture(scope="session")
def code6():
    return codes.singlet_basis(6, 1)


@pytest.fixture(scope="session")
def desk_bath():
    return dynamics.BathSpec(frequencies=(1.0, 1.3), fock_truncation=3)


@pytest.fixture(scope="session")
def desk_setup(desk_bath):
    # frozen random O(1) coupling draw shared across dynamics tests
    rng = np.random.default_rng(42)
    coupling = dynamics.random_coupling(rng, desk_bath.n_modes, 1)
    system = dynamics.SystemSpec(rank=1, replicas=4, level_splittings=(1.0,))
    return dynamics.SimulationSetup(system=system, bath=desk_bath, coupling=coupling)


@pytest.fixture(scope="session")
def desk_bath_state(desk_bath):
    return dynamics.fock_mixture(desk_bath, [(0.6, [0, 0]), (0.4, [1, 2])])
