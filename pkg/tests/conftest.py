import numpy as np
import pytest

from ucpdilate import channel as ch
from ucpdilate import nagy as ng
from ucpdilate import tower as tw

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)


def random_matrix(rng, d, norm=True):
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    if norm:
        m = m / np.linalg.norm(m, 2)
    return m


def random_hermitian(rng, d):
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (m + m.conj().T) / 2


def tail_norm(t):
    return float(np.sqrt(sum(x.inner(x).real for x in t.entries.values())))


def tail_distance(a, b):
    return tail_norm(a - b)


@pytest.fixture(scope="session")
def depolarizing_half():
    return ch.depolarizing(2, 0.5)


@pytest.fixture(scope="session")
def phase_unitary():
    return np.diag([1.0, np.exp(0.7j)]).astype(np.complex128)


@pytest.fixture(scope="session")
def rank2_channel():
    return ch.rank2_faithful(seed=1)


@pytest.fixture(scope="session")
def rank2_state(rank2_channel):
    return ch.invariant_state(rank2_channel).state


@pytest.fixture(scope="session")
def rank2_adjoint(rank2_channel, rank2_state):
    adj = ch.phi_adjoint(rank2_channel, rank2_state)
    assert isinstance(adj, ch.UcpMap)
    return adj


@pytest.fixture(scope="session")
def rank2_dilation(rank2_channel):
    tower = tw.build_tower(rank2_channel, 8)
    return ng.build_nagy(tower)
