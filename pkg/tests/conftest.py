import math

import numpy as np
import pytest

from spinmur.families import coordinate_axes, d4_family, o_family
from spinmur.qubit import spin_observable

SQ2 = math.sqrt(2.0)
SQ3 = math.sqrt(3.0)
C_ORTH2 = 0.228446  # published as 2 x 0.114223
C_ORTH3 = 0.342498  # published as 3 x 0.114166
C_INF = 0.0899306040


def trace_prob(effect, r):
    """Tr{E rho} from explicit complex 2x2 matrices."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    E = effect.t * np.eye(2) + effect.v[0] * sx + effect.v[1] * sy + effect.v[2] * sz
    rho = 0.5 * (np.eye(2) + r[0] * sx + r[1] * sy + r[2] * sz)
    return float(np.trace(E @ rho).real)


def kl_bits(p, q):
    """Textbook KL in bits on plain lists, kept apart from the library path.

    Probabilities below 1e-15 count as zero, matching the rounding contract.
    """
    out = 0.0
    for a, b in zip(p, q):
        a, b = (0.0 if x < 1e-15 else x for x in (a, b))
        if a > 0:
            if b == 0:
                return math.inf
            out += a * math.log2(a / b)
    return out


@pytest.fixture(scope="session")
def xy():
    return [spin_observable(d) for d in coordinate_axes(2)]


@pytest.fixture(scope="session")
def xyz():
    return [spin_observable(d) for d in coordinate_axes(3)]


@pytest.fixture(scope="session")
def m0_2():
    return d4_family(1 / SQ2)


@pytest.fixture(scope="session")
def m0_3():
    return o_family(1 / SQ3)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
