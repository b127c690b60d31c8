import numpy as np
import pytest

import snodelab as sl
from snodelab import backends

FIXTURES = "fixtures"


@pytest.fixture(scope="session", autouse=True)
def warm_backend():
    # JIT-compile the kernels once so timed tests measure algorithm time
    backends.warmup()


@pytest.fixture(scope="session")
def e0():
    return sl.SNode(A=[[0]], S=[[1]], Phi1=[[0]], Phi2=[[1]])


@pytest.fixture(scope="session")
def ebeta():
    return sl.SNode(A=[[0]], S=[[1]], Phi1=[[1j]], Phi2=[[1]])


@pytest.fixture(scope="session")
def ai_node():
    return sl.SNode(A=[[1j]], S=[[1]], Phi1=[[1]], Phi2=[[1]])


@pytest.fixture(scope="session")
def jordan2():
    return sl.SNode(A=[[0, 0], [1, 0]], S=np.eye(2), Phi1=[[0], [-1j]], Phi2=[[1], [0]])


@pytest.fixture(scope="session")
def moment_p2():
    return sl.build_moment_node(2, 4, 1)


@pytest.fixture(scope="session")
def static_p2():
    # A = 0 family: boundary densities decay like 1/t^2 in every direction,
    # which keeps the full factorization pipeline inside its PD envelope
    return sl.SNode(A=np.zeros((2, 2)), S=np.diag([1.0, 2.0]),
                    Phi1=np.zeros((2, 2)), Phi2=np.eye(2))


@pytest.fixture(scope="session")
def moebius():
    return sl.MoebiusMap()


@pytest.fixture(scope="session")
def grid4096():
    return sl.CircleGrid(4096)


def random_upper(rng, n=1, span=2.0, im_lo=0.05, im_hi=2.0):
    z = rng.uniform(-span, span, n) + 1j * rng.uniform(im_lo, im_hi, n)
    return z if n > 1 else complex(z[0])


def disk_point(rng, rmax=0.85):
    """Area-uniform sample strictly inside the disk of radius rmax."""
    r = rmax * np.sqrt(rng.uniform(0.0, 1.0))
    return complex(r * np.exp(2j * np.pi * rng.uniform(0.0, 1.0)))
