import numpy as np
import pytest

from qdouble.experiments import prepare_ground_state
from qdouble.group_core import cyclic_group, dihedral_group, quaternion_group, symmetric_group
from qdouble.lattice import torus


@pytest.fixture(scope="session")
def z2():
    return cyclic_group(2)


@pytest.fixture(scope="session")
def s3():
    return symmetric_group(3)


@pytest.fixture(scope="session")
def d4():
    return dihedral_group(4)


@pytest.fixture(scope="session")
def q8():
    return quaternion_group()


@pytest.fixture(scope="session")
def t22():
    return torus(2, 2)


@pytest.fixture(scope="session")
def t33():
    return torus(3, 3)


@pytest.fixture(scope="session")
def z2_ground_22(z2, t22):
    return prepare_ground_state(t22, z2)


@pytest.fixture(scope="session")
def z2_ground_33(z2, t33):
    return prepare_ground_state(t33, z2)


@pytest.fixture(scope="session")
def s3_ground_22(s3, t22):
    return prepare_ground_state(t22, s3)


@pytest.fixture(scope="session")
def d4_ground_22(d4, t22):
    return prepare_ground_state(t22, d4)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
