import numpy as np
import pytest

from autoflow import _tree_py
from autoflow.datasets import get_data
from autoflow.experiment import ExperimentConfig, setup
from autoflow.tree_kernel import compiled_backend

PIMA_TARGET = "Class variable"


@pytest.fixture(scope="session")
def pima():
    return get_data("diabetes")


@pytest.fixture(scope="session")
def pima_exp(pima):
    exp, report = setup(pima, ExperimentConfig(PIMA_TARGET))
    return exp


@pytest.fixture(scope="session")
def pima_report(pima):
    return setup(pima, ExperimentConfig(PIMA_TARGET))[1]


def _backends():
    out = [pytest.param(_tree_py, id="python")]
    compiled = compiled_backend()
    marks = () if compiled is not None else pytest.mark.skip(reason="extension not built")
    out.append(pytest.param(compiled, id="cython", marks=marks))
    return out


@pytest.fixture(params=_backends())
def kernel(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


XOR_X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
XOR_Y = np.array([0, 1, 1, 0])
