import numpy as np
import pytest

from conicwave import (ArclengthChart, KernelEngine, PotentialProfile,
                       ScatteringModel, make_profile)


@pytest.fixture(scope="session")
def cylinder_model():
    return ScatteringModel(make_profile({"kind": "cylinder"}))


@pytest.fixture(scope="session")
def hyperboloid_model():
    prof = make_profile({"kind": "hyperboloid", "params": {"a": 1.0}})
    chart = ArclengthChart(prof)
    pot = PotentialProfile(prof, chart)
    return ScatteringModel(prof, chart, pot)


@pytest.fixture(scope="session")
def cylinder_engine(cylinder_model):
    return KernelEngine(cylinder_model, xi_abs_max=1.1e3)


@pytest.fixture(scope="session")
def hyperboloid_engine(hyperboloid_model):
    return KernelEngine(hyperboloid_model, xi_abs_max=1.1e3)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)
