import math

import pytest

from vectorheat import analytic_spectra, make_model, sample


@pytest.fixture(scope="session")
def circle():
    return make_model("circle")


@pytest.fixture(scope="session")
def torus():
    return make_model("flat_torus", periods=(2 * math.pi, 2 * math.pi))


@pytest.fixture(scope="session")
def sphere():
    return make_model("sphere2")


@pytest.fixture(scope="session")
def circle_spectra(circle):
    return analytic_spectra(circle, 41, sample(circle, 128))


@pytest.fixture(scope="session")
def torus_spectra(torus):
    return analytic_spectra(torus, 400, sample(torus, 32**2))


@pytest.fixture(scope="session")
def sphere_spectra(sphere):
    return analytic_spectra(sphere, 240, sample(sphere, 2 * 24**2))
