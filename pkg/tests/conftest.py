"""Shared fixtures; puts app/ on sys.path like the packaged entry point does."""

import os
import sys
from fractions import Fraction

import pytest

APP_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "app")
if APP_DIR not in sys.path:
    sys.path.insert(0, APP_DIR)

from processing.elliptic_lattes import EllipticCurve, lattes_map  # noqa: E402
from processing.padic_field import q_from_j, tate_model  # noqa: E402


@pytest.fixture(scope="session")
def x3_plus_1():
    return EllipticCurve(0, 0, 0, 0, 1)


@pytest.fixture(scope="session")
def x3_plus_x():
    return EllipticCurve(0, 0, 0, 1, 0)


@pytest.fixture(scope="session")
def x3_minus_2():
    return EllipticCurve(0, 0, 0, 0, -2)


@pytest.fixture(scope="session")
def tate_curve():
    """y^2 + xy = x^3 + 6, j = -1/15558."""
    return EllipticCurve(1, 0, 0, 0, 6)


@pytest.fixture(scope="session")
def f2(x3_plus_1):
    """(x^4 - 8x) / (4x^3 + 4)."""
    return lattes_map(x3_plus_1, 2)


@pytest.fixture(scope="session")
def tate_model_p3():
    q = q_from_j(Fraction(-1, 15558), 3, 40)
    return tate_model(q, 40)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: exact height iterations at the full tolerance")
