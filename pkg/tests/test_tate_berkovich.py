import random
from fractions import Fraction

import pytest

from processing.errors import PrecisionError, PreconditionError
from processing.padic_field import PadicNumber, tate_model
from processing.tate_berkovich import (
    DiskPoint, TateSeriesElement, block_valuations, disk_seminorm, skeleton_val,
    tate_coordinates, tate_x_series, value_group_witnesses, verify_tate_point,
)

SKELETON_TS = [Fraction(1, 5), Fraction(1, 3), Fraction(2, 5), Fraction(1, 2), Fraction(3, 5), Fraction(4, 5)]
UNIT_ZETAS = [2, 4, 5, 7, -2]


@pytest.fixture(scope="module")
def model_v3():
    """A Tate curve over Q_5 with v(q) = 3."""
    return tate_model(PadicNumber.from_int(125, 5, 40), 30)


def random_laurent(rng, p):
    coeffs = {}
    for n in range(-3, 4):
        if rng.random() < 0.6:
            value = 0
            while value == 0:
                value = Fraction(rng.randint(-200, 200), rng.randint(1, 50))
            coeffs[n] = PadicNumber.from_rational(value, p, 40)
    if not coeffs:
        coeffs[0] = PadicNumber.from_int(1, p, 40)
    return TateSeriesElement.from_mapping(p, coeffs, 40)


# --- the tent ---

@pytest.mark.parametrize("t", SKELETON_TS)
def test_skeleton_value_is_the_tent(tate_model_p3, t):
    assert skeleton_val(tate_model_p3, t) == min(t, 1 - t)


def test_skeleton_value_is_symmetric(tate_model_p3):
    for t in SKELETON_TS:
        assert skeleton_val(tate_model_p3, t) == skeleton_val(tate_model_p3, 1 - t)


@pytest.mark.parametrize("t, expected", [
    (Fraction(1), Fraction(1)),
    (Fraction(2), Fraction(1)),
    (Fraction(3, 2), Fraction(3, 2)),
    (Fraction(5, 2), Fraction(1, 2)),
    (Fraction(1, 7), Fraction(1, 7)),
])
def test_skeleton_value_for_larger_v_q(model_v3, t, expected):
    assert model_v3.v_q == 3
    assert skeleton_val(model_v3, t) == expected


@pytest.mark.parametrize("t", [Fraction(0), Fraction(1), Fraction(3, 2), Fraction(-1, 2)])
def test_points_off_the_skeleton_are_rejected(tate_model_p3, t):
    with pytest.raises(PreconditionError):
        skeleton_val(tate_model_p3, t)


def test_larger_truncation_keeps_the_value(tate_model_p3):
    for t in SKELETON_TS:
        assert skeleton_val(tate_model_p3, t, K=2) == skeleton_val(tate_model_p3, t, K=16)


def test_block_estimates_bound_the_value(tate_model_p3):
    blocks = block_valuations(tate_model_p3, Fraction(1, 3))
    assert (blocks.positive, blocks.negative, blocks.constant) == (Fraction(1, 3), Fraction(2, 3), Fraction(1))
    assert blocks.bound == skeleton_val(tate_model_p3, Fraction(1, 3))


def test_value_group_witnesses(tate_model_p3, model_v3):
    ts = [Fraction(1, 3), Fraction(1, 2)]
    assert value_group_witnesses(tate_model_p3, ts) == [(Fraction(1, 3), Fraction(1, 3)), (Fraction(1, 2), Fraction(1, 2))]
    assert value_group_witnesses(tate_model_p3, ts, e=2) == [(Fraction(1, 3), Fraction(1, 3))]
    assert value_group_witnesses(model_v3, [Fraction(1), Fraction(2)]) == []
    with pytest.raises(PreconditionError):
        value_group_witnesses(tate_model_p3, ts, e=0)


# --- the x-series ---

def test_x_series_coefficient_valuations(tate_model_p3):
    series = tate_x_series(tate_model_p3, 4)
    assert series.truncation == 4
    assert series.coefficient(1).valuation == 0
    assert series.coefficient(3).valuation == 1
    assert series.coefficient(-1).valuation == 1
    assert series.coefficient(-2).valuation == 2
    assert series.coefficient(-3).valuation == 4
    assert series.coefficient(0).valuation == 1
    assert series.coefficient(5) is None


def test_x_series_radius_range(tate_model_p3):
    series = tate_x_series(tate_model_p3, 2, radius_range=(Fraction(1, 5), Fraction(4, 5)))
    assert series.tail_valuation_bound == Fraction(3, 5)
    with pytest.raises(PreconditionError):
        disk_seminorm(series, DiskPoint(Fraction(9, 10)))
    with pytest.raises(PreconditionError):
        tate_x_series(tate_model_p3, 2, radius_range=(Fraction(0), Fraction(1, 2)))
    with pytest.raises(PreconditionError):
        tate_x_series(tate_model_p3, 0)


# --- seminorms ---

@pytest.mark.parametrize("p, n, c, t, expected", [
    (3, 2, 9, Fraction(1, 3), Fraction(8, 3)),
    (5, -1, 1, Fraction(1, 2), Fraction(-1, 2)),
    (2, 0, Fraction(1, 4), Fraction(7, 3), Fraction(-2)),
    (7, 3, Fraction(14, 3), Fraction(-1), Fraction(-2)),
])
def test_monomial_seminorm(p, n, c, t, expected):
    value = disk_seminorm(TateSeriesElement.monomial(p, n, c), DiskPoint(t))
    assert value.exact
    assert value.value == expected


def test_seminorm_is_an_ultrametric_valuation():
    rng = random.Random(13)
    for _ in range(40):
        p = rng.choice([2, 3, 5])
        t = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        point = DiskPoint(t)
        f, g = random_laurent(rng, p), random_laurent(rng, p)
        vf, vg = disk_seminorm(f, point), disk_seminorm(g, point)
        assert disk_seminorm(f + g, point).lower >= min(vf.value, vg.value)
        product = disk_seminorm(f * g, point)
        assert product.exact
        assert product.value == vf.value + vg.value


def test_scaling_shifts_the_seminorm(tate_model_p3):
    point = DiskPoint(Fraction(1, 4))
    series = tate_x_series(tate_model_p3, 4)
    scaled = series.scale(Fraction(9, 2))
    assert disk_seminorm(scaled, point).value == disk_seminorm(series, point).value + 2
    assert scaled.tail_bound(Fraction(1, 4)) == series.tail_bound(Fraction(1, 4)) + 2


def test_imprecise_coefficient_gives_an_interval():
    zero_ish = PadicNumber.zero(3, 2)
    series = TateSeriesElement.from_mapping(3, {0: PadicNumber.from_int(9, 3, 10), -1: zero_ish}, 10)
    value = disk_seminorm(series, DiskPoint(Fraction(1, 2)))
    assert not value.exact
    assert value.lower == Fraction(3, 2)
    assert value.upper == 2


def test_products_of_truncated_series_are_refused(tate_model_p3):
    series = tate_x_series(tate_model_p3, 2)
    with pytest.raises(PreconditionError):
        series * series


def test_nonzero_centers_are_not_supported():
    with pytest.raises(PreconditionError):
        DiskPoint(Fraction(1, 2), center=PadicNumber.from_int(1, 3, 5))


# --- Tate's parametrization ---

@pytest.mark.parametrize("zeta", UNIT_ZETAS)
def test_tate_points_satisfy_the_curve(tate_model_p3, zeta):
    check = verify_tate_point(tate_model_p3, zeta, 40)
    assert check.residual_valuation >= 35


def test_minus_one_is_two_torsion(tate_model_p3):
    check = verify_tate_point(tate_model_p3, -1, 40)
    assert check.residual_valuation >= 35
    assert check.doubling_valuation >= 35


@pytest.mark.parametrize("zeta", [2, 5, 7])
def test_coordinates_are_q_periodic(tate_model_p3, zeta):
    x1, y1 = tate_coordinates(tate_model_p3, zeta, 40)
    shifted = PadicNumber.from_rational(zeta, 3, 48) * tate_model_p3.q
    x2, y2 = tate_coordinates(tate_model_p3, shifted, 40)
    for a, b in ((x1, x2), (y1, y2)):
        assert min(a.absolute_precision, b.absolute_precision) >= 35
        assert (a - b).valuation >= 35


def test_identity_is_rejected(tate_model_p3):
    with pytest.raises(PrecisionError):
        tate_coordinates(tate_model_p3, 1, 40)
    with pytest.raises(PrecisionError):
        tate_coordinates(tate_model_p3, tate_model_p3.q, 40)


@pytest.mark.parametrize("zeta", [3, Fraction(1, 3), 0])
def test_verify_needs_a_fundamental_domain_zeta(tate_model_p3, zeta):
    with pytest.raises(PreconditionError):
        verify_tate_point(tate_model_p3, zeta, 40)
