import math
from fractions import Fraction

import numpy as np
import pytest

from excsets import (
    AffineHorseshoe,
    ModelFormatError,
    TargetSet,
    ToralAutomorphism,
    box_dimension,
    bowen_root,
    code_point,
    dump_model,
    full_shift,
    horseshoe_potentials,
    parse_model_text,
    point_from_itinerary,
    realize_cylinder,
    sample_invariant_set,
    sft_entropy,
    toral_orbit,
    toral_survivors,
)
from oracles import matrix_order_mod

LOG2, LOG3 = math.log(2.0), math.log(3.0)


def symmetric():
    return AffineHorseshoe.standard([1 / 3, 1 / 3], [3.0, 3.0])


def asymmetric():
    return AffineHorseshoe.standard([0.5, 0.25], [2.0, 4.0])


CAT = ToralAutomorphism(((2, 1), (1, 1)))


# ------------------------------------------------------------- horseshoes

def test_standard_placement_is_middle_thirds():
    model = symmetric()
    assert model.strip(0) == pytest.approx((0.0, 1 / 3))
    assert model.strip(1) == pytest.approx((2 / 3, 1.0))
    assert model.band(0) == pytest.approx((0.0, 1 / 3))
    assert model.band(1) == pytest.approx((2 / 3, 1.0))


def test_horseshoe_validation():
    with pytest.raises(ValueError, match="contraction"):
        AffineHorseshoe.standard([1.5, 0.5], [3.0, 3.0])
    with pytest.raises(ValueError, match="expansion"):
        AffineHorseshoe.standard([0.3, 0.3], [0.9, 3.0])
    with pytest.raises(ValueError, match="strips"):
        AffineHorseshoe.standard([0.3, 0.3], [1.5, 1.5])
    with pytest.raises(ValueError, match="disjoint"):
        AffineHorseshoe((0.2, 0.2), (3.0, 3.0), (0.0, 0.2), (0.0, 0.5))


def test_code_fixed_point():
    model = symmetric()
    forward, backward = code_point(model, (0.0, 0.0), 6)
    assert str(forward) == "000000"
    assert str(backward) == "000000"


def test_code_period_two_point():
    model = symmetric()
    point = point_from_itinerary(model, (0, 1), (0, 1))
    forward, backward = code_point(model, point, 6)
    assert str(forward) == "010101"
    assert str(backward) == "010101"


def test_code_point_outside_errors():
    model = symmetric()
    with pytest.raises(ValueError, match="at step 0"):
        code_point(model, (0.5, 0.5), 4)
    # x = 0.2 sits in strip 0 but its image 0.6 falls in the gap
    with pytest.raises(ValueError, match="at step 1"):
        code_point(model, (0.2, 0.0), 4)


def test_coding_round_trip_random_points():
    model = symmetric()
    rng = np.random.default_rng(42)
    for _ in range(1000):
        forward = tuple(rng.integers(0, 2, size=12))
        backward = tuple(rng.integers(0, 2, size=12))
        point = point_from_itinerary(model, forward, backward)
        coded_f, coded_b = code_point(model, point, 10)
        cell = realize_cylinder(model, coded_f, coded_b)
        assert cell.contains(point)
        assert coded_f.symbols == forward[:10] * 1
        assert coded_b.symbols == backward[:10] * 1


def test_realize_cylinder_examples():
    model = symmetric()
    strip = realize_cylinder(model, (0,), None)
    assert (strip.x0, strip.width, strip.height) == pytest.approx((0.0, 1 / 3, 1.0))
    rect = realize_cylinder(model, (0, 1), (1,))
    assert rect.width == pytest.approx(1 / 9)
    assert rect.height == pytest.approx(1 / 3)
    assert rect.x0 == pytest.approx(2 / 9)
    assert rect.y0 == pytest.approx(2 / 3)
    deep = realize_cylinder(model, (0,) * 8, None)
    assert deep.width == pytest.approx(3.0 ** -8)


def test_horseshoe_potentials_values():
    phi_s, phi_u = horseshoe_potentials(symmetric())
    assert phi_s((0,)) == pytest.approx(-LOG3)
    assert phi_u((1,)) == pytest.approx(-LOG3)
    phi_s, phi_u = horseshoe_potentials(asymmetric())
    assert phi_u((0,)) == pytest.approx(-LOG2)
    assert phi_u((1,)) == pytest.approx(-math.log(4.0))
    assert phi_s((0,)) == pytest.approx(math.log(0.5))
    assert phi_s((1,)) == pytest.approx(math.log(0.25))
    assert phi_u.max_value() < 0.0
    assert phi_s.max_value() < 0.0


# ----------------------------------------------------------------- samples

def test_sample_counts():
    model = symmetric()
    assert sample_invariant_set(model, 4).count == 256
    assert sample_invariant_set(model, 0).count == 1
    assert tuple(sample_invariant_set(model, 0).points[0]) == pytest.approx((0.5, 0.5))


def test_sample_subsampling_deterministic():
    model = symmetric()
    a = sample_invariant_set(model, 6, max_points=100, seed=5)
    b = sample_invariant_set(model, 6, max_points=100, seed=5)
    assert a.count == 100
    assert np.array_equal(a.points, b.points)


def test_sample_box_dimension_matches_root_sum():
    for model in (symmetric(), asymmetric()):
        phi_s, phi_u = horseshoe_potentials(model)
        ambient = full_shift(model.branches)
        expected = bowen_root(ambient, phi_s) + bowen_root(ambient, phi_u)
        cloud = sample_invariant_set(model, 11)
        ratio = 1.0 / max(model.expansion)
        scales = [ratio ** k for k in range(2, 8)]
        estimate = box_dimension(cloud, scales)
        assert abs(estimate.value - expected) <= 0.05


def test_conjugacy_entropy():
    for m in (2, 3, 4):
        assert sft_entropy(full_shift(m)) == pytest.approx(math.log(m), abs=1e-12)


# -------------------------------------------------------------------- toral

def test_cat_map_eigenvalue():
    assert CAT.expanding_eigenvalue == pytest.approx((3.0 + math.sqrt(5.0)) / 2.0, abs=1e-15)
    assert CAT.log_expansion == pytest.approx(0.9624236501192069, abs=1e-12)


def test_toral_validation():
    with pytest.raises(ValueError, match="determinant"):
        ToralAutomorphism(((2, 0), (0, 1)))
    with pytest.raises(ValueError, match="absolute value 1"):
        ToralAutomorphism(((1, 1), (0, 1)))
    with pytest.raises(ValueError, match="absolute value 1"):
        ToralAutomorphism(((0, 1), (1, 0)))


def test_orbit_fixed_point():
    orbit = toral_orbit(CAT, (0, 0), 7)
    assert all(p == (0, 0) for p in orbit)


def test_rational_orbit_exact_periodic():
    start = (Fraction(1, 5), Fraction(2, 5))
    orbit = toral_orbit(CAT, start, 30)
    assert all(isinstance(p[0], Fraction) and p[0].denominator <= 5 for p in orbit)
    seen = {}
    period = None
    for index, point in enumerate(orbit):
        if point in seen:
            period = index - seen[point]
            break
        seen[point] = index
    assert period is not None
    assert matrix_order_mod(CAT.matrix, 5) % period == 0


def test_float_orbit_stays_on_torus():
    orbit = toral_orbit(CAT, (0.1234, 0.777), 50)
    arr = np.array(orbit)
    assert arr.min() >= 0.0 and arr.max() < 1.0


def test_haar_identity():
    assert abs(CAT.expansion_rate() - CAT.log_expansion) <= 1e-9


def test_toral_survivors_extremes():
    covering = TargetSet(kind="ball", centers=((0.5, 0.5),), radius=0.51)
    assert toral_survivors(CAT, covering, 64, 3).count == 0
    nothing = TargetSet(kind="ball", centers=((0.0, 0.0),), radius=0.0)
    assert toral_survivors(CAT, nothing, 64, 3).count == 64 * 64


def test_toral_survivors_validation():
    ball = TargetSet(kind="ball", centers=((0.0, 0.0),), radius=0.001)
    with pytest.raises(ValueError, match="grid spacing"):
        toral_survivors(CAT, ball, 64, 3)
    big = TargetSet(kind="ball", centers=((0.0, 0.0),), radius=0.05)
    with pytest.raises(ValueError, match="float safety"):
        toral_survivors(CAT, big, 64, 60)


# -------------------------------------------------------------- model files

def test_model_round_trips():
    for model in (symmetric(), asymmetric(), CAT):
        text = dump_model(model)
        assert parse_model_text(text) == model


def test_model_parse_errors_are_line_precise():
    with pytest.raises(ModelFormatError, match=r"<model>:3: unknown key"):
        parse_model_text("type: horseshoe\nu: 3 3\nwat: 1\ns: 0.3 0.3")
    with pytest.raises(ModelFormatError, match=r"<model>:2: matrix entries"):
        parse_model_text("type: toral\nmatrix: a b c d")
    with pytest.raises(ModelFormatError, match=r"<model>:1: unknown model type"):
        parse_model_text("type: solenoid")
    with pytest.raises(ModelFormatError, match=r"<model>:2: expected"):
        parse_model_text("type: toral\nmatrix 2 1 1 1")
    with pytest.raises(ModelFormatError, match="missing key"):
        parse_model_text("type: horseshoe\nu: 3 3")


def test_target_set_validation():
    with pytest.raises(ValueError, match="unknown target kind"):
        TargetSet(kind="blob")
    with pytest.raises(ValueError, match="at least one point"):
        TargetSet(kind="points")
    with pytest.raises(ValueError, match="radius"):
        TargetSet(kind="ball", centers=((0.0, 0.0),), radius=-1.0)
