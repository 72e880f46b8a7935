import json
import math
from itertools import product

import pytest

from excsets import (
    AffineHorseshoe,
    ForbiddenFamily,
    TargetSet,
    ToralAutomorphism,
    Word,
    avoids,
    bernoulli_measure,
    build_survivor,
    cover_target,
    dynamical_dimension,
    exceptional_report,
    full_shift,
    horseshoe_potentials,
    legal_words,
    point_from_itinerary,
    report_to_json,
    reports_to_csv,
    sweep_depth,
    toral_exceptional_report,
    word_count,
)
from oracles import brute_force_count

LOG2, LOG3 = math.log(2.0), math.log(3.0)


def symmetric():
    return AffineHorseshoe.standard([1 / 3, 1 / 3], [3.0, 3.0])


def asymmetric():
    return AffineHorseshoe.standard([0.5, 0.25], [2.0, 4.0])


def half_half():
    return bernoulli_measure(full_shift(2), [0.5, 0.5])


FIXED_POINT = TargetSet(kind="points", points=((0.0, 0.0),))


# ------------------------------------------------------------ cover_target

def test_cover_fixed_point():
    family = cover_target(symmetric(), FIXED_POINT, 4)
    assert {str(w) for w in family.words} == {"0000"}


def test_cover_period_two_point_phase():
    model = symmetric()
    point = point_from_itinerary(model, (0, 1), (0, 1))
    family = cover_target(model, TargetSet(kind="points", points=(point,)), 4)
    # phase convention: the itinerary starts at the point itself
    assert {str(w) for w in family.words} == {"0101"}


def test_cover_two_points():
    model = symmetric()
    p = point_from_itinerary(model, (0, 1, 1, 0, 1, 0), (0,))
    q = point_from_itinerary(model, (1, 0, 0, 1, 0, 0), (0,))
    target = TargetSet(kind="points", points=(p, q))
    family = cover_target(model, target, 6)
    assert len(family.words) == 2
    report = exceptional_report(model, target, 6, half_half())
    assert report.target_dimension == 0.0
    assert report.hypothesis_holds is True


def test_cover_everything_error():
    model = symmetric()
    both = TargetSet(kind="points", points=((0.0, 0.0), (1.0, 1.0)))
    with pytest.raises(ValueError, match="cover is everything"):
        cover_target(model, both, 1)


def test_cover_empty_target_error():
    with pytest.raises(ValueError, match="target is empty"):
        cover_target(symmetric(), TargetSet(kind="empty"), 3)


def test_cover_cylinder_truncation_and_extension():
    model = symmetric()
    target = TargetSet(kind="cylinders", words=(Word((0, 1, 0)),))
    shallow = cover_target(model, target, 2)
    assert {str(w) for w in shallow.words} == {"01"}
    deep = cover_target(model, target, 4)
    assert {str(w) for w in deep.words} == {"0100", "0101"}


def test_cover_ball_target():
    model = symmetric()
    ball = TargetSet(kind="ball", centers=((0.0, 0.5),), radius=0.01)
    family = cover_target(model, ball, 3)
    assert {str(w) for w in family.words} == {"000"}


# ------------------------------------------------------- exceptional_report

def test_report_fixed_point_depth_six():
    report = exceptional_report(symmetric(), FIXED_POINT, 6, half_half())
    assert abs(report.survivor_entropy - LOG2) <= 0.02
    assert report.verdicts["thmA_entropy"]["verdict"] == "satisfied"
    assert report.dimension_estimate >= 2.0 * LOG2 / LOG3 - 0.05
    assert report.verdicts["thmB_dim"]["verdict"] == "satisfied"
    assert report.verdicts["thmE_dim"]["verdict"] == "not-applicable"


def test_report_asymmetric_cylinder_pair():
    target = TargetSet(kind="cylinders",
                       words=(Word((0, 1, 0, 1, 0, 1)), Word((1, 0, 1, 0, 1, 0))))
    report = exceptional_report(asymmetric(), target, 6, half_half())
    chi_u = 0.5 * (LOG2 + math.log(4.0))
    bound = report.d_s_ambient + LOG2 / chi_u
    assert report.bounds["thmD_dim"] == pytest.approx(bound, abs=1e-9)
    assert report.dimension_estimate >= bound - 0.05
    assert report.verdicts["thmD_dim"]["verdict"] == "satisfied"
    # a cylinder union has full dimension, so the smallness hypothesis fails
    assert report.hypothesis_holds is False


def test_report_empty_survivor_not_applicable():
    target = TargetSet(kind="cylinders", words=(Word((0,)), Word((1, 1))))
    report = exceptional_report(symmetric(), target, 2, half_half())
    assert report.survivor_empty
    assert report.survivor_entropy is None
    assert all(v["verdict"] == "not-applicable" for v in report.verdicts.values())
    assert "too coarse" in report.diagnostic


def test_report_empty_target_equals_ambient():
    report = exceptional_report(symmetric(), TargetSet(kind="empty"), 4, half_half())
    assert report.survivor_entropy == pytest.approx(report.ambient_entropy, abs=1e-12)
    assert report.dimension_estimate == pytest.approx(2.0 * LOG2 / LOG3, abs=1e-9)


# ------------------------------------------------------------------- sweeps

def test_sweep_entropies_increase_to_ambient():
    reports = sweep_depth(symmetric(), FIXED_POINT, list(range(2, 11)), half_half())
    entropies = [r.survivor_entropy for r in reports]
    assert all(b > a for a, b in zip(entropies, entropies[1:]))
    assert LOG2 - entropies[-1] < 0.01


def test_sweep_repeated_depth_deterministic():
    reports = sweep_depth(symmetric(), FIXED_POINT, [4, 4], half_half())
    assert report_to_json(reports[0]) == report_to_json(reports[1])


def test_sweep_empty_target():
    reports = sweep_depth(symmetric(), TargetSet(kind="empty"), [2, 3], half_half())
    for report in reports:
        assert report.survivor_entropy == pytest.approx(report.ambient_entropy)


def test_sweep_requires_sorted_depths():
    with pytest.raises(ValueError, match="nondecreasing"):
        sweep_depth(symmetric(), FIXED_POINT, [4, 2], half_half())


# --------------------------------------------------------------- invariants

def test_inside_approximation_soundness():
    # every word legal in the survivor avoids the cover at all shifts
    model = symmetric()
    family = cover_target(model, FIXED_POINT, 4)
    survivor = build_survivor(family)
    for word in legal_words(survivor.sft, 12):
        assert avoids(word, family)


def test_limit_set_decomposition_by_last_hit():
    # every word splits as never-hitting or by its unique last hit; the
    # never-hitting count matches both direct enumeration and the
    # survivor word count
    forbidden = (0, 1, 0, 1)
    survivor = build_survivor(ForbiddenFamily.make(2, [forbidden]))
    n = 14
    k = len(forbidden)
    never = 0
    by_last_hit = {}
    for word in product(range(2), repeat=n):
        hits = [i for i in range(n - k + 1) if word[i:i + k] == forbidden]
        if not hits:
            never += 1
        else:
            by_last_hit[hits[-1]] = by_last_hit.get(hits[-1], 0) + 1
    assert never + sum(by_last_hit.values()) == 2 ** n
    assert never == brute_force_count(2, [forbidden], n)
    assert never == word_count(survivor.sft, n)


def test_assembly_beats_dynamical_dimension():
    model = symmetric()
    report = exceptional_report(model, FIXED_POINT, 8, half_half())
    phi_s, phi_u = horseshoe_potentials(model)
    value, _ = dynamical_dimension(full_shift(2), phi_s, phi_u)
    assert report.dimension_estimate >= value - 0.05


# ------------------------------------------------------------------- toral

def test_toral_report_small_grid():
    cat = ToralAutomorphism(((2, 1), (1, 1)))
    ball = TargetSet(kind="ball", centers=((0.0, 0.0),), radius=0.05)
    report = toral_exceptional_report(cat, ball, grid=512, steps=8,
                                      scales=[2.0 ** -k for k in range(2, 7)])
    assert report.bounds["thmE_dim"] == pytest.approx(2.0)
    assert report.verdicts["thmE_dim"]["verdict"] == "satisfied"
    assert report.dimension_estimate >= 1.9
    assert report.verdicts["thmA_entropy"]["verdict"] == "not-applicable"


# ------------------------------------------------------------ serialization

def test_report_json_deterministic_and_ordered():
    report = exceptional_report(symmetric(), FIXED_POINT, 5, half_half())
    first = report_to_json(report)
    second = report_to_json(exceptional_report(symmetric(), FIXED_POINT, 5, half_half()))
    assert first == second
    record = json.loads(first)
    assert list(record)[:4] == ["model", "target", "depth", "seed"]
    assert record["phase_convention"] == "itinerary starts at the point itself"


def test_reports_csv_shape():
    reports = sweep_depth(symmetric(), FIXED_POINT, [2, 3, 4], half_half())
    csv = reports_to_csv(reports)
    lines = csv.strip().splitlines()
    assert lines[0] == "depth,entropy,d_u,bound,margin"
    assert len(lines) == 4
    assert lines[1].startswith("2,")


def test_report_json_empty_sentinel():
    target = TargetSet(kind="cylinders", words=(Word((0,)), Word((1, 1))))
    report = exceptional_report(symmetric(), target, 2, half_half())
    record = json.loads(report_to_json(report))
    assert record["survivor_empty"] is True
    assert record["survivor_entropy"] is None
