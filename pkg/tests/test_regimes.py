import numpy as np
import pytest

from conftest import p1
from replidyn.dynamics import IntegratorConfig, integrate
from replidyn.model import ModelParams, normalized_matrix
from replidyn.regimes import (
    AssumptionsViolated,
    DegenerateParameters,
    check_r4_consistency,
    classify_regime,
    condition_margins,
    estimate_basins,
    lattice_points,
    prediction_check,
    sample_region,
)
from replidyn.verify import random_params


def test_regime_examples(P1, P4, Q):
    r = classify_regime(P1)
    assert (r.regime, r.interior_exists, r.bomze_portrait) == ("R1", True, "PP7")
    r = classify_regime(P4)
    assert (r.regime, r.interior_exists, r.bomze_portrait) == ("R4", False, "PP42")
    r = classify_regime(Q)
    assert (r.regime, r.interior_exists, r.bomze_portrait) == ("R1", False, "PP35")


def test_regimes_2_and_3():
    # under P1, e1 is a sink for alpha < 1.5 and e2 for alpha < eta * l = 1.25
    assert classify_regime(p1(alpha=1.4)).regime == "R2"
    r3 = classify_regime(p1(alpha=2.0, eta=6.0))
    assert r3.regime == "R3"
    assert r3.bomze_portrait in ("PP37", "PP9")


def test_refuses_without_assumptions():
    with pytest.raises(AssumptionsViolated):
        classify_regime(p1(eta=0.5))


def test_refuses_at_equality():
    with pytest.raises(DegenerateParameters):
        classify_regime(p1(eta=1.0))
    # d = alpha*l - 0.75 vanishes at alpha = 1.5
    with pytest.raises(DegenerateParameters):
        classify_regime(p1(alpha=1.5))


def test_r4_consistency(P4, rng):
    assert check_r4_consistency(P4)
    found = 0
    while found < 500:
        p = random_params(rng, assumptions=True, margin=1e-9)
        if classify_regime(p).regime != "R4":
            continue
        found += 1
        assert check_r4_consistency(p)
    with pytest.raises(ValueError):
        check_r4_consistency(p1())


def test_label_stable_under_tiny_perturbations(rng):
    checked = 0
    while checked < 100:
        p = random_params(rng, assumptions=True, margin=1e-3)
        label = classify_regime(p)
        for name, v in p.as_dict().items():
            bumped = p.replace(**{name: v + rng.choice([-1, 1]) * 5e-10})
            assert classify_regime(bumped) == label
        checked += 1


def test_condition_margins_p1(P1):
    m = condition_margins(P1)
    assert m == pytest.approx({"a": -0.875, "b": 0.375, "d": -0.5, "e_minus_b": -0.375,
                               "interior": 0.1875})


def test_lattice_points():
    pts = lattice_points(10)
    assert len(pts) == 36  # (R-1)(R-2)/2
    assert np.all(pts > 0)
    np.testing.assert_allclose(pts.sum(axis=1), 1, atol=1e-15)


def test_basins_p4_all_e3(P4):
    bm = estimate_basins(P4, 50)
    assert bm.fractions["e3"] == 1.0
    assert bm.unresolved == 0


def test_basins_p1_three_attractors(P1):
    bm = estimate_basins(P1, 50)
    assert all(bm.fractions[v] > 0 for v in ("e1", "e2", "e3"))
    assert abs(sum(bm.fractions.values()) - 1) < 1e-12
    assert bm.unresolved < 0.01 * len(bm.labels)
    targets = {"e1": [1, 0, 0], "e2": [0, 1, 0], "e3": [0, 0, 1]}
    for lab, xf in zip(bm.labels, bm.final_states):
        if lab != "unresolved":
            assert np.linalg.norm(xf - targets[lab]) < 1e-6


def test_unresolved_points_sit_on_a_separatrix(P1):
    # lattice points on x2 = 1 - 3 x1 lie on the stable manifold of the e1-e3 saddle
    bm = estimate_basins(P1, 50)
    for x, lab, xf in zip(bm.points, bm.labels, bm.final_states):
        if lab == "unresolved":
            assert np.linalg.norm(xf - [1 / 3, 0, 2 / 3]) < 1e-3 or \
                np.linalg.norm(xf - [0.3, 0.7, 0]) < 1e-3 or \
                np.linalg.norm(xf - [0, 0.4, 0.6]) < 1e-3


def test_basins_independent_of_threads(P1):
    one = estimate_basins(P1, 30, threads=1)
    many = estimate_basins(P1, 30, threads=7)
    assert one.labels == many.labels
    assert np.array_equal(one.final_states, many.final_states)


def test_basin_labels_only_for_sinks(P4):
    bm = estimate_basins(P4, 20)
    assert set(bm.labels) <= {"e3", "unresolved"}


def _near_line(params, x3, offset):
    # point with the given NP share, offset along the edge direction from a*x1 + b*x2 = 0
    B = normalized_matrix(params)
    t = B.b / (B.b - B.a) + offset
    return (t * (1 - x3), (1 - t) * (1 - x3), x3)


def test_low_cross_rewards_send_the_edge_midline_to_e3(P1, Q):
    # under P1 the region next to the e1-e2 edge splits between e1 and e2
    assert integrate(P1, _near_line(P1, 0.1, -1e-4)).outcome.label == "e2"
    assert integrate(P1, _near_line(P1, 0.1, 1e-4)).outcome.label == "e1"
    # with low cross rewards the same neighbourhood of the midline flows to e3
    for off in (-1e-4, 0.0, 1e-4):
        assert integrate(Q, _near_line(Q, 0.1, off)).outcome.label == "e3"
    # on the invariant line itself P1 runs into the edge saddle instead
    tr = integrate(P1, _near_line(P1, 0.1, 0.0))
    assert tr.outcome.label != "e3"
    assert np.min(np.linalg.norm(tr.states - [0.3, 0.7, 0.0], axis=1)) < 1e-3


def test_prediction_check_p1(P1):
    rep = prediction_check(P1, 300)
    assert rep.counts["e1"] == 0 and rep.sign_changes == 0 and rep.holds
    mirror = prediction_check(P1, 300, region="sn")
    assert mirror.counts["e2"] == 0 and mirror.holds


def test_sample_region_excludes_the_line(P1):
    B = normalized_matrix(P1)
    pts = sample_region(P1, 500)
    g = B.a * pts[:, 0] + B.b * pts[:, 1]
    assert np.all(g > 1e-6)
    pts = sample_region(P1, 500, region="sn")
    assert np.all(B.a * pts[:, 0] + B.b * pts[:, 1] < -1e-6)


def test_prediction_check_refuses_without_assumptions():
    with pytest.raises(AssumptionsViolated):
        prediction_check(p1(eta=0.5), 10)
