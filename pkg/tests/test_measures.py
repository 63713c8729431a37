import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiemzi.interferometry import DetectorModel, tie_fringe, unbalanced_fringe
from tiemzi.measures import (
    DualityReport,
    Verdict,
    distinguishability_from_overlap,
    duality_audit,
    ellipse_at_max_distinguishability,
    max_distinguishability_lengths,
    purity,
    sd_ellipse_bound,
    sensitivity,
    standard_sensitivity,
    standard_wp_bound,
    standard_ww_small_alpha,
    tie_distinguishability,
    tie_small_shift,
    wp_probability,
    ww_probability,
)
from tiemzi.states import arm_states, balanced_tie


@pytest.mark.parametrize("ov, D", [(0, 1.0), (1, 0.0), (1j, 0.0), (0.6, 0.8), (0.6j, 0.8)])
def test_distinguishability_from_overlap(ov, D):
    assert distinguishability_from_overlap(ov) == pytest.approx(D, abs=1e-15)


def test_distinguishability_rejects_large_overlap():
    with pytest.raises(ValueError):
        distinguishability_from_overlap(1.01)


@settings(max_examples=300)
@given(m=st.floats(0, 1), ph=st.floats(-math.pi, math.pi))
def test_overlap_pythagoras(m, ph):
    ov = m * complex(math.cos(ph), math.sin(ph))
    assert distinguishability_from_overlap(ov) ** 2 + abs(ov) ** 2 == pytest.approx(1.0, abs=1e-15)


def test_tie_distinguishability_examples():
    assert tie_distinguishability(balanced_tie(3.0), math.pi / 2) == pytest.approx(1.0, abs=1e-15)
    for L in np.linspace(-5, 5, 11):
        assert tie_distinguishability(balanced_tie(3.0, 1.0), L) == 0.0
    assert tie_distinguishability(balanced_tie(3.0, 0.25), math.pi / 2) == pytest.approx(math.sqrt(3) / 2, abs=1e-15)
    assert math.sqrt(3) / 2 == pytest.approx(0.86603, abs=5e-6)


def test_purity_examples(rng):
    tie = balanced_tie(3.0)
    a, _ = arm_states(tie, 0.3, 0.0)
    assert purity(a, a) == pytest.approx(1.0, abs=1e-15)
    a, b = arm_states(tie, math.pi / 2, 0.0)
    assert purity(a, b) == pytest.approx(0.0, abs=1e-15)
    for _ in range(1000):
        tie = balanced_tie(rng.uniform(1, 10), rng.uniform())
        L = rng.uniform(-10, 10)
        a, b = arm_states(tie, L, 0.0)
        assert tie_distinguishability(tie, L) ** 2 + purity(a, b) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_ww_probability():
    assert ww_probability(1.0) == 1.0
    assert ww_probability(0.0) == 0.5
    assert ww_probability(0.9) == pytest.approx(0.95, abs=1e-15)
    with pytest.raises(ValueError):
        ww_probability(1.1)


def test_wp_probability():
    assert wp_probability(1.0, "orthogonal") == 1.0
    assert wp_probability(0.37, "discrete", 0.0) == 0.5
    assert wp_probability(1.0, "discrete", math.pi / 2) == pytest.approx(1.0, abs=1e-15)
    # discrete mode is exactly the port + probability of the unbalanced fringe at k*L0 = -pi/2
    V, kdl = 0.6, 0.2
    assert wp_probability(V, "discrete", kdl) == pytest.approx(unbalanced_fringe(V, 1.0, -math.pi / 2, kdl)[0], abs=1e-15)
    with pytest.raises(ValueError):
        wp_probability(-0.1)
    with pytest.raises(ValueError):
        wp_probability(0.5, "discrete")


def test_sensitivity_examples():
    assert sensitivity(balanced_tie(3.0), math.pi / 2) == pytest.approx(1 / 3, abs=1e-15)
    assert sensitivity(balanced_tie(5.0, 0.3), 0.0) == 0.0
    assert sensitivity(balanced_tie(3.0, 0.75), math.pi / 2) == pytest.approx(0.0, abs=1e-15)


def test_sensitivity_closed_form_for_kappa_three(rng):
    for _ in range(200):
        p1 = rng.uniform()
        x = rng.uniform(-10, 10)
        expected = abs(p1 / 3 * math.sin(x) + (1 - p1) * math.sin(3 * x))
        assert sensitivity(balanced_tie(3.0, p1), x) == pytest.approx(expected, abs=1e-14)


def test_sensitivity_matches_finite_difference(rng):
    """Central difference of the fringe with h = 1e-6/k_max, 1e-6 relative."""
    checked = 0
    for _ in range(1000):
        tie = balanced_tie(rng.uniform(1, 10), rng.uniform(), k1=rng.uniform(0.2, 3))
        L = rng.uniform(-10, 10)
        h = 1e-6 / tie.k_max
        fd = (2 / tie.k_max) * abs(tie_fringe(tie, L + h)[0] - tie_fringe(tie, L - h)[0]) / (2 * h)
        S = sensitivity(tie, L)
        if S < 1e-3:
            # relative error is meaningless at a flat point; absolute check instead
            assert fd == pytest.approx(S, abs=1e-8)
            continue
        assert fd == pytest.approx(S, rel=1e-6)
        checked += 1
    assert checked > 900


def test_small_shift_examples():
    r = tie_small_shift(1.0, 0.0)
    assert (r.P_WW_approx, r.P_WP_approx) == (1.0, 0.5)
    assert r.P_WW_exact == pytest.approx(1.0, abs=1e-15)
    assert r.P_WP_exact == pytest.approx(0.5, abs=1e-15)

    r = tie_small_shift(1.0, 0.01)
    assert r.P_WW_approx == pytest.approx(0.999975, abs=1e-15)
    assert r.P_WP_approx == pytest.approx(0.505, abs=1e-15)
    assert r.P_WW_exact == pytest.approx((1 + math.cos(0.01)) / 2, abs=1e-15)
    assert r.P_WP_exact == pytest.approx(0.5 * (1 + 0.5 * (math.sin(0.03) - math.sin(0.01))), abs=1e-15)
    assert r.P_WP_exact == pytest.approx(0.50500, abs=5e-6)


def test_small_shift_sign_symmetric():
    assert tie_small_shift(1.0, -0.02) == tie_small_shift(1.0, 0.02)


def test_small_shift_remainders():
    """Exact Taylor remainders: eps^4/48 for P_WW and 13 eps^3/12 for P_WP."""
    for eps in np.linspace(1e-3, 0.05, 50):
        r = tie_small_shift(1.0, eps)
        assert abs(r.P_WW_exact - r.P_WW_approx) <= eps**3
        assert abs(r.P_WW_exact - r.P_WW_approx) == pytest.approx(eps**4 / 48, rel=1e-2)
        assert abs(r.P_WP_exact - r.P_WP_approx) == pytest.approx(13 * eps**3 / 12, rel=2e-3)


def test_small_shift_guards():
    with pytest.raises(ValueError):
        tie_small_shift(1.0, 0.5)
    with pytest.raises(ValueError):
        tie_small_shift(1.0, 0.01, balanced_tie(5.0))
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        tie_small_shift(1.0, 0.2)
    assert any("loose" in str(x.message) for x in w)


def test_standard_wp_bound_examples():
    det0 = DetectorModel.from_alpha(0.0)  # D = 1
    assert standard_wp_bound(det0, 1.0, 0.3)[0] == pytest.approx(0.5, abs=1e-15)
    det = DetectorModel.from_alpha(math.pi / 2)  # D = 0
    assert standard_wp_bound(det, 1.0, 0.3)[0] == pytest.approx(0.5 * (1 + math.sin(0.3)), abs=1e-15)
    det = DetectorModel.from_alpha(0.1)
    exact, small = standard_wp_bound(det, 1.0, 0.01)
    assert exact == pytest.approx(0.5 * (1 + math.sin(0.1) * math.sin(0.01)), abs=1e-15)
    assert exact == pytest.approx(0.50050, abs=5e-6)
    assert small == pytest.approx(0.5 * (1 + 0.01 * 0.1), abs=1e-15)


def test_standard_ww_small_alpha():
    for a in (1e-3, 1e-2, 0.05):
        assert ww_probability(abs(math.cos(a))) == pytest.approx(standard_ww_small_alpha(a), abs=a**4)


def test_duality_audit_examples():
    r = duality_audit(0.95, 0.5, "orthogonal")
    assert r.verdict is Verdict.SATISFIED and r.lhs == pytest.approx(0.81, abs=1e-15)
    r = duality_audit(1.0, 1.0, "orthogonal")
    assert r.verdict is Verdict.VIOLATED and r.lhs == 2.0
    s = tie_small_shift(1.0, 0.01)
    r = duality_audit(s.P_WW_exact, s.P_WP_exact, "discrete", 0.01)
    assert r.verdict is Verdict.VIOLATED and r.lhs >= 1.99


def test_duality_audit_rejects_out_of_range():
    with pytest.raises(ValueError):
        duality_audit(0.3, 0.6)
    with pytest.raises(ValueError):
        duality_audit(0.8, 0.6, "discrete", 0.0)


def test_report_verdicts():
    assert DualityReport("x", 1.0 + 5e-10, 1.0).verdict is Verdict.TIGHT
    assert DualityReport("x", 1.0 + 2e-9, 1.0).verdict is Verdict.VIOLATED
    assert DualityReport("x", 0.5, 1.0).slack == 0.5


def test_standard_inputs_never_violate_discrete_duality(rng):
    for _ in range(2000):
        det = DetectorModel.from_alpha(rng.uniform(0, math.pi / 2))
        kdl = rng.uniform(1e-6, 1.5)
        # port + at k*L0 = -pi/2 is the sign-guess probability for the positive shift
        P_WP = unbalanced_fringe(det.visibility, 1.0, -math.pi / 2, kdl)[0]
        r = duality_audit(ww_probability(det.distinguishability), P_WP, "discrete", kdl)
        assert r.verdict is not Verdict.VIOLATED


def test_tie_inputs_always_violate_discrete_duality(rng):
    for eps in rng.uniform(1e-6, 0.1, 2000):
        s = tie_small_shift(1.0, eps)
        assert duality_audit(s.P_WW_exact, s.P_WP_exact, "discrete", eps).verdict is Verdict.VIOLATED


def test_sd_ellipse_examples():
    assert sd_ellipse_bound(1 / 3, 1.0, 3.0).verdict is Verdict.TIGHT
    r = sd_ellipse_bound(0.0, 0.0, 3.0)
    assert r.verdict is Verdict.SATISFIED and r.lhs == pytest.approx(0.25, abs=1e-15)
    assert sd_ellipse_bound(1.0, 0.0, 1.0).verdict is Verdict.TIGHT
    r = sd_ellipse_bound(0.3, 0.4, math.inf)
    assert r.lhs == pytest.approx(((0.3 - 0.5) / 0.5) ** 2 + 0.16, abs=1e-15)
    with pytest.raises(ValueError):
        sd_ellipse_bound(0.3, 0.4, 0.5)


@pytest.mark.parametrize("kappa", [3.0, 7.0, 11.0])
def test_ellipse_tight_below_threshold(kappa):
    edge = kappa / (kappa + 1)
    for p1 in np.linspace(0, edge, 201):
        tie = balanced_tie(kappa, float(p1))
        r = sd_ellipse_bound(sensitivity(tie, math.pi / 2), tie_distinguishability(tie, math.pi / 2), kappa)
        assert abs(r.slack) <= 1e-9
    for p1 in np.linspace(edge, 1, 101)[1:]:
        tie = balanced_tie(kappa, float(p1))
        r = sd_ellipse_bound(sensitivity(tie, math.pi / 2), tie_distinguishability(tie, math.pi / 2), kappa)
        assert r.verdict is Verdict.SATISFIED and r.slack > 0


def test_kappa_one_reduces_to_circle(rng):
    for _ in range(200):
        S, D = rng.uniform(size=2)
        assert sd_ellipse_bound(S, D, 1.0).lhs == pytest.approx(S * S + D * D, abs=1e-15)


@settings(max_examples=500)
@given(alpha=st.floats(0, math.pi / 2), phi=st.floats(-10, 10))
def test_standard_sensitivity_respects_circle(alpha, phi):
    det = DetectorModel.from_alpha(alpha)
    S = standard_sensitivity(det.visibility, phi)
    assert S <= det.visibility + 1e-15
    assert sd_ellipse_bound(S, det.distinguishability, 1.0).verdict is not Verdict.VIOLATED


@pytest.mark.parametrize("kappa", [1.5, 2.0, 2.5, 4.0, 5.0, 6.3, 9.0, 13.0])
def test_ellipse_inequality_other_kappa(kappa, rng):
    """Only checked as an inequality where no equality case is derived."""
    for p1 in rng.uniform(size=50):
        r = ellipse_at_max_distinguishability(balanced_tie(kappa, float(p1)), periods=20)
        assert r.verdict is not Verdict.VIOLATED


def test_full_ellipse_form_flags_low_sensitivity():
    # kappa = 2 at its D maximum has S = 0: below the lower branch, outside the
    # quadratic form, but not above the maximal-S branch
    tie = balanced_tie(2.0)
    L = max_distinguishability_lengths(tie)[0]
    assert sensitivity(tie, L) == pytest.approx(0.0, abs=1e-15)
    assert sd_ellipse_bound(0.0, tie_distinguishability(tie, L), 2.0).verdict is Verdict.VIOLATED
    assert ellipse_at_max_distinguishability(tie).verdict is Verdict.SATISFIED


@pytest.mark.parametrize("kappa", [3.0, 7.0, 11.0])
def test_upper_branch_tight_for_three_mod_four(kappa):
    # p1 and 1 - p1 share D; the smaller weight on level 1 gives the larger S
    for p1 in np.linspace(0, 0.5, 51):
        assert ellipse_at_max_distinguishability(balanced_tie(kappa, float(p1))).verdict is Verdict.TIGHT
    for p1 in np.linspace(0.5, 1.0, 51)[1:]:
        assert ellipse_at_max_distinguishability(balanced_tie(kappa, float(p1))).verdict is Verdict.SATISFIED
