"""Oscillating orbit invariants, stationary solutions, periodicity detection."""

import math
import warnings

import numpy as np
import pytest
from scipy.linalg import null_space
from scipy.optimize import brentq

from lagsol import (
    OrbitConditioningWarning,
    OrbitProfile,
    PeriodicSpec,
    SolitonParams,
    brakke_family,
    classify_case,
    compute_orbit,
    critical_point,
    detect_periodicity,
    hamiltonian_stationary,
    holonomies,
    limit_gamma,
    limit_period,
    period,
    rebase,
    reduced_rhs,
    reduction_check,
    sample_reduced,
    search_periodic_data,
    stationary_spec,
    topology_tag,
    turning_points,
)
from lagsol.errors import CaseMismatch, NonConvergence, ValidationError

from conftest import make_orbit_spec


def spec_of(lambdas, alphas, A, alpha=0.0, psi=None):
    return PeriodicSpec(SolitonParams(lambdas, 1.0, alpha), alphas, A, psi)


def test_spec_validation():
    with pytest.raises(ValidationError):
        spec_of((-1.0,), (1.0,), 0.5)                       # no positive slot
    with pytest.raises(ValidationError):
        spec_of((1.0, 1.0), (1.0, 1.0), 0.5, alpha=1.0)     # compact needs alpha < 0
    with pytest.raises(ValidationError):
        spec_of((1.0, -1.0), (1.0, -2.0), 0.5)
    with pytest.raises(ValidationError):
        spec_of((1.0, -1.0), (1.0, 2.0), 0.0)


def test_critical_point_examples():
    # 1/(1+u) = 1/(3-u) at u = 1
    spec = spec_of((1.0, -1.0), (1.0, 3.0), 0.5)
    assert critical_point(spec) == pytest.approx(1.0, abs=1e-12)
    spec2 = spec_of((1.0, 1.0), (1.0, 1.0), 0.5, alpha=-2.0)
    assert critical_point(spec2) == pytest.approx(0.0, abs=1e-12)


def test_critical_point_is_a_maximum(rng):
    for lam, alpha in (((1.0, -1.0), 0.0), ((1.0, -1.0), 1.0),
                       ((1.0, 1.0), -1.5), ((1.0, 1.0, -1.0), 0.5)):
        spec = make_orbit_spec(rng, lam, alpha)
        u_star = critical_point(spec)
        lo, hi = spec.band()
        assert lo < u_star < hi if math.isfinite(hi) else u_star > lo
        assert spec.dlog_G(u_star) == pytest.approx(0.0, abs=1e-10)
        h = 1e-5
        second = (spec.log_G(u_star + h) - 2 * spec.log_G(u_star)
                  + spec.log_G(u_star - h)) / (h * h)
        assert second < 0


def test_rebase_moves_critical_point_to_zero():
    spec = spec_of((1.0, -1.0), (1.0, 3.0), 0.5, alpha=0.7)
    based, shift = rebase(spec)
    assert shift == pytest.approx(critical_point(spec))
    assert critical_point(based) == pytest.approx(0.0, abs=1e-12)
    assert based.A == pytest.approx(spec.A * math.exp(-0.5 * 0.7 * shift))


def test_rebase_preserves_orbit_invariants():
    spec = spec_of((1.0, -1.0), (1.0, 3.0), 0.5, alpha=0.4)
    based, shift = rebase(spec)
    orb = compute_orbit(spec)
    orb_based = compute_orbit(based)
    assert orb.S == pytest.approx(orb_based.S, rel=1e-9)
    np.testing.assert_allclose(orb.gamma, orb_based.gamma, rtol=1e-9)
    assert orb.u1 == pytest.approx(orb_based.u1 + shift, abs=1e-9)
    assert orb.u2 == pytest.approx(orb_based.u2 + shift, abs=1e-9)


def test_classify_case_branches():
    osc = spec_of((1.0, -1.0), (1.0, 3.0), 0.5)
    assert classify_case(osc) == "oscillating"
    params = SolitonParams((1.0, -1.0), 1.0, 0.0)
    stat = stationary_spec(params, (1.0, 1.0))
    assert stat.A == pytest.approx(1.0)  # G(0) = 1 for unit radii
    assert classify_case(stat) == "hamiltonian_stationary"
    with pytest.raises(ValidationError):
        classify_case(spec_of((1.0, -1.0), (1.0, 1.0), 1.5))  # A above the ceiling


def test_stationary_profile_closed_form():
    params = SolitonParams((1.0, -1.0), 1.0, 0.0)
    spec = stationary_spec(params, (1.0, 1.0))
    prof = hamiltonian_stationary(spec)
    for s in (0.0, 0.3, 1.7, -2.0):
        np.testing.assert_allclose(prof.phis_of(s), [-s, s], atol=1e-14)
        assert prof.theta_of(s) == pytest.approx(-math.pi / 2)
        assert prof.u_of(s) == 0.0
    # winding phases solve the phase system exactly
    y = np.array([0.0, -0.5, 0.5, -math.pi / 2])
    rhs = reduced_rhs(spec.trajectory_spec(), y)
    np.testing.assert_allclose(rhs, [0.0, -1.0, 1.0, 0.0], atol=1e-14)


def test_stationary_detection_minimal_period():
    """Winding ratios (1, -1): closes after T = 2 pi / (A |rho_1|)."""
    params = SolitonParams((1.0, -1.0), 1.0, 0.0)
    spec = stationary_spec(params, (1.0, 1.0))
    orbit = compute_orbit(spec)
    verdict = detect_periodicity(orbit)
    assert verdict.periodic
    assert verdict.case == "hamiltonian_stationary"
    assert verdict.p == (1, -1)
    assert verdict.T == pytest.approx(2.0 * math.pi / spec.A, rel=1e-12)
    prof = hamiltonian_stationary(spec)
    np.testing.assert_allclose(prof.w_of(verdict.T), prof.w_of(0.0), atol=1e-12)


def test_stationary_detection_irrational_ratio():
    # compact case: the rebased radii stay incommensurable (a balanced pair
    # with zero drift would rebase to equal radii and always close up)
    params = SolitonParams((1.0, 1.0), 1.0, -1.0)
    spec = stationary_spec(params, (1.0, math.sqrt(2.0)))
    verdict = detect_periodicity(compute_orbit(spec))
    assert not verdict.periodic


def test_turning_points_against_bisection_oracle():
    A = 0.5
    spec = spec_of((1.0, 1.0), (1.0, 1.0), A, alpha=-2.0)

    def gap(u):
        return (1.0 + u) ** 2 * math.exp(-2.0 * u) - A * A

    u1_ref = brentq(gap, -1.0 + 1e-13, 0.0, xtol=1e-14)
    u2_ref = brentq(gap, 0.0, 50.0, xtol=1e-14)
    u1, u2 = turning_points(spec)
    assert u1 == pytest.approx(u1_ref, abs=1e-10)
    assert u2 == pytest.approx(u2_ref, abs=1e-10)
    assert u1 < 0.0 < u2


def test_turning_points_shrink_toward_stationary():
    G0 = 1.0
    widths = []
    for eps in (1e-4, 2.5e-5):
        A = math.sqrt(G0 * (1.0 - eps))
        u1, u2 = turning_points(spec_of((1.0, -1.0), (1.0, 1.0), A))
        widths.append(u2 - u1)
    # width scales like sqrt(eps): quartering eps halves the width
    assert widths[0] / widths[1] == pytest.approx(2.0, rel=1e-3)


def test_orbit_matches_ode_round_trip():
    """After one period S the height returns and each phase advances by its
    holonomy; the angle advances by the holonomy sum."""
    spec = spec_of((1.0, -1.0), (1.0, 3.0), 0.5, alpha=0.6)
    orbit = compute_orbit(spec)
    assert orbit.case == "oscillating"
    assert orbit.u1 < 0.0 < orbit.u2
    traj = sample_reduced(spec.trajectory_spec(), [0.0, orbit.S])
    y0, yS = traj.y[0], traj.y[-1]
    assert yS[0] - y0[0] == pytest.approx(0.0, abs=1e-6)
    np.testing.assert_allclose(yS[1:3] - y0[1:3], orbit.gamma, atol=1e-6)
    assert yS[3] - y0[3] == pytest.approx(orbit.gamma_sum, abs=1e-6)


def test_holonomy_signs_follow_slot_signs():
    spec = spec_of((1.0, 1.0, -1.0), (1.0, 2.0, 3.0), 0.4, alpha=0.2)
    gam = holonomies(spec)
    assert gam[0] < 0 and gam[1] < 0 and gam[2] > 0


def test_minimal_case_holonomies_cancel():
    spec = spec_of((1.0, -1.0), (0.7, 2.3), 0.45, alpha=0.0)
    gam = holonomies(spec)
    assert abs(gam.sum()) < 1e-8


def test_angle_advance_sign_tracks_alpha():
    base = ((1.0, -1.0), (1.0, 2.0), 0.5)
    pos = compute_orbit(spec_of(*base, alpha=0.8)).gamma_sum
    neg = compute_orbit(spec_of(*base, alpha=-0.8)).gamma_sum
    assert pos > 1e-3
    assert neg < -1e-3


def test_limit_gamma_one_dimensional():
    spec = spec_of((1.0,), (2.0,), 0.5, alpha=-1.0)
    np.testing.assert_allclose(limit_gamma(spec), [-math.sqrt(2.0) * math.pi],
                               rtol=1e-14)


def test_limit_gamma_balanced_pair():
    spec = spec_of((1.0, -1.0), (1.0, 1.0), 0.5)
    np.testing.assert_allclose(limit_gamma(spec), [-math.pi, math.pi], rtol=1e-14)
    assert limit_period(spec) == pytest.approx(math.pi, rel=1e-14)


def test_harmonic_limits_attained():
    """Near the stationary ceiling the computed S and gamma approach the
    closed-form limits."""
    params = SolitonParams((1.0, -1.0), 1.0, 0.0)
    alphas = (1.0, 2.0)
    stat = stationary_spec(params, alphas)
    near = PeriodicSpec(params, alphas, stat.A * (1.0 - 1e-6))
    orbit = compute_orbit(near)
    np.testing.assert_allclose(orbit.gamma, limit_gamma(near), atol=1e-2)
    assert orbit.S == pytest.approx(limit_period(near), abs=1e-2)


def test_abresch_langer_interval_spot_checks():
    """n = 1 holonomy lies strictly between -sqrt(2) pi and -pi."""
    for frac in (0.2, 0.6, 0.95):
        spec = spec_of((1.0,), (1.0,), frac, alpha=-1.0)
        g1 = float(holonomies(spec)[0])
        assert -math.sqrt(2.0) * math.pi < g1 < -math.pi


def test_conditioning_warning_near_stationary():
    params = SolitonParams((1.0, -1.0), 1.0, 0.0)
    stat = stationary_spec(params, (1.0, 1.0))
    marginal = PeriodicSpec(params, (1.0, 1.0), stat.A * (1.0 - 1e-11))
    with pytest.warns(OrbitConditioningWarning):
        period(marginal)
    healthy = PeriodicSpec(params, (1.0, 1.0), 0.5 * stat.A)
    with warnings.catch_warnings():
        warnings.simplefilter("error", OrbitConditioningWarning)
        period(healthy)


def test_G_structure(rng):
    """G positive on the band, increasing left of the critical point,
    decreasing right of it, vanishing at the ends."""
    spec = make_orbit_spec(rng, (1.0, -1.0), 0.5)
    based, _ = rebase(spec)
    lo, hi = based.band()
    us = lo + (hi - lo) * np.linspace(1e-6, 1.0 - 1e-6, 201)
    logG = np.array([based.log_G(u) for u in us])
    assert np.all(np.isfinite(logG))
    left = us < 0
    assert np.all(np.diff(logG[left]) > 0)
    assert np.all(np.diff(logG[~left]) < 0)
    assert based.log_G(lo + 1e-12 * (hi - lo)) < logG.max() - 10


def test_orbit_confinement_long_time():
    spec = spec_of((1.0, -1.0), (1.0, 2.0), 0.7, alpha=0.3)
    orbit = compute_orbit(spec)
    traj = sample_reduced(spec.trajectory_spec(), np.linspace(-25.0, 25.0, 201))
    assert traj.u.min() >= orbit.u1 - 1e-9
    assert traj.u.max() <= orbit.u2 + 1e-9


def test_sin_phase_gap_positive_along_orbit():
    """sin(phi - theta) keeps one sign on orbits with A > 0."""
    spec = spec_of((1.0, 1.0), (1.0, 1.4), 0.6, alpha=-1.0)
    traj = sample_reduced(spec.trajectory_spec(), np.linspace(-8.0, 8.0, 81))
    d = traj.phi - traj.theta
    assert np.all(np.sin(d) > 0)


def test_balanced_pair_is_isochronous():
    """Closed-form oracle: for lambdas (1, -1), equal base radii a and drift
    zero, the orbit integrals reduce to int du/((a +- u) sqrt(B^2 - u^2)) with
    B^2 = a^2 - A^2, whose value is pi/A.  Hence gamma = (-pi, pi) and S = pi
    for every a and A, independent of the data."""
    for a, A in ((1.0, 0.3), (2.0, 0.5), (0.7, 0.69)):
        spec = spec_of((1.0, -1.0), (a, a), A)
        np.testing.assert_allclose(holonomies(spec), [-math.pi, math.pi],
                                   atol=1e-10)
        assert period(spec) == pytest.approx(math.pi, abs=1e-10)


def test_holonomy_map_restricted_jacobian_full_rank(rng):
    """At generic data the holonomy map, differentiated along the tangent
    space of the critical-point constraint, is an isomorphism.  Drift zero is
    excluded: there the holonomy sum vanishes identically and the derivative
    is singular by construction."""
    for _ in range(5):
        lam = ((1.0, -1.0), (1.0, 1.0, -1.0))[int(rng.integers(0, 2))]
        n = len(lam)
        alphas = np.exp(rng.uniform(math.log(0.6), math.log(2.5), n))
        alpha = -sum(l / a for l, a in zip(lam, alphas))
        if abs(alpha) < 0.05:
            alphas[0] *= 1.3
            alpha = -sum(l / a for l, a in zip(lam, alphas))
        params = SolitonParams(lam, 1.0, alpha)
        probe = PeriodicSpec(params, tuple(alphas), 1e-8)
        A = float(rng.uniform(0.35, 0.8)) * math.exp(0.5 * probe.log_G(0.0))

        def gamma_at(alph, AA):
            return holonomies(PeriodicSpec(params, tuple(alph), AA))

        # basis of {(x, y): sum lambda_j x_j / alpha_j^2 = 0}, y the A-slot
        w = np.array([l / a ** 2 for l, a in zip(lam, alphas)])
        tan = null_space(w[None, :])
        h = 1e-5
        cols = []
        for k in range(tan.shape[1]):
            d = tan[:, k]
            cols.append((gamma_at(alphas + h * d, A)
                         - gamma_at(alphas - h * d, A)) / (2 * h))
        cols.append((gamma_at(alphas, A + h) - gamma_at(alphas, A - h)) / (2 * h))
        sv = np.linalg.svd(np.column_stack(cols), compute_uv=False)
        assert sv[-1] > 1e-6 * sv[0]


def test_detect_periodicity_engineered_rational():
    spec = search_periodic_data((1.0, -1.0), 0.0, (-math.pi, math.pi))
    orbit = compute_orbit(spec)
    verdict = detect_periodicity(orbit)
    assert verdict.periodic
    assert verdict.r == 2
    assert verdict.p == (-1, 1)
    assert verdict.T == pytest.approx(2.0 * orbit.S)


def test_detect_periodicity_generic_data_is_quasi_periodic():
    # nonzero drift so the holonomies are not pinned at (-pi, pi)
    spec = spec_of((1.0, -1.0), (1.0, 3.0), 0.8, alpha=0.6)
    verdict = detect_periodicity(compute_orbit(spec))
    assert not verdict.periodic
    assert verdict.r is None and verdict.T is None
    assert verdict.max_residual > verdict.tol


def test_search_recovers_reference_holonomies():
    """Target the holonomies of a known spec; the search lands on its
    gauge-fixed (rebased) representative."""
    known = spec_of((1.0, -1.0), (1.0, 3.0), 0.8, alpha=0.6)
    target = holonomies(known)
    found = search_periodic_data((1.0, -1.0), 0.6, target)
    np.testing.assert_allclose(holonomies(found), target, atol=1e-8)
    based, _ = rebase(known)
    np.testing.assert_allclose(found.alphas, based.alphas, rtol=1e-5)
    assert found.A == pytest.approx(based.A, rel=1e-5)


def test_search_rejects_unnormalized_lambdas():
    with pytest.raises(ValidationError):
        search_periodic_data((2.0, -1.0), 0.0, (-1.0, 1.0))


def test_search_unattainable_target_raises():
    # holonomy sums must be positive when alpha > 0; this target sums to zero
    with pytest.raises(NonConvergence):
        search_periodic_data((1.0, -1.0), 1.0, (-math.pi, math.pi), max_iter=12)


def test_reduction_to_fewer_slots():
    """Appending a large-radius negative slot perturbs the surviving holonomies
    at rate 1/alpha_n; the halving is the first-order signature."""
    base = spec_of((1.0, -1.0), (1.0, 3.0), 0.8)
    recs = reduction_check(base, [1e4, 2e4])
    assert recs[0]["deviation"] < 1e-2
    assert recs[0]["deviation"] / recs[1]["deviation"] == pytest.approx(2.0, rel=1e-2)
    np.testing.assert_allclose(recs[1]["gamma"][:-1], recs[1]["gamma_ref"], atol=1e-3)
    assert abs(recs[1]["gamma"][-1]) < 1e-3


def test_reduction_mirror_direction():
    base = spec_of((1.0, -1.0), (1.0, 3.0), 0.8)
    recs = reduction_check(base, [1e4, 2e4], mirror=True)
    assert recs[0]["deviation"] < 1e-2
    assert recs[0]["deviation"] / recs[1]["deviation"] == pytest.approx(2.0, rel=1e-2)
    np.testing.assert_allclose(recs[1]["gamma"][1:], recs[1]["gamma_ref"], atol=1e-3)
    assert abs(recs[1]["gamma"][0]) < 1e-3


def test_topology_tags():
    assert topology_tag(spec_of((1.0, 1.0), (1.0, 1.0), 0.5, alpha=-1.0)) == "S1 x S1"
    assert topology_tag(spec_of((1.0, -1.0, -1.0), (1.0, 2.0, 2.0), 0.3)) \
        == "S1 x S0 x R2"


def test_brakke_family_slices():
    spec = spec_of((1.0, -1.0), (1.0, 2.0), 0.5)
    plus = brakke_family(spec, 1.0)
    assert plus.topology == topology_tag(spec)
    assert not plus.singular
    minus = brakke_family(spec, -1.0)
    assert minus.topology == "S1 x S0 x R1"
    cone = brakke_family(spec, 0.0)
    assert cone.singular
    assert "cone" in cone.topology
    compact = spec_of((1.0, 1.0), (1.0, 1.0), 0.5, alpha=-1.0)
    with pytest.raises(CaseMismatch):
        brakke_family(compact, 1.0)


def test_orbit_profile_tracks_reduced_system():
    # the profile is gauge-fixed: it integrates from the rebased base point
    spec = spec_of((1.0, -1.0), (1.0, 3.0), 0.5, alpha=0.6)
    prof = OrbitProfile(spec)
    based, _ = rebase(spec)
    traj = sample_reduced(based.trajectory_spec(), [0.9])
    np.testing.assert_allclose(prof.w_of(0.9),
                               traj.radii()[0] * np.exp(1j * traj.phis[0]),
                               atol=1e-8)
    assert prof.theta_of(0.9) == pytest.approx(traj.theta[0], abs=1e-8)
    assert prof.u_of(0.9) == pytest.approx(traj.u[0], abs=1e-8)
