"""Regularity measures and the closed-form bound evaluators."""

import numpy as np
import pytest

from dynregret import (
    Ball,
    EmptyHull,
    FunctionSequence,
    GradientDescent,
    MultiGradientDescent,
    NotAdmissible,
    OptimisticNewton,
    OraclePredictor,
    QuadraticLoss,
    RhoOutOfRange,
    StalePredictor,
    corollary3_bound,
    evaluate_bound,
    function_variation,
    gen_alternating_center_decay,
    gen_alternating_offset,
    gen_random_walk,
    gen_static,
    gradient_prediction_variation,
    max_step,
    path_length_p,
    prediction_variation,
    regularity_report,
    run_online,
    theorem1_bound,
    theorem1_step_size,
    theorem2_bound,
    theorem2_bound_tightest,
    theorem3_bound,
    theorem5_bound,
    theorem6_bound,
)
from dynregret.regularity import EXACT, LOWER_BOUND


# ---------------------------------------------------------------------------
# Path lengths
# ---------------------------------------------------------------------------

def test_path_length_constant_minimizers():
    mins = [np.array([1.0, 2.0])] * 10
    for p in (1.0, 2.0, 4.0):
        assert path_length_p(mins, p) == 0.0


def test_path_length_alternating():
    y = np.array([0.5, -1.0])
    T = 9
    mins = [np.zeros(2) if t % 2 == 1 else y for t in range(1, T + 1)]
    assert path_length_p(mins, 2.0) == pytest.approx((T - 1) * float(y @ y), rel=1e-12)


def test_path_length_consistency_inequalities():
    seq = gen_random_walk(4, 200, 1.0, 4.0, 0.3, seed=21)
    mins = [l.center for l in seq.losses]
    cbar = max_step(mins)
    c1 = path_length_p(mins, 1.0)
    c2 = path_length_p(mins, 2.0)
    c4 = path_length_p(mins, 4.0)
    assert c2 <= cbar * c1 + 1e-9
    assert c4 <= cbar ** 2 * c2 + 1e-9


def test_path_length_single_round():
    assert path_length_p([np.zeros(3)], 2.0) == 0.0


# ---------------------------------------------------------------------------
# Function variation
# ---------------------------------------------------------------------------

def test_variation_constant_offset_family_exact():
    seq = gen_alternating_offset(2, 7, np.array([1.0, 1.0]))
    value, flag = function_variation(seq.losses, [l.center for l in seq.losses])
    assert value == 6.0
    assert flag == EXACT


def test_variation_static_sequence_zero():
    seq = gen_static(3, 9, 1.0, 2.0, seed=0)
    value, flag = function_variation(seq.losses, [np.zeros(3), np.ones(3)])
    assert value == 0.0
    assert flag == EXACT


def test_variation_decay_family_matches_hand_derivation():
    # per-pair max over {0, y} is ||y||^2 / (t - 1); sum is the harmonic tail
    y = np.array([0.8, -0.6])
    T = 40
    seq = gen_alternating_center_decay(2, T, y)
    value, flag = function_variation(seq.losses, [l.center for l in seq.losses])
    expected = sum(float(y @ y) / (t - 1) for t in range(2, T + 1))
    assert value == pytest.approx(expected, rel=1e-12)
    assert flag == LOWER_BOUND


def test_variation_probes_interior_stationary_point():
    # g = f2 - f1 = -x^2/2 + 0.2 x + 1 peaks at x = 0.2 with value 1.02,
    # above both endpoint values (0.7 at x=1, 0.3 at x=-1)
    f1 = QuadraticLoss(np.array([[2.0]]), np.array([0.0]))
    f2 = QuadraticLoss(np.array([[1.0]]), np.array([-0.2]), offset=0.98)
    value, flag = function_variation([f1, f2], [np.array([-1.0]), np.array([1.0])])
    assert value == pytest.approx(1.02, rel=1e-12)
    assert flag == LOWER_BOUND


def test_variation_rejects_empty_hull():
    seq = gen_static(2, 3, 1.0, 1.0, seed=0)
    with pytest.raises(EmptyHull):
        function_variation(seq.losses, [])


# ---------------------------------------------------------------------------
# Prediction variation
# ---------------------------------------------------------------------------

def test_prediction_variation_oracle_identically_zero():
    seq = gen_random_walk(3, 40, 1.0, 4.0, 0.2, seed=13)
    trace = run_online(seq, OptimisticNewton(np.zeros(3), OraclePredictor()))
    assert prediction_variation(trace) == 0.0


def test_prediction_variation_stale_static_zero():
    seq = gen_static(3, 20, 1.0, 2.0, seed=1)
    trace = run_online(seq, OptimisticNewton(np.ones(3), StalePredictor()))
    assert prediction_variation(trace) == 0.0


def test_prediction_variation_stale_bounded_by_derived_inequality():
    # D' <= (6 L^2/mu^2) sum ||aux_t - x*_t||^2 + (4 L^2/mu^2) C*_2
    seq = gen_random_walk(3, 60, 1.0, 4.0, 0.2, seed=14)
    trace = run_online(seq, OptimisticNewton(np.zeros(3), StalePredictor()))
    mu, L = seq.strong_convexity, seq.smoothness
    mins = trace.ledger.minimizers()
    aux_gaps = sum(
        float(np.linalg.norm(aux - m)) ** 2
        for aux, m in zip(trace.aux_history[:-1], mins[:-1])
    )
    rhs = (6 * L * L / mu ** 2) * aux_gaps + (4 * L * L / mu ** 2) * path_length_p(mins, 2.0)
    assert prediction_variation(trace) <= rhs + 1e-6


def test_gradient_prediction_diagnostic():
    seq = gen_random_walk(3, 15, 1.0, 4.0, 0.2, seed=15)
    oracle = run_online(seq, OptimisticNewton(np.zeros(3), OraclePredictor()))
    first_grad_sq = float(np.linalg.norm(seq.loss(1).grad(np.zeros(3)))) ** 2
    assert gradient_prediction_variation(seq, oracle) == pytest.approx(first_grad_sq)
    stale = run_online(seq, OptimisticNewton(np.zeros(3), StalePredictor()))
    assert gradient_prediction_variation(seq, stale) >= first_grad_sq
    ogd = run_online(seq, GradientDescent(np.zeros(3), 0.01))
    assert gradient_prediction_variation(seq, ogd) is None


# ---------------------------------------------------------------------------
# theorem1 / theorem5
# ---------------------------------------------------------------------------

def test_theorem1_static_run_from_minimizer_is_zero():
    seq = gen_static(2, 30, 1.0, 1.0, seed=2)
    x1 = seq.losses[0].center.copy()
    trace = run_online(seq, GradientDescent(x1, theorem1_step_size(1.0, 1.0, 1.0)))
    report = theorem1_bound(seq, trace)
    assert report.bound_value == 0.0
    assert report.measured_regret == 0.0
    assert report.satisfied()


def test_theorem1_motion_coefficient_hand_value():
    # mu = L = 1, identity bounds: (1)(4-1)/(1-4+4) = 3
    seq = gen_static(2, 5, 1.0, 1.0, seed=3)
    trace = run_online(seq, GradientDescent(np.zeros(2), theorem1_step_size(1.0, 1.0, 1.0)))
    report = theorem1_bound(seq, trace)
    assert report.details["motion_coefficient"] == pytest.approx(3.0, rel=1e-15)
    assert report.constants["c"] == pytest.approx(0.25)


def test_theorem1_coefficients_match_alternative_algebra():
    # the closed-form coefficients equal the two-parameter route
    # coef = (lambda'/2 eta)(1/c - 1), init = (lambda'(1-c)/2 eta)
    # with c = mu^2/4L^2 - lambda/lambda' + 1 and eta = lambda' mu / 2L^2
    from dynregret import RegularizedNewtonPreconditioner, PreconditionedDescent

    mu, L = 1.0, 4.0
    zeta = 1.1 * (L - mu) * 4 * L * L / mu ** 2 - mu  # comfortably admissible
    precond = RegularizedNewtonPreconditioner(mu, L, zeta)
    seq = gen_random_walk(3, 30, mu, L, 0.1, seed=25)
    eta = theorem1_step_size(mu, L, precond.bounds.lambda_min)
    trace = run_online(seq, PreconditionedDescent(np.zeros(3), eta, precond))
    report = theorem1_bound(seq, trace)

    lam = precond.bounds.lambda_max
    lamp = precond.bounds.lambda_min
    c = mu ** 2 / (4 * L ** 2) - lam / lamp + 1.0
    assert 0.0 < c < 1.0
    coef_alt = (lamp / (2 * eta)) * (1.0 / c - 1.0)
    init_alt = lamp * (1.0 - c) / (2 * eta)
    assert report.details["motion_coefficient"] == pytest.approx(coef_alt, rel=1e-9)
    assert report.details["initial_coefficient"] == pytest.approx(init_alt, rel=1e-9)


def test_theorem3_branches_recomputed_from_raw_trace():
    import math as _math

    seq = gen_random_walk(2, 40, 1.0, 4.0, 0.15, seed=26)
    trace = run_online(seq, MultiGradientDescent(np.zeros(2), 0.4, 1.0, 4.0))
    report = theorem3_bound(seq, trace)
    rounds = trace.ledger.rounds
    L = seq.smoothness
    D = max(np.linalg.norm(r.action - r.minimizer) for r in rounds)
    V, _ = function_variation(
        seq.losses, [r.action for r in rounds] + [r.minimizer for r in rounds])
    c2 = sum(np.linalg.norm(a.minimizer - b.minimizer) ** 2
             for a, b in zip(rounds[:-1], rounds[1:]))
    b1 = (rounds[0].loss_at_action - rounds[0].loss_at_minimizer) \
        + 2 * V + _math.pi ** 2 * D ** 2 * L / 12
    b2 = (L / 2) * (np.linalg.norm(rounds[0].action - rounds[0].minimizer) ** 2
                    + 2 * D ** 2 * _math.pi ** 2 / 6 + 2 * c2)
    assert report.details["branch1"] == pytest.approx(b1, rel=1e-12)
    assert report.details["branch2"] == pytest.approx(b2, rel=1e-12)
    assert report.bound_value == min(report.details["branch1"], report.details["branch2"])


def test_theorem1_wrong_step_size_not_admissible():
    seq = gen_random_walk(2, 10, 1.0, 4.0, 0.1, seed=4)
    trace = run_online(seq, GradientDescent(np.zeros(2), 0.01))
    with pytest.raises(NotAdmissible):
        theorem1_bound(seq, trace)


def test_theorem1_gate_failure_not_admissible():
    from dynregret import SpdBounds

    seq = gen_random_walk(2, 10, 1.0, 4.0, 0.1, seed=4)
    eta = theorem1_step_size(1.0, 4.0, 1.0)
    trace = run_online(seq, GradientDescent(np.zeros(2), eta))
    # condition number 1.2 > 1 + 1/64
    with pytest.raises(NotAdmissible):
        theorem1_bound(seq, trace, bounds=SpdBounds(1.0, 1.2))


def test_theorem1_refuses_decaying_sequence():
    seq = gen_alternating_center_decay(2, 10, np.array([1.0, 0.0]))
    trace = run_online(seq, GradientDescent(np.zeros(2), 0.05))
    with pytest.raises(NotAdmissible):
        theorem1_bound(seq, trace)


def test_theorem5_interior_minimizers_recover_unconstrained_value():
    ball = Ball(np.zeros(3), 50.0)
    free = gen_random_walk(3, 80, 1.0, 4.0, 0.1, seed=6)
    boxed = gen_random_walk(3, 80, 1.0, 4.0, 0.1, seed=6, feasible_set=ball)
    eta = theorem1_step_size(1.0, 4.0, 1.0)
    t_free = run_online(free, GradientDescent(np.zeros(3), eta))
    t_boxed = run_online(boxed, GradientDescent(np.zeros(3), eta, ball))
    r1 = theorem1_bound(free, t_free)
    r5 = theorem5_bound(boxed, t_boxed)
    assert r5.details["minimizer_gradient_sum"] == 0.0
    assert r5.bound_value == pytest.approx(r1.bound_value, rel=1e-12)
    assert r5.satisfied()


def test_theorem5_requires_constrained_run():
    seq = gen_random_walk(2, 10, 1.0, 4.0, 0.1, seed=7)
    trace = run_online(seq, GradientDescent(np.zeros(2), theorem1_step_size(1.0, 4.0, 1.0)))
    with pytest.raises(NotAdmissible):
        theorem5_bound(seq, trace)


# ---------------------------------------------------------------------------
# theorem2 / corollary3
# ---------------------------------------------------------------------------

def test_theorem2_rate_constant_value():
    seq = gen_random_walk(3, 20, 1.0, 4.0, 0.1, seed=8)
    trace = run_online(seq, OptimisticNewton(np.zeros(3), OraclePredictor()))
    report = theorem2_bound(seq, trace, c1=0.1, c2=0.1)
    assert report.constants["rho_geom"] == pytest.approx(1.331 / 16.0, rel=1e-12)
    assert report.constants["rho_quartic"] == 0.0  # constant Hessian
    assert report.satisfied()


def test_theorem2_oracle_static_reduces_to_first_correction_term():
    seq = gen_static(3, 25, 1.0, 2.0, seed=9)
    x1 = np.ones(3) * 2.0
    trace = run_online(seq, OptimisticNewton(x1, OraclePredictor()))
    report = theorem2_bound(seq, trace, c1=0.1, c2=0.1)
    L = seq.smoothness
    expected = L * trace.first_correction_sq
    assert report.bound_value == pytest.approx(expected, rel=1e-9)
    assert report.satisfied()


def test_theorem2_rho_out_of_range():
    seq = gen_static(2, 5, 1.0, 2.0, seed=0)
    trace = run_online(seq, OptimisticNewton(np.zeros(2), StalePredictor()))
    with pytest.raises(RhoOutOfRange):
        theorem2_bound(seq, trace, c1=5.0, c2=5.0)
    with pytest.raises(RhoOutOfRange):
        theorem2_bound(seq, trace, c1=-0.1, c2=0.1)


def test_theorem2_grid_search_never_worse_than_default():
    seq = gen_random_walk(3, 40, 1.0, 4.0, 0.1, seed=10)
    trace = run_online(seq, OptimisticNewton(np.zeros(3), StalePredictor()))
    default = theorem2_bound(seq, trace, c1=0.1, c2=0.1)
    best = theorem2_bound_tightest(seq, trace)
    assert best.bound_value <= default.bound_value
    assert best.satisfied()


def test_theorem2_rejects_non_newton_trace():
    seq = gen_random_walk(2, 10, 1.0, 4.0, 0.1, seed=11)
    trace = run_online(seq, GradientDescent(np.zeros(2), 0.05))
    with pytest.raises(NotAdmissible):
        theorem2_bound(seq, trace)


def test_corollary3_requires_stale_predictor():
    seq = gen_random_walk(2, 10, 1.0, 4.0, 0.1, seed=12)
    trace = run_online(seq, OptimisticNewton(np.zeros(2), OraclePredictor()))
    with pytest.raises(NotAdmissible):
        corollary3_bound(seq, trace)


def test_corollary3_holds_on_moving_quadratics():
    seq = gen_random_walk(3, 100, 1.0, 4.0, 0.15, seed=13)
    trace = run_online(seq, OptimisticNewton(np.zeros(3), StalePredictor()))
    report = corollary3_bound(seq, trace, c1=0.1, c2=0.1)
    assert report.satisfied()


# ---------------------------------------------------------------------------
# theorem3 / theorem6
# ---------------------------------------------------------------------------

def test_theorem3_static_run_from_minimizer_is_zero():
    seq = gen_static(2, 20, 1.0, 4.0, seed=14)
    x1 = seq.losses[0].center.copy()
    trace = run_online(seq, MultiGradientDescent(x1, 0.4, 1.0, 4.0))
    report = theorem3_bound(seq, trace)
    assert report.bound_value == 0.0
    assert report.measured_regret == 0.0


def test_theorem3_min_never_exceeds_either_branch():
    seq = gen_random_walk(3, 60, 1.0, 4.0, 0.15, seed=15)
    trace = run_online(seq, MultiGradientDescent(np.zeros(3), 0.4, 1.0, 4.0))
    report = theorem3_bound(seq, trace)
    assert report.bound_value <= report.details["branch1"]
    assert report.bound_value <= report.details["branch2"]
    assert report.satisfied()


def test_theorem3_rejects_wrong_eta():
    seq = gen_random_walk(2, 10, 1.0, 4.0, 0.1, seed=16)
    learner = MultiGradientDescent(np.zeros(2), 0.4, 1.0, 4.0)
    trace = run_online(seq, learner)
    trace.eta = 0.7  # outside (0, 2/(mu+L)]
    from dynregret import InvalidConstants

    with pytest.raises(InvalidConstants):
        theorem3_bound(seq, trace)


def test_theorem6_interior_reduces_to_variation_and_path_terms():
    ball = Ball(np.zeros(2), 30.0)
    seq = gen_random_walk(2, 50, 1.0, 4.0, 0.1, seed=17, feasible_set=ball)
    trace = run_online(seq, MultiGradientDescent(np.zeros(2), 0.25, 1.0, 4.0, ball))
    report = theorem6_bound(seq, trace)
    assert report.details["minimizer_gradient_sum"] == 0.0
    assert report.details["stale_minimizer_gradient_sum"] == 0.0
    assert report.satisfied()


def test_theorem6_boundary_minimizers_hold():
    ball = Ball(np.zeros(2), 0.4)
    seq = gen_random_walk(2, 60, 1.0, 4.0, 0.1, seed=18,
                          feasible_set=ball, start=np.array([2.0, 1.0]))
    trace = run_online(seq, MultiGradientDescent(np.zeros(2), 0.25, 1.0, 4.0, ball))
    report = theorem6_bound(seq, trace)
    assert report.details["minimizer_gradient_sum"] > 0.0
    assert report.satisfied()


# ---------------------------------------------------------------------------
# Gated evaluation, reports, ledger
# ---------------------------------------------------------------------------

def test_evaluate_bound_gates_inadmissible_runs():
    seq = gen_random_walk(2, 10, 1.0, 4.0, 0.1, seed=19)
    trace = run_online(seq, GradientDescent(np.zeros(2), 0.01))
    report = evaluate_bound("theorem1", seq, trace)
    assert not report.admissible
    assert report.bound_value is None
    assert report.slack is None
    assert "reason" in report.details


def test_bound_report_satisfied_tolerance():
    from dynregret import BoundReport

    ok = BoundReport("x", True, 100.0, 100.0 + 5e-5, -5e-5)
    assert ok.satisfied()  # within 1e-6 * (1 + 100)
    bad = BoundReport("x", True, 100.0, 100.2, -0.2)
    assert not bad.satisfied()


def test_ledger_cumulative_and_step_norms():
    seq = gen_random_walk(2, 25, 1.0, 4.0, 0.2, seed=20)
    trace = run_online(seq, GradientDescent(np.zeros(2), 0.1))
    ledger = trace.ledger
    assert ledger.cumulative_regret == pytest.approx(
        sum(r.regret for r in ledger.rounds), rel=1e-12)
    series = ledger.cumulative_series()
    assert series[-1] == pytest.approx(ledger.cumulative_regret, rel=1e-9)
    steps = ledger.step_norms()
    assert steps[0] == 0.0
    assert np.all(steps <= 0.2 + 1e-12)


def test_cumulative_regret_is_nondecreasing():
    seq = gen_random_walk(3, 80, 1.0, 4.0, 0.2, seed=23)
    trace = run_online(seq, GradientDescent(np.zeros(3), 0.05))
    series = trace.ledger.cumulative_series()
    assert np.all(np.diff(series) >= -1e-12)


def test_oon_locality_gate_with_nonzero_hessian_lipschitz():
    # quadratics have a constant Hessian, but the gate must still engage
    # when a sequence declares a positive Lipschitz constant
    base = gen_random_walk(2, 10, 1.0, 4.0, 0.1, seed=24)
    trace = run_online(base, OptimisticNewton(base.losses[0].center + 100.0,
                                              StalePredictor()))
    declared = FunctionSequence(base.losses, base.feasible_set,
                                base.strong_convexity, base.smoothness,
                                hessian_lipschitz=5.0)
    with pytest.raises(NotAdmissible, match="locality"):
        theorem2_bound(declared, trace)


def test_regularity_report_fields():
    seq = gen_random_walk(3, 40, 1.0, 4.0, 0.2, seed=22)
    trace = run_online(seq, OptimisticNewton(np.zeros(3), StalePredictor()))
    report = regularity_report(seq, trace)
    cbar = report.max_step
    assert report.path_length_2 <= cbar * report.path_length_1 + 1e-9
    assert report.path_length_4 <= cbar ** 2 * report.path_length_2 + 1e-9
    assert report.prediction_variation is not None
    assert report.variation_exactness == LOWER_BOUND
    d = report.to_dict()
    assert set(d) >= {"path_length_2", "function_variation", "max_step"}
