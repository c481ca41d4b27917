"""Regret accounting, regularity measures, and closed-form bound checks.

The ledger records one row per round (action, feasible minimizer, losses,
regret, gradient queries). Regularity measures computed from a finished
run:

  * path_length_p     - sum of p-th powers of consecutive minimizer steps;
  * function_variation - sum over rounds of sup |f_t - f_{t-1}| over a
    reference set given by its generating points. Exact when consecutive
    curvatures are equal (the difference is affine, so the max sits on a
    generating point); otherwise a flagged lower bound that also probes the
    interior stationary point of the difference;
  * prediction_variation - cumulative squared gap between predicted and
    true Newton directions of an optimistic-Newton run;
  * gradient_prediction_variation - diagnostic gap between predicted and
    true gradients at the played points.

Bound evaluators (theorem1..theorem6, corollary3) compute the closed-form
regret guarantees for admissible runs and report bound, measured regret,
and slack. Inadmissible configurations raise NotAdmissible; use
`evaluate_bound` to get a gated report instead of an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EmptyHull, InvalidConstants, NotAdmissible, RhoOutOfRange
from .linalg import SpdBounds
from .losses import FunctionSequence
from .projections import Unconstrained

BOUND_SLACK_RTOL = 1e-6

THEOREM2_CONSTANT_GRID = (0.05, 0.1, 0.2, 0.5, 1.0)


# ---------------------------------------------------------------------------
# Run records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoundRecord:
    t: int
    action: np.ndarray
    minimizer: np.ndarray
    loss_at_action: float
    loss_at_minimizer: float
    regret: float
    gradient_queries: int
    predicted_queries: int = 0


@dataclass
class RegretLedger:
    """Per-round records of one online run."""

    rounds: list

    @property
    def horizon(self) -> int:
        return len(self.rounds)

    @property
    def cumulative_regret(self) -> float:
        total = 0.0
        for r in self.rounds:
            total += r.regret
        return total

    def cumulative_series(self) -> np.ndarray:
        return np.cumsum([r.regret for r in self.rounds])

    def actions(self) -> list:
        return [r.action for r in self.rounds]

    def minimizers(self) -> list:
        return [r.minimizer for r in self.rounds]

    def step_norms(self) -> np.ndarray:
        """||x*_t - x*_{t-1}|| per round (0 for the first round)."""
        steps = _step_norms(self.minimizers())
        return np.concatenate([[0.0], steps]) if steps.size else np.zeros(self.horizon)

    def total_gradient_queries(self) -> int:
        return sum(r.gradient_queries for r in self.rounds)

    def total_predicted_queries(self) -> int:
        return sum(r.predicted_queries for r in self.rounds)

    def validate(self, tol: float = 1e-12) -> None:
        for r in self.rounds:
            if r.regret < -tol:
                raise InvalidConstants(
                    f"round {r.t}: per-round regret {r.regret:.3e} below -{tol}"
                )


@dataclass
class RunTrace:
    """Ledger plus the learner-specific extras bound checks need."""

    ledger: RegretLedger
    algorithm: str
    eta: Optional[float] = None
    spd_bounds: Optional[SpdBounds] = None
    constrained: bool = False
    predictor: Optional[str] = None
    oracle: bool = False
    aux_history: Optional[list] = None
    newton_gap_sq: Optional[list] = None
    first_correction_sq: Optional[float] = None
    inner_counts: Optional[list] = None


# ---------------------------------------------------------------------------
# Regularity measures
# ---------------------------------------------------------------------------

def _step_norms(minimizers) -> np.ndarray:
    pts = np.asarray(minimizers, dtype=np.float64)
    if pts.shape[0] < 2:
        return np.empty(0)
    return np.linalg.norm(np.diff(pts, axis=0), axis=1)


def path_length_p(minimizers, p: float) -> float:
    """Sum over consecutive rounds of ||x*_t - x*_{t-1}||^p (0 for T = 1)."""
    if p < 1.0:
        raise InvalidConstants(f"order p must be >= 1, got {p}")
    steps = _step_norms(minimizers)
    if steps.size == 0:
        return 0.0
    return float(np.sum(steps ** p))


def max_step(minimizers) -> float:
    """Largest consecutive minimizer displacement."""
    steps = _step_norms(minimizers)
    return float(np.max(steps)) if steps.size else 0.0


EXACT = "exact"
LOWER_BOUND = "lower_bound"


def function_variation(losses, hull_points) -> tuple:
    """Sum of sup |f_t - f_{t-1}| over the convex hull of `hull_points`.

    Returns (value, flag) where flag is EXACT when every consecutive
    curvature difference is zero (the difference is affine and |affine| is
    convex, so the hull maximum is attained at a generating point) and
    LOWER_BOUND otherwise. In the latter case the interior stationary point
    of each difference is also probed when it falls inside the bounding box
    of the generating points.
    """
    points = [np.asarray(p, dtype=np.float64) for p in hull_points]
    if not points:
        raise EmptyHull("function variation needs at least one hull point")
    P = np.vstack(points)
    lo = P.min(axis=0)
    hi = P.max(axis=0)
    values = np.stack([loss.values(P) for loss in losses])

    total = 0.0
    exact = True
    for t in range(1, len(losses)):
        f_prev, f_cur = losses[t - 1], losses[t]
        best = float(np.max(np.abs(values[t] - values[t - 1])))
        dQ = f_cur.curvature - f_prev.curvature
        if np.any(dQ != 0.0):
            exact = False
            # Stationary point of g = f_t - f_{t-1}: dQ x = Q_t c_t - Q_{t-1} c_{t-1}
            rhs = f_cur.curvature @ f_cur.center - f_prev.curvature @ f_prev.center
            try:
                xs = np.linalg.solve(dQ, rhs)
            except np.linalg.LinAlgError:
                xs = None
            if xs is not None and np.all(xs >= lo - 1e-12) and np.all(xs <= hi + 1e-12):
                best = max(best, abs(f_cur.value(xs) - f_prev.value(xs)))
        total += best
    return total, (EXACT if exact else LOWER_BOUND)


def prediction_variation(trace: RunTrace) -> float:
    """Cumulative squared gap between predicted and true Newton directions."""
    if trace.newton_gap_sq is None:
        raise NotAdmissible("trace does not carry Newton prediction gaps")
    total = 0.0
    for g in trace.newton_gap_sq:
        total += g
    return total


def gradient_prediction_variation(seq: FunctionSequence, trace: RunTrace) -> Optional[float]:
    """Diagnostic: sum over rounds of ||grad f_t(x_t) - predicted grad at x_t||^2.

    The round-1 prediction is the zero map. Only defined for
    optimistic-Newton runs; returns None otherwise.
    """
    if trace.algorithm != "oon" or trace.predictor is None:
        return None
    actions = trace.ledger.actions()
    total = float(np.linalg.norm(seq.loss(1).grad(actions[0]))) ** 2
    if trace.predictor == "oracle":
        return total  # predicted gradient equals the true one from round 2 on
    for t in range(2, seq.horizon + 1):
        x = actions[t - 1]
        gap = seq.loss(t).grad(x) - seq.loss(t - 1).grad(x)
        total += float(np.linalg.norm(gap)) ** 2
    return total


@dataclass(frozen=True)
class RegularityReport:
    path_length_1: float
    path_length_2: float
    path_length_4: float
    function_variation: float
    variation_exactness: str
    max_step: float
    prediction_variation: Optional[float] = None
    gradient_prediction_variation: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "path_length_1": self.path_length_1,
            "path_length_2": self.path_length_2,
            "path_length_4": self.path_length_4,
            "function_variation": self.function_variation,
            "variation_exactness": self.variation_exactness,
            "max_step": self.max_step,
            "prediction_variation": self.prediction_variation,
            "gradient_prediction_variation": self.gradient_prediction_variation,
        }


def regularity_report(seq: FunctionSequence, trace: RunTrace) -> RegularityReport:
    """All regularity measures of a finished run.

    The function-variation reference set is the convex hull of the played
    actions and the feasible minimizers.
    """
    mins = trace.ledger.minimizers()
    hull = trace.ledger.actions() + mins
    variation, flag = function_variation(seq.losses, hull)
    dprime = None
    if trace.newton_gap_sq is not None:
        dprime = prediction_variation(trace)
    return RegularityReport(
        path_length_1=path_length_p(mins, 1.0),
        path_length_2=path_length_p(mins, 2.0),
        path_length_4=path_length_p(mins, 4.0),
        function_variation=variation,
        variation_exactness=flag,
        max_step=max_step(mins),
        prediction_variation=dprime,
        gradient_prediction_variation=gradient_prediction_variation(seq, trace),
    )


# ---------------------------------------------------------------------------
# Step-size / admissibility rules shared with the learners
# ---------------------------------------------------------------------------

def theorem1_step_size(mu: float, L: float, lambda_prime: float) -> float:
    """Prescribed step size lambda' * mu / (2 L^2)."""
    if not (0.0 < mu <= L):
        raise InvalidConstants(f"need 0 < mu <= L, got mu={mu}, L={L}")
    if lambda_prime <= 0.0:
        raise InvalidConstants("lambda_prime must be positive")
    return lambda_prime * mu / (2.0 * L * L)


def check_theorem1_admissible(bounds: SpdBounds, mu: float, L: float) -> bool:
    """Condition-number gate: lambda/lambda' < 1 + mu^2 / (4 L^2)."""
    if not (0.0 < mu <= L):
        raise InvalidConstants(f"need 0 < mu <= L, got mu={mu}, L={L}")
    return bounds.condition < 1.0 + mu * mu / (4.0 * L * L)


# ---------------------------------------------------------------------------
# Bound reports
# ---------------------------------------------------------------------------

@dataclass
class BoundReport:
    theorem_id: str
    admissible: bool
    bound_value: Optional[float]
    measured_regret: float
    slack: Optional[float]
    constants: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def satisfied(self, rtol: float = BOUND_SLACK_RTOL) -> bool:
        """Measured regret within relative slack tolerance of the bound."""
        if not self.admissible or self.bound_value is None:
            return False
        return self.slack >= -rtol * (1.0 + abs(self.bound_value))

    def to_dict(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "admissible": self.admissible,
            "bound_value": self.bound_value,
            "measured_regret": self.measured_regret,
            "slack": self.slack,
            "constants": dict(self.constants),
            "details": dict(self.details),
        }


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise NotAdmissible(message)


def _initial_distance_sq(ledger: RegretLedger) -> float:
    first = ledger.rounds[0]
    return float(np.linalg.norm(first.action - first.minimizer)) ** 2


def theorem1_bound(seq: FunctionSequence, trace: RunTrace,
                   bounds: Optional[SpdBounds] = None) -> BoundReport:
    """Preconditioned-descent regret bound for unconstrained runs.

    The motion sum formally runs one index past the horizon; the phantom
    minimizer is pinned to the last real one, so that term is zero and the
    sum equals the squared path length of the played rounds.
    """
    bounds = bounds if bounds is not None else trace.spd_bounds
    _require(bounds is not None, "no preconditioner spectral bounds available")
    _require(not seq.regularity_only, "sequence is tagged regularity-comparison only")
    _require(trace.algorithm in ("ogd", "opgd"), f"not a preconditioned-descent trace: {trace.algorithm}")
    _require(not trace.constrained, "constrained run: use theorem5")
    mu, L = seq.strong_convexity, seq.smoothness
    _require(check_theorem1_admissible(bounds, mu, L),
             "condition-number gate lambda/lambda' < 1 + mu^2/4L^2 fails")
    eta_req = theorem1_step_size(mu, L, bounds.lambda_min)
    _require(trace.eta is not None and abs(trace.eta - eta_req) <= 1e-12 * eta_req,
             f"step size {trace.eta} is not the prescribed {eta_req}")

    lam, lamp = bounds.lambda_max, bounds.lambda_min
    motion = path_length_p(trace.ledger.minimizers(), 2.0)
    coef = (L * L / mu) * ((4.0 * L * L * lam - mu * mu * lamp)
                           / (mu * mu * lamp - 4.0 * L * L * lam + 4.0 * L * L * lamp))
    init_coef = (L * L * lam) / (lamp * mu) - mu / 4.0
    init_sq = _initial_distance_sq(trace.ledger)
    bound = coef * motion + init_coef * init_sq
    measured = trace.ledger.cumulative_regret
    c_proof = mu * mu / (4.0 * L * L) - lam / lamp + 1.0
    return BoundReport(
        "theorem1", True, bound, measured, bound - measured,
        constants={"eta": trace.eta, "c": c_proof, "lambda": lam, "lambda_prime": lamp,
                   "mu": mu, "L": L},
        details={"motion_coefficient": coef, "squared_path_length": motion,
                 "initial_coefficient": init_coef, "initial_distance_sq": init_sq},
    )


def _rho_pair(mu: float, L_H: float, c1: float, c2: float) -> tuple:
    if c1 <= 0.0 or c2 <= 0.0:
        raise RhoOutOfRange("constants c1, c2 must be positive")
    rho_geom = (1.0 + c1) ** 2 * (1.0 + c2) / 16.0
    if not 0.0 < rho_geom < 1.0:
        raise RhoOutOfRange(f"geometric rate {rho_geom} outside (0, 1)")
    rho_quartic = (L_H / (2.0 * mu)) ** 2 * (1.0 + 1.0 / c1) ** 2 * (1.0 + 1.0 / c2)
    return rho_geom, rho_quartic


def _oon_locality_admissible(seq: FunctionSequence, trace: RunTrace) -> None:
    """Locality conditions; vacuous when the Hessian is globally constant."""
    L_H = seq.hessian_lipschitz
    if L_H == 0.0:
        return
    mu = seq.strong_convexity
    _require(math.sqrt(_initial_distance_sq(trace.ledger)) <= mu / L_H,
             "initial point outside the Newton locality radius")
    _require(max_step(trace.ledger.minimizers()) <= mu / (2.0 * L_H),
             "minimizer steps exceed the locality bound")


def theorem2_bound(seq: FunctionSequence, trace: RunTrace,
                   c1: float = 0.1, c2: float = 0.1) -> BoundReport:
    """Optimistic-Newton regret bound for a given constant pair (c1, c2)."""
    _require(trace.algorithm == "oon" and trace.aux_history is not None,
             "not an optimistic-Newton trace")
    _require(not seq.regularity_only, "sequence is tagged regularity-comparison only")
    _oon_locality_admissible(seq, trace)
    mu, L = seq.strong_convexity, seq.smoothness
    rho_geom, rho_quartic = _rho_pair(mu, seq.hessian_lipschitz, c1, c2)

    mins = trace.ledger.minimizers()
    aux_first_sq = float(np.linalg.norm(trace.aux_history[0] - mins[0])) ** 2
    aux_last_sq = float(np.linalg.norm(trace.aux_history[-1] - mins[-1])) ** 2
    quartic = path_length_p(mins, 4.0)
    dprime = prediction_variation(trace)
    first_sq = trace.first_correction_sq or 0.0

    bound = (L * ((aux_first_sq - rho_geom * aux_last_sq) / (1.0 - rho_geom)
                  + rho_quartic / (1.0 - rho_geom) * quartic)
             + L * dprime + L * first_sq)
    measured = trace.ledger.cumulative_regret
    return BoundReport(
        "theorem2", True, bound, measured, bound - measured,
        constants={"c1": c1, "c2": c2, "rho_geom": rho_geom,
                   "rho_quartic": rho_quartic, "mu": mu, "L": L},
        details={"prediction_variation": dprime, "quartic_path_length": quartic,
                 "first_correction_sq": first_sq,
                 "aux_initial_gap_sq": aux_first_sq, "aux_final_gap_sq": aux_last_sq},
    )


def corollary3_bound(seq: FunctionSequence, trace: RunTrace,
                     c1: float = 0.1, c2: float = 0.1) -> BoundReport:
    """Composite stale-prediction bound (squared path length dominated)."""
    _require(trace.predictor == "stale", "composite bound applies to the stale predictor")
    _require(trace.algorithm == "oon" and trace.aux_history is not None,
             "not an optimistic-Newton trace")
    _require(not seq.regularity_only, "sequence is tagged regularity-comparison only")
    _oon_locality_admissible(seq, trace)
    mu, L = seq.strong_convexity, seq.smoothness
    rho_geom, rho_quartic = _rho_pair(mu, seq.hessian_lipschitz, c1, c2)

    mins = trace.ledger.minimizers()
    aux_first_sq = float(np.linalg.norm(trace.aux_history[0] - mins[0])) ** 2
    quartic = path_length_p(mins, 4.0)
    squared = path_length_p(mins, 2.0)
    first_sq = trace.first_correction_sq or 0.0

    lead = (6.0 * L ** 3 + mu * mu * L) / (mu * mu)
    bound = (lead * (aux_first_sq / (1.0 - rho_geom)
                     + rho_quartic / (1.0 - rho_geom) * quartic)
             + L * first_sq + 4.0 * L ** 3 / (mu * mu) * squared)
    measured = trace.ledger.cumulative_regret
    return BoundReport(
        "corollary3", True, bound, measured, bound - measured,
        constants={"c1": c1, "c2": c2, "rho_geom": rho_geom,
                   "rho_quartic": rho_quartic, "mu": mu, "L": L},
        details={"squared_path_length": squared, "quartic_path_length": quartic,
                 "first_correction_sq": first_sq, "aux_initial_gap_sq": aux_first_sq},
    )


def _tightest_over_grid(evaluator, seq, trace, grid) -> BoundReport:
    best = None
    for c1 in grid:
        for c2 in grid:
            try:
                report = evaluator(seq, trace, c1, c2)
            except RhoOutOfRange:
                continue
            if best is None or report.bound_value < best.bound_value:
                best = report
    if best is None:
        raise RhoOutOfRange("no admissible (c1, c2) pair in the grid")
    return best


def theorem2_bound_tightest(seq, trace, grid=THEOREM2_CONSTANT_GRID) -> BoundReport:
    return _tightest_over_grid(theorem2_bound, seq, trace, grid)


def corollary3_bound_tightest(seq, trace, grid=THEOREM2_CONSTANT_GRID) -> BoundReport:
    return _tightest_over_grid(corollary3_bound, seq, trace, grid)


def _omgd_branches(seq: FunctionSequence, trace: RunTrace, diameter: float) -> dict:
    ledger = trace.ledger
    first = ledger.rounds[0]
    mins = ledger.minimizers()
    L = seq.smoothness
    variation, flag = function_variation(seq.losses, ledger.actions() + mins)
    squared = path_length_p(mins, 2.0)
    init_sq = _initial_distance_sq(ledger)
    branch1 = ((first.loss_at_action - first.loss_at_minimizer)
               + 2.0 * variation + math.pi ** 2 * diameter ** 2 * L / 12.0)
    branch2 = (L / 2.0) * (init_sq + 2.0 * diameter ** 2 * (math.pi ** 2 / 6.0)
                           + 2.0 * squared)
    return {
        "branch1": branch1, "branch2": branch2,
        "function_variation": variation, "variation_exactness": flag,
        "squared_path_length": squared, "diameter": diameter,
        "initial_distance_sq": init_sq,
    }


def theorem3_bound(seq: FunctionSequence, trace: RunTrace) -> BoundReport:
    """Multi-gradient-descent bound: min of the variation and path branches.

    The diameter here is measured from the trace (largest action-to-minimizer
    distance), exactly as the unconstrained guarantee defines it.
    """
    _require(trace.algorithm == "omgd", f"not a multi-gradient trace: {trace.algorithm}")
    _require(not trace.constrained, "constrained run: use theorem6")
    _require(not seq.regularity_only, "sequence is tagged regularity-comparison only")
    mu, L = seq.strong_convexity, seq.smoothness
    if trace.eta is None or not 0.0 < trace.eta <= 2.0 / (mu + L) * (1.0 + 1e-12):
        raise InvalidConstants(f"eta {trace.eta} outside (0, 2/(mu+L)]")
    ledger = trace.ledger
    diameter = max(
        float(np.linalg.norm(r.action - r.minimizer)) for r in ledger.rounds
    )
    parts = _omgd_branches(seq, trace, diameter)
    bound = min(parts["branch1"], parts["branch2"])
    measured = ledger.cumulative_regret
    return BoundReport(
        "theorem3", True, bound, measured, bound - measured,
        constants={"eta": trace.eta, "mu": mu, "L": L, "diameter": diameter},
        details={**parts, "selected_branch": 1 if parts["branch1"] <= parts["branch2"] else 2},
    )


def theorem5_bound(seq: FunctionSequence, trace: RunTrace,
                   bounds: Optional[SpdBounds] = None) -> BoundReport:
    """Constrained preconditioned-descent bound.

    Adds the gradient-at-minimizer sum to the unconstrained expression; the
    diameter is the geometric diameter of the feasible set.
    """
    bounds = bounds if bounds is not None else trace.spd_bounds
    _require(bounds is not None, "no preconditioner spectral bounds available")
    _require(not seq.regularity_only, "sequence is tagged regularity-comparison only")
    _require(trace.algorithm in ("ogd", "opgd"), f"not a preconditioned-descent trace: {trace.algorithm}")
    _require(trace.constrained, "unconstrained run: use theorem1")
    S = seq.feasible_set
    _require(not isinstance(S, Unconstrained) and math.isfinite(S.diameter()),
             "feasible set has no finite diameter")
    mu, L = seq.strong_convexity, seq.smoothness
    _require(check_theorem1_admissible(bounds, mu, L),
             "condition-number gate lambda/lambda' < 1 + mu^2/4L^2 fails")
    eta_req = theorem1_step_size(mu, L, bounds.lambda_min)
    _require(trace.eta is not None and abs(trace.eta - eta_req) <= 1e-12 * eta_req,
             f"step size {trace.eta} is not the prescribed {eta_req}")

    lam, lamp = bounds.lambda_max, bounds.lambda_min
    mins = trace.ledger.minimizers()
    motion = path_length_p(mins, 2.0)
    coef = (L * L / mu) * ((4.0 * L * L * lam - mu * mu * lamp)
                           / (mu * mu * lamp - 4.0 * L * L * lam + 4.0 * L * L * lamp))
    init_coef = (L * L * lam) / (lamp * mu) - mu / 4.0
    init_sq = _initial_distance_sq(trace.ledger)
    diameter = S.diameter()
    grad_sum = sum(
        float(np.linalg.norm(seq.loss(t).grad(mins[t - 1])))
        for t in range(1, seq.horizon + 1)
    )
    bound = coef * motion + init_coef * init_sq + mu * diameter / (2.0 * L) * grad_sum
    measured = trace.ledger.cumulative_regret
    c_proof = mu * mu / (4.0 * L * L) - lam / lamp + 1.0
    return BoundReport(
        "theorem5", True, bound, measured, bound - measured,
        constants={"eta": trace.eta, "c": c_proof, "lambda": lam, "lambda_prime": lamp,
                   "mu": mu, "L": L, "diameter": diameter},
        details={"motion_coefficient": coef, "squared_path_length": motion,
                 "initial_coefficient": init_coef, "initial_distance_sq": init_sq,
                 "minimizer_gradient_sum": grad_sum},
    )


def theorem6_bound(seq: FunctionSequence, trace: RunTrace) -> BoundReport:
    """Constrained multi-gradient bound with gradient-at-minimizer terms."""
    _require(trace.algorithm == "omgd", f"not a multi-gradient trace: {trace.algorithm}")
    _require(trace.constrained, "unconstrained run: use theorem3")
    _require(not seq.regularity_only, "sequence is tagged regularity-comparison only")
    S = seq.feasible_set
    _require(not isinstance(S, Unconstrained) and math.isfinite(S.diameter()),
             "feasible set has no finite diameter")
    mu, L = seq.strong_convexity, seq.smoothness
    if trace.eta is None or not 0.0 < trace.eta <= (1.0 / L) * (1.0 + 1e-12):
        raise InvalidConstants(f"eta {trace.eta} outside (0, 1/L]")
    mins = trace.ledger.minimizers()
    diameter = S.diameter()
    parts = _omgd_branches(seq, trace, diameter)
    stale_grads = sum(
        float(np.linalg.norm(seq.loss(t - 1).grad(mins[t - 2])))
        for t in range(2, seq.horizon + 1)
    )
    current_grads = sum(
        float(np.linalg.norm(seq.loss(t).grad(mins[t - 1])))
        for t in range(1, seq.horizon + 1)
    )
    branch1 = parts["branch1"] + diameter * stale_grads
    branch2 = parts["branch2"] + diameter * current_grads
    bound = min(branch1, branch2)
    measured = trace.ledger.cumulative_regret
    return BoundReport(
        "theorem6", True, bound, measured, bound - measured,
        constants={"eta": trace.eta, "mu": mu, "L": L, "diameter": diameter},
        details={**parts, "branch1": branch1, "branch2": branch2,
                 "stale_minimizer_gradient_sum": stale_grads,
                 "minimizer_gradient_sum": current_grads,
                 "selected_branch": 1 if branch1 <= branch2 else 2},
    )


BOUND_EVALUATORS = {
    "theorem1": lambda seq, trace: theorem1_bound(seq, trace),
    "theorem2": theorem2_bound_tightest,
    "corollary3": corollary3_bound_tightest,
    "theorem3": lambda seq, trace: theorem3_bound(seq, trace),
    "theorem5": lambda seq, trace: theorem5_bound(seq, trace),
    "theorem6": lambda seq, trace: theorem6_bound(seq, trace),
}


def evaluate_bound(theorem_id: str, seq: FunctionSequence, trace: RunTrace) -> BoundReport:
    """Gated bound evaluation: inadmissible runs get a report with no value."""
    if theorem_id not in BOUND_EVALUATORS:
        raise InvalidConstants(f"unknown bound check {theorem_id!r}")
    try:
        return BOUND_EVALUATORS[theorem_id](seq, trace)
    except (NotAdmissible, RhoOutOfRange, InvalidConstants) as exc:
        return BoundReport(
            theorem_id, False, None, trace.ledger.cumulative_regret, None,
            details={"reason": str(exc)},
        )
