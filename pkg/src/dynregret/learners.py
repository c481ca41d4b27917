"""Online learners: plain, preconditioned, optimistic-Newton, multi-gradient.

Every learner follows the same protocol: `action()` is the point played
this round, then `observe(loss, t, next_loss)` reveals the round's loss
and moves the state to the next action. `next_loss` is only ever supplied
to a learner that declares `needs_lookahead` (the clairvoyant predictor);
all other learners see strictly causal information.

Update rules:
  * GradientDescent          x <- x - eta * grad f_t(x)
  * PreconditionedDescent    x <- x - eta * A_t^{-1} grad f_t(x),
                             weighted-norm projection when constrained
  * OptimisticNewton         correction step with the revealed loss, then a
                             Newton step on predicted curvature/gradient
  * MultiGradientDescent     K_t projected gradient steps on the revealed
                             loss, K_t chosen so t^2 * rho^{K_t} <= 1

A learner whose iterate norm passes 1e12 aborts with Diverged rather than
propagating overflow.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import Diverged, InvalidConstants, ZetaTooSmall
from .linalg import SpdBounds, as_vector, spd_solve
from .losses import FunctionSequence, QuadraticLoss, feasible_minimizer
from .projections import UNCONSTRAINED, FeasibleSet, Unconstrained, project_a_norm, project_euclidean
from .regularity import (
    RegretLedger,
    RoundRecord,
    RunTrace,
    check_theorem1_admissible,
    theorem1_step_size,
)

DIVERGENCE_LIMIT = 1e12


# ---------------------------------------------------------------------------
# Preconditioner schedules
# ---------------------------------------------------------------------------

class IdentityPreconditioner:
    """A_t = I every round; spectral bounds (1, 1)."""

    name = "identity"

    def __init__(self):
        self._eye = {}
        self.bounds = SpdBounds(1.0, 1.0)

    def matrix(self, t: int, loss: QuadraticLoss, x: np.ndarray) -> np.ndarray:  # noqa: ARG002
        n = x.size
        if n not in self._eye:
            eye = np.eye(n)
            eye.setflags(write=False)
            self._eye[n] = eye
        return self._eye[n]


def regularized_newton_threshold(mu: float, L: float) -> float:
    """Smallest inadmissible ridge: (L - mu) 4 L^2 / mu^2 - mu."""
    if not (0.0 < mu <= L):
        raise InvalidConstants(f"need 0 < mu <= L, got mu={mu}, L={L}")
    return (L - mu) * 4.0 * L * L / (mu * mu) - mu


class RegularizedNewtonPreconditioner:
    """A_t = hessian f_t(x_t) + zeta I with zeta above the admissibility threshold.

    The resulting spectral bounds are (mu + zeta, L + zeta), which always
    pass the condition-number gate when zeta is valid.
    """

    name = "regularized_newton"

    def __init__(self, mu: float, L: float, zeta: float):
        threshold = regularized_newton_threshold(mu, L)
        if zeta <= threshold:
            raise ZetaTooSmall(f"zeta={zeta} must exceed {threshold}")
        self.zeta = float(zeta)
        self.bounds = SpdBounds(mu + zeta, L + zeta)
        self._ridge = {}

    def matrix(self, t: int, loss: QuadraticLoss, x: np.ndarray) -> np.ndarray:  # noqa: ARG002
        H = loss.hessian(x)
        n = H.shape[0]
        if n not in self._ridge:
            self._ridge[n] = self.zeta * np.eye(n)
        return H + self._ridge[n]


def regularized_newton_preconditioner(loss: QuadraticLoss, x, zeta: float,
                                      mu: float, L: float) -> np.ndarray:
    """One-shot form of the ridge-regularized Newton preconditioner."""
    return RegularizedNewtonPreconditioner(mu, L, zeta).matrix(0, loss, as_vector(x))


# ---------------------------------------------------------------------------
# Predictors for the optimistic learner
# ---------------------------------------------------------------------------

class StalePredictor:
    """Predict next round's curvature/gradient with the last observed loss."""

    kind = "stale"
    needs_lookahead = False

    def predict(self, query, history, next_loss=None):  # noqa: ARG002
        last = history[-1]
        return last.hessian(query), last.grad(query)


class OraclePredictor:
    """Clairvoyant predictor: exact next-round curvature and gradient.

    Violates the causal information order by design; runs using it are
    flagged as oracle runs in every summary.
    """

    kind = "oracle"
    needs_lookahead = True

    def predict(self, query, history, next_loss=None):  # noqa: ARG002
        if next_loss is None:
            raise InvalidConstants("oracle predictor needs the next loss")
        return next_loss.hessian(query), next_loss.grad(query)


# ---------------------------------------------------------------------------
# Inner-iteration schedule for the multi-gradient learner
# ---------------------------------------------------------------------------

def contraction_factor(eta: float, mu: float, L: float, constrained: bool = False) -> float:
    """Squared-distance shrink rate of one (projected) gradient step."""
    if eta <= 0.0:
        raise InvalidConstants("step size must be positive")
    if not (0.0 < mu <= L):
        raise InvalidConstants(f"need 0 < mu <= L, got mu={mu}, L={L}")
    if constrained:
        return 1.0 - 2.0 * mu / (1.0 / eta + mu)
    return 1.0 - 2.0 * eta * mu * L / (mu + L)


def omgd_inner_count(t: int, eta: float, mu: float, L: float,
                     constrained: bool = False) -> int:
    """ceil(-2 log t / log rho), clamped to at least one inner step.

    The clamp only binds at t = 1 (log 1 = 0); the defining property
    t^2 * rho^{K_t} <= 1 still holds there since rho < 1.
    """
    if t < 1:
        raise InvalidConstants(f"round index must be >= 1, got {t}")
    rho = contraction_factor(eta, mu, L, constrained)
    if not 0.0 < rho < 1.0:
        raise InvalidConstants(f"contraction factor {rho} outside (0, 1)")
    return max(int(math.ceil(-2.0 * math.log(t) / math.log(rho))), 1)


# ---------------------------------------------------------------------------
# Learners
# ---------------------------------------------------------------------------

class OnlineLearner:
    name = "base"
    needs_lookahead = False

    def __init__(self, x1, feasible_set: FeasibleSet = UNCONSTRAINED):
        self.feasible_set = feasible_set
        self.constrained = not isinstance(feasible_set, Unconstrained)
        x = as_vector(x1).copy()
        if self.constrained and not feasible_set.contains(x):
            raise InvalidConstants("initial point is outside the feasible set")
        self.x = x
        self.eta = None
        self.spd_bounds = None
        self.last_gradient_queries = 0
        self.last_predicted_queries = 0

    def action(self) -> np.ndarray:
        return self.x

    def observe(self, loss: QuadraticLoss, t: int, next_loss=None) -> None:
        raise NotImplementedError

    def _commit(self, x_new: np.ndarray) -> None:
        # the comparison is False for NaN, so this also catches non-finite iterates
        if not float(x_new @ x_new) <= DIVERGENCE_LIMIT * DIVERGENCE_LIMIT:
            raise Diverged(f"iterate norm exceeded {DIVERGENCE_LIMIT:.0e}")
        self.x = x_new

    def trace_extras(self) -> dict:
        return {}


class GradientDescent(OnlineLearner):
    """Plain (projected) gradient descent; one gradient per round."""

    name = "ogd"

    def __init__(self, x1, eta: float, feasible_set: FeasibleSet = UNCONSTRAINED):
        super().__init__(x1, feasible_set)
        if eta <= 0.0:
            raise InvalidConstants("step size must be positive")
        self.eta = float(eta)
        self.spd_bounds = SpdBounds(1.0, 1.0)

    def observe(self, loss, t, next_loss=None):  # noqa: ARG002
        y = self.x - self.eta * loss.grad(self.x)
        if self.constrained:
            y = project_euclidean(self.feasible_set, y).point
        self._commit(y)
        self.last_gradient_queries = 1


class PreconditionedDescent(OnlineLearner):
    """Gradient step rescaled by a round-varying SPD preconditioner.

    The constrained variant projects in the preconditioner's weighted norm.
    """

    name = "opgd"

    def __init__(self, x1, eta: float, preconditioner,
                 feasible_set: FeasibleSet = UNCONSTRAINED):
        super().__init__(x1, feasible_set)
        if eta <= 0.0:
            raise InvalidConstants("step size must be positive")
        self.eta = float(eta)
        self.preconditioner = preconditioner
        self.spd_bounds = preconditioner.bounds

    def observe(self, loss, t, next_loss=None):  # noqa: ARG002
        A = self.preconditioner.matrix(t, loss, self.x)
        y = self.x - self.eta * spd_solve(A, loss.grad(self.x))
        if self.constrained:
            y = project_a_norm(self.feasible_set, y, A).point
        self._commit(y)
        self.last_gradient_queries = 1


class OptimisticNewton(OnlineLearner):
    """Newton correction with the revealed loss, then a predicted Newton step.

    Initialization plays the auxiliary point itself (no prediction exists
    before any loss is revealed). Each later round first measures the gap
    between the stored predicted direction and the true one at the same
    query point, which accumulates the prediction-variation measure.
    """

    name = "oon"

    def __init__(self, x1, predictor, feasible_set: FeasibleSet = UNCONSTRAINED):
        if not isinstance(feasible_set, Unconstrained):
            raise InvalidConstants("the optimistic Newton learner is unconstrained only")
        super().__init__(x1, feasible_set)
        self.predictor = predictor
        self.needs_lookahead = predictor.needs_lookahead
        self.aux = self.x.copy()
        self.aux_history = []
        self.newton_gap_sq = []
        self.first_correction_sq = None
        self._pending_direction = None
        self._history = []

    def observe(self, loss, t, next_loss=None):
        query = self.aux
        true_dir = spd_solve(loss.hessian(query), loss.grad(query))
        self.last_gradient_queries = 1
        if t == 1:
            self.first_correction_sq = float(true_dir @ true_dir)
        elif self._pending_direction is not None:
            gap = self._pending_direction - true_dir
            self.newton_gap_sq.append(float(gap @ gap))
        self.aux = query - true_dir
        self.aux_history.append(self.aux.copy())
        self._history.append(loss)

        if self.needs_lookahead and next_loss is None:
            # Final round of a clairvoyant run: nothing left to predict.
            self._pending_direction = None
            self.last_predicted_queries = 0
            self._commit(self.aux.copy())
            return
        M, m = self.predictor.predict(self.aux, tuple(self._history), next_loss)
        predicted_dir = spd_solve(M, m)
        self._pending_direction = predicted_dir
        self.last_predicted_queries = 1
        self._commit(self.aux - predicted_dir)

    def trace_extras(self) -> dict:
        return {
            "predictor": self.predictor.kind,
            "oracle": self.predictor.needs_lookahead,
            "aux_history": self.aux_history,
            "newton_gap_sq": self.newton_gap_sq,
            "first_correction_sq": self.first_correction_sq,
        }


class MultiGradientDescent(OnlineLearner):
    """K_t (projected) gradient steps on each revealed loss."""

    name = "omgd"

    def __init__(self, x1, eta: float, mu: float, L: float,
                 feasible_set: FeasibleSet = UNCONSTRAINED):
        super().__init__(x1, feasible_set)
        if not (0.0 < mu <= L):
            raise InvalidConstants(f"need 0 < mu <= L, got mu={mu}, L={L}")
        limit = 1.0 / L if self.constrained else 2.0 / (mu + L)
        if not 0.0 < eta <= limit:
            raise InvalidConstants(
                f"eta={eta} outside (0, {limit}] for "
                f"{'constrained' if self.constrained else 'unconstrained'} mode"
            )
        rho = contraction_factor(eta, mu, L, self.constrained)
        if not 0.0 < rho < 1.0:
            raise InvalidConstants(f"contraction factor {rho} outside (0, 1)")
        self.eta = float(eta)
        self.mu = float(mu)
        self.L = float(L)
        self.inner_counts = []

    def observe(self, loss, t, next_loss=None):  # noqa: ARG002
        count = omgd_inner_count(t, self.eta, self.mu, self.L, self.constrained)
        z = self.x
        for _ in range(count):
            z = z - self.eta * loss.grad(z)
            if self.constrained:
                z = project_euclidean(self.feasible_set, z).point
        self._commit(z)
        self.last_gradient_queries = count
        self.inner_counts.append(count)

    def trace_extras(self) -> dict:
        return {"inner_counts": self.inner_counts}


# ---------------------------------------------------------------------------
# Online protocol
# ---------------------------------------------------------------------------

def run_online(seq: FunctionSequence, learner: OnlineLearner) -> RunTrace:
    """Drive one learner through the sequence and return its trace.

    Per round: the learner's action is recorded and charged against the
    round's loss, then (and only then) the loss is revealed to the learner.
    The next round's loss is additionally handed over only when the learner
    declares `needs_lookahead`, so causal learners can never peek ahead.
    """
    S = seq.feasible_set
    minimizer_cache = {}  # id(loss) -> (feasible minimizer, loss value there)
    rounds = []
    horizon = seq.horizon
    aux_exact = hasattr(learner, "aux")
    for t in range(1, horizon + 1):
        loss = seq.loss(t)
        key = id(loss)
        if key not in minimizer_cache:
            x_star = feasible_minimizer(loss, S)
            minimizer_cache[key] = (x_star, loss.value(x_star))
        x_star, fstar = minimizer_cache[key]
        x = learner.action().copy()
        fx = loss.value(x)
        next_loss = seq.loss(t + 1) if (learner.needs_lookahead and t < horizon) else None
        learner.observe(loss, t, next_loss)
        if aux_exact and seq.hessian_lipschitz == 0.0:
            # constant Hessian: one Newton correction must land on the
            # round's minimizer, so the locality guarantees degenerate to
            # an exactness statement checked every round
            gap = float(np.linalg.norm(learner.aux - loss.center))
            assert gap <= 1e-9, f"round {t}: Newton correction off by {gap:.3e}"
        rounds.append(RoundRecord(
            t=t, action=x, minimizer=x_star, loss_at_action=fx,
            loss_at_minimizer=fstar, regret=fx - fstar,
            gradient_queries=learner.last_gradient_queries,
            predicted_queries=learner.last_predicted_queries,
        ))
    extras = learner.trace_extras()
    return RunTrace(
        ledger=RegretLedger(rounds),
        algorithm=learner.name,
        eta=learner.eta,
        spd_bounds=learner.spd_bounds,
        constrained=learner.constrained,
        predictor=extras.get("predictor"),
        oracle=extras.get("oracle", False),
        aux_history=extras.get("aux_history"),
        newton_gap_sq=extras.get("newton_gap_sq"),
        first_correction_sq=extras.get("first_correction_sq"),
        inner_counts=extras.get("inner_counts"),
    )


__all__ = [
    "DIVERGENCE_LIMIT",
    "GradientDescent",
    "IdentityPreconditioner",
    "MultiGradientDescent",
    "OnlineLearner",
    "OptimisticNewton",
    "OraclePredictor",
    "PreconditionedDescent",
    "RegularizedNewtonPreconditioner",
    "StalePredictor",
    "check_theorem1_admissible",
    "contraction_factor",
    "omgd_inner_count",
    "regularized_newton_preconditioner",
    "regularized_newton_threshold",
    "run_online",
    "theorem1_step_size",
]
