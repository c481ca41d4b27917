"""Time-varying quadratic losses with exact constants and known minimizers.

A loss is f(x) = 0.5 (x - center)' Q (x - center) + offset with SPD
curvature Q, so strong convexity / smoothness constants, gradients,
Hessians, and minimizers are all available in closed form and the Hessian
is globally constant (Lipschitz constant exactly zero). Sequence
generators produce the adversarial families the experiments need:

  * gen_alternating_offset  - fixed minimizer, the loss value jumps by +1
    on even rounds (function variation grows linearly, path length zero);
  * gen_alternating_center_decay - minimizer alternates between 0 and a
    target while the curvature decays like 2/t (path length linear,
    function variation logarithmic); strong convexity is not bounded away
    from zero here, so the sequence is tagged regularity_only and the
    harness refuses bound checks on it;
  * gen_random_walk - minimizer takes bounded random steps, every curvature
    is a random rotation whose spectrum spans [mu, L] exactly;
  * gen_static - one fixed quadratic repeated each round.

FunctionSequence serializes to JSON with hex-float encoding so round trips
are bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, InvalidConstants, UnsupportedEnvironment
from .linalg import as_vector, check_symmetric, eig_extremes
from .projections import (
    UNCONSTRAINED,
    FeasibleSet,
    Unconstrained,
    feasible_set_from_dict,
    project_a_norm,
)


@dataclass(frozen=True)
class QuadraticLoss:
    """f(x) = 0.5 (x - center)' curvature (x - center) + offset."""

    curvature: np.ndarray
    center: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        Q = check_symmetric(self.curvature)
        c = as_vector(self.center)
        if Q.shape[0] != c.size:
            raise DimensionMismatch("curvature and center dimensions differ")
        Q = Q.copy()
        c = c.copy()
        Q.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "curvature", Q)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.center.size

    def value(self, x) -> float:
        p = np.asarray(x, dtype=np.float64)
        if p.shape != self.center.shape:
            raise DimensionMismatch("point dimension differs from loss dimension")
        d = p - self.center
        return 0.5 * float(d @ (self.curvature @ d)) + self.offset

    def values(self, points: np.ndarray) -> np.ndarray:
        """Vectorized value over rows of `points` (m x n)."""
        D = np.asarray(points, dtype=np.float64) - self.center
        return 0.5 * np.einsum("ij,ij->i", D @ self.curvature, D) + self.offset

    def grad(self, x) -> np.ndarray:
        p = np.asarray(x, dtype=np.float64)
        if p.shape != self.center.shape:
            raise DimensionMismatch("point dimension differs from loss dimension")
        return self.curvature @ (p - self.center)

    def hessian(self, x=None) -> np.ndarray:  # noqa: ARG002 - constant in x
        return self.curvature

    @property
    def minimizer(self) -> np.ndarray:
        """Unconstrained minimizer (the center)."""
        return self.center


@dataclass(frozen=True)
class FunctionSequence:
    """Ordered adversarial sequence of quadratic losses plus its constants.

    `strong_convexity` and `smoothness` are the extreme eigenvalues over
    the whole sequence; `hessian_lipschitz` is exactly 0 for quadratics.
    `regularity_only` marks sequences whose per-round strong convexity is
    not bounded away from zero (bound checks are refused on them).
    """

    losses: tuple
    feasible_set: FeasibleSet = UNCONSTRAINED
    strong_convexity: float = 0.0
    smoothness: float = 0.0
    hessian_lipschitz: float = 0.0
    regularity_only: bool = False
    kind: str = "custom"

    def __post_init__(self):
        if len(self.losses) < 1:
            raise InvalidConstants("a sequence needs at least one loss")
        object.__setattr__(self, "losses", tuple(self.losses))
        dims = {loss.dim for loss in self.losses}
        if len(dims) != 1:
            raise DimensionMismatch("losses have inconsistent dimensions")

    @property
    def horizon(self) -> int:
        return len(self.losses)

    @property
    def dim(self) -> int:
        return self.losses[0].dim

    def loss(self, t: int) -> QuadraticLoss:
        """Loss of round t (1-based)."""
        if not 1 <= t <= self.horizon:
            raise IndexError(f"round {t} outside horizon {self.horizon}")
        return self.losses[t - 1]

    def minimizers(self) -> list:
        """Feasible per-round minimizers.

        Unconstrained they are the centers; otherwise the curvature-norm
        projection of each center onto the feasible set.
        """
        return [feasible_minimizer(loss, self.feasible_set) for loss in self.losses]

    @classmethod
    def from_losses(cls, losses, feasible_set: FeasibleSet = UNCONSTRAINED,
                    regularity_only: bool = False, kind: str = "custom") -> "FunctionSequence":
        """Build a sequence, computing (mu, L) from the actual spectra."""
        losses = tuple(losses)
        mu = np.inf
        L = -np.inf
        for loss in losses:
            bounds = eig_extremes(loss.curvature)
            mu = min(mu, bounds.lambda_min)
            L = max(L, bounds.lambda_max)
        return cls(losses, feasible_set, float(mu), float(L), 0.0,
                   regularity_only, kind)


def feasible_minimizer(loss: QuadraticLoss, S: FeasibleSet) -> np.ndarray:
    """argmin of the loss over S: the curvature-norm projection of the center."""
    if isinstance(S, Unconstrained):
        return loss.center.copy()
    return project_a_norm(S, loss.center, loss.curvature).point


# ---------------------------------------------------------------------------
# Sequence generators
# ---------------------------------------------------------------------------

def gen_alternating_offset(dim: int, horizon: int, x_star,
                           feasible_set: FeasibleSet = UNCONSTRAINED) -> FunctionSequence:
    """Squared distance to a fixed anchor; even rounds add a constant +1.

    Curvature is 2I throughout (mu = L = 2), so the minimizer path length
    is exactly zero while the function variation is exactly horizon - 1.
    """
    if horizon < 2:
        raise InvalidConstants("need horizon >= 2")
    anchor = as_vector(x_star)
    if anchor.size != dim:
        raise DimensionMismatch("anchor dimension differs from requested dim")
    Q = 2.0 * np.eye(dim)
    losses = [QuadraticLoss(Q, anchor, offset=0.0 if t % 2 == 1 else 1.0)
              for t in range(1, horizon + 1)]
    return FunctionSequence(losses, feasible_set, 2.0, 2.0, 0.0, False,
                            "alternating_offset")


def gen_alternating_center_decay(dim: int, horizon: int, y,
                                 feasible_set: FeasibleSet = UNCONSTRAINED) -> FunctionSequence:
    """||x||^2 / t on odd rounds, ||x - y||^2 / t on even rounds.

    Per-round strong convexity decays like 2/t, so no horizon-independent
    mu > 0 exists: the sequence is for regularity comparison only.
    """
    if horizon < 2:
        raise InvalidConstants("need horizon >= 2")
    target = as_vector(y)
    if target.size != dim:
        raise DimensionMismatch("target dimension differs from requested dim")
    origin = np.zeros(dim)
    eye = np.eye(dim)
    losses = [QuadraticLoss((2.0 / t) * eye, origin if t % 2 == 1 else target)
              for t in range(1, horizon + 1)]
    return FunctionSequence(losses, feasible_set, 2.0 / horizon, 2.0, 0.0, True,
                            "alternating_center_decay")


def _unchecked_quadratic(Q: np.ndarray, c: np.ndarray, offset: float = 0.0) -> QuadraticLoss:
    """Construct a loss from arrays that were already validated in batch."""
    loss = object.__new__(QuadraticLoss)
    Q.setflags(write=False)
    c.setflags(write=False)
    object.__setattr__(loss, "curvature", Q)
    object.__setattr__(loss, "center", c)
    object.__setattr__(loss, "offset", float(offset))
    return loss


def _spectrum_spanning(rng: np.random.Generator, dim: int, mu: float, L: float) -> np.ndarray:
    """Eigenvalues inside [mu, L] with both endpoints pinned exactly."""
    if dim == 1:
        return np.array([mu])
    inner = rng.uniform(mu, L, size=dim - 2) if dim > 2 else np.empty(0)
    return np.concatenate(([mu], np.sort(inner), [L]))


def _random_rotation(rng: np.random.Generator, dim: int) -> np.ndarray:
    M = rng.normal(size=(dim, dim))
    Qr, R = np.linalg.qr(M)
    return Qr * np.sign(np.diagonal(R))


def _random_curvature(rng: np.random.Generator, dim: int, mu: float, L: float) -> np.ndarray:
    if mu == L:
        return mu * np.eye(dim)
    evals = _spectrum_spanning(rng, dim, mu, L)
    U = _random_rotation(rng, dim)
    Q = (U * evals) @ U.T
    return 0.5 * (Q + Q.T)


def _batch_random_curvatures(rng: np.random.Generator, count: int, dim: int,
                             mu: float, L: float) -> np.ndarray:
    """Stack of `count` rotated diagonals, each spanning [mu, L] exactly."""
    if mu == L:
        return np.broadcast_to(mu * np.eye(dim), (count, dim, dim)).copy()
    if dim > 2:
        inner = np.sort(rng.uniform(mu, L, size=(count, dim - 2)), axis=1)
        evals = np.concatenate(
            [np.full((count, 1), mu), inner, np.full((count, 1), L)], axis=1)
    else:
        evals = np.tile([mu, L], (count, 1))
    U, R = np.linalg.qr(rng.normal(size=(count, dim, dim)))
    signs = np.sign(np.diagonal(R, axis1=1, axis2=2))
    signs[signs == 0.0] = 1.0
    U = U * signs[:, None, :]
    Qs = np.einsum("tij,tj,tkj->tik", U, evals, U)
    return 0.5 * (Qs + np.transpose(Qs, (0, 2, 1)))


def gen_random_walk(dim: int, horizon: int, mu: float, L: float,
                    step_bound: float, seed: int,
                    feasible_set: FeasibleSet = UNCONSTRAINED,
                    start=None) -> FunctionSequence:
    """Minimizer random walk with per-step norm at most step_bound.

    Each round's curvature is an independently drawn rotation of a diagonal
    whose spectrum spans [mu, L] exactly, so the declared constants are the
    true extremes. Deterministic in the seed; step_bound = 0 freezes the
    walk in place.
    """
    if not (0.0 < mu <= L):
        raise InvalidConstants(f"need 0 < mu <= L, got mu={mu}, L={L}")
    if step_bound < 0.0:
        raise InvalidConstants("step bound must be nonnegative")
    if horizon < 1:
        raise InvalidConstants("need horizon >= 1")
    if dim == 1 and mu < L:
        raise InvalidConstants("dim 1 cannot realize distinct mu and L exactly")
    rng = np.random.default_rng(seed)
    curvatures = _batch_random_curvatures(rng, horizon, dim, mu, L)
    center = as_vector(start).copy() if start is not None else rng.normal(size=dim)
    directions = rng.normal(size=(horizon - 1, dim)) if horizon > 1 else np.empty((0, dim))
    radii = rng.uniform(0.0, step_bound, size=horizon - 1) if horizon > 1 else np.empty(0)
    losses = []
    for t in range(horizon):
        losses.append(_unchecked_quadratic(curvatures[t], center))
        if t == horizon - 1:
            break
        direction = directions[t]
        norm = np.linalg.norm(direction)
        while norm == 0.0:
            direction = rng.normal(size=dim)
            norm = np.linalg.norm(direction)
        delta = direction * (radii[t] / norm)
        nxt = center + delta
        # Re-rounding of center + delta can overshoot by an ulp; pull back.
        if np.linalg.norm(nxt - center) > step_bound:
            nxt = center + delta * (1.0 - 1e-9)
        center = nxt
    return FunctionSequence(losses, feasible_set, float(mu), float(L), 0.0, False,
                            "random_walk")


def gen_static(dim: int, horizon: int, mu: float, L: float, seed: int,
               feasible_set: FeasibleSet = UNCONSTRAINED,
               center=None) -> FunctionSequence:
    """One fixed quadratic repeated every round."""
    if not (0.0 < mu <= L):
        raise InvalidConstants(f"need 0 < mu <= L, got mu={mu}, L={L}")
    if horizon < 1:
        raise InvalidConstants("need horizon >= 1")
    if dim == 1 and mu < L:
        raise InvalidConstants("dim 1 cannot realize distinct mu and L exactly")
    rng = np.random.default_rng(seed)
    c = as_vector(center).copy() if center is not None else rng.normal(size=dim)
    loss = QuadraticLoss(_random_curvature(rng, dim, mu, L), c)
    return FunctionSequence([loss] * horizon, feasible_set, float(mu), float(L),
                            0.0, False, "static")


# ---------------------------------------------------------------------------
# Environment specification (configuration-level description of a sequence)
# ---------------------------------------------------------------------------

ENVIRONMENT_KINDS = (
    "alternating_offset",
    "alternating_center_decay",
    "random_walk",
    "static",
    "custom",
)


@dataclass(frozen=True)
class EnvironmentSpec:
    """Declarative description of a function-sequence generator."""

    kind: str
    dimension: int
    horizon: int
    params: dict = field(default_factory=dict)
    feasible_set: FeasibleSet = UNCONSTRAINED

    def __post_init__(self):
        if self.kind not in ENVIRONMENT_KINDS:
            raise UnsupportedEnvironment(f"unknown environment kind {self.kind!r}")
        if self.dimension < 1 or self.horizon < 1:
            raise InvalidConstants("dimension and horizon must be >= 1")

    def build(self, seed: Optional[int] = None, horizon: Optional[int] = None) -> FunctionSequence:
        T = horizon if horizon is not None else self.horizon
        p = self.params
        if self.kind == "alternating_offset":
            anchor = p.get("x_star", np.zeros(self.dimension))
            return gen_alternating_offset(self.dimension, T, anchor, self.feasible_set)
        if self.kind == "alternating_center_decay":
            target = p.get("y")
            if target is None:
                raise InvalidConstants("alternating_center_decay needs parameter 'y'")
            return gen_alternating_center_decay(self.dimension, T, target, self.feasible_set)
        if self.kind == "random_walk":
            used_seed = seed if seed is not None else p.get("seed", 0)
            return gen_random_walk(self.dimension, T, p["mu"], p["L"],
                                   p["step_bound"], used_seed, self.feasible_set,
                                   start=p.get("start"))
        if self.kind == "static":
            used_seed = seed if seed is not None else p.get("seed", 0)
            return gen_static(self.dimension, T, p["mu"], p["L"], used_seed,
                              self.feasible_set, center=p.get("center"))
        seq = p.get("sequence")
        if seq is None:
            raise InvalidConstants("custom environment needs an inline 'sequence'")
        built = sequence_from_dict(seq) if isinstance(seq, dict) else seq
        if horizon is not None and built.horizon != horizon:
            raise InvalidConstants("custom sequence horizon differs from requested")
        return built


# ---------------------------------------------------------------------------
# Serialization (hex-float JSON; round trips are bit-exact)
# ---------------------------------------------------------------------------

def _hex(x: float) -> str:
    return float.hex(float(x))


def _unhex(x) -> float:
    return float.fromhex(x) if isinstance(x, str) else float(x)


def sequence_to_dict(seq: FunctionSequence) -> dict:
    return {
        "dim": seq.dim,
        "T": seq.horizon,
        "mu": _hex(seq.strong_convexity),
        "L": _hex(seq.smoothness),
        "losses": [
            {
                "Q": [[_hex(v) for v in row] for row in loss.curvature],
                "c": [_hex(v) for v in loss.center],
                "offset": _hex(loss.offset),
            }
            for loss in seq.losses
        ],
        "feasible_set": seq.feasible_set.to_dict(),
        "regularity_only": seq.regularity_only,
        "kind": seq.kind,
    }


def sequence_from_dict(d: dict) -> FunctionSequence:
    dim = int(d["dim"])
    losses = []
    for entry in d["losses"]:
        Q = np.array([[_unhex(v) for v in row] for row in entry["Q"]], dtype=np.float64)
        c = np.array([_unhex(v) for v in entry["c"]], dtype=np.float64)
        losses.append(QuadraticLoss(Q, c, _unhex(entry["offset"])))
    if len(losses) != int(d["T"]) or (losses and losses[0].dim != dim):
        raise InvalidConstants("sequence document is inconsistent")
    return FunctionSequence(
        losses,
        feasible_set_from_dict(d.get("feasible_set", {"kind": "unconstrained"})),
        _unhex(d["mu"]),
        _unhex(d["L"]),
        0.0,
        bool(d.get("regularity_only", False)),
        str(d.get("kind", "custom")),
    )


def save_sequence(seq: FunctionSequence, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sequence_to_dict(seq), fh, indent=1)
        fh.write("\n")


def load_sequence(path) -> FunctionSequence:
    with open(path, encoding="utf-8") as fh:
        return sequence_from_dict(json.load(fh))
