"""Projections onto balls and boxes in the Euclidean and A-weighted norms.

The weighted projection argmin_{x in S} ||y - x||_A is what the constrained
preconditioned learner needs each round; it also computes the feasible
minimizer of a quadratic over S (project the center under the curvature
norm). Points already inside S short-circuit to the input bit-identically,
which keeps constrained and unconstrained trajectories exactly equal while
the constraint is slack.

Solvers:
  * Ball, weighted norm: single-multiplier KKT system; safeguarded bisection
    on the multiplier after one eigendecomposition of A.
  * Box, weighted norm: coordinate clipping when A is diagonal (fast path),
    otherwise a primal active-set method on the bound constraints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DimensionMismatch, InvalidConstants, NoConvergence, NotPositiveDefinite
from .linalg import as_vector, check_symmetric

MAX_SOLVER_ITERATIONS = 10_000
_CONSTRAINT_TOL = 1e-10


@dataclass(frozen=True)
class Unconstrained:
    """Sentinel feasible set: the whole space."""

    def contains(self, x) -> bool:  # noqa: ARG002 - everything is feasible
        return True

    def diameter(self) -> float:
        return float("inf")

    def to_dict(self) -> dict:
        return {"kind": "unconstrained"}


@dataclass(frozen=True)
class Ball:
    """Euclidean ball {x : ||x - center|| <= radius}."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not (self.radius > 0.0 and np.isfinite(self.radius)):
            raise InvalidConstants(f"ball radius must be positive, got {self.radius}")

    def contains(self, x) -> bool:
        return float(np.linalg.norm(np.asarray(x) - self.center)) <= self.radius

    def diameter(self) -> float:
        return 2.0 * self.radius

    def to_dict(self) -> dict:
        return {"kind": "ball", "center": _hex_list(self.center), "radius": float.hex(float(self.radius))}


@dataclass(frozen=True)
class Box:
    """Axis-aligned box {x : lower <= x <= upper} (coordinate-wise)."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lower)
        hi = as_vector(self.upper)
        if lo.size != hi.size:
            raise DimensionMismatch("box bounds have different sizes")
        if np.any(lo > hi):
            raise InvalidConstants("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def contains(self, x) -> bool:
        v = np.asarray(x)
        return bool(np.all(v >= self.lower) and np.all(v <= self.upper))

    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def to_dict(self) -> dict:
        return {"kind": "box", "lower": _hex_list(self.lower), "upper": _hex_list(self.upper)}


FeasibleSet = Union[Unconstrained, Ball, Box]

UNCONSTRAINED = Unconstrained()


def _hex_list(v: np.ndarray) -> list:
    return [float.hex(float(x)) for x in v]


def feasible_set_from_dict(d: dict) -> FeasibleSet:
    kind = d.get("kind")
    if kind == "unconstrained":
        return UNCONSTRAINED
    if kind == "ball":
        return Ball(_floats(d["center"]), _float(d["radius"]))
    if kind == "box":
        return Box(_floats(d["lower"]), _floats(d["upper"]))
    raise InvalidConstants(f"unknown feasible set kind {kind!r}")


def _float(x) -> float:
    return float.fromhex(x) if isinstance(x, str) else float(x)


def _floats(xs) -> np.ndarray:
    return np.array([_float(x) for x in xs], dtype=np.float64)


@dataclass(frozen=True)
class ProjectionResult:
    point: np.ndarray
    kkt_residual: float


def _check_dims(S: FeasibleSet, y: np.ndarray) -> None:
    if isinstance(S, Ball) and S.center.size != y.size:
        raise DimensionMismatch("point and ball center dimensions differ")
    if isinstance(S, Box) and S.lower.size != y.size:
        raise DimensionMismatch("point and box dimensions differ")


def project_euclidean(S: FeasibleSet, y) -> ProjectionResult:
    """Nearest point of S in the Euclidean norm.

    A point already in S is returned unchanged (bit-identical).
    """
    v = as_vector(y)
    _check_dims(S, v)
    if isinstance(S, Unconstrained):
        return ProjectionResult(v.copy(), 0.0)

    if isinstance(S, Ball):
        d = v - S.center
        dist = float(np.linalg.norm(d))
        if dist <= S.radius:
            return ProjectionResult(v.copy(), 0.0)
        point = S.center + d * (S.radius / dist)
        nu = (dist - S.radius) / S.radius
        stationarity = float(np.linalg.norm((point - v) + nu * (point - S.center)))
        feas = abs(float(np.linalg.norm(point - S.center)) - S.radius)
        return ProjectionResult(point, max(stationarity, feas))

    if S.contains(v):
        return ProjectionResult(v.copy(), 0.0)
    point = np.clip(v, S.lower, S.upper)
    return ProjectionResult(point, _box_kkt_residual(np.eye(v.size), point, v, S))


def project_a_norm(S: FeasibleSet, y, A) -> ProjectionResult:
    """Nearest point of S in the A-weighted norm, for SPD A.

    Reduces to the Euclidean projection when A is exactly the identity, and
    short-circuits bit-identically when y is already feasible.
    """
    v = as_vector(y)
    M = check_symmetric(A)
    if M.shape[0] != v.size:
        raise DimensionMismatch("weight matrix and point dimensions differ")
    _check_dims(S, v)

    if isinstance(S, Unconstrained):
        return ProjectionResult(v.copy(), 0.0)
    if np.array_equal(M, np.eye(v.size)):
        return project_euclidean(S, v)
    if S.contains(v):
        return ProjectionResult(v.copy(), 0.0)

    if isinstance(S, Ball):
        return _ball_weighted(S, v, M)
    if np.count_nonzero(M - np.diag(np.diagonal(M))) == 0:
        # Diagonal weights separate per coordinate; clipping is exact.
        point = np.clip(v, S.lower, S.upper)
        return ProjectionResult(point, _box_kkt_residual(M, point, v, S))
    return _box_weighted_active_set(S, v, M)


def _ball_weighted(S: Ball, y: np.ndarray, A: np.ndarray) -> ProjectionResult:
    """KKT system A(x - y) + nu (x - center) = 0 solved by bisection on nu.

    With A = V diag(lam) V', the constraint residual along nu is
    ||x(nu) - center|| = ||lam * z / (lam + nu)|| for z = V'(y - center),
    strictly decreasing in nu, so the root bracketing never stalls.
    """
    evals, vecs = np.linalg.eigh(A)
    if evals[0] <= 0.0:
        raise NotPositiveDefinite("weight matrix has a non-positive eigenvalue")
    z = vecs.T @ (y - S.center)

    def distance(nu: float) -> float:
        return float(np.linalg.norm(evals * z / (evals + nu)))

    lo, hi = 0.0, max(1.0, float(evals[-1]))
    it = 0
    while distance(hi) > S.radius:
        hi *= 2.0
        it += 1
        if it > MAX_SOLVER_ITERATIONS:
            raise NoConvergence("ball multiplier bracketing exceeded iteration cap")
    for _ in range(MAX_SOLVER_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break  # interval exhausted at float resolution
        if distance(mid) > S.radius:
            lo = mid
        else:
            hi = mid
    nu = hi  # feasible side of the bracket
    point = S.center + vecs @ (evals * z / (evals + nu))
    feas = abs(float(np.linalg.norm(point - S.center)) - S.radius)
    if feas > _CONSTRAINT_TOL:
        raise NoConvergence(f"ball constraint residual {feas:.3e} above tolerance")
    stationarity = float(np.linalg.norm(A @ (point - y) + nu * (point - S.center)))
    scale = 1.0 + float(np.linalg.norm(A @ (point - y)))
    return ProjectionResult(point, max(feas, stationarity / scale))


def _box_kkt_residual(A: np.ndarray, x: np.ndarray, y: np.ndarray, S: Box) -> float:
    """Norm of the KKT violation of min ||x-y||_A^2 over the box at x."""
    g = A @ (x - y)
    at_lower = x <= S.lower
    at_upper = x >= S.upper
    viol = np.abs(g)
    viol[at_lower] = np.maximum(0.0, -g[at_lower])
    viol[at_upper] = np.maximum(0.0, g[at_upper])
    both = at_lower & at_upper  # degenerate interval: coordinate is fixed
    viol[both] = 0.0
    return float(np.linalg.norm(viol))


def _box_weighted_active_set(S: Box, y: np.ndarray, A: np.ndarray) -> ProjectionResult:
    """Primal active-set method for min (x-y)'A(x-y) s.t. lower <= x <= upper.

    Maintains a feasible iterate; each cycle either moves to the
    equality-constrained minimizer over the free coordinates or takes the
    longest feasible step toward it and activates the blocking bound.
    Finite termination follows from strict convexity; the iteration cap is
    a hard stop regardless.
    """
    n = y.size
    x = np.clip(y, S.lower, S.upper)
    state = np.zeros(n, dtype=np.int8)  # -1 lower, +1 upper, 0 free
    state[x <= S.lower] = -1
    state[x >= S.upper] = 1
    fixed_pair = S.lower >= S.upper  # degenerate coordinates stay pinned
    Ay = A @ y
    span = float(np.max(S.upper[np.isfinite(S.upper)], initial=1.0))
    tol = 1e-13 * max(1.0, float(np.max(np.abs(A))) * max(1.0, float(np.max(np.abs(y))), span))

    for _ in range(MAX_SOLVER_ITERATIONS):
        free = state == 0
        target = x.copy()
        if np.any(free):
            idx = np.flatnonzero(free)
            bnd = np.flatnonzero(~free)
            rhs = Ay[idx]
            if bnd.size:
                rhs = rhs - A[np.ix_(idx, bnd)] @ x[bnd]
            try:
                target[idx] = np.linalg.solve(A[np.ix_(idx, idx)], rhs)
            except np.linalg.LinAlgError as exc:
                raise NotPositiveDefinite(str(exc)) from exc

        below = free & (target < S.lower - tol)
        above = free & (target > S.upper + tol)
        if not np.any(below) and not np.any(above):
            x = np.clip(target, S.lower, S.upper)
            g = A @ (x - y)
            lam = np.where(state == -1, g, np.where(state == 1, -g, np.inf))
            lam[fixed_pair] = np.inf
            worst = int(np.argmin(lam))
            if lam[worst] >= -tol:
                return ProjectionResult(x, _box_kkt_residual(A, x, y, S))
            state[worst] = 0
            continue

        d = target - x
        alpha = 1.0
        blocking = -1
        hit = 0
        for i in np.flatnonzero(free):
            if d[i] > tol:
                step = (S.upper[i] - x[i]) / d[i]
            elif d[i] < -tol:
                step = (S.lower[i] - x[i]) / d[i]
            else:
                continue
            if step < alpha:
                alpha = step
                blocking = i
                hit = 1 if d[i] > 0 else -1
        x = x + alpha * d
        if blocking >= 0:
            x[blocking] = S.upper[blocking] if hit > 0 else S.lower[blocking]
            state[blocking] = hit
    raise NoConvergence("box active-set method exceeded iteration cap")
