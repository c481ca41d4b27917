"""Configuration-driven experiment runner.

A config (TOML for hand-written files, JSON for machine round trips; one
schema for both) declares an environment, a list of learners, seeds, and
the bound checks to verify. `run_experiment` builds the sequence per seed,
drives each learner through the online protocol, computes regularity
measures and the requested bound reports, and writes one CSV ledger per
(learner, seed) plus one JSON summary.

Determinism: a (config, seed) pair fully determines every artifact byte;
wall-clock timings are reported on stdout only, never written to files.
Ledger floats are printed with 17 significant digits so re-reading a CSV
reproduces them bit-exactly.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigInvalid, DynRegretError, UnsupportedEnvironment
from .learners import (
    GradientDescent,
    IdentityPreconditioner,
    MultiGradientDescent,
    OptimisticNewton,
    OraclePredictor,
    PreconditionedDescent,
    RegularizedNewtonPreconditioner,
    StalePredictor,
    run_online,
)
from .losses import EnvironmentSpec, FunctionSequence, feasible_minimizer, save_sequence
from .projections import UNCONSTRAINED, feasible_set_from_dict, project_euclidean
from .regularity import (
    RegretLedger,
    RegularityReport,
    evaluate_bound,
    function_variation,
    path_length_p,
    regularity_report,
    theorem1_step_size,
)

OUT_DIR_ENV_VAR = "DYNREGRET_OUT_DIR"

ALGORITHMS = ("ogd", "opgd", "oon", "omgd")

BOUND_COMPATIBILITY = {
    "theorem1": lambda lc: lc.algorithm in ("ogd", "opgd") and not lc.constrained,
    "theorem2": lambda lc: lc.algorithm == "oon",
    "corollary3": lambda lc: lc.algorithm == "oon" and lc.predictor == "stale",
    "theorem3": lambda lc: lc.algorithm == "omgd" and not lc.constrained,
    "theorem5": lambda lc: lc.algorithm in ("ogd", "opgd") and lc.constrained,
    "theorem6": lambda lc: lc.algorithm == "omgd" and lc.constrained,
}


@dataclass(frozen=True)
class LearnerConfig:
    algorithm: str
    eta: object = "theorem1"  # float or the literal string "theorem1"
    preconditioner: str = "identity"
    zeta: Optional[float] = None
    predictor: str = "stale"
    constrained: bool = False
    x1: object = "zero"  # "zero" | "minimizer" | explicit list
    name: Optional[str] = None

    def label(self) -> str:
        if self.name:
            return self.name
        parts = [self.algorithm]
        if self.algorithm == "opgd" and self.preconditioner != "identity":
            parts.append(self.preconditioner)
        if self.algorithm == "oon":
            parts.append(self.predictor)
        if self.constrained:
            parts.append("constrained")
        return "_".join(parts)


@dataclass(frozen=True)
class ExperimentConfig:
    environment: EnvironmentSpec
    learners: tuple
    horizon: int
    seeds: tuple
    bound_checks: tuple = ()
    csv_path: Optional[str] = None
    json_path: Optional[str] = None
    sweep_horizons: tuple = ()


def _parse_learner(block: dict) -> LearnerConfig:
    algorithm = block.get("algorithm")
    if algorithm not in ALGORITHMS:
        raise ConfigInvalid(f"unknown algorithm {algorithm!r}")
    eta = block.get("eta", "theorem1")
    if isinstance(eta, str) and eta != "theorem1":
        raise ConfigInvalid(f"eta must be a number or 'theorem1', got {eta!r}")
    if not isinstance(eta, str):
        eta = float(eta)
        if eta <= 0.0:
            raise ConfigInvalid("eta must be positive")
    preconditioner = block.get("preconditioner", "identity")
    if preconditioner not in ("identity", "regularized_newton"):
        raise ConfigInvalid(f"unknown preconditioner {preconditioner!r}")
    predictor = block.get("predictor", "stale")
    if predictor not in ("stale", "oracle"):
        raise ConfigInvalid(f"unknown predictor {predictor!r}")
    if algorithm == "omgd" and isinstance(eta, str):
        raise ConfigInvalid("the multi-gradient learner needs a numeric eta")
    return LearnerConfig(
        algorithm=algorithm,
        eta=eta,
        preconditioner=preconditioner,
        zeta=float(block["zeta"]) if "zeta" in block else None,
        predictor=predictor,
        constrained=bool(block.get("constrained", False)),
        x1=block.get("x1", "zero"),
        name=block.get("name"),
    )


def parse_config(raw: dict) -> ExperimentConfig:
    try:
        env_block = dict(raw["environment"])
    except KeyError as exc:
        raise ConfigInvalid("config needs an [environment] block") from exc
    feasible = UNCONSTRAINED
    if "feasible_set" in env_block:
        feasible = feasible_set_from_dict(env_block.pop("feasible_set"))
    kind = env_block.pop("kind", None)
    dimension = env_block.pop("dimension", None)
    horizon = raw.get("horizon", env_block.pop("horizon", None))
    env_block.pop("horizon", None)
    if kind is None or dimension is None or horizon is None:
        raise ConfigInvalid("environment needs kind, dimension, and a horizon")
    try:
        environment = EnvironmentSpec(kind, int(dimension), int(horizon),
                                      dict(env_block), feasible)
    except DynRegretError as exc:
        raise ConfigInvalid(str(exc)) from exc

    learner_blocks = raw.get("learners", [])
    if not learner_blocks:
        raise ConfigInvalid("config needs at least one learner")
    learners = tuple(_parse_learner(dict(b)) for b in learner_blocks)
    labels = [lc.label() for lc in learners]
    if len(set(labels)) != len(labels):
        raise ConfigInvalid(f"learner labels are not unique: {labels}")

    seeds = tuple(int(s) for s in raw.get("seeds", [0]))
    if not seeds:
        raise ConfigInvalid("seeds must be nonempty")

    checks = tuple(raw.get("bound_checks", []))
    for check in checks:
        if check not in BOUND_COMPATIBILITY:
            raise ConfigInvalid(f"unknown bound check {check!r}")
        if not any(BOUND_COMPATIBILITY[check](lc) for lc in learners):
            raise ConfigInvalid(f"bound check {check!r} matches no configured learner")
    if checks and environment.kind == "alternating_center_decay":
        raise ConfigInvalid(
            "bound checks are refused on the decaying-curvature comparison sequence"
        )

    outputs = raw.get("outputs", {})
    sweep = raw.get("sweep", {})
    return ExperimentConfig(
        environment=environment,
        learners=learners,
        horizon=int(horizon),
        seeds=seeds,
        bound_checks=checks,
        csv_path=outputs.get("csv_path"),
        json_path=outputs.get("json_path"),
        sweep_horizons=tuple(int(t) for t in sweep.get("horizons", [])),
    )


def load_config(path) -> ExperimentConfig:
    """Read a TOML or JSON config file into an ExperimentConfig."""
    p = Path(path)
    try:
        if p.suffix.lower() == ".json":
            raw = json.loads(p.read_text(encoding="utf-8"))
        else:
            with open(p, "rb") as fh:
                raw = tomllib.load(fh)
    except (OSError, ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {p}: {exc}") from exc
    return parse_config(raw)


# ---------------------------------------------------------------------------
# Learner construction
# ---------------------------------------------------------------------------

def _resolve_x1(lc: LearnerConfig, seq: FunctionSequence) -> np.ndarray:
    if isinstance(lc.x1, str):
        if lc.x1 == "zero":
            x = np.zeros(seq.dim)
        elif lc.x1 == "minimizer":
            x = feasible_minimizer(seq.loss(1), seq.feasible_set)
        else:
            raise ConfigInvalid(f"unknown x1 mode {lc.x1!r}")
    else:
        x = np.asarray(lc.x1, dtype=np.float64)
        if x.shape != (seq.dim,):
            raise ConfigInvalid("explicit x1 has the wrong dimension")
    S = seq.feasible_set if lc.constrained else UNCONSTRAINED
    if lc.constrained and not S.contains(x):
        x = project_euclidean(S, x).point  # convenience: start from the nearest feasible point
    return x


def build_learner(lc: LearnerConfig, seq: FunctionSequence):
    """Instantiate a learner for this sequence, resolving eta and x1."""
    mu, L = seq.strong_convexity, seq.smoothness
    S = seq.feasible_set if lc.constrained else UNCONSTRAINED
    x1 = _resolve_x1(lc, seq)

    if lc.algorithm == "ogd":
        eta = theorem1_step_size(mu, L, 1.0) if lc.eta == "theorem1" else lc.eta
        return GradientDescent(x1, eta, S)
    if lc.algorithm == "opgd":
        if lc.preconditioner == "identity":
            precond = IdentityPreconditioner()
        else:
            if lc.zeta is None:
                raise ConfigInvalid("regularized_newton preconditioner needs zeta")
            precond = RegularizedNewtonPreconditioner(mu, L, lc.zeta)
        eta = (theorem1_step_size(mu, L, precond.bounds.lambda_min)
               if lc.eta == "theorem1" else lc.eta)
        return PreconditionedDescent(x1, eta, precond, S)
    if lc.algorithm == "oon":
        predictor = OraclePredictor() if lc.predictor == "oracle" else StalePredictor()
        return OptimisticNewton(x1, predictor, S)
    return MultiGradientDescent(x1, lc.eta, mu, L, S)


# ---------------------------------------------------------------------------
# Artifact emission
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def emit_csv(ledger: RegretLedger, path, bound_values: Optional[dict] = None) -> None:
    """Write the per-round ledger: header plus one row per round.

    Optional bound values are appended as constant columns so the file is
    directly plottable against the regret curve.
    """
    bound_values = bound_values or {}
    columns = ["t", "per_round_regret", "cumulative_regret", "step_norm",
               "gradient_queries"]
    columns += [f"{name}_bound" for name in sorted(bound_values)]
    steps = ledger.step_norms()
    lines = [",".join(columns)]
    running = 0.0
    for i, r in enumerate(ledger.rounds):
        running += r.regret
        row = [str(r.t), _fmt(r.regret), _fmt(running), _fmt(steps[i]),
               str(r.gradient_queries)]
        row += [_fmt(bound_values[name]) for name in sorted(bound_values)]
        lines.append(",".join(row))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv_column(path, column: str) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        idx = header.index(column)
        return np.array([float(line.strip().split(",")[idx]) for line in fh])


# ---------------------------------------------------------------------------
# Experiment driver
# ---------------------------------------------------------------------------

@dataclass
class LearnerRunSummary:
    learner: str
    seed: int
    algorithm: str
    oracle: bool
    final_regret: float
    gradient_queries: int
    predicted_queries: int
    regularity: RegularityReport
    bounds: list
    csv_path: Optional[str]
    wall_time: float  # stdout diagnostics only; never serialized

    def to_dict(self) -> dict:
        return {
            "learner": self.learner,
            "seed": self.seed,
            "algorithm": self.algorithm,
            "oracle": self.oracle,
            "final_regret": self.final_regret,
            "gradient_queries": self.gradient_queries,
            "predicted_queries": self.predicted_queries,
            "regularity": self.regularity.to_dict(),
            "bounds": [b.to_dict() for b in self.bounds],
            "csv_path": self.csv_path,
        }


@dataclass
class RunSummary:
    records: list = field(default_factory=list)

    def failed_checks(self) -> list:
        out = []
        for rec in self.records:
            for report in rec.bounds:
                if report.admissible and not report.satisfied():
                    out.append((rec.learner, rec.seed, report))
        return out

    def to_dict(self) -> dict:
        return {"runs": [rec.to_dict() for rec in self.records]}


def _out_root(out_dir: Optional[str]) -> Path:
    if out_dir:
        return Path(out_dir)
    return Path(os.environ.get(OUT_DIR_ENV_VAR, "out"))


def _csv_target(config: ExperimentConfig, out_dir: Optional[str],
                label: str, seed: int) -> Path:
    template = config.csv_path
    if template and ("{learner}" in template or "{seed}" in template):
        path = Path(template.format(learner=label, seed=seed))
    elif template:
        if len(config.learners) > 1 or len(config.seeds) > 1:
            raise ConfigInvalid(
                "csv_path needs {learner}/{seed} placeholders when the "
                "experiment produces multiple ledgers"
            )
        path = Path(template)
    else:
        path = Path(f"{label}-seed{seed}.csv")
    if not path.is_absolute():
        path = _out_root(out_dir) / path
    return path


def run_experiment(config: ExperimentConfig, out_dir: Optional[str] = None,
                   write_csv: bool = True, write_json: bool = True) -> RunSummary:
    """Run every (learner, seed) pair and emit CSV/JSON artifacts.

    Results are ordered by (learner label, seed) so output is independent of
    any internal execution order.
    """
    summary = RunSummary()
    for lc in sorted(config.learners, key=lambda l: l.label()):
        for seed in sorted(config.seeds):
            seq = config.environment.build(seed=seed, horizon=config.horizon)
            learner = build_learner(lc, seq)
            started = time.perf_counter()
            trace = run_online(seq, learner)
            elapsed = time.perf_counter() - started
            report = regularity_report(seq, trace)
            bounds = [
                evaluate_bound(check, seq, trace)
                for check in config.bound_checks
                if BOUND_COMPATIBILITY[check](lc)
            ]
            csv_path = None
            if write_csv:
                target = _csv_target(config, out_dir, lc.label(), seed)
                emit_csv(trace.ledger, target, {
                    b.theorem_id: b.bound_value for b in bounds
                    if b.admissible and b.bound_value is not None
                })
                # stored relative to the output root so summaries are
                # byte-identical regardless of where artifacts land
                root = _out_root(out_dir)
                try:
                    csv_path = str(target.relative_to(root))
                except ValueError:
                    csv_path = target.name
            summary.records.append(LearnerRunSummary(
                learner=lc.label(), seed=seed, algorithm=lc.algorithm,
                oracle=trace.oracle,
                final_regret=trace.ledger.cumulative_regret,
                gradient_queries=trace.ledger.total_gradient_queries(),
                predicted_queries=trace.ledger.total_predicted_queries(),
                regularity=report, bounds=bounds, csv_path=csv_path,
                wall_time=elapsed,
            ))
    if write_json:
        target = Path(config.json_path) if config.json_path else Path("summary.json")
        if not target.is_absolute():
            target = _out_root(out_dir) / target
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(summary.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")
    return summary


# ---------------------------------------------------------------------------
# Regularity comparison sweep
# ---------------------------------------------------------------------------

COMPARISON_KINDS = ("alternating_offset", "alternating_center_decay")


def compare_regularities(config: ExperimentConfig) -> list:
    """(T, V_T, squared path length) rows over a horizon sweep.

    Only the two constructed comparison environments are supported; the
    variation reference set is the convex hull of the minimizers.
    """
    env = config.environment
    if env.kind not in COMPARISON_KINDS:
        raise UnsupportedEnvironment(
            f"regularity comparison supports {COMPARISON_KINDS}, got {env.kind!r}"
        )
    horizons = config.sweep_horizons or (config.horizon,)
    rows = []
    for T in horizons:
        seq = env.build(horizon=T)
        mins = [loss.center for loss in seq.losses]
        variation, flag = function_variation(seq.losses, mins)
        rows.append({
            "T": T,
            "function_variation": variation,
            "variation_exactness": flag,
            "squared_path_length": path_length_p(mins, 2.0),
        })
    return rows


def write_comparison_csv(rows: list, path) -> None:
    lines = ["T,function_variation,variation_exactness,squared_path_length"]
    for row in rows:
        lines.append(
            f"{row['T']},{_fmt(row['function_variation'])},"
            f"{row['variation_exactness']},{_fmt(row['squared_path_length'])}"
        )
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def generate_environment(config_path, out_path, seed: Optional[int] = None,
                         horizon: Optional[int] = None) -> FunctionSequence:
    """Build the config's environment and save it as a sequence JSON."""
    config = load_config(config_path)
    seq = config.environment.build(
        seed=seed if seed is not None else config.seeds[0],
        horizon=horizon if horizon is not None else config.horizon,
    )
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_sequence(seq, out)
    return seq
