"""Experiment orchestration: optimization campaigns, design selection and
controller comparison, with CSV/SVG reporting.

File formats (all numerics printed with 12 significant digits, ``.`` decimal
separator, newline-terminated rows, header first):

* ``fronts.csv``   -- run_id, generation, individual_id, z_1..z_n, f_1..f_m
* ``metrics.csv``  -- algorithm, seed, igd, sp, hv, pd, spread
* ``summary.csv``  -- per-algorithm means/stds and paired win counts
* ``compare.csv``  -- overload, controller, f1, f2, f3, f4, max_abs_steering

The environment variable ``MOLSP_THREADS`` caps worker parallelism for the
per-seed optimization runs (absent means sequential); results are independent
of scheduling.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import metrics as metrics_mod
from .moea import EvolutionConfig, HistoryEntry, run
from .molsp import MolspConfig
from .mop import (
    APPLIED_SELECTED_Z,
    ProblemSpec,
    applied_problem,
    decode_applied,
    generic_nominal_uncertainty,
    generic_problem,
    perturbed_closed_loop,
    sample_delta,
)
from .rlqr import (
    GainResult,
    NotPositiveError,
    UncertaintySpec,
    lqr_gain,
    regulation_cost,
    rlqr_gain_steady,
    zero_uncertainty,
)
from .numkernel import SingularMatrixError
from .vehicle import (
    VehicleParams,
    algebraic_uncertainty,
    build_continuous,
    default_truck,
    discretize_zoh,
    payload_variant,
)

log = logging.getLogger(__name__)

APPLIED_DT = 0.1

DEFAULT_REFERENCE_POINTS = {
    "generic": (25.0, 25.0, 25.0),
    "applied": (5000.0, 10000.0, 5000.0, 5000.0),
}


class ConfigError(ValueError):
    """The experiment configuration file is malformed."""


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "generic"
    molsp_enabled: bool = True
    molsp_reference: tuple[float, ...] | None = None
    molsp_schedule: str = "every"
    molsp_per_component: bool = True
    seeds: tuple[int, ...] = tuple(range(10))
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    vehicle: VehicleParams = field(default_factory=default_truck)
    overloads: tuple[float, ...] = (0.0, 1.0, 2.0, 3.0)
    winner_sims: int = 1000
    output_dir: str = "results"

    def __post_init__(self):
        if self.problem not in ("generic", "applied"):
            raise ConfigError(f"unknown problem {self.problem!r}")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if any(o < -1 for o in self.overloads):
            raise ConfigError("overloads must be >= -1")

    @property
    def reference_point(self) -> np.ndarray:
        ref = self.molsp_reference or DEFAULT_REFERENCE_POINTS[self.problem]
        return np.asarray(ref, dtype=float)


_TOP_KEYS = {
    "problem",
    "molsp",
    "seeds",
    "evolution",
    "vehicle",
    "overloads",
    "winner_sims",
    "output_dir",
}
_MOLSP_KEYS = {"enabled", "reference_point", "schedule", "per_component_draws"}
_EVO_KEYS = {"population_size", "p_c", "p_m", "eta_c", "eta_m", "max_evaluations"}
_VEHICLE_KEYS = {"a", "b", "l", "v", "m", "payload", "j", "c1", "c2"}


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def load_config(path) -> ExperimentConfig:
    """Strictly parse a JSON experiment configuration (unknown keys rejected)."""
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    _check_keys(raw, _TOP_KEYS, "top level")
    kwargs: dict = {}
    if "problem" in raw:
        kwargs["problem"] = raw["problem"]
    if "seeds" in raw:
        kwargs["seeds"] = tuple(int(s) for s in raw["seeds"])
    if "overloads" in raw:
        kwargs["overloads"] = tuple(float(o) for o in raw["overloads"])
    if "winner_sims" in raw:
        kwargs["winner_sims"] = int(raw["winner_sims"])
    if "output_dir" in raw:
        kwargs["output_dir"] = str(raw["output_dir"])
    if "molsp" in raw:
        section = raw["molsp"]
        _check_keys(section, _MOLSP_KEYS, "molsp")
        if "enabled" in section:
            kwargs["molsp_enabled"] = bool(section["enabled"])
        if "reference_point" in section:
            kwargs["molsp_reference"] = tuple(float(v) for v in section["reference_point"])
        if "schedule" in section:
            kwargs["molsp_schedule"] = section["schedule"]
        if "per_component_draws" in section:
            kwargs["molsp_per_component"] = bool(section["per_component_draws"])
    if "evolution" in raw:
        section = raw["evolution"]
        _check_keys(section, _EVO_KEYS, "evolution")
        kwargs["evolution"] = EvolutionConfig(
            **{k: type(getattr(EvolutionConfig(), k))(v) for k, v in section.items()}
        )
    if "vehicle" in raw:
        section = raw["vehicle"]
        _check_keys(section, _VEHICLE_KEYS, "vehicle")
        kwargs["vehicle"] = dataclasses.replace(default_truck(), **section)
    try:
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def make_problem(config: ExperimentConfig) -> ProblemSpec:
    if config.problem == "generic":
        return generic_problem()
    return applied_problem(config.vehicle, dt=APPLIED_DT)


def make_molsp_config(config: ExperimentConfig) -> MolspConfig:
    return MolspConfig(
        reference_point=config.reference_point,
        enabled=True,
        per_component_draws=config.molsp_per_component,
        schedule=config.molsp_schedule,
    )


# ---------------------------------------------------------------------------
# Optimization campaign


@dataclass
class RunResult:
    algorithm: str
    seed: int
    history: list[HistoryEntry]
    final_front_z: np.ndarray
    final_front_f: np.ndarray


@dataclass
class MetricReport:
    problem: str
    reference_point: np.ndarray
    rows: list[dict]
    summary: list[dict]
    runs: list[RunResult]


def _run_task(args) -> RunResult:
    problem, evolution, molsp_config, algorithm, seed = args
    pop, history = run(problem, replace(evolution, seed=seed), molsp_config)
    final = history[-1]
    return RunResult(
        algorithm=algorithm,
        seed=seed,
        history=history,
        final_front_z=final.front_z,
        final_front_f=final.front_objectives,
    )


def _parallel_map(fn, tasks):
    workers = int(os.environ.get("MOLSP_THREADS", "1") or "1")
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def run_experiment(config: ExperimentConfig, output_dir=None) -> MetricReport:
    """Run the optimization campaign and write fronts/metrics/summary files.

    The plain engine always runs; the local-search arm is added when enabled.
    The surrogate optimum for IGD/Spread pools the final fronts of every run.
    """
    problem = make_problem(config)
    arms: list[tuple[str, MolspConfig | None]] = [("nsga2", None)]
    if config.molsp_enabled:
        arms.append(("nsga2_molsp", make_molsp_config(config)))
    tasks = [
        (problem, config.evolution, molsp_config, algorithm, seed)
        for algorithm, molsp_config in arms
        for seed in config.seeds
    ]
    runs = _parallel_map(_run_task, tasks)

    p_star = metrics_mod.build_reference_set([r.final_front_f for r in runs])
    ref = config.reference_point
    rows = []
    for r in runs:
        front = metrics_mod.nondominated_filter(r.final_front_f)
        rows.append(
            {
                "algorithm": r.algorithm,
                "seed": r.seed,
                "igd": metrics_mod.igd(front, p_star),
                "sp": metrics_mod.spacing(front) if front.shape[0] >= 2 else 0.0,
                "hv": metrics_mod.hypervolume(front, ref),
                "pd": metrics_mod.pure_diversity(front),
                "spread": metrics_mod.spread(front, p_star),
            }
        )
    summary = _summarize(rows, [a for a, _ in arms], list(config.seeds))
    report = MetricReport(
        problem=config.problem, reference_point=ref, rows=rows, summary=summary, runs=runs
    )
    emit_report(report, output_dir or config.output_dir)
    return report


_METRIC_NAMES = ("igd", "sp", "hv", "pd", "spread")
_HIGHER_IS_BETTER = {"igd": False, "sp": False, "hv": True, "pd": True, "spread": False}


def _summarize(rows, algorithms, seeds) -> list[dict]:
    by_algo = {a: [r for r in rows if r["algorithm"] == a] for a in algorithms}
    wins = {a: dict.fromkeys(_METRIC_NAMES, 0) for a in algorithms}
    if len(algorithms) == 2:
        a0, a1 = algorithms
        for seed in seeds:
            r0 = next(r for r in by_algo[a0] if r["seed"] == seed)
            r1 = next(r for r in by_algo[a1] if r["seed"] == seed)
            for name in _METRIC_NAMES:
                v0, v1 = r0[name], r1[name]
                if v0 == v1:
                    continue
                better = (v0 > v1) == _HIGHER_IS_BETTER[name]
                wins[a0 if better else a1][name] += 1
    summary = []
    for a in algorithms:
        entry: dict = {"algorithm": a, "n_seeds": len(by_algo[a])}
        for name in _METRIC_NAMES:
            vals = np.array([r[name] for r in by_algo[a]])
            entry[f"{name}_mean"] = float(vals.mean())
            entry[f"{name}_std"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        for name in _METRIC_NAMES:
            entry[f"wins_{name}"] = wins[a][name]
        summary.append(entry)
    return summary


# ---------------------------------------------------------------------------
# Winner histogram


def candidate_gain(problem: ProblemSpec, unc: UncertaintySpec) -> GainResult | None:
    """Steady robust gain on the nominal model, or None when the design fails."""
    try:
        gain = rlqr_gain_steady(problem.nominal_model, unc, problem.q, problem.r)
    except (SingularMatrixError, NotPositiveError):
        return None
    return gain if gain.converged else None


def winner_histogram(
    candidates: list[UncertaintySpec], problem: ProblemSpec, n_sims: int, seed: int
) -> np.ndarray:
    """Count, per candidate, the contraction-randomized simulations it wins.

    Each simulation draws one contraction, perturbs every candidate's plant
    along its own uncertainty direction, runs that candidate's precomputed
    gain from the problem's initial state, and awards the win to the least
    total cumulative squared error (ties to the lowest index).  Designs whose
    gain fails never win.
    """
    if not candidates:
        raise ValueError("need at least one candidate")
    gains = [candidate_gain(problem, c) for c in candidates]
    if all(g is None for g in gains):
        raise ValueError("every candidate design failed; no winner is defined")
    rng = np.random.default_rng(seed)
    counts = np.zeros(len(candidates), dtype=np.int64)
    for _ in range(n_sims):
        delta = sample_delta(rng)
        best_idx = -1
        best_err = np.inf
        for idx, (cand, gain) in enumerate(zip(candidates, gains)):
            if gain is None:
                continue
            m_cl = perturbed_closed_loop(problem.nominal_model, cand, gain.k, delta)
            sse = regulation_cost(m_cl, problem.x0, problem.horizon)
            err = float(sse.sum()) if np.isfinite(sse).all() else np.inf
            if err < best_err:
                best_err = err
                best_idx = idx
        counts[best_idx] += 1
    return counts


# ---------------------------------------------------------------------------
# Controller comparison over payload sweep


def lane_change_profile(n_steps: int, dt: float, offset: float = 3.5, duration: float = 5.0):
    """Smooth lateral reference offset: 0 to ``offset`` meters over ``duration`` s."""
    t = np.arange(n_steps + 1) * dt
    tau = np.clip(t / duration, 0.0, 1.0)
    return offset * 0.5 * (1.0 - np.cos(np.pi * tau))


def curvature_arc_profile(n_steps: int, dt: float, radius: float = 500.0, speed: float = 16.6667):
    """Lateral offset of a constant-curvature arc, small-angle approximation."""
    t = np.arange(n_steps + 1) * dt
    return (speed * t) ** 2 / (2.0 * radius)


def simulate_tracking(plant, k: np.ndarray, x0, reference_offsets: np.ndarray):
    """Closed-loop tracking of a moving lateral reference.

    The reference offset enters the lateral-displacement error directly:
    ``rho_{k+1}`` loses the reference increment of the step.  Returns
    ``(states, inputs, diverged)``; on divergence the arrays are truncated at
    the offending step.
    """
    n_steps = len(reference_offsets) - 1
    x = np.asarray(x0, dtype=float).reshape(-1)
    states = np.empty((n_steps + 1, plant.n_states))
    inputs = np.empty((n_steps, plant.n_inputs))
    states[0] = x
    for i in range(n_steps):
        u = k @ x
        inputs[i] = u
        x = plant.f @ x + plant.g @ u
        x[2] -= reference_offsets[i + 1] - reference_offsets[i]
        if np.abs(x).max() > 1e12:
            return states[: i + 1], inputs[: i + 1], True
        states[i + 1] = x
    return states, inputs, False


def steering_uncertainty(unc: UncertaintySpec) -> UncertaintySpec:
    """Restrict an uncertainty description to the steering input column.

    The tracking model's second input is the reference-curvature feedforward,
    not a physical actuator, so controller comparison and stability checks
    design and run gains in the steering-only world.
    """
    return UncertaintySpec(h=unc.h, e_f=unc.e_f, e_g=unc.e_g[:, :1], mu=unc.mu)


def _controller_designs(params: VehicleParams, dt: float) -> dict[str, UncertaintySpec | None]:
    return {
        "rlqr_mop": steering_uncertainty(decode_applied(APPLIED_SELECTED_Z)),
        "rlqr_algebraic": steering_uncertainty(algebraic_uncertainty(params, dt)),
        "lqr": None,
    }


def controller_gains(params: VehicleParams, dt: float = APPLIED_DT) -> dict[str, np.ndarray]:
    """Steering gains for the three compared controllers, designed on the
    nominal single-input model."""
    nominal = discretize_zoh(build_continuous(params, curvature_input=False), dt)
    q, r = np.eye(4), np.eye(1)
    gains: dict[str, np.ndarray] = {}
    for name, unc in _controller_designs(params, dt).items():
        if unc is None:
            gains[name] = lqr_gain(nominal, q, r).k
        else:
            result = rlqr_gain_steady(nominal, unc, q, r)
            if not result.converged:
                log.warning("gain for %s did not converge", name)
            gains[name] = result.k
    return gains


def compare_controllers(
    config: ExperimentConfig,
    output_dir=None,
    x0=(0.0, 0.0, 1.0, 0.0),
    horizon: int = 300,
) -> list[dict]:
    """Payload sweep: steering gains designed on the nominal model, simulated
    on the true overloaded plants through a lane-change maneuver.

    Returns one row per (overload, controller) with the mean squared error of
    each objective (lateral displacement, yaw rate, lateral velocity, heading
    error) and the peak steering magnitude; divergence flags the row with
    infinite errors.  Writes ``compare.csv`` and one displacement-trajectory
    SVG per case when ``output_dir`` is given.
    """
    params = config.vehicle
    dt = APPLIED_DT
    gains = controller_gains(params, dt)
    offsets = lane_change_profile(horizon, dt)
    objective_states = (2, 1, 0, 3)
    rows = []
    trajectories = {}
    for overload in config.overloads:
        plant = discretize_zoh(
            build_continuous(payload_variant(params, overload), curvature_input=False), dt
        )
        for name, k in gains.items():
            states, inputs, diverged = simulate_tracking(plant, k, x0, offsets)
            if diverged:
                mses = [np.inf] * 4
                steering = np.inf
            else:
                mse_all = (states**2).mean(axis=0)
                mses = [float(mse_all[j]) for j in objective_states]
                steering = float(np.abs(inputs[:, 0]).max())
            rows.append(
                {
                    "overload": overload,
                    "controller": name,
                    "f1": mses[0],
                    "f2": mses[1],
                    "f3": mses[2],
                    "f4": mses[3],
                    "max_abs_steering": steering,
                }
            )
            trajectories[(overload, name)] = states
    if output_dir is not None:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(
            out / "compare.csv",
            ["overload", "controller", "f1", "f2", "f3", "f4", "max_abs_steering"],
            [
                [
                    format_number(row["overload"]),
                    row["controller"],
                    *(format_number(row[c]) for c in ("f1", "f2", "f3", "f4", "max_abs_steering")),
                ]
                for row in rows
            ],
        )
        for (overload, name), states in trajectories.items():
            write_polyline_svg(
                out / f"trajectory_{name}_overload{int(round(overload * 100))}.svg",
                np.arange(states.shape[0]) * dt,
                states[:, 2],
                title=f"{name} lateral displacement, overload {overload:g}",
            )
    return rows


def closed_loop_radius(params: VehicleParams, overload: float, k: np.ndarray, dt: float = APPLIED_DT) -> float:
    """Spectral radius of the true overloaded steering-only plant under a fixed gain."""
    from .numkernel import spectral_radius

    plant = discretize_zoh(build_continuous(payload_variant(params, overload), curvature_input=False), dt)
    return spectral_radius(plant.f + plant.g @ k)


# ---------------------------------------------------------------------------
# Report emission


def format_number(x) -> str:
    """12-significant-digit decimal rendering used by every CSV."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def write_csv(path, header: list[str], rows: list[list[str]]) -> None:
    """Atomic CSV write: header plus preformatted rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_polyline_svg(path, xs, ys, title: str = "", width: int = 800, height: int = 500) -> None:
    """Minimal self-contained SVG with one polyline over a fixed viewport."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    margin = 40.0
    x_lo, x_hi = (xs.min(), xs.max()) if xs.size else (0.0, 1.0)
    y_lo, y_hi = (ys.min(), ys.max()) if ys.size else (0.0, 1.0)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0
    pts = " ".join(
        f"{margin + (x - x_lo) / x_span * (width - 2 * margin):.2f},"
        f"{height - margin - (y - y_lo) / y_span * (height - 2 * margin):.2f}"
        for x, y in zip(xs, ys)
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    body = (
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<text x="{margin}" y="{margin / 2 + 5}" font-size="14">{title}</text>\n'
        f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{pts}"/>\n'
        "</svg>\n"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_report(report: MetricReport, output_dir) -> None:
    """Write fronts.csv, metrics.csv, summary.csv and per-run convergence SVGs."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)

    front_rows = []
    n_vars = report.runs[0].final_front_z.shape[1] if report.runs else 0
    n_objs = report.runs[0].final_front_f.shape[1] if report.runs else 0
    for r in report.runs:
        run_id = f"{r.algorithm}-s{r.seed}"
        for entry in r.history:
            for idx in range(entry.front_z.shape[0]):
                front_rows.append(
                    [run_id, str(entry.generation), str(idx)]
                    + [format_number(v) for v in entry.front_z[idx]]
                    + [format_number(v) for v in entry.front_objectives[idx]]
                )
    write_csv(
        out / "fronts.csv",
        ["run_id", "generation", "individual_id"]
        + [f"z_{i + 1}" for i in range(n_vars)]
        + [f"f_{i + 1}" for i in range(n_objs)],
        front_rows,
    )

    write_csv(
        out / "metrics.csv",
        ["algorithm", "seed", "igd", "sp", "hv", "pd", "spread"],
        [
            [row["algorithm"], str(row["seed"])]
            + [format_number(row[m]) for m in _METRIC_NAMES]
            for row in report.rows
        ],
    )

    summary_cols = (
        ["algorithm", "n_seeds"]
        + [f"{m}_{stat}" for m in _METRIC_NAMES for stat in ("mean", "std")]
        + [f"wins_{m}" for m in _METRIC_NAMES]
    )
    write_csv(
        out / "summary.csv",
        summary_cols,
        [
            [str(entry[c]) if c in ("algorithm", "n_seeds") else format_number(entry[c]) for c in summary_cols]
            for entry in report.summary
        ],
    )

    for r in report.runs:
        gens = _spaced_indices(len(r.history), 30)
        evals = [r.history[i].evaluations for i in gens]
        hvs = [
            metrics_mod.hypervolume(r.history[i].front_objectives, report.reference_point)
            for i in gens
        ]
        write_polyline_svg(
            out / f"hv_{r.algorithm}-s{r.seed}.svg",
            evals,
            hvs,
            title=f"{r.algorithm} seed {r.seed}: front hypervolume vs evaluations",
        )


def _spaced_indices(n: int, max_points: int) -> list[int]:
    if n <= max_points:
        return list(range(n))
    return sorted(set(np.linspace(0, n - 1, max_points).astype(int).tolist()))


# ---------------------------------------------------------------------------
# Recompute indicators from saved fronts


def read_fronts_csv(path) -> dict[str, dict[int, tuple[np.ndarray, np.ndarray]]]:
    """Parse fronts.csv into {run_id: {generation: (Z, F)}}."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        z_cols = [i for i, c in enumerate(header) if c.startswith("z_")]
        f_cols = [i for i, c in enumerate(header) if c.startswith("f_")]
        data: dict[str, dict[int, list[tuple[list[float], list[float]]]]] = {}
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) < 3:
                continue
            run_id, gen = parts[0], int(parts[1])
            zs = [float(parts[i]) for i in z_cols]
            fs = [float(parts[i]) for i in f_cols]
            data.setdefault(run_id, {}).setdefault(gen, []).append((zs, fs))
    out: dict[str, dict[int, tuple[np.ndarray, np.ndarray]]] = {}
    for run_id, gens in data.items():
        out[run_id] = {
            gen: (np.array([z for z, _ in items]), np.array([f for _, f in items]))
            for gen, items in gens.items()
        }
    return out


def recompute_metrics(fronts_path, config: ExperimentConfig, output_dir) -> list[dict]:
    """Rebuild metrics.csv from a saved fronts.csv (final generation per run)."""
    saved = read_fronts_csv(fronts_path)
    finals = {run_id: gens[max(gens)] for run_id, gens in saved.items()}
    p_star = metrics_mod.build_reference_set([f for _, f in finals.values()])
    ref = config.reference_point
    rows = []
    for run_id in sorted(finals):
        _, front_f = finals[run_id]
        front = metrics_mod.nondominated_filter(front_f)
        algorithm, _, seed = run_id.rpartition("-s")
        rows.append(
            {
                "algorithm": algorithm,
                "seed": int(seed),
                "igd": metrics_mod.igd(front, p_star),
                "sp": metrics_mod.spacing(front) if front.shape[0] >= 2 else 0.0,
                "hv": metrics_mod.hypervolume(front, ref),
                "pd": metrics_mod.pure_diversity(front),
                "spread": metrics_mod.spread(front, p_star),
            }
        )
    out = Path(output_dir)
    write_csv(
        out / "metrics.csv",
        ["algorithm", "seed", "igd", "sp", "hv", "pd", "spread"],
        [
            [row["algorithm"], str(row["seed"])] + [format_number(row[m]) for m in _METRIC_NAMES]
            for row in rows
        ],
    )
    return rows


def default_winner_candidates(
    problem: ProblemSpec, front_z: np.ndarray, seed: int, vehicle: VehicleParams | None = None
) -> tuple[list[str], list[UncertaintySpec]]:
    """Front designs plus the baseline candidates of the selection protocol:
    the hand-specified nominal design, the mass-span algebraic design (truck
    problem only) and one random design."""
    labels = [f"front-{i:03d}" for i in range(front_z.shape[0])]
    candidates = [problem.decoder(z) for z in front_z]
    if problem.name == "generic":
        labels.append("nominal")
        candidates.append(generic_nominal_uncertainty())
    else:
        labels.append("nominal")
        candidates.append(zero_uncertainty(problem.nominal_model.n_states, problem.nominal_model.n_inputs))
        labels.append("algebraic")
        candidates.append(algebraic_uncertainty(vehicle or default_truck(), APPLIED_DT))
    rng = np.random.default_rng(seed)
    labels.append("random")
    candidates.append(
        problem.decoder(rng.uniform(problem.lower_bounds, problem.upper_bounds))
    )
    return labels, candidates
