"""Command line for reproducible experiments.

Subcommands share one JSON config document; each validates the whole
document (unknown keys anywhere are rejected) before touching the
filesystem or doing any numerics.  Outputs are CSV for bulk numbers and
JSON for metadata, and every artifact is paired with the exact resolved
configuration that produced it, so a result is reproducible from its
sidecar alone.

Exit codes: 0 success, 2 invalid configuration or input, 3 divergence
during sampling (partial trace still written), 4 output I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (
    DEFAULT_BENCHMARK_GRID,
    DEFAULT_KL_SMOOTHING,
    DEFAULT_MODE_RADIUS,
    DEFAULT_MODES,
    GridDensity,
    GridSpec,
    build_report,
    grid_posterior,
)
from .dynamics import ForceSpec
from .model import (
    GENERATION_MODES,
    Dataset,
    ModelSpec,
    check_likelihood_scale,
    generate_data,
)
from .sampler import (
    BatchPolicy,
    ReplicaConfig,
    RunConfig,
    StepSchedule,
    Trace,
    run,
    solve_schedule,
)
from .validation import ConfigurationError, DivergenceError

_TOP_KEYS = {
    "generate-data": {"model", "data", "output_dir"},
    "run": {"model", "data", "run", "output_dir"},
    "oracle": {"model", "data", "grid", "oracle", "output_dir"},
    "diagnose": {"inputs", "diagnostics", "grid", "output_dir"},
    "compare": {"model", "data", "run", "sweep", "grid", "diagnostics", "output_dir"},
}

_RUN_KEYS = {
    "steps",
    "seed",
    "burn_in",
    "thinning",
    "temperature",
    "theta0",
    "likelihood_scale",
    "force",
    "schedule",
    "batch",
    "replicas",
}


def _check_keys(section: str, obj, allowed, required=()):
    if not isinstance(obj, dict):
        raise ConfigurationError(f"{section} must be a JSON object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigurationError(f"{section}: unknown keys {unknown}")
    missing = sorted(set(required) - set(obj))
    if missing:
        raise ConfigurationError(f"{section}: missing required keys {missing}")


def _as_number(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{name} must be a number, got {value!r}")
    return float(value)


def _as_int(name: str, value, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def _as_seed(name: str, value) -> int:
    s = _as_int(name, value, minimum=0)
    if s >= 2**64:
        raise ConfigurationError(f"{name} must fit in 64 bits, got {s}")
    return s


def _load_config(path: Path) -> dict:
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path}: invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{path}: top level must be a JSON object")
    return doc


def _resolve_input(base_dir: Path, raw: str, what: str) -> Path:
    if not isinstance(raw, str) or not raw:
        raise ConfigurationError(f"{what} must be a non-empty path string")
    p = Path(raw)
    if not p.is_absolute():
        p = base_dir / p
    if not p.is_file():
        raise ConfigurationError(f"{what} not found: {p}")
    return p


def _resolve_out(doc: dict, args, config_path: Path) -> Path:
    if args.out is not None:
        out = Path(args.out)
    else:
        raw = doc.get("output_dir", ".")
        if not isinstance(raw, str) or not raw:
            raise ConfigurationError("output_dir must be a non-empty path string")
        out = Path(raw)
        if not out.is_absolute():
            out = config_path.parent / out
    os.makedirs(out, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _parse_model(doc: dict) -> ModelSpec:
    obj = doc.get("model", {})
    _check_keys("model", obj, {"a1", "a2", "b"})
    return ModelSpec(
        a1=_as_number("model.a1", obj.get("a1", 0.1)),
        a2=_as_number("model.a2", obj.get("a2", 0.1)),
        b=_as_number("model.b", obj.get("b", 10.0)),
    )


def _parse_generate_recipe(obj: dict, seed_override: int | None) -> dict:
    _check_keys("data.generate", obj, {"true_theta", "n", "mode", "seed"}, required={"true_theta", "n"})
    theta = obj["true_theta"]
    if not isinstance(theta, list) or len(theta) != 2:
        raise ConfigurationError("data.generate.true_theta must be a 2-element list")
    mode = obj.get("mode", "mixture")
    if mode not in GENERATION_MODES:
        raise ConfigurationError(
            f"data.generate.mode must be one of {GENERATION_MODES}, got {mode!r}"
        )
    seed = seed_override if seed_override is not None else obj.get("seed")
    if seed is None:
        raise ConfigurationError("data.generate needs a seed (in the config or via --seed)")
    return {
        "true_theta": [_as_number("data.generate.true_theta", v) for v in theta],
        "n": _as_int("data.generate.n", obj["n"], minimum=1),
        "mode": mode,
        "seed": _as_seed("data.generate.seed", seed),
    }


def _read_dataset_csv(path: Path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
        if header == "index,x":
            usecols = (1,)
        elif header == "x":
            usecols = (0,)
        else:
            raise ConfigurationError(
                f"{path}: expected dataset header 'index,x' or 'x', got {header!r}"
            )
        raw = np.loadtxt(f, delimiter=",", dtype=np.float64, usecols=usecols, ndmin=2)
    if raw.size == 0:
        return np.empty(0, dtype=np.float64)
    return raw[:, 0]


def _parse_data(doc: dict, model: ModelSpec, base_dir: Path, seed_override: int | None = None):
    """Return (Dataset, provenance dict) from one of path/inline/generate."""
    obj = doc.get("data")
    if obj is None:
        raise ConfigurationError("config needs a data section")
    _check_keys("data", obj, {"path", "inline", "generate"})
    if len(obj) != 1:
        raise ConfigurationError("data must hold exactly one of: path, inline, generate")
    if "path" in obj:
        path = _resolve_input(base_dir, obj["path"], "data.path")
        dataset = Dataset(_read_dataset_csv(path))
        meta: dict = {"source": "path", "path": str(obj["path"])}
    elif "inline" in obj:
        values = obj["inline"]
        if not isinstance(values, list):
            raise ConfigurationError("data.inline must be a list of numbers")
        dataset = Dataset(np.asarray([_as_number("data.inline", v) for v in values]))
        meta = {"source": "inline"}
    else:
        recipe = _parse_generate_recipe(obj["generate"], seed_override)
        dataset = generate_data(
            recipe["true_theta"], recipe["n"], model, mode=recipe["mode"], seed=recipe["seed"]
        )
        meta = {"source": "generate", "generate": recipe}
    meta["n"] = dataset.n
    meta["sha256"] = _sha256(dataset.x)
    return dataset, meta


def _sha256(x: np.ndarray) -> str:
    import hashlib

    return hashlib.sha256(np.ascontiguousarray(x).tobytes()).hexdigest()


def _parse_force(obj: dict) -> ForceSpec:
    _check_keys("run.force", obj, {"kind", "gamma", "matrix"})
    matrix = obj.get("matrix")
    if matrix is not None:
        if not isinstance(matrix, list):
            raise ConfigurationError("run.force.matrix must be a list of rows")
        matrix = np.asarray(matrix, dtype=np.float64)
    return ForceSpec(
        kind=obj.get("kind", "plain"),
        gamma=_as_number("run.force.gamma", obj.get("gamma", 0.0)),
        matrix=matrix,
    )


def _parse_schedule(obj: dict, steps: int) -> StepSchedule:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigurationError("run.schedule must be an object with a kind")
    kind = obj["kind"]
    if kind == "constant":
        _check_keys("run.schedule", obj, {"kind", "dt"}, required={"dt"})
        return StepSchedule(kind="constant", dt=_as_number("run.schedule.dt", obj["dt"]))
    if kind == "polynomial":
        _check_keys(
            "run.schedule", obj, {"kind", "beta", "delta", "epsilon"},
            required={"beta", "delta", "epsilon"},
        )
        return StepSchedule(
            kind="polynomial",
            beta=_as_number("run.schedule.beta", obj["beta"]),
            delta=_as_number("run.schedule.delta", obj["delta"]),
            epsilon=_as_number("run.schedule.epsilon", obj["epsilon"]),
        )
    if kind == "solve":
        _check_keys(
            "run.schedule", obj, {"kind", "dt_start", "dt_end", "epsilon"},
            required={"dt_start", "dt_end", "epsilon"},
        )
        return solve_schedule(
            _as_number("run.schedule.dt_start", obj["dt_start"]),
            _as_number("run.schedule.dt_end", obj["dt_end"]),
            steps,
            _as_number("run.schedule.epsilon", obj["epsilon"]),
        )
    raise ConfigurationError(
        f"run.schedule.kind must be constant, polynomial or solve, got {kind!r}"
    )


def _parse_batch(obj: dict) -> BatchPolicy:
    _check_keys("run.batch", obj, {"kind", "size"})
    return BatchPolicy(
        kind=obj.get("kind", "epoch-shuffle"),
        size=_as_int("run.batch.size", obj.get("size", 1), minimum=1),
    )


def _parse_replicas(obj: dict) -> ReplicaConfig:
    _check_keys("run.replicas", obj, {"count", "sizes"})
    sizes = obj.get("sizes")
    if sizes is not None:
        if not isinstance(sizes, list):
            raise ConfigurationError("run.replicas.sizes must be a list of integers")
        sizes = tuple(_as_int("run.replicas.sizes", s, minimum=1) for s in sizes)
    return ReplicaConfig(count=_as_int("run.replicas.count", obj.get("count", 1), minimum=1), sizes=sizes)


def _parse_run_kwargs(
    doc: dict,
    model: ModelSpec,
    data: Dataset,
    seed_override: int | None,
    require_seed: bool = True,
) -> dict:
    obj = doc.get("run")
    if obj is None:
        raise ConfigurationError("config needs a run section")
    _check_keys("run", obj, _RUN_KEYS, required={"steps", "schedule"})
    steps = _as_int("run.steps", obj["steps"], minimum=1)
    seed = seed_override if seed_override is not None else obj.get("seed")
    if seed is None:
        if require_seed:
            raise ConfigurationError("run.seed is required (in the config or via --seed)")
        seed = 0  # placeholder; compare substitutes sweep seeds
    theta0 = obj.get("theta0", [0.0, 0.0])
    if not isinstance(theta0, list) or len(theta0) != 2:
        raise ConfigurationError("run.theta0 must be a 2-element list")
    return dict(
        model=model,
        data=data,
        schedule=_parse_schedule(obj["schedule"], steps),
        steps=steps,
        seed=_as_seed("run.seed", seed),
        force=_parse_force(obj.get("force", {})),
        batch=_parse_batch(obj.get("batch", {})),
        replicas=_parse_replicas(obj.get("replicas", {})),
        temperature=_as_number("run.temperature", obj.get("temperature", 1.0)),
        burn_in=None if "burn_in" not in obj else _as_int("run.burn_in", obj["burn_in"], minimum=0),
        thinning=_as_int("run.thinning", obj.get("thinning", 1), minimum=1),
        likelihood_scale=check_likelihood_scale(obj.get("likelihood_scale", "sum")),
        theta0=tuple(_as_number("run.theta0", v) for v in theta0),
    )


def _parse_grid(doc: dict) -> GridSpec:
    obj = doc.get("grid")
    if obj is None:
        return DEFAULT_BENCHMARK_GRID
    _check_keys("grid", obj, {"lower", "upper", "bins"}, required={"lower", "upper", "bins"})
    return GridSpec(tuple(obj["lower"]), tuple(obj["upper"]), tuple(obj["bins"]))


class _DiagOptions:
    def __init__(self, doc: dict):
        obj = doc.get("diagnostics", {})
        _check_keys("diagnostics", obj, {"burn_in", "modes", "radius", "smoothing"})
        self.burn_in = _as_int("diagnostics.burn_in", obj.get("burn_in", 0), minimum=0)
        modes = obj.get("modes")
        if modes is None:
            self.modes = DEFAULT_MODES
        else:
            if not isinstance(modes, list) or not modes:
                raise ConfigurationError("diagnostics.modes must be a non-empty list of [t1, t2]")
            self.modes = tuple(
                (
                    _as_number("diagnostics.modes", m[0]),
                    _as_number("diagnostics.modes", m[1]),
                )
                for m in modes
                if isinstance(m, list) and len(m) == 2
            )
            if len(self.modes) != len(modes):
                raise ConfigurationError("each diagnostics mode must be a 2-element list")
        self.radius = _as_number("diagnostics.radius", obj.get("radius", DEFAULT_MODE_RADIUS))
        self.smoothing = _as_number(
            "diagnostics.smoothing", obj.get("smoothing", DEFAULT_KL_SMOOTHING)
        )


def _provenance(command: str) -> dict:
    return {"command": command, "version": __version__}


def cmd_generate_data(doc: dict, args, config_path: Path) -> None:
    model = _parse_model(doc)
    data_obj = doc.get("data")
    if not isinstance(data_obj, dict) or "generate" not in data_obj:
        raise ConfigurationError("generate-data requires a data.generate recipe")
    _check_keys("data", data_obj, {"generate"})
    recipe = _parse_generate_recipe(data_obj["generate"], args.seed)
    dataset = generate_data(
        recipe["true_theta"], recipe["n"], model, mode=recipe["mode"], seed=recipe["seed"]
    )
    out = _resolve_out(doc, args, config_path)
    csv_path = out / "dataset.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as f:
        f.write("index,x\n")
        for i, v in enumerate(dataset.x):
            f.write(f"{i},{float(v)!r}\n")
    payload = _provenance("generate-data")
    payload.update(
        {
            "kind": "dataset",
            "model": {"a1": model.a1, "a2": model.a2, "b": model.b},
            "generate": recipe,
            "n": dataset.n,
            "sha256": _sha256(dataset.x),
            "csv": csv_path.name,
        }
    )
    _write_json(out / "dataset.json", payload)
    print(f"wrote {csv_path} ({dataset.n} rows)")


def cmd_run(doc: dict, args, config_path: Path) -> None:
    model = _parse_model(doc)
    dataset, data_meta = _parse_data(doc, model, config_path.parent)
    config = RunConfig(**_parse_run_kwargs(doc, model, dataset, args.seed))
    out = _resolve_out(doc, args, config_path)
    diverged = None
    try:
        trace = run(config)
    except DivergenceError as e:
        trace = e.trace
        diverged = e
    trace.meta.update(_provenance("run"))
    trace.meta["data"] = data_meta
    csv_path = out / "trace.csv"
    trace.write_csv(csv_path)
    trace.write_meta(out / "trace.json")
    if diverged is not None:
        print(
            f"divergence at step {diverged.step}; partial trace "
            f"({trace.n_rows} rows) written to {csv_path}",
            file=sys.stderr,
        )
        raise diverged
    print(f"wrote {csv_path} ({trace.n_rows} rows)")


def cmd_oracle(doc: dict, args, config_path: Path) -> None:
    model = _parse_model(doc)
    dataset, data_meta = _parse_data(doc, model, config_path.parent)
    grid = _parse_grid(doc)
    obj = doc.get("oracle", {})
    _check_keys("oracle", obj, {"scale"})
    scale = check_likelihood_scale(obj.get("scale", "sum"))
    density = grid_posterior(model, dataset, grid, scale=scale)
    out = _resolve_out(doc, args, config_path)
    csv_path = out / "oracle.csv"
    density.write_csv(csv_path)
    payload = _provenance("oracle")
    payload.update(
        {
            "kind": "oracle",
            "model": {"a1": model.a1, "a2": model.a2, "b": model.b},
            "data": data_meta,
            "grid": grid.to_dict(),
            "scale": scale,
            "csv": csv_path.name,
        }
    )
    _write_json(out / "oracle.json", payload)
    print(f"wrote {csv_path} ({grid.bins[0]}x{grid.bins[1]} cells)")


def cmd_diagnose(doc: dict, args, config_path: Path) -> None:
    inputs = doc.get("inputs")
    if inputs is None:
        raise ConfigurationError("diagnose needs an inputs section with trace and oracle paths")
    _check_keys("inputs", inputs, {"trace", "oracle"}, required={"trace", "oracle"})
    trace_path = _resolve_input(config_path.parent, inputs["trace"], "inputs.trace")
    oracle_path = _resolve_input(config_path.parent, inputs["oracle"], "inputs.oracle")
    meta_path = trace_path.with_suffix(".json")
    trace = Trace.read_csv(trace_path, meta_path=meta_path if meta_path.is_file() else None)
    oracle = GridDensity.read_csv(oracle_path)
    if "grid" in doc:
        expected = _parse_grid(doc)
        if not oracle.grid.matches(expected):
            raise ConfigurationError(
                f"oracle grid {oracle.grid.to_dict()} does not match the configured "
                f"grid {expected.to_dict()}"
            )
    opts = _DiagOptions(doc)
    report = build_report(
        trace,
        oracle,
        burn_in=opts.burn_in,
        modes=opts.modes,
        radius=opts.radius,
        smoothing=opts.smoothing,
    )
    payload = report.to_dict()
    payload.update(_provenance("diagnose"))
    payload["burn_in"] = opts.burn_in
    payload["inputs"] = {"trace": inputs["trace"], "oracle": inputs["oracle"]}
    out = _resolve_out(doc, args, config_path)
    _write_json(out / "report.json", payload)
    print(f"wrote {out / 'report.json'} (kl={report.kl:.6g})")


def _parse_sweep(doc: dict) -> tuple[list, list]:
    obj = doc.get("sweep")
    if obj is None:
        raise ConfigurationError("compare needs a sweep section with gammas and seeds")
    _check_keys("sweep", obj, {"gammas", "seeds"}, required={"gammas", "seeds"})
    gammas = obj["gammas"]
    seeds = obj["seeds"]
    if not isinstance(gammas, list) or not gammas:
        raise ConfigurationError("sweep.gammas must be a non-empty list")
    if not isinstance(seeds, list) or not seeds:
        raise ConfigurationError("sweep.seeds must be a non-empty list")
    gammas = [_as_number("sweep.gammas", g) for g in gammas]
    seeds = [_as_seed("sweep.seeds", s) for s in seeds]
    if len(gammas) * len(seeds) < 2:
        raise ConfigurationError("compare needs at least two (gamma, seed) combinations")
    if len(set(gammas)) != len(gammas):
        raise ConfigurationError("sweep.gammas must be distinct")
    if len(set(seeds)) != len(seeds):
        raise ConfigurationError("sweep.seeds must be distinct")
    return gammas, seeds


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def cmd_compare(doc: dict, args, config_path: Path) -> None:
    model = _parse_model(doc)
    dataset, data_meta = _parse_data(doc, model, config_path.parent, seed_override=args.seed)
    if args.seed is not None and data_meta["source"] != "generate":
        raise ConfigurationError(
            "--seed for compare overrides the data generation seed, but the data "
            "section is not a generation recipe"
        )
    base = _parse_run_kwargs(doc, model, dataset, None, require_seed=False)
    gammas, seeds = _parse_sweep(doc)
    grid = _parse_grid(doc)
    opts = _DiagOptions(doc)
    base_force: ForceSpec = base["force"]
    # build every run config up front so the sweep cannot fail on validation
    # halfway through
    jobs = []
    for gamma in gammas:
        force = ForceSpec(kind=base_force.kind, gamma=gamma, matrix=base_force.matrix)
        for seed in seeds:
            jobs.append((gamma, seed, RunConfig(**{**base, "force": force, "seed": seed})))
    out = _resolve_out(doc, args, config_path)
    oracle = grid_posterior(model, dataset, grid, scale=base["likelihood_scale"])
    oracle.write_csv(out / "oracle.csv")
    oracle_meta = _provenance("compare")
    oracle_meta.update(
        {
            "kind": "oracle",
            "model": {"a1": model.a1, "a2": model.a2, "b": model.b},
            "data": data_meta,
            "grid": grid.to_dict(),
            "scale": base["likelihood_scale"],
            "csv": "oracle.csv",
        }
    )
    _write_json(out / "oracle.json", oracle_meta)

    n_modes = len(opts.modes)
    columns = (
        ["gamma", "seed", "status", "kl"]
        + [f"occupancy_{i + 1}" for i in range(n_modes)]
        + ["iat_theta1", "iat_theta2", "ess_theta1", "ess_theta2", "overflow", "n_samples"]
    )
    rows = []
    results: dict[float, list] = {g: [] for g in gammas}
    for gamma, seed, config in jobs:
        rundir = out / "runs" / f"gamma-{gamma:g}" / f"seed-{seed}"
        os.makedirs(rundir, exist_ok=True)
        status = "ok"
        report = None
        try:
            trace = run(config)
        except DivergenceError as e:
            trace = e.trace
            status = "divergence"
        trace.meta.update(_provenance("compare"))
        trace.meta["data"] = data_meta
        trace.write_csv(rundir / "trace.csv")
        trace.write_meta(rundir / "trace.json")
        if status == "ok":
            try:
                report = build_report(
                    trace,
                    oracle,
                    burn_in=opts.burn_in,
                    modes=opts.modes,
                    radius=opts.radius,
                    smoothing=opts.smoothing,
                )
            except ConfigurationError as e:
                status = f"error: {e}"
        if report is not None:
            payload = report.to_dict()
            payload.update(_provenance("compare"))
            payload["burn_in"] = opts.burn_in
            payload["gamma"] = gamma
            payload["seed"] = seed
            _write_json(rundir / "report.json", payload)
            results[gamma].append(report)
            row = (
                [f"{gamma:g}", str(seed), status, _fmt(report.kl)]
                + [_fmt(v) for v in report.mode_occupancy]
                + [_fmt(a.iat_mean) for a in report.autocorr]
                + [_fmt(a.ess_total) for a in report.autocorr]
                + [_fmt(report.overflow_fraction), str(report.n_samples)]
            )
        else:
            row = (
                [f"{gamma:g}", str(seed), status, ""]
                + [""] * n_modes
                + ["", "", "", "", "", ""]
            )
        rows.append(row)

    with open(out / "summary.csv", "w", encoding="utf-8", newline="") as f:
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(row) + "\n")

    def median(values):
        return float(np.median(values)) if values else None

    per_gamma = []
    for gamma in gammas:
        reports = results[gamma]
        per_gamma.append(
            {
                "gamma": gamma,
                "n_runs": len(seeds),
                "n_failed": len(seeds) - len(reports),
                "kl_median": median([r.kl for r in reports]),
                "occupancy_median": [
                    median([r.mode_occupancy[m] for r in reports]) for m in range(n_modes)
                ],
                "iat_median": [
                    median([r.autocorr[c].iat_mean for r in reports]) for c in range(2)
                ],
            }
        )
    aggregate = _provenance("compare")
    aggregate.update(
        {
            "kind": "compare_aggregate",
            "sweep": {"gammas": gammas, "seeds": seeds},
            "modes": [list(m) for m in opts.modes],
            "mode_radius": opts.radius,
            "kl_smoothing": opts.smoothing,
            "burn_in": opts.burn_in,
            "grid": grid.to_dict(),
            "likelihood_scale": base["likelihood_scale"],
            "data": data_meta,
            "per_gamma": per_gamma,
        }
    )
    _write_json(out / "aggregate.json", aggregate)
    print(f"wrote {out / 'summary.csv'} ({len(rows)} rows)")


_COMMANDS = {
    "generate-data": cmd_generate_data,
    "run": cmd_run,
    "oracle": cmd_oracle,
    "diagnose": cmd_diagnose,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skewld",
        description="Langevin sampling experiments with detailed-balance-violating drifts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str, seed_help: str | None = None):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, type=Path, help="JSON experiment config")
        p.add_argument("--out", type=Path, default=None, help="output directory (overrides output_dir)")
        if seed_help is not None:
            p.add_argument("--seed", type=int, default=None, help=seed_help)
        return p

    add("generate-data", "draw a benchmark dataset", "overrides data.generate.seed")
    add("run", "run one sampling experiment", "overrides run.seed")
    add("oracle", "evaluate the exact posterior on a grid")
    add("diagnose", "score a trace file against an oracle file")
    add("compare", "sweep gamma and seeds, aggregate diagnostics", "overrides data.generate.seed")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code else 0
    try:
        config_path = Path(args.config)
        doc = _load_config(config_path)
        _check_keys("config", doc, _TOP_KEYS[args.command])
        if getattr(args, "seed", None) is not None:
            args.seed = _as_seed("--seed", args.seed)
        _COMMANDS[args.command](doc, args, config_path)
        return 0
    except DivergenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except ConfigurationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
