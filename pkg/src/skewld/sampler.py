"""Minibatch Langevin runners: step schedules, batching, replicas, traces.

Randomness is split into named streams derived from the run seed, so the
noise consumed by replica r never depends on how many replicas run or in
what order they are stepped: replica r draws from stream (seed, 1, r) and
batch selection from (seed, 0).  Serial and parallel execution therefore
produce identical trajectories.
"""

from __future__ import annotations

import hashlib
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .dynamics import ForceSpec, NoiseSpec, build_force, langevin_step, replica_force
from .model import (
    N_PARAMS,
    Dataset,
    ModelSpec,
    check_likelihood_scale,
    grad_log_lik,
    grad_log_prior,
    likelihood_weight,
)
from .validation import (
    ConfigurationError,
    DivergenceError,
    as_param_vector,
    check_positive,
)

Array = np.ndarray

SCHEDULE_KINDS = ("constant", "polynomial")
BATCH_KINDS = ("epoch-shuffle", "with-replacement")

_NOISE_BLOCK = 4096


@dataclass(frozen=True)
class StepSchedule:
    """Step size as a function of the step index.

    ``constant`` uses dt for every step.  ``polynomial`` decays as

        dt_i = beta * (i + delta) ** (-epsilon),

    with epsilon in (0.5, 1] so that the usual stochastic-approximation
    conditions hold: the step sizes sum to infinity while their squares
    converge.
    """

    kind: str = "constant"
    dt: float | None = None
    beta: float | None = None
    delta: float | None = None
    epsilon: float | None = None

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ConfigurationError(
                f"schedule kind must be one of {SCHEDULE_KINDS}, got {self.kind!r}"
            )
        if self.kind == "constant":
            if self.dt is None:
                raise ConfigurationError("constant schedule requires dt")
            object.__setattr__(self, "dt", check_positive("dt", self.dt))
            if self.beta is not None or self.delta is not None or self.epsilon is not None:
                raise ConfigurationError("constant schedule takes no beta/delta/epsilon")
        else:
            if self.beta is None or self.delta is None or self.epsilon is None:
                raise ConfigurationError("polynomial schedule requires beta, delta, epsilon")
            if self.dt is not None:
                raise ConfigurationError("polynomial schedule takes no dt")
            object.__setattr__(self, "beta", check_positive("beta", self.beta))
            object.__setattr__(self, "delta", check_positive("delta", self.delta))
            eps = float(self.epsilon)
            if not 0.5 < eps <= 1.0:
                raise ConfigurationError(f"epsilon must lie in (0.5, 1], got {eps}")
            object.__setattr__(self, "epsilon", eps)

    def value(self, i):
        if self.kind == "constant":
            return np.broadcast_to(np.float64(self.dt), np.shape(i)).copy() if np.ndim(i) else float(self.dt)
        v = self.beta * np.power(np.asarray(i, dtype=np.float64) + self.delta, -self.epsilon)
        return float(v) if np.ndim(i) == 0 else v

    def values(self, n: int) -> Array:
        return np.asarray(self.value(np.arange(int(n))), dtype=np.float64)

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "dt": self.dt}
        return {
            "kind": "polynomial",
            "beta": self.beta,
            "delta": self.delta,
            "epsilon": self.epsilon,
        }


def solve_schedule(dt_start: float, dt_end: float, steps: int, epsilon: float) -> StepSchedule:
    """Polynomial schedule hitting dt_start at step 0 and dt_end at ``steps``.

    Closed form: delta = steps / ((dt_start/dt_end)^(1/epsilon) - 1) and
    beta = dt_start * delta^epsilon.  Requires dt_start > dt_end; for a flat
    schedule use the constant kind directly.
    """
    dt_start = check_positive("dt_start", dt_start)
    dt_end = check_positive("dt_end", dt_end)
    steps = int(steps)
    if steps < 1:
        raise ConfigurationError(f"steps must be >= 1, got {steps}")
    eps = float(epsilon)
    if not 0.5 < eps <= 1.0:
        raise ConfigurationError(f"epsilon must lie in (0.5, 1], got {eps}")
    if dt_start <= dt_end:
        raise ConfigurationError(
            "solve_schedule requires dt_start > dt_end; use a constant schedule "
            "for a flat step size"
        )
    ratio = (dt_start / dt_end) ** (1.0 / eps)
    delta = steps / (ratio - 1.0)
    beta = dt_start * delta**eps
    return StepSchedule(kind="polynomial", beta=beta, delta=delta, epsilon=eps)


@dataclass(frozen=True)
class BatchPolicy:
    """Minibatch selection: epoch-shuffle (default) or with-replacement."""

    kind: str = "epoch-shuffle"
    size: int = 1

    def __post_init__(self):
        if self.kind not in BATCH_KINDS:
            raise ConfigurationError(
                f"batch kind must be one of {BATCH_KINDS}, got {self.kind!r}"
            )
        size = int(self.size)
        if size < 1:
            raise ConfigurationError(f"batch size must be >= 1, got {size}")
        object.__setattr__(self, "size", size)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "size": self.size}


def batch_iterator(policy: BatchPolicy, n_data: int, rng: np.random.Generator) -> Iterator[Array]:
    """Yield index arrays forever, according to the policy.

    epoch-shuffle walks a fresh permutation in contiguous chunks, so every
    index appears exactly once per epoch; when the batch size does not
    divide the dataset the final chunk of an epoch is short.
    """
    n_data = int(n_data)
    if n_data < 1:
        raise ConfigurationError("batching requires a non-empty dataset")
    if policy.size > n_data:
        raise ConfigurationError(
            f"batch size {policy.size} exceeds dataset size {n_data}"
        )

    def gen():
        if policy.kind == "with-replacement":
            while True:
                yield rng.integers(0, n_data, size=policy.size)
        else:
            while True:
                order = rng.permutation(n_data)
                for start in range(0, n_data, policy.size):
                    yield order[start : start + policy.size]

    return gen()


@dataclass(frozen=True)
class ReplicaConfig:
    """Number of replicas and the per-replica share of each batch."""

    count: int = 1
    sizes: tuple | None = None

    def __post_init__(self):
        count = int(self.count)
        if count < 1:
            raise ConfigurationError(f"replica count must be >= 1, got {count}")
        object.__setattr__(self, "count", count)
        if self.sizes is not None:
            sizes = tuple(int(s) for s in self.sizes)
            if len(sizes) != count:
                raise ConfigurationError(
                    f"got {len(sizes)} replica batch sizes for {count} replicas"
                )
            if any(s < 1 for s in sizes):
                raise ConfigurationError("replica batch sizes must be >= 1")
            object.__setattr__(self, "sizes", sizes)

    def resolved_sizes(self, batch_size: int) -> tuple:
        if self.sizes is not None:
            if sum(self.sizes) != batch_size:
                raise ConfigurationError(
                    f"replica batch sizes {self.sizes} must sum to the batch size {batch_size}"
                )
            return self.sizes
        if batch_size % self.count:
            raise ConfigurationError(
                f"batch size {batch_size} is not divisible by {self.count} replicas; "
                "give explicit replica sizes"
            )
        return (batch_size // self.count,) * self.count

    def to_dict(self) -> dict:
        return {"count": self.count, "sizes": list(self.sizes) if self.sizes else None}


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; reruns with an equal config are bit-identical."""

    model: ModelSpec
    data: Dataset
    schedule: StepSchedule
    steps: int
    seed: int
    force: ForceSpec = ForceSpec()
    batch: BatchPolicy = BatchPolicy()
    replicas: ReplicaConfig = ReplicaConfig()
    temperature: float = 1.0
    burn_in: int | None = None
    thinning: int = 1
    likelihood_scale: str = "sum"
    theta0: tuple = (0.0, 0.0)

    def __post_init__(self):
        steps = int(self.steps)
        if steps < 1:
            raise ConfigurationError(f"steps must be >= 1, got {steps}")
        object.__setattr__(self, "steps", steps)
        # default burn-in: first 10% of steps
        burn_in = steps // 10 if self.burn_in is None else int(self.burn_in)
        if not 0 <= burn_in < steps:
            raise ConfigurationError(
                f"burn_in must lie in [0, steps), got {burn_in} with steps={steps}"
            )
        object.__setattr__(self, "burn_in", burn_in)
        thinning = int(self.thinning)
        if thinning < 1:
            raise ConfigurationError(f"thinning must be >= 1, got {thinning}")
        object.__setattr__(self, "thinning", thinning)
        object.__setattr__(self, "temperature", check_positive("temperature", self.temperature))
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {seed}")
        object.__setattr__(self, "seed", seed)
        check_likelihood_scale(self.likelihood_scale)
        theta0 = tuple(float(v) for v in as_param_vector("theta0", self.theta0, N_PARAMS))
        object.__setattr__(self, "theta0", theta0)
        if self.data.n < 1:
            raise ConfigurationError("runs require at least one datum")
        if self.batch.size > self.data.n:
            raise ConfigurationError(
                f"batch size {self.batch.size} exceeds dataset size {self.data.n}"
            )
        self.replicas.resolved_sizes(self.batch.size)
        if self.replicas.count > 1 and self.force.kind != "plain":
            raise ConfigurationError(
                "replicated runs use the replica coupling as their skew drift; "
                "set the force kind to 'plain' (gamma still applies)"
            )

    def n_rows(self) -> int:
        return (self.steps - self.burn_in) // self.thinning * self.replicas.count

    def to_dict(self) -> dict:
        return {
            "model": {"a1": self.model.a1, "a2": self.model.a2, "b": self.model.b},
            "force": {
                "kind": self.force.kind,
                "gamma": self.force.gamma,
                "matrix": None if self.force.matrix is None else self.force.matrix.tolist(),
            },
            "schedule": self.schedule.to_dict(),
            "batch": self.batch.to_dict(),
            "replicas": self.replicas.to_dict(),
            "temperature": self.temperature,
            "steps": self.steps,
            "burn_in": self.burn_in,
            "thinning": self.thinning,
            "seed": self.seed,
            "likelihood_scale": self.likelihood_scale,
            "theta0": list(self.theta0),
            "data": {
                "n": self.data.n,
                "sha256": hashlib.sha256(self.data.x.tobytes()).hexdigest(),
            },
        }


def batch_stream(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(seed), 0))))


def noise_stream(seed: int, replica: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(seed), 1, int(replica)))))


@dataclass
class Trace:
    """Recorded rows of a run: one (step, replica, dt, theta) per row.

    Rows are ordered by step, then replica.  Only post-burn-in steps that
    land on the thinning stride are recorded, so a completed run holds
    exactly (steps - burn_in) // thinning rows per replica.
    """

    steps: Array
    replicas: Array
    dts: Array
    thetas: Array
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.steps = np.asarray(self.steps, dtype=np.int64)
        self.replicas = np.asarray(self.replicas, dtype=np.int64)
        self.dts = np.asarray(self.dts, dtype=np.float64)
        self.thetas = np.asarray(self.thetas, dtype=np.float64)
        n = self.steps.shape[0]
        if not (self.replicas.shape[0] == self.dts.shape[0] == self.thetas.shape[0] == n):
            raise ConfigurationError("trace columns must have equal length")
        if self.thetas.ndim != 2:
            raise ConfigurationError("trace thetas must have shape (rows, components)")
        if n and not np.all(np.isfinite(self.thetas)):
            raise ConfigurationError("trace thetas must be finite")

    @property
    def n_rows(self) -> int:
        return int(self.steps.shape[0])

    @property
    def n_components(self) -> int:
        return int(self.thetas.shape[1])

    def replica_ids(self) -> Array:
        return np.unique(self.replicas)

    def series(self, component: int, replica: int = 0) -> Array:
        keep = self.replicas == replica
        return self.thetas[keep, component]

    def write_csv(self, path) -> None:
        header = "step,replica,dt," + ",".join(
            f"theta{k + 1}" for k in range(self.n_components)
        )
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(header + "\n")
            for i in range(self.n_rows):
                coords = ",".join(repr(float(v)) for v in self.thetas[i])
                f.write(
                    f"{int(self.steps[i])},{int(self.replicas[i])},"
                    f"{float(self.dts[i])!r},{coords}\n"
                )

    def write_meta(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(json.dumps(self.meta, indent=2, sort_keys=True) + "\n")

    @classmethod
    def read_csv(cls, path, meta_path=None) -> "Trace":
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline().strip().split(",")
            if header[:3] != ["step", "replica", "dt"] or len(header) < 4:
                raise ConfigurationError(f"{path}: not a trace CSV (header {header})")
            body = f.read()
        if body.strip():
            raw = np.loadtxt(io.StringIO(body), delimiter=",", dtype=np.float64, ndmin=2)
        else:  # a run can diverge before recording anything
            raw = np.empty((0, len(header)))
        if raw.shape[1] != len(header):
            raise ConfigurationError(f"{path}: row width does not match header")
        meta: dict = {}
        if meta_path is not None:
            with open(meta_path, "r", encoding="utf-8") as f:
                meta = json.load(f)
        return cls(
            steps=raw[:, 0].astype(np.int64),
            replicas=raw[:, 1].astype(np.int64),
            dts=raw[:, 2],
            thetas=raw[:, 3:],
            meta=meta,
        )


class _Recorder:
    """Preallocated row storage for a run.

    The step, replica, and dt columns follow from the config alone, so they
    are filled up front; stepping only appends theta rows.
    """

    def __init__(self, config: RunConfig):
        n = config.n_rows()
        r = config.replicas.count
        per = n // r
        rec = config.burn_in - 1 + config.thinning * np.arange(1, per + 1, dtype=np.int64)
        self.steps = np.repeat(rec, r)
        self.replicas = np.tile(np.arange(r, dtype=np.int64), per)
        self.dts = np.repeat(config.schedule.values(config.steps)[rec], r)
        self.thetas = np.empty((n, N_PARAMS), dtype=np.float64)
        self._r = r
        self._at = 0

    def record(self, thetas: Array) -> None:
        a = self._at
        self.thetas[a : a + self._r] = thetas
        self._at = a + self._r

    def trace(self, meta: dict) -> Trace:
        a = self._at
        return Trace(
            steps=self.steps[:a].copy(),
            replicas=self.replicas[:a].copy(),
            dts=self.dts[:a].copy(),
            thetas=self.thetas[:a].copy(),
            meta=meta,
        )


def _base_meta(config: RunConfig) -> dict:
    return {
        "kind": "trace",
        "config": config.to_dict(),
        "divergence": None,
        "rows": config.n_rows(),
    }


def _grad_log_post(theta, x, idx, model, lam_full, batch_size, n_data, scale):
    """Gradient of the (scaled) log posterior estimate at theta."""
    g = grad_log_prior(theta, model)
    k = idx.shape[0]
    if k == 0:
        return g
    lam = lam_full if k == batch_size else likelihood_weight(scale, n_data, k)
    return g + lam * grad_log_lik(x[idx], theta, model).sum(axis=0)


def run_single(config: RunConfig) -> Trace:
    """Run one chain and return its trace.

    The target is set by the likelihood scale: ``sum`` estimates the full-data
    log posterior from each batch (weight D/d), ``average`` tempers the
    likelihood to a single datum's worth (weight 1/d).  A non-finite state
    aborts immediately with the partial trace attached to the error.
    """
    if config.replicas.count != 1:
        raise ConfigurationError("run_single takes one replica; use run_replicated")
    model = config.model
    x = config.data.x
    d = config.batch.size
    n_data = config.data.n
    scale = config.likelihood_scale
    lam_full = likelihood_weight(scale, n_data, d)
    rng_batch = batch_stream(config.seed)
    rng_noise = noise_stream(config.seed, 0)
    batches = batch_iterator(config.batch, n_data, rng_batch)
    dts = config.schedule.values(config.steps)
    noise = NoiseSpec(config.temperature)
    force = config.force
    recorder = _Recorder(config)
    meta = _base_meta(config)
    theta = np.asarray(config.theta0, dtype=np.float64)
    started = time.perf_counter()
    burn_in, thinning, steps = config.burn_in, config.thinning, config.steps
    xi = None
    # over/invalid transients on a diverging path are detected by
    # langevin_step; the warnings would only add noise before the raise
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(steps):
            j = i % _NOISE_BLOCK
            if j == 0:
                xi = rng_noise.standard_normal((min(_NOISE_BLOCK, steps - i), N_PARAMS))
            idx = next(batches)
            grad = _grad_log_post(theta, x, idx, model, lam_full, d, n_data, scale)
            drift = build_force(-grad, force)
            try:
                theta = langevin_step(theta, drift, dts[i], noise, xi=xi[j])
            except DivergenceError:
                meta["divergence"] = {"step": i, "last_state": [float(v) for v in theta]}
                meta["rows"] = recorder._at
                meta["wall_time_s"] = time.perf_counter() - started
                raise DivergenceError(
                    step=i, last_state=theta.copy(), trace=recorder.trace(meta)
                )
            if i >= burn_in and (i - burn_in + 1) % thinning == 0:
                recorder.record(theta)
    meta["wall_time_s"] = time.perf_counter() - started
    return recorder.trace(meta)


def _replica_grads_stacked(thetas, x_sel, model, lam):
    """Log-posterior gradients for replica rows whose pieces stack as (R, d_r).

    Every output row depends only on its own input row: the ufuncs are
    elementwise and the batch reduction runs along axis 1 independently per
    row.  Computing a row slice therefore reproduces the full-stack bits,
    which is what lets the parallel runner match the serial one exactly.
    """
    g = grad_log_prior(thetas, model)
    contrib = grad_log_lik(x_sel, thetas[:, None, :], model).sum(axis=1)
    return g + lam * contrib


def _replica_grad_row(theta_r, x_piece, model, lam_r):
    """One replica's log-posterior gradient from its own batch piece."""
    return grad_log_prior(theta_r, model) + lam_r * grad_log_lik(
        x_piece, theta_r, model
    ).sum(axis=0)


def run_replicated(config: RunConfig, parallel: bool = False) -> Trace:
    """Run coupled replicas and return their pooled trace.

    Each step draws one batch of the configured size, splits it contiguously
    into the per-replica pieces, computes each replica's gradient at its own
    state from its own piece, couples the replicas through the periodic
    gradient-exchange drift, and advances all replicas synchronously.  With
    gamma = 0 the replicas are independent chains.

    ``parallel`` evaluates per-replica gradients in a thread pool; because
    every replica owns its noise stream and results are gathered by replica
    index, the trace is bit-identical to a serial run.
    """
    r_count = config.replicas.count
    if r_count < 2:
        raise ConfigurationError("run_replicated requires >= 2 replicas; use run_single")
    model = config.model
    x = config.data.x
    n_data = config.data.n
    scale = config.likelihood_scale
    sizes = config.replicas.resolved_sizes(config.batch.size)
    equal_sizes = len(set(sizes)) == 1
    d_r = sizes[0]
    lams = tuple(likelihood_weight(scale, n_data, s) for s in sizes)
    cuts = np.cumsum(sizes)[:-1]
    gamma = config.force.gamma
    rng_batch = batch_stream(config.seed)
    noise_rngs = [noise_stream(config.seed, r) for r in range(r_count)]
    batches = batch_iterator(config.batch, n_data, rng_batch)
    dts = config.schedule.values(config.steps)
    noise = NoiseSpec(config.temperature)
    recorder = _Recorder(config)
    meta = _base_meta(config)
    thetas = np.tile(np.asarray(config.theta0, dtype=np.float64), (r_count, 1))
    started = time.perf_counter()
    burn_in, thinning, steps = config.burn_in, config.thinning, config.steps
    pool = ThreadPoolExecutor(max_workers=r_count) if parallel else None

    def grads_at(thetas_now, idx):
        if equal_sizes:
            x_sel = x[idx].reshape(r_count, d_r)
            if not parallel:
                return _replica_grads_stacked(thetas_now, x_sel, model, lams[0])
            futures = [
                pool.submit(
                    _replica_grads_stacked,
                    thetas_now[r : r + 1],
                    x_sel[r : r + 1],
                    model,
                    lams[0],
                )
                for r in range(r_count)
            ]
            return np.concatenate([f.result() for f in futures], axis=0)
        pieces = np.split(idx, cuts)
        if not parallel:
            rows = [
                _replica_grad_row(thetas_now[r], x[pieces[r]], model, lams[r])
                for r in range(r_count)
            ]
        else:
            futures = [
                pool.submit(_replica_grad_row, thetas_now[r], x[pieces[r]], model, lams[r])
                for r in range(r_count)
            ]
            rows = [f.result() for f in futures]
        return np.stack(rows, axis=0)

    try:
        xi = None
        # see run_single: divergence is detected, so silence the transients
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(steps):
                j = i % _NOISE_BLOCK
                if j == 0:
                    block = min(_NOISE_BLOCK, steps - i)
                    xi = np.stack(
                        [rng.standard_normal((block, N_PARAMS)) for rng in noise_rngs],
                        axis=1,
                    )
                idx = next(batches)
                grad = grads_at(thetas, idx)
                drift = replica_force(-grad, gamma)
                try:
                    thetas = langevin_step(thetas, drift, dts[i], noise, xi=xi[j])
                except DivergenceError:
                    meta["divergence"] = {
                        "step": i,
                        "last_state": [[float(v) for v in row] for row in thetas],
                    }
                    meta["rows"] = recorder._at
                    meta["wall_time_s"] = time.perf_counter() - started
                    raise DivergenceError(
                        step=i, last_state=thetas.copy(), trace=recorder.trace(meta)
                    )
                if i >= burn_in and (i - burn_in + 1) % thinning == 0:
                    recorder.record(thetas)
    finally:
        if pool is not None:
            pool.shutdown(wait=False)
    meta["wall_time_s"] = time.perf_counter() - started
    return recorder.trace(meta)


def run(config: RunConfig, parallel: bool = False) -> Trace:
    """Dispatch on the replica count."""
    if config.replicas.count == 1:
        return run_single(config)
    return run_replicated(config, parallel=parallel)
