"""Estimator-style wrapper over the samplers.

SkewSGLD follows the scikit-learn parameter protocol: constructor arguments
are stored verbatim, all work happens in fit, and fitted state lives in
trailing-underscore attributes.  That makes runs clonable and grid-searchable
with standard tooling while the functional API underneath stays the source
of truth.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .dynamics import ForceSpec
from .model import Dataset, ModelSpec, log_unnorm_posterior
from .sampler import (
    BatchPolicy,
    ReplicaConfig,
    RunConfig,
    StepSchedule,
    run,
    solve_schedule,
)
from .validation import ConfigurationError


class SkewSGLD(BaseEstimator):
    """Stochastic-gradient Langevin sampler with optional skew drift.

    Parameters mirror RunConfig; ``burn_in`` may be a fraction of ``n_steps``
    (a float below 1) or an absolute step count.  ``dt_end=None`` keeps the
    step size constant; otherwise a polynomial decay from ``dt`` to
    ``dt_end`` is solved for.
    """

    def __init__(
        self,
        a1: float = 0.1,
        a2: float = 0.1,
        b: float = 10.0,
        force: str = "plain",
        gamma: float = 0.0,
        skew_matrix=None,
        n_steps: int = 10_000,
        dt: float = 0.001,
        dt_end: float | None = None,
        schedule_epsilon: float = 0.55,
        batch_size: int = 1,
        batch_mode: str = "epoch-shuffle",
        n_replicas: int = 1,
        replica_sizes=None,
        temperature: float = 1.0,
        burn_in: float = 0.1,
        thinning: int = 1,
        likelihood_scale: str = "sum",
        theta_init=(0.0, 0.0),
        random_state: int = 0,
    ):
        self.a1 = a1
        self.a2 = a2
        self.b = b
        self.force = force
        self.gamma = gamma
        self.skew_matrix = skew_matrix
        self.n_steps = n_steps
        self.dt = dt
        self.dt_end = dt_end
        self.schedule_epsilon = schedule_epsilon
        self.batch_size = batch_size
        self.batch_mode = batch_mode
        self.n_replicas = n_replicas
        self.replica_sizes = replica_sizes
        self.temperature = temperature
        self.burn_in = burn_in
        self.thinning = thinning
        self.likelihood_scale = likelihood_scale
        self.theta_init = theta_init
        self.random_state = random_state

    def _resolved_burn_in(self) -> int:
        b = self.burn_in
        if isinstance(b, float) and 0.0 <= b < 1.0:
            return int(round(b * int(self.n_steps)))
        return int(b)

    def _build_config(self, x: np.ndarray) -> RunConfig:
        model = ModelSpec(a1=self.a1, a2=self.a2, b=self.b)
        if self.dt_end is None:
            schedule = StepSchedule(kind="constant", dt=self.dt)
        else:
            schedule = solve_schedule(
                self.dt, self.dt_end, int(self.n_steps), self.schedule_epsilon
            )
        return RunConfig(
            model=model,
            data=Dataset(x),
            schedule=schedule,
            steps=int(self.n_steps),
            seed=int(self.random_state),
            force=ForceSpec(kind=self.force, gamma=self.gamma, matrix=self.skew_matrix),
            batch=BatchPolicy(kind=self.batch_mode, size=int(self.batch_size)),
            replicas=ReplicaConfig(
                count=int(self.n_replicas),
                sizes=None if self.replica_sizes is None else tuple(self.replica_sizes),
            ),
            temperature=self.temperature,
            burn_in=self._resolved_burn_in(),
            thinning=int(self.thinning),
            likelihood_scale=self.likelihood_scale,
            theta0=tuple(self.theta_init),
        )

    def fit(self, X, y=None):
        """Sample the posterior of the observations in X.

        X is the 1-D set of observations, shape (n,) or (n, 1).
        """
        x = np.asarray(X, dtype=np.float64)
        if x.ndim == 2 and x.shape[1] == 1:
            x = x[:, 0]
        if x.ndim != 1:
            raise ConfigurationError(
                f"X must be 1-D observations (or a single column), got shape {x.shape}"
            )
        config = self._build_config(x)
        self.config_ = config
        self.trace_ = run(config)
        self.samples_ = self.trace_.thetas
        self.n_features_in_ = 1
        return self

    def score_samples(self, Theta) -> np.ndarray:
        """Log unnormalised posterior density at parameter points (m, 2)."""
        if not hasattr(self, "config_"):
            raise NotFittedError("SkewSGLD must be fitted before scoring")
        theta = np.asarray(Theta, dtype=np.float64)
        if theta.ndim == 1:
            theta = theta[None, :]
        if theta.ndim != 2 or theta.shape[1] != 2:
            raise ConfigurationError(
                f"Theta must have shape (m, 2), got {np.asarray(Theta).shape}"
            )
        return log_unnorm_posterior(
            theta,
            self.config_.data,
            self.config_.model,
            scale=self.likelihood_scale,
        )
