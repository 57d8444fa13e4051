"""Estimator facade tests: parameter protocol, fit state, scoring."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from skewld import (
    BatchPolicy,
    ConfigurationError,
    Dataset,
    ForceSpec,
    ModelSpec,
    ReplicaConfig,
    RunConfig,
    SkewSGLD,
    StepSchedule,
    generate_data,
    log_unnorm_posterior,
    run,
    solve_schedule,
)


def observations(n=20, seed=5):
    return generate_data((0.0, 2.0), n, ModelSpec(), mode="mixture", seed=seed).x


def test_get_params_set_params_clone():
    est = SkewSGLD(gamma=3.0, force="rotation2d", n_steps=500, random_state=9)
    params = est.get_params()
    assert params["gamma"] == 3.0
    assert params["force"] == "rotation2d"
    assert params["n_steps"] == 500
    twin = SkewSGLD().set_params(**params)
    assert twin.get_params() == params
    cloned = clone(est)
    assert cloned.get_params() == params
    assert not hasattr(cloned, "trace_")


def test_fit_matches_functional_run():
    x = observations()
    est = SkewSGLD(
        force="rotation2d",
        gamma=1.5,
        n_steps=1_000,
        dt=0.002,
        batch_size=4,
        burn_in=100,
        random_state=33,
        theta_init=(0.0, 2.0),
        likelihood_scale="average",
    )
    est.fit(x)
    config = RunConfig(
        model=ModelSpec(),
        data=Dataset(x),
        schedule=StepSchedule(kind="constant", dt=0.002),
        steps=1_000,
        seed=33,
        force=ForceSpec(kind="rotation2d", gamma=1.5),
        batch=BatchPolicy(kind="epoch-shuffle", size=4),
        burn_in=100,
        likelihood_scale="average",
        theta0=(0.0, 2.0),
    )
    direct = run(config)
    assert np.array_equal(est.samples_, direct.thetas)
    assert est.config_ == config
    # refitting reproduces the exact same draw
    again = SkewSGLD(**est.get_params()).fit(x)
    assert np.array_equal(again.samples_, est.samples_)


def test_fit_replicated():
    x = observations(10)
    est = SkewSGLD(
        n_replicas=5,
        gamma=2.0,
        n_steps=400,
        burn_in=0.5,
        batch_size=10,
        likelihood_scale="average",
        random_state=2,
    )
    est.fit(x)
    assert np.unique(est.trace_.replicas).size == 5
    assert est.samples_.shape == (5 * 200, 2)


def test_burn_in_fraction_vs_absolute():
    x = observations(8)
    frac = SkewSGLD(n_steps=600, burn_in=0.25, random_state=1).fit(x)
    assert frac.config_.burn_in == 150
    absolute = SkewSGLD(n_steps=600, burn_in=150, random_state=1).fit(x)
    assert absolute.config_.burn_in == 150
    assert np.array_equal(frac.samples_, absolute.samples_)
    zero = SkewSGLD(n_steps=600, burn_in=0, random_state=1).fit(x)
    assert zero.config_.burn_in == 0
    assert zero.samples_.shape[0] == 600


def test_dt_end_solves_polynomial_schedule():
    x = observations(8)
    est = SkewSGLD(n_steps=500, dt=0.01, dt_end=0.001, schedule_epsilon=0.7, random_state=4)
    est.fit(x)
    sched = est.config_.schedule
    assert sched.kind == "polynomial"
    expected = solve_schedule(0.01, 0.001, 500, 0.7)
    assert sched == expected
    assert abs(sched.value(0) - 0.01) < 1e-11
    assert abs(sched.value(500) - 0.001) < 1e-11


def test_column_vector_accepted():
    x = observations(12)
    a = SkewSGLD(n_steps=300, random_state=6).fit(x)
    b = SkewSGLD(n_steps=300, random_state=6).fit(x[:, None])
    assert np.array_equal(a.samples_, b.samples_)
    with pytest.raises(ConfigurationError):
        SkewSGLD(n_steps=300).fit(np.zeros((5, 2)))


def test_score_samples_matches_log_posterior():
    x = observations()
    est = SkewSGLD(n_steps=300, random_state=8, likelihood_scale="average").fit(x)
    pts = np.array([[0.0, 2.0], [2.0, -2.0], [1.0, 1.0]])
    got = est.score_samples(pts)
    want = log_unnorm_posterior(pts, Dataset(x), ModelSpec(), scale="average")
    assert np.array_equal(got, want)
    single = est.score_samples([0.0, 2.0])
    assert single.shape == (1,)
    assert single[0] == want[0]
    with pytest.raises(ConfigurationError):
        est.score_samples(np.zeros((2, 3)))


def test_score_before_fit_raises():
    with pytest.raises(NotFittedError):
        SkewSGLD().score_samples([[0.0, 0.0]])


def test_invalid_parameters_surface_at_fit():
    x = observations(8)
    with pytest.raises(ConfigurationError):
        SkewSGLD(force="sideways", n_steps=100).fit(x)
    with pytest.raises(ConfigurationError):
        SkewSGLD(n_steps=100, n_replicas=3, force="rotation2d", gamma=1.0).fit(x)
