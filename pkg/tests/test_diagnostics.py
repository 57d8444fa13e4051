"""Diagnostics tests against closed-form and brute-force oracles.

The grid oracle is checked against the analytic prior Gaussian, the KL
implementation against a plain python loop, and the IAT estimator against
i.i.d. and AR(1) series whose autocorrelation times are known exactly.
"""

import math

import numpy as np
import pytest

from skewld import (
    BatchPolicy,
    ConfigurationError,
    Dataset,
    DEFAULT_BENCHMARK_GRID,
    DEFAULT_MODES,
    DiagnosticError,
    DivergenceError,
    ForceSpec,
    GridDensity,
    GridSpec,
    ModelSpec,
    ReplicaConfig,
    RunConfig,
    StepSchedule,
    Trace,
    autocorrelation,
    build_report,
    generate_data,
    grid_density_from_log,
    grid_posterior,
    histogram2d,
    integrated_autocorr,
    kl_divergence,
    mode_occupancy,
    run_replicated,
    run_single,
)

# dataset pinned for the benchmark posterior checks; its two posterior modes
# sit on the default grid within half a cell of (0,2) and (2,-2)
BENCHMARK_DATA_SEED = 3


def benchmark_data(n=100):
    return generate_data((0.0, 2.0), n, ModelSpec(), mode="mixture", seed=BENCHMARK_DATA_SEED)


def synthetic_trace(thetas, replicas=None):
    thetas = np.asarray(thetas, dtype=np.float64)
    n = thetas.shape[0]
    if replicas is None:
        replicas = np.zeros(n, dtype=np.int64)
        steps = np.arange(n, dtype=np.int64)
    else:
        replicas = np.asarray(replicas, dtype=np.int64)
        steps = np.repeat(np.arange(n // np.unique(replicas).size), np.unique(replicas).size)
    return Trace(steps=steps, replicas=replicas, dts=np.full(n, 0.001), thetas=thetas)


# --------------------------------------------------------------------- grids


def test_grid_spec_geometry():
    g = GridSpec((0.0, -1.0), (1.0, 1.0), (4, 10))
    assert g.ndim == 2
    assert np.allclose(g.spacing(), [0.25, 0.2])
    assert np.allclose(g.edges(0), [0.0, 0.25, 0.5, 0.75, 1.0])
    assert np.allclose(g.centers(0), [0.125, 0.375, 0.625, 0.875])
    assert abs(g.cell_volume() - 0.05) < 1e-15
    assert g.matches(GridSpec((0.0, -1.0), (1.0, 1.0), (4, 10)))
    assert not g.matches(GridSpec((0.0, -1.0), (1.0, 1.0), (4, 11)))
    assert not g.matches(GridSpec((0.0, -1.0), (1.0, 1.001), (4, 10)))
    assert GridSpec.from_dict(g.to_dict()) == g


def test_grid_spec_validation():
    with pytest.raises(ConfigurationError):
        GridSpec((0.0,), (1.0, 2.0), (4, 4))
    with pytest.raises(ConfigurationError):
        GridSpec((0.0, 0.0), (1.0, 0.0), (4, 4))
    with pytest.raises(ConfigurationError):
        GridSpec((0.0, 0.0), (1.0, 1.0), (1, 4))
    with pytest.raises(ConfigurationError):
        GridSpec((0.0, np.inf), (1.0, 2.0), (4, 4))


def test_default_benchmark_grid_shape():
    g = DEFAULT_BENCHMARK_GRID
    assert g.lower == (-2.0, -4.0) and g.upper == (4.0, 4.0)
    assert g.bins == (240, 320)


def test_grid_density_validation():
    g = GridSpec((0.0, 0.0), (1.0, 1.0), (2, 2))
    ok = np.full((2, 2), 0.25)
    GridDensity(g, ok)
    with pytest.raises(ConfigurationError):
        GridDensity(g, np.full((2, 3), 0.25))
    with pytest.raises(ConfigurationError):
        GridDensity(g, ok * 0.9)  # does not sum to one
    GridDensity(g, ok * 0.9, overflow=0.1)
    with pytest.raises(ConfigurationError):
        GridDensity(g, ok * 0.9, overflow=0.2)
    bad = ok.copy()
    bad[0, 0] = -0.25
    bad[0, 1] = 0.75
    with pytest.raises(ConfigurationError):
        GridDensity(g, bad)


# -------------------------------------------------------------- grid oracle


def test_prior_grid_matches_analytic_gaussian():
    """Empty data leaves the prior: an independent Gaussian in each component."""
    model = ModelSpec(a1=0.1, a2=0.1)
    grid = GridSpec((-15.0, -15.0), (15.0, 15.0), (120, 120))
    dens = grid_posterior(model, Dataset(np.empty(0)), grid, scale="sum")
    t1 = grid.centers(0)[:, None]
    t2 = grid.centers(1)[None, :]
    pdf = (0.1 / (2 * np.pi)) * np.exp(-0.05 * (t1 * t1 + t2 * t2))
    approx = pdf * grid.cell_volume()
    assert np.max(np.abs(dens.mass - approx)) < 1e-4
    assert dens.overflow == 0.0


def test_grid_density_rescaling_invariance():
    grid = GridSpec((-3.0, -3.0), (3.0, 3.0), (40, 40))
    rng = np.random.default_rng(4)
    logv = rng.normal(size=(40, 40))
    logv[20, 20] = 5.0  # keep the peak interior
    a = grid_density_from_log(logv, grid)
    b = grid_density_from_log(logv + 137.25, grid)
    c = grid_density_from_log(logv - 500.0, grid)
    assert np.max(np.abs(a.mass - b.mass)) < 1e-9
    assert np.max(np.abs(a.mass - c.mass)) < 1e-9


def local_maxima_points(dens):
    """Cell centers that strictly dominate their 8 neighbors, best first."""
    m = np.pad(dens.mass, 1, constant_values=-np.inf)
    core = dens.mass
    best = np.ones(core.shape, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            best &= core > m[1 + di : 1 + di + core.shape[0], 1 + dj : 1 + dj + core.shape[1]]
    idx = np.argwhere(best)
    order = np.argsort(core[best])[::-1]
    c0 = dens.grid.centers(0)
    c1 = dens.grid.centers(1)
    return [np.array([c0[i], c1[j]]) for i, j in idx[order]]


def test_benchmark_posterior_modes_on_default_grid():
    """Two posterior maxima, each within one grid cell of the known modes."""
    model = ModelSpec()
    dens = grid_posterior(model, benchmark_data(), DEFAULT_BENCHMARK_GRID, scale="sum")
    peaks = local_maxima_points(dens)
    assert len(peaks) >= 2
    spacing = DEFAULT_BENCHMARK_GRID.spacing()
    top2 = peaks[:2]
    for mode in np.asarray(DEFAULT_MODES):
        off = min(np.max(np.abs(p - mode) / spacing) for p in top2)
        assert off <= 1.0


def test_benchmark_posterior_modes_average_scale_present():
    # tempered posterior keeps both maxima near the same spots, just broader
    model = ModelSpec()
    dens = grid_posterior(model, benchmark_data(), DEFAULT_BENCHMARK_GRID, scale="average")
    peaks = local_maxima_points(dens)[:2]
    assert len(peaks) == 2
    for mode in np.asarray(DEFAULT_MODES):
        assert min(np.linalg.norm(p - mode) for p in peaks) < 0.5


def test_grid_refinement_consistency():
    """Doubling the resolution barely moves the coarse-grid distribution."""
    model = ModelSpec()
    data = benchmark_data()
    coarse_grid = GridSpec((-2.0, -4.0), (4.0, 4.0), (120, 160))
    fine_grid = GridSpec((-2.0, -4.0), (4.0, 4.0), (240, 320))
    coarse = grid_posterior(model, data, coarse_grid, scale="average")
    fine = grid_posterior(model, data, fine_grid, scale="average")
    projected = GridDensity(
        coarse_grid, fine.mass.reshape(120, 2, 160, 2).sum(axis=(1, 3))
    )
    assert kl_divergence(coarse, projected) < 1e-3


def test_grid_posterior_boundary_peak_raises():
    model = ModelSpec()
    off_grid = GridSpec((5.0, 5.0), (8.0, 8.0), (30, 30))  # misses both modes
    with pytest.raises(DiagnosticError):
        grid_posterior(model, benchmark_data(), off_grid, scale="sum")


def test_grid_density_from_log_validation():
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (8, 8))
    with pytest.raises(ConfigurationError):
        grid_density_from_log(np.zeros((8, 7)), grid)
    logv = np.zeros((8, 8))
    logv[0, 0] = np.inf
    with pytest.raises(DiagnosticError):
        grid_density_from_log(logv, grid)
    # uniform log values peak "on the boundary" by argmax convention
    with pytest.raises(DiagnosticError):
        grid_density_from_log(np.zeros((8, 8)), grid)
    d = grid_density_from_log(np.zeros((8, 8)), grid, check_boundary=False)
    assert np.allclose(d.mass, 1.0 / 64.0)


# ---------------------------------------------------------------- histogram


def test_histogram_known_placement():
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (2, 2))
    tr = synthetic_trace([[0.25, 0.25]] * 4)
    h = histogram2d(tr, grid)
    assert h.mass[0, 0] == 1.0 and h.mass.sum() == 1.0
    assert h.overflow == 0.0

    tr = synthetic_trace([[0.25, 0.25], [0.75, 0.75], [5.0, 5.0], [-1.0, 0.5]])
    h = histogram2d(tr, grid)
    assert h.mass[0, 0] == 0.25 and h.mass[1, 1] == 0.25
    assert h.overflow == 0.5
    assert abs(h.mass.sum() + h.overflow - 1.0) < 1e-9


def test_histogram_burn_in_filters_by_step():
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (2, 2))
    thetas = np.array([[0.25, 0.25]] * 5 + [[0.75, 0.75]] * 5)
    tr = synthetic_trace(thetas)  # steps 0..9
    h = histogram2d(tr, grid, burn_in=5)
    assert h.mass[1, 1] == 1.0
    with pytest.raises(ConfigurationError):
        histogram2d(tr, grid, burn_in=10)
    with pytest.raises(ConfigurationError):
        histogram2d(tr, grid, burn_in=-1)


def test_histogram_pools_replicas():
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (2, 2))
    thetas = np.array([[0.25, 0.25], [0.75, 0.75]] * 3)
    tr = synthetic_trace(thetas, replicas=np.tile([0, 1], 3))
    h = histogram2d(tr, grid)
    assert h.mass[0, 0] == 0.5 and h.mass[1, 1] == 0.5


def test_histogram_accepts_bare_arrays():
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (2, 2))
    h = histogram2d(np.array([[0.25, 0.25], [0.75, 0.25]]), grid)
    assert h.mass[0, 0] == 0.5 and h.mass[1, 0] == 0.5


def test_histogram_uniform_multinomial():
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (10, 10))
    n = 10**5
    pts = np.random.default_rng(7).uniform(0.0, 1.0, size=(n, 2))
    h = histogram2d(pts, grid)
    p = 1.0 / 100.0
    sigma = math.sqrt(n * p * (1 - p)) / n
    assert np.max(np.abs(h.mass - p)) < 5 * sigma
    assert h.overflow == 0.0


# ----------------------------------------------------------------------- KL


def test_kl_identity_and_nonnegativity():
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (5, 4))
    rng = np.random.default_rng(12)
    for _ in range(20):
        p = GridDensity(grid, rng.dirichlet(np.ones(20)).reshape(5, 4))
        q = GridDensity(grid, rng.dirichlet(np.ones(20)).reshape(5, 4))
        assert kl_divergence(p, p) == 0.0
        assert kl_divergence(p, q) >= 0.0


def test_kl_matches_brute_force():
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (5, 4))
    rng = np.random.default_rng(77)
    p = rng.dirichlet(np.ones(20)).reshape(5, 4)
    q = rng.dirichlet(np.ones(20)).reshape(5, 4)
    smoothing = 1e-6
    ps = p + smoothing
    ps = ps / ps.sum()
    qs = q + smoothing
    qs = qs / qs.sum()
    expected = 0.0
    for i in range(5):
        for j in range(4):
            expected += float(ps[i, j]) * math.log(float(ps[i, j]) / float(qs[i, j]))
    got = kl_divergence(GridDensity(grid, p), GridDensity(grid, q), smoothing=smoothing)
    assert abs(got - expected) < 1e-6


def test_kl_concentrated_on_empty_reference_cell():
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (5, 4))
    p_mass = np.zeros((5, 4))
    p_mass[2, 2] = 1.0
    q_mass = np.zeros((5, 4))
    q_mass[0, 0] = 1.0
    kl = kl_divergence(GridDensity(grid, p_mass), GridDensity(grid, q_mass))
    assert np.isfinite(kl) and kl > 10.0  # log(1/smoothing)-ish


def test_kl_renormalizes_overflow():
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (2, 2))
    full = GridDensity(grid, np.full((2, 2), 0.25))
    half = GridDensity(grid, np.full((2, 2), 0.125), overflow=0.5)
    assert kl_divergence(half, full) < 1e-12


def test_kl_validation():
    g1 = GridSpec((0.0, 0.0), (1.0, 1.0), (2, 2))
    g2 = GridSpec((0.0, 0.0), (1.0, 1.0), (2, 3))
    p = GridDensity(g1, np.full((2, 2), 0.25))
    q = GridDensity(g2, np.full((2, 3), 1.0 / 6.0))
    with pytest.raises(ConfigurationError):
        kl_divergence(p, q)
    with pytest.raises(ConfigurationError):
        kl_divergence(p, p, smoothing=0.0)
    empty = GridDensity(g1, np.zeros((2, 2)), overflow=1.0)
    with pytest.raises(DiagnosticError):
        kl_divergence(empty, p)


# -------------------------------------------------------------- occupancy


def test_mode_occupancy_trivial_cases():
    at_mode1 = synthetic_trace(np.tile([0.0, 2.0], (10, 1)))
    occ = mode_occupancy(at_mode1)
    assert occ.tolist() == [1.0, 0.0]
    nowhere = synthetic_trace(np.tile([10.0, 10.0], (10, 1)))
    assert mode_occupancy(nowhere).tolist() == [0.0, 0.0]


def test_mode_occupancy_radius_boundary():
    tr = synthetic_trace([[0.74, 2.0], [0.76, 2.0]])
    occ = mode_occupancy(tr, modes=((0.0, 2.0),), radius=0.75)
    assert occ.tolist() == [0.5]  # <= radius counts, beyond does not


def test_mode_occupancy_fractions_can_overlap():
    # overlapping balls both count the same sample
    tr = synthetic_trace([[1.0, 0.0]])
    occ = mode_occupancy(tr, modes=((0.5, 0.0), (1.5, 0.0)), radius=1.0)
    assert occ.tolist() == [1.0, 1.0]


def test_mode_occupancy_validation():
    tr = synthetic_trace([[0.0, 0.0]])
    with pytest.raises(ConfigurationError):
        mode_occupancy(tr, radius=0.0)
    with pytest.raises(ConfigurationError):
        mode_occupancy(tr, modes=((0.0, 1.0, 2.0),))


# --------------------------------------------------------------------- IAT


def test_iat_iid_series():
    x = np.random.default_rng(15).standard_normal(20_000)
    r = integrated_autocorr(x)
    assert abs(r.iat - 1.0) <= 0.1
    assert not r.degenerate
    assert r.ess <= x.shape[0] + 1e-9
    assert abs(r.ess - x.shape[0] / r.iat) < 1e-9


def test_iat_ar1_series():
    # AR(1) with coefficient rho has IAT (1+rho)/(1-rho) = 19 at rho = 0.9
    rho = 0.9
    n = 10**5
    rng = np.random.default_rng(42)
    x = np.empty(n)
    x[0] = rng.standard_normal()
    innov = math.sqrt(1 - rho * rho) * rng.standard_normal(n - 1)
    for t in range(1, n):
        x[t] = rho * x[t - 1] + innov[t - 1]
    r = integrated_autocorr(x)
    assert abs(r.iat - 19.0) <= 0.15 * 19.0


def test_iat_constant_series_degenerate():
    r = integrated_autocorr(np.full(500, 3.25))
    assert r.degenerate
    assert r.iat == 500.0 and r.ess == 1.0


def test_iat_validation():
    with pytest.raises(ConfigurationError):
        integrated_autocorr(np.zeros(99))
    with pytest.raises(ConfigurationError):
        integrated_autocorr(np.zeros((100, 2)))


def test_autocorrelation_replica_selection():
    rng = np.random.default_rng(3)
    n = 300
    thetas = rng.standard_normal((2 * n, 2))
    tr = synthetic_trace(thetas, replicas=np.tile([0, 1], n))
    with pytest.raises(ConfigurationError):
        autocorrelation(tr, component=0)  # ambiguous: two replicas
    r0 = autocorrelation(tr, component=0, replica=0)
    r1 = autocorrelation(tr, component=0, replica=1)
    direct0 = integrated_autocorr(thetas[0::2, 0])
    assert r0.iat == direct0.iat
    assert r0.iat != r1.iat
    with pytest.raises(ConfigurationError):
        autocorrelation(tr, component=0, replica=5)


# ------------------------------------------------------------------ report


def test_build_report_fields_and_json():
    model = ModelSpec()
    data = benchmark_data()
    grid = GridSpec((-2.0, -4.0), (4.0, 4.0), (60, 80))
    oracle = grid_posterior(model, data, grid, scale="average")
    cfg = RunConfig(
        model=model,
        data=data,
        schedule=StepSchedule(kind="constant", dt=0.002),
        steps=2_000,
        seed=11,
        burn_in=0,
        force=ForceSpec(kind="rotation2d", gamma=2.0),
        batch=BatchPolicy("epoch-shuffle", 1),
        likelihood_scale="average",
        theta0=(0.0, 2.0),
    )
    tr = run_single(cfg)
    rep = build_report(tr, oracle, burn_in=200)
    assert rep.kl >= 0.0
    assert all(0.0 <= f <= 1.0 for f in rep.mode_occupancy)
    assert rep.n_samples == 1_800
    assert rep.n_replicas == 1
    assert len(rep.autocorr) == 2
    for comp in rep.autocorr:
        assert comp.iat_mean >= 1.0
        assert comp.ess_total <= rep.n_samples + 1e-9
    assert rep.divergence is None
    doc = rep.to_dict()
    import json

    parsed = json.loads(rep.to_json())
    assert parsed == json.loads(json.dumps(doc))
    assert parsed["kind"] == "diagnostics_report"
    assert len(parsed["mode_occupancy"]) == 2
    assert parsed["mode_occupancy"][0]["mode"] == [0.0, 2.0]


def test_build_report_replica_averaging():
    model = ModelSpec()
    data = benchmark_data(20)
    grid = GridSpec((-2.0, -4.0), (4.0, 4.0), (30, 40))
    oracle = grid_posterior(model, data, grid, scale="average")
    cfg = RunConfig(
        model=model,
        data=data,
        schedule=StepSchedule(kind="constant", dt=0.002),
        steps=1_000,
        seed=21,
        burn_in=0,
        batch=BatchPolicy("epoch-shuffle", 4),
        replicas=ReplicaConfig(count=4),
        likelihood_scale="average",
    )
    tr = run_replicated(cfg)
    rep = build_report(tr, oracle)
    assert rep.n_replicas == 4
    assert rep.n_samples == 4_000
    for comp in rep.autocorr:
        assert len(comp.iat_per_replica) == 4
        assert abs(comp.iat_mean - np.mean(comp.iat_per_replica)) < 1e-12
        per_ess = [1_000 / i for i in comp.iat_per_replica]
        assert abs(comp.ess_total - sum(per_ess)) < 1e-9


def test_build_report_carries_divergence():
    # a run that aborts hands back a partial trace whose meta records where;
    # the report must surface that marker untouched
    rng = np.random.default_rng(9)
    n = 200
    tr = Trace(
        steps=np.arange(n, dtype=np.int64),
        replicas=np.zeros(n, dtype=np.int64),
        dts=np.full(n, 0.01),
        thetas=rng.uniform(0.0, 1.0, size=(n, 2)),
        meta={"divergence": {"step": 200, "last_state": [np.inf, 3.0]}},
    )
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (4, 4))
    oracle = GridDensity(grid, np.full((4, 4), 1.0 / 16.0))
    rep = build_report(tr, oracle)
    assert rep.divergence == {"step": 200, "last_state": [np.inf, 3.0]}
    clean = build_report(synthetic_trace(rng.uniform(0.0, 1.0, size=(150, 2))), oracle)
    assert clean.divergence is None


# ------------------------------------------------------------ serialization


def test_grid_density_csv_roundtrip(tmp_path):
    model = ModelSpec()
    grid = GridSpec((-2.0, -4.0), (4.0, 4.0), (24, 32))
    dens = grid_posterior(model, benchmark_data(10), grid, scale="average")
    p = tmp_path / "oracle.csv"
    dens.write_csv(p)
    with open(p) as f:
        assert f.readline() == "theta1,theta2,density\n"
    back = GridDensity.read_csv(p)
    assert back.grid.matches(dens.grid, tol=1e-12)
    assert np.array_equal(back.mass, dens.mass)
    assert back.overflow < 1e-12  # reconstructed as the complement of the sum

    with_overflow = GridDensity(grid, dens.mass * 0.75, overflow=0.25)
    p2 = tmp_path / "hist.csv"
    with_overflow.write_csv(p2)
    back2 = GridDensity.read_csv(p2)
    assert abs(back2.overflow - 0.25) < 1e-9


def test_grid_density_read_validation(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("theta1,theta2\n0.0,0.0\n")
    with pytest.raises(ConfigurationError):
        GridDensity.read_csv(bad)
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("theta1,theta2,density\n0.0,0.0,0.5\n0.0,1.0,0.25\n1.0,0.0,0.25\n")
    with pytest.raises(ConfigurationError):
        GridDensity.read_csv(ragged)
