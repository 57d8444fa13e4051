"""Convergence diagnostics: exact grid posterior, histograms, KL, IAT.

All operations here are pure functions of their inputs.  Reductions use
pairwise summation (numpy's default) so results are reproducible across
runs on the same platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .model import Dataset, ModelSpec, check_likelihood_scale, log_unnorm_posterior
from .validation import ConfigurationError, DiagnosticError, as_float_array

if TYPE_CHECKING:  # pragma: no cover
    from .sampler import Trace

Array = np.ndarray

DEFAULT_KL_SMOOTHING = 1e-10
DEFAULT_MODES = ((0.0, 2.0), (2.0, -2.0))
DEFAULT_MODE_RADIUS = 0.75


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned uniform grid: bounds and cell counts per dimension.

    Cells are half-open boxes; evaluation points are cell centers.
    """

    lower: tuple
    upper: tuple
    bins: tuple

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        bins = tuple(int(v) for v in np.atleast_1d(self.bins))
        if not (len(lower) == len(upper) == len(bins)):
            raise ConfigurationError("grid lower/upper/bins must have equal length")
        if not all(np.isfinite(lower)) or not all(np.isfinite(upper)):
            raise ConfigurationError("grid bounds must be finite")
        if any(u <= l for l, u in zip(lower, upper)):
            raise ConfigurationError("grid upper bounds must exceed lower bounds")
        if any(b < 2 for b in bins):
            raise ConfigurationError("grid needs >= 2 cells per dimension")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "bins", bins)

    @property
    def ndim(self) -> int:
        return len(self.bins)

    def spacing(self) -> Array:
        return (np.asarray(self.upper) - np.asarray(self.lower)) / np.asarray(self.bins)

    def edges(self, axis: int) -> Array:
        return np.linspace(self.lower[axis], self.upper[axis], self.bins[axis] + 1)

    def centers(self, axis: int) -> Array:
        e = self.edges(axis)
        return 0.5 * (e[:-1] + e[1:])

    def cell_volume(self) -> float:
        return float(np.prod(self.spacing()))

    def matches(self, other: "GridSpec", tol: float = 1e-9) -> bool:
        if self.bins != other.bins:
            return False
        return bool(
            np.allclose(self.lower, other.lower, rtol=0.0, atol=tol)
            and np.allclose(self.upper, other.upper, rtol=0.0, atol=tol)
        )

    def to_dict(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper), "bins": list(self.bins)}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(tuple(d["lower"]), tuple(d["upper"]), tuple(d["bins"]))


DEFAULT_BENCHMARK_GRID = GridSpec((-2.0, -4.0), (4.0, 4.0), (240, 320))


@dataclass(frozen=True)
class GridDensity:
    """Probability mass per grid cell, plus the fraction that fell outside.

    mass.sum() + overflow == 1 within 1e-9.  Densities produced by the grid
    oracle have zero overflow; sample histograms may not.
    """

    grid: GridSpec
    mass: Array
    overflow: float = 0.0

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=np.float64)
        if mass.shape != tuple(self.grid.bins):
            raise ConfigurationError(
                f"mass shape {mass.shape} does not match grid bins {self.grid.bins}"
            )
        if not np.all(np.isfinite(mass)) or np.any(mass < 0):
            raise ConfigurationError("cell masses must be finite and non-negative")
        overflow = float(self.overflow)
        if not 0.0 <= overflow <= 1.0:
            raise ConfigurationError(f"overflow fraction must be in [0, 1], got {overflow}")
        total = float(mass.sum()) + overflow
        if abs(total - 1.0) > 1e-9:
            raise ConfigurationError(f"mass + overflow must equal 1, got {total!r}")
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "overflow", overflow)

    def in_grid_mass(self) -> Array:
        """Cell masses renormalized over the grid (drops overflow)."""
        total = float(self.mass.sum())
        if total <= 0.0:
            raise DiagnosticError("no mass landed inside the grid")
        return self.mass / total

    def write_csv(self, path) -> None:
        if self.grid.ndim != 2:
            raise ConfigurationError("CSV serialization is defined for 2-D grids")
        c0 = self.grid.centers(0)
        c1 = self.grid.centers(1)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write("theta1,theta2,density\n")
            for i in range(self.grid.bins[0]):
                row = self.mass[i]
                t1 = repr(float(c0[i]))
                f.write(
                    "".join(
                        f"{t1},{float(c1[j])!r},{float(row[j])!r}\n"
                        for j in range(self.grid.bins[1])
                    )
                )

    @classmethod
    def read_csv(cls, path) -> "GridDensity":
        raw = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.float64, ndmin=2)
        if raw.shape[1] != 3:
            raise ConfigurationError(f"{path}: expected columns theta1,theta2,density")
        c0 = np.unique(raw[:, 0])
        c1 = np.unique(raw[:, 1])
        if c0.size * c1.size != raw.shape[0]:
            raise ConfigurationError(f"{path}: rows do not form a full grid")
        h0 = np.diff(c0)
        h1 = np.diff(c1)
        if c0.size < 2 or c1.size < 2 or not (
            np.allclose(h0, h0[0], rtol=1e-6) and np.allclose(h1, h1[0], rtol=1e-6)
        ):
            raise ConfigurationError(f"{path}: grid centers are not uniformly spaced")
        grid = GridSpec(
            (c0[0] - h0[0] / 2, c1[0] - h1[0] / 2),
            (c0[-1] + h0[0] / 2, c1[-1] + h1[0] / 2),
            (c0.size, c1.size),
        )
        mass = np.zeros((c0.size, c1.size))
        i0 = np.searchsorted(c0, raw[:, 0])
        i1 = np.searchsorted(c1, raw[:, 1])
        mass[i0, i1] = raw[:, 2]
        total = mass.sum()
        return cls(grid, mass, overflow=max(0.0, min(1.0, 1.0 - float(total))))


def grid_density_from_log(log_values: Array, grid: GridSpec, check_boundary: bool = True) -> GridDensity:
    """Normalize log cell values into a GridDensity via log-sum-exp.

    Normalization is invariant under adding any constant to the log values.
    When ``check_boundary`` is set, a maximum on the grid boundary raises,
    since it means the density likely continues beyond the grid.
    """
    log_values = np.asarray(log_values, dtype=np.float64)
    if log_values.shape != tuple(grid.bins):
        raise ConfigurationError(
            f"log density shape {log_values.shape} does not match grid bins {grid.bins}"
        )
    if not np.all(np.isfinite(log_values)):
        raise DiagnosticError("log density contains non-finite values")
    shifted = log_values - log_values.max()
    w = np.exp(shifted)
    mass = w / w.sum()
    if check_boundary:
        peak = np.unravel_index(int(np.argmax(mass)), mass.shape)
        on_edge = any(i == 0 or i == b - 1 for i, b in zip(peak, grid.bins))
        if on_edge:
            raise DiagnosticError(
                "density peaks on the grid boundary; the grid likely misses the mass"
            )
    return GridDensity(grid, mass)


def grid_posterior(
    model: ModelSpec,
    data: Dataset,
    grid: GridSpec = DEFAULT_BENCHMARK_GRID,
    scale: str = "sum",
) -> GridDensity:
    """Exact posterior (up to discretization) on the grid's cell centers.

    The unnormalized log posterior is evaluated at each cell center and
    normalized by log-sum-exp, so the result is a proper distribution over
    cells regardless of the magnitude of the log values.  With an empty
    dataset this is the prior.  ``scale`` selects sum or average weighting
    of the log-likelihood, matching the corresponding sampler target.
    """
    check_likelihood_scale(scale)
    if grid.ndim != 2:
        raise ConfigurationError("the posterior grid must be 2-D")
    t1 = grid.centers(0)[:, None]
    t2 = grid.centers(1)[None, :]
    theta = np.stack(np.broadcast_arrays(t1, t2), axis=-1)
    logp = log_unnorm_posterior(theta, data, model, scale=scale)
    return grid_density_from_log(logp, grid)


def _trace_arrays(trace) -> tuple[Array, Array, Array]:
    """Accept a Trace or a bare (n, 2) sample array."""
    if hasattr(trace, "thetas"):
        return (
            np.asarray(trace.steps),
            np.asarray(trace.replicas),
            np.asarray(trace.thetas, dtype=np.float64),
        )
    thetas = np.asarray(trace, dtype=np.float64)
    if thetas.ndim != 2:
        raise ConfigurationError("samples must have shape (n, components)")
    n = thetas.shape[0]
    return np.arange(n), np.zeros(n, dtype=np.int64), thetas


def _post_burn_in(trace, burn_in: int) -> Array:
    steps, _, thetas = _trace_arrays(trace)
    if burn_in < 0:
        raise ConfigurationError(f"burn_in must be >= 0, got {burn_in}")
    kept = thetas[steps >= burn_in]
    if kept.shape[0] == 0:
        raise ConfigurationError("no samples remain after burn-in")
    return kept


def histogram2d(trace, grid: GridSpec, burn_in: int = 0) -> GridDensity:
    """Bin trace samples onto the grid; mass is counts over total samples.

    Samples falling outside the grid are not dropped silently: they are
    accounted for in the overflow fraction, so mass + overflow = 1.
    """
    if grid.ndim != 2:
        raise ConfigurationError("histogram2d requires a 2-D grid")
    thetas = _post_burn_in(trace, burn_in)
    counts, _, _ = np.histogram2d(
        thetas[:, 0], thetas[:, 1], bins=(grid.edges(0), grid.edges(1))
    )
    total = thetas.shape[0]
    mass = counts / total
    overflow = 1.0 - float(mass.sum())
    return GridDensity(grid, mass, overflow=min(1.0, max(0.0, overflow)))


def kl_divergence(p: GridDensity, q: GridDensity, smoothing: float = DEFAULT_KL_SMOOTHING) -> float:
    """KL(p || q) over grid cells, with both floored by ``smoothing`` per cell.

    Both densities are renormalized over the grid first (sample histograms
    may carry overflow).  The smoothing mass keeps empty reference cells
    from producing infinities; applying it to both sides keeps the identity
    kl_divergence(p, p) == 0 exact.
    """
    if not p.grid.matches(q.grid):
        raise ConfigurationError("KL requires both densities on the same grid")
    if smoothing <= 0:
        raise ConfigurationError(f"smoothing must be > 0, got {smoothing}")
    pm = p.in_grid_mass() + smoothing
    pm = pm / pm.sum()
    qm = q.in_grid_mass() + smoothing
    qm = qm / qm.sum()
    return float(np.sum(pm * (np.log(pm) - np.log(qm))))


def mode_occupancy(
    trace,
    modes: Sequence = DEFAULT_MODES,
    radius: float = DEFAULT_MODE_RADIUS,
    burn_in: int = 0,
) -> Array:
    """Fraction of post-burn-in samples within ``radius`` of each mode."""
    if radius <= 0:
        raise ConfigurationError(f"mode radius must be > 0, got {radius}")
    thetas = _post_burn_in(trace, burn_in)
    centers = as_float_array("modes", np.asarray(modes), ndim=2)
    if centers.shape[1] != thetas.shape[1]:
        raise ConfigurationError("mode centers must match the parameter dimension")
    d2 = np.sum((thetas[:, None, :] - centers[None, :, :]) ** 2, axis=-1)
    return (d2 <= radius * radius).mean(axis=0)


@dataclass(frozen=True)
class AutocorrelationResult:
    iat: float
    ess: float
    degenerate: bool = False


def integrated_autocorr(series) -> AutocorrelationResult:
    """Integrated autocorrelation time by Geyer's initial positive sequence.

    Autocovariances come from an FFT of the centered series; the lag sum is
    truncated at the first nonpositive pair sum rho_{2m} + rho_{2m+1}.  The
    result is clamped to >= 1 and ess = n / iat.  A constant series has no
    correlation structure to estimate: it is flagged degenerate with
    iat = n, ess = 1.
    """
    x = as_float_array("series", series, ndim=1)
    n = x.shape[0]
    if n < 100:
        raise ConfigurationError(f"autocorrelation needs >= 100 samples, got {n}")
    x = x - x.mean()
    var = float(np.dot(x, x)) / n
    if var == 0.0:
        return AutocorrelationResult(iat=float(n), ess=1.0, degenerate=True)
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, n=size)
    acov = np.fft.irfft(f * np.conj(f), n=size)[:n] / n
    rho = acov / acov[0]
    # pair sums of consecutive lags (0,1), (2,3), ...; stop before the first
    # nonpositive one
    m = n // 2
    pair = rho[0 : 2 * m : 2] + rho[1 : 2 * m : 2]
    bad = np.nonzero(pair <= 0.0)[0]
    cutoff = int(bad[0]) if bad.size else m
    iat = max(1.0, -1.0 + 2.0 * float(pair[:cutoff].sum()))
    return AutocorrelationResult(iat=iat, ess=n / iat, degenerate=False)


def autocorrelation(trace, component: int = 0, burn_in: int = 0, replica: int | None = None) -> AutocorrelationResult:
    """IAT and ESS for one component of a single replica's series."""
    steps, replicas, thetas = _trace_arrays(trace)
    present = np.unique(replicas)
    if replica is None:
        if present.size > 1:
            raise ConfigurationError(
                "trace holds multiple replicas; pass replica= to select one "
                "(IAT is defined per replica series)"
            )
        replica = int(present[0])
    keep = (replicas == replica) & (steps >= burn_in)
    series = thetas[keep, component]
    if series.shape[0] == 0:
        raise ConfigurationError(f"replica {replica} has no samples after burn-in")
    return integrated_autocorr(series)


@dataclass(frozen=True)
class ComponentAutocorr:
    component: int
    iat_mean: float
    iat_per_replica: tuple
    ess_total: float
    degenerate: bool


@dataclass(frozen=True)
class DiagnosticsReport:
    """Summary of one trace against a reference density."""

    kl: float
    kl_smoothing: float
    mode_occupancy: tuple
    mode_centers: tuple
    mode_radius: float
    autocorr: tuple
    n_samples: int
    n_replicas: int
    overflow_fraction: float
    divergence: dict | None = None

    def to_dict(self) -> dict:
        return {
            "kind": "diagnostics_report",
            "kl": self.kl,
            "kl_smoothing": self.kl_smoothing,
            "mode_occupancy": [
                {"mode": list(c), "radius": self.mode_radius, "fraction": f}
                for c, f in zip(self.mode_centers, self.mode_occupancy)
            ],
            "autocorrelation": [
                {
                    "component": a.component,
                    "iat_mean": a.iat_mean,
                    "iat_per_replica": list(a.iat_per_replica),
                    "ess_total": a.ess_total,
                    "degenerate": a.degenerate,
                }
                for a in self.autocorr
            ],
            "n_samples": self.n_samples,
            "n_replicas": self.n_replicas,
            "overflow_fraction": self.overflow_fraction,
            "divergence": self.divergence,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def build_report(
    trace,
    oracle: GridDensity,
    burn_in: int = 0,
    modes: Sequence = DEFAULT_MODES,
    radius: float = DEFAULT_MODE_RADIUS,
    smoothing: float = DEFAULT_KL_SMOOTHING,
) -> DiagnosticsReport:
    """Assemble KL, occupancy and per-component mixing for one trace.

    Autocorrelation is computed per replica and averaged; effective sample
    sizes add across replicas.
    """
    steps, replicas, thetas = _trace_arrays(trace)
    hist = histogram2d(trace, oracle.grid, burn_in=burn_in)
    kl = kl_divergence(hist, oracle, smoothing=smoothing)
    occupancy = mode_occupancy(trace, modes=modes, radius=radius, burn_in=burn_in)
    reps = [int(r) for r in np.unique(replicas)]
    per_component = []
    for c in range(thetas.shape[1]):
        results = [autocorrelation(trace, component=c, burn_in=burn_in, replica=r) for r in reps]
        per_component.append(
            ComponentAutocorr(
                component=c,
                iat_mean=float(np.mean([r.iat for r in results])),
                iat_per_replica=tuple(r.iat for r in results),
                ess_total=float(np.sum([r.ess for r in results])),
                degenerate=any(r.degenerate for r in results),
            )
        )
    kept = int(np.count_nonzero(steps >= burn_in))
    divergence = None
    meta = getattr(trace, "meta", None)
    if isinstance(meta, dict):
        divergence = meta.get("divergence")
    return DiagnosticsReport(
        kl=kl,
        kl_smoothing=smoothing,
        mode_occupancy=tuple(float(v) for v in occupancy),
        mode_centers=tuple(tuple(float(v) for v in m) for m in modes),
        mode_radius=float(radius),
        autocorr=tuple(per_component),
        n_samples=kept,
        n_replicas=len(reps),
        overflow_fraction=float(hist.overflow),
        divergence=divergence,
    )
