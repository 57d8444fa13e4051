"""Langevin stepping with non-gradient drift terms that preserve e^{-E}.

A plain overdamped Langevin update drifts along -grad E.  Adding a term
gamma * B(theta) leaves the stationary density proportional to e^{-E}
whenever the added flow is divergence free:

    div(B e^{-E}) = 0,

which holds for the three constructions implemented here:

* ``rotation2d``: B = (-g2, g1), the gradient rotated a quarter turn;
* ``circular``:  B_k = g_{k-1} - g_{k+1} with periodic component indices;
* ``antisymmetric-matrix``: B = -S g for any constant S with S^T = -S.

The same telescoping argument applies across replicas of the state, where
each replica's gradient is estimated from its own slice of data; see
``replica_force``.  All force helpers treat the trailing axis as the
component axis, so stacked states (chains, grids) broadcast through.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .validation import (
    ConfigurationError,
    DivergenceError,
    check_antisymmetric,
    check_positive,
)

Array = np.ndarray

FORCE_KINDS = ("plain", "rotation2d", "circular", "antisymmetric-matrix")


@dataclass(frozen=True)
class ForceSpec:
    """Drift selection: a kind plus the skew strength gamma.

    ``matrix`` is required for (and only for) the antisymmetric-matrix kind
    and must satisfy S^T == -S exactly as stored.
    """

    kind: str = "plain"
    gamma: float = 0.0
    matrix: Array | None = None

    def __post_init__(self):
        if self.kind not in FORCE_KINDS:
            raise ConfigurationError(
                f"force kind must be one of {FORCE_KINDS}, got {self.kind!r}"
            )
        object.__setattr__(self, "gamma", check_positive("gamma", self.gamma, allow_zero=True))
        if self.kind == "antisymmetric-matrix":
            if self.matrix is None:
                raise ConfigurationError("antisymmetric-matrix force requires a matrix")
            m = check_antisymmetric(self.matrix)
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        elif self.matrix is not None:
            raise ConfigurationError(f"force kind {self.kind!r} does not take a matrix")


@dataclass(frozen=True)
class NoiseSpec:
    """Thermal noise strength.  Zero disables noise (deterministic stepping,
    used by tests); sampling runs require a strictly positive temperature."""

    temperature: float = 1.0

    def __post_init__(self):
        object.__setattr__(
            self, "temperature", check_positive("temperature", self.temperature, allow_zero=True)
        )


def _check_gamma(gamma: float) -> float:
    return check_positive("gamma", gamma, allow_zero=True)


def _check_out(out: Array, shape) -> Array:
    if out.shape != shape or out.dtype != np.float64:
        raise ConfigurationError(
            f"out must be float64 with shape {shape}, got {out.dtype} {out.shape}"
        )
    return out


def plain_force(grad_energy, out: Array | None = None) -> Array:
    """Equilibrium drift -grad E.

    ``out`` optionally names a float64 destination (an array or a view)
    written in place; hot loops use it to avoid a copy.
    """
    g = np.asarray(grad_energy, dtype=np.float64)
    if out is None:
        return -g
    return np.negative(g, out=_check_out(out, g.shape))


def skew_force_2d(grad_energy, gamma: float, out: Array | None = None) -> Array:
    """Two-component skew drift A = (-g1 - gamma g2, -g2 + gamma g1).

    The added part is the gradient rotated by 90 degrees, so it moves along
    level sets of E: (A + g) . g = 0 identically.  ``out`` as in
    ``plain_force`` but must not alias the gradient (components are written
    while the other is still being read).
    """
    if not (isinstance(gamma, float) and gamma >= 0.0):
        gamma = _check_gamma(gamma)
    g = np.asarray(grad_energy, dtype=np.float64)
    if g.shape[-1] != 2:
        raise ConfigurationError(
            f"rotation2d requires 2 components, got {g.shape[-1]}"
        )
    g1 = g[..., 0]
    g2 = g[..., 1]
    out = np.empty(g.shape) if out is None else _check_out(out, g.shape)
    o0 = out[..., 0]
    o1 = out[..., 1]
    # written as (-gamma g2) - g1 and (gamma g1) - g2 to reuse the output
    # slices without temporaries; bitwise equal to -g1 - gamma g2 etc.
    np.multiply(g2, -gamma, out=o0)
    o0 -= g1
    np.multiply(g1, gamma, out=o1)
    o1 -= g2
    return out


def skew_force_circular(grad_energy, gamma: float) -> Array:
    """Circulating drift A_k = -g_k + gamma (g_{k-1} - g_{k+1}).

    Component indices are periodic (theta_0 = theta_N, theta_{N+1} = theta_1).
    The added terms telescope: sum_k (A_k + g_k) g_k = 0.  At N = 2 the two
    neighbours coincide and the construction is identically zero, so it is
    rejected; use rotation2d for two components.
    """
    gamma = _check_gamma(gamma)
    g = np.asarray(grad_energy, dtype=np.float64)
    n = g.shape[-1]
    if n == 2:
        raise ConfigurationError(
            "circular skew force vanishes identically for 2 components; "
            "use the rotation2d kind instead"
        )
    if n < 3:
        raise ConfigurationError(f"circular skew force requires >= 3 components, got {n}")
    return -g + gamma * (np.roll(g, 1, axis=-1) - np.roll(g, -1, axis=-1))


def skew_force_matrix(grad_energy, gamma: float, matrix) -> Array:
    """General skew drift A = -g - gamma S g for antisymmetric S.

    With S = [[0, 1], [-1, 0]] this reproduces rotation2d.
    """
    gamma = _check_gamma(gamma)
    s = check_antisymmetric(matrix)
    g = np.asarray(grad_energy, dtype=np.float64)
    if g.shape[-1] != s.shape[0]:
        raise ConfigurationError(
            f"skew matrix is {s.shape[0]}x{s.shape[0]} but gradient has "
            f"{g.shape[-1]} components"
        )
    return -g - gamma * (g @ s.T)


_RING_CACHE: dict = {}


def _ring_indices(r_count: int):
    # periodic neighbor lookups, cached per replica count
    cached = _RING_CACHE.get(r_count)
    if cached is None:
        idx = np.arange(r_count)
        cached = (np.roll(idx, -1), np.roll(idx, 1))
        for a in cached:
            a.setflags(write=False)
        _RING_CACHE[r_count] = cached
    return cached


def replica_force(grads, gamma: float) -> Array:
    """Replica-coupled drift A_r = -g_r + gamma (g_{r+1} - g_{r-1}).

    ``grads`` holds one energy-gradient estimate per replica along the first
    axis, each evaluated at that replica's own state; the replica index is
    periodic.  The coupling telescopes, sum_r (A_r + g_r) = 0, so the product
    stationary law over replicas is preserved.  With gamma = 0 the replicas
    are independent.  Note R = 2 is accepted but the two coupling terms
    cancel, which reduces to independent chains regardless of gamma.
    """
    gamma = _check_gamma(gamma)
    g = np.asarray(grads, dtype=np.float64)
    if g.ndim < 2:
        raise ConfigurationError("replica gradients must have shape (R, ...components)")
    if g.shape[0] < 2:
        raise ConfigurationError(f"replica coupling requires >= 2 replicas, got {g.shape[0]}")
    ahead, behind = _ring_indices(g.shape[0])
    return -g + gamma * (g[ahead] - g[behind])


def build_force(grad_energy, spec: ForceSpec) -> Array:
    """Apply the configured single-system force to a gradient field."""
    if spec.kind == "plain":
        return plain_force(grad_energy)
    if spec.kind == "rotation2d":
        return skew_force_2d(grad_energy, spec.gamma)
    if spec.kind == "circular":
        return skew_force_circular(grad_energy, spec.gamma)
    return skew_force_matrix(grad_energy, spec.gamma, spec.matrix)


def langevin_step(
    theta,
    force,
    dt: float,
    noise: NoiseSpec = NoiseSpec(),
    rng: np.random.Generator | None = None,
    xi=None,
) -> Array:
    """One Euler-Maruyama update theta + dt * force + sqrt(2 T dt) * xi.

    ``xi`` may carry pre-drawn standard normals (one per component); when it
    is omitted they are drawn from ``rng``.  Pre-drawn blocks from the same
    generator state yield bit-identical trajectories, which the samplers
    exploit.  A non-finite result raises DivergenceError; the step is not
    silently clamped.
    """
    # plain asarray would return these unchanged; the guards only skip call overhead
    if type(theta) is not np.ndarray or theta.dtype != np.float64:
        theta = np.asarray(theta, dtype=np.float64)
    if type(force) is not np.ndarray or force.dtype != np.float64:
        force = np.asarray(force, dtype=np.float64)
    if not (isinstance(dt, float) and dt > 0.0):
        dt = check_positive("dt", dt)
    new = theta + dt * force
    if noise.temperature > 0.0:
        if xi is None:
            if rng is None:
                raise ConfigurationError("langevin_step needs rng or xi when temperature > 0")
            xi = rng.standard_normal(np.broadcast(theta, force).shape)
        elif type(xi) is not np.ndarray or xi.dtype != np.float64:
            xi = np.asarray(xi, dtype=np.float64)
        new += math.sqrt(2.0 * noise.temperature * dt) * xi
    # allocation-free finiteness test: NaN propagates through min/max and
    # either infinity shows up as an infinite extreme
    if new.size and not (-math.inf < new.min() and new.max() < math.inf):
        raise DivergenceError(last_state=theta)
    return new


def divergence_check(
    force_builder: Callable[[Array], Array],
    energy: Callable[[Array], Array],
    grid,
) -> float:
    """Finite-difference stationarity check for a drift built from grad E.

    The stationary flow of the Fokker-Planck equation at unit temperature is
    J = (A + grad E) e^{-E}.  The energy is evaluated on the grid's cell
    centers, grad E is formed by central differences, the candidate drift A
    is built from that same gradient field by ``force_builder``, and the
    divergence of J is taken by central differences.  Returned is

        max_interior |div J| / (max_interior |J| / h),

    a dimensionless residual that vanishes identically for the equilibrium
    drift (A = -grad E gives J = 0 exactly, reported as 0) and decays at
    second order in h for a genuinely divergence-free skew drift.  A drift
    that is not divergence free leaves a residual of order h.
    """
    nd = grid.ndim
    if any(b < 5 for b in grid.bins):
        raise ConfigurationError("divergence check needs >= 5 cells per axis")
    axes = [grid.centers(k) for k in range(nd)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack(mesh, axis=-1)
    e = np.asarray(energy(pts), dtype=np.float64)
    if e.shape != pts.shape[:-1]:
        raise ConfigurationError(
            f"energy returned shape {e.shape}, expected {pts.shape[:-1]}"
        )
    h = grid.spacing()
    grads = np.stack(
        [np.gradient(e, h[k], axis=k, edge_order=2) for k in range(nd)], axis=-1
    )
    drift = np.asarray(force_builder(grads), dtype=np.float64)
    if drift.shape != grads.shape:
        raise ConfigurationError(
            f"force builder returned shape {drift.shape}, expected {grads.shape}"
        )
    density = np.exp(-(e - e.min()))
    flow = (drift + grads) * density[..., None]
    div = np.zeros_like(e)
    for k in range(nd):
        div += np.gradient(flow[..., k], h[k], axis=k, edge_order=2)
    interior = tuple(slice(1, -1) for _ in range(nd))
    max_flow = float(np.max(np.abs(flow[interior + (slice(None),)])))
    max_div = float(np.max(np.abs(div[interior])))
    if max_flow == 0.0:
        return 0.0
    return max_div / (max_flow / float(np.max(h)))
