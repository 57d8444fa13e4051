"""Tied-mean Gaussian mixture benchmark.

Observation model for a scalar datum x given locations theta = (theta1, theta2):

    P(x | theta) = 1/2 * N(x; theta1, 1/b) + 1/2 * N(x; theta1 + theta2, 1/b)

with a shared precision b for both components and a Gaussian prior

    p(theta) = sqrt(a1 * a2) / (2 pi) * exp(-a1 theta1^2 / 2 - a2 theta2^2 / 2).

Because the second component mean is tied to the first (theta1 + theta2), the
posterior given data clustered at 0 and at theta2 is bimodal: the component
labels can swap, producing a second mode at (theta1 + theta2, -theta2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import (
    ConfigurationError,
    as_float_array,
    as_param_vector,
    check_positive,
)

Array = np.ndarray

LIKELIHOOD_SCALES = ("sum", "average")

N_PARAMS = 2


@dataclass(frozen=True)
class ModelSpec:
    """Hyperparameters: prior precisions a1, a2 and component precision b."""

    a1: float = 0.1
    a2: float = 0.1
    b: float = 10.0

    def __post_init__(self):
        for name in ("a1", "a2", "b"):
            object.__setattr__(self, name, check_positive(name, getattr(self, name)))


@dataclass(frozen=True)
class Dataset:
    """Observed scalars in a stable order.

    Minibatch indices refer to positions in ``x``; the order therefore must
    not change once the dataset is created.  Empty datasets are allowed so
    the grid oracle can evaluate the bare prior; runs require at least one
    datum (enforced by the batch policy).
    """

    x: Array

    def __post_init__(self):
        arr = as_float_array("data", self.x, ndim=1)
        arr.setflags(write=False)
        object.__setattr__(self, "x", arr)

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    def __len__(self) -> int:
        return self.n


def check_likelihood_scale(scale: str) -> str:
    if scale not in LIKELIHOOD_SCALES:
        raise ConfigurationError(
            f"likelihood scale must be one of {LIKELIHOOD_SCALES}, got {scale!r}"
        )
    return scale


def likelihood_weight(scale: str, n_data: int, n_batch: int) -> float:
    """Weight lambda applied to a summed batch of log-likelihood terms.

    ``sum``     targets log p(theta) + sum_k log P(x_k | theta); a batch of
                size d stands in for the full sum, so lambda = D / d.
    ``average`` targets log p(theta) + (1/D) sum_k log P(x_k | theta); a
                batch of size d estimates the average, so lambda = 1 / d.
    """
    check_likelihood_scale(scale)
    if n_batch == 0:
        return 0.0
    if scale == "sum":
        return n_data / n_batch
    return 1.0 / n_batch


def log_prior(theta, spec: ModelSpec):
    """log p(theta) with the exact Gaussian constant sqrt(a1 a2) / (2 pi)."""
    theta = np.asarray(theta, dtype=np.float64)
    t1 = theta[..., 0]
    t2 = theta[..., 1]
    const = 0.5 * np.log(spec.a1 * spec.a2) - np.log(2.0 * np.pi)
    return const - 0.5 * (spec.a1 * t1 * t1 + spec.a2 * t2 * t2)


def grad_log_prior(theta, spec: ModelSpec):
    """Gradient of log p(theta): (-a1 theta1, -a2 theta2)."""
    theta = np.asarray(theta, dtype=np.float64)
    out = np.empty_like(theta)
    np.multiply(theta[..., 0], -spec.a1, out=out[..., 0])
    np.multiply(theta[..., 1], -spec.a2, out=out[..., 1])
    return out


def _component_exponents(x, theta, spec: ModelSpec):
    """Residuals u, v and their scaled exponents -b u^2/2, -b v^2/2."""
    theta = np.asarray(theta, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    u = x - theta[..., 0]
    v = u - theta[..., 1]
    eu = -0.5 * spec.b * u * u
    ev = -0.5 * spec.b * v * v
    return u, v, eu, ev


def log_lik(x, theta, spec: ModelSpec):
    """log P(x | theta), stable for arbitrarily poor component fits."""
    _, _, eu, ev = _component_exponents(x, theta, spec)
    const = np.log(0.5) + 0.5 * (np.log(spec.b) - np.log(2.0 * np.pi))
    return const + np.logaddexp(eu, ev)


def grad_log_lik(x, theta, spec: ModelSpec):
    """Gradient of log P(x | theta) with respect to theta.

    With residuals u = x - theta1, v = x - theta1 - theta2 and component
    responsibilities w_u, w_v (softmax of the two exponents):

        d/dtheta1 = b (u w_u + v w_v)
        d/dtheta2 = b v w_v

    The max exponent is subtracted before exponentiation, so the weights
    stay finite even when both components miss the datum badly.
    """
    u, v, eu, ev = _component_exponents(x, theta, spec)
    m = np.maximum(eu, ev)
    wu = np.exp(eu - m)
    wv = np.exp(ev - m)
    s = wu + wv
    g1 = spec.b * (u * wu + v * wv) / s
    g2 = spec.b * v * wv / s
    out = np.empty(np.shape(g1) + (2,))
    out[..., 0] = g1
    out[..., 1] = g2
    return out


def log_unnorm_posterior(theta, data: Dataset, spec: ModelSpec, scale: str = "sum"):
    """log prior + lambda * sum_k log P(x_k | theta), up to the evidence constant.

    ``scale`` selects the full-data weight: 1 for ``sum`` (true posterior)
    or 1/D for ``average`` (per-datum tempering of the likelihood).  The
    accumulation loops over data points, so ``theta`` may be a whole grid.
    """
    theta = np.asarray(theta, dtype=np.float64)
    total = np.asarray(log_prior(theta, spec), dtype=np.float64)
    weight = likelihood_weight(scale, data.n, data.n)
    if data.n == 0:
        return total
    acc = np.zeros(np.broadcast_shapes(total.shape, theta[..., 0].shape))
    for xk in data.x:
        acc = acc + log_lik(xk, theta, spec)
    return total + weight * acc


def evidence(x, spec: ModelSpec):
    """Per-datum evidence Z(x) = integral of P(x | theta) p(theta) dtheta.

    Both mixture components are Gaussian in x after integrating theta out:

        Z(x) = 1/2 sqrt(alpha1 / 2 pi) exp(-alpha1 x^2 / 2)
             + 1/2 sqrt(alpha2 / 2 pi) exp(-alpha2 x^2 / 2)

        alpha1 = a1 b / (a1 + b)
        alpha2 = a1 a2 b / (a1 a2 + (a1 + a2) b)

    alpha1 is the precision of theta1 + noise, alpha2 that of
    theta1 + theta2 + noise.
    """
    x = np.asarray(x, dtype=np.float64)
    a1, a2, b = spec.a1, spec.a2, spec.b
    alpha1 = a1 * b / (a1 + b)
    alpha2 = a1 * a2 * b / (a1 * a2 + (a1 + a2) * b)
    z1 = np.sqrt(alpha1 / (2.0 * np.pi)) * np.exp(-0.5 * alpha1 * x * x)
    z2 = np.sqrt(alpha2 / (2.0 * np.pi)) * np.exp(-0.5 * alpha2 * x * x)
    return 0.5 * (z1 + z2)


GENERATION_MODES = ("mixture", "first-component")


def generate_data(
    true_theta,
    n: int,
    spec: ModelSpec,
    mode: str = "mixture",
    seed: int | None = None,
) -> Dataset:
    """Draw n observations at the given true locations.

    ``mixture`` draws each datum from a fair coin over the two components;
    ``first-component`` uses only N(theta1, 1/b).  The seed is mandatory so
    datasets are reproducible artifacts rather than throwaway randomness.
    """
    true_theta = as_param_vector("true_theta", true_theta, N_PARAMS)
    if mode not in GENERATION_MODES:
        raise ConfigurationError(
            f"generation mode must be one of {GENERATION_MODES}, got {mode!r}"
        )
    n = int(n)
    if n < 1:
        raise ConfigurationError(f"dataset size must be >= 1, got {n}")
    if seed is None:
        raise ConfigurationError("generate_data requires an explicit seed")
    rng = np.random.default_rng(int(seed))
    sigma = 1.0 / np.sqrt(spec.b)
    if mode == "first-component":
        x = rng.normal(true_theta[0], sigma, size=n)
    else:
        component = rng.integers(0, 2, size=n)
        means = true_theta[0] + component * true_theta[1]
        x = rng.normal(means, sigma)
    return Dataset(np.asarray(x, dtype=np.float64))
