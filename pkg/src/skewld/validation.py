"""Shared input checks and error types.

Error types map onto the CLI exit codes: ConfigurationError -> 2,
DivergenceError -> 3, OSError -> 4.
"""

from __future__ import annotations

import numpy as np


class ConfigurationError(ValueError):
    """Invalid configuration, argument, or input file."""


class DiagnosticError(ConfigurationError):
    """A diagnostic cannot be computed meaningfully (e.g. grid misses the mass)."""


class DivergenceError(RuntimeError):
    """Non-finite state during sampling.

    Carries the step index at which the update left the finite range, the
    last finite state, and the partial trace recorded up to that point
    (None when raised below the run layer).
    """

    def __init__(self, step: int | None = None, last_state=None, trace=None):
        where = "update" if step is None else f"step {step}"
        super().__init__(f"non-finite state after {where}")
        self.step = step
        self.last_state = last_state
        self.trace = trace


def check_positive(name: str, value, allow_zero: bool = False) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise ConfigurationError(f"{name} must be finite, got {value!r}")
    if allow_zero:
        if value < 0:
            raise ConfigurationError(f"{name} must be >= 0, got {value!r}")
    elif value <= 0:
        raise ConfigurationError(f"{name} must be > 0, got {value!r}")
    return value


def as_float_array(name: str, values, ndim: int | None = None) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise ConfigurationError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} must be finite")
    return arr


def as_param_vector(name: str, theta, n: int | None = None) -> np.ndarray:
    theta = as_float_array(name, theta, ndim=1)
    if n is not None and theta.shape[0] != n:
        raise ConfigurationError(f"{name} must have {n} components, got {theta.shape[0]}")
    return theta


def check_antisymmetric(matrix) -> np.ndarray:
    """Validate S^T == -S exactly as stored and return S as float64."""
    s = np.asarray(matrix, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ConfigurationError(f"skew matrix must be square, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ConfigurationError("skew matrix must be finite")
    if not np.array_equal(s.T, -s):
        raise ConfigurationError("skew matrix must satisfy S^T == -S exactly")
    return s
