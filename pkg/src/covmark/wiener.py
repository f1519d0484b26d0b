"""Matrix Wiener (LMMSE) estimation of a signal in additive independent noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import CovarianceMatrix, Matrix, Vector, make_covariance
from .errors import DimensionMismatchError, InvalidParamError, SingularSumError

# C_s + C_n counts as invertible when min eig > dim * this * max eig.
SINGULARITY_RTOL = 1e-12

__all__ = [
    "FilterMatrix",
    "make_filter",
    "wiener_filter",
    "error_covariance",
    "estimate",
    "analytic_mse",
]


@dataclass(frozen=True, eq=False)
class FilterMatrix:
    """General square linear map (dimensionless gain)."""

    dim: int
    entries: Matrix

    def __post_init__(self) -> None:
        if self.entries.shape != (self.dim, self.dim):
            raise DimensionMismatchError(
                f"expected {self.dim}x{self.dim} entries, got shape {self.entries.shape}"
            )


def make_filter(entries) -> FilterMatrix:
    a = np.asarray(entries, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"filter entries must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidParamError("filter entries must be finite")
    frozen = np.array(a)
    frozen.setflags(write=False)
    return FilterMatrix(dim=a.shape[0], entries=frozen)


def _check_same_dim(a, b) -> int:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return a.dim


def wiener_filter(
    c_signal: CovarianceMatrix,
    c_noise: CovarianceMatrix,
    allow_singular: bool = False,
) -> FilterMatrix:
    """LMMSE estimator W = C_s (C_s + C_n)^-1 of the signal from signal+noise.

    Computed by a symmetric-definite linear solve of W (C_s + C_n) = C_s,
    never an explicit inverse. A numerically singular sum raises
    ``SingularSumError`` unless ``allow_singular`` enables the
    eigendecomposition pseudo-solve fallback.
    """
    n = _check_same_dim(c_signal, c_noise)
    total = c_signal.entries + c_noise.entries
    eigs = np.linalg.eigvalsh(total)
    cutoff = n * SINGULARITY_RTOL * max(float(eigs[-1]), 0.0)
    if float(eigs[0]) <= cutoff:
        if not allow_singular:
            raise SingularSumError(
                f"signal+noise covariance is singular (min eig {eigs[0]:.3e}, "
                f"cutoff {cutoff:.3e})"
            )
        w, v = np.linalg.eigh(total)
        inv = np.where(w > cutoff, 1.0 / np.where(w > cutoff, w, 1.0), 0.0)
        return make_filter(c_signal.entries @ (v * inv) @ v.T)
    # W (C_s+C_n) = C_s  <=>  (C_s+C_n) W^T = C_s by symmetry
    wt = scipy.linalg.solve(total, c_signal.entries, assume_a="pos")
    return make_filter(wt.T)


def error_covariance(filt: FilterMatrix, c_signal: CovarianceMatrix) -> CovarianceMatrix:
    """Estimation-error covariance C_e = (I - W) C_s, symmetrized."""
    n = _check_same_dim(filt, c_signal)
    return make_covariance((np.eye(n) - filt.entries) @ c_signal.entries)


def estimate(filt: FilterMatrix, observation) -> Vector:
    """Apply the filter: returns W @ observation."""
    obs = np.asarray(observation, dtype=np.float64)
    if obs.shape != (filt.dim,):
        raise DimensionMismatchError(
            f"observation shape {obs.shape} does not match filter dim {filt.dim}"
        )
    return filt.entries @ obs


def analytic_mse(
    filt: FilterMatrix, c_signal: CovarianceMatrix, c_noise: CovarianceMatrix
) -> float:
    """Mean squared estimation error of an arbitrary linear filter.

    (1/N) tr(W C_y W^T - W C_s - C_s W^T + C_s) with C_y = C_s + C_n;
    exact in the covariances, no sampling involved.
    """
    n = _check_same_dim(c_signal, c_noise)
    _check_same_dim(filt, c_signal)
    w = filt.entries
    cs = c_signal.entries
    cy = cs + c_noise.entries
    total = (
        np.trace(w @ cy @ w.T)
        - np.trace(w @ cs)
        - np.trace(cs @ w.T)
        + np.trace(cs)
    )
    return float(total) / n
