"""Stationary (Toeplitz) limiting case of the covariance design condition.

For wide-sense stationary models the covariances are symmetric Toeplitz
and their sorted eigenvalues approach samples of the power spectral
density on the grid f_i = i/N. On that limit the host-proportional
covariance condition turns into the classical power-spectrum condition
Phi_ww(f) = (sigma_w^2 / sigma_x^2) Phi_xx(f).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .core import CovarianceMatrix, Matrix, Vector, PSD_EIG_FLOOR
from .design import optimal_watermark_covariance
from .errors import (
    DimensionMismatchError,
    InvalidParamError,
    NotToeplitzError,
    SingularSumError,
)

# Entries along one diagonal may differ by this fraction of the largest entry.
TOEPLITZ_RTOL = 1e-12

__all__ = [
    "SpectralModel",
    "PsdConditionReport",
    "ar1_psd",
    "with_eigenvalues",
    "toeplitz_eigen_gap",
    "psd_condition_check",
]


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Analytic power spectrum of a stationary process on the grid i/N.

    ``eigenvalues`` holds the sorted spectrum of the matching Toeplitz
    covariance once attached; the complex-exponential eigenvectors of the
    asymptotic theory are represented only through this sorted-eigenvalue
    comparison, since real symmetric decompositions return real bases that
    differ by rotations inside near-degenerate eigenspaces.
    """

    size: int
    frequencies: Vector
    psd_values: Vector
    eigenvalues: Vector | None = None
    source: str = "host"

    def __post_init__(self) -> None:
        if self.frequencies.shape != (self.size,) or self.psd_values.shape != (self.size,):
            raise DimensionMismatchError("frequency grid and PSD must have length N")
        if np.any(self.psd_values < 0.0):
            raise InvalidParamError("PSD values must be nonnegative")
        if self.source not in ("host", "watermark"):
            raise InvalidParamError(f"source must be 'host' or 'watermark', got {self.source!r}")


@dataclass(frozen=True)
class PsdConditionReport:
    """Spectral form of the design condition for a stationary host.

    ``sigma_ratio`` is sigma_w^2 / sigma_x^2; ``max_psd_ratio_error`` is the
    worst deviation of the eigenvalue ratios from it, and is at round-off
    level at every N because scaling a matrix scales its spectrum exactly.
    """

    max_psd_ratio_error: float
    sigma_ratio: float


def ar1_psd(variance: float, rho: float, size: int, source: str = "host") -> SpectralModel:
    """AR(1) power spectrum sampled on f_i = i/N.

    Phi(f) = variance * (1 - rho^2) / (1 - 2 rho cos(2 pi f) + rho^2);
    constant for rho = 0. The grid mean approaches variance geometrically
    fast in N (the wrap-around tail is 2 rho^N / (1 - rho^N) relative).
    """
    if size < 1:
        raise InvalidParamError(f"size must be >= 1, got {size}")
    if variance <= 0.0:
        raise InvalidParamError(f"variance must be positive, got {variance}")
    if abs(rho) >= 1.0:
        raise InvalidParamError(f"|rho| must be < 1, got {rho}")
    freqs = np.arange(size, dtype=np.float64) / size
    psd = variance * (1.0 - rho**2) / (1.0 - 2.0 * rho * np.cos(2.0 * np.pi * freqs) + rho**2)
    freqs.setflags(write=False)
    psd.setflags(write=False)
    return SpectralModel(size=size, frequencies=freqs, psd_values=psd, source=source)


def _require_toeplitz(entries: Matrix) -> None:
    n = entries.shape[0]
    scale = float(np.max(np.abs(entries)))
    if scale == 0.0:
        return
    for off in range(1 - n, n):
        diag = np.diagonal(entries, off)
        spread = float(diag.max() - diag.min())
        if spread > TOEPLITZ_RTOL * scale:
            raise NotToeplitzError(
                f"diagonal {off} varies by {spread:.3e} (relative {spread / scale:.3e})"
            )


def with_eigenvalues(model: SpectralModel, cov: CovarianceMatrix) -> SpectralModel:
    """Copy of the model carrying the sorted spectrum of ``cov``."""
    if cov.dim != model.size:
        raise DimensionMismatchError(f"dimension mismatch: {cov.dim} vs {model.size}")
    eigs = np.sort(np.linalg.eigvalsh(cov.entries))
    eigs.setflags(write=False)
    return dataclasses.replace(model, eigenvalues=eigs)


def toeplitz_eigen_gap(cov: CovarianceMatrix, model: SpectralModel) -> float:
    """Worst sorted-eigenvalue vs sorted-PSD-sample deviation, relative to max PSD.

    Shrinks as N grows for a fixed process; exactly zero for a white
    covariance against its flat spectrum.
    """
    if cov.dim != model.size:
        raise DimensionMismatchError(f"dimension mismatch: {cov.dim} vs {model.size}")
    _require_toeplitz(cov.entries)
    peak = float(np.max(model.psd_values))
    if peak <= 0.0:
        raise InvalidParamError("PSD must have positive power")
    eigs = np.sort(np.linalg.eigvalsh(cov.entries))
    samples = np.sort(model.psd_values)
    return float(np.max(np.abs(eigs - samples))) / peak


def psd_condition_check(c_host: CovarianceMatrix, p_w: float) -> PsdConditionReport:
    """Verify the spectral design condition on a Toeplitz PD host.

    Builds the optimal watermark covariance, decomposes host and watermark
    independently, and compares sorted eigenvalue ratios against
    sigma_w^2 / sigma_x^2 = p_w / r(0).
    """
    _require_toeplitz(c_host.entries)
    host_eigs = np.sort(np.linalg.eigvalsh(c_host.entries))
    if float(host_eigs[0]) <= PSD_EIG_FLOOR * max(float(host_eigs[-1]), 0.0):
        raise SingularSumError(f"host must be positive definite (min eig {host_eigs[0]:.3e})")
    solution = optimal_watermark_covariance(c_host, p_w)
    wm_eigs = np.sort(np.linalg.eigvalsh(solution.c_w_opt.entries))
    sigma_ratio = p_w / float(c_host.entries[0, 0])
    return PsdConditionReport(
        max_psd_ratio_error=float(np.max(np.abs(wm_eigs / host_eigs - sigma_ratio))),
        sigma_ratio=sigma_ratio,
    )
