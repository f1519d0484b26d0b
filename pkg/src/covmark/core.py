"""Covariance primitives: validated PSD matrices, Toeplitz construction,
seeded Gaussian ensembles, and empirical second moments.

All values are immutable after construction and safe to share across
threads; every operation here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .errors import (
    DimensionMismatchError,
    FactorizationError,
    InvalidParamError,
    NotPSDError,
    NotSymmetricError,
    TooFewSamplesError,
)

Matrix = NDArray[np.float64]
Vector = NDArray[np.float64]

# Eigenvalues may undershoot zero by this fraction of the largest eigenvalue
# and still count as PSD.
PSD_EIG_FLOOR = 1e-10
# Relative asymmetry beyond this is a real error, not file round-off.
ASYMMETRY_RTOL = 1e-8
# One-shot diagonal jitter, relative to the mean diagonal, applied if
# factorization of a nominally valid covariance fails.
JITTER_EPS = 1e-12
# Counter-based generator family behind every ensemble.
RNG_ALGORITHM = "philox4x64"

_UINT64_MASK = 0xFFFFFFFFFFFFFFFF

__all__ = [
    "CovarianceMatrix",
    "SampleBatch",
    "make_covariance",
    "toeplitz_from_autocorr",
    "ar1_autocorr",
    "modulate",
    "sample_ensemble",
    "empirical_covariance",
    "average_power",
    "save_covariance_csv",
    "load_covariance_csv",
    "substream",
    "RNG_ALGORITHM",
    "PSD_EIG_FLOOR",
]


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent random stream keyed by (seed, index).

    Distinct indices give statistically independent streams of the same
    counter-based generator, so indexed trials may run in any order or in
    parallel without changing their draws.
    """
    key = np.array([seed & _UINT64_MASK, index & _UINT64_MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _frozen(a: np.ndarray) -> Matrix:
    out = np.array(a, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Symmetric positive-semidefinite second-moment matrix (power units).

    Construct through :func:`make_covariance` or one of the builders below;
    they enforce symmetry and the eigenvalue floor.
    """

    dim: int
    entries: Matrix

    def __post_init__(self) -> None:
        if self.entries.shape != (self.dim, self.dim):
            raise DimensionMismatchError(
                f"expected {self.dim}x{self.dim} entries, got shape {self.entries.shape}"
            )


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Zero-mean random-vector realizations, one per row.

    The same (seed, parameters) reproduces the data bit for bit;
    ``algorithm`` records the generator family that guarantee rests on.
    """

    dim: int
    count: int
    data: Matrix
    seed: int
    algorithm: str = RNG_ALGORITHM

    def __post_init__(self) -> None:
        if self.data.shape != (self.count, self.dim):
            raise DimensionMismatchError(
                f"expected {self.count}x{self.dim} data, got shape {self.data.shape}"
            )


def make_covariance(entries) -> CovarianceMatrix:
    """Validate a square array as a covariance matrix.

    The input is symmetrized as (A + A^T)/2 before validation, which
    absorbs text round-trip noise; asymmetry beyond ``ASYMMETRY_RTOL``
    (relative to the largest entry) raises ``NotSymmetricError``, and an
    eigenvalue below ``-PSD_EIG_FLOOR * max_eigenvalue`` raises
    ``NotPSDError``.
    """
    a = np.asarray(entries, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"covariance entries must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidParamError("covariance entries must be finite")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if scale > 0.0:
        asym = float(np.max(np.abs(a - a.T)))
        if asym > ASYMMETRY_RTOL * scale:
            raise NotSymmetricError(
                f"relative asymmetry {asym / scale:.3e} exceeds {ASYMMETRY_RTOL:.0e}"
            )
    sym = (a + a.T) / 2.0
    eigs = np.linalg.eigvalsh(sym)
    lam_max = max(float(eigs[-1]), 0.0)
    if float(eigs[0]) < -PSD_EIG_FLOOR * lam_max:
        raise NotPSDError(
            f"eigenvalue {eigs[0]:.6e} below floor {-PSD_EIG_FLOOR * lam_max:.6e}"
        )
    return CovarianceMatrix(dim=a.shape[0], entries=_frozen(sym))


def toeplitz_from_autocorr(r) -> CovarianceMatrix:
    """Covariance of a stationary model: entry (i, j) = r[|i - j|].

    ``r`` must be a nonnegative-definite autocorrelation sequence with
    r[0] > 0; otherwise PSD validation fails.
    """
    seq = np.asarray(r, dtype=np.float64)
    if seq.ndim != 1 or seq.size == 0:
        raise InvalidParamError("autocorrelation must be a nonempty 1-d sequence")
    if seq[0] <= 0.0:
        raise InvalidParamError(f"lag-0 autocorrelation must be positive, got {seq[0]}")
    return make_covariance(scipy.linalg.toeplitz(seq))


def ar1_autocorr(variance: float, rho: float, n: int) -> Vector:
    """Autocorrelation r[k] = variance * rho**k for k = 0..n-1."""
    if n < 1:
        raise InvalidParamError(f"length must be >= 1, got {n}")
    if variance <= 0.0:
        raise InvalidParamError(f"variance must be positive, got {variance}")
    if abs(rho) >= 1.0:
        raise InvalidParamError(f"|rho| must be < 1, got {rho}")
    return variance * rho ** np.arange(n, dtype=np.float64)


def modulate(cov: CovarianceMatrix, envelope) -> CovarianceMatrix:
    """Rescale a covariance by a positive per-coordinate envelope.

    Entry (i, j) becomes envelope[i] * envelope[j] * C(i, j), i.e. the
    congruence D C D with D = diag(envelope). This keeps the matrix PSD
    while breaking stationarity for any non-constant envelope.
    """
    env = np.asarray(envelope, dtype=np.float64)
    if env.ndim != 1 or env.size != cov.dim:
        raise DimensionMismatchError(
            f"envelope length {env.shape} does not match dimension {cov.dim}"
        )
    if np.any(env <= 0.0) or not np.all(np.isfinite(env)):
        raise InvalidParamError("envelope entries must be positive and finite")
    return make_covariance(cov.entries * np.outer(env, env))


def _psd_factor(cov: CovarianceMatrix) -> Matrix:
    """Square-root factor B with B B^T = C, valid for singular C.

    Eigenvalues below the PSD floor are clamped to zero so that rank
    deficient covariances (including the all-zero matrix) stay samplable.
    """

    def factor(entries: Matrix) -> Matrix:
        eigs, vecs = np.linalg.eigh(entries)
        return vecs * np.sqrt(np.clip(eigs, 0.0, None))

    try:
        return factor(cov.entries)
    except np.linalg.LinAlgError:
        jitter = JITTER_EPS * np.trace(cov.entries) / cov.dim
        try:
            return factor(cov.entries + jitter * np.eye(cov.dim))
        except np.linalg.LinAlgError as exc:
            raise FactorizationError(
                f"eigendecomposition failed even with jitter {jitter:.3e}"
            ) from exc


def sample_ensemble(
    cov: CovarianceMatrix, count: int, seed: int, stream: int = 0
) -> SampleBatch:
    """Draw ``count`` i.i.d. zero-mean Gaussian rows with covariance ``cov``.

    Deterministic per (seed, stream): callers that need several independent
    ensembles under one seed pass distinct stream indices.
    """
    if count < 1:
        raise InvalidParamError(f"sample count must be >= 1, got {count}")
    b = _psd_factor(cov)
    z = substream(seed, stream).standard_normal((count, cov.dim))
    return SampleBatch(dim=cov.dim, count=count, data=_frozen(z @ b.T), seed=seed)


def empirical_covariance(batch: SampleBatch) -> Matrix:
    """Second-moment estimate (1/M) sum of row row^T (mean is known zero)."""
    if batch.count < 2:
        raise TooFewSamplesError(f"need at least 2 samples, got {batch.count}")
    return batch.data.T @ batch.data / batch.count


def average_power(cov: CovarianceMatrix) -> float:
    """Per-coordinate signal power tr(C)/N."""
    return float(np.trace(cov.entries)) / cov.dim


def save_covariance_csv(cov: CovarianceMatrix, path) -> None:
    """Write N rows of N comma-separated decimals (full float64 precision)."""
    np.savetxt(path, cov.entries, delimiter=",", fmt="%.17g")


def load_covariance_csv(path) -> CovarianceMatrix:
    """Read a covariance written by :func:`save_covariance_csv`.

    Ingest re-symmetrizes, so files edited or produced with fewer digits
    still load as long as the asymmetry stays below ``ASYMMETRY_RTOL``.
    """
    a = np.loadtxt(path, delimiter=",", ndmin=2)
    return make_covariance(a)
