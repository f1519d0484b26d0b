"""Watermark covariance design against the optimal removal attack.

The designer maximizes the residual watermark energy

    E = (1/N) [tr(C_w) - tr(C_w (C_x + C_w)^-1 C_w)]

over PSD C_w under the power budget tr(C_w)/N = p_w. The maximizer is the
host-proportional covariance C_w = (p_w / p_x) C_x; this module provides
the closed form together with three independent ways to interrogate it:
a stationarity residual, a finite-difference tangent check, and a random
search oracle over the constraint set. The Hilbert-space view (watermark
projected onto the span of y under the inner product E(u^T v)) is exposed
through :func:`geometry_report`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CovarianceMatrix, Matrix, average_power, make_covariance, substream
from .errors import InvalidParamError, SingularSumError
from .attack import watermark_wiener

# Same invertibility rule as the Wiener solve: min eig > dim * this * max eig.
SINGULARITY_RTOL = 1e-12

__all__ = [
    "DesignSolution",
    "GeometryReport",
    "estimated_watermark_covariance",
    "residual_energy",
    "optimal_watermark_covariance",
    "stationarity_residual",
    "tangent_gradient_check",
    "brute_force_best_covariance",
    "geometry_report",
]


@dataclass(frozen=True, eq=False)
class DesignSolution:
    """Optimal watermark covariance and the scalars describing it.

    ``c`` is the proportionality constant p_w / p_x; ``lagrange`` is the
    designer's multiplier -1/(1+c)^2; ``alpha`` = c/(1+c) is the alignment
    coefficient of the attacked-geometry picture (the Wiener estimate of
    the optimal watermark is alpha * y).
    """

    c_w_opt: CovarianceMatrix
    c: float
    p_w: float
    p_x: float
    lagrange: float
    residual_energy: float
    alpha: float


@dataclass(frozen=True)
class GeometryReport:
    """Squared lengths in the random-vector Hilbert space <u, v> = E(u^T v).

    ``norm_u_sq`` is the projection of w on the single vector y,
    ``norm_what_sq`` the projection on the full subspace {G y}; the
    Pythagorean gap | ||w||^2 - ||w_hat||^2 - ||w - w_hat||^2 | is zero up
    to round-off.
    """

    norm_w_sq: float
    norm_u_sq: float
    norm_what_sq: float
    pythagoras_gap: float


def _checked_sum(c_host: CovarianceMatrix, c_w: CovarianceMatrix) -> Matrix:
    if c_host.dim != c_w.dim:
        raise InvalidParamError(f"dimension mismatch: {c_host.dim} vs {c_w.dim}")
    total = c_host.entries + c_w.entries
    eigs = np.linalg.eigvalsh(total)
    if float(eigs[0]) <= c_host.dim * SINGULARITY_RTOL * max(float(eigs[-1]), 0.0):
        raise SingularSumError(
            f"host+watermark covariance is singular (min eig {eigs[0]:.3e})"
        )
    return total


def _residual_energy_raw(cx: Matrix, cw: Matrix, n: int) -> float:
    """Fast path on raw arrays; caller guarantees cx + cw invertible."""
    try:
        x = np.linalg.solve(cx + cw, cw)
    except np.linalg.LinAlgError as exc:
        raise SingularSumError("host+watermark covariance is singular") from exc
    return (float(np.trace(cw)) - float(np.trace(cw @ x))) / n


def estimated_watermark_covariance(
    c_host: CovarianceMatrix, c_w: CovarianceMatrix
) -> CovarianceMatrix:
    """Covariance H C_x H^T + H C_w H^T of the Wiener-estimated watermark."""
    _checked_sum(c_host, c_w)
    h = watermark_wiener(c_host, c_w).entries
    return make_covariance(h @ c_host.entries @ h.T + h @ c_w.entries @ h.T)


def residual_energy(c_host: CovarianceMatrix, c_w: CovarianceMatrix) -> float:
    """Average watermark power surviving the pure removal attack.

    E = (1/N) [tr(C_w) - tr(C_w (C_x + C_w)^-1 C_w)], which lies in
    [0, average_power(C_w)].
    """
    total = _checked_sum(c_host, c_w)
    cw = c_w.entries
    x = np.linalg.solve(total, cw)
    return (float(np.trace(cw)) - float(np.trace(cw @ x))) / c_host.dim


def optimal_watermark_covariance(
    c_host: CovarianceMatrix, p_w: float
) -> DesignSolution:
    """Residual-energy-maximizing covariance under the power budget p_w.

    C_w = (p_w / p_x) C_x, with residual energy p_w p_x / (p_x + p_w)
    regardless of the host's internal structure.
    """
    if p_w <= 0.0:
        raise InvalidParamError(f"watermark power must be positive, got {p_w}")
    p_x = average_power(c_host)
    if p_x <= 0.0:
        raise InvalidParamError(f"host power must be positive, got {p_x}")
    c = p_w / p_x
    c_w_opt = make_covariance(c * c_host.entries)
    return DesignSolution(
        c_w_opt=c_w_opt,
        c=c,
        p_w=p_w,
        p_x=p_x,
        lagrange=-1.0 / (1.0 + c) ** 2,
        residual_energy=residual_energy(c_host, c_w_opt),
        alpha=c / (1.0 + c),
    )


def stationarity_residual(
    c_host: CovarianceMatrix, c_w: CovarianceMatrix, lagrange: float
) -> float:
    """Scale-free violation of the first-order optimality condition.

    Returns ||(1 + lambda) I + S^-1 C_w^2 S^-1 - C_w S^-1 - S^-1 C_w||_F / N
    with S = C_x + C_w; zero exactly at host-proportional C_w with the
    matching multiplier lambda = -1/(1+c)^2.
    """
    total = _checked_sum(c_host, c_w)
    n = c_host.dim
    x = np.linalg.solve(total, c_w.entries)  # S^-1 C_w; C_w S^-1 = x.T
    lhs = (1.0 + lagrange) * np.eye(n) + x @ x.T - x.T - x
    return float(np.linalg.norm(lhs, "fro")) / n


def tangent_gradient_check(
    c_host: CovarianceMatrix,
    p_w: float,
    n_directions: int = 50,
    step: float = 1e-5,
    at: CovarianceMatrix | None = None,
    seed: int = 0,
) -> float:
    """Largest central-difference derivative of E along the constraint set.

    Probes ``n_directions`` random unit-norm symmetric trace-free
    directions (trace-free keeps the power budget to first order) at the
    closed-form optimum, or at ``at`` when given. At a true constrained
    stationary point the result vanishes as step -> 0; the step must stay
    small against the smallest eigenvalue of the probed covariance so the
    perturbed matrices remain inside the PSD cone.
    """
    if step <= 0.0:
        raise InvalidParamError(f"step must be positive, got {step}")
    if n_directions < 1:
        raise InvalidParamError(f"need at least one direction, got {n_directions}")
    cw = (at if at is not None else optimal_watermark_covariance(c_host, p_w).c_w_opt)
    if cw.dim != c_host.dim:
        raise InvalidParamError(f"dimension mismatch: {c_host.dim} vs {cw.dim}")
    n = c_host.dim
    cx = c_host.entries
    base = cw.entries
    gen = substream(seed)
    worst = 0.0
    for _ in range(n_directions):
        d = gen.standard_normal((n, n))
        d = (d + d.T) / 2.0
        d -= np.trace(d) / n * np.eye(n)
        norm = float(np.linalg.norm(d, "fro"))
        if norm == 0.0:  # n = 1: the constraint set is a single point
            continue
        d /= norm
        plus = _residual_energy_raw(cx, base + step * d, n)
        minus = _residual_energy_raw(cx, base - step * d, n)
        worst = max(worst, abs(plus - minus) / (2.0 * step))
    return worst


def brute_force_best_covariance(
    c_host: CovarianceMatrix, p_w: float, trials: int, seed: int
) -> tuple[CovarianceMatrix, float]:
    """Random search over trace-constrained PSD candidates; returns the best.

    Candidate mix cycles through full Wishart draws, rank-deficient
    Wishart draws, positive diagonals, and host-aligned matrices blended
    with a Wishart perturbation; Wishart draws alone concentrate away from
    the boundary, and the mix probes rank-deficient and aligned regions.
    Every candidate is rescaled to trace N * p_w exactly. Trials use
    per-index substreams and ties keep the lowest trial index, so the
    result is independent of evaluation order.
    """
    if trials < 1:
        raise InvalidParamError(f"need at least one trial, got {trials}")
    if p_w <= 0.0:
        raise InvalidParamError(f"watermark power must be positive, got {p_w}")
    n = c_host.dim
    cx = c_host.entries
    target_trace = n * p_w
    aligned = (p_w / average_power(c_host)) * cx
    best: Matrix | None = None
    best_energy = -np.inf
    for t in range(trials):
        gen = substream(seed, t)
        kind = t % 4
        if kind == 0:
            a = gen.standard_normal((n, n))
            cand = a @ a.T
        elif kind == 1:
            width = 1 + int(gen.integers(0, max(n - 1, 1)))
            a = gen.standard_normal((n, width))
            cand = a @ a.T
        elif kind == 2:
            cand = np.diag(gen.uniform(0.0, 1.0, n))
        else:
            beta = float(gen.uniform(0.0, 0.5))
            a = gen.standard_normal((n, n))
            wish = a @ a.T
            wish_trace = float(np.trace(wish))
            if wish_trace <= 0.0:
                cand = aligned.copy()
            else:
                cand = (1.0 - beta) * aligned + beta * (target_trace / wish_trace) * wish
        trace = float(np.trace(cand))
        if trace <= 0.0:
            continue
        cand *= target_trace / trace
        energy = _residual_energy_raw(cx, cand, n)
        if energy > best_energy:
            best_energy = energy
            best = cand
    assert best is not None
    return make_covariance(best), best_energy


def geometry_report(c_host: CovarianceMatrix, c_w: CovarianceMatrix) -> GeometryReport:
    """Closed-form lengths of the watermark, its projections, and the gap.

    ||w||^2 = tr(C_w); the projection on the single vector y has
    ||u||^2 = tr(C_w)^2 / tr(C_x + C_w); the projection on the subspace
    {G y} is the Wiener estimate with ||w_hat||^2 = tr(C_what) and
    ||w - w_hat||^2 = tr(C_w) - tr(H C_w). ||u||^2 <= ||w_hat||^2 always,
    with equality exactly when C_w is proportional to C_x.
    """
    _checked_sum(c_host, c_w)
    sum_trace = float(np.trace(c_host.entries) + np.trace(c_w.entries))
    if sum_trace <= 0.0:
        raise InvalidParamError("total power must be positive")
    h = watermark_wiener(c_host, c_w).entries
    cw = c_w.entries
    norm_w_sq = float(np.trace(cw))
    norm_what_sq = float(np.trace(h @ c_host.entries @ h.T + h @ cw @ h.T))
    residual_sq = norm_w_sq - float(np.trace(h @ cw))
    return GeometryReport(
        norm_w_sq=norm_w_sq,
        norm_u_sq=norm_w_sq**2 / sum_trace,
        norm_what_sq=norm_what_sq,
        pythagoras_gap=abs(norm_w_sq - norm_what_sq - residual_sq),
    )
