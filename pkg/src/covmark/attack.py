"""Optimal linear removal attacks on an additively embedded watermark.

The attacker sees y = x + w and picks a linear map G (plus optional
independent noise v) minimizing the distortion of G y + v from the host x
while pinning the average watermark correlation to a target. The optimum
adds no noise and factors through the Wiener estimate of the watermark:
G = I - gamma * H.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CovarianceMatrix, SampleBatch, _frozen
from .errors import DegenerateWatermarkError, DimensionMismatchError
from .wiener import FilterMatrix, make_filter, wiener_filter

# tr(H C_w) below this fraction of total power means no correlation leverage.
DEGENERACY_RTOL = 1e-12

__all__ = [
    "AttackSolution",
    "watermark_wiener",
    "attack_matrix",
    "attack_distortion",
    "average_correlation",
    "solve_attack",
    "apply_attack",
]


@dataclass(frozen=True, eq=False)
class AttackSolution:
    """Closed-form optimal attack and its achieved metrics.

    ``matrix`` is G = I - gamma*H with H the watermark Wiener filter;
    ``lagrange`` is the attacker's multiplier, gamma = 1 + lagrange/2.
    ``distortion`` assumes the optimal zero added noise.
    """

    matrix: FilterMatrix
    gamma: float
    lagrange: float
    r_target: float
    distortion: float
    correlation_achieved: float


def watermark_wiener(
    c_host: CovarianceMatrix, c_watermark: CovarianceMatrix
) -> FilterMatrix:
    """Wiener filter H = C_w (C_x + C_w)^-1 estimating the watermark from y."""
    return wiener_filter(c_watermark, c_host)


def attack_matrix(h: FilterMatrix, gamma: float) -> FilterMatrix:
    """Attack map G = I - gamma * H; gamma = 0 is no attack, 1 pure removal."""
    return make_filter(np.eye(h.dim) - gamma * h.entries)


def attack_distortion(
    g: FilterMatrix,
    c_host: CovarianceMatrix,
    c_watermark: CovarianceMatrix,
    c_noise: CovarianceMatrix,
) -> float:
    """Average per-sample power of (G y + v) - x for y = x + w.

    (1/N) [tr(G C_x G^T) + tr(G C_w G^T) - tr(G C_x) - tr(G^T C_x)
           + tr(C_v) + tr(C_x)]
    """
    for other in (c_host, c_watermark, c_noise):
        if other.dim != g.dim:
            raise DimensionMismatchError(f"dimension mismatch: {g.dim} vs {other.dim}")
    ge = g.entries
    cx = c_host.entries
    cw = c_watermark.entries
    total = (
        np.trace(ge @ cx @ ge.T)
        + np.trace(ge @ cw @ ge.T)
        - np.trace(ge @ cx)
        - np.trace(ge.T @ cx)
        + np.trace(c_noise.entries)
        + np.trace(cx)
    )
    return float(total) / g.dim


def average_correlation(g: FilterMatrix, c_watermark: CovarianceMatrix) -> float:
    """Watermark-ensemble average of the linear correlation detector.

    r = (1/N) tr(G C_w); independent of any additive attack noise.
    """
    if g.dim != c_watermark.dim:
        raise DimensionMismatchError(f"dimension mismatch: {g.dim} vs {c_watermark.dim}")
    return float(np.trace(g.entries @ c_watermark.entries)) / g.dim


def solve_attack(
    c_host: CovarianceMatrix, c_watermark: CovarianceMatrix, r_target: float
) -> AttackSolution:
    """Minimum-distortion linear attack pinning the correlation to r_target.

    The correlation constraint is linear in gamma, so the multiplier is
    solved in closed form: gamma = (tr(C_w) - N*r_target) / tr(H C_w),
    with lagrange reported as 2*(gamma - 1). No additive noise is used
    (any tr(C_v) > 0 only raises distortion without moving r), and
    r_target is not range-limited: gamma < 0 or > 2 encodes watermark
    amplification or inversion, which are valid linear attacks.
    """
    h = watermark_wiener(c_host, c_watermark)
    cw = c_watermark.entries
    leverage = float(np.trace(h.entries @ cw))
    scale = float(np.trace(c_host.entries) + np.trace(cw))
    if leverage <= DEGENERACY_RTOL * scale:
        raise DegenerateWatermarkError(
            f"tr(H C_w) = {leverage:.3e} gives no correlation leverage"
        )
    n = c_host.dim
    gamma = (float(np.trace(cw)) - n * r_target) / leverage
    g = attack_matrix(h, gamma)
    zero_noise = CovarianceMatrix(dim=n, entries=_frozen(np.zeros((n, n))))
    return AttackSolution(
        matrix=g,
        gamma=gamma,
        lagrange=2.0 * (gamma - 1.0),
        r_target=r_target,
        distortion=attack_distortion(g, c_host, c_watermark, zero_noise),
        correlation_achieved=average_correlation(g, c_watermark),
    )


def apply_attack(g: FilterMatrix, batch: SampleBatch) -> SampleBatch:
    """Map every realization of a batch through the attack matrix."""
    if g.dim != batch.dim:
        raise DimensionMismatchError(f"dimension mismatch: {g.dim} vs {batch.dim}")
    return SampleBatch(
        dim=batch.dim,
        count=batch.count,
        data=_frozen(batch.data @ g.entries.T),
        seed=batch.seed,
        algorithm=batch.algorithm,
    )
