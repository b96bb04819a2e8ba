"""Local Riemannian geometry of a statistical manifold."""

import math
from typing import Optional

import numpy as np

from igeflow.core.config import settings
from igeflow.core.errors import IndefiniteMetricError, SingularMatrixError
from igeflow.models.base import StatisticalModel
from igeflow.models.metric import fd_steps, fisher_metric, metric_field
from igeflow.numerics.linalg import batch_sqrt_det, det_and_inverse


def _inverse_metric(model: StatisticalModel, theta: np.ndarray):
    metric = fisher_metric(model, theta)
    try:
        det, inverse = det_and_inverse(metric)
    except SingularMatrixError as exc:
        raise IndefiniteMetricError(
            f"{model.name} metric at {theta.tolist()} is not positive definite",
            pivot=exc.pivot,
        ) from exc
    return metric, det, inverse


def fisher_density(model: StatisticalModel, theta: np.ndarray) -> float:
    """rho = sqrt(det g) at theta."""
    theta = model.domain.require_interior(theta)
    _, det, _ = _inverse_metric(model, theta)
    return math.sqrt(det)


def fisher_density_field(model: StatisticalModel, thetas: np.ndarray) -> np.ndarray:
    """rho at a stack of points (m, n), for quadrature."""
    try:
        return batch_sqrt_det(metric_field(model, thetas))
    except SingularMatrixError as exc:
        raise IndefiniteMetricError(
            f"{model.name} metric is not positive definite: {exc.message}",
            **exc.details,
        ) from exc


def metric_derivatives(
    model: StatisticalModel, theta: np.ndarray, h: Optional[float] = None
) -> np.ndarray:
    """dg[l, i, j] = d g_ij / d theta^l, exact when the model registers it."""
    theta = model.domain.require_interior(theta)
    if model.metric_derivative is not None:
        dg = np.asarray(model.metric_derivative(theta), dtype=float)
    else:
        h = settings.GEOMETRY_FD_STEP if h is None else h
        steps = fd_steps(theta, h, model.domain)
        model.domain.require_margin(theta, steps, 2.0)
        n = model.dim
        dg = np.empty((n, n, n))
        for l in range(n):
            e = np.zeros(n)
            e[l] = steps[l]
            dg[l] = (fisher_metric(model, theta + e) - fisher_metric(model, theta - e)) / (
                2.0 * steps[l]
            )
    return 0.5 * (dg + np.swapaxes(dg, 1, 2))


def christoffel(
    model: StatisticalModel,
    theta: np.ndarray,
    h: Optional[float] = None,
    symmetrize: bool = True,
) -> np.ndarray:
    """
    Gamma[k, l, m] = 1/2 g^{kr} (d_l g_rm + d_m g_rl - d_r g_lm).
    """
    theta = model.domain.require_interior(theta)
    _, _, inverse = _inverse_metric(model, theta)
    dg = metric_derivatives(model, theta, h)
    # lowered[r, l, m] = d_l g_rm + d_m g_rl - d_r g_lm
    lowered = (
        np.einsum("lrm->rlm", dg) + np.einsum("mrl->rlm", dg) - dg
    )
    gamma = 0.5 * np.einsum("kr,rlm->klm", inverse, lowered)
    if symmetrize:
        gamma = 0.5 * (gamma + np.swapaxes(gamma, 1, 2))
    return gamma


def _christoffel_derivatives(
    model: StatisticalModel, theta: np.ndarray, h: float
) -> np.ndarray:
    """dgamma[p, k, l, m] = d Gamma^k_lm / d theta^p by central differences."""
    steps = fd_steps(theta, h, model.domain)
    model.domain.require_margin(theta, steps, 4.0)
    n = model.dim
    dgamma = np.empty((n, n, n, n))
    for p in range(n):
        e = np.zeros(n)
        e[p] = steps[p]
        dgamma[p] = (
            christoffel(model, theta + e, h) - christoffel(model, theta - e, h)
        ) / (2.0 * steps[p])
    return dgamma


def ricci_tensor(
    model: StatisticalModel, theta: np.ndarray, h: Optional[float] = None
) -> np.ndarray:
    """
    R_{sn} = d_r Gamma^r_{ns} - d_n Gamma^r_{rs}
             + Gamma^r_{rl} Gamma^l_{ns} - Gamma^r_{nl} Gamma^l_{rs}.

    With this sign convention spheres are positively curved.
    """
    h = settings.GEOMETRY_FD_STEP if h is None else h
    theta = model.domain.require_interior(theta)
    gamma = christoffel(model, theta, h)
    dgamma = _christoffel_derivatives(model, theta, h)
    return (
        np.einsum("rrns->sn", dgamma)
        - np.einsum("nrrs->sn", dgamma)
        + np.einsum("rrl,lns->sn", gamma, gamma)
        - np.einsum("rnl,lrs->sn", gamma, gamma)
    )


def scalar_curvature(
    model: StatisticalModel, theta: np.ndarray, h: Optional[float] = None
) -> float:
    """Ricci scalar g^{sn} R_{sn}; diagnostic only."""
    theta = model.domain.require_interior(theta)
    _, _, inverse = _inverse_metric(model, theta)
    ricci = ricci_tensor(model, theta, h)
    return float(np.einsum("sn,sn->", inverse, ricci))


def line_element(model: StatisticalModel, theta: np.ndarray, dtheta: np.ndarray) -> float:
    """ds^2 = g_{mu nu} dtheta^mu dtheta^nu."""
    dtheta = np.asarray(dtheta, dtype=float)
    return float(dtheta @ fisher_metric(model, theta) @ dtheta)


def metric_compatibility_residual(
    model: StatisticalModel, theta: np.ndarray, h: Optional[float] = None
) -> float:
    """max |d_l g_mk - Gamma^r_lm g_rk - Gamma^r_lk g_mr| (zero for Levi-Civita)."""
    theta = model.domain.require_interior(theta)
    metric = fisher_metric(model, theta)
    dg = metric_derivatives(model, theta, h)
    gamma = christoffel(model, theta, h)
    residual = (
        dg
        - np.einsum("rlm,rk->lmk", gamma, metric)
        - np.einsum("rlk,mr->lmk", gamma, metric)
    )
    return float(np.max(np.abs(residual)))
