"""Gaussian-process predictive distributions.

Under a Gaussian random field the joint law of the observations and the
field values at new locations is multivariate normal, and prediction is
conditioning: the posterior over Z(X*) given Y is again Gaussian.  Its mean
reproduces Simple Kriging when the mean function is known; with a linear
basis mean and a noninformative coefficient prior it reproduces
Ordinary/Universal Kriging, with the posterior variance matching the
corresponding Kriging error variance.

The predictive distribution targets the latent field Z(X*); pass
``observe_noise=True`` to add the observation noise to the diagonal for
observation-space prediction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InputError, NumericalError, SingularityError
from .kernels import (
    BASIS,
    CONSTANT_UNKNOWN,
    Dataset,
    KernelSpec,
    MeanSpec,
    basis_matrix,
    build_gram,
    kernel_matrix,
)
from .kriging import _factor_observation_cov, _gls_pieces, _mean_vector
from .linalg import solve_spd, spd_factor

_DIAG_TOL = 1e-9


@dataclass(frozen=True)
class GaussianPredictive:
    """Gaussian posterior over the field at the prediction points.

    ``covariance`` is the full joint posterior covariance; ``variance`` is
    its diagonal with tiny negative round-off clamped to zero.
    """

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (mean.shape[0], mean.shape[0]):
            raise InputError(
                f"covariance shape {cov.shape} does not match {mean.shape[0]} means"
            )
        cov = 0.5 * (cov + cov.T)
        scale = max(1.0, float(np.abs(np.diag(cov)).max(initial=0.0)))
        if np.diag(cov).min(initial=0.0) < -_DIAG_TOL * scale:
            raise NumericalError("posterior variance is negative beyond tolerance")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def variance(self) -> np.ndarray:
        return np.maximum(np.diag(self.covariance), 0.0)


def _as_test_points(xs, dim):
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None] if dim == 1 else xs[None, :]
    if xs.ndim != 2 or xs.shape[1] != dim:
        raise InputError(f"test points must be (m, {dim}), got shape {xs.shape}")
    return xs


def joint_prior(data: Dataset, kernel: KernelSpec, mean: MeanSpec, xs):
    """Joint prior over (Y, Z(X*)): mean vector and (n+m) x (n+m) covariance.

    Observation noise enters the training block only.
    """
    if not mean.is_identified:
        raise InputError("joint_prior requires a fully known mean")
    xs = _as_test_points(xs, data.dim)
    if kernel.dim != data.dim:
        raise InputError(
            f"kernel dimension {kernel.dim} does not match data dimension {data.dim}"
        )
    mean_vec = np.concatenate([_mean_vector(mean, data.x), _mean_vector(mean, xs)])
    train = build_gram(kernel, data.x, data.noise_variance)
    cross = kernel_matrix(kernel, data.x, xs)
    test = build_gram(kernel, xs, 0.0)
    cov = np.block([[train, cross], [cross.T, test]])
    return mean_vec, cov


def gpr_predict(data: Dataset, kernel: KernelSpec, mean: MeanSpec, xs,
                observe_noise: bool = False,
                max_jitter: float = 0.0) -> GaussianPredictive:
    """Known-mean GP posterior.

    mean:  m(X*) + K*^T (K + sigma^2 I)^-1 (y - m(X))
    cov:   K** - K*^T (K + sigma^2 I)^-1 K*

    For a single test point this is numerically the Simple-Kriging
    predictor and error variance.
    """
    if not mean.is_identified:
        raise InputError("gpr_predict requires a fully known mean")
    xs = _as_test_points(xs, data.dim)
    factor = _factor_observation_cov(data, kernel, max_jitter)
    cross = kernel_matrix(kernel, data.x, xs)
    a = solve_spd(factor, cross)
    post_mean = _mean_vector(mean, xs) + a.T @ (data.y - _mean_vector(mean, data.x))
    post_cov = build_gram(kernel, xs, 0.0) - cross.T @ a
    if observe_noise:
        post_cov = post_cov + data.noise_variance * np.eye(xs.shape[0])
    return GaussianPredictive(mean=post_mean, covariance=post_cov)


def gpr_predict_basis(data: Dataset, kernel: KernelSpec, mean: MeanSpec, xs,
                      observe_noise: bool = False,
                      max_jitter: float = 0.0) -> GaussianPredictive:
    """GP posterior with a linear basis mean.

    With a Gaussian prior beta ~ N(b, B) on the coefficients this is the
    conditional of the joint Gaussian with prior moments E[Y] = M b and
    V[Y] = M B M^T + K + sigma^2 I, computed in the numerically stable
    parameterization through B^-1 + M^T S^-1 M (exact for every B; a direct
    factorization of M B M^T + S would lose the small-scale structure for
    diffuse priors).  Without a prior (``prior_cov`` unset) the
    noninformative limit B^-1 -> 0 is computed in closed form through the
    GLS coefficient estimate:

        mean:  f(X*)^T beta-GLS + K*^T S^-1 (y - M beta-GLS)
        cov:   K** - K*^T S^-1 K* + Gamma^T (M^T S^-1 M)^-1 Gamma

    with Gamma = f(X*) - M^T S^-1 K*.  The noninformative posterior never
    touches the prior mean.
    """
    if mean.kind not in (BASIS, CONSTANT_UNKNOWN):
        raise InputError("gpr_predict_basis requires a basis or constant-unknown mean")
    xs = _as_test_points(xs, data.dim)
    if mean.kind == BASIS and mean.prior_cov is not None:
        return _finite_prior_posterior(data, kernel, mean, xs, observe_noise,
                                       max_jitter)
    factor = _factor_observation_cov(data, kernel, max_jitter)
    m_mat, w, gram_factor, beta = _gls_pieces(data, kernel, mean, factor)
    m_star = basis_matrix(mean, xs)
    cross = kernel_matrix(kernel, data.x, xs)
    a = solve_spd(factor, cross)
    gamma = m_star.T - w.T @ cross
    post_mean = m_star @ beta + a.T @ (data.y - m_mat @ beta)
    post_cov = (build_gram(kernel, xs, 0.0) - cross.T @ a
                + gamma.T @ solve_spd(gram_factor, gamma))
    if observe_noise:
        post_cov = post_cov + data.noise_variance * np.eye(xs.shape[0])
    return GaussianPredictive(mean=post_mean, covariance=post_cov)


def _finite_prior_posterior(data, kernel, mean, xs, observe_noise, max_jitter):
    p = mean.p
    b = mean.prior_mean if mean.prior_mean is not None else np.zeros(p)
    try:
        prior_factor = spd_factor(mean.prior_cov)
    except SingularityError as err:
        raise InputError("prior covariance must be positive definite") from err
    prior_precision = solve_spd(prior_factor, np.eye(p))

    factor = _factor_observation_cov(data, kernel, max_jitter)
    m_mat = basis_matrix(mean, data.x)
    m_star = basis_matrix(mean, xs)
    w = solve_spd(factor, m_mat)
    penalized = prior_precision + m_mat.T @ w
    penalized = 0.5 * (penalized + penalized.T)
    pen_factor = spd_factor(penalized)
    # posterior coefficient mean: shrinks the GLS estimate toward b
    beta_bar = solve_spd(pen_factor, w.T @ data.y + prior_precision @ b)

    cross = kernel_matrix(kernel, data.x, xs)
    a = solve_spd(factor, cross)
    gamma = m_star.T - w.T @ cross
    post_mean = m_star @ beta_bar + a.T @ (data.y - m_mat @ beta_bar)
    post_cov = (build_gram(kernel, xs, 0.0) - cross.T @ a
                + gamma.T @ solve_spd(pen_factor, gamma))
    if observe_noise:
        post_cov = post_cov + data.noise_variance * np.eye(xs.shape[0])
    return GaussianPredictive(mean=post_mean, covariance=post_cov)


def map_predict(predictive: GaussianPredictive) -> np.ndarray:
    """Maximum-a-posteriori point prediction: the mean of a Gaussian."""
    return np.array(predictive.mean, copy=True)
