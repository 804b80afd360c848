"""Best-linear-unbiased prediction: Simple, Ordinary and Universal Kriging.

All predictors are linear statistics T(Y) = lambda^T Y + lambda_0 chosen to
minimize the error variance V[T(Y) - Z(x*)] subject to unbiasedness:

* known mean (general BLUP / Simple Kriging): lambda_0 absorbs the mean and
  lambda = (Sigma + sigma^2 I)^-1 k*;
* unknown constant mean (Ordinary Kriging): lambda_0 = 0 and the constraint
  1^T lambda = 1 enters through a Lagrange multiplier, giving the classic
  Kriging system [[Sigma, 1], [1^T, 0]];
* linear basis mean (Universal Kriging): same construction with the
  constraint M^T lambda = f(x*) and p multipliers.

The multiplier stored on :class:`KrigingWeights` follows the closed-form
convention lambda = Sigma^-1 (k* + M mu_tilde); the raw block-system
solution carries the opposite sign and is negated on the way out.  The
classic compact variance expression uses the block-system sign and is
asserted against the expanded form on every Ordinary-Kriging call.

The classical definitions of OK/UK are noise-free; a dataset with
``noise_variance > 0`` is accepted for every variant by using
Sigma + sigma^2 I as the observation covariance (cross-covariances are
never inflated), which reduces to the noise-free equations at sigma^2 = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InputError, NumericalError
from .kernels import (
    BASIS,
    CONSTANT_UNKNOWN,
    Dataset,
    KernelSpec,
    MeanSpec,
    basis_at,
    basis_matrix,
    build_gram,
    cross_cov,
    eval_mean,
)
from .linalg import (
    SpdFactor,
    _factor_constraint_gram,
    _solve_saddle_factored,
    solve_spd,
    spd_factor,
)

_VARIANCE_TOL = 1e-9
_COMPACT_TOL = 1e-9


@dataclass(frozen=True)
class KrigingWeights:
    """The linear predictor: T(Y) = lam . Y + lam0.

    ``mu_tilde`` holds the absorbed Lagrange multipliers in the convention
    lam = Sigma^-1 (k* + M mu_tilde); it is empty for the known-mean
    variants, where the constraint is inactive.
    """

    lam: np.ndarray
    lam0: float
    mu_tilde: np.ndarray
    variant: str


@dataclass(frozen=True)
class Prediction:
    """Point prediction with its uncertainty decomposition.

    ``error_variance`` is V[T(Y) - Z(x*)]; ``estimator_variance`` is V[T(Y)].
    For Simple Kriging without noise these satisfy
    error_variance = V[Z(x*)] - estimator_variance.
    """

    mean: float
    error_variance: float
    estimator_variance: float
    weights: KrigingWeights
    jitter_warning: bool = False


def _clamped(value: float, scale: float) -> float:
    tol = _VARIANCE_TOL * max(1.0, abs(scale))
    if value < -tol:
        raise NumericalError(
            f"error variance {value:.6e} is negative beyond tolerance {tol:.1e}"
        )
    return max(value, 0.0)


def _factor_observation_cov(data: Dataset, kernel: KernelSpec,
                            max_jitter: float) -> SpdFactor:
    if kernel.dim != data.dim:
        raise InputError(
            f"kernel dimension {kernel.dim} does not match data dimension {data.dim}"
        )
    gram = build_gram(kernel, data.x, data.noise_variance)
    return spd_factor(gram, max_jitter)


def _mean_vector(mean: MeanSpec, x) -> np.ndarray:
    return np.array([eval_mean(mean, xi) for xi in x])


# ---------------------------------------------------------------------------
# Known-mean predictors
# ---------------------------------------------------------------------------


def _blup_point(data, kernel, mean, factor, xstar, variant) -> Prediction:
    kstar = cross_cov(kernel, data.x, xstar)
    s = solve_spd(factor, kstar)
    m_vec = _mean_vector(mean, data.x)
    m_star = eval_mean(mean, xstar)
    sigma_star2 = kernel.variance
    estimator_var = float(kstar @ s)
    error_var = _clamped(sigma_star2 - estimator_var, sigma_star2)
    weights = KrigingWeights(
        lam=s,
        lam0=float(m_star - s @ m_vec),
        mu_tilde=np.empty(0),
        variant=variant,
    )
    return Prediction(
        mean=float(m_star + s @ (data.y - m_vec)),
        error_variance=error_var,
        estimator_variance=estimator_var,
        weights=weights,
        jitter_warning=factor.jitter_used > 0.0,
    )


def blup_general(data: Dataset, kernel: KernelSpec, mean: MeanSpec, xstar,
                 max_jitter: float = 0.0) -> Prediction:
    """General noisy BLUP with a fully known mean function.

    T(Y) = m(x*) + k*^T (Sigma + sigma^2 I)^-1 (Y - m), with error variance
    sigma*^2 - k*^T (Sigma + sigma^2 I)^-1 k*.  The error variance depends
    only on covariances, never on the observed values.
    """
    if not mean.is_identified:
        raise InputError("blup_general requires a fully known mean")
    factor = _factor_observation_cov(data, kernel, max_jitter)
    return _blup_point(data, kernel, mean, factor, xstar, "blup")


def simple_krige(data: Dataset, kernel: KernelSpec, mean: MeanSpec, xstar,
                 max_jitter: float = 0.0) -> Prediction:
    """Simple Kriging: the known-mean BLUP (classically with sigma^2 = 0).

    Interpolates the data exactly when the dataset is noise-free.
    """
    if not mean.is_identified:
        raise InputError("simple_krige requires a fully known mean")
    factor = _factor_observation_cov(data, kernel, max_jitter)
    return _blup_point(data, kernel, mean, factor, xstar, "sk")


def sk_mean_subtraction(data: Dataset, kernel: KernelSpec, mean: MeanSpec, xstar,
                        max_jitter: float = 0.0) -> Prediction:
    """Simple Kriging via the subtract-the-mean-first route.

    Runs zero-mean SK on the residuals Y - m and adds m(x*) back; provably
    identical to :func:`simple_krige`, kept as an independent code path.
    """
    if not mean.is_identified:
        raise InputError("sk_mean_subtraction requires a fully known mean")
    factor = _factor_observation_cov(data, kernel, max_jitter)
    m_vec = _mean_vector(mean, data.x)
    m_star = eval_mean(mean, xstar)
    residual_data = Dataset(data.x, data.y - m_vec, data.noise_variance)
    zero_mean = MeanSpec.known_constant(0.0)
    base = _blup_point(residual_data, kernel, zero_mean, factor, xstar, "sk")
    lam = base.weights.lam
    weights = KrigingWeights(
        lam=lam,
        lam0=float(m_star - lam @ m_vec),
        mu_tilde=np.empty(0),
        variant="sk",
    )
    return Prediction(
        mean=float(m_star + base.mean),
        error_variance=base.error_variance,
        estimator_variance=base.estimator_variance,
        weights=weights,
        jitter_warning=base.jitter_warning,
    )


# ---------------------------------------------------------------------------
# Constrained (unknown-mean) predictors
# ---------------------------------------------------------------------------


def _constrained_point(data, kernel, mean, factor, xstar, variant,
                       check_compact=False) -> Prediction:
    m_mat = basis_matrix(mean, data.x)
    if m_mat.shape[1] > data.n:
        raise InputError(
            f"{m_mat.shape[1]} basis functions exceed {data.n} observations"
        )
    fstar = basis_at(mean, xstar)
    kstar = cross_cov(kernel, data.x, xstar)
    lam, mu_raw = _solve_saddle_factored(factor, m_mat, kstar, fstar)
    mu_tilde = -mu_raw

    s = solve_spd(factor, kstar)
    sigma_star2 = kernel.variance
    sk_part = sigma_star2 - float(kstar @ s)
    gamma = fstar - m_mat.T @ s
    inflation = float(gamma @ mu_tilde)  # gamma^T (M^T Sigma^-1 M)^-1 gamma
    raw_error_var = sk_part + inflation

    if check_compact:
        # Classic compact form, written with the block-system multiplier.
        compact = sigma_star2 - float(lam @ kstar) - float(mu_raw[0])
        if abs(raw_error_var - compact) > _COMPACT_TOL * max(1.0, abs(raw_error_var)):
            raise NumericalError(
                "expanded and compact OK variance forms disagree: "
                f"{raw_error_var:.17g} vs {compact:.17g}"
            )

    # Sigma lam = k* + M mu_tilde, so lam^T Sigma lam needs no extra solve.
    estimator_var = float(lam @ kstar) + float(fstar @ mu_tilde)
    weights = KrigingWeights(lam=lam, lam0=0.0, mu_tilde=mu_tilde, variant=variant)
    return Prediction(
        mean=float(lam @ data.y),
        error_variance=_clamped(raw_error_var, sigma_star2),
        estimator_variance=estimator_var,
        weights=weights,
        jitter_warning=factor.jitter_used > 0.0,
    )


def ordinary_krige(data: Dataset, kernel: KernelSpec, xstar,
                   max_jitter: float = 0.0) -> Prediction:
    """Ordinary Kriging: unknown constant mean, weights summing to one.

    Solves the Kriging system through the saddle-point machinery and checks
    the expanded variance

        sigma*^2 - k*^T Sigma^-1 k* + (1 - 1^T Sigma^-1 k*)^2 / (1^T Sigma^-1 1)

    against the compact form sigma*^2 - lam^T k* - mu on every call.
    """
    factor = _factor_observation_cov(data, kernel, max_jitter)
    return _constrained_point(
        data, kernel, MeanSpec.constant_unknown(), factor, xstar,
        variant="ok", check_compact=True,
    )


def ordinary_krige_direct(data: Dataset, kernel: KernelSpec, xstar,
                          max_jitter: float = 0.0) -> Prediction:
    """Ordinary Kriging without the block machinery.

    Isolates lambda in the first block row, contracts with 1^T, and solves
    the resulting scalar equation for the multiplier.  Must agree with
    :func:`ordinary_krige` to full working precision.
    """
    factor = _factor_observation_cov(data, kernel, max_jitter)
    kstar = cross_cov(kernel, data.x, xstar)
    ones = np.ones(data.n)
    s = solve_spd(factor, kstar)
    w = solve_spd(factor, ones)
    denom = float(ones @ w)
    mu_contracted = (float(ones @ s) - 1.0) / denom
    lam = s - mu_contracted * w
    mu_tilde = -mu_contracted

    sigma_star2 = kernel.variance
    sk_part = sigma_star2 - float(kstar @ s)
    inflation = (1.0 - float(ones @ s)) ** 2 / denom
    estimator_var = float(lam @ kstar) + mu_tilde
    weights = KrigingWeights(
        lam=lam, lam0=0.0, mu_tilde=np.array([mu_tilde]), variant="ok",
    )
    return Prediction(
        mean=float(lam @ data.y),
        error_variance=_clamped(sk_part + inflation, sigma_star2),
        estimator_variance=estimator_var,
        weights=weights,
        jitter_warning=factor.jitter_used > 0.0,
    )


def universal_krige(data: Dataset, kernel: KernelSpec, mean: MeanSpec, xstar,
                    max_jitter: float = 0.0) -> Prediction:
    """Universal Kriging: basis mean, constraint M^T lambda = f(x*).

    Error variance is the SK variance plus the nonnegative inflation
    gamma^T (M^T Sigma^-1 M)^-1 gamma with gamma = f(x*) - M^T Sigma^-1 k*.
    With the single basis function f == 1 this reduces to Ordinary Kriging.
    """
    if mean.kind not in (BASIS, CONSTANT_UNKNOWN):
        raise InputError("universal_krige requires a basis or constant-unknown mean")
    if mean.p > data.n:
        raise InputError(f"{mean.p} basis functions exceed {data.n} observations")
    factor = _factor_observation_cov(data, kernel, max_jitter)
    return _constrained_point(data, kernel, mean, factor, xstar, variant="uk")


# ---------------------------------------------------------------------------
# Generalized least squares and the plug-in route
# ---------------------------------------------------------------------------


def gls_constant(data: Dataset, kernel: KernelSpec, max_jitter: float = 0.0) -> float:
    """GLS estimate of an unknown constant mean: (1^T S^-1 Y) / (1^T S^-1 1)."""
    factor = _factor_observation_cov(data, kernel, max_jitter)
    w = solve_spd(factor, np.ones(data.n))
    return float(w @ data.y) / float(np.sum(w))


def _gls_pieces(data, kernel, mean, factor):
    """Shared GLS computation: returns (M, W=S^-1 M, G-factor, beta-hat)."""
    m_mat = basis_matrix(mean, data.x)
    if m_mat.shape[1] > data.n:
        raise InputError(
            f"{m_mat.shape[1]} basis functions exceed {data.n} observations"
        )
    w = solve_spd(factor, m_mat)
    gram_factor = _factor_constraint_gram(m_mat.T @ w)
    beta = solve_spd(gram_factor, w.T @ data.y)
    return m_mat, w, gram_factor, beta


def gls_beta(data: Dataset, kernel: KernelSpec, mean: MeanSpec,
             max_jitter: float = 0.0) -> np.ndarray:
    """GLS coefficients beta-hat = (M^T S^-1 M)^-1 M^T S^-1 Y."""
    if mean.kind not in (BASIS, CONSTANT_UNKNOWN):
        raise InputError("gls_beta requires a basis or constant-unknown mean")
    factor = _factor_observation_cov(data, kernel, max_jitter)
    _, _, _, beta = _gls_pieces(data, kernel, mean, factor)
    return beta


def sk_with_plugin_mean(data: Dataset, kernel: KernelSpec, mean: MeanSpec, xstar,
                        max_jitter: float = 0.0) -> Prediction:
    """Two-step route: estimate the mean by GLS, then Simple-Krige around it.

    T(Y) = f(x*)^T beta-hat + k*^T S^-1 (Y - M beta-hat).  Provably equal to
    Ordinary Kriging (constant mean) or Universal Kriging (basis mean); the
    reported error variance is the one of that equivalent estimator, since
    the plug-in predictor is not conditioning on a truly known mean.
    """
    if mean.kind not in (BASIS, CONSTANT_UNKNOWN):
        raise InputError("sk_with_plugin_mean requires a basis or constant-unknown mean")
    factor = _factor_observation_cov(data, kernel, max_jitter)
    m_mat, w, gram_factor, beta = _gls_pieces(data, kernel, mean, factor)
    fstar = basis_at(mean, xstar)
    kstar = cross_cov(kernel, data.x, xstar)
    s = solve_spd(factor, kstar)

    mean_value = float(fstar @ beta) + float(s @ (data.y - m_mat @ beta))

    sigma_star2 = kernel.variance
    gamma = fstar - m_mat.T @ s
    h = solve_spd(gram_factor, gamma)
    sk_part = sigma_star2 - float(kstar @ s)
    lam = s + w @ h
    estimator_var = float(lam @ kstar) + float(fstar @ h)
    variant = "ok" if mean.kind == CONSTANT_UNKNOWN else "uk"
    weights = KrigingWeights(lam=lam, lam0=0.0, mu_tilde=h, variant=variant)
    return Prediction(
        mean=mean_value,
        error_variance=_clamped(sk_part + float(gamma @ h), sigma_star2),
        estimator_variance=estimator_var,
        weights=weights,
        jitter_warning=factor.jitter_used > 0.0,
    )


def ls_predict(data: Dataset, mean: MeanSpec, xstar) -> float:
    """Ordinary least squares trend prediction, ignoring all correlation.

    beta-LS = (M^T M)^-1 M^T Y; returns f(x*)^T beta-LS.
    """
    if mean.kind not in (BASIS, CONSTANT_UNKNOWN):
        raise InputError("ls_predict requires a basis or constant-unknown mean")
    m_mat = basis_matrix(mean, data.x)
    if m_mat.shape[1] > data.n:
        raise InputError(f"{m_mat.shape[1]} basis functions exceed {data.n} observations")
    gram_factor = _factor_constraint_gram(m_mat.T @ m_mat)
    beta = solve_spd(gram_factor, m_mat.T @ data.y)
    return float(basis_at(mean, xstar) @ beta)


# ---------------------------------------------------------------------------
# Batch prediction
# ---------------------------------------------------------------------------

VARIANTS = ("sk", "blup", "ok", "uk")


def predict_points(data: Dataset, kernel: KernelSpec, xs, variant: str = "ok",
                   mean: MeanSpec | None = None,
                   max_jitter: float = 0.0) -> list[Prediction]:
    """Predict at many points, factoring the observation covariance once.

    ``mean`` is required for "sk"/"blup" (a known mean) and "uk" (a basis);
    it is ignored for "ok".
    """
    if variant not in VARIANTS:
        raise InputError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None] if data.dim == 1 else xs[None, :]
    if xs.ndim != 2 or xs.shape[1] != data.dim:
        raise InputError(f"prediction points must be (m, {data.dim}), got {xs.shape}")
    if variant in ("sk", "blup"):
        if mean is None or not mean.is_identified:
            raise InputError(f"variant {variant!r} requires a fully known mean")
    elif variant == "uk":
        if mean is None or mean.kind not in (BASIS, CONSTANT_UNKNOWN):
            raise InputError("variant 'uk' requires a basis mean")
        if mean.p > data.n:
            raise InputError(f"{mean.p} basis functions exceed {data.n} observations")

    factor = _factor_observation_cov(data, kernel, max_jitter)
    out = []
    for point in xs:
        if variant in ("sk", "blup"):
            out.append(_blup_point(data, kernel, mean, factor, point, variant))
        elif variant == "ok":
            out.append(_constrained_point(
                data, kernel, MeanSpec.constant_unknown(), factor, point,
                variant="ok", check_compact=True,
            ))
        else:
            out.append(_constrained_point(data, kernel, mean, factor, point,
                                          variant="uk"))
    return out
