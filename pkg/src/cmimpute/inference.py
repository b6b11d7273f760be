"""Bootstrap multiple imputation and Rubin-rule pooling.

Pipeline per iteration: resample the data with replacement, refit the
survival model on the resample, impute its censored covariates, and fit
ordinary least squares. The per-iteration coefficient estimates and
classical variances are pooled across iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, InvalidInputError, SingularInformationError
from .imputation import ImputationSpec, _impute_censored
from .records import as_arrays
from .survival import _breslow_arrays, _cox_newton, _km_arrays

MAX_RESAMPLE_RETRIES = 10


@dataclass(frozen=True)
class OlsFit:
    """Ordinary least squares fit with classical variance estimates."""

    coefficients: np.ndarray
    coefficient_variances: np.ndarray
    residual_variance: float
    n_used: int


@dataclass(frozen=True)
class PooledEstimate:
    """Rubin-pooled point estimate and standard error across B imputations."""

    estimate: float
    std_error: float
    B: int
    within_var: float
    between_var: float


def ols_fit(records, x_imputed=None) -> OlsFit:
    """Least squares of y on [1, x, z] with classical coefficient variances.

    ``x_imputed`` overrides the observed times as the covariate column;
    when omitted the records' own t values are used (complete data).
    """
    t, _, z, y = as_arrays(records)
    if y is None:
        raise InvalidInputError("all records need an outcome y for regression")
    x = t if x_imputed is None else np.asarray(x_imputed, dtype=float)
    return _ols_arrays(x, z, y)


def _ols_arrays(x, z, y) -> OlsFit:
    n = len(y)
    design = np.column_stack([np.ones(n), x, z])
    k = design.shape[1]
    if n <= k:
        raise InvalidInputError(f"need more than {k} observations, got {n}")
    xtx = design.T @ design
    try:
        xtx_inv = np.linalg.inv(xtx)
    except np.linalg.LinAlgError:
        raise SingularInformationError("design matrix is rank deficient")
    if not np.isfinite(np.linalg.cond(xtx)) or np.linalg.cond(xtx) > 1e12:
        raise SingularInformationError("design matrix is rank deficient")
    coefs = xtx_inv @ (design.T @ y)
    resid = y - design @ coefs
    sigma2 = float(resid @ resid) / (n - k)
    return OlsFit(
        coefficients=coefs,
        coefficient_variances=sigma2 * np.diag(xtx_inv),
        residual_variance=sigma2,
        n_used=n,
    )


def rubin_pool(estimates, variances) -> PooledEstimate:
    """Pool B per-imputation estimates and variances into one estimate and SE.

    SE^2 = mean(variances) + {(B+1)/(B(B-1))} * sum((estimate_b - mean)^2).
    """
    estimates = np.asarray(estimates, dtype=float)
    variances = np.asarray(variances, dtype=float)
    if estimates.shape != variances.shape or estimates.ndim != 1:
        raise InvalidInputError("estimates and variances must be 1-d of equal length")
    B = len(estimates)
    if B < 2:
        raise InvalidInputError("pooling requires B >= 2 imputations")
    if np.any(variances < 0):
        raise InvalidInputError("variances must be nonnegative")
    mean = float(np.mean(estimates))
    within = float(np.mean(variances))
    between = ((B + 1) / (B * (B - 1))) * float(np.sum((estimates - mean) ** 2))
    return PooledEstimate(
        estimate=mean,
        std_error=float(np.sqrt(within + between)),
        B=B,
        within_var=within,
        between_var=between,
    )


def coefficient_names(p: int) -> list[str]:
    return ["intercept", "x"] + [f"z{j + 1}" for j in range(p)]


def _fit_survival_arrays(t, delta, z, tolerance=1e-8, max_iter=50):
    """Survival fit on arrays: Cox when covariates exist, else Kaplan-Meier.

    Returns (baseline_curve, eta) with eta the per-subject linear predictor.
    """
    n, p = z.shape
    if p == 0:
        return _km_arrays(t, delta), np.zeros(n)
    beta, _, _, _ = _cox_newton(t, delta, z, tolerance, max_iter)
    baseline = _breslow_arrays(t, delta, z, beta)
    return baseline, z @ beta


def mi_replicates(t, delta, z, y, B, specs, rng, reuse_survival_fit=False):
    """Run B bootstrap-impute-OLS iterations sharing resamples across specs.

    Returns {spec: (estimates, variances)} with arrays of shape (B, k) where
    k = 2 + p coefficients. Resamples whose survival fit is degenerate are
    redrawn from the same stream, up to a bounded retry count.
    """
    n, p = z.shape
    k = p + 2
    estimates = {spec: np.empty((B, k)) for spec in specs}
    variances = {spec: np.empty((B, k)) for spec in specs}
    fit0 = _fit_survival_arrays(t, delta, z) if reuse_survival_fit else None

    for b in range(B):
        for _attempt in range(MAX_RESAMPLE_RETRIES):
            idx = rng.integers(0, n, size=n)
            tb, db, zb, yb = t[idx], delta[idx], z[idx], y[idx]
            try:
                if reuse_survival_fit:
                    baseline_b, eta_b = fit0[0], fit0[1][idx]
                else:
                    baseline_b, eta_b = _fit_survival_arrays(tb, db, zb)
                break
            except (DegenerateDataError, SingularInformationError):
                continue
        else:
            raise DegenerateDataError(
                f"bootstrap iteration {b}: no valid resample in "
                f"{MAX_RESAMPLE_RETRIES} attempts"
            )
        cens = np.flatnonzero(db == 0)
        for spec in specs:
            xb = tb.astype(float).copy()
            if cens.size:
                values, _ = _impute_censored(tb, db, eta_b, baseline_b, spec)
                xb[cens] = values
            fit = _ols_arrays(xb, zb, yb)
            estimates[spec][b] = fit.coefficients
            variances[spec][b] = fit.coefficient_variances
    return {spec: (estimates[spec], variances[spec]) for spec in specs}


def bootstrap_mi(records, B: int, spec: ImputationSpec, seed,
                 reuse_survival_fit: bool = False) -> dict[str, PooledEstimate]:
    """Bootstrap multiple imputation: pooled estimate per regression coefficient.

    Deterministic given the seed; the survival model is refit on each
    resample unless ``reuse_survival_fit`` is set.
    """
    if B < 2:
        raise InvalidInputError("B must be >= 2")
    t, delta, z, y = as_arrays(records)
    if y is None:
        raise InvalidInputError("all records need an outcome y for bootstrap_mi")
    rng = np.random.default_rng(seed)
    (est, var), = mi_replicates(
        t, delta, z, y, B, [spec], rng, reuse_survival_fit
    ).values()
    names = coefficient_names(z.shape[1])
    return {
        name: rubin_pool(est[:, j], var[:, j]) for j, name in enumerate(names)
    }
