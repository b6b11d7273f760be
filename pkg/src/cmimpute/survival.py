"""Survival-distribution estimation for the censored covariate.

Kaplan-Meier for the no-covariate case, Cox proportional hazards with a
Breslow baseline when fully observed covariates are available. All fitted
objects are immutable and reusable across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, InvalidInputError, SingularInformationError
from .records import as_arrays

DEFAULT_TOLERANCE = 1e-8
DEFAULT_MAX_ITER = 50


@dataclass(frozen=True)
class SurvivalCurve:
    """Right-continuous survival step function on an ordered time grid.

    Evaluation before the first grid time returns 1; beyond the last grid
    time the final value is carried forward (no tail extrapolation).
    """

    times: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if times.shape != probs.shape or times.ndim != 1:
            raise InvalidInputError("times and probs must be 1-d arrays of equal length")
        if len(times) and (np.any(np.diff(times) <= 0) or times[0] < 0):
            raise InvalidInputError("times must be strictly increasing and nonnegative")
        if np.any(probs < 0) or np.any(probs > 1) or np.any(np.diff(probs) > 1e-12):
            raise InvalidInputError("probs must be nonincreasing within [0, 1]")
        times.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "probs", probs)

    def at(self, t) -> np.ndarray | float:
        """Step evaluation: value of the largest grid time <= t, else 1."""
        t_arr = np.asarray(t, dtype=float)
        if len(self.times) == 0:
            out = np.ones_like(t_arr)
        else:
            idx = np.searchsorted(self.times, t_arr, side="right") - 1
            out = np.where(idx < 0, 1.0, self.probs[np.maximum(idx, 0)])
        return float(out) if np.isscalar(t) or np.ndim(t) == 0 else out


@dataclass(frozen=True)
class CoxFit:
    """Cox proportional hazards fit: log hazard ratios plus Breslow baseline."""

    log_hazard_ratios: np.ndarray
    baseline: SurvivalCurve
    converged: bool
    iterations: int
    log_partial_likelihood: float

    def __post_init__(self):
        lam = np.asarray(self.log_hazard_ratios, dtype=float)
        lam.setflags(write=False)
        object.__setattr__(self, "log_hazard_ratios", lam)


def survival_at(curve: SurvivalCurve, t, hr=1.0):
    """Covariate-conditional survival: baseline value raised to the hazard ratio."""
    hr = np.asarray(hr, dtype=float)
    if np.any(hr <= 0):
        raise InvalidInputError("hazard ratio must be positive")
    return curve.at(t) ** hr


def kaplan_meier(records) -> SurvivalCurve:
    """Product-limit survival estimate over the distinct event times."""
    t, delta, _, _ = as_arrays(records)
    return _km_arrays(t, delta)


def _km_arrays(t, delta) -> SurvivalCurve:
    order = np.argsort(t, kind="stable")
    ts, ds = t[order], delta[order]
    event_times = np.unique(ts[ds == 1])
    if event_times.size == 0:
        return SurvivalCurve(np.empty(0), np.empty(0))
    # at-risk and death counts at each distinct event time
    n = len(ts)
    at_risk = n - np.searchsorted(ts, event_times, side="left")
    deaths = np.bincount(
        np.searchsorted(event_times, ts[ds == 1]), minlength=len(event_times)
    )
    surv = np.cumprod(1.0 - deaths / at_risk)
    return SurvivalCurve(event_times, surv)


def _risk_sums(ts, values):
    """Suffix sums of `values` over subjects sorted by ascending time ts."""
    return np.cumsum(values[::-1], axis=0)[::-1]


def _partial_loglik_parts(ts, ds, zs, beta):
    """Log partial likelihood, gradient, and Hessian at beta (Breslow ties).

    Inputs must be sorted by ascending time.
    """
    eta = zs @ beta
    shift = np.max(eta) if len(eta) else 0.0
    e = np.exp(eta - shift)
    E = _risk_sums(ts, e)
    ZE = _risk_sums(ts, zs * e[:, None])
    ZZE = _risk_sums(ts, np.einsum("ij,ik,i->ijk", zs, zs, e))

    ev = ds == 1
    # risk set for a (possibly tied) event time starts at the first index with that time
    g = np.searchsorted(ts, ts[ev], side="left")
    Eg = E[g]
    loglik = float(np.sum(eta[ev]) - np.sum(np.log(Eg) + shift))
    mean_z = ZE[g] / Eg[:, None]
    grad = np.sum(zs[ev] - mean_z, axis=0)
    hess = -(
        np.sum(ZZE[g] / Eg[:, None, None], axis=0)
        - mean_z.T @ mean_z
    )
    return loglik, grad, hess


def cox_partial_loglik(records, log_hazard_ratios) -> float:
    """Breslow-tie log partial likelihood at the given coefficients."""
    t, delta, z, _ = as_arrays(records)
    beta = np.atleast_1d(np.asarray(log_hazard_ratios, dtype=float))
    order = np.argsort(t, kind="stable")
    ll, _, _ = _partial_loglik_parts(t[order], delta[order], z[order], beta)
    return ll


def fit_cox(records, tolerance: float = DEFAULT_TOLERANCE,
            max_iter: int = DEFAULT_MAX_ITER) -> CoxFit:
    """Newton-Raphson maximization of the Cox partial likelihood.

    Uses step-halving when a full Newton step fails to improve the
    objective. The baseline survival curve is the Breslow estimate at the
    fitted coefficients.
    """
    t, delta, z, _ = as_arrays(records)
    beta, ll, converged, iters = _cox_newton(t, delta, z, tolerance, max_iter)
    baseline = _breslow_arrays(t, delta, z, beta)
    return CoxFit(
        log_hazard_ratios=beta,
        baseline=baseline,
        converged=converged,
        iterations=iters,
        log_partial_likelihood=ll,
    )


def _cox_newton(t, delta, z, tolerance, max_iter):
    n, p = z.shape
    if p < 1:
        raise InvalidInputError("fit_cox requires at least one covariate column")
    if not np.any(delta == 1):
        raise DegenerateDataError("no observed events; Cox fit is undefined")
    if np.any(np.ptp(z, axis=0) == 0):
        raise SingularInformationError("constant covariate column; effect not identifiable")

    order = np.argsort(t, kind="stable")
    ts, ds, zs = t[order], delta[order], z[order]

    beta = np.zeros(p)
    ll, grad, hess = _partial_loglik_parts(ts, ds, zs, beta)
    converged = False
    iters = 0
    for iters in range(1, max_iter + 1):
        if np.linalg.norm(grad) <= tolerance:
            converged = True
            break
        try:
            step = np.linalg.solve(-hess, grad)
        except np.linalg.LinAlgError:
            raise SingularInformationError("singular information matrix in Newton step")
        # step-halving: shrink until the objective is finite and non-decreasing
        scale = 1.0
        for _ in range(30):
            cand = beta + scale * step
            ll_new, grad_new, hess_new = _partial_loglik_parts(ts, ds, zs, cand)
            if np.isfinite(ll_new) and ll_new >= ll - 1e-12:
                break
            scale /= 2.0
        else:
            break
        beta, ll, grad, hess = cand, ll_new, grad_new, hess_new
    else:
        iters = max_iter
    if not converged and np.linalg.norm(grad) <= tolerance:
        converged = True
    return beta, ll, converged, iters


def breslow_baseline(records, log_hazard_ratios) -> SurvivalCurve:
    """Baseline survival exp(-H0) with H0 the Breslow cumulative hazard."""
    t, delta, z, _ = as_arrays(records)
    beta = np.atleast_1d(np.asarray(log_hazard_ratios, dtype=float))
    return _breslow_arrays(t, delta, z, beta)


def _breslow_arrays(t, delta, z, beta) -> SurvivalCurve:
    order = np.argsort(t, kind="stable")
    ts, ds, zs = t[order], delta[order], z[order]
    eta = zs @ beta if zs.shape[1] else np.zeros(len(ts))
    e = np.exp(eta)
    E = _risk_sums(ts, e)

    event_times = np.unique(ts[ds == 1])
    if event_times.size == 0:
        return SurvivalCurve(np.empty(0), np.empty(0))
    g = np.searchsorted(ts, event_times, side="left")
    deaths = np.bincount(
        np.searchsorted(event_times, ts[ds == 1]), minlength=len(event_times)
    )
    increments = deaths / E[g]
    cumhaz = np.cumsum(increments)
    return SurvivalCurve(event_times, np.exp(-cumhaz))
