"""Conditional-mean multiple imputation for right-censored covariates."""

__version__ = "0.1.0"

from .errors import (
    CmimputeError,
    ConfigError,
    DegenerateDataError,
    InvalidInputError,
    SingularInformationError,
)
from .imputation import (
    Formula,
    ImputationSpec,
    ImputedDataset,
    Indicator,
    conditional_mean,
    impute_dataset,
    indicator_gap,
)
from .inference import OlsFit, PooledEstimate, bootstrap_mi, ols_fit, rubin_pool
from .records import SubjectRecord, from_arrays
from .simulate import (
    ScenarioConfig,
    ScenarioResult,
    censoring_rate,
    generate_sample,
    run_scenario,
)
from .survival import (
    CoxFit,
    SurvivalCurve,
    breslow_baseline,
    cox_partial_loglik,
    fit_cox,
    kaplan_meier,
    survival_at,
)

__all__ = [
    "CmimputeError", "ConfigError", "DegenerateDataError", "InvalidInputError",
    "SingularInformationError",
    "SubjectRecord", "from_arrays",
    "SurvivalCurve", "CoxFit", "kaplan_meier", "fit_cox", "breslow_baseline",
    "survival_at", "cox_partial_loglik",
    "Formula", "Indicator", "ImputationSpec", "ImputedDataset",
    "conditional_mean", "impute_dataset", "indicator_gap",
    "OlsFit", "PooledEstimate", "ols_fit", "rubin_pool", "bootstrap_mi",
    "ScenarioConfig", "ScenarioResult", "generate_sample", "run_scenario",
    "censoring_rate",
]
