"""Figure rendering for simulation outputs.

Static matplotlib figures saved next to the CSV tables: pooled slope
estimates against the log hazard ratio per formula, and the per-subject
imputation audit.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .imputation import Indicator

_FORMULA_STYLE = {
    "correct": dict(color="black", marker="o"),
    "atem2017": dict(color="tab:red", marker="s"),
    "asg2019": dict(color="tab:blue", marker="^"),
    "amz2019": dict(color="tab:green", marker="d"),
}


def _panels_by_indicator(specs):
    indicators = sorted({s.indicator for s in specs}, key=lambda i: i.value)
    return indicators or [Indicator.INCLUSIVE]


def plot_pooled(results_by_lam, out_dir) -> str:
    """Mean pooled slope vs log hazard ratio, one panel per indicator mode.

    ``results_by_lam`` maps log_hr -> ScenarioResult.
    """
    lams = sorted(results_by_lam)
    specs = results_by_lam[lams[0]].config.specs
    indicators = _panels_by_indicator(specs)
    fig, axes = plt.subplots(1, len(indicators), figsize=(5.5 * len(indicators), 4.2),
                             sharey=True, squeeze=False)
    for ax, ind in zip(axes[0], indicators):
        for spec in specs:
            if spec.indicator is not ind:
                continue
            means = [results_by_lam[lam].summary()[spec]["mean_beta"] for lam in lams]
            ses = [results_by_lam[lam].summary()[spec]["mean_rubin_se"] for lam in lams]
            style = _FORMULA_STYLE.get(spec.formula.value, {})
            ax.errorbar(lams, means, yerr=ses, label=spec.formula.value,
                        capsize=3, **style)
        ax.axhline(results_by_lam[lams[0]].config.beta, ls=":", color="gray")
        ax.set_xlabel("log hazard ratio")
        ax.set_title(f"indicator: {ind.value}")
        ax.legend()
    axes[0][0].set_ylabel("mean pooled slope estimate")
    fig.tight_layout()
    path = os.path.join(out_dir, "pooled_estimates.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_audit(results_by_lam, out_dir) -> str:
    """Audited imputed values vs log hazard ratio, panels by (z, indicator)."""
    lams = sorted(results_by_lam)
    specs = results_by_lam[lams[0]].config.specs
    indicators = _panels_by_indicator(specs)
    z_values = sorted({row.z_value for lam in lams for row in results_by_lam[lam].audit})
    if not z_values:
        return ""
    fig, axes = plt.subplots(len(z_values), len(indicators),
                             figsize=(5.5 * len(indicators), 3.6 * len(z_values)),
                             squeeze=False)
    for r, z_val in enumerate(z_values):
        for cidx, ind in enumerate(indicators):
            ax = axes[r][cidx]
            for spec in specs:
                if spec.indicator is not ind:
                    continue
                pts = []
                for lam in lams:
                    vals = [row.imputed for row in results_by_lam[lam].audit
                            if row.spec == spec and row.z_value == z_val]
                    pts.append(vals[0] if vals else float("nan"))
                style = _FORMULA_STYLE.get(spec.formula.value, {})
                ax.plot(lams, pts, label=spec.formula.value, **style)
            ax.set_title(f"z = {z_val:g}, indicator: {ind.value}")
            ax.set_xlabel("log hazard ratio")
            ax.set_ylabel("imputed value")
            ax.legend(fontsize=8)
    fig.tight_layout()
    path = os.path.join(out_dir, "imputation_audit.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
