"""Tests for OLS, Rubin pooling, and the bootstrap MI pipeline."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from cmimpute import (
    ImputationSpec,
    InvalidInputError,
    SingularInformationError,
    bootstrap_mi,
    from_arrays,
    ols_fit,
    rubin_pool,
)
from cmimpute.inference import _ols_arrays


class TestOls:
    def test_exact_linear_data(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(0, 2, 50)
        z = rng.integers(0, 2, 50).astype(float)
        y = 1.0 + x + 0.25 * z
        fit = ols_fit(from_arrays(x, np.ones(50), z.reshape(-1, 1), y))
        assert_allclose(fit.coefficients, [1.0, 1.0, 0.25], atol=1e-12)
        assert fit.residual_variance < 1e-24

    def test_perfect_line_no_z(self):
        recs = from_arrays([0, 1, 2, 3], [1, 1, 1, 1], None, [0, 1, 2, 3])
        fit = ols_fit(recs)
        assert_allclose(fit.coefficients, [0.0, 1.0], atol=1e-12)

    def test_normal_equations_oracle(self):
        rng = np.random.default_rng(7)
        n = 200
        x = rng.normal(size=n)
        z = rng.normal(size=(n, 2))
        y = 0.3 - 0.8 * x + z @ [1.5, -0.4] + rng.normal(size=n)
        fit = _ols_arrays(x, z, y)
        design = np.column_stack([np.ones(n), x, z])
        oracle = np.linalg.lstsq(design, y, rcond=None)[0]
        assert_allclose(fit.coefficients, oracle, rtol=1e-10)
        resid = y - design @ oracle
        sigma2 = resid @ resid / (n - 4)
        oracle_var = sigma2 * np.diag(np.linalg.inv(design.T @ design))
        assert_allclose(fit.coefficient_variances, oracle_var, rtol=1e-10)

    def test_rank_deficiency_rejected(self):
        x = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        z = x.reshape(-1, 1).copy()  # z duplicates x
        with pytest.raises(SingularInformationError):
            _ols_arrays(x, z, np.ones(5))

    def test_missing_outcome_rejected(self):
        recs = from_arrays([1, 2, 3, 4], [1, 1, 1, 1])
        with pytest.raises(InvalidInputError):
            ols_fit(recs)


class TestRubinPool:
    def test_identical_estimates(self):
        pooled = rubin_pool([1.3] * 6, [0.49] * 6)
        assert pooled.estimate == 1.3
        assert_allclose(pooled.std_error, 0.7, rtol=1e-14)
        assert pooled.between_var == 0.0

    def test_hand_computed_case(self):
        pooled = rubin_pool([0.0, 2.0], [1.0, 1.0])
        assert pooled.estimate == 1.0
        # within 1, between (3/2)*2 = 3, SE = sqrt(4) = 2
        assert_allclose(pooled.std_error, 2.0, rtol=1e-14)

    def test_variance_scaling_is_linear_in_within_term(self):
        base = rubin_pool([0.5, 0.7, 0.6], [1.0, 2.0, 3.0])
        scaled = rubin_pool([0.5, 0.7, 0.6], [4.0, 8.0, 12.0])
        assert_allclose(scaled.within_var, 4.0 * base.within_var, rtol=1e-14)

    def test_length_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            rubin_pool([1.0, 2.0], [1.0])

    def test_b_below_two_rejected(self):
        with pytest.raises(InvalidInputError):
            rubin_pool([1.0], [1.0])

    def test_se_at_least_sqrt_within(self):
        pooled = rubin_pool([0.1, 0.9, 0.4], [0.2, 0.3, 0.25])
        assert pooled.std_error >= np.sqrt(pooled.within_var)

    @given(
        st.lists(st.floats(-5, 5), min_size=3, max_size=8),
        st.floats(0.01, 2.0),
        st.floats(0.0, 3.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_monotone_in_variances_and_spread(self, estimates, var, bump):
        variances = [var] * len(estimates)
        base = rubin_pool(estimates, variances)
        more_var = rubin_pool(estimates, [v + bump for v in variances])
        assert more_var.std_error >= base.std_error - 1e-12
        spread = [e + (i - len(estimates) / 2) * bump for i, e in enumerate(estimates)]
        wider = rubin_pool(spread, variances)
        if np.var(spread) >= np.var(estimates):
            assert wider.std_error >= base.std_error - 1e-12


def _mi_dataset(seed=5, n=150, censor=True):
    rng = np.random.default_rng(seed)
    z = rng.integers(0, 2, n).astype(float)
    x = rng.exponential(0.2, n) * np.exp(-0.5 * z)
    c = rng.exponential(0.25, n) if censor else np.full(n, np.inf)
    t = np.minimum(x, c)
    d = (x <= c).astype(int)
    y = 1.0 + x + 0.25 * z + rng.normal(size=n)
    return from_arrays(t, d, z.reshape(-1, 1), y)


class TestBootstrapMi:
    def test_deterministic_given_seed(self):
        recs = _mi_dataset()
        spec = ImputationSpec.parse("correct")
        a = bootstrap_mi(recs, B=8, spec=spec, seed=42)
        b = bootstrap_mi(recs, B=8, spec=spec, seed=42)
        assert a == b

    def test_different_seed_differs(self):
        recs = _mi_dataset()
        spec = ImputationSpec.parse("correct")
        a = bootstrap_mi(recs, B=8, spec=spec, seed=42)
        b = bootstrap_mi(recs, B=8, spec=spec, seed=43)
        assert a["x"].estimate != b["x"].estimate

    def test_no_censoring_matches_plain_ols_bootstrap(self):
        recs = _mi_dataset(censor=False)
        seed = 9
        spec = ImputationSpec.parse("atem2017")
        pooled = bootstrap_mi(recs, B=10, spec=spec, seed=seed)
        # independent replication: same resampling stream, plain OLS each time
        t = np.array([r.t for r in recs])
        z = np.array([[r.z[0]] for r in recs])
        y = np.array([r.y for r in recs])
        rng = np.random.default_rng(seed)
        betas = []
        for _ in range(10):
            idx = rng.integers(0, len(t), len(t))
            betas.append(_ols_arrays(t[idx], z[idx], y[idx]).coefficients[1])
        assert_allclose(pooled["x"].estimate, np.mean(betas), rtol=1e-12)

    def test_pooled_per_coefficient_names(self):
        recs = _mi_dataset()
        pooled = bootstrap_mi(recs, B=4, spec=ImputationSpec.parse("correct"), seed=1)
        assert set(pooled) == {"intercept", "x", "z1"}
        for est in pooled.values():
            assert est.B == 4
            assert est.std_error >= np.sqrt(est.within_var)

    def test_b_below_two_rejected(self):
        with pytest.raises(InvalidInputError):
            bootstrap_mi(_mi_dataset(), B=1, spec=ImputationSpec.parse("correct"), seed=0)

    def test_reuse_survival_fit_changes_result_but_not_determinism(self):
        recs = _mi_dataset(seed=11)
        spec = ImputationSpec.parse("correct")
        a = bootstrap_mi(recs, B=6, spec=spec, seed=5, reuse_survival_fit=True)
        b = bootstrap_mi(recs, B=6, spec=spec, seed=5, reuse_survival_fit=True)
        c = bootstrap_mi(recs, B=6, spec=spec, seed=5, reuse_survival_fit=False)
        assert a == b
        assert a["x"].estimate != c["x"].estimate
