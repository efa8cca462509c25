import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import lfilter
from scipy.stats import kstest

from packages.core.errors import InsufficientDraws, ZeroVariance
from packages.diagnostics import (
    autocovariance,
    diagnostics_report,
    ess,
    geweke,
    geweke_p,
    geweke_p_two_sided,
)


def _ar1(phi, n, seed):
    e = np.random.default_rng(seed).standard_normal(n + 1000)
    return lfilter([1.0], [1.0, -phi], e)[1000:]


class TestGewekeP:
    @pytest.mark.parametrize(
        "z, p", [(-0.087, 0.069), (-0.395, 0.307), (2.281, 0.977)]
    )
    def test_reference_pairs(self, z, p):
        assert round(geweke_p(z), 3) == p

    def test_two_sided_complements(self):
        for z in (-2.0, 0.0, 0.4, 3.1):
            assert geweke_p(z) + geweke_p_two_sided(z) == pytest.approx(1.0)

    @given(st.floats(0.0, 8.0), st.floats(0.0, 8.0))
    def test_monotone_in_magnitude(self, a, b):
        lo, hi = sorted((a, b))
        assert geweke_p(lo) <= geweke_p(hi)
        assert geweke_p(-hi) == geweke_p(hi)


class TestGeweke:
    def test_alternating_chain(self):
        z, p = geweke(np.tile([1.0, -1.0], 500))
        assert z == 0.0
        assert p == 0.0

    def test_shifted_chain_is_flagged(self):
        x = np.random.default_rng(0).standard_normal(2000)
        x[:200] += 3.0
        z, p = geweke(x)
        assert z > 3.0
        assert p > 0.99

    @pytest.mark.parametrize("value", [0.0, 4.2, -1e-7, 3.3e8])
    def test_constant_chain(self, value):
        with pytest.raises(ZeroVariance):
            geweke(np.full(200, value))

    def test_one_constant_segment(self):
        x = np.random.default_rng(2).standard_normal(500)
        x[:50] = 0.1
        z, _ = geweke(x)
        assert np.isfinite(z)

    def test_short_chain(self):
        with pytest.raises(InsufficientDraws):
            geweke(np.zeros(99))

    def test_bad_fractions(self):
        with pytest.raises(ValueError):
            geweke(np.random.default_rng(1).standard_normal(200), frac_first=0.0)

    @settings(max_examples=25, deadline=None)
    @given(
        st.integers(0, 10_000),
        st.floats(0.1, 100.0) | st.floats(-100.0, -0.1),
        st.floats(-1e3, 1e3),
    )
    def test_affine_invariance(self, seed, a, b):
        x = np.random.default_rng(seed).standard_normal(300)
        z, _ = geweke(x)
        z_affine, _ = geweke(a * x + b)
        assert z_affine == pytest.approx(np.sign(a) * z, rel=1e-6, abs=1e-6)

    def test_iid_chains_give_standard_normal_scores(self):
        rng = np.random.default_rng(42)
        scores = [geweke(rng.standard_normal(2000))[0] for _ in range(200)]
        assert kstest(scores, "norm").pvalue > 0.01


class TestEss:
    def test_iid_chain(self):
        x = np.random.default_rng(7).standard_normal(10_000)
        tau, n_eff = ess(x)
        assert abs(n_eff - 10_000) < 1_000
        assert n_eff <= 10_000

    def test_ar1_integrated_time(self):
        tau, n_eff = ess(_ar1(0.9, 100_000, seed=8))
        assert tau == pytest.approx(19.0, rel=0.15)
        assert n_eff == pytest.approx(100_000 / tau)

    @pytest.mark.parametrize("value", [1.0, 4.2, 0.1, -7.77])
    def test_constant_chain(self, value):
        with pytest.raises(ZeroVariance):
            ess(np.full(200, value))

    def test_short_chain(self):
        with pytest.raises(InsufficientDraws):
            ess(np.arange(50.0))

    def test_autocovariance_matches_direct_sum(self):
        x = np.random.default_rng(9).standard_normal(64)
        c = x - x.mean()
        direct = [np.dot(c[: 64 - j], c[j:]) / 64 for j in range(10)]
        np.testing.assert_allclose(autocovariance(x)[:10], direct, atol=1e-12)


class TestReport:
    def test_rows_and_monte_carlo_error(self, make_draws):
        rng = np.random.default_rng(3)
        q, n = 10, 400
        draws = make_draws(
            rng.standard_normal((n, q)),
            rng.standard_normal((n, q)),
            rng.uniform(0.1, 0.5, n),
            sigma2=rng.uniform(0.5, 1.5, n),
        )
        rows = diagnostics_report(draws)
        assert len(rows) == 2 * q + 2
        assert rows[0].parameter == "x1"
        assert rows[q].parameter == "W×x1"
        assert [r.parameter for r in rows[-2:]] == ["rho", "sigma2"]
        for r in rows:
            assert r.ess <= n
            assert r.mc_error == pytest.approx(r.sd / np.sqrt(r.ess), abs=1e-12)

    def test_too_few_retained(self, make_draws):
        rng = np.random.default_rng(4)
        draws = make_draws(rng.standard_normal((50, 1)), rng.standard_normal((50, 1)), np.zeros(50))
        with pytest.raises(InsufficientDraws):
            diagnostics_report(draws)

    def test_constant_parameter_chain(self, make_draws):
        rng = np.random.default_rng(5)
        draws = make_draws(
            rng.standard_normal((200, 1)), rng.standard_normal((200, 1)), rng.uniform(size=200)
        )
        # sigma2 defaults to a constant chain of ones
        with pytest.raises(ZeroVariance):
            diagnostics_report(draws)
