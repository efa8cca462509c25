"""
Full conditionals, the chain driver and draws persistence.
"""

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats
from scipy.integrate import trapezoid

from packages.core.errors import (
    DegenerateResidual,
    DimensionMismatch,
    GridMissing,
    InputFileMissing,
    NotDemeaned,
    StaleDraws,
)
from packages.diagnostics import ess
from packages.logdet import build_logdet_grid
from packages.panel import demean_two_way
from packages.sampler import (
    McmcConfig,
    PriorArrays,
    PriorSpec,
    SamplerState,
    delta_conditional,
    initial_state,
    load_draws,
    posterior_table,
    prepare_design,
    run_chain,
    run_chains,
    sample_delta,
    sample_rho_mh,
    sample_sigma2,
    sample_v,
    save_draws,
)
from packages.sampler.conditionals import rho_log_target


def _state(nt, delta=None, sigma2=1.0, rho=0.0, e=None, v=None):
    return SamplerState(
        delta=np.zeros(2) if delta is None else np.asarray(delta, dtype=float),
        sigma2=sigma2,
        rho=rho,
        v=np.ones(nt) if v is None else v,
        e=np.zeros(nt) if e is None else e,
    )


def _prior(c, C, r=5.0, a=0.0, b=0.0):
    C = np.asarray(C, dtype=float)
    return PriorArrays(c=np.asarray(c, dtype=float), C=C, C_inv=np.linalg.inv(C), r=r, a=a, b=b)


def _homoscedastic_posterior(design, w, rho_nodes):
    """
    Exact posterior means (and sd of rho) with v = 1, a flat prior on delta and
    p(sigma2) proportional to 1/sigma2: delta and sigma2 integrate out per rho.
    """
    n, p = design.Z.shape
    wd = w.to_dense()
    log_post = np.empty(rho_nodes.size)
    deltas = np.empty((rho_nodes.size, p))
    rss = np.empty(rho_nodes.size)
    for i, rho in enumerate(rho_nodes):
        ay = design.y - rho * design.wy
        deltas[i], *_ = np.linalg.lstsq(design.Z, ay, rcond=None)
        rss[i] = np.sum((ay - design.Z @ deltas[i]) ** 2)
        logdet = np.linalg.slogdet(np.eye(w.n) - rho * wd)[1]
        log_post[i] = design.t * logdet - 0.5 * (n - p) * np.log(rss[i])
    density = np.exp(log_post - log_post.max())
    density /= trapezoid(density, rho_nodes)

    def expect(f):
        return trapezoid(f * density.reshape((-1,) + (1,) * (f.ndim - 1)), rho_nodes, axis=0)

    rho_mean = expect(rho_nodes)
    return {
        "delta": expect(deltas),
        "rho": rho_mean,
        "rho_sd": np.sqrt(expect((rho_nodes - rho_mean) ** 2)),
        "sigma2": expect(rss / (n - p - 2)),
    }


class _FixedProposal:
    """Generator stand-in: fixed standard-normal increment, real uniforms."""

    def __init__(self, z, seed=0):
        self.z = z
        self._rng = np.random.default_rng(seed)

    def standard_normal(self):
        return self.z

    def random(self):
        return self._rng.random()


class TestConfig:
    def test_defaults(self):
        pa = PriorSpec().arrays(4)
        np.testing.assert_array_equal(pa.c, np.ones(4))
        np.testing.assert_array_equal(pa.C, 0.001 * np.eye(4))
        assert (pa.r, pa.a, pa.b) == (5.0, 0.0, 0.0)
        cfg = McmcConfig()
        assert (cfg.ndraw, cfg.nburn, cfg.n_retained) == (4000, 500, 3500)
        assert cfg.target_acceptance == pytest.approx(0.5)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"r": 0.0},
            {"a": -1.0},
            {"C_scale": 0.0},
            {"C": [[1.0, 2.0], [2.0, 1.0]]},
            {"C": [[1.0, 0.5], [0.0, 1.0]]},
        ],
    )
    def test_invalid_prior(self, kwargs):
        with pytest.raises(ValidationError):
            PriorSpec(**kwargs)

    def test_prior_dimension(self):
        with pytest.raises(DimensionMismatch):
            PriorSpec(c=[1.0, 1.0], C=[[1.0, 0.0], [0.0, 1.0]]).arrays(4)

    @pytest.mark.parametrize(
        "kwargs",
        [{"ndraw": 500, "nburn": 500}, {"rho_step": 0.0}, {"adapt_target": (0.6, 0.4)}],
    )
    def test_invalid_mcmc(self, kwargs):
        with pytest.raises(ValidationError):
            McmcConfig(**kwargs)


class TestDeltaConditional:
    def test_flat_prior_is_least_squares(self):
        rng = np.random.default_rng(0)
        Z = rng.standard_normal((40, 2))
        Ay = rng.standard_normal(40)
        flat = PriorArrays(c=np.ones(2), C=np.eye(2), C_inv=np.zeros((2, 2)), r=5, a=0, b=0)
        mean, _ = delta_conditional(_state(40, sigma2=0.3), Z, Ay, flat)
        ols, *_ = np.linalg.lstsq(Z, Ay, rcond=None)
        np.testing.assert_allclose(mean, ols, atol=1e-10)

    def test_no_information_returns_the_prior(self):
        prior = _prior(np.ones(2), 0.001 * np.eye(2))
        mean, lower = delta_conditional(_state(10), np.zeros((10, 2)), np.ones(10), prior)
        np.testing.assert_allclose(mean, [1.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(np.linalg.inv(lower @ lower.T), prior.C, rtol=1e-10)

    def test_gls_oracle(self):
        rng = np.random.default_rng(42)
        Z = rng.standard_normal((10, 2))
        Ay = rng.standard_normal(10)
        v = rng.uniform(0.5, 3.0, size=10)
        sigma2 = 0.7
        prior = _prior([1.0, 1.0], [[2.0, 0.3], [0.3, 1.0]])
        mean, _ = delta_conditional(_state(10, sigma2=sigma2, v=v), Z, Ay, prior)

        Vinv = np.diag(1.0 / v)
        P = np.linalg.inv(Z.T @ Vinv @ Z / sigma2 + np.linalg.inv(prior.C))
        oracle = P @ (Z.T @ Vinv @ Ay / sigma2 + np.linalg.inv(prior.C) @ prior.c)
        np.testing.assert_allclose(mean, oracle, atol=1e-10)

    def test_shrinkage_moves_toward_prior_mean(self):
        rng = np.random.default_rng(8)
        Z = rng.standard_normal((60, 2))
        Ay = Z @ np.array([3.0, -2.0]) + rng.standard_normal(60)
        distances = []
        for scale in (100.0, 1.0, 0.01):
            prior = _prior(np.ones(2), scale * np.eye(2))
            mean, _ = delta_conditional(_state(60), Z, Ay, prior)
            distances.append(np.linalg.norm(mean - prior.c))
        assert distances[0] > distances[1] > distances[2]

    def test_prior_recovery_without_data(self):
        prior = _prior([1.0, -0.5], [[0.4, 0.1], [0.1, 0.2]])
        rng = np.random.default_rng(5)
        state = _state(8)
        Z = np.zeros((8, 2))
        draws = np.array([sample_delta(state, Z, np.zeros(8), prior, rng) for _ in range(4000)])
        mc_error = np.sqrt(np.diag(prior.C) / draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - prior.c) < 3 * mc_error)
        np.testing.assert_allclose(draws.var(axis=0, ddof=1), np.diag(prior.C), rtol=0.1)


class TestSigma2:
    def test_zero_residual_with_proper_scale(self):
        nt = 40
        prior = _prior(np.ones(2), np.eye(2), a=0.0, b=1.0)
        rng = np.random.default_rng(1)
        draws = np.array([sample_sigma2(_state(nt), prior, rng) for _ in range(20_000)])
        assert draws.mean() == pytest.approx(1.0 / (nt / 2 - 1), rel=0.01)

    def test_improper_limit_mean(self):
        nt = 30
        e = np.zeros(nt)
        e[:2] = [1.0, np.sqrt(2.0)]  # e'e = 3 = 2s with s = 1.5
        prior = _prior(np.ones(2), np.eye(2))
        rng = np.random.default_rng(2)
        draws = np.array([sample_sigma2(_state(nt, e=e), prior, rng) for _ in range(20_000)])
        assert draws.mean() == pytest.approx(1.5 / (nt / 2 - 1), rel=0.01)

    def test_exact_fit(self):
        with pytest.raises(DegenerateResidual):
            sample_sigma2(_state(10), _prior(np.ones(2), np.eye(2)), np.random.default_rng(0))


class TestVarianceScalars:
    def test_zero_residual(self):
        v = sample_v(_state(100_000), 5.0, np.random.default_rng(3))
        assert np.all(v > 0)
        assert np.mean(1.0 / v) == pytest.approx(1.2, rel=0.01)

    def test_large_residual(self):
        e = np.full(100_000, 10.0)
        v = sample_v(_state(e.size, e=e), 5.0, np.random.default_rng(4))
        assert v.mean() == pytest.approx(26.25, rel=0.02)

    def test_homoscedastic_limit(self):
        v = sample_v(_state(1000), 1e8, np.random.default_rng(5))
        np.testing.assert_allclose(v, 1.0, atol=1e-3)


class TestRhoStep:
    def _swap_problem(self, swap):
        g = build_logdet_grid(swap)
        y = np.array([1.0, 0.5])
        wy = np.array([0.5, 1.0])
        Z = np.array([[0.3], [-0.2]])
        state = _state(2, delta=[0.5], rho=0.1)
        return g, y, wy, Z, state

    def test_zero_step_is_always_accepted(self, swap):
        g, y, wy, Z, state = self._swap_problem(swap)
        rng = np.random.default_rng(0)
        for _ in range(200):
            rho, accepted = sample_rho_mh(state, g, y, wy, Z, rng, step=0.0)
            assert accepted and rho == state.rho

    def test_acceptance_matches_dense_oracle(self, swap):
        g, y, wy, Z, state = self._swap_problem(swap)
        step, z = 0.5, 1.4
        proposal = state.rho + step * z

        def dense_target(rho):
            e = y - rho * wy - Z @ state.delta
            return np.log(np.linalg.det(np.eye(2) - rho * swap.to_dense())) - e @ e / 2.0

        expected = min(1.0, np.exp(dense_target(proposal) - dense_target(state.rho)))
        rng = _FixedProposal(z, seed=9)
        n = 50_000
        hits = 0
        for _ in range(n):
            rho, accepted = sample_rho_mh(state, g, y, wy, Z, rng, step=step)
            hits += accepted
            assert rho == (proposal if accepted else state.rho)
        assert hits / n == pytest.approx(expected, abs=0.01)

    def test_proposals_stay_inside_support(self, swap):
        g, y, wy, Z, state = self._swap_problem(swap)
        rng = np.random.default_rng(1)
        for correction in (False, True):
            for _ in range(500):
                rho, _ = sample_rho_mh(
                    state, g, y, wy, Z, rng, step=5.0, truncation_correction=correction
                )
                assert -1.0 < rho < 1.0

    def test_grid_missing(self, swap):
        _, y, wy, Z, state = self._swap_problem(swap)
        with pytest.raises(GridMissing):
            sample_rho_mh(state, None, y, wy, Z, np.random.default_rng(0), step=0.1)


class TestState:
    def test_drift_is_detected(self):
        y, wy, Z = np.ones(4), np.zeros(4), np.zeros((4, 2))
        state = _state(4)
        state.refresh(y, wy, Z)
        state.check_residual(y, wy, Z)
        state.e = state.e + 1e-3
        with pytest.raises(AssertionError):
            state.check_residual(y, wy, Z)

    def test_initial_state_is_least_squares(self, demeaned_panel):
        p, w, _ = demeaned_panel
        design = prepare_design(p, w)
        state = initial_state(design)
        assert state.rho == 0.0
        np.testing.assert_array_equal(state.v, 1.0)
        np.testing.assert_allclose(design.Z.T @ state.e, 0.0, atol=1e-8)


class TestRunChain:
    CFG = McmcConfig(ndraw=300, nburn=100, seed=17, log_every=0)

    def test_retained_rows(self, demeaned_panel):
        p, w, _ = demeaned_panel
        d = run_chain(p, w, PriorSpec(), self.CFG, build_logdet_grid(w, npoints=201))
        assert d.beta.shape == (200, 2) and d.theta.shape == (200, 2)
        assert d.rho.shape == d.sigma2.shape == (200,)
        assert d.accepted.shape == (300,)
        assert d.v_mean.shape == (p.N, p.T)
        assert 0.0 < d.acceptance_rate < 1.0
        assert np.all(np.abs(d.rho) < 1.0) and np.all(d.sigma2 > 0)
        assert d.w_hash == w.content_hash

    def test_same_seed_same_draws(self, demeaned_panel):
        p, w, _ = demeaned_panel
        g = build_logdet_grid(w, npoints=201)
        a = run_chain(p, w, PriorSpec(), self.CFG, g)
        b = run_chain(p, w, PriorSpec(), self.CFG, g)
        np.testing.assert_array_equal(a.as_matrix(), b.as_matrix())
        np.testing.assert_array_equal(a.v_mean, b.v_mean)

    def test_homoscedastic_pins_v(self, demeaned_panel):
        p, w, _ = demeaned_panel
        cfg = self.CFG.model_copy(update={"heteroscedastic": False})
        d = run_chain(p, w, PriorSpec(), cfg, build_logdet_grid(w, npoints=201))
        np.testing.assert_array_equal(d.v_mean, 1.0)

    def test_homoscedastic_chain_matches_exact_posterior(self, demeaned_panel):
        p, w, _ = demeaned_panel
        prior = PriorSpec(c_value=0.0, C_scale=1e12)
        cfg = McmcConfig(ndraw=8000, nburn=1000, seed=5, heteroscedastic=False, log_every=0)
        d = run_chain(p, w, prior, cfg, build_logdet_grid(w))
        exact = _homoscedastic_posterior(
            prepare_design(p, w), w, np.linspace(-0.999, 0.999, 4001)
        )

        def within_mc_error(chain, expected):
            _, n_eff = ess(chain)
            return abs(chain.mean() - expected) < 4.0 * chain.std() / np.sqrt(n_eff)

        for j in range(d.delta.shape[1]):
            assert within_mc_error(d.delta[:, j], exact["delta"][j]), j
        assert within_mc_error(d.rho, exact["rho"])
        assert within_mc_error(d.sigma2, exact["sigma2"])
        assert d.rho.std() == pytest.approx(exact["rho_sd"], rel=0.15)

    def test_debug_mode_checks_the_residual(self, demeaned_panel):
        p, w, _ = demeaned_panel
        cfg = self.CFG.model_copy(update={"debug": True, "ndraw": 150, "nburn": 50})
        d = run_chain(p, w, PriorSpec(), cfg, build_logdet_grid(w, npoints=201))
        assert d.n_retained == 100

    def test_requires_demeaned_panel(self, simulated):
        panel, w, _ = simulated()
        with pytest.raises(NotDemeaned):
            run_chain(panel, w, PriorSpec(), self.CFG)

    def test_grid_for_another_matrix(self, demeaned_panel, knn_weights):
        p, w, _ = demeaned_panel
        other = build_logdet_grid(knn_weights(p.N, 6, seed=99), npoints=101)
        with pytest.raises(GridMissing):
            run_chain(p, w, PriorSpec(), self.CFG, other)

    def test_independent_chains_in_seed_order(self, demeaned_panel):
        p, w, _ = demeaned_panel
        g = build_logdet_grid(w, npoints=201)
        chains = run_chains(p, w, PriorSpec(), self.CFG, seeds=[3, 4], n_jobs=2, grid=g)
        single = run_chain(p, w, PriorSpec(), self.CFG.model_copy(update={"seed": 4}), g)
        assert len(chains) == 2
        np.testing.assert_array_equal(chains[1].rho, single.rho)
        assert not np.array_equal(chains[0].rho, chains[1].rho)


class TestSummaryAndFiles:
    def test_posterior_table(self, demeaned_panel):
        p, w, _ = demeaned_panel
        d = run_chain(p, w, PriorSpec(), TestRunChain.CFG, build_logdet_grid(w, npoints=201))
        rows, stats = posterior_table(d, prepare_design(p, w), log_marginal=-12.5)
        assert [r.name for r in rows] == ["x1", "x2", "W×x1", "W×x2", "rho"]
        for r in rows:
            assert r.t_stat == pytest.approx(r.mean / r.sd)
            assert 0.0 <= r.z_prob <= 1.0
        assert 0.0 <= stats.r_squared <= 1.0
        assert stats.sigma2 == pytest.approx(d.sigma2.mean())
        assert stats.log_marginal == -12.5

    def test_save_and_load(self, tmp_path, demeaned_panel):
        p, w, _ = demeaned_panel
        d = run_chain(p, w, PriorSpec(), TestRunChain.CFG, build_logdet_grid(w, npoints=201))
        d.metadata["k"] = 4
        paths = save_draws(d, tmp_path)
        assert {x.name for x in paths} == {"draws.csv", "v_mean.csv", "draws.json"}
        again = load_draws(tmp_path, expected_w_hash=w.content_hash)
        np.testing.assert_array_equal(again.as_matrix(), d.as_matrix())
        np.testing.assert_array_equal(again.v_mean, d.v_mean)
        assert again.acceptance_rate == d.acceptance_rate
        assert again.config == d.config
        assert again.metadata["k"] == 4

    def test_stale_draws(self, tmp_path, make_draws):
        save_draws(make_draws([[1.0]], [[0.5]], np.zeros(100)), tmp_path)
        with pytest.raises(StaleDraws):
            load_draws(tmp_path, expected_w_hash="f" * 64)

    def test_missing_draws(self, tmp_path):
        with pytest.raises(InputFileMissing):
            load_draws(tmp_path / "nothing")


@pytest.mark.slow
def test_successive_conditional_simulator_leaves_the_prior_invariant(ring):
    """
    Alternate y ~ p(y | params) with one sweep of the conditionals; the
    parameter draws must keep the prior marginals.
    """
    w = ring(4)
    n, t = 4, 2
    g = build_logdet_grid(w)
    rng = np.random.default_rng(2024)
    prior = _prior(np.zeros(2), np.eye(2), r=5.0, a=4.0, b=3.0)
    Z = rng.standard_normal((n * t, 2))
    big_w = np.kron(np.eye(t), w.to_dense())

    state = SamplerState(
        delta=rng.multivariate_normal(prior.c, prior.C),
        sigma2=prior.b / rng.gamma(prior.a),
        rho=rng.uniform(-1.0, 1.0),
        v=prior.r / rng.chisquare(prior.r, size=n * t),
        e=np.zeros(n * t),
    )
    iterations = 30_000
    delta_draws = np.empty((iterations, 2))
    rho_draws = np.empty(iterations)
    sigma2_draws = np.empty(iterations)
    for it in range(iterations):
        eps = np.sqrt(state.sigma2 * state.v) * rng.standard_normal(n * t)
        y = np.linalg.solve(np.eye(n * t) - state.rho * big_w, Z @ state.delta + eps)
        wy = big_w @ y
        state.refresh(y, wy, Z)

        state.delta = sample_delta(state, Z, y - state.rho * wy, prior, rng)
        state.refresh(y, wy, Z)
        state.sigma2 = sample_sigma2(state, prior, rng)
        state.v = sample_v(state, prior.r, rng)
        state.rho, _ = sample_rho_mh(
            state, g, y, wy, Z, rng, step=0.5, truncation_correction=True
        )
        delta_draws[it] = state.delta
        rho_draws[it] = state.rho
        sigma2_draws[it] = state.sigma2

    def within_mc_error(chain, expected_mean):
        _, n_eff = ess(chain)
        return abs(chain.mean() - expected_mean) < 4.0 * chain.std() / np.sqrt(n_eff)

    assert within_mc_error(delta_draws[:, 0], 0.0)
    assert within_mc_error(delta_draws[:, 1], 0.0)
    assert within_mc_error(rho_draws, 0.0)

    # QQ agreement: at every level the chain puts mass q below the prior quantile
    marginals = [
        (delta_draws[:, 0], stats.norm(0.0, 1.0)),
        (delta_draws[:, 1], stats.norm(0.0, 1.0)),
        (rho_draws, stats.uniform(-1.0, 2.0)),
        (sigma2_draws, stats.invgamma(prior.a, scale=prior.b)),
    ]
    for chain, marginal in marginals:
        for q in np.linspace(0.1, 0.9, 9):
            below = (chain < marginal.ppf(q)).astype(float)
            assert within_mc_error(below, q), (marginal.dist.name, q)


def test_rho_target_uses_t_times_the_log_determinant(swap):
    g = build_logdet_grid(swap)
    quad = (2.0, 0.5, 1.0)
    one = rho_log_target(0.3, g, 1, quad, 1.0)
    three = rho_log_target(0.3, g, 3, quad, 1.0)
    assert three - one == pytest.approx(2.0 * np.log(1.0 - 0.09), abs=1e-8)
