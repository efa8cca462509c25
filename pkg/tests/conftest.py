import numpy as np
import pytest
import scipy.sparse as sp

from packages.panel import PanelData, demean_two_way
from packages.sampler import McmcConfig, McmcDraws, PriorSpec
from packages.synthetic import DgpConfig, generate, generate_coords, region_labels
from packages.weights import WeightMatrix, build_knn, row_normalize


def ring_matrix(n: int) -> WeightMatrix:
    """Each region has its two ring neighbours at weight 0.5."""
    rows = np.repeat(np.arange(n), 2)
    cols = np.column_stack([(np.arange(n) - 1) % n, (np.arange(n) + 1) % n]).ravel()
    adjacency = sp.csr_matrix((np.ones(2 * n), (rows, cols)), shape=(n, n))
    return row_normalize(adjacency, k=2, region_ids=region_labels(n))


@pytest.fixture
def ring():
    return ring_matrix


@pytest.fixture
def swap():
    return WeightMatrix(matrix=sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]])), k=1)


@pytest.fixture
def knn_weights():
    def build(n: int, k: int, seed: int = 0) -> WeightMatrix:
        coords = np.random.default_rng(seed).uniform(size=(n, 2))
        return build_knn(coords, k, region_ids=region_labels(n))

    return build


@pytest.fixture
def simulated():
    """Factory for (panel, w, truth) from the spatial Durbin generator on a k-NN matrix."""

    def build(k: int = 4, **overrides):
        params = {"N": 30, "T": 4, "Q": 2, "rho": 0.3, "seed": 11}
        params.update(overrides)
        cfg = DgpConfig(**params)
        coords = generate_coords(cfg)
        w = build_knn(coords, k, region_ids=region_labels(cfg.N))
        panel, _, truth = generate(cfg, w, coords=coords)
        return panel, w, truth

    return build


@pytest.fixture
def demeaned_panel(simulated):
    panel, w, truth = simulated()
    return demean_two_way(panel), w, truth


@pytest.fixture
def tiny_panel():
    y = np.array([[1.0, 2.0], [3.0, 5.0]])
    X = np.array([[[0.5], [1.5]], [[2.0], [-1.0]]])
    return PanelData(
        region_ids=("a", "b"), period_ids=("2019", "2020"), y=y, X=X, var_names=("x1",)
    )


@pytest.fixture
def make_draws():
    """McmcDraws assembled from given arrays, for tests that do not need a chain."""

    def build(beta, theta, rho, sigma2=None, var_names=None, w_hash="0" * 64, n=3, t=2):
        beta = np.atleast_2d(np.asarray(beta, dtype=float))
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        rho = np.asarray(rho, dtype=float)
        if beta.shape[0] == 1 and rho.size > 1:
            beta = np.repeat(beta, rho.size, axis=0)
            theta = np.repeat(theta, rho.size, axis=0)
        n_keep = rho.size
        sigma2 = np.ones(n_keep) if sigma2 is None else np.asarray(sigma2, dtype=float)
        q = beta.shape[1]
        names = tuple(var_names or [f"x{j + 1}" for j in range(q)])
        return McmcDraws(
            beta=beta,
            theta=theta,
            rho=rho,
            sigma2=sigma2,
            v_mean=np.ones((n, t)),
            accepted=np.ones(n_keep + 10, dtype=bool),
            rho_step=0.1,
            var_names=names,
            region_ids=region_labels(n),
            period_ids=tuple(str(p + 1) for p in range(t)),
            config=McmcConfig(ndraw=n_keep + 10, nburn=10, log_every=0),
            prior=PriorSpec(),
            w_hash=w_hash,
        )

    return build
