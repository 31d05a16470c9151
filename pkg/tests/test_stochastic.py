import json

import numpy as np
import pytest

from nashpoly.exact import profile_distance, solve_exact
from nashpoly.game import TsallisParams, make_chicken
from nashpoly.stochastic import (
    RowSource,
    SolverConfig,
    StageConfig,
    apply_overrides,
    inverse_power_iterate,
    lambda_grid,
    load_config,
    null_space_stochastic,
    preset,
    pseudoinverse_svd,
    solve_stochastic,
    stochastic_topk_svd,
)


def low_rank(rng, m, n, rank):
    return rng.standard_normal((m, rank)) @ rng.standard_normal((rank, n))


class TestConfig:
    def test_stage_validation(self):
        with pytest.raises(ValueError):
            StageConfig(iters=0)
        with pytest.raises(ValueError):
            StageConfig(eta=0.0)

    def test_solver_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(num_lams=1)

    def test_nested_and_dotted_overrides_agree(self):
        a = apply_overrides(SolverConfig(), {"null_space": {"iters": 77, "full_eval": True},
                                             "num_lams": 10})
        b = apply_overrides(SolverConfig(), {"hyps.null_space.iters": "77", "num_lams": "10",
                                             "tau_inv": 3})
        assert a.to_dict() == b.to_dict()
        assert a.null_space.iters == 77 and a.num_lams == 10

    def test_unknown_key(self):
        with pytest.raises(KeyError):
            apply_overrides(SolverConfig(), {"null_space.bogus": 1})
        with pytest.raises(KeyError):
            apply_overrides(SolverConfig(), {"bogus": 1})

    def test_overrides_do_not_mutate(self):
        base = SolverConfig()
        apply_overrides(base, {"maxv.iters": 5})
        assert base.maxv.iters == 1000

    def test_round_trip(self):
        cfg = preset("bs_200", seed=9)
        assert SolverConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()

    @pytest.mark.parametrize("suffix", [".json", ".yaml", ".cfg"])
    def test_load_config(self, tmp_path, suffix):
        path = tmp_path / f"c{suffix}"
        if suffix == ".json":
            path.write_text(json.dumps({"null_space": {"batch_size": 100}, "tau_inv": 3}))
        elif suffix == ".yaml":
            path.write_text("null_space:\n  batch_size: 100\ntau_inv: 3\n")
        else:
            path.write_text("# comment\nnull_space.batch_size = 100\ntau_inv = 3\n")
        cfg, raw = load_config(path)
        assert cfg.null_space.batch_size == 100
        assert int(raw["tau_inv"]) == 3

    def test_presets(self):
        assert preset("base").to_dict() == preset("bs_1000").to_dict()
        small = preset("bs_100", seed=4)
        assert small.null_space.batch_size == 100 and small.seed == 4
        assert small.null_space.iters > preset("bs_1000").null_space.iters
        with pytest.raises(KeyError):
            preset("bs_7")


def test_row_source_sampling():
    A = np.arange(20.0).reshape(10, 2)
    src = RowSource(A)
    rng = np.random.default_rng(0)
    B, scale = src.sample(rng, 4)
    assert B.shape == (4, 2) and scale == 2.5
    full, scale = src.sample(rng, 10)
    assert full is src.matrix and scale == 1.0
    np.testing.assert_allclose(src.gram_apply(np.eye(2)), A.T @ A)


def test_batch_gram_is_unbiased():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((40, 5))
    src = RowSource(A)
    acc = np.zeros((5, 5))
    for _ in range(4000):
        B, s = src.sample(rng, 8)
        acc += s * B.T @ B
    np.testing.assert_allclose(acc / 4000, A.T @ A, rtol=0.1, atol=1.0)


def test_topk_singular_values():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((60, 12))
    cfg = StageConfig(iters=3000, eta=0.01, batch_size=60, norm_tol=1e-10, skip=20)
    vecs, vals, info = stochastic_topk_svd(RowSource(A), 3, cfg, rng)
    s = np.linalg.svd(A, compute_uv=False)
    np.testing.assert_allclose(vals, s[:3], rtol=1e-6)
    assert info.converged
    np.testing.assert_allclose(vecs.T @ vecs, np.eye(3), atol=1e-10)


def test_topk_rejects_bad_k():
    with pytest.raises(ValueError):
        stochastic_topk_svd(RowSource(np.eye(3)), 4, StageConfig(), np.random.default_rng(0))


def test_null_space_small():
    rng = np.random.default_rng(3)
    A = low_rank(rng, 30, 12, 8)
    cfg = SolverConfig()
    cfg.null_space = StageConfig(iters=20_000, eta=1.0 / 1.1 / np.linalg.norm(A, 2) ** 2,
                                 batch_size=30, norm_tol=1e-10, skip=50,
                                 eigenvalue_tolerance=1e-6)
    Z, diag = null_space_stochastic(A, cfg, rng)
    assert Z.shape == (12, 4)
    assert np.abs(A @ Z).max() < 1e-5
    assert diag["rounds"][-1]["k"] >= 4


def test_pseudoinverse_dense_and_iterative():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((20, 6))
    cfg = StageConfig(iters=5000, eta=0.02, batch_size=20, norm_tol=1e-12, skip=20)
    for dense_max in (512, 0):
        P = pseudoinverse_svd(A, cfg, rng, dense_max=dense_max)
        np.testing.assert_allclose(P.matrix(), np.linalg.pinv(A), atol=1e-6)
        y = rng.standard_normal(20)
        np.testing.assert_allclose(P(y), np.linalg.pinv(A) @ y, atol=1e-6)


def test_pseudoinverse_drops_small_singular_values():
    A = np.diag([1.0, 1e-14, 0.5])
    P = pseudoinverse_svd(A, StageConfig(), np.random.default_rng(0))
    assert P.rank == 2
    with pytest.raises(np.linalg.LinAlgError):
        pseudoinverse_svd(np.zeros((3, 3)), StageConfig(), np.random.default_rng(0))


def test_inverse_power_iteration():
    rng = np.random.default_rng(5)
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    R = Q @ np.diag([5.0, 1.0, 0.5, 0.2, 0.1, 0.0]) @ Q.T
    cfg = StageConfig(iters=1000, norm_tol=1e-9, skip=10)
    w, ok = inverse_power_iterate(R, cfg, rng)
    assert ok
    assert abs(abs(w @ Q[:, 0]) - 1.0) < 1e-9


def test_lambda_grid():
    grid = lambda_grid(5, 2)
    np.testing.assert_allclose(grid, np.sqrt([0, 0.25, 0.5, 0.75, 1.0]))


@pytest.fixture(scope="module")
def chicken_run():
    return solve_stochastic(make_chicken(), TsallisParams(3, 0.25), preset("bs_1000", seed=0))


def test_chicken_recovery(chicken_run):
    truth = solve_exact(make_chicken(), TsallisParams(3, 0.25))
    assert len(chicken_run) == 3
    for sol in chicken_run:
        assert min(profile_distance(sol.profile, t) for t in truth.profiles) < 1e-3
    null = next(d for d in chicken_run.diagnostics if d["stage"] == "null_space")
    assert null["null_dim"] == 81


def test_chicken_determinism(chicken_run):
    again = solve_stochastic(make_chicken(), TsallisParams(3, 0.25), preset("bs_1000", seed=0))
    assert again.to_json() == chicken_run.to_json()
