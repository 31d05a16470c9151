import json

import numpy as np
import pytest

from _oracles import fixed_points_2x2
from nashpoly.exact import (
    DenseTooLarge,
    RankConditionError,
    Tolerances,
    candidate_from_vector,
    profile_distance,
    solve_exact,
    solve_gevp,
)
from nashpoly.game import TsallisParams, make_chicken, make_stag_hunt, random_game
from nashpoly.mvp import build_ne_mvp


@pytest.fixture(scope="module")
def chicken_solutions():
    return solve_exact(make_chicken(), TsallisParams(3, 0.25))


def test_chicken_three_equilibria(chicken_solutions):
    got = [np.concatenate(s.profile) for s in chicken_solutions]
    expected = [
        [0.1074, 0.8926, 0.9953, 0.0047],
        [0.5971, 0.4029, 0.5971, 0.4029],
        [0.9953, 0.0047, 0.1074, 0.8926],
    ]
    assert len(got) == 3
    for g, e in zip(got, expected):
        np.testing.assert_allclose(g, e, atol=2e-4)


def test_chicken_solutions_are_regularized_equilibria(chicken_solutions):
    for s in chicken_solutions:
        assert s.residual_norm < 1e-10
        assert s.exploitability_regularized < 1e-8
        assert s.exploitability > 0


def test_chicken_diagnostics(chicken_solutions):
    summary = chicken_solutions.diagnostics[-1]
    assert summary["null_dim"] == 81
    outcomes = {d["outcome"] for d in chicken_solutions.diagnostics[:-1]}
    assert "complex" in outcomes


def test_stag_hunt_single():
    sols = solve_exact(make_stag_hunt(), TsallisParams(3, 1.0))
    assert len(sols) == 1
    np.testing.assert_allclose(np.concatenate(sols.solutions[0].profile),
                               [0.358, 0.642, 0.358, 0.642], atol=2e-3)


@pytest.mark.parametrize("seed", range(5))
def test_tau_one_matches_fixed_point_oracle(seed):
    game = random_game((2, 2), seed)
    sols = solve_exact(game, TsallisParams(1, 1.0))
    ref = fixed_points_2x2(game.payoffs[0], game.payoffs[1], gamma=2.0)
    assert len(sols) == len(ref) == 1
    assert profile_distance(sols.solutions[0].profile, ref[0]) < 1e-6


def test_deterministic(chicken_solutions):
    again = solve_exact(make_chicken(), TsallisParams(3, 0.25))
    assert again.to_json() == chicken_solutions.to_json()


def test_json(chicken_solutions):
    data = json.loads(chicken_solutions.to_json())
    assert len(data["solutions"]) == 3
    assert data["tolerances"]["rank_tol"] == 1e-8


def test_dense_cap():
    with pytest.raises(DenseTooLarge):
        solve_exact(make_chicken(), TsallisParams(3, 0.25), dense_cap=1000)


def test_rank_condition():
    B = np.array([[1.0, 1.0], [2.0, 2.0]])
    with pytest.raises(RankConditionError):
        solve_gevp(np.eye(2), B)


def test_candidate_filters():
    system = build_ne_mvp(make_chicken(), TsallisParams(3, 0.25))
    tol = Tolerances()
    psi = np.zeros(10)
    psi[1:5] = 1.0
    assert candidate_from_vector(psi, system, tol) == (None, "first_entry")
    psi = np.ones(10, dtype=complex)
    psi[2] = 1 + 0.5j
    assert candidate_from_vector(psi, system, tol)[1] == "complex"
    psi = 2.0 * np.arange(1, 11, dtype=float)
    v, why = candidate_from_vector(psi, system, tol)
    assert why == "ok"
    np.testing.assert_allclose(v, [2, 3, 4, 5])


def test_profile_distance():
    p = [np.array([0.5, 0.5]), np.array([1.0, 0.0])]
    q = [np.array([0.4, 0.6]), np.array([0.7, 0.3])]
    assert profile_distance(p, q) == pytest.approx(0.3)
