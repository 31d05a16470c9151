"""Polynomial system whose nonnegative real roots are Tsallis-regularized equilibria.

Variables are ``v_{i,a} = x_{i,a} ** tau``. Each player contributes the first
``|A_i| - 1`` rows of its projected regularized gradient (the last row is
dropped since projected rows sum to zero) plus ``sum_a v_{i,a}**tau_inv = 1``.
Non-negativity is not encoded; candidates are filtered afterwards.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .game import Game, TsallisParams, gradient, project_tangent
from .polynomial import Polynomial, eval_poly

NEG_TOL = 1e-6


class NegativeRootError(ValueError):
    pass


@dataclass(frozen=True)
class PolynomialSystem:
    polys: tuple[Polynomial, ...]
    action_counts: tuple[int, ...]
    params: TsallisParams
    kinds: tuple[str, ...]  # "gradient" or "simplex" per equation
    flags: tuple[str, ...] = field(default=())

    @property
    def n_v(self) -> int:
        return sum(self.action_counts)

    @property
    def n_e(self) -> int:
        return len(self.polys)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(p.degree for p in self.polys)

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(np.concatenate([[0], np.cumsum(self.action_counts)]).tolist())

    def var_index(self, player: int, action: int) -> int:
        return self.offsets[player] + action

    def var_of(self, index: int) -> tuple[int, int]:
        for i, start in enumerate(self.offsets[:-1]):
            if index < self.offsets[i + 1]:
                return i, index - start
        raise IndexError(index)

    def to_json(self) -> str:
        return json.dumps({
            "action_counts": list(self.action_counts),
            "tau_inv": self.params.tau_inv,
            "gamma_tilde": self.params.gamma_tilde,
            "equations": [{"kind": k, "terms": p.to_json()} for k, p in zip(self.kinds, self.polys)],
        })


def build_ne_mvp(game: Game, params: TsallisParams) -> PolynomialSystem:
    if params.tau_inv < 1:
        raise ValueError("tau_inv must be >= 1")
    flags = []
    stacked = np.stack(game.payoffs)
    if stacked.min() <= 0 or stacked.max() > 1:
        warnings.warn("payoffs are outside (0, 1]; equilibria may leave the simplex interior")
        flags.append("unnormalized_payoffs")
    if params.gamma_tilde < 1:
        flags.append("gamma_tilde_below_one")

    counts = game.action_counts
    n_v = sum(counts)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    k = params.tau_inv
    polys, kinds = [], []
    for i, a_i in enumerate(counts):
        opponents = [j for j in range(game.num_players) if j != i]
        # raw gradient polynomial for every action of player i
        grads: list[dict] = [dict() for _ in range(a_i)]
        for joint in itertools.product(*(range(counts[j]) for j in opponents)):
            mono = [0] * n_v
            for j, a_j in zip(opponents, joint):
                mono[offsets[j] + a_j] += k
            mono = tuple(mono)
            index = [slice(None)] * game.num_players
            for j, a_j in zip(opponents, joint):
                index[j] = a_j
            column = game.payoffs[i][tuple(index)]
            for a in range(a_i):
                grads[a][mono] = grads[a].get(mono, 0.0) + column[a]
        reg = params.gamma(a_i)
        for a in range(a_i):
            lin = [0] * n_v
            lin[offsets[i] + a] = 1
            grads[a][tuple(lin)] = grads[a].get(tuple(lin), 0.0) - reg
        for a in range(a_i - 1):
            row: dict = {}
            for b in range(a_i):
                w = (1.0 if a == b else 0.0) - 1.0 / a_i
                for mono, c in grads[b].items():
                    row[mono] = row.get(mono, 0.0) + w * c
            polys.append(Polynomial.from_dict(n_v, row))
            kinds.append("gradient")
        simplex = {}
        for a in range(a_i):
            mono = [0] * n_v
            mono[offsets[i] + a] = k
            simplex[tuple(mono)] = 1.0
        simplex[(0,) * n_v] = -1.0
        polys.append(Polynomial.from_dict(n_v, simplex))
        kinds.append("simplex")
    return PolynomialSystem(tuple(polys), tuple(counts), params, tuple(kinds), tuple(flags))


def split_by_player(values, action_counts) -> list[np.ndarray]:
    values = np.asarray(values)
    bounds = np.cumsum(action_counts)[:-1]
    return [np.array(part) for part in np.split(values, bounds)]


def recover_strategy(v, system: PolynomialSystem, neg_tol: float = NEG_TOL) -> list[np.ndarray]:
    """Map substituted variables back to probabilities, ``x = v ** tau_inv``.

    Entries slightly below zero are clamped; anything below ``-neg_tol`` is rejected.
    The result is not renormalized.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (system.n_v,):
        raise ValueError(f"expected {system.n_v} values, got shape {v.shape}")
    if np.any(v < -neg_tol):
        raise NegativeRootError(f"negative coordinate in candidate root: {v.min():.3g}")
    v = np.clip(v, 0.0, None)
    return split_by_player(v ** system.params.tau_inv, system.action_counts)


def system_residual(system: PolynomialSystem, v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (system.n_v,):
        raise ValueError(f"expected {system.n_v} values, got shape {v.shape}")
    return np.array([eval_poly(p, v) for p in system.polys])


def residual_via_gradients(game: Game, system: PolynomialSystem, v) -> np.ndarray:
    """Same residual as ``system_residual`` computed through game gradients."""
    v = np.asarray(v, dtype=float)
    k = system.params.tau_inv
    parts = split_by_player(v, system.action_counts)
    powered = [p ** k for p in parts]
    out = []
    for i, vi in enumerate(parts):
        g = gradient(game, powered, i) - system.params.gamma(vi.size) * vi
        out.extend(project_tangent(g)[:-1])
        out.append(powered[i].sum() - 1.0)
    return np.array(out)
