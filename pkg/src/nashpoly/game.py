"""Normal-form games, Tsallis-regularized gradients and exploitability."""

from __future__ import annotations

import json
import math
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

SIMPLEX_TOL = 1e-8


class GameError(ValueError):
    pass


@dataclass(frozen=True)
class Game:
    """N payoff tensors over a joint finite action space.

    ``payoffs[i][a_1, ..., a_N]`` is player ``i``'s utility for the joint action.
    """

    payoffs: tuple[np.ndarray, ...]
    degenerate: bool = False

    def __post_init__(self):
        tensors = tuple(np.asarray(u, dtype=float) for u in self.payoffs)
        if not tensors:
            raise GameError("a game needs at least one player")
        shape = tensors[0].shape
        if len(shape) != len(tensors):
            raise GameError(f"{len(tensors)} players but payoff tensors have {len(shape)} axes")
        for u in tensors:
            if u.shape != shape:
                raise GameError(f"payoff tensor shapes differ: {u.shape} vs {shape}")
            if min(shape) < 1:
                raise GameError("every player needs at least one action")
            u.setflags(write=False)
        object.__setattr__(self, "payoffs", tensors)

    @property
    def num_players(self) -> int:
        return len(self.payoffs)

    @property
    def action_counts(self) -> tuple[int, ...]:
        return self.payoffs[0].shape

    def to_dict(self) -> dict:
        return {
            "num_players": self.num_players,
            "action_counts": list(self.action_counts),
            "payoffs": [u.ravel(order="C").tolist() for u in self.payoffs],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Game":
        counts = tuple(int(a) for a in data["action_counts"])
        if int(data["num_players"]) != len(counts):
            raise GameError("num_players does not match action_counts")
        flat = data["payoffs"]
        if len(flat) != len(counts):
            raise GameError("need one payoff list per player")
        tensors = []
        for p in flat:
            arr = np.asarray(p, dtype=float)
            if arr.size != math.prod(counts):
                raise GameError(f"payoff list has {arr.size} entries, expected {math.prod(counts)}")
            # last player's action varies fastest == C order
            tensors.append(arr.reshape(counts))
        return cls(tuple(tensors))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: str | Path) -> "Game":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class TsallisParams:
    """Regularization strength: ``tau = 1 / tau_inv`` and ``gamma_i = gamma_tilde * |A_i|``."""

    tau_inv: int = 3
    gamma_tilde: float = 0.25

    def __post_init__(self):
        if int(self.tau_inv) != self.tau_inv or self.tau_inv < 1:
            raise ValueError(f"tau_inv must be a positive integer, got {self.tau_inv}")
        if not 0.0 < self.gamma_tilde <= 1.0:
            raise ValueError(f"gamma_tilde must lie in (0, 1], got {self.gamma_tilde}")

    @property
    def tau(self) -> float:
        return 1.0 / self.tau_inv

    def gamma(self, num_actions: int) -> float:
        return self.gamma_tilde * num_actions


Profile = list  # list[np.ndarray], one simplex vector per player


def as_profile(strategies: Sequence[Sequence[float]]) -> list[np.ndarray]:
    return [np.asarray(x, dtype=float) for x in strategies]


def uniform_profile(game: Game) -> list[np.ndarray]:
    return [np.full(a, 1.0 / a) for a in game.action_counts]


def check_profile(game: Game, profile, tol: float = SIMPLEX_TOL) -> list[np.ndarray]:
    profile = as_profile(profile)
    if len(profile) != game.num_players:
        raise GameError(f"profile has {len(profile)} strategies for {game.num_players} players")
    for i, (x, a) in enumerate(zip(profile, game.action_counts)):
        if x.shape != (a,):
            raise GameError(f"player {i} strategy has shape {x.shape}, expected ({a},)")
        if np.any(x < -tol) or abs(x.sum() - 1.0) > tol:
            raise GameError(f"player {i} strategy is off the simplex: {x}")
    return profile


def _check_player(game: Game, player: int) -> None:
    if not 0 <= player < game.num_players:
        raise GameError(f"player index {player} out of range for {game.num_players} players")


def _contract(tensor: np.ndarray, vectors: Sequence[np.ndarray | None]) -> np.ndarray:
    # einsum over every axis whose vector is given; the remaining axes stay free
    letters = string.ascii_letters[: tensor.ndim]
    operands, subs = [tensor], [letters]
    out = ""
    for ax, v in enumerate(vectors):
        if v is None:
            out += letters[ax]
        else:
            operands.append(v)
            subs.append(letters[ax])
    return np.einsum(",".join(subs) + "->" + out, *operands)


def expected_utility(game: Game, profile, player: int) -> float:
    _check_player(game, player)
    profile = check_profile(game, profile, tol=np.inf)
    return float(_contract(game.payoffs[player], profile))


def gradient(game: Game, profile, player: int) -> np.ndarray:
    """Payoff tensor of ``player`` contracted with every opponent strategy."""
    _check_player(game, player)
    profile = check_profile(game, profile, tol=np.inf)
    vectors = list(profile)
    vectors[player] = None
    return _contract(game.payoffs[player], vectors)


def project_tangent(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.size == 0:
        raise ValueError("cannot project an empty vector")
    return g - g.mean()


def tsallis_entropy(x, tau: float, gamma: float, tol: float = SIMPLEX_TOL) -> float:
    x = np.asarray(x, dtype=float)
    if np.any(x < -tol) or abs(x.sum() - 1.0) > tol:
        raise GameError(f"strategy is off the simplex: {x}")
    x = np.clip(x, 0.0, None)
    return gamma / (tau + 1.0) * (1.0 - np.sum(x ** (tau + 1.0)))


def tsallis_gradient(game: Game, profile, player: int, params: TsallisParams,
                     gamma: float | None = None) -> np.ndarray:
    """Gradient of the regularized utility, ``grad - gamma * x_i**tau``.

    ``gamma`` overrides the ``gamma_tilde * |A_i|`` weight when given.
    """
    profile = check_profile(game, profile, tol=np.inf)
    x = profile[player]
    if np.any(x <= 0):
        raise GameError(f"player {player} strategy must be strictly positive: {x}")
    if gamma is None:
        gamma = params.gamma(x.size)
    return gradient(game, profile, player) - gamma * x ** params.tau


def tsallis_best_response(game: Game, profile, player: int, tau: float) -> np.ndarray:
    return best_response_from_gradient(gradient(game, profile, player), tau)


def best_response_from_gradient(grad, tau: float) -> np.ndarray:
    grad = np.asarray(grad, dtype=float)
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if np.any(grad <= 0):
        raise GameError(f"best response needs a strictly positive gradient, got {grad}")
    # scale by the max before powering so small tau does not underflow
    w = (grad / grad.max()) ** (1.0 / tau)
    return w / w.sum()


def exploitability(game: Game, profile) -> tuple[np.ndarray, float]:
    """Per-player gain from a best deviation, and the max over players."""
    profile = check_profile(game, profile, tol=np.inf)
    eps = np.empty(game.num_players)
    for i in range(game.num_players):
        g = gradient(game, profile, i)
        eps[i] = g.max() - g @ profile[i]
    return eps, float(eps.max())


def exploitability_bound(game: Game, profile, params: TsallisParams
                         ) -> tuple[float, float, np.ndarray, np.ndarray]:
    """Upper bounds on each player's exploitability from the regularized game.

    Returns ``(tight, loose, tight_per_player, loose_per_player)``. The tight
    bound uses the measured entropies; the loose one replaces them by
    ``tau * |A_i| * ln|A_i|``.
    """
    profile = check_profile(game, profile, tol=1e-6)
    tau = params.tau
    tight = np.empty(game.num_players)
    loose = np.empty(game.num_players)
    for i, x in enumerate(profile):
        if np.any(x <= 0):
            raise GameError(f"bound needs an interior profile; player {i} has {x}")
        a = x.size
        gamma = params.gamma(a)
        grad_norm = math.sqrt(2.0) * np.linalg.norm(
            project_tangent(tsallis_gradient(game, profile, i, params)))
        br = tsallis_best_response(game, profile, i, tau)
        tight[i] = (tsallis_entropy(x, tau, gamma, tol=1e-6)
                    + tau * tsallis_entropy(br, tau, gamma) + grad_norm)
        loose[i] = tau * a * math.log(a) + grad_norm
    return float(tight.max()), float(loose.max()), tight, loose


def tau_for_target_epsilon(num_actions: int, epsilon: float) -> float:
    """Largest tau for which ``|A|(1 - |A|**-tau) <= epsilon``."""
    if not 0.0 <= epsilon < num_actions:
        raise ValueError(f"epsilon must lie in [0, {num_actions}), got {epsilon}")
    return 1.0 - math.log(num_actions - epsilon) / math.log(num_actions)


def normalize_payoffs(game: Game, lo: float = 0.001, hi: float = 1.0) -> Game:
    """Affine rescale of all payoffs jointly so that the global range is ``[lo, hi]``.

    A constant game cannot be rescaled; it comes back with every entry at
    ``hi`` and ``degenerate=True``.
    """
    stacked = np.stack(game.payoffs)
    pmin, pmax = stacked.min(), stacked.max()
    if pmax - pmin <= 0:
        return Game(tuple(np.full_like(u, hi) for u in game.payoffs), degenerate=True)
    scale = (hi - lo) / (pmax - pmin)
    return Game(tuple(lo + (u - pmin) * scale for u in game.payoffs))


def _two_player(u1, u2) -> Game:
    return Game((np.array(u1, dtype=float), np.array(u2, dtype=float)))


def make_chicken() -> Game:
    # action 0 = swerve, action 1 = go straight
    return _two_player([[0.7527, 0.505], [1.0, 0.01]],
                       [[0.7527, 1.0], [0.505, 0.01]])


def make_bach_stravinsky(printed: bool = False) -> Game:
    """Battle of the sexes: player 1 prefers (0, 0), player 2 prefers (1, 1).

    ``printed=True`` gives the symmetric-payoff variant in which player 2 has
    no preference, kept only for comparison.
    """
    u2 = [[0.67, 0.01], [0.01, 0.67]] if printed else [[0.67, 0.01], [0.01, 1.0]]
    return _two_player([[1.0, 0.01], [0.01, 0.67]], u2)


def make_stag_hunt() -> Game:
    return _two_player([[1.0, 0.01], [0.67, 0.67]],
                       [[1.0, 0.67], [0.01, 0.67]])


BUILTIN_GAMES = {
    "chicken": make_chicken,
    "bach_stravinsky": make_bach_stravinsky,
    "stag_hunt": make_stag_hunt,
}


def random_game(action_counts: Sequence[int], seed: int | np.random.Generator | None = None
                ) -> Game:
    rng = np.random.default_rng(seed)
    shape = tuple(int(a) for a in action_counts)
    return normalize_payoffs(Game(tuple(rng.uniform(size=shape) for _ in shape)))


def gumbel_br_check(game: Game, profile, player: int, tau: float, num_samples: int,
                    seed: int | None = None, chunk: int = 250_000) -> float:
    """Total-variation distance between Gumbel-perturbed argmax frequencies and BR^tau.

    Samples ``argmax_l(tau * g_l + log grad_l)`` with ``g ~ Gumbel(0, 1)``
    drawn by inverse CDF.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")
    grad = gradient(game, profile, player)
    br = best_response_from_gradient(grad, tau)
    log_grad = np.log(grad)
    rng = np.random.default_rng(seed)
    counts = np.zeros(grad.size)
    remaining = num_samples
    while remaining > 0:
        n = min(chunk, remaining)
        u = rng.uniform(size=(n, grad.size))
        g = -np.log(-np.log(u))
        winners = np.argmax(tau * g + log_grad, axis=1)
        counts += np.bincount(winners, minlength=grad.size)
        remaining -= n
    return 0.5 * float(np.abs(counts / num_samples - br).sum())


def regularized_best_response(grad, tau: float, gamma: float, iters: int = 200) -> np.ndarray:
    """Maximizer of ``<grad, x> + H^tau(x)`` over the simplex for an arbitrary weight ``gamma``.

    Stationarity gives ``x_l = max(grad_l - c, 0) ** (1/tau) / gamma ** (1/tau)``;
    the offset ``c`` is found by bisection on the simplex constraint.
    """
    grad = np.asarray(grad, dtype=float)
    lo, hi = grad.min() - gamma, grad.max()  # mass >= 1 at lo, 0 at hi

    def mass(c):
        return np.sum((np.clip(grad - c, 0.0, None) / gamma) ** (1.0 / tau))

    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mass(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    x = (np.clip(grad - 0.5 * (lo + hi), 0.0, None) / gamma) ** (1.0 / tau)
    return x / x.sum()


def regularized_exploitability(game: Game, profile, params: TsallisParams) -> tuple[np.ndarray, float]:
    """Exploitability in the game whose utilities carry the Tsallis bonus."""
    profile = check_profile(game, profile, tol=np.inf)
    tau = params.tau
    eps = np.empty(game.num_players)
    for i, x in enumerate(profile):
        g = gradient(game, profile, i)
        gamma = params.gamma(x.size)
        br = regularized_best_response(g, tau, gamma)
        x = np.clip(x, 0.0, None)
        value = lambda y: g @ y + gamma / (tau + 1.0) * (1.0 - np.sum(y ** (tau + 1.0)))
        eps[i] = max(value(br) - value(x), 0.0)
    return eps, float(eps.max())
