"""Sparse multivariate polynomials over a graded-lexicographic monomial basis."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from math import comb
from typing import Iterable, Mapping

import numpy as np

PRUNE_TOL = 1e-14
BASIS_CAP = 10**8


class BasisTooLarge(MemoryError):
    pass


Monomial = tuple  # tuple[int, ...] of exponents


@dataclass(frozen=True)
class Polynomial:
    """A polynomial in ``n_v`` variables stored as ``{exponents: coefficient}``."""

    n_v: int
    terms: tuple[tuple[Monomial, float], ...]

    @classmethod
    def from_dict(cls, n_v: int, terms: Mapping[Monomial, float]) -> "Polynomial":
        merged: dict[Monomial, float] = {}
        for mono, c in terms.items():
            mono = tuple(int(d) for d in mono)
            if len(mono) != n_v or min(mono, default=0) < 0:
                raise ValueError(f"bad monomial {mono} for {n_v} variables")
            merged[mono] = merged.get(mono, 0.0) + float(c)
        kept = tuple((m, c) for m, c in merged.items() if abs(c) > PRUNE_TOL)
        return cls(n_v, kept)

    @classmethod
    def from_terms(cls, n_v: int, terms: Iterable[tuple[float, Monomial]]) -> "Polynomial":
        acc: dict[Monomial, float] = {}
        for c, mono in terms:
            mono = tuple(int(d) for d in mono)
            acc[mono] = acc.get(mono, 0.0) + float(c)
        return cls.from_dict(n_v, acc)

    @property
    def degree(self) -> int:
        return max((sum(m) for m, _ in self.terms), default=0)

    @property
    def exponents(self) -> np.ndarray:
        return np.array([m for m, _ in self.terms], dtype=np.int64).reshape(-1, self.n_v)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.terms], dtype=float)

    def __len__(self) -> int:
        return len(self.terms)

    def to_json(self) -> list[dict]:
        return [{"coeff": c, "exponents": list(m)} for m, c in self.terms]

    @classmethod
    def from_json(cls, n_v: int, data: list[dict]) -> "Polynomial":
        return cls.from_terms(n_v, ((d["coeff"], tuple(d["exponents"])) for d in data))


def eval_poly(p: Polynomial, v) -> float:
    v = np.asarray(v)
    if v.shape != (p.n_v,):
        raise ValueError(f"expected {p.n_v} variables, got shape {v.shape}")
    if not p.terms:
        return 0.0
    return (p.coefficients * np.prod(v[None, :] ** p.exponents, axis=1)).sum()


def shift_poly(p: Polynomial, m: Monomial) -> Polynomial:
    m = tuple(m)
    if len(m) != p.n_v:
        raise ValueError(f"shift monomial {m} does not have {p.n_v} exponents")
    return Polynomial(p.n_v, tuple((tuple(a + b for a, b in zip(mono, m)), c)
                                   for mono, c in p.terms))


def dump_polys(polys: Iterable[Polynomial]) -> str:
    return json.dumps([p.to_json() for p in polys])


class MonomialOrdering:
    """All monomials of total degree <= ``max_degree``, graded then lexicographic.

    Index 0 is the constant monomial and indices ``1..n_v`` are ``v_1..v_{n_v}``.
    """

    def __init__(self, n_v: int, max_degree: int, cap: int = BASIS_CAP):
        if n_v < 1 or max_degree < 0:
            raise ValueError(f"need n_v >= 1 and max_degree >= 0, got {n_v}, {max_degree}")
        size = comb(max_degree + n_v, n_v)
        if size > cap:
            raise BasisTooLarge(f"{size} monomials exceeds the cap of {cap}")
        self.n_v = n_v
        self.max_degree = max_degree
        exps = np.zeros((size, n_v), dtype=np.int64)
        self.degree_offsets = [0]
        row = 0
        for deg in range(max_degree + 1):
            for combo in itertools.combinations_with_replacement(range(n_v), deg):
                for var in combo:
                    exps[row, var] += 1
                row += 1
            self.degree_offsets.append(row)
        self.exponents = exps
        self.exponents.setflags(write=False)
        self._base = max_degree + 1
        keys = self._keys(exps)
        self._order = np.argsort(keys)
        self._sorted_keys = keys[self._order]

    def __len__(self) -> int:
        return self.exponents.shape[0]

    def _keys(self, exps: np.ndarray) -> np.ndarray:
        weights = self._base ** np.arange(self.n_v, dtype=np.int64)
        return exps @ weights

    def index_array(self, exps) -> np.ndarray:
        """Column indices of a batch of exponent rows; -1 for monomials outside the basis."""
        exps = np.asarray(exps, dtype=np.int64).reshape(-1, self.n_v)
        ok = (exps.min(axis=1) >= 0) & (exps.sum(axis=1) <= self.max_degree)
        out = np.full(exps.shape[0], -1, dtype=np.int64)
        if ok.any():
            keys = self._keys(exps[ok])
            pos = np.searchsorted(self._sorted_keys, keys)
            out[ok] = self._order[pos]
        return out

    def index(self, mono: Monomial) -> int:
        idx = int(self.index_array([mono])[0])
        if idx < 0:
            raise KeyError(f"monomial {tuple(mono)} is not in the basis")
        return idx

    def monomial(self, idx: int) -> Monomial:
        return tuple(int(d) for d in self.exponents[idx])

    def degrees(self) -> np.ndarray:
        return self.exponents.sum(axis=1)

    def __repr__(self) -> str:
        return f"MonomialOrdering(n_v={self.n_v}, max_degree={self.max_degree}, size={len(self)})"


def monomial_basis(n_v: int, max_degree: int, cap: int = BASIS_CAP) -> MonomialOrdering:
    return MonomialOrdering(n_v, max_degree, cap=cap)


def vandermonde_vector(v, ordering: MonomialOrdering) -> np.ndarray:
    """All basis monomials evaluated at ``v`` (real or complex)."""
    v = np.asarray(v)
    if v.shape != (ordering.n_v,):
        raise ValueError(f"expected {ordering.n_v} variables, got shape {v.shape}")
    # build degree by degree: every degree-d monomial is a degree-(d-1) one times a variable
    psi = np.empty(len(ordering), dtype=np.result_type(v.dtype, float))
    psi[0] = 1.0
    exps = ordering.exponents
    for deg in range(1, ordering.max_degree + 1):
        lo, hi = ordering.degree_offsets[deg], ordering.degree_offsets[deg + 1]
        block = exps[lo:hi]
        first_var = np.argmax(block > 0, axis=1)
        parents = block.copy()
        parents[np.arange(hi - lo), first_var] -= 1
        psi[lo:hi] = psi[ordering.index_array(parents)] * v[first_var]
    return psi
