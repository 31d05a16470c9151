"""Macaulay matrices and the shift selectors used to read roots off their null space."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .mvp import PolynomialSystem
from .polynomial import BASIS_CAP, BasisTooLarge, MonomialOrdering, monomial_basis


def macaulay_degree_bound(system: PolynomialSystem) -> int:
    d_max = max(system.degrees)
    return max(d_max * system.n_e - system.n_v + 1, d_max)


def count_rows_cols(system: PolynomialSystem, degree: int | None = None,
                    cap: int = BASIS_CAP) -> tuple[int, int]:
    d = macaulay_degree_bound(system) if degree is None else degree
    n_v = system.n_v
    n_cols = comb(d + n_v, n_v)
    n_rows = sum(comb(d - d_e + n_v, n_v) for d_e in system.degrees if d_e <= d)
    if n_cols > cap or n_rows > cap:
        raise BasisTooLarge(f"Macaulay matrix {n_rows} x {n_cols} exceeds the cap of {cap}")
    return n_rows, n_cols


@dataclass(frozen=True)
class MacaulayMatrix:
    matrix: sp.csr_matrix
    ordering: MonomialOrdering
    degree: int
    row_equation: np.ndarray  # source equation per row
    row_shift: np.ndarray  # basis index of the shifting monomial per row

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    def rows(self, idx) -> np.ndarray:
        return self.matrix[idx].toarray()

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def export_coo(self, path: str | Path) -> None:
        coo = self.matrix.tocoo()
        with open(path, "w") as fh:
            fh.write(f"# {self.n_rows} {self.n_cols} {coo.nnz}\n")
            for r, c, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{r} {c} {v!r}\n")


def build_macaulay(system: PolynomialSystem, degree: int | None = None,
                   cap: int = BASIS_CAP) -> MacaulayMatrix:
    """Stack every seed polynomial times every monomial that keeps it within ``degree``."""
    d = macaulay_degree_bound(system) if degree is None else degree
    n_rows, n_cols = count_rows_cols(system, d, cap=cap)
    ordering = monomial_basis(system.n_v, d, cap=cap)
    rows, cols, vals, eqs, shifts = [], [], [], [], []
    offset = 0
    for e, p in enumerate(system.polys):
        if p.degree > d:
            continue
        n_shift = ordering.degree_offsets[d - p.degree + 1]
        shift_exps = ordering.exponents[:n_shift]
        exps, coefs = p.exponents, p.coefficients
        # (n_shift, n_terms) column indices of the shifted terms
        target = ordering.index_array((shift_exps[:, None, :] + exps[None, :, :]).reshape(-1, system.n_v))
        target = target.reshape(n_shift, len(p))
        rows.append(np.repeat(np.arange(offset, offset + n_shift), len(p)))
        cols.append(target.ravel())
        vals.append(np.tile(coefs, n_shift))
        eqs.append(np.full(n_shift, e))
        shifts.append(np.arange(n_shift))
        offset += n_shift
    assert offset == n_rows
    mat = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                        shape=(n_rows, n_cols))
    return MacaulayMatrix(mat, ordering, d, np.concatenate(eqs), np.concatenate(shifts))


@dataclass(frozen=True)
class ShiftSelectors:
    """Row ``j`` pairs monomial ``s1_indices[j]`` with its product by ``v_l``."""

    s1_indices: np.ndarray
    svl_indices: np.ndarray
    shift_variable: int

    def __len__(self) -> int:
        return self.s1_indices.size


def build_shift_selectors(ordering: MonomialOrdering, null_dim: int, variable: int = 0,
                          extra_rows: int = 16, max_rows: int | None = None) -> ShiftSelectors:
    """Pair every monomial of degree below the basis maximum with its ``v_l`` multiple.

    All eligible monomials are used unless ``max_rows`` truncates them (graded
    order is kept, never below ``null_dim + extra_rows``). Fewer than
    ``null_dim`` eligible monomials cannot satisfy the rank condition.
    """
    if not 0 <= variable < ordering.n_v:
        raise ValueError(f"shift variable {variable} out of range for {ordering.n_v} variables")
    eligible = ordering.degree_offsets[ordering.max_degree]
    if eligible < null_dim:
        raise ValueError(f"only {eligible} shiftable monomials for a {null_dim}-dim null space")
    count = eligible if max_rows is None else min(eligible, max(max_rows, null_dim + extra_rows))
    s1 = np.arange(count)
    shifted = ordering.exponents[s1].copy()
    shifted[:, variable] += 1
    svl = ordering.index_array(shifted)
    return ShiftSelectors(s1, svl, variable)
