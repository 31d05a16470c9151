from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nashpoly.polynomial import (
    BasisTooLarge,
    Polynomial,
    eval_poly,
    monomial_basis,
    shift_poly,
    vandermonde_vector,
)


def test_merge_and_prune():
    p = Polynomial.from_terms(2, [(1.0, (1, 0)), (2.0, (1, 0)), (1e-16, (0, 1)), (-1.0, (0, 0))])
    assert dict(p.terms) == {(1, 0): 3.0, (0, 0): -1.0}
    assert p.degree == 1


def test_bad_monomial():
    with pytest.raises(ValueError):
        Polynomial.from_dict(2, {(1, 0, 0): 1.0})
    with pytest.raises(ValueError):
        Polynomial.from_dict(2, {(1, -1): 1.0})


def test_eval_and_shift():
    p = Polynomial.from_dict(2, {(2, 0): 1.0, (0, 1): -3.0, (0, 0): 0.5})
    assert eval_poly(p, np.array([2.0, 1.0])) == pytest.approx(1.5)
    q = shift_poly(p, (1, 1))
    assert eval_poly(q, np.array([2.0, 1.0])) == pytest.approx(3.0)
    assert q.degree == 4
    with pytest.raises(ValueError):
        eval_poly(p, np.array([1.0]))


def test_json_round_trip():
    p = Polynomial.from_dict(3, {(1, 0, 2): 0.25, (0, 0, 0): -1.0})
    q = Polynomial.from_json(3, p.to_json())
    assert dict(q.terms) == dict(p.terms)


def test_basis_sizes():
    assert len(monomial_basis(4, 9)) == comb(13, 4) == 715
    assert len(monomial_basis(3, 0)) == 1


def test_basis_order():
    b = monomial_basis(2, 2)
    assert [b.monomial(i) for i in range(len(b))] == [
        (0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert b.index((1, 1)) == 4
    with pytest.raises(KeyError):
        b.index((3, 0))
    assert b.index_array([(0, 3), (-1, 1), (0, 1)]).tolist() == [-1, -1, 2]


def test_basis_cap():
    with pytest.raises(BasisTooLarge):
        monomial_basis(20, 20, cap=10**6)


def test_vandermonde_example():
    b = monomial_basis(2, 2)
    np.testing.assert_array_equal(vandermonde_vector(np.array([2.0, 1.0]), b),
                                  [1, 2, 1, 4, 2, 1])


@given(st.integers(1, 4), st.integers(0, 5), st.integers(0, 2**31 - 1))
def test_vandermonde_matches_direct_powers(n_v, deg, seed):
    b = monomial_basis(n_v, deg)
    v = np.random.default_rng(seed).uniform(-1.5, 1.5, size=n_v)
    direct = np.prod(v[None, :] ** b.exponents, axis=1)
    np.testing.assert_allclose(vandermonde_vector(v, b), direct, rtol=1e-12, atol=1e-14)


@given(st.integers(1, 4), st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_vandermonde_shift_property(n_v, deg, seed):
    b = monomial_basis(n_v, deg)
    v = np.random.default_rng(seed).uniform(-1, 1, size=n_v)
    psi = vandermonde_vector(v, b)
    low = np.arange(b.degree_offsets[deg])
    for l in range(n_v):
        shifted = b.exponents[low].copy()
        shifted[:, l] += 1
        np.testing.assert_allclose(psi[b.index_array(shifted)], v[l] * psi[low], atol=1e-13)


def test_vandermonde_complex():
    b = monomial_basis(1, 3)
    np.testing.assert_allclose(vandermonde_vector(np.array([1j]), b), [1, 1j, -1, -1j])
