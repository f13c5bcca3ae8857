import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import random_symmetric
from qae.anneal import brute_force_minimum
from qae.ci import CiHamiltonian
from qae.encoding import EncodingConfig, QuboProblem, build_qubo, decode, encode, functional
from qae.errors import DegenerateError, DomainError
from qae.refine import (rayleigh_energy, refine, steepest_descent, steepest_descent_encoded)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 16))
def test_descent_never_increases_energy(seed, n):
    rng = np.random.default_rng(seed)
    q = QuboProblem.from_matrix(rng.uniform(-1, 1, (n, n)))
    start = rng.integers(0, 2, n)
    out = steepest_descent(q, start)
    assert q.energy(out.bits) <= q.energy(start) + 1e-12
    # the result is a single-flip local minimum
    for u in range(n):
        flipped = out.bits.copy()
        flipped[u] ^= 1
        assert q.energy(flipped) >= q.energy(out.bits) - 1e-12


def test_descent_from_optimum_is_identity(rng):
    q = QuboProblem.from_matrix(rng.uniform(-1, 1, (12, 12)))
    x, _ = brute_force_minimum(q)
    out = steepest_descent(q, x)
    assert out.flips == 0
    np.testing.assert_array_equal(out.bits, x)


def test_descent_shape_check():
    with pytest.raises(DomainError):
        steepest_descent(QuboProblem(np.zeros(3), np.zeros((3, 3))), [0, 1])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 5), k=st.integers(2, 6))
def test_encoded_descent_walks_like_generic_descent(seed, n, k):
    rng = np.random.default_rng(seed)
    h = random_symmetric(n, rng)
    lam = rng.uniform(-3, 1)
    cfg = EncodingConfig(k)
    start = rng.integers(0, 2, n * k)
    a = steepest_descent(build_qubo(h, lam, cfg), start)
    b = steepest_descent_encoded(h, lam, cfg, start)
    q = build_qubo(h, lam, cfg)
    assert q.energy(b.bits) == pytest.approx(q.energy(a.bits), abs=1e-10)
    assert q.energy(b.bits) <= q.energy(start) + 1e-12


def test_encoded_descent_shape_check(rng):
    with pytest.raises(DomainError):
        steepest_descent_encoded(random_symmetric(2, rng), 0.0, EncodingConfig(3), np.zeros(5))


def test_rayleigh_quotient():
    h = CiHamiltonian(np.array([[-0.8, 0.6], [0.6, 0.8]]), scalar_offset=0.5)
    assert rayleigh_energy([3.0, -1.0], h) == pytest.approx(-0.5)
    assert rayleigh_energy([3.0, -1.0], h, offset=0.0) == pytest.approx(-1.0)
    assert rayleigh_energy([1.0, 0.0], h.matrix) == pytest.approx(-0.8)
    with pytest.raises(DegenerateError):
        rayleigh_energy([0.0, 0.0], h)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 8))
def test_rayleigh_quotient_is_bounded_by_spectrum(seed, n):
    rng = np.random.default_rng(seed)
    h = random_symmetric(n, rng)
    c = rng.normal(size=n)
    w = np.linalg.eigvalsh(h)
    e = rayleigh_energy(c, h)
    assert w[0] - 1e-12 <= e <= w[-1] + 1e-12


def test_refine_reports_consistent_fields(rng):
    h = CiHamiltonian(random_symmetric(4, rng), scalar_offset=-1.0)
    w, v = np.linalg.eigh(h.matrix)
    cfg = EncodingConfig(8)
    lam = w[0] + 0.05
    start = encode(0.5 * v[:, 0], 8)
    res = refine(h, lam, cfg, start)
    np.testing.assert_array_equal(res.coefficients, decode(res.bits, 8))
    assert res.xi_value == pytest.approx(functional(res.coefficients, h, lam))
    assert res.xi_value <= functional(decode(start, 8), h, lam) + 1e-12
    assert res.rayleigh_energy >= w[0] + h.scalar_offset - 1e-12


def test_refine_zero_vector_is_degenerate():
    # lambda below every eigenvalue makes xi positive definite: the minimum is c = 0
    h = np.eye(2)
    with pytest.raises(DegenerateError):
        refine(h, 0.5, EncodingConfig(4), encode([0.5, 0.25], 4))


def test_single_flips_cannot_cross_zero():
    # xi = 0.5 c^2 pulls c to 0, but from below the walk stops one grid step
    # short: reaching 0 needs the sign bit and every fraction bit flipped at once
    res = steepest_descent_encoded(np.eye(1), 0.5, EncodingConfig(4), encode([-0.25], 4))
    assert decode(res.bits, 4)[0] == -0.125
