from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from residue_index.circle import (
    CircleSymbol,
    NotStabilized,
    TrigPolynomial,
    VanishingSymbol,
    argument_principle_winding,
    estimate_order,
    fredholm_index,
    hardy_projection,
    log_commutator_symbol,
    multiplication,
    quantize,
    random_nonvanishing,
    random_symbol,
    star_compose,
    toeplitz,
    toeplitz_symbol,
    winding_number,
    wodzicki_residue,
)
from residue_index.radul import delta_matrix
from residue_index.zeta import circle_model

T = TrigPolynomial


# -- trig polynomials ------------------------------------------------------


def test_trig_evaluation_and_algebra():
    u = T.from_dict({-1: 2.0, 0: 1.0, 2: 1j})
    t = np.linspace(0, 2 * np.pi, 7)
    direct = 2 * np.exp(-1j * t) + 1 + 1j * np.exp(2j * t)
    assert np.allclose(u(t), direct)
    v = T.from_dict({1: 3.0})
    assert np.allclose((u * v)(t), u(t) * v(t))
    assert np.allclose((u + v)(t), u(t) + v(t))
    assert np.allclose(u.derivative()(t), -2j * np.exp(-1j * t) - 2 * np.exp(2j * t))


def test_trig_reciprocal():
    u = T.from_dict({0: 2.0, 1: 1.0})
    inv = u.reciprocal()
    t = np.linspace(0, 2 * np.pi, 101)
    assert np.max(np.abs(u(t) * inv(t) - 1)) < 1e-13
    with pytest.raises(VanishingSymbol):
        T.from_dict({1: 0.5, -1: 0.5}).reciprocal()


def test_trig_from_samples_roundtrip():
    u = T.from_dict({-2: 1.0, 0: 0.5, 3: -2j})
    t = 2 * np.pi * np.arange(32) / 32
    assert np.allclose(T.from_samples(u(t)).padded(3), u.padded(3))


# -- quantization ----------------------------------------------------------


def test_quantize_identity():
    op = quantize(CircleSymbol.homogeneous(0, 1.0), 8)
    assert np.array_equal(op.matrix, np.eye(17))


def test_quantize_multiplication_is_shift():
    op = quantize(CircleSymbol.multiplication(T.mode(1)), 8)
    expected = np.eye(17, k=-1)  # entry (n+1, n) = 1
    assert np.array_equal(op.matrix, expected)


def test_quantize_xi_is_diag_n():
    op = quantize(CircleSymbol.xi(), 8)
    modes = np.arange(-8, 9)
    # the zero column reads the plus sheet at |n| = 1
    expected = np.where(modes == 0, 1, modes)
    assert np.array_equal(np.diag(op.matrix), expected)


def test_quantize_multiplication_matches_fourier_product():
    rng = np.random.default_rng(0)
    u = T(rng.normal(size=5) + 1j * rng.normal(size=5))
    N = 12
    f = np.zeros(2 * N + 1, dtype=complex)
    f[N - 3: N + 4] = rng.normal(size=7)
    g = multiplication(u, N).matrix @ f
    # product of Fourier series computed directly by convolution
    conv = np.convolve(u.coeffs, f)
    assert np.allclose(g, conv[2: 2 + 2 * N + 1])


def test_quantize_requires_large_truncation():
    with pytest.raises(ValueError):
        quantize(CircleSymbol.multiplication(T.mode(5)), 5)


# -- composition -----------------------------------------------------------


def test_star_identity():
    b = random_symbol(np.random.default_rng(1), 1, depth=2)
    one = CircleSymbol.homogeneous(0, 1.0)
    c = star_compose(one, b, 2)
    for j in range(3):
        for s in (1, -1):
            assert np.allclose(c.component(j, s).padded(3), b.component(j, s).padded(3))


def test_star_xi_u_commutator_is_derivative():
    u = T.from_dict({-1: 0.3, 0: 1.0, 2: 0.5j})
    a, b = CircleSymbol.xi(), CircleSymbol.multiplication(u)
    comm = star_compose(a, b, 1) - star_compose(b, a, 1)
    # order-1 part cancels, order-0 part is (1/i) u'
    for s in (1, -1):
        assert np.allclose(comm.homogeneous_part(1, s).padded(3), 0)
        assert np.allclose(comm.homogeneous_part(0, s).padded(3), (u.derivative() * (-1j)).padded(3))
    # matrix oracle: [D, u] = (1/i) u' exactly, with D = diag(n)
    N = 40
    D = np.diag(np.arange(-N, N + 1)).astype(complex)
    U = multiplication(u, N).matrix
    lhs = D @ U - U @ D
    rhs = multiplication(u.derivative() * (-1j), N).matrix
    inner = slice(4, 2 * N - 3)
    assert np.allclose(lhs[inner, inner], rhs[inner, inner])


@pytest.mark.parametrize("seed", range(20))
def test_star_matches_matrix_product_mod_lower_order(seed):
    rng = np.random.default_rng(100 + seed)
    ma, mb = rng.integers(-1, 2, size=2)
    a, b = random_symbol(rng, int(ma), depth=2), random_symbol(rng, int(mb), depth=2)
    depth = 2
    N = 128
    diff = quantize(star_compose(a, b, depth), N) - quantize(a, N) @ quantize(b, N)
    # compare only interior columns, where truncation plays no role
    inner = CircleOperatorView(diff, margin=16)
    assert estimate_order(inner, floor=1e-13) <= ma + mb - depth - 0.5


def CircleOperatorView(op, margin):
    M = op.matrix.copy()
    M[:margin, :] = 0
    M[-margin:, :] = 0
    return type(op)(op.N, M, None, op.bandwidth)


def test_adjoint_of_real_symbol_is_conjugate_mod_lower_order():
    rng = np.random.default_rng(7)
    c = rng.normal(size=5) + 1j * rng.normal(size=5)
    u = T(c)
    a = CircleSymbol(1, ((u, u), (u * 0.5, u * 0.5)))
    a_conj = CircleSymbol(1, ((u.conj(), u.conj()), (u.conj() * 0.5, u.conj() * 0.5)))
    N = 128
    diff = quantize(a, N).adjoint() - quantize(a_conj, N)
    assert estimate_order(CircleOperatorView(diff, 8), floor=1e-13) <= 0.1


# -- Hardy space and Toeplitz ---------------------------------------------


def test_hardy_projection():
    P = hardy_projection(1).matrix
    assert np.array_equal(np.diag(P), [0, 1, 1])
    P = hardy_projection(16).matrix
    assert np.array_equal(P @ P, P)
    assert np.array_equal(P, P.conj().T)


def test_toeplitz_constant_and_shift():
    op = toeplitz(T.constant(1.0), 8)
    assert np.array_equal(np.diag(op.matrix), np.where(np.arange(-8, 9) >= 0, 1, -1))
    sh = toeplitz(T.mode(1), 8).matrix
    hardy = sh[8:, 8:]
    assert np.array_equal(hardy, np.eye(9, k=-1))


def test_toeplitz_rejects_bad_input():
    with pytest.raises(VanishingSymbol):
        toeplitz(T.from_dict({1: 0.5, -1: 0.5}), 32)
    with pytest.raises(ValueError):
        toeplitz(T.from_dict({0: 3.0, 3: 1.0}), 12)


def test_toeplitz_symbol_sheets():
    u = T.from_dict({0: 2.0, 1: 1.0})
    a = toeplitz_symbol(u)
    assert a.component(0, 1) == u
    assert a.component(0, -1).coeff(0) == -1


@pytest.mark.parametrize("seed", range(5))
def test_toeplitz_semicommutator_is_lower_order(seed):
    # T_u T_v - T_uv equals 2(1-P) plus an operator of order <= -1; the
    # 2(1-P) part comes from the -(1-P) convention on the negative modes
    rng = np.random.default_rng(seed)
    u, v = random_nonvanishing(rng, 3), random_nonvanishing(rng, 3)
    N = 256
    P = hardy_projection(N).matrix
    diff = toeplitz(u, N).matrix @ toeplitz(v, N).matrix - toeplitz(u * v, N).matrix - 2 * (np.eye(2 * N + 1) - P)
    op = CircleOperatorView(type(toeplitz(u, N))(N, diff, None, 6), 24)
    assert estimate_order(op, floor=1e-12) <= -1


# -- winding and index -----------------------------------------------------


def test_winding_examples():
    assert winding_number(T.mode(3)) == 3
    assert winding_number(T.mode(-2)) == -2
    assert winding_number(T.from_dict({0: 2.0, 1: 1.0})) == 0
    with pytest.raises(VanishingSymbol):
        winding_number(T.from_dict({0: 1.0, 1: 1.0}))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_winding_additive(s1, s2):
    u = random_nonvanishing(np.random.default_rng(s1), 3)
    v = random_nonvanishing(np.random.default_rng(s2), 2)
    assert winding_number(u * v) == winding_number(u) + winding_number(v)


@pytest.mark.parametrize("seed", range(10))
def test_winding_matches_zero_count(seed):
    u = random_nonvanishing(np.random.default_rng(seed), 3)
    assert winding_number(u) == argument_principle_winding(u)


def test_index_examples():
    assert fredholm_index(toeplitz(T.mode(1), 64)) == -1
    assert fredholm_index(toeplitz(T.constant(1.0), 64)) == 0


@pytest.mark.parametrize("seed", range(8))
def test_index_is_minus_winding(seed):
    u = random_nonvanishing(np.random.default_rng(50 + seed), 3)
    assert fredholm_index(toeplitz(u, 128)) == -argument_principle_winding(u)


def test_index_instability_is_reported():
    # a kernel vector supported exactly where the two interior blocks differ
    N = 40
    M = np.eye(2 * N + 1, dtype=complex)
    M[N + 33, N + 33] = 0
    M[N + 33, 2 * N] = 1
    from residue_index.circle import CircleOperator

    with pytest.raises(NotStabilized):
        fredholm_index(CircleOperator(N, M, 0.0, 0), interior_margin=4)


# -- order estimation ------------------------------------------------------


def test_order_examples():
    N = 256
    assert estimate_order(quantize(CircleSymbol.homogeneous(0, 1.0), N)) == pytest.approx(0, abs=0.05)
    assert estimate_order(quantize(CircleSymbol.xi(), N)) == pytest.approx(1, abs=0.1)
    assert estimate_order(hardy_projection(N)) == pytest.approx(0, abs=0.05)
    zero = quantize(CircleSymbol.zero(), 64)
    assert estimate_order(zero) == -np.inf


@pytest.mark.parametrize("m", [-2, -1, 0, 1, 2])
def test_order_recovery(m):
    a = random_symbol(np.random.default_rng(m + 10), m, depth=2)
    assert estimate_order(quantize(a, 256)) == pytest.approx(m, abs=0.1)


# -- log commutator and residue -------------------------------------------


def test_log_commutator_of_constant_vanishes():
    d = log_commutator_symbol(CircleSymbol.homogeneous(2, 3.0, -1.0), 3)
    for j in range(4):
        for s in (1, -1):
            assert np.allclose(d.component(j, s).padded(0), 0)


def test_log_commutator_leading_term():
    u = T.from_dict({-2: 1.0, 1: 0.5j})
    d = log_commutator_symbol(CircleSymbol.multiplication(u), 2)
    assert d.order == -1
    du_over_i = u.derivative() * (-1j)
    assert np.allclose(d.component(0, 1).padded(2), du_over_i.padded(2))
    assert np.allclose(d.component(0, -1).padded(2), (-du_over_i).padded(2))


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_log_commutator_matches_eigenbasis_commutator(depth):
    rng = np.random.default_rng(depth)
    a = random_symbol(rng, 0, depth=0, degree=2)
    N = 256
    exact = delta_matrix(quantize(a, N), circle_model(N), 1)
    approx = quantize(log_commutator_symbol(a, depth), N)
    diff = CircleOperatorView(exact - approx, 8)
    assert estimate_order(diff, floor=1e-13) <= a.order - depth - 1 + 0.1


def test_wodzicki_examples():
    c = 0.7 - 0.2j
    assert wodzicki_residue(CircleSymbol.homogeneous(-1, c)) == pytest.approx(2 * c)
    assert wodzicki_residue(CircleSymbol.homogeneous(0, 1.0)) == 0
    assert wodzicki_residue(CircleSymbol.homogeneous(-1, T.mode(1), 0.0)) == 0


@pytest.mark.parametrize("seed", range(20))
def test_wodzicki_residue_is_a_trace(seed):
    rng = np.random.default_rng(200 + seed)
    ma, mb = rng.integers(-1, 2, size=2)
    a, b = random_symbol(rng, int(ma), depth=4), random_symbol(rng, int(mb), depth=4)
    comm = star_compose(a, b, 4) - star_compose(b, a, 4)
    assert abs(wodzicki_residue(comm)) <= 1e-9
