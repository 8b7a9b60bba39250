from __future__ import annotations

import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from residue_index.circle import (
    CircleSymbol,
    NotStabilized,
    TrigPolynomial,
    random_symbol,
    star_compose,
)
from residue_index.cone import (
    BDensity,
    ConeHeatSpec,
    Remainder,
    b_derivative,
    b_regularize,
    boundary_residue,
    boundary_value,
    cone_laplacian_model,
    conic_zeta_poles,
    heat_expansion_model,
    holomorphy_halfplane,
    interior_density,
    log_remainder,
    nonlocal_radul,
    random_cone_spec,
    regularity_diagnostic,
    stabilized_partial_trace,
    tr_partial,
    tr_partial_sigma,
    tr_sigma,
)
from residue_index.radul import delta_power_symbol, generalized_radul
from residue_index.zeta import HeatExpansion, PoleOrderError

T = TrigPolynomial
TWO_PI = 2 * math.pi
COS = T.from_dict({1: 0.5, -1: 0.5})


def random_density(rng, p, K, degree=3, remainder=False):
    coeffs = []
    for _ in range(K + 1):
        d = int(rng.integers(0, degree + 1))
        coeffs.append(T(rng.normal(size=2 * d + 1) + 1j * rng.normal(size=2 * d + 1)))
    rem = None
    if remainder:
        a, b = rng.normal(size=2)
        rem = Remainder.from_function(lambda r, x: r ** (K + 1) * np.exp(-r) * (a + b * np.cos(x)), K + 1)
    return BDensity(p, tuple(coeffs), rem)


# -- b-regularization -----------------------------------------------------


def test_b_regularize_examples():
    u = BDensity(2, (T.constant(1.0), T.constant(1.0), T.constant(3.0) + COS))
    assert b_regularize(u)[-1] == pytest.approx(6 * math.pi, abs=1e-12)
    smooth = BDensity(0, (T.constant(1.0),))
    assert b_regularize(smooth)[-1] == pytest.approx(TWO_PI, abs=1e-12)
    vanishing = BDensity(0, (T.constant(0.0), T.constant(0.0)),
                         Remainder.from_function(lambda r, x: r ** 2 * (1 + np.cos(x)), 2))
    L = b_regularize(vanishing)
    assert L[-1] == 0
    assert L[0] == pytest.approx(TWO_PI / 2, rel=1e-12)  # int_0^1 r dr * 2pi


def test_b_regularize_residue_only_and_errors():
    u = BDensity(1, (T.constant(2.0), T.constant(0.5)))
    R = b_regularize(u, "residue_only")
    assert R.low == -1 and R[-1] == pytest.approx(math.pi)
    with pytest.raises(ValueError):
        b_regularize(BDensity(2, (T.constant(1.0),)))
    with pytest.raises(ValueError):
        b_regularize(u, "bogus")


def test_b_regularize_laurent_matches_quadrature():
    # u = r^-1 (1 + 2 r + (3 + cos x) r^2) + r^2 (1 - r) e^r
    rem = Remainder.from_function(lambda r, x: r ** 3 * (1 - r) * np.exp(r), 3)
    u = BDensity(1, (T.constant(1.0), T.constant(2.0), T.constant(3.0) + COS), rem)
    L = b_regularize(u, window=(-1, 12))
    mp.mp.dps = 20
    for z in (0.05, -0.04 + 0.03j):
        # continuation of the r^-2 term done by hand: int_0^1 r^(z-2) dr = 1/(z-1)
        zz = mp.mpc(z)
        ref = TWO_PI * (1 / (zz - 1) + 2 / zz + 3 / (zz + 1))
        ref += TWO_PI * mp.quad(lambda r: r ** (zz - 1 - 1) * r ** 3 * (1 - r) * mp.exp(r), [0, 1])
        assert L.evaluate(z) == pytest.approx(complex(ref), rel=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_two_residue_paths_agree(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(0, 5))
    u = random_density(rng, p, p + int(rng.integers(0, 3)), remainder=bool(seed % 2))
    a = b_regularize(u, "laurent_window")[-1]
    b = boundary_residue(u)
    assert abs(a - b) <= 1e-8
    assert a == pytest.approx(TWO_PI * u.w(p).mean(), abs=1e-10)


# -- trace functionals -------------------------------------------------------


def test_tr_partial_sigma_examples():
    assert tr_partial_sigma(BDensity(1, (T.constant(5.0), T.constant(3.0) + COS))) == pytest.approx(6 * math.pi)
    assert tr_partial_sigma(BDensity(1, (T.constant(5.0), COS))) == pytest.approx(0, abs=1e-13)
    assert tr_partial_sigma(BDensity(1, (T.constant(0.0), T.constant(0.0), T.constant(7.0)))) == 0


def test_tr_sigma_examples():
    assert tr_sigma(BDensity(1, (T.constant(1.0), T.constant(0.0)))) == pytest.approx(-TWO_PI)
    assert tr_sigma(BDensity(2, (T.constant(0.0), T.constant(0.0), T.constant(4.0) + COS))) == 0
    rng = np.random.default_rng(3)
    u, v = random_density(rng, 2, 4), random_density(rng, 2, 3)
    assert tr_sigma(u + v) == pytest.approx(tr_sigma(u) + tr_sigma(v), abs=1e-12)
    assert tr_sigma(u.scaled(2 - 1j)) == pytest.approx((2 - 1j) * tr_sigma(u), abs=1e-12)


def test_tr_partial_examples():
    layer = BDensity(2, (T.constant(3.0), T.constant(0.0), T.constant(1.0)))
    assert tr_partial(layer) == pytest.approx(TWO_PI, abs=1e-12)
    assert tr_partial(layer, 2.5) == 0
    assert tr_partial(BDensity(1, (T.constant(0.0), T.constant(0.0)))) == 0


@pytest.mark.parametrize("seed", range(10))
def test_trace_defect_identity(seed):
    # Pf_0 int r^z (r d_r u) = int u|_{r=1} - Res_0 int r^z u
    rng = np.random.default_rng(50 + seed)
    p = int(rng.integers(0, 5))
    u = random_density(rng, p, p + 2)
    assert tr_sigma(b_derivative(u)) == pytest.approx(boundary_value(u) - tr_partial_sigma(u), abs=1e-10)


def test_tr_sigma_is_not_a_trace():
    u = BDensity(1, (T.constant(1.0), T.constant(2.0), T.constant(0.5)))
    assert abs(tr_sigma(b_derivative(u)) - boundary_value(u)) > 1.0


# -- heat expansion and conic zeta poles -------------------------------------


def log_coefficients(h: HeatExpansion):
    return h.coefficient(0.0, 1), h.coefficient(0.0, 2)


def test_heat_model_examples():
    c1, c2 = log_coefficients(heat_expansion_model(ConeHeatSpec(2, 0, 2, tr_partial_sigma={0: 4.0})))
    assert (c1, c2) == (-1.0, -1.0)
    h = heat_expansion_model(ConeHeatSpec(2, 0, 2))
    assert all(j == 0 for _, j, _ in h.terms)
    c1, c2 = log_coefficients(heat_expansion_model(ConeHeatSpec(2, 0, 2, tr_sigma={0: 2.0})))
    assert (c1, c2) == (-1.0, 0)


def test_heat_model_displayed_combination():
    ts, td, tds = 0.7 - 0.2j, 1.3, -2.1 + 0.4j
    h = heat_expansion_model(ConeHeatSpec(1, 1, 2, tr_sigma={0: ts}, tr_partial={0: td}, tr_partial_sigma={0: tds}))
    c1, c2 = log_coefficients(h)
    assert c1 == -0.5 * ts - 0.5 * td - 0.25 * tds
    assert c2 == -0.25 * tds


def test_heat_model_normalization_is_fixed():
    with pytest.raises(ValueError):
        ConeHeatSpec(2, 0, 2, C={0: 1.0})
    with pytest.raises(ValueError):
        ConeHeatSpec(2, 0, 0)
    spec = ConeHeatSpec(2, 0, 2, C={0: -0.5, 1: 3.0})
    assert spec.constant("C", 1) == 3.0 and spec.constant("C1", 2) == 1.0


def test_conic_zeta_double_pole_at_zero():
    rep = conic_zeta_poles(heat_expansion_model(ConeHeatSpec(2, 0, 2, tr_partial_sigma={0: 4.0})))
    assert rep.order_at(0.0) == 2
    assert rep.rows() == [(0.0, 2, pytest.approx(8.0))]


def test_conic_zeta_triple_pole():
    rep = conic_zeta_poles(HeatExpansion(((-1.0, 2, 1.0),)))
    assert rep.order_at(2.0) == 3
    assert rep.poles[0].leading == pytest.approx(16.0)


def test_conic_zeta_simple_poles_only():
    rep = conic_zeta_poles(HeatExpansion(((-1.0, 0, 1.0), (-0.5, 0, 2.0), (0.5, 0, -1.0))))
    assert rep.order_at(0.0) == 0
    assert all(p.order == 1 for p in rep.poles)


def test_conic_zeta_pole_sweep():
    rng = np.random.default_rng(77)
    seen = 0
    for _ in range(100):
        rep = conic_zeta_poles(heat_expansion_model(random_cone_spec(rng)))
        assert all(p.order <= 3 for p in rep.poles)
        assert rep.order_at(0.0) <= 2
        seen = max(seen, max((p.order for p in rep.poles), default=0))
    assert seen == 3


# -- regularity ------------------------------------------------------------


def test_holomorphy_examples():
    assert holomorphy_halfplane(0, 0, 2) == 1
    assert holomorphy_halfplane(2, 5, 2) == -1
    assert holomorphy_halfplane(0, 1000, 2) == 0
    assert isinstance(holomorphy_halfplane(1, 0, 1), Fraction)


@given(st.integers(-6, 6), st.integers(0, 40), st.integers(1, 6))
def test_holomorphy_monotone(p, k, n):
    assert holomorphy_halfplane(p, k + 1, n) <= holomorphy_halfplane(p, k, n)
    assert holomorphy_halfplane(p + 1, k, n) <= holomorphy_halfplane(p, k, n)


@settings(max_examples=50)
@given(st.integers(-6, 6), st.integers(1, 6))
def test_regularity_diagnostic_is_the_large_k_limit(p, n):
    d = regularity_diagnostic(p, n)
    assert d.limit == holomorphy_halfplane(p, 10 ** 6, n)
    assert holomorphy_halfplane(p, d.stabilizes_at, n) == d.limit
    assert d.not_regular == (d.limit >= 0)


def test_regularity_flag_for_p_zero():
    d = regularity_diagnostic(0, 2)
    assert d.limit == 0 and d.not_regular


# -- non-local formula ----------------------------------------------------------


def low_mode_matrix(rng, size, support):
    M = np.zeros((size, size), dtype=complex)
    M[:support, :support] = rng.normal(size=(support, support)) + 1j * rng.normal(size=(support, support))
    return M


def test_cone_model_is_positive_and_fully_elliptic():
    cm = cone_laplacian_model(n_r=16, Q=1)
    assert np.allclose(cm.matrix, cm.matrix.T)
    assert cm.model.eigenvalues.min() > 0
    with pytest.raises(ValueError):
        cone_laplacian_model(a=1.0)


def test_log_remainder_against_matrix_logarithm():
    rng = np.random.default_rng(2)
    cm = cone_laplacian_model(n_r=8, Q=1)
    lam = cm.model.eigenvalues
    A = low_mode_matrix(rng, len(lam), 6)
    L = np.diag(np.log(lam))
    ad = A.copy()
    approx = L @ A - A @ L
    for k in range(1, 3):
        ad = np.diag(lam) @ ad - ad @ np.diag(lam)
        approx = approx - (-1) ** (k - 1) / k * ad @ np.diag(lam ** -k)
    assert np.allclose(log_remainder(A, cm.model, 2), approx, atol=1e-10 * np.abs(approx).max())


def test_nonlocal_central_a1_vanishes():
    cm = cone_laplacian_model(n_r=12, Q=1)
    size = len(cm.model.eigenvalues)
    rng = np.random.default_rng(4)
    A0 = low_mode_matrix(rng, size, 10)
    A1 = np.diag(rng.normal(size=size))
    zero = BDensity(1, (T.constant(0.0), T.constant(0.0)))
    rep = nonlocal_radul(zero, zero, zero, A0, A1, cm.model, N=2)
    assert all(v == 0 for v in rep.terms.values())
    assert rep.value == 0


def test_nonlocal_linear_in_a0():
    cm = cone_laplacian_model(n_r=12, Q=1)
    size = len(cm.model.eigenvalues)
    rng = np.random.default_rng(5)
    A0, B0, A1 = (low_mode_matrix(rng, size, 12) for _ in range(3))
    d = [random_density(rng, 1, 3) for _ in range(6)]
    r1 = nonlocal_radul(d[0], d[1], d[2], A0, A1, cm.model, N=2)
    r2 = nonlocal_radul(d[3], d[4], d[5], B0, A1, cm.model, N=2)
    r12 = nonlocal_radul(d[0] + d[3], d[1] + d[4], d[2] + d[5], A0 + B0, A1, cm.model, N=2)
    assert r12.value == pytest.approx(r1.value + r2.value, abs=1e-9)
    assert r12.local + r12.nonlocal_ == pytest.approx(r12.value)


def test_nonlocal_requires_stable_partial_traces():
    rng = np.random.default_rng(6)
    M = rng.normal(size=(40, 40))
    with pytest.raises(NotStabilized):
        stabilized_partial_trace(M, 40)
    with pytest.raises(ValueError):
        stabilized_partial_trace(M, 5)
    zero = BDensity(0, (T.constant(0.0),))
    with pytest.raises(ValueError):
        nonlocal_radul(zero, zero, None, None, None, None, N=0)


@pytest.mark.parametrize("seed", range(4))
def test_nonlocal_boundary_free_reduces_to_closed_radul(seed):
    rng = np.random.default_rng(90 + seed)
    a0, a1 = random_symbol(rng, 0, depth=3), random_symbol(rng, 1, depth=3)

    def residue_density(b: CircleSymbol) -> TrigPolynomial:
        return b.homogeneous_part(-1, 1) + b.homogeneous_part(-1, -1)

    d1 = star_compose(a0, delta_power_symbol(a1, 1), 4)
    d2 = star_compose(a0, delta_power_symbol(a1, 2), 4)
    first = interior_density(residue_density(d1))
    second = interior_density(residue_density(d2))
    assert tr_partial_sigma(first) == 0 and tr_partial_sigma(second) == 0
    rep = nonlocal_radul(first, second, None, None, None, None)
    closed = generalized_radul(a0, a1, 1, calibration=1.0).value
    assert rep.value == pytest.approx(closed, abs=1e-10)
    assert rep.terms["second_residue"] == 0 and rep.terms["boundary"] == 0
