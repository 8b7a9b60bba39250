"""Trace functionals on the model cone over the circle.

Densities live on the collar [0, 1) x S^1 and are written
u = r^(-p) sum_k w_k(x) r^k (dr/r) dx + remainder, where the remainder
vanishes to order K + 1 at r = 0.  The regularized integral
z -> int r^z u has simple poles at z = p - k with residues int w_k dx.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .circle import NotStabilized, TrigPolynomial
from .numerics import LaurentSeries
from .zeta import (
    HeatExpansion,
    PoleInfo,
    PoleOrderError,
    SpectralModel,
    mellin_map,
)

TWO_PI = 2.0 * math.pi


class PathDisagreement(RuntimeError):
    pass


@dataclass(frozen=True)
class Remainder:
    """Smooth remainder g(r, x) = r^order h(r, x), stored through samples of h.

    ``r_nodes``/``r_weights`` are Gauss-Legendre nodes on (0, 1); the x
    samples are equispaced on [0, 2 pi).
    """

    order: int
    r_nodes: np.ndarray
    r_weights: np.ndarray
    values: np.ndarray  # shape (len(r_nodes), n_x)

    @classmethod
    def from_function(cls, g, order: int, n_r: int = 64, n_x: int = 32) -> Remainder:
        nodes, weights = np.polynomial.legendre.leggauss(n_r)
        r = 0.5 * (nodes + 1.0)
        x = TWO_PI * np.arange(n_x) / n_x
        R, X = np.meshgrid(r, x, indexing="ij")
        vals = np.asarray(g(R, X), dtype=complex) / R ** order
        return cls(order, r, 0.5 * weights, vals)

    def moments(self, shift: float, jmax: int) -> np.ndarray:
        """int int r^shift (log r)^j / j! h dr dx for j = 0..jmax."""
        radial = self.values.mean(axis=1) * TWO_PI
        lr = np.log(self.r_nodes)
        return np.array([np.sum(self.r_weights * self.r_nodes ** shift * lr ** j * radial) / math.factorial(j)
                         for j in range(jmax + 1)])


@dataclass(frozen=True)
class BDensity:
    """u = r^(-p) sum_k w_k(x) r^k (dr/r) dx on the collar, plus an optional remainder."""

    p: int
    coeffs: tuple[TrigPolynomial, ...]
    remainder: Remainder | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        coeffs = tuple(c if isinstance(c, TrigPolynomial) else TrigPolynomial.constant(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if self.remainder is not None and self.remainder.order < self.K + 1:
            raise ValueError("remainder must vanish to order K + 1")

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    def w(self, k: int) -> TrigPolynomial:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else TrigPolynomial.constant(0)

    def expansion(self, r, x):
        """r^p u restricted to its finite expansion, at (possibly complex) r."""
        r = np.asarray(r)
        out = np.zeros(np.broadcast(r, np.asarray(x)).shape, dtype=complex)
        for k, wk in enumerate(self.coeffs):
            out = out + wk(x) * r ** k
        return out

    def __add__(self, other: BDensity) -> BDensity:
        if self.p != other.p:
            raise ValueError("densities with different leading orders")
        if self.remainder is not None or other.remainder is not None:
            raise ValueError("adding densities with remainders is not supported")
        K = max(self.K, other.K)
        return BDensity(self.p, tuple(self.w(k) + other.w(k) for k in range(K + 1)))

    def scaled(self, c: complex) -> BDensity:
        rem = self.remainder
        if rem is not None:
            rem = Remainder(rem.order, rem.r_nodes, rem.r_weights, rem.values * c)
        return BDensity(self.p, tuple(w * c for w in self.coeffs), rem, self.meta)


WodzickiDensitySpec = BDensity


def _check(u: BDensity):
    if u.K < u.p:
        raise ValueError(f"expansion stops at K={u.K} below the leading order p={u.p}")


def _laurent_path(u: BDensity, window: tuple[int, int]) -> LaurentSeries:
    """Term-by-term partial fractions plus Taylor moments of the remainder."""
    lo, hi = window
    out = np.zeros(hi - lo + 1, dtype=complex)
    for k, wk in enumerate(u.coeffs):
        I = TWO_PI * wk.mean()
        if I == 0:
            continue
        a = u.p - k
        if a == 0:
            if lo > -1:
                raise ValueError("window drops the residue")
            out[-1 - lo] += I
        else:
            # I / (z - a) = -I sum_j z^j / a^(j+1)
            for j in range(max(lo, 0), hi + 1):
                out[j - lo] += -I / a ** (j + 1)
    if u.remainder is not None and hi >= 0:
        mom = u.remainder.moments(u.remainder.order - u.p - 1, hi)
        for j in range(max(lo, 0), hi + 1):
            out[j - lo] += mom[j]
    return LaurentSeries(0.0, lo, out)


def boundary_residue(u: BDensity, radius: float = 0.5, points: int | None = None, x_points: int | None = None) -> complex:
    """(1/p!) int d_r^p (r^p u)|_{r=0} dx from pointwise values of the density.

    The r-derivative is a Cauchy integral over |r| = radius, the x-integral
    a trapezoidal sum; the remainder vanishes to order > p and drops out.
    """
    _check(u)
    points = points or max(2 * (u.K + 1), 16)
    deg = max((w.degree for w in u.coeffs), default=0)
    x_points = x_points or max(2 * deg + 1, 8)
    x = TWO_PI * np.arange(x_points) / x_points
    theta = TWO_PI * np.arange(points) / points
    r = radius * np.exp(1j * theta)
    F = u.expansion(r[:, None], x[None, :])
    taylor_p = np.mean(F * np.exp(-1j * u.p * theta)[:, None], axis=0) / radius ** u.p
    return complex(TWO_PI * np.mean(taylor_p))


def b_regularize(u: BDensity, mode: str = "laurent_window", window: tuple[int, int] = (-1, 2),
                 tol: float = 1e-8) -> LaurentSeries:
    """Laurent expansion at z = 0 of z -> int r^z u; both residue routes must agree."""
    _check(u)
    series = _laurent_path(u, window)
    other = boundary_residue(u)
    scale = max(1.0, abs(other))
    if abs(series[-1] - other) > tol * scale:
        raise PathDisagreement(f"partial fractions {series[-1]} vs boundary formula {other}")
    if mode == "residue_only":
        return LaurentSeries(0.0, -1, np.array([series[-1]]))
    if mode != "laurent_window":
        raise ValueError(f"unknown mode {mode!r}")
    return series


def b_derivative(u: BDensity) -> BDensity:
    """The density r d_r u: coefficient w_k picks up the factor k - p."""
    if u.remainder is not None:
        raise ValueError("r d_r of a sampled remainder is not available")
    return BDensity(u.p, tuple(w * float(k - u.p) for k, w in enumerate(u.coeffs)))


def boundary_value(u: BDensity) -> complex:
    """int u|_{r=1} dx for a remainder-free density."""
    if u.remainder is not None:
        raise ValueError("boundary value of a sampled remainder is not available")
    return complex(TWO_PI * sum(w.mean() for w in u.coeffs))


def tr_partial_sigma(omega: BDensity) -> complex:
    """Residue at 0 of the regularized integral of the density."""
    return complex(b_regularize(omega, "residue_only")[-1])


def tr_sigma(omega: BDensity) -> complex:
    """Finite part at 0 of the regularized integral of the density."""
    return complex(b_regularize(omega, "laurent_window", (-1, 0))[0])


def tr_partial(layer: BDensity, p=None) -> complex:
    """Boundary-derivative formula applied to a finite-part layer; zero for non-integer p."""
    p = layer.p if p is None else p
    if not float(p).is_integer():
        return 0j
    p = int(p)
    shifted = BDensity(p, layer.coeffs, layer.remainder, layer.meta)
    return boundary_residue(shifted)


# --------------------------------------------------------------------------
# heat expansion structure
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConeHeatSpec:
    """Trace data for the small-t heat expansion of P on the cone.

    Trace maps are keyed by the power j of Delta: ``tr_sigma[j]`` is
    Tr_sigma(P Delta^j), and so on.  ``C``, ``C1``, ``C2`` hold the
    constants of the log t and (log t)^2 terms keyed the same way; the
    j = 0 values are fixed by the normalization of the t^0 coefficients.
    ``a``, ``b``, ``c`` hold the non-log coefficients of the three families.
    """

    m: int
    p: int
    n: int
    tr_sigma: dict = field(default_factory=dict)
    tr_partial: dict = field(default_factory=dict)
    tr_partial_sigma: dict = field(default_factory=dict)
    C: dict = field(default_factory=dict)
    C1: dict = field(default_factory=dict)
    C2: dict = field(default_factory=dict)
    a: dict = field(default_factory=dict)
    b: dict = field(default_factory=dict)
    c: dict = field(default_factory=dict)

    NORMALIZATION = {"C": -0.5, "C1": -0.25, "C2": -0.25}

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension n must be >= 1")
        for name, fixed in self.NORMALIZATION.items():
            table = getattr(self, name)
            if 0 in table and table[0] != fixed:
                raise ValueError(f"{name}[0] is fixed to {fixed}")

    def constant(self, name: str, j: int) -> float:
        if j == 0:
            return self.NORMALIZATION[name]
        return float(getattr(self, name).get(j, 1.0))


def heat_expansion_model(spec: ConeHeatSpec) -> HeatExpansion:
    """sum a_k t^((k-p)/2) + (b_k + beta_k log t) t^k + (c_k + gamma_k log t + delta_k (log t)^2) t^(j/2).

    beta_k = C_k (Tr_sigma + Tr_boundary)(P Delta^k); gamma, delta = C', C'' times
    Tr_{boundary,sigma}(P Delta^j) with j = k - m - n.
    """
    terms = []
    for k, v in spec.a.items():
        terms.append(((int(k) - spec.p) / 2.0, 0, v))
    for k, v in spec.b.items():
        terms.append((float(k), 0, v))
    for k in set(spec.tr_sigma) | set(spec.tr_partial):
        beta = spec.constant("C", int(k)) * (spec.tr_sigma.get(k, 0) + spec.tr_partial.get(k, 0))
        terms.append((float(k), 1, beta))
    for j, v in spec.c.items():
        terms.append((int(j) / 2.0, 0, v))
    for j, v in spec.tr_partial_sigma.items():
        terms.append((int(j) / 2.0, 1, spec.constant("C1", int(j)) * v))
        terms.append((int(j) / 2.0, 2, spec.constant("C2", int(j)) * v))
    return HeatExpansion(tuple((a, j, c) for a, j, c in terms if c != 0))


def random_cone_spec(rng: np.random.Generator, max_power: int = 3) -> ConeHeatSpec:
    """Random trace data with a handful of powers (tests and demos)."""
    m = int(rng.integers(1, 3))
    n = int(rng.integers(1, 4))
    p = int(rng.integers(-2, 3))

    def table(lo):
        keys = rng.choice(np.arange(lo, max_power + 1), size=int(rng.integers(0, 4)), replace=False)
        return {int(k): complex(rng.normal(), rng.normal()) for k in keys}

    return ConeHeatSpec(m, p, n,
                        tr_sigma=table(0), tr_partial=table(0), tr_partial_sigma=table(-(m + n)),
                        C={int(k): float(rng.uniform(0.1, 2)) for k in range(1, max_power + 1)},
                        C1={int(k): float(rng.uniform(0.1, 2)) for k in range(-(m + n), max_power + 1) if k},
                        C2={int(k): float(rng.uniform(0.1, 2)) for k in range(-(m + n), max_power + 1) if k},
                        a=table(0), b=table(0), c=table(-(m + n)))


@dataclass(frozen=True)
class PoleReport:
    poles: tuple[PoleInfo, ...]

    def order_at(self, z: float) -> int:
        for p in self.poles:
            if abs(p.location - z) < 1e-12:
                return p.order
        return 0

    def rows(self) -> list[tuple[float, int, float]]:
        return [(float(p.location) + 0.0, p.order, abs(p.leading)) for p in self.poles]


def conic_zeta_poles(h: HeatExpansion, r: float = 2.0) -> PoleReport:
    """Poles of the Mellin image of h; at most triple anywhere and at most double at 0."""
    poles = mellin_map(h, r).poles()
    for p in poles:
        if abs(p.location) < 1e-12 and p.order > 2:
            raise PoleOrderError(f"pole of order {p.order} at z=0")
    return PoleReport(tuple(poles))


# --------------------------------------------------------------------------
# regularity obstruction
# --------------------------------------------------------------------------


def holomorphy_halfplane(p: int, k: int, n: int) -> Fraction:
    """max{(n - k)/2, -p/2}: the half-plane bound after k commutators."""
    return max(Fraction(n - k, 2), Fraction(-p, 2))


@dataclass(frozen=True)
class RegularityDiagnostic:
    p: int
    n: int
    limit: Fraction
    stabilizes_at: int
    not_regular: bool


def regularity_diagnostic(p: int, n: int) -> RegularityDiagnostic:
    """Limit of the half-plane bound as k grows; a limit >= 0 means 0 is never reached."""
    limit = Fraction(-p, 2)
    return RegularityDiagnostic(p, n, limit, n + p, limit >= 0)


# --------------------------------------------------------------------------
# non-local cocycle formula
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConeModel:
    """Truncated model of a fully elliptic cone Laplacian.

    Radial direction: s = -log r on a uniform grid with Dirichlet ends;
    angular direction: Fourier modes |q| <= Q.  The matrix
    R^-1 (-d_s^2 + q^2 + (n-2)^2/4 + a^2) R^-1 is symmetric positive and
    block diagonal in q.
    """

    model: SpectralModel
    r: np.ndarray
    q: np.ndarray
    matrix: np.ndarray


def cone_laplacian_model(n_r: int = 24, Q: int = 2, a: float = 1.5, n: int = 2, length: float = 6.0) -> ConeModel:
    if a <= 1:
        raise ValueError("full ellipticity needs a > 1")
    h = length / (n_r + 1)
    s = h * np.arange(1, n_r + 1)
    r = np.exp(-s)
    lap = (2 * np.eye(n_r) - np.eye(n_r, k=1) - np.eye(n_r, k=-1)) / h ** 2
    qs = np.arange(-Q, Q + 1)
    blocks = []
    for q in qs:
        B = lap + (q ** 2 + (n - 2) ** 2 / 4 + a ** 2) * np.eye(n_r)
        blocks.append(B / np.outer(r, r))
    big = np.zeros((n_r * len(qs),) * 2)
    for i, B in enumerate(blocks):
        big[i * n_r:(i + 1) * n_r, i * n_r:(i + 1) * n_r] = B
    lam, vec = np.linalg.eigh(big)
    return ConeModel(SpectralModel(lam, 2.0, "cone", vec), np.tile(r, len(qs)), np.repeat(qs, n_r), big)


def log_remainder(A: np.ndarray, model: SpectralModel, N: int) -> np.ndarray:
    """[log Delta, A] - sum_{k=1}^N ((-1)^(k-1)/k) ad(Delta)^k(A) Delta^(-k), in the eigenbasis."""
    lam = model.eigenvalues
    x = (lam[:, None] - lam[None, :]) / lam[None, :]
    series = np.zeros_like(x)
    for k in range(1, N + 1):
        series += (-1) ** (k - 1) / k * x ** k
    return np.asarray(A) * (np.log1p(x) - series)


@dataclass(frozen=True)
class NonlocalReport:
    value: complex
    terms: dict
    local: complex
    nonlocal_: complex
    note: str = "remainder term evaluated at z = 0 after stabilization of partial traces"


def stabilized_partial_trace(M: np.ndarray, size: int, tol: float = 1e-8) -> complex:
    """Trace over the lowest ``size`` eigenmodes, checked against ``size - 8``."""
    d = np.diag(M)
    if size > len(d) or size <= 8:
        raise ValueError("partial trace size out of range")
    a, b = d[:size].sum(), d[:size - 8].sum()
    if abs(a - b) > tol * max(1.0, abs(a)):
        raise NotStabilized(f"partial traces {a} vs {b}")
    return complex(a)


def nonlocal_radul(first: BDensity, second: BDensity, boundary_layer: BDensity | None,
                   A0: np.ndarray | None, A1: np.ndarray | None, model: SpectralModel | None,
                   N: int = 1, size: int | None = None, tol: float = 1e-8) -> NonlocalReport:
    """(Tr_bs + Tr_s)(a0 delta a1) - (1/2) Tr_bs(a0 delta^2 a1) + Tr_b(a0 sum a1^(k) Delta^-k) + remainder trace.

    ``first`` and ``second`` are the residue densities of a0 [log Delta, a1]
    and a0 [log Delta, [log Delta, a1]]; ``boundary_layer`` carries the
    finite-part diagonal data of a0 sum_k a1^(k) Delta^-k.  A0, A1 are
    matrices in the eigenbasis of ``model`` for the remainder term.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    t1 = tr_partial_sigma(first) + tr_sigma(first)
    t2 = -0.5 * tr_partial_sigma(second)
    t3 = tr_partial(boundary_layer) if boundary_layer is not None else 0j
    t4 = 0j
    if A0 is not None:
        R = log_remainder(A1, model, N)
        size = size or len(model.eigenvalues)
        t4 = stabilized_partial_trace(np.asarray(A0) @ R, size, tol)
    terms = {"residue_and_finite_part": t1, "second_residue": t2, "boundary": t3, "remainder": t4}
    return NonlocalReport(t1 + t2 + t3 + t4, terms, t1 + t2, t3 + t4)


def interior_density(residue_density: TrigPolynomial, K: int = 0) -> BDensity:
    """Density (1/2pi) rho(x) phi(r) supported away from the boundary, with int phi dr/r = 1.

    phi(r) = (K + 2)(K + 3) r^(K+2) (1 - r) vanishes to order K + 2 at r = 0.
    """
    c = (K + 2) * (K + 3)

    def g(r, x):
        return c * r ** (K + 2) * (1 - r) * residue_density(x) / TWO_PI

    rem = Remainder.from_function(g, K + 1, n_r=32, n_x=max(2 * residue_density.degree + 1, 8))
    return BDensity(0, tuple(TrigPolynomial.constant(0) for _ in range(K + 1)), rem)
