"""Zeta functions with explicit pole structure, heat traces and residue functionals.

A :class:`ZetaStructure` is a finite sum of building blocks whose Laurent
expansions are known in closed form (shifted Riemann zeta functions,
Mellin images of heat-expansion terms, finite Dirichlet sums and
polynomials).  Residues and finite parts are read off the summed Laurent
window instead of being computed by contour integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.special import rgamma

from .circle import CircleOperator, CircleSymbol
from .numerics import (
    DEFAULT_WINDOW,
    LaurentSeries,
    generalized_binomial,
    recip_gamma_taylor,
    riemann_zeta,
    riemann_zeta_laurent,
)

MAX_POLE_ORDER = 3


class PoleOrderError(ValueError):
    """A structure carries a pole of order larger than the calculus allows."""


class WindowTooNarrow(KeyError):
    pass


class InsufficientTruncation(ValueError):
    pass


def _window(center: complex, low: int, coeffs: np.ndarray, window: tuple[int, int]) -> LaurentSeries:
    lo, hi = window
    out = np.zeros(hi - lo + 1, dtype=complex)
    for i, c in enumerate(coeffs):
        k = low + i
        if lo <= k <= hi:
            out[k - lo] = c
        elif k < lo and c != 0:
            raise WindowTooNarrow(f"pole of order {-k} does not fit window {window}")
    return LaurentSeries(center, lo, out)


# --------------------------------------------------------------------------
# building blocks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RiemannBlock:
    """coeff * zeta_R(z - shift): a simple pole at z = shift + 1 with residue coeff."""

    coeff: complex
    shift: float

    def evaluate(self, z):
        return self.coeff * riemann_zeta(np.asarray(z) - self.shift)

    def pole_locations(self):
        return [self.shift + 1.0]

    def laurent(self, z0: complex, window: tuple[int, int]) -> LaurentSeries:
        L = riemann_zeta_laurent(complex(z0) - self.shift, depth=window[1] + 1)
        return _window(z0, L.low, self.coeff * L.coeffs, window)


@dataclass(frozen=True)
class DirichletPart:
    """Finite sum sum_n c_n lambda_n^(-z/r) (entire)."""

    coeffs: tuple[complex, ...]
    eigenvalues: tuple[float, ...]
    r: float = 2.0

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        lam = np.asarray(self.eigenvalues, dtype=float)
        c = np.asarray(self.coeffs, dtype=complex)
        return (lam ** (-z[..., None] / self.r)) @ c

    def pole_locations(self):
        return []

    def laurent(self, z0: complex, window: tuple[int, int]) -> LaurentSeries:
        lam = np.asarray(self.eigenvalues, dtype=float)
        c = np.asarray(self.coeffs, dtype=complex) * lam ** (-complex(z0) / self.r)
        L = -np.log(lam) / self.r
        taylor = np.array([np.sum(c * L ** k) / math.factorial(k) for k in range(window[1] + 1)])
        return _window(z0, 0, taylor, window)


@dataclass(frozen=True)
class PolynomialPart:
    """Entire polynomial sum_k p_k z^k."""

    coeffs: tuple[complex, ...]

    def evaluate(self, z):
        return np.polyval(np.asarray(self.coeffs, dtype=complex)[::-1], np.asarray(z, dtype=complex))

    def pole_locations(self):
        return []

    def laurent(self, z0: complex, window: tuple[int, int]) -> LaurentSeries:
        p = np.polynomial.Polynomial(np.asarray(self.coeffs, dtype=complex))
        shifted = p(np.polynomial.Polynomial([complex(z0), 1.0]))
        return _window(z0, 0, np.atleast_1d(shifted.coef), window)


@dataclass(frozen=True)
class MellinTerm:
    """Mellin image of c t^alpha (log t)^j restricted to 0 < t <= 1.

    (1/Gamma(z/r)) int_0^1 t^(z/r - 1) c t^alpha (log t)^j dt
        = c (-1)^j j! / (z/r + alpha)^(j+1) / Gamma(z/r).
    """

    coeff: complex
    alpha: float
    logpow: int
    r: float = 2.0

    def evaluate(self, z):
        s = np.asarray(z, dtype=complex) / self.r
        j = self.logpow
        return self.coeff * (-1) ** j * math.factorial(j) / (s + self.alpha) ** (j + 1) * rgamma(s)

    def pole_locations(self):
        return [-self.r * self.alpha]

    def laurent(self, z0: complex, window: tuple[int, int]) -> LaurentSeries:
        r, j, a = self.r, self.logpow, self.alpha
        z0 = complex(z0)
        n = window[1] + j + 2
        s0 = z0 / r
        if abs(s0.imag) > 0:
            raise ValueError("Mellin terms are only expanded at real points")
        g = recip_gamma_taylor(s0.real, n) / r ** np.arange(n)  # 1/Gamma(z/r) in powers of h = z - z0
        pref = self.coeff * (-1) ** j * math.factorial(j)
        w0 = s0 + a
        if abs(w0) < 1e-13:
            return _window(z0, -(j + 1), pref * r ** (j + 1) * g, window)
        k = np.arange(n)
        expand = np.array([generalized_binomial(-(j + 1), int(i)) for i in k]) * w0 ** (-(j + 1) - k) / r ** k
        return _window(z0, 0, pref * np.convolve(expand, g)[:n], window)


Block = Union[RiemannBlock, DirichletPart, PolynomialPart, MellinTerm]


@dataclass(frozen=True)
class PoleInfo:
    location: float
    order: int
    leading: complex
    window: LaurentSeries


@dataclass(frozen=True)
class ZetaStructure:
    """Meromorphic function given as a finite sum of closed-form blocks.

    Structures produced from heat expansions omit the entire contribution
    of t >= 1 (and of the unexpanded remainder); their poles and residues
    are exact, their finite parts are relative to that convention.
    """

    blocks: tuple[Block, ...] = ()
    window: tuple[int, int] = DEFAULT_WINDOW
    note: str = ""

    def __add__(self, other: ZetaStructure) -> ZetaStructure:
        return ZetaStructure(self.blocks + other.blocks, self.window, self.note or other.note)

    def scaled(self, c: complex) -> ZetaStructure:
        blocks = []
        for b in self.blocks:
            if isinstance(b, RiemannBlock):
                blocks.append(RiemannBlock(b.coeff * c, b.shift))
            elif isinstance(b, MellinTerm):
                blocks.append(MellinTerm(b.coeff * c, b.alpha, b.logpow, b.r))
            elif isinstance(b, DirichletPart):
                blocks.append(DirichletPart(tuple(np.asarray(b.coeffs) * c), b.eigenvalues, b.r))
            else:
                blocks.append(PolynomialPart(tuple(np.asarray(b.coeffs) * c)))
        return ZetaStructure(tuple(blocks), self.window, self.note)

    def __sub__(self, other: ZetaStructure) -> ZetaStructure:
        return self + other.scaled(-1)

    def shifted(self, kappa: complex) -> ZetaStructure:
        """Add the constant kappa."""
        return ZetaStructure(self.blocks + (PolynomialPart((kappa,)),), self.window, self.note)

    def __call__(self, z):
        out = 0j if np.ndim(z) == 0 else np.zeros(np.shape(z), dtype=complex)
        for b in self.blocks:
            out = out + b.evaluate(z)
        return out

    def laurent(self, z0: complex = 0.0, window: tuple[int, int] | None = None) -> LaurentSeries:
        window = window or self.window
        total = LaurentSeries.zero(z0, window)
        for b in self.blocks:
            total = total + b.laurent(z0, window)
        return total

    def poles(self, rtol: float = 1e-12) -> list[PoleInfo]:
        locations: list[float] = []
        for b in self.blocks:
            for loc in b.pole_locations():
                if not any(abs(loc - x) < 1e-12 for x in locations):
                    locations.append(float(loc))
        scale = max([abs(getattr(b, "coeff", 0)) for b in self.blocks] + [1e-300])
        out = []
        for loc in sorted(locations):
            L = self.laurent(loc)
            order = L.pole_order(atol=rtol * scale)
            if order > MAX_POLE_ORDER:
                raise PoleOrderError(f"pole of order {order} at z={loc}")
            if order:
                out.append(PoleInfo(loc, order, L[-order], L))
        return out


# --------------------------------------------------------------------------
# spectral models and heat data
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralModel:
    """Positive operator Delta of order r, given by its eigenvalues in a fixed basis order."""

    eigenvalues: np.ndarray
    r: float = 2.0
    kind: str = "generic"
    basis: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        if np.any(lam <= 0):
            raise ValueError("eigenvalues must be positive")
        if self.r <= 0:
            raise ValueError("order r must be positive")
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def N(self) -> int:
        return (len(self.eigenvalues) - 1) // 2

    def power(self, z: complex) -> np.ndarray:
        return self.eigenvalues.astype(complex) ** (-z)


def circle_model(N: int) -> SpectralModel:
    """Delta = D^2 + projection onto constants, on modes -N..N: lambda_n = n^2, lambda_0 = 1."""
    n = np.arange(-N, N + 1)
    lam = np.where(n == 0, 1.0, n.astype(float) ** 2)
    return SpectralModel(lam, 2.0, "circle")


@dataclass(frozen=True)
class HeatExpansion:
    """Small-t expansion sum c t^alpha (log t)^j, j <= 2; duplicate (alpha, j) are merged."""

    terms: tuple[tuple[float, int, complex], ...] = ()

    def __post_init__(self):
        merged: dict[tuple[float, int], complex] = {}
        for a, j, c in self.terms:
            j = int(j)
            if not 0 <= j <= 2:
                raise ValueError("log power must lie in 0..2")
            key = (float(a), j)
            merged[key] = merged.get(key, 0) + complex(c)
        terms = tuple((a, j, c) for (a, j), c in sorted(merged.items()))
        object.__setattr__(self, "terms", terms)

    def coefficient(self, alpha: float, logpow: int) -> complex:
        for a, j, c in self.terms:
            if a == float(alpha) and j == logpow:
                return c
        return 0j

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for a, j, c in self.terms:
            out += c * t ** a * np.log(t) ** j
        return out

    def __add__(self, other: HeatExpansion) -> HeatExpansion:
        return HeatExpansion(self.terms + other.terms)

    def scaled(self, c: complex) -> HeatExpansion:
        return HeatExpansion(tuple((a, j, v * c) for a, j, v in self.terms))


@dataclass(frozen=True)
class HeatSamples:
    t: np.ndarray
    values: np.ndarray
    tail_bound: float | None


def heat_trace(model: SpectralModel, A="identity", t_grid: Sequence[float] = (1.0,)) -> HeatSamples:
    """sum_n A_nn exp(-t lambda_n) in the eigenbasis of Delta."""
    t = np.asarray(t_grid, dtype=float)
    lam = model.eigenvalues
    if np.any(t <= 0):
        raise ValueError("heat times must be positive")
    if lam.max() < 50.0 / t.min():
        raise InsufficientTruncation(
            f"truncation reaches lambda={lam.max():.3g} but t_min={t.min():.3g} needs {50.0 / t.min():.3g}")
    if isinstance(A, str):
        if A != "identity":
            raise ValueError(f"unknown operator {A!r}")
        diag = np.ones(len(lam), dtype=complex)
    else:
        diag = np.diag(np.asarray(A.matrix if isinstance(A, CircleOperator) else A)).astype(complex)
    values = np.exp(-np.outer(t, lam)) @ diag
    tail = None
    if model.kind == "circle":
        N = model.N
        # 2 sum_{n>N} e^{-t n^2} <= e^{-t N^2} / (t N)
        tail = float(np.max(np.abs(diag)) * np.max(np.exp(-t * N ** 2) / (t * N)))
    return HeatSamples(t, values, tail)


# --------------------------------------------------------------------------
# continuation
# --------------------------------------------------------------------------


def zeta_from_symbol(a: CircleSymbol, model: SpectralModel, window=DEFAULT_WINDOW) -> ZetaStructure:
    """z -> Tr(Op(a) Delta^(-z/2)) on the circle.

    The diagonal of Op(a) at mode n != 0 is sum_j mean(a_{m-j}(., sign n)) |n|^(m-j),
    so the zeta function is a finite sum of shifted Riemann zeta functions
    plus the zero-mode constant.
    """
    if model.kind != "circle":
        raise ValueError("zeta_from_symbol needs the circle model")
    blocks: list[Block] = []
    zero_mode = sum(a.component(j, 1).mean() for j in range(a.depth + 1))
    if zero_mode != 0:
        blocks.append(PolynomialPart((zero_mode,)))
    for j in range(a.depth + 1):
        c = a.component(j, 1).mean() + a.component(j, -1).mean()
        if c != 0:
            blocks.append(RiemannBlock(c, float(a.order - j)))
    return ZetaStructure(tuple(blocks), window)


def mellin_map(h: HeatExpansion, r: float = 2.0, window=DEFAULT_WINDOW) -> ZetaStructure:
    """Zeta structure of Tr(P Delta^(-z/r)) from the small-t heat expansion of Tr(P e^(-t Delta))."""
    if r <= 0:
        raise ValueError("r must be positive")
    blocks = tuple(MellinTerm(c, a, j, r) for a, j, c in h.terms if c != 0)
    return ZetaStructure(blocks, window, note="entire t>=1 contribution omitted")


def _laurent_at_zero(zs: ZetaStructure) -> LaurentSeries:
    L = zs.laurent(0.0)
    order = L.pole_order(atol=1e-13 * max(1.0, float(np.abs(L.coeffs).max())))
    if order > MAX_POLE_ORDER:
        raise PoleOrderError(f"pole of order {order} at z=0")
    return L


def higher_residue(zs: ZetaStructure, p: int) -> complex:
    """Res_{z=0} z^(p-1) zeta(z), the coefficient c_{-p} at 0."""
    if p < 1:
        raise ValueError("p must be >= 1")
    L = _laurent_at_zero(zs)
    if -p < L.low:
        raise WindowTooNarrow(f"window {L.window} does not retain c_{{-{p}}}")
    return L[-p]


def partie_finie(zs: ZetaStructure) -> complex:
    """Constant term of the Laurent expansion at 0."""
    L = _laurent_at_zero(zs)
    if L.high < 0:
        raise WindowTooNarrow("window does not retain the constant term")
    return L[0]


# --------------------------------------------------------------------------
# Connes-Moscovici remainder
# --------------------------------------------------------------------------


def _binomial_tail(z: complex, x: np.ndarray, N: int, terms: int = 90) -> np.ndarray:
    """sum_{k>N} binom(-z, k) x^k for |x| < 1/2."""
    term = generalized_binomial(-z, N + 1) * x ** (N + 1)
    total = term.copy()
    for k in range(N + 1, N + terms):
        term = term * ((-z - k) / (k + 1)) * x
        total = total + term
    return total


def cm_remainder(Q, model: SpectralModel, z: complex, N: int):
    """R_N = Delta^-z Q - Q Delta^-z - sum_{k=1}^N binom(-z,k) ad(Delta)^k(Q) Delta^(-z-k).

    Entry (m, n) equals Q_mn lambda_n^-z times the tail of the binomial
    series of (1 + x)^-z at x = (lambda_m - lambda_n)/lambda_n; small |x|
    sums the tail directly to avoid cancellation.
    """
    is_op = isinstance(Q, CircleOperator)
    M = np.asarray(Q.matrix if is_op else Q, dtype=complex)
    lam = model.eigenvalues
    if M.shape != (len(lam), len(lam)):
        raise ValueError("operator and model dimensions differ")
    z = complex(z)
    R = np.zeros_like(M)
    if z != 0:
        rows, cols = np.nonzero(M)
        lm, ln = lam[rows], lam[cols]
        x = (lm - ln) / ln
        base = ln.astype(complex) ** (-z)
        vals = np.zeros(len(rows), dtype=complex)
        small = np.abs(x) < 0.5
        vals[small] = base[small] * _binomial_tail(z, x[small], N)
        big = ~small
        if np.any(big):
            d = lm[big] - ln[big]
            partial = np.ones(big.sum(), dtype=complex)
            for k in range(1, N + 1):
                partial = partial + generalized_binomial(-z, k) * (d / ln[big]) ** k
            vals[big] = lm[big].astype(complex) ** (-z) - base[big] * partial
        R[rows, cols] = M[rows, cols] * vals
    if is_op:
        return CircleOperator(Q.N, R, None, Q.bandwidth)
    return R


def ad_power(Q: np.ndarray, model: SpectralModel, k: int) -> np.ndarray:
    """ad(Delta)^k (Q) in the eigenbasis."""
    lam = model.eigenvalues
    return (lam[:, None] - lam[None, :]) ** k * np.asarray(Q)
