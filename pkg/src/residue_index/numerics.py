"""Numeric substrate: Laurent algebra, zeta and 1/Gamma series, log-grid fits, eigensolvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import bernoulli, gamma as _gamma, rgamma

EULER_GAMMA = 0.57721566490153286061

DEFAULT_WINDOW = (-4, 4)


class IllConditionedFit(ValueError):
    """Design matrix of a log-expansion fit is numerically rank deficient."""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class NotHermitian(ValueError):
    pass


# --------------------------------------------------------------------------
# Laurent / power series
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LaurentSeries:
    """Window c_low .. c_high of a Laurent expansion sum_k c_k (z - center)^k.

    Only the retained window is meaningful; arithmetic truncates to the
    largest window on which every coefficient is actually determined.
    """

    center: complex
    low: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "center", complex(self.center))

    @classmethod
    def from_dict(cls, center: complex, coeffs: dict[int, complex], window: tuple[int, int]) -> LaurentSeries:
        lo, hi = window
        arr = np.zeros(hi - lo + 1, dtype=complex)
        for k, v in coeffs.items():
            if lo <= k <= hi:
                arr[k - lo] = v
        return cls(center, lo, arr)

    @classmethod
    def zero(cls, center: complex = 0.0, window: tuple[int, int] = DEFAULT_WINDOW) -> LaurentSeries:
        return cls(center, window[0], np.zeros(window[1] - window[0] + 1, dtype=complex))

    @property
    def high(self) -> int:
        return self.low + len(self.coeffs) - 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.low, self.high)

    def __getitem__(self, k: int) -> complex:
        if k < self.low:
            return 0j
        if k > self.high:
            raise KeyError(f"offset {k} outside retained window {self.window}")
        return complex(self.coeffs[k - self.low])

    def as_dict(self) -> dict[int, complex]:
        return {self.low + i: complex(c) for i, c in enumerate(self.coeffs)}

    def pole_order(self, atol: float = 0.0) -> int:
        for i, c in enumerate(self.coeffs):
            k = self.low + i
            if k >= 0:
                return 0
            if abs(c) > atol:
                return -k
        return 0

    def residue(self) -> complex:
        return self[-1]

    def constant_term(self) -> complex:
        return self[0]

    def truncate(self, window: tuple[int, int]) -> LaurentSeries:
        lo, hi = window
        if hi > self.high:
            raise KeyError(f"cannot widen window {self.window} to {window}")
        return LaurentSeries(self.center, lo, np.array([self[k] for k in range(lo, hi + 1)]))

    def _check_center(self, other: LaurentSeries):
        if abs(self.center - other.center) > 1e-14 * max(1.0, abs(self.center)):
            raise ValueError("Laurent series expanded at different centers")

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            if self.high < 0:
                raise KeyError("constant term outside retained window")
            c = self.coeffs.copy()
            if self.low <= 0:
                c[-self.low] += complex(other)
                return LaurentSeries(self.center, self.low, c)
            c = np.concatenate([np.zeros(self.low, dtype=complex), c])
            c[0] += complex(other)
            return LaurentSeries(self.center, 0, c)
        self._check_center(other)
        lo = min(self.low, other.low)
        hi = min(self.high, other.high)
        return LaurentSeries(self.center, lo, np.array([self[k] + other[k] for k in range(lo, hi + 1)]))

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(self.center, self.low, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            return LaurentSeries(self.center, self.low, self.coeffs * complex(other))
        self._check_center(other)
        lo = self.low + other.low
        hi = min(self.high + other.low, other.high + self.low)
        full = np.convolve(self.coeffs, other.coeffs)
        return LaurentSeries(self.center, lo, full[: hi - lo + 1])

    __rmul__ = __mul__

    def evaluate(self, z: complex) -> complex:
        h = complex(z) - self.center
        return complex(sum(c * h ** (self.low + i) for i, c in enumerate(self.coeffs)))


@dataclass(frozen=True)
class PowerSeries:
    """Coefficients a_0 .. a_K of a germ at 0."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __call__(self, s):
        return np.polyval(self.coeffs[::-1], s)

    def to_laurent(self, center: complex = 0.0) -> LaurentSeries:
        return LaurentSeries(center, 0, self.coeffs)


def series_exp(g: Sequence[complex], n: int) -> np.ndarray:
    """Coefficients of exp(g(s)) up to s^(n-1), with g(0) = g[0]."""
    g = np.asarray(g, dtype=complex)
    f = np.zeros(n, dtype=complex)
    f[0] = np.exp(g[0])
    for m in range(1, n):
        ks = np.arange(1, min(m, len(g) - 1) + 1)
        f[m] = np.sum(ks * g[ks] * f[m - ks]) / m
    return f


def series_div(a: Sequence[complex], b: Sequence[complex], n: int) -> np.ndarray:
    """Coefficients of a(s)/b(s) up to s^(n-1); requires b[0] != 0."""
    a = np.concatenate([np.asarray(a, dtype=complex), np.zeros(n)])[:n]
    b = np.concatenate([np.asarray(b, dtype=complex), np.zeros(n)])[:n]
    q = np.zeros(n, dtype=complex)
    for m in range(n):
        q[m] = (a[m] - np.dot(q[:m], b[m:0:-1])) / b[0]
    return q


def taylor_coefficients(f: Callable[[np.ndarray], np.ndarray], center: complex, n: int,
                        radius: float = 0.5, points: int = 64) -> np.ndarray:
    """First n Taylor coefficients of f (holomorphic on the disc) by trapezoidal Cauchy integrals."""
    points = max(points, 2 * n + 16)
    theta = 2 * np.pi * np.arange(points) / points
    w = np.exp(1j * theta)
    vals = np.asarray(f(center + radius * w), dtype=complex)
    c = np.fft.fft(vals) / points
    return c[:n] / radius ** np.arange(n)


# --------------------------------------------------------------------------
# Riemann zeta
# --------------------------------------------------------------------------


def _em_zeta(s: np.ndarray, cutoff: int, depth: int) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    n = np.arange(1, cutoff, dtype=float)
    head = np.sum(n[:, None] ** (-s.ravel()[None, :]), axis=0).reshape(s.shape)
    N = float(cutoff)
    total = head + N ** (1 - s) / (s - 1) + 0.5 * N ** (-s)
    B = bernoulli(2 * depth)
    rising = s.copy()
    for k in range(1, depth + 1):
        total = total + B[2 * k] / math.factorial(2 * k) * rising * N ** (-s - 2 * k + 1)
        rising = rising * (s + 2 * k - 1) * (s + 2 * k)
    return total


def riemann_zeta(z, cutoff: int = 50, depth: int = 6, method: str = "auto"):
    """Analytically continued Riemann zeta function.

    Euler-Maclaurin summation with ``cutoff`` explicit terms and Bernoulli
    corrections through B_{2*depth}. With ``method="auto"`` the half-plane
    Re z < 0 is reached through the functional equation instead.
    """
    arr = np.asarray(z, dtype=complex)
    if np.any(arr == 1):
        raise ValueError("riemann_zeta has a pole at z = 1")
    if method == "euler_maclaurin":
        out = _em_zeta(arr, cutoff, depth)
    elif method == "auto":
        out = np.empty(arr.shape, dtype=complex)
        left = arr.real < 0
        if np.any(~left):
            out[~left] = _em_zeta(arr[~left], cutoff, depth)
        if np.any(left):
            s = arr[left]
            out[left] = (2.0 ** s * np.pi ** (s - 1) * np.sin(np.pi * s / 2) * _gamma(1 - s)
                         * _em_zeta(1 - s, cutoff, depth))
    else:
        raise ValueError(f"unknown method {method!r}")
    return complex(out) if out.ndim == 0 else out


def riemann_zeta_laurent(s0: complex, depth: int = 5) -> LaurentSeries:
    """Laurent window c_{-1} .. c_{depth-1} of zeta at s0.

    The entire part zeta(s) - 1/(s-1) is expanded by a Cauchy integral; the
    pole part is added back exactly.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    s0 = complex(s0)
    radius = 0.5
    d1 = abs(s0 - 1)
    if 0 < d1 and abs(d1 - radius) < 0.2:
        radius = 0.25 if d1 > 0.45 else 0.8

    def entire(s):
        return riemann_zeta(s) - 1.0 / (s - 1)

    taylor = taylor_coefficients(entire, s0, depth, radius=radius)
    coeffs = np.zeros(depth + 1, dtype=complex)
    coeffs[1:] = taylor
    if s0 == 1:
        coeffs[0] = 1.0
    else:
        k = np.arange(depth)
        coeffs[1:] += (-1.0) ** k / (s0 - 1) ** (k + 1)
    return LaurentSeries(s0, -1, coeffs)


# --------------------------------------------------------------------------
# Gamma-related series
# --------------------------------------------------------------------------


def recip_gamma_series(depth: int) -> PowerSeries:
    """Taylor coefficients a_0..a_depth of 1/Gamma(s) at s = 0.

    Built as s * exp(gamma*s - sum_{k>=2} (-1)^k zeta(k) s^k / k).
    """
    if depth < 2:
        raise ValueError("depth must be >= 2")
    g = np.zeros(depth, dtype=complex)
    if depth > 1:
        g[1] = EULER_GAMMA
    for k in range(2, depth):
        g[k] = -((-1) ** k) * riemann_zeta(float(k)).real / k
    inner = series_exp(g, depth)
    return PowerSeries(np.concatenate([[0.0], inner]))


def recip_gamma_taylor(s0: float, n: int) -> np.ndarray:
    """First n Taylor coefficients of 1/Gamma at s0, with exact zeros at the non-positive integers."""
    base = recip_gamma_series(n + max(0, int(abs(round(s0)))) + 2).coeffs
    if float(s0).is_integer():
        k = int(s0)
        if k <= 0:
            # 1/Gamma(h - m) = (h-1)(h-2)...(h-m) / Gamma(h)
            poly = np.array([1.0 + 0j])
            for j in range(1, -k + 1):
                poly = np.convolve(poly, [-j, 1.0])
            return np.convolve(poly, base)[:n]
        # 1/Gamma(h + k) = [1/Gamma(h) / h] / ((1+h)(2+h)...(k-1+h))
        den = np.array([1.0 + 0j])
        for j in range(1, k):
            den = np.convolve(den, [j, 1.0])
        return series_div(base[1:], den, n)
    return taylor_coefficients(lambda s: rgamma(s), complex(s0), n, radius=0.5)


def generalized_binomial(z: complex, k: int) -> complex:
    """z (z-1) ... (z-k+1) / k!"""
    if k < 0:
        raise ValueError("k must be non-negative")
    out = 1.0 + 0j
    for j in range(k):
        out *= (z - j) / (j + 1)
    return out


# --------------------------------------------------------------------------
# Least squares on log grids
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FitTermSpec:
    """Basis t^alpha (log t)^j for a small-t expansion fit."""

    terms: tuple[tuple[float, int], ...]

    def __post_init__(self):
        terms = tuple((float(a), int(j)) for a, j in self.terms)
        for _, j in terms:
            if not 0 <= j <= 2:
                raise ValueError("log powers must lie in 0..2")
        if len(set(terms)) != len(terms):
            raise IllConditionedFit("repeated basis term in fit spec", math.inf)
        object.__setattr__(self, "terms", terms)

    def __len__(self):
        return len(self.terms)

    def design(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        logt = np.log(t)
        if not self.terms:
            return np.zeros((len(t), 0))
        return np.column_stack([t ** a * logt ** j for a, j in self.terms])


@dataclass(frozen=True)
class FitResult:
    coefficients: np.ndarray
    residual: float
    condition: float
    spec: FitTermSpec

    def coefficient(self, alpha: float, logpow: int) -> complex:
        return complex(self.coefficients[self.spec.terms.index((float(alpha), int(logpow)))])


def fit_log_expansion(t, values, spec: FitTermSpec, max_condition: float = 1e12) -> FitResult:
    """Least-squares coefficients of ``values ~ sum c t^alpha (log t)^j``.

    Columns are scaled to unit norm before a QR solve; the condition number
    of the scaled triangular factor is reported and checked.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(values)
    if np.any(t <= 0):
        raise ValueError("sample abscissae must be positive")
    if len(spec) == 0:
        return FitResult(np.zeros(0, dtype=y.dtype), float(np.linalg.norm(y)), 1.0, spec)
    if len(t) < 2 * len(spec):
        raise ValueError(f"need at least {2 * len(spec)} samples, got {len(t)}")
    X = spec.design(t)
    scale = np.linalg.norm(X, axis=0)
    if np.any(scale == 0):
        raise IllConditionedFit("zero column in design matrix", math.inf)
    Q, R = np.linalg.qr(X / scale)
    sv = np.linalg.svd(R, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if cond > max_condition:
        raise IllConditionedFit("design matrix is numerically rank deficient", cond)
    from scipy.linalg import solve_triangular

    coef = solve_triangular(R, Q.T @ y) / scale
    residual = float(np.linalg.norm(X @ coef - y))
    return FitResult(coef, residual, cond, spec)


# --------------------------------------------------------------------------
# Hermitian eigenproblems
# --------------------------------------------------------------------------


def _jacobi_eigh(A: np.ndarray, tol: float = 1e-15, max_sweeps: int = 60):
    A = np.array(A, dtype=complex)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = max(np.abs(A).max(), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(np.abs(A) ** 2) - np.sum(np.abs(np.diag(A)) ** 2), 0.0))
        if off <= tol * scale * n:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                e = apq / mag
                tau = (A[q, q].real - A[p, p].real) / (2 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1 + tau * tau))
                c = 1 / math.sqrt(1 + t * t)
                s = t * c
                # J = Phi R: J_pp = c, J_pq = s, J_qp = -s conj(e), J_qq = c conj(e)
                colp = A[:, p].copy()
                colq = A[:, q].copy()
                A[:, p] = c * colp - s * np.conj(e) * colq
                A[:, q] = s * colp + c * np.conj(e) * colq
                rowp = A[p, :].copy()
                rowq = A[q, :].copy()
                A[p, :] = c * rowp - s * e * rowq
                A[q, :] = s * rowp + c * e * rowq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * np.conj(e) * vq
                V[:, q] = s * vp + c * np.conj(e) * vq
    w = np.diag(A).real
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def hermitian_spectrum(matrix, method: str = "auto", tol: float = 1e-12):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    ``method`` is ``"jacobi"`` (cyclic Jacobi rotations), ``"lapack"`` or
    ``"auto"`` (Jacobi up to 64x64, LAPACK above).
    """
    M = np.asarray(matrix)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    norm = max(1.0, float(np.abs(M).max())) if M.size else 1.0
    if M.size and np.abs(M - M.conj().T).max() > tol * norm:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    if method == "auto":
        method = "jacobi" if M.shape[0] <= 64 else "lapack"
    if method == "jacobi":
        return _jacobi_eigh(0.5 * (M + M.conj().T))
    if method == "lapack":
        w, V = np.linalg.eigh(M)
        return w, V
    raise ValueError(f"unknown method {method!r}")


def laurent_from_terms(center: complex, terms: Iterable[tuple[int, complex]],
                       window: tuple[int, int] = DEFAULT_WINDOW) -> LaurentSeries:
    out = dict()
    for k, v in terms:
        out[k] = out.get(k, 0) + v
    return LaurentSeries.from_dict(center, out, window)
