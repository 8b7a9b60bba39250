"""Classical pseudodifferential calculus on the circle at desk scale.

Symbols live on the two-sheet cosphere S^1 x {+1, -1}; a component of
homogeneity mu on sheet s stands for a_mu(t, s) |xi|^mu.  Operators are
dense matrices on Fourier modes -N..N, acting on e^{int} by left
quantization, so column n of Op(a) holds the Fourier coefficients of
a(., n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class NotStabilized(RuntimeError):
    """A truncated computation did not settle when the truncation moved."""


class VanishingSymbol(ValueError):
    pass


# --------------------------------------------------------------------------
# Trigonometric polynomials
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TrigPolynomial:
    """u(t) = sum_{|n| <= d} c_n e^{int}; ``coeffs[n + d]`` holds c_n."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.coeffs, dtype=complex))
        if len(c) % 2 == 0:
            raise ValueError("coefficient array must have odd length 2d+1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_dict(cls, coeffs: dict[int, complex]) -> TrigPolynomial:
        d = max((abs(int(n)) for n in coeffs), default=0)
        arr = np.zeros(2 * d + 1, dtype=complex)
        for n, v in coeffs.items():
            arr[int(n) + d] += v
        return cls(arr)

    @classmethod
    def constant(cls, c: complex) -> TrigPolynomial:
        return cls(np.array([c], dtype=complex))

    @classmethod
    def mode(cls, k: int, c: complex = 1.0) -> TrigPolynomial:
        return cls.from_dict({k: c})

    @classmethod
    def from_samples(cls, values: np.ndarray, tol: float = 1e-15) -> TrigPolynomial:
        """Interpolating trig polynomial of equispaced samples on [0, 2pi), trimmed."""
        M = len(values)
        c = np.fft.fft(values) / M
        d = (M - 1) // 2
        arr = np.concatenate([c[M - d:], c[: d + 1]])
        return cls(arr).trimmed(tol)

    @property
    def degree(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def coeff(self, n: int) -> complex:
        d = self.degree
        return complex(self.coeffs[n + d]) if abs(n) <= d else 0j

    def as_dict(self) -> dict[int, complex]:
        d = self.degree
        return {n - d: complex(c) for n, c in enumerate(self.coeffs) if c != 0}

    def mean(self) -> complex:
        return self.coeff(0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        d = self.degree
        n = np.arange(-d, d + 1)
        return np.exp(1j * np.multiply.outer(t, n)) @ self.coeffs

    def padded(self, d: int) -> np.ndarray:
        """Coefficients on -d..d (d >= degree)."""
        own = self.degree
        if d < own:
            raise ValueError("cannot pad to a smaller degree")
        return np.pad(self.coeffs, (d - own, d - own))

    def trimmed(self, tol: float = 0.0) -> TrigPolynomial:
        scale = np.abs(self.coeffs).max() if len(self.coeffs) else 0.0
        d = self.degree
        keep = 0
        for n in range(d, 0, -1):
            if abs(self.coeffs[d + n]) > tol * scale or abs(self.coeffs[d - n]) > tol * scale:
                keep = n
                break
        return TrigPolynomial(self.coeffs[d - keep: d + keep + 1])

    def __add__(self, other):
        if not isinstance(other, TrigPolynomial):
            other = TrigPolynomial.constant(other)
        d = max(self.degree, other.degree)
        return TrigPolynomial(self.padded(d) + other.padded(d))

    __radd__ = __add__

    def __neg__(self):
        return TrigPolynomial(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TrigPolynomial):
            return TrigPolynomial(np.convolve(self.coeffs, other.coeffs))
        return TrigPolynomial(self.coeffs * complex(other))

    __rmul__ = __mul__

    def weighted(self, power: int) -> TrigPolynomial:
        """Apply D_t^power, D_t = (1/i) d/dt, i.e. multiply c_n by n^power."""
        n = np.arange(-self.degree, self.degree + 1)
        return TrigPolynomial(self.coeffs * n.astype(float) ** power)

    def derivative(self) -> TrigPolynomial:
        n = np.arange(-self.degree, self.degree + 1)
        return TrigPolynomial(1j * n * self.coeffs)

    def conj(self) -> TrigPolynomial:
        return TrigPolynomial(np.conj(self.coeffs[::-1]))

    def min_abs(self, samples: int = 4096) -> float:
        t = 2 * np.pi * np.arange(samples) / samples
        return float(np.abs(self(t)).min())

    def is_nowhere_vanishing(self, samples: int = 4096, rtol: float = 1e-8) -> bool:
        scale = np.abs(self.coeffs).sum()
        return scale > 0 and self.min_abs(samples) > rtol * scale

    def reciprocal(self, samples: int = 8192, tol: float = 1e-15) -> TrigPolynomial:
        """Fourier truncation of 1/u (exponentially convergent for analytic nowhere-vanishing u)."""
        if not self.is_nowhere_vanishing(samples):
            raise VanishingSymbol("cannot invert a vanishing trigonometric polynomial")
        t = 2 * np.pi * np.arange(samples) / samples
        return TrigPolynomial.from_samples(1.0 / self(t), tol)


# --------------------------------------------------------------------------
# Symbols
# --------------------------------------------------------------------------

SHEETS = (1, -1)


@dataclass(frozen=True)
class CircleSymbol:
    """Finite classical symbol sum_j a_{m-j}(t, s) |xi|^{m-j} on both sheets.

    ``components[j]`` is a pair (plus-sheet, minus-sheet) of trig
    polynomials; components past the last one are exactly zero.
    """

    order: int
    components: tuple[tuple[TrigPolynomial, TrigPolynomial], ...]

    def __post_init__(self):
        comps = tuple((_tp(p), _tp(m)) for p, m in self.components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "order", int(self.order))

    # constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, order: int = 0) -> CircleSymbol:
        z = TrigPolynomial.constant(0)
        return cls(order, ((z, z),))

    @classmethod
    def homogeneous(cls, order: int, plus, minus=None) -> CircleSymbol:
        minus = plus if minus is None else minus
        return cls(order, ((_tp(plus), _tp(minus)),))

    @classmethod
    def multiplication(cls, u) -> CircleSymbol:
        return cls.homogeneous(0, u)

    @classmethod
    def xi(cls) -> CircleSymbol:
        """The symbol xi = s |xi| of D = (1/i) d/dt."""
        return cls.homogeneous(1, 1.0, -1.0)

    # accessors ------------------------------------------------------------
    @property
    def depth(self) -> int:
        return len(self.components) - 1

    def component(self, j: int, sheet: int) -> TrigPolynomial:
        if 0 <= j < len(self.components):
            return self.components[j][0 if sheet > 0 else 1]
        return TrigPolynomial.constant(0)

    def homogeneous_part(self, degree: int, sheet: int) -> TrigPolynomial:
        return self.component(self.order - degree, sheet)

    @property
    def max_degree(self) -> int:
        return max(max(p.degree, m.degree) for p, m in self.components)

    def column(self, n: int) -> TrigPolynomial:
        """a(., n) with the convention that the zero mode reads the plus sheet at |n| = 1."""
        sheet = 1 if n >= 0 else -1
        size = max(abs(n), 1)
        out = TrigPolynomial.constant(0)
        for j in range(len(self.components)):
            out = out + self.component(j, sheet) * float(size) ** (self.order - j)
        return out

    def trimmed(self, tol: float = 0.0) -> CircleSymbol:
        comps = [(p.trimmed(tol), m.trimmed(tol)) for p, m in self.components]
        return CircleSymbol(self.order, tuple(comps))

    # algebra --------------------------------------------------------------
    def _aligned(self, other: CircleSymbol):
        top = max(self.order, other.order)
        bottom = min(self.order - self.depth, other.order - other.depth)
        return top, top - bottom

    def __add__(self, other: CircleSymbol) -> CircleSymbol:
        top, J = self._aligned(other)
        comps = []
        for j in range(J + 1):
            mu = top - j
            comps.append(tuple(self.homogeneous_part(mu, s) + other.homogeneous_part(mu, s) for s in SHEETS))
        return CircleSymbol(top, tuple(comps))

    def __neg__(self) -> CircleSymbol:
        return CircleSymbol(self.order, tuple((-p, -m) for p, m in self.components))

    def __sub__(self, other: CircleSymbol) -> CircleSymbol:
        return self + (-other)

    def __mul__(self, c) -> CircleSymbol:
        """Scalar multiple (use star_compose for operator products)."""
        return CircleSymbol(self.order, tuple((p * c, m * c) for p, m in self.components))

    __rmul__ = __mul__


def _tp(x) -> TrigPolynomial:
    return x if isinstance(x, TrigPolynomial) else TrigPolynomial.constant(x)


# --------------------------------------------------------------------------
# Operators
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CircleOperator:
    """Dense matrix on Fourier modes -N..N."""

    N: int
    matrix: np.ndarray = field(repr=False)
    declared_order: float | None = None
    bandwidth: int = 0

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        if M.shape != (2 * self.N + 1, 2 * self.N + 1):
            raise ValueError(f"matrix shape {M.shape} does not match truncation N={self.N}")
        object.__setattr__(self, "matrix", M)

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def _combine(self, other: CircleOperator, matrix, order=None) -> CircleOperator:
        return CircleOperator(self.N, matrix, order, max(self.bandwidth, other.bandwidth))

    def __add__(self, other: CircleOperator) -> CircleOperator:
        return self._combine(other, self.matrix + other.matrix)

    def __sub__(self, other: CircleOperator) -> CircleOperator:
        return self._combine(other, self.matrix - other.matrix)

    def __matmul__(self, other: CircleOperator) -> CircleOperator:
        order = None
        if self.declared_order is not None and other.declared_order is not None:
            order = self.declared_order + other.declared_order
        return CircleOperator(self.N, self.matrix @ other.matrix, order, self.bandwidth + other.bandwidth)

    def __mul__(self, c) -> CircleOperator:
        return CircleOperator(self.N, self.matrix * c, self.declared_order, self.bandwidth)

    __rmul__ = __mul__

    def adjoint(self) -> CircleOperator:
        return CircleOperator(self.N, self.matrix.conj().T, self.declared_order, self.bandwidth)


def quantize(a: CircleSymbol, N: int) -> CircleOperator:
    """Matrix of Op(a) on modes -N..N: entry (n + k, n) is the k-th Fourier coefficient of a(., n)."""
    D = a.max_degree
    if N <= D:
        raise ValueError(f"truncation N={N} must exceed the symbol degree {D}")
    modes = np.arange(-N, N + 1)
    size = np.maximum(np.abs(modes), 1).astype(float)
    sheet_plus = modes >= 0
    # coefficient tables: coef[s][j] has shape (2D+1,)
    M = np.zeros((2 * N + 1, 2 * N + 1), dtype=complex)
    for k in range(-D, D + 1):
        diag = np.zeros(2 * N + 1, dtype=complex)
        for j in range(len(a.components)):
            powj = size ** (a.order - j)
            cp = a.component(j, 1).coeff(k)
            cm = a.component(j, -1).coeff(k)
            diag += np.where(sheet_plus, cp, cm) * powj
        # column n -> row n + k
        cols = np.arange(2 * N + 1)
        rows = cols + k
        ok = (rows >= 0) & (rows <= 2 * N)
        M[rows[ok], cols[ok]] = diag[ok]
    return CircleOperator(N, M, float(a.order), D)


def _falling(mu: int, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= mu - i
    return out


def star_compose(a: CircleSymbol, b: CircleSymbol, depth: int) -> CircleSymbol:
    """Symbol of Op(a) Op(b) through ``depth`` orders below the top.

    Uses a # b ~ sum_k (1/k!) d_xi^k a . D_t^k b, with
    d_xi^k |xi|^mu = s^k mu(mu-1)...(mu-k+1) |xi|^(mu-k) on sheet s.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    top = a.order + b.order
    comps = []
    for jout in range(depth + 1):
        pair = []
        for s in SHEETS:
            acc = TrigPolynomial.constant(0)
            for ja in range(min(jout, a.depth) + 1):
                mu = a.order - ja
                for k in range(jout - ja + 1):
                    jb = jout - ja - k
                    if jb > b.depth:
                        continue
                    coef = s ** k * _falling(mu, k) / math.factorial(k)
                    if coef == 0:
                        continue
                    acc = acc + a.component(ja, s) * b.component(jb, s).weighted(k) * coef
            pair.append(acc)
        comps.append(tuple(pair))
    return CircleSymbol(top, tuple(comps))


def log_commutator_symbol(a: CircleSymbol, depth: int) -> CircleSymbol:
    """Symbol of delta(a) = [log |D|, Op(a)] through ``depth`` orders below its top.

    Expansion sum_{k>=1} ((-1)^(k-1)/k) xi^(-k) D_t^k a, order(a) - 1 on top.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    comps = []
    for jout in range(depth + 1):
        pair = []
        for s in SHEETS:
            acc = TrigPolynomial.constant(0)
            for ja in range(min(jout, a.depth) + 1):
                k = jout - ja + 1
                coef = (-1) ** (k - 1) / k * s ** k
                acc = acc + a.component(ja, s).weighted(k) * coef
            pair.append(acc)
        comps.append(tuple(pair))
    return CircleSymbol(a.order - 1, tuple(comps))


def wodzicki_residue(a: CircleSymbol) -> complex:
    """(1/2pi) int (a_{-1}(t,+) + a_{-1}(t,-)) dt."""
    return a.homogeneous_part(-1, 1).mean() + a.homogeneous_part(-1, -1).mean()


# --------------------------------------------------------------------------
# Hardy space and Toeplitz operators
# --------------------------------------------------------------------------


def hardy_projection(N: int) -> CircleOperator:
    """Projection onto modes n >= 0 (sign(0) := +1)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    modes = np.arange(-N, N + 1)
    return CircleOperator(N, np.diag((modes >= 0).astype(complex)), 0.0, 0)


def multiplication(u: TrigPolynomial, N: int) -> CircleOperator:
    return quantize(CircleSymbol.multiplication(u), N)


def toeplitz(u: TrigPolynomial, N: int, check: bool = True) -> CircleOperator:
    """T_u = P u P - (1 - P) on modes -N..N."""
    if check:
        if not u.is_nowhere_vanishing():
            raise VanishingSymbol("Toeplitz symbol vanishes on the circle")
        if N <= 4 * u.degree:
            raise ValueError(f"truncation N={N} must exceed 4*deg(u)={4 * u.degree}")
    plus = np.arange(-N, N + 1) >= 0
    M = multiplication(u, N).matrix * np.outer(plus, plus)
    M[~plus, ~plus] = -1.0
    return CircleOperator(N, M, 0.0, u.degree)


def toeplitz_symbol(u: TrigPolynomial) -> CircleSymbol:
    """Principal symbol of P u P - (1 - P): u on the plus sheet, -1 on the minus sheet."""
    return CircleSymbol.homogeneous(0, u, -1.0)


def winding_number(u: TrigPolynomial, points: int = 4096, refinements: int = 2) -> int:
    """(1/2pi i) int u'/u dt by the trapezoidal rule, rounded."""
    if not u.is_nowhere_vanishing(max(points, 4096)):
        raise VanishingSymbol("winding number of a vanishing function")
    du = u.derivative()
    for _ in range(refinements + 1):
        t = 2 * np.pi * np.arange(points) / points
        w = np.mean(du(t) / u(t)) / 1j
        nearest = round(w.real)
        if abs(w - nearest) <= 0.1:
            return int(nearest)
        points *= 4
    raise NotStabilized(f"winding quadrature ambiguous: {w}")


def _kernel_dimension(M: np.ndarray, threshold: float, scale: float) -> int:
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(sv < threshold * scale))


def fredholm_index(op: CircleOperator, interior_margin: int | None = None, threshold: float = 1e-8) -> int:
    """dim ker - dim coker, read from singular values on the interior block.

    The operator is restricted to interior modes |n| <= N - margin (columns
    for the kernel, rows for the cokernel), where truncation is invisible
    to a banded operator; the count is repeated with 8 fewer interior modes
    and must agree.
    """
    N = op.N
    if interior_margin is None:
        interior_margin = max(4 * op.bandwidth, 1)
    scale = np.linalg.norm(op.matrix, 2)
    results = []
    for margin in (interior_margin, interior_margin + 8):
        K = N - margin
        if K < 1:
            raise ValueError("interior block is empty; increase N")
        idx = np.arange(N - K, N + K + 1)
        ker = _kernel_dimension(op.matrix[:, idx], threshold, scale)
        coker = _kernel_dimension(op.matrix[idx, :].conj().T, threshold, scale)
        results.append(ker - coker)
    if results[0] != results[1]:
        raise NotStabilized(f"kernel count changed with the truncation: {results}")
    return results[0]


def estimate_order(op: CircleOperator, floor: float = 0.0) -> float:
    """Slope of log ||M e_n|| against log(1 + |n|) for |n| in [N/4, 3N/4].

    Columns with norm <= ``floor`` are treated as zero; if nothing is left
    the operator is reported as smoothing (-inf).
    """
    N = op.N
    if N < 32:
        raise ValueError("estimate_order needs N >= 32")
    modes = op.modes
    sel = (np.abs(modes) >= N / 4) & (np.abs(modes) <= 3 * N / 4)
    norms = np.linalg.norm(op.matrix[:, sel], axis=0)
    x = np.log1p(np.abs(modes[sel]))
    keep = norms > floor
    if keep.sum() < 2:
        return -math.inf
    slope, _ = np.polyfit(x[keep], np.log(norms[keep]), 1)
    return float(slope)


def random_symbol(rng: np.random.Generator, order: int, depth: int = 1, degree: int = 2) -> CircleSymbol:
    """Random symbol with complex trig-polynomial components (for tests and demos)."""
    comps = []
    for _ in range(depth + 1):
        pair = []
        for _s in SHEETS:
            c = rng.normal(size=2 * degree + 1) + 1j * rng.normal(size=2 * degree + 1)
            pair.append(TrigPolynomial(c / (2 * degree + 1)))
        comps.append(tuple(pair))
    return CircleSymbol(order, tuple(comps))


def random_nonvanishing(rng: np.random.Generator, degree: int = 3, margin: float = 0.2) -> TrigPolynomial:
    """Random trig polynomial of degree <= ``degree`` whose zeros (as a Laurent polynomial) avoid the annulus 1-margin < |z| < 1/(1-margin)."""
    while True:
        c = rng.normal(size=2 * degree + 1) + 1j * rng.normal(size=2 * degree + 1)
        u = TrigPolynomial(c).trimmed()
        roots = laurent_roots(u)
        if len(roots) == 0 or np.all((np.abs(roots) < 1 - margin) | (np.abs(roots) > 1 / (1 - margin))):
            return u


def laurent_roots(u: TrigPolynomial) -> np.ndarray:
    """Zeros of z^d u(z) (u read as a Laurent polynomial in z = e^{it})."""
    c = np.trim_zeros(u.coeffs[::-1], "f")
    c = np.trim_zeros(c, "b")
    if len(c) <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(c)


def argument_principle_winding(u: TrigPolynomial) -> int:
    """Winding via zero counting: (#zeros of z^d u inside |z|<1) - (lowest power shift)."""
    d = u.degree
    coeffs = u.coeffs
    low = next(i for i, c in enumerate(coeffs) if c != 0) - d
    high = max(i for i, c in enumerate(coeffs) if c != 0) - d
    poly = coeffs[low + d: high + d + 1][::-1]
    roots = np.roots(poly) if len(poly) > 1 else np.zeros(0)
    return int(np.sum(np.abs(roots) < 1)) + low
