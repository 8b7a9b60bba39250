"""Radul-type cocycles on the circle and the three-way Toeplitz index check."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circle import (
    CircleOperator,
    CircleSymbol,
    NotStabilized,
    TrigPolynomial,
    VanishingSymbol,
    fredholm_index,
    log_commutator_symbol,
    star_compose,
    toeplitz,
    toeplitz_symbol,
    winding_number,
)
from .zeta import SpectralModel, circle_model, higher_residue, zeta_from_symbol

# The symbolic cocycle and Tr([T_{1/u}, T_u]) both return +winding(u),
# while ind T_u = -winding(u); reports are multiplied by this constant.
INDEX_CALIBRATION = -1.0


class MethodDisagreement(RuntimeError):
    pass


@dataclass(frozen=True)
class CocycleReport:
    """value = sum of breakdown contributions (already calibrated)."""

    value: complex
    breakdown: tuple[tuple[int, complex], ...]
    method: str
    calibration: float = 1.0
    details: dict = field(default_factory=dict, compare=False)

    def rounded(self) -> int:
        return int(round(self.value.real))

    def deviation(self) -> float:
        return abs(self.value - self.rounded())


def delta_matrix(a, model: SpectralModel, k: int = 1):
    """k-fold commutator with log(Delta^(1/r)) in the eigenbasis of Delta."""
    if k < 1:
        raise ValueError("k must be >= 1")
    is_op = isinstance(a, CircleOperator)
    M = np.asarray(a.matrix if is_op else a)
    loglam = np.log(model.eigenvalues) / model.r
    out = (loglam[:, None] - loglam[None, :]) ** k * M
    if is_op:
        order = None if a.declared_order is None else a.declared_order - k
        return CircleOperator(a.N, out, order, a.bandwidth)
    return out


def delta_power_symbol(a: CircleSymbol, p: int, depth: int | None = None) -> CircleSymbol:
    """delta^p(a) by repeated symbolic log-commutators."""
    need = max(p + 2, a.order - p + 2)
    depth = need if depth is None else max(depth, 1)
    out = a
    for _ in range(p):
        out = log_commutator_symbol(out, depth)
    return out


def _compose_to_residue(a: CircleSymbol, b: CircleSymbol) -> CircleSymbol:
    # keep every homogeneous term down to order -2
    depth = max(a.order + b.order + 2, 0)
    return star_compose(a, b, depth)


def generalized_radul(a0: CircleSymbol, a1: CircleSymbol, p_max: int = 1,
                      calibration: float = INDEX_CALIBRATION) -> CocycleReport:
    """sum_{p=1}^{p_max} ((-1)^(p-1)/p!) res_p(a0 delta^p(a1)), times the calibration constant."""
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    model = circle_model(1)
    breakdown = []
    for p in range(1, p_max + 1):
        d = delta_power_symbol(a1, p)
        zs = zeta_from_symbol(_compose_to_residue(a0, d), model)
        term = (-1) ** (p - 1) / math.factorial(p) * higher_residue(zs, p)
        breakdown.append((p, calibration * term))
    value = sum(c for _, c in breakdown)
    return CocycleReport(complex(value), tuple(breakdown), "symbolic", calibration)


def boundary_cocycle_direct(A0: CircleOperator, A1: CircleOperator, margin: int | None = None,
                            tol: float = 1e-8) -> complex:
    """Tr([A0, A1]) over interior modes, checked against a block 8 modes smaller on each side."""
    if A0.N != A1.N:
        raise ValueError("operators live on different truncations")
    N = A0.N
    if margin is None:
        margin = 2 * (A0.bandwidth + A1.bandwidth) + 8
    # diagonal of A0 A1 - A1 A0 without forming the products
    diag = np.sum(A0.matrix * A1.matrix.T, axis=1) - np.sum(A1.matrix * A0.matrix.T, axis=1)
    traces = []
    for m in (margin, margin + 8):
        K = N - m
        if K < 1:
            raise ValueError("truncation too small for the requested margin")
        traces.append(diag[N - K: N + K + 1].sum())
    if abs(traces[0] - traces[1]) > tol:
        raise NotStabilized(f"commutator trace not stable: {traces[0]} vs {traces[1]}")
    return complex(traces[0])


@dataclass(frozen=True)
class IndexPairing:
    kernel_count: CocycleReport
    symbolic: CocycleReport
    spectral_direct: CocycleReport
    winding: int

    def as_tuple(self):
        return (self.kernel_count, self.symbolic, self.spectral_direct)

    def values(self) -> tuple[complex, complex, complex]:
        return tuple(r.value for r in self.as_tuple())


def index_pairing_toeplitz(u: TrigPolynomial, N: int = 256, tol: float = 1e-4) -> IndexPairing:
    """Index of T_u three ways: kernel count, symbolic cocycle, commutator trace."""
    if not u.is_nowhere_vanishing():
        raise VanishingSymbol("u vanishes on the circle")
    w = winding_number(u)
    inv = u.reciprocal()

    ind = fredholm_index(toeplitz(u, N))
    kernel = CocycleReport(complex(ind), ((0, complex(ind)),), "kernel-count", 1.0, {"N": N})

    symbolic = generalized_radul(toeplitz_symbol(inv), toeplitz_symbol(u), 1)

    work = max(N, 4 * inv.degree + 16)
    raw = boundary_cocycle_direct(toeplitz(inv, work, check=False), toeplitz(u, work, check=False))
    direct = CocycleReport(INDEX_CALIBRATION * raw, ((1, INDEX_CALIBRATION * raw),), "spectral-direct",
                           INDEX_CALIBRATION, {"N": work, "raw_trace": raw})

    reports = (kernel, symbolic, direct)
    for i in range(3):
        for j in range(i + 1, 3):
            if abs(reports[i].value - reports[j].value) > tol:
                raise MethodDisagreement(
                    f"{reports[i].method}={reports[i].value} vs {reports[j].method}={reports[j].value}")
    return IndexPairing(kernel, symbolic, direct, w)
