"""Commutators with log Delta, and why their expansion is only asymptotic.

delta(a) = [log Delta^(1/r), a] is exact in the eigenbasis of Delta; the
series sum ((-1)^(k-1)/k) ad(Delta)^k(a) Delta^-k approximates it, and the
remainder after N terms gains one order per extra term.  The same happens
for the complex power identity behind the Connes-Moscovici expansion.

Run:  python3 demos/log_commutators.py
"""

from __future__ import annotations

import numpy as np

from residue_index.circle import CircleOperator, CircleSymbol, estimate_order, log_commutator_symbol, quantize
from residue_index.io import parse_u_spec
from residue_index.radul import delta_matrix
from residue_index.zeta import circle_model, cm_remainder

M = 256
model = circle_model(M)
u = parse_u_spec("2 + cos(t) + exp(2 i t)")
a = CircleSymbol.multiplication(u)
exact = delta_matrix(quantize(a, M), model)

print("symbolic delta(u) against the exact commutator; the discrepancy has order -2 - depth")
print("(the series diverges on the lowest modes, so only the decay rate is meaningful):")
for depth in (1, 2, 3, 4):
    approx = quantize(log_commutator_symbol(a, depth), M)
    err = CircleOperator(M, exact.matrix - approx.matrix, None, approx.bandwidth)
    print(f"   depth {depth}: estimated order {estimate_order(err):+.3f}")

print("\nremainder of Delta^-z Q - sum_k binom(-z, k) ad^k(Q) Delta^(-z-k), z = 1:")
Q = quantize(a, 512)
big = circle_model(512)
for N in range(0, 5):
    print(f"   N = {N}: estimated order {estimate_order(cm_remainder(Q, big, 1.0, N)):+.3f}")
print("   at z = 0 the remainder is", np.abs(cm_remainder(Q, big, 0.0, 3).matrix).max())
