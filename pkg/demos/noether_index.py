"""The index of a Toeplitz operator, computed three ways.

For a nowhere-vanishing trig polynomial u the Toeplitz operator
T_u = P u P - (1 - P) is Fredholm with index -winding(u).  We compare

  * a kernel count: singular values of a truncation of T_u,
  * the residue cocycle res(a0 * delta(a1)) on the symbols of T_{1/u}, T_u,
  * the trace of the commutator [T_{1/u}, T_u] on a large truncation.

Run:  python3 demos/noether_index.py
"""

from __future__ import annotations

import numpy as np

from residue_index.circle import TrigPolynomial, random_nonvanishing, winding_number
from residue_index.io import parse_u_spec
from residue_index.radul import INDEX_CALIBRATION, index_pairing_toeplitz


def show(label: str, u: TrigPolynomial) -> None:
    res = index_pairing_toeplitz(u, N=256)
    k, s, d = (v.real for v in res.values())
    print(f"{label:>28}  winding {res.winding:+d}   kernel {k:+.0f}   symbolic {s:+.12f}   trace {d:+.12f}")


print("calibration constant for the cocycle routes:", INDEX_CALIBRATION)
print()

for text in ("exp(i t)", "exp(-2 i t)", "3 + cos(t)", "(2 + exp(i t)) exp(-2 i t)"):
    show(text, parse_u_spec(text))

# Scaling by a constant is a homotopy through invertibles, so nothing moves.
u = parse_u_spec("exp(i t) + 0.3 exp(-i t)")
show("u", u)
show("(2 - 5i) u", u * (2 - 5j))

print("\nrandom symbols of degree <= 3:")
rng = np.random.default_rng(0)
for i in range(5):
    u = random_nonvanishing(rng, 3)
    show(f"random[{i}] (deg {u.degree})", u)
    assert winding_number(u) == -index_pairing_toeplitz(u, N=256).kernel_count.rounded()
