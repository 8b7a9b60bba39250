"""Zeta functions with poles of order up to three, and their higher residues.

A heat expansion sum c t^alpha (log t)^j is sent to its Mellin image
zeta(z) = (1/Gamma(z/2)) int_0^1 t^(z/2 - 1) (...) dt, continued to C.
A (log t)^2 term at alpha = 0 produces a double pole at 0; the coefficient
of z^-2 is the second residue.

Run:  python3 demos/zeta_residues.py
"""

from __future__ import annotations

import numpy as np

from residue_index.circle import random_symbol, star_compose, wodzicki_residue
from residue_index.numerics import EULER_GAMMA
from residue_index.zeta import HeatExpansion, circle_model, higher_residue, mellin_map, partie_finie, zeta_from_symbol

h = HeatExpansion(((0.0, 2, 1.0),))
L = mellin_map(h).laurent(0.0)
print("(log t)^2  ->  zeta(z) =", f"{L[-2].real:.12f} z^-2 + {L[-1].real:.12f} z^-1 + ...")
print("           expected      8 z^-2 + 4 gamma z^-1 with 4 gamma =", 4 * EULER_GAMMA)

h = HeatExpansion(((-1.0, 2, 1.0), (-0.5, 0, 1.0), (0.0, 1, -0.5)))
print("\npoles of", h.terms)
for p in mellin_map(h).poles():
    print(f"   z = {p.location + 0.0:+.1f}  order {p.order}  leading {p.leading.real:+.6f}")

print("\nsymbols on the circle: zeta_a(z) = sum_n abar(n) |n|^-z")
rng = np.random.default_rng(3)
a = random_symbol(rng, 0, depth=3)
zs = zeta_from_symbol(a, circle_model(4))
print("   residue at 0      ", higher_residue(zs, 1))
print("   Wodzicki residue  ", wodzicki_residue(a))
print("   finite part at 0  ", partie_finie(zs))

b = random_symbol(rng, 1, depth=3)
comm = star_compose(a, b, 4) - star_compose(b, a, 4)
print("\nthe residue is a trace: res(a*b - b*a) =", abs(higher_residue(zeta_from_symbol(comm, circle_model(4)), 1)))
