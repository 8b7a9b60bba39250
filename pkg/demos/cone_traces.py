"""Trace functionals on a cone over the circle.

Near the tip, a density u = r^-p sum_k w_k(x) r^k (dr/r) dx has a
regularized integral z -> int r^z u with simple poles at z = p - k.
Its residue at 0 is Tr_{d,s}; its finite part is Tr_s.  Heat traces of
conic operators carry log t and (log t)^2 terms whose coefficients are
fixed combinations of these functionals, and the conic zeta function
picks up double poles at 0 from them.

Run:  python3 demos/cone_traces.py
"""

from __future__ import annotations

import numpy as np

from residue_index.circle import TrigPolynomial as T
from residue_index.cone import (
    BDensity,
    ConeHeatSpec,
    b_derivative,
    b_regularize,
    boundary_residue,
    boundary_value,
    conic_zeta_poles,
    heat_expansion_model,
    holomorphy_halfplane,
    regularity_diagnostic,
    tr_partial_sigma,
    tr_sigma,
)

cos = T.from_dict({1: 0.5, -1: 0.5})
u = BDensity(2, (T.constant(1.0), T.constant(1.0), T.constant(3.0) + cos))
L = b_regularize(u)
print("u = r^-2 (1 + r + (3 + cos x) r^2)")
print("   residue, partial fractions  ", L[-1].real, "  (6 pi =", 6 * np.pi, ")")
print("   residue, boundary formula   ", boundary_residue(u).real)
print("   finite part Tr_s            ", tr_sigma(u).real)

print("\nTr_s fails to be a trace; the defect is Tr_{d,s}:")
print("   Tr_s(r d_r u)               ", tr_sigma(b_derivative(u)).real)
print("   boundary term - Tr_{d,s}(u) ", (boundary_value(u) - tr_partial_sigma(u)).real)

spec = ConeHeatSpec(m=2, p=0, n=2, tr_sigma={0: 2.0}, tr_partial_sigma={0: 4.0}, a={0: 1.0}, c={-2: 0.5})
h = heat_expansion_model(spec)
print("\nheat expansion with Tr_s = 2, Tr_{d,s} = 4:")
print("   log t coefficient      ", h.coefficient(0.0, 1), " = -Tr_s/2 - Tr_{d,s}/4")
print("   (log t)^2 coefficient  ", h.coefficient(0.0, 2), " = -Tr_{d,s}/4")
print("   pole diagram (z, order, |leading|):")
for row in conic_zeta_poles(h).rows():
    print("     ", row)

print("\nhalf-plane bound max{(n-k)/2, -p/2} for n = 2 as k grows:")
for p in (-2, 0, 2):
    bounds = [str(holomorphy_halfplane(p, k, 2)) for k in range(0, 8)]
    d = regularity_diagnostic(p, 2)
    print(f"   p={p:+d}: {' '.join(bounds)}   limit {d.limit}  not regular: {d.not_regular}")
