"""Residue traces, zeta functions and index cocycles, made executable.

Submodules: ``numerics`` (zeta, 1/Gamma, Laurent series, fits, eigensolver),
``circle`` (symbol calculus on S^1), ``zeta`` (zeta structures and higher
residues), ``radul`` (cocycles and the Toeplitz index), ``cone`` (trace
functionals on the model cone), ``io`` and ``cli``.
"""

__version__ = "0.1.0"
