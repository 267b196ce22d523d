"""2D time-harmonic acoustic scattering lab with FEM-BEM coupling.

Subpackages: special functions (specfun), structured meshing (geometry),
boundary integral operators (bem), P1 finite elements (fem), numerical linear
algebra kernels (krylov), Mie-series references (analytic), coupling and
substructured solvers (coupling), experiment harness (experiments, cli).
"""

__version__ = "0.1.0"
