"""2D P1 finite elements with classical and parameter-free (lifting
stabilized) symmetric Nitsche formulations, for fitted Dirichlet problems and
unfitted two-phase interface problems."""

__version__ = "0.1.0"

from . import analysis, assembly, cutcells, kernels, linalg, mesh, quadrature, spaces  # noqa: F401
