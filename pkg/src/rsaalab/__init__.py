"""Numerical laboratory for quantum and classical optimization landscapes.

Subpackages
-----------
functions   benchmark objectives and rotated block composition
grid        Dirichlet grids and sparse Schrödinger/Witten operators
spectral    low-lying eigenpairs, gaps, ground-state potentials
adiabatic   real-space adiabatic evolution and runtime formulas
classical   Langevin, basin-hopping, annealing, evolution, Hessian recovery
morse       sublevel pairings, barriers, Eyring-Kramers rates, Agmon distance
harness     time-to-solution plans, figure data and the command line
"""

from . import errors

__version__ = "0.1.0"
__all__ = ["errors", "__version__"]
