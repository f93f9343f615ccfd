"""Numerical lab for the dimensionless dipolar Gross-Pitaevskii equation.

Subpackages by concern: ``grid`` (periodic spectral box), ``functionals``
(energies, rescalings, regime classification), ``ground_state`` (constrained
solvers), ``dynamics`` (split-step evolution and diagnostics),
``experiments`` (scenario runner), ``config``/``io``/``cli`` (plumbing).
"""

from .errors import DBECError
from .functionals import EnergyBreakdown, PhysParams, breakdown, classify_regime
from .grid import GridSpec, WaveField, make_grid

__version__ = "0.1.0"

__all__ = ["DBECError", "EnergyBreakdown", "GridSpec", "PhysParams", "WaveField", "breakdown",
           "classify_regime", "make_grid", "__version__"]
