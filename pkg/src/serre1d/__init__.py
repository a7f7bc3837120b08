"""Third-order hybrid finite volume / finite element solver for the 1D Serre equations.

The conserved pair ``(h, G)`` is advanced by a central-upwind finite volume
scheme with Koren-limited reconstruction and SSP-RK3; the velocity is
recovered from ``G = u h - (h^3 u_x / 3)_x`` with quadratic finite elements
before every stage.
"""

__version__ = "0.1.0"

from .analysis import convergence_study, dispersion, l1_norm
from .grid import BoundarySpec, Grid, make_grid
from .integrator import SerreModel, SimulationState, StepControls, run
from .scenarios import ScenarioConfig, SolitonParams, build, soliton_state

__all__ = [
    "BoundarySpec",
    "Grid",
    "ScenarioConfig",
    "SerreModel",
    "SimulationState",
    "SolitonParams",
    "StepControls",
    "build",
    "convergence_study",
    "dispersion",
    "l1_norm",
    "make_grid",
    "run",
    "soliton_state",
    "__version__",
]
