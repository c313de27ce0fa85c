"""Numerics for the clamped plate with singular load Delta^2 u = u^-alpha."""
__version__ = "0.1.0"

from .boggio import BoggioKernel, radial_green  # noqa: E402
from .domains import Ellipse, Rectangle, UnitBall, build_grid  # noqa: E402
from .solver import SolverConfig, solve  # noqa: E402

__all__ = ["BoggioKernel", "radial_green", "Ellipse", "Rectangle", "UnitBall", "build_grid",
           "SolverConfig", "solve", "__version__"]
