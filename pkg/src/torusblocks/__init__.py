"""Toric one-point Virasoro conformal blocks: series, recursion, Monte Carlo and quadrature routes."""

from .closedform import a0_closed, a0_integer_N, y0
from .estimators import BlockEstimator
from .nekrasov import block_series
from .qseries import QSeries
from .specfn import BlockParams, ModularParam
from .zamo import recursion_series

__all__ = ["BlockEstimator", "BlockParams", "ModularParam", "QSeries", "a0_closed", "a0_integer_N",
           "block_series", "recursion_series", "y0"]
__version__ = "0.1.0"
