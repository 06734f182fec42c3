"""Numerical checks of Young-type and maximal-regularity inequalities on function spaces."""

from .grid import Grid, GridFunction, fft_forward, fft_inverse, integrate, sample
from .spaces import Lebesgue, Lorentz, Morrey, x_norm
from .operators import TimeGrid, HalfLineFunction, convolve, translate, young_ratio
from .besov import BesovParams, build_lp_family, besov_norm
from .maxreg import SpaceTimeField, duhamel_solve, maxreg_ratio

__all__ = [
    "Grid", "GridFunction", "fft_forward", "fft_inverse", "integrate", "sample",
    "Lebesgue", "Lorentz", "Morrey", "x_norm",
    "TimeGrid", "HalfLineFunction", "convolve", "translate", "young_ratio",
    "BesovParams", "build_lp_family", "besov_norm",
    "SpaceTimeField", "duhamel_solve", "maxreg_ratio",
]
