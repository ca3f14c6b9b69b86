"""Numerical toolkit for Morrey and local Hardy-Morrey analysis on grids."""

from .grid import (
    Cube,
    CubeFamily,
    DyadicCube,
    Grid,
    GridFunction,
    dyadic_family,
    enumerate_dyadic_cubes,
    integrate,
    make_grid,
    sample,
    translate_cube_family,
)
from .morrey import CoefficientField, MorreyParams, check_embedding, coefficient_norm, morrey_norm

__version__ = "0.1.0"
