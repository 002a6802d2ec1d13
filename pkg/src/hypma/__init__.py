"""Method-of-characteristics solver for the hyperbolic Monge-Ampere equation

    u_xx u_yy - u_xy**2 + f**2 = 0

on rectangles, marching in x from Cauchy data on the western edge.
"""

from .problem import ProblemSpec, builtin
from .solver import SolutionField, solve, trace_characteristic

__all__ = ["ProblemSpec", "SolutionField", "builtin", "solve", "trace_characteristic"]
__version__ = "0.1.0"
