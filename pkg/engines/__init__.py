"""
Operator engines acting on concrete tuples and scalar points
"""

from .tuples import OperatorTuple, classify, membership
from .poisson import PoissonKernel, build_poisson
from .kernel import PickProblem, kernel_value, pick_feasible
from .charcurv import char_operator, char_point, curvature, star_curvature

__all__ = [
    'OperatorTuple',
    'classify',
    'membership',
    'PoissonKernel',
    'build_poisson',
    'PickProblem',
    'kernel_value',
    'pick_feasible',
    'char_operator',
    'char_point',
    'curvature',
    'star_curvature'
]
