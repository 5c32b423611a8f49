"""
A solve with a known answer
===========================

With ``p(s) = 2^s s^{1/2}`` (rising power) and the constant forcing
``Gamma(3/2)``, the solution that tends to ``M = 1`` is ``y(t) = 1 + 2^-t``.
"""

import math

import numpy as np

from nablafrac import NonlinearProblem, SolverConfig, solve_nonlinear
from nablafrac.families import ConstForcing, GeometricRising

prob = NonlinearProblem(
    a=0.0,
    nu=0.5,
    M=1.0,
    p=GeometricRising(c=2.0, nu=0.5),
    F=ConstForcing(math.gamma(1.5)),
    K=0.5,  # any positive K works, F does not depend on u
)
y, report = solve_nonlinear(prob, SolverConfig(horizon=64))

t = y.points
print("max error:", np.max(np.abs(y.values[1:] - (1 + 2.0 ** -t[1:]))))
print("\n".join(report.lines()))
