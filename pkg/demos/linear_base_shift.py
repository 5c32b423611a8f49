"""
Shifting the base of a linear equation
======================================

For ``q(t) = 20 * 2^-t`` the summation map based at ``a = 0`` is not a
contraction (``gamma_0`` is about 8.6). Moving the base to ``b`` drops the
early, large values of ``q`` and ``gamma_b`` falls below 0.95 at ``b = 2``.
"""

from nablafrac import LinearProblem, contraction_constant_linear, solve_linear
from nablafrac.families import Geometric, GeometricRising

prob = LinearProblem(
    a=0.0,
    nu=0.5,
    M=1.0,
    p=GeometricRising(c=2.0, nu=0.5),
    q=Geometric(20.0, 0.5),
    f=Geometric(-1.0, 0.5),
)
for b in range(5):
    print(b, contraction_constant_linear(prob, 64, float(b)).constant)

b, y, report = solve_linear(prob)
print("base b =", b, "first stored point", y.base + y.first_offset)
print("y(b - 1 .. b + 4) =", y.values[:6])
print("max residual", report.max_residual)
