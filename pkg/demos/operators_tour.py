"""
Nabla fractional sums and differences
=====================================

Fractional sums are convolutions with the kernel weights
``w_k = k^{nu-1}/Gamma(nu)`` (rising power); fractional differences are
integer differences of a fractional sum of the complementary order.
"""

import math

import numpy as np

from nablafrac import GridFunction, kernel_weights, nabla_diff_grid, nabla_sum_grid, power_rule

# the half-order kernel starts 1, 1/2, 3/8, ...
print(kernel_weights(0.5, 6).weights)

# summing the constant 1 reproduces the power rule with mu = 0
ones = GridFunction(0.0, 1, np.ones(10))
sums = nabla_sum_grid(ones, 0.5, 0.0)
print(sums.values)
print([power_rule(0.5, 0.0, 0.0, float(t)) for t in range(11)])

# a half-order difference undoes a half-order sum
rng = np.random.default_rng(0)
f = GridFunction(0.0, 0, rng.normal(size=12))
back = nabla_diff_grid(nabla_sum_grid(f, 0.5, 0.0), 0.5, 0.0)
print("max |D^nu S^nu f - f| =", np.max(np.abs(back.values - f.values[1:])))

# the order-1/2 difference of 1 at t = 2 is Gamma(1.5)/Gamma(0.5)
print(nabla_diff_grid(ones, 0.5, 0.0).values[1], math.gamma(1.5) / math.gamma(0.5))
