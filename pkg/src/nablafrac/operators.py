r"""Nabla differences, fractional sums and fractional differences on grids.

Functions live on integer-offset grids ``{a + k}`` with an arbitrary real
base ``a``. The order-:math:`\nu` fractional sum based at ``a`` is

.. math::

    \nabla_a^{-\nu} f(t) = \sum_{s=a+1}^{t} w_{t-s+1} f(s),

with the kernel weights of :mod:`nablafrac.kernel`, and the fractional
difference is :math:`\nabla_a^{\nu} f = \nabla^N \nabla_a^{-(N-\nu)} f` with
:math:`N = \lceil \nu \rceil`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import comb

from nablafrac.errors import DomainError
from nablafrac.kernel import kernel_weights, rising_factorial

__all__ = [
    "GridFunction",
    "ivp_representation",
    "nabla",
    "nabla_diff",
    "nabla_diff_grid",
    "nabla_sum",
    "nabla_sum_grid",
    "power_rule",
]

# relative slack when mapping a real grid point to its integer offset
_GRID_SLACK = 1e-9


def _integer_steps(t: float, a: float) -> int:
    d = float(t) - float(a)
    k = round(d)
    if abs(d - k) > _GRID_SLACK * max(1.0, abs(float(t)), abs(float(a))):
        raise IndexError(f"{t} is not on the integer grid through {a}")
    return int(k)


@dataclass(frozen=True)
class GridFunction:
    """Real values stored on ``base + first_offset .. base + horizon``.

    Lookup is by exact integer offset from ``base``; there is no
    interpolation.
    """

    base: float
    first_offset: int
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("GridFunction needs a non-empty 1-d value array")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "base", float(self.base))
        object.__setattr__(self, "first_offset", int(self.first_offset))

    @classmethod
    def from_function(
        cls, func: Callable[[float], float], base: float, first_offset: int, horizon: int
    ) -> GridFunction:
        points = float(base) + np.arange(first_offset, horizon + 1)
        return cls(base, first_offset, np.array([func(t) for t in points], dtype=float))

    @property
    def horizon(self) -> int:
        return self.first_offset + self.values.size - 1

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(self.first_offset, self.horizon + 1)

    @property
    def points(self) -> np.ndarray:
        return self.base + self.offsets

    def offset(self, t: float) -> int:
        return _integer_steps(t, self.base)

    def index(self, t: float) -> int:
        k = self.offset(t)
        if not self.first_offset <= k <= self.horizon:
            raise IndexError(
                f"t = {t} (offset {k}) outside stored range "
                f"{self.first_offset}..{self.horizon} from base {self.base}"
            )
        return k - self.first_offset

    def __call__(self, t: float) -> float:
        return float(self.values[self.index(t)])

    def segment(self, start: float, stop: float) -> np.ndarray:
        """Values at ``start, start + 1, .., stop`` (inclusive)."""
        i0, i1 = self.index(start), self.index(stop)
        return self.values[i0 : i1 + 1]

    def __len__(self) -> int:
        return self.values.size


def nabla(f: GridFunction, t: float) -> float:
    """Backward difference ``f(t) - f(t - 1)``."""
    return f(t) - f(float(t) - 1.0)


def _steps_from(f: GridFunction, a: float, t: float) -> int:
    # number of grid steps from a to t, with a aligned to f's lattice
    _integer_steps(a, f.base)
    n = _integer_steps(t, a)
    if n < 0:
        raise IndexError(f"t = {t} lies before the base {a}")
    return n


def _check_order(nu: float) -> float:
    nu = float(nu)
    if not nu > 0:
        raise DomainError(f"order nu must be positive, got {nu}")
    return nu


def nabla_sum(f: GridFunction, nu: float, a: float, t: float) -> float:
    """Order-``nu`` nabla fractional sum of ``f`` based at ``a``, evaluated at ``t``.

    ``f`` must store ``a + 1 .. t``; the empty sum at ``t = a`` is 0.
    """
    nu = _check_order(nu)
    n = _steps_from(f, a, t)
    if n == 0:
        return 0.0
    seg = f.segment(float(a) + 1.0, t)
    w = kernel_weights(nu, n).weights
    return float(np.dot(w, seg[::-1]))


def nabla_sum_grid(f: GridFunction, nu: float, a: float, last: float | None = None) -> GridFunction:
    """Fractional sum on the whole grid ``a .. last`` as one convolution.

    ``last`` defaults to the last point stored in ``f``. The result has base
    ``a`` and first offset 0 (where it vanishes).
    """
    nu = _check_order(nu)
    if last is None:
        last = f.base + f.horizon
    n = _steps_from(f, a, last)
    out = np.zeros(n + 1)
    if n > 0:
        seg = f.segment(float(a) + 1.0, last)
        w = kernel_weights(nu, n).weights
        out[1:] = np.convolve(w, seg)[:n]
    return GridFunction(a, 0, out)


def _split_order(nu: float) -> tuple[int, float]:
    N = math.ceil(nu)
    return N, N - nu


def _inner_trajectory(f: GridFunction, nu: float, a: float, t: float) -> tuple[int, np.ndarray]:
    """Order N and the inner sum ``g`` at ``t - N .. t`` (or all of ``a .. t``)."""
    N, inner = _split_order(nu)
    n = _steps_from(f, a, t)
    if n < N:
        raise IndexError(f"fractional difference of order {nu} needs t >= a + {N}")
    if inner == 0.0:
        # integer order: the inner sum is the identity, f(a) is needed
        g = f.segment(a, t)
    else:
        g = nabla_sum_grid(f, inner, a, t).values
    return N, g


def _backward_difference(g: np.ndarray, N: int) -> float:
    j = np.arange(N + 1)
    coeffs = (-1.0) ** j * comb(N, j)
    return float(np.dot(coeffs, g[::-1][: N + 1]))


def nabla_diff(f: GridFunction, nu: float, a: float, t: float) -> float:
    """Order-``nu`` nabla fractional difference of ``f`` based at ``a``.

    Defined for ``t`` in ``N_{a+N}``, ``N = ceil(nu)``. For integer ``nu`` this is
    the plain ``N``-th backward difference and ``f`` must also store ``a``.
    """
    nu = _check_order(nu)
    N, g = _inner_trajectory(f, nu, a, t)
    return _backward_difference(g, N)


def nabla_diff_grid(f: GridFunction, nu: float, a: float, last: float | None = None) -> GridFunction:
    """Fractional difference at every point ``a + N .. last``.

    Reuses a single inner-sum trajectory; values agree with :func:`nabla_diff`.
    """
    nu = _check_order(nu)
    if last is None:
        last = f.base + f.horizon
    N, g = _inner_trajectory(f, nu, a, last)
    return GridFunction(a, N, np.diff(g, N))


def power_rule(nu: float, mu: float, a: float, t: float) -> float:
    r"""Closed form of the fractional sum of :math:`(t - a)^{\overline{\mu}}`.

    .. math::

        \nabla_a^{-\nu} (t - a)^{\overline{\mu}}
            = \frac{\Gamma(\mu + 1)}{\Gamma(\mu + \nu + 1)} (t - a)^{\overline{\mu + \nu}}

    At ``t = a`` the left side is an empty sum, so 0 is returned there.
    """
    nu = _check_order(nu)
    mu = float(mu)
    if not mu > -1.0:
        raise DomainError(f"power rule needs mu > -1, got {mu}")
    n = _integer_steps(t, a)
    if n < 0:
        raise DomainError(f"t = {t} lies before the base {a}")
    if n == 0:
        return 0.0
    scale = math.exp(math.lgamma(mu + 1.0) - math.lgamma(mu + nu + 1.0))
    return scale * rising_factorial(float(n), mu + nu)


def ivp_representation(c: float, nu: float, a: float, rhs: GridFunction, t: float) -> float:
    r"""Solution value of the initial value problem

    .. math::

        \nabla_{a-1}^{\nu} y(t) = h(t), \quad t \in \mathbb{N}_{a+1}, \qquad y(a) = c,

    for ``0 < nu < 1`` and a known right-hand side ``h`` (``rhs``):
    :math:`y(t) = c\,(t - a + 1)^{\overline{\nu - 1}}/\Gamma(\nu) + \nabla_a^{-\nu} h(t)`.
    """
    nu = float(nu)
    if not 0.0 < nu < 1.0:
        raise DomainError(f"initial value problem needs 0 < nu < 1, got {nu}")
    n = _steps_from(rhs, a, t)
    decay = kernel_weights(nu, n + 1)[n + 1]
    return decay * float(c) + nabla_sum(rhs, nu, a, t)
