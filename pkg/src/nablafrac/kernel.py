r"""Rising factorials and the nabla fractional-sum kernel.

The generalized rising function is

.. math::

    t^{\overline{r}} = \frac{\Gamma(t + r)}{\Gamma(t)},

with the convention :math:`t^{\overline{r}} = 0` when :math:`t` is a
nonpositive integer and :math:`t + r` is not. The kernel of the
:math:`\nu`-th order nabla sum is the sequence

.. math::

    w_k = \frac{k^{\overline{\nu - 1}}}{\Gamma(\nu)}, \qquad k = 1, 2, \dots

which satisfies :math:`w_1 = 1` and :math:`w_k = w_{k-1} (k + \nu - 2)/(k - 1)`.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

from nablafrac.errors import DomainError, RisingOverflowError

__all__ = [
    "KernelWeights",
    "cumulative_kernel",
    "kernel_weights",
    "log_rising_factorial",
    "rising_factorial",
]

_LOG_MAX = math.log(sys.float_info.max)

# Stirling series coefficients B_{2k} / (2k (2k - 1)), k = 1..8
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
# below this the Stirling remainder is no longer at the rounding level
_STIRLING_MIN = 10.0
# kernel recurrence block length between gamma-ratio reseeds
_BLOCK = 512


def _is_nonpositive_integer(x: float) -> bool:
    # exact test by design: no fuzzy integer detection
    return x <= 0 and x == math.floor(x)


def _gamma_sign(x: float) -> int:
    if x > 0:
        return 1
    # Gamma alternates in sign between consecutive negative integers
    return -1 if math.ceil(-x) % 2 else 1


def _stirling_tail(x: float) -> float:
    inv = 1.0 / x
    inv2 = inv * inv
    acc = 0.0
    for c in reversed(_STIRLING):
        acc = acc * inv2 + c
    return acc * inv


def _log_gamma_ratio(t: float, r: float) -> float:
    """log|Gamma(t + r)| - log|Gamma(t)| without forming either term."""
    x = t + r
    if t >= _STIRLING_MIN and x >= _STIRLING_MIN:
        # (x - 1/2) log x - x minus the same at t, regrouped around log1p(r/t)
        return (
            (t - 0.5) * math.log1p(r / t)
            + r * math.log(x)
            - r
            + (_stirling_tail(x) - _stirling_tail(t))
        )
    return math.lgamma(x) - math.lgamma(t)


def log_rising_factorial(t: float, r: float) -> tuple[float, int]:
    """Return ``(log|t^{r}|, sign)`` for the rising factorial.

    Only valid when neither ``t`` nor ``t + r`` is a nonpositive integer.
    """
    return _log_gamma_ratio(t, r), _gamma_sign(t + r) * _gamma_sign(t)


def rising_factorial(t: float, r: float) -> float:
    r"""Generalized rising factorial :math:`\Gamma(t + r) / \Gamma(t)`.

    Returns 1 for ``r == 0`` (including nonpositive integer ``t``) and 0 when
    ``t`` is a nonpositive integer but ``t + r`` is not.

    Raises
    ------
    DomainError
        If ``t + r`` is a nonpositive integer while ``r != 0``; the ratio is
        then either 0/0-like (both arguments at poles) or a pole.
    RisingOverflowError
        If the magnitude exceeds the largest double.
    """
    t = float(t)
    r = float(r)
    if r == 0.0:
        return 1.0

    x = t + r
    if _is_nonpositive_integer(t):
        if _is_nonpositive_integer(x):
            raise DomainError(f"rising factorial undefined: t={t} and t+r={x} are both poles")
        return 0.0
    if _is_nonpositive_integer(x):
        raise DomainError(f"rising factorial has a pole at t+r={x}")

    log_value, sign = log_rising_factorial(t, r)
    if log_value > _LOG_MAX:
        raise RisingOverflowError(
            f"|{t}^({r})| = exp({log_value:.6g}) overflows", log_value=log_value
        )
    return sign * math.exp(log_value)


@dataclass(frozen=True)
class KernelWeights:
    """Kernel weights ``w_1 .. w_n`` of the order-``nu`` nabla sum."""

    nu: float
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.weights.size

    def __getitem__(self, k: int) -> float:
        """One-based access, ``kw[1] == 1``."""
        if not 1 <= k <= self.n:
            raise IndexError(f"kernel index {k} outside 1..{self.n}")
        return float(self.weights[k - 1])

    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.weights)


def _check_order(nu: float) -> float:
    nu = float(nu)
    if not nu > 0:
        raise DomainError(f"order nu must be positive, got {nu}")
    return nu


def kernel_weights(nu: float, n: int) -> KernelWeights:
    """Generate ``w_1 .. w_n`` by the multiplicative recurrence from ``w_1 = 1``.

    The recurrence runs in blocks of 512 terms; every block after the first
    starts from the log-gamma ratio, which keeps the relative error near
    1e-14 out to ``n = 10**6``.
    """
    nu = _check_order(nu)
    n = int(n)
    if n < 1:
        raise DomainError(f"kernel horizon must be >= 1, got {n}")

    k = np.arange(1, n + 1, dtype=float)
    ratios = np.ones(n)
    ratios[1:] = (k[1:] + nu - 2.0) / (k[1:] - 1.0)
    # recurrence inside fixed blocks, each block re-seeded from the gamma
    # ratio so rounding cannot accumulate over long horizons
    nblocks = -(-n // _BLOCK)
    padded = np.ones(nblocks * _BLOCK)
    padded[:n] = ratios
    blocks = padded.reshape(nblocks, _BLOCK)
    blocks[:, 0] = 1.0
    log_gamma_nu = math.lgamma(nu)
    seeds = np.array(
        [
            math.exp(_log_gamma_ratio(float(j * _BLOCK + 1), nu - 1.0) - log_gamma_nu)
            for j in range(nblocks)
        ]
    )
    seeds[0] = 1.0
    w = (np.cumprod(blocks, axis=1) * seeds[:, None]).ravel()[:n].copy()
    w.setflags(write=False)
    return KernelWeights(nu=nu, weights=w)


def cumulative_kernel(nu: float, n: int) -> float:
    r"""Closed form of :math:`\sum_{k=1}^n w_k = n^{\overline{\nu}} / \Gamma(\nu + 1)`."""
    nu = _check_order(nu)
    n = int(n)
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    if n == 0:
        return 0.0
    log_value = _log_gamma_ratio(float(n), nu) - math.lgamma(nu + 1.0)
    if log_value > _LOG_MAX:
        raise RisingOverflowError(f"cumulative kernel overflows at n={n}", log_value=log_value)
    return math.exp(log_value)
