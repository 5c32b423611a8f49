"""Named sequence and forcing families.

These are the building blocks the run-spec files refer to (``p.family =
geometric_rising`` and so on). Each family is a small frozen dataclass that is
callable on a grid point ``t`` (and ``u`` for forcings).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from nablafrac.errors import ModelError
from nablafrac.kernel import rising_factorial
from nablafrac.operators import _integer_steps


@dataclass(frozen=True)
class Const:
    v: float

    def __call__(self, t: float) -> float:
        return self.v


@dataclass(frozen=True)
class Geometric:
    """``c * ratio**(t - a)``."""

    c: float
    ratio: float
    a: float = 0.0

    def __call__(self, t: float) -> float:
        return self.c * self.ratio ** _integer_steps(t, self.a)


@dataclass(frozen=True)
class GeometricRising:
    """``c**(t - a) * (t - a)^{nu}`` (rising power), with ``at_base`` at ``t = a``.

    The rising power vanishes at ``t = a``; ``p`` has to be positive on all
    of ``N_a``, so the base value is supplied separately.
    """

    c: float
    nu: float
    a: float = 0.0
    at_base: float = 1.0

    def __call__(self, t: float) -> float:
        k = _integer_steps(t, self.a)
        if k == 0:
            return self.at_base
        return self.c**k * rising_factorial(k, self.nu)


@dataclass(frozen=True)
class Power:
    """``(t - a)**gamma``, with ``at_base`` at ``t = a``."""

    gamma: float
    a: float = 0.0
    at_base: float = 1.0

    def __call__(self, t: float) -> float:
        k = _integer_steps(t, self.a)
        if k == 0:
            return self.at_base
        return float(k) ** self.gamma


@dataclass(frozen=True)
class RisingPower:
    """``(t - a)^{mu}``, the function the power rule acts on."""

    mu: float
    a: float = 0.0

    def __call__(self, t: float) -> float:
        return rising_factorial(_integer_steps(t, self.a), self.mu)


@dataclass(frozen=True)
class Table:
    """Tabulated values keyed by integer offset from ``a``."""

    a: float
    entries: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "_lookup", dict(self.entries))

    @classmethod
    def from_mapping(cls, a: float, values: Mapping[float, float]) -> Table:
        return cls(a, tuple(sorted((_integer_steps(t, a), float(v)) for t, v in values.items())))

    @classmethod
    def from_csv(cls, path: str | Path, column: str, a: float) -> Table:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
        header, body = rows[0], rows[1:]
        if "t" not in header or column not in header:
            raise ModelError(f"{path}: needs columns 't' and '{column}'")
        it, iv = header.index("t"), header.index(column)
        values = {float(r[it]): float(r[iv]) for r in body if r[iv] != ""}
        return cls.from_mapping(a, values)

    def covers(self, first: int, last: int) -> bool:
        return all(k in self._lookup for k in range(first, last + 1))

    def __call__(self, t: float) -> float:
        try:
            return self._lookup[_integer_steps(t, self.a)]
        except KeyError:
            raise ModelError(f"table has no value at t = {t}") from None


# {{{ forcings F(t, u)


@dataclass(frozen=True)
class ConstForcing:
    v: float

    def __call__(self, t: float, u: float) -> float:
        return self.v


@dataclass(frozen=True)
class Saturating:
    """``kappa / (1 + u)``; Lipschitz constant ``kappa`` on ``u >= 0``."""

    kappa: float

    def __call__(self, t: float, u: float) -> float:
        return self.kappa / (1.0 + u)


@dataclass(frozen=True)
class TableTimesAffine:
    """``g(t) * (c0 + c1 * u)`` with tabulated ``g``."""

    g: Table
    c0: float
    c1: float

    def __call__(self, t: float, u: float) -> float:
        return self.g(t) * (self.c0 + self.c1 * u)


# }}}


def closed_form_forcing(nu: float) -> float:
    """Constant forcing ``Gamma(nu + 1)`` for which the solution is explicit.

    With ``p = c**(t-a) (t-a)^{nu}`` the inner fractional sum of this constant is
    ``(t-a)^{nu}``, so ``nabla y(t) = -c**-(t-a)`` and
    ``y(t) = M + c**-(t-a) / (c - 1)``; ``c = 2`` gives ``M + 2**-(t-a)``.
    """
    return math.gamma(nu + 1.0)
