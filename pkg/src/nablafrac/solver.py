r"""Contraction-mapping solver for self-adjoint nabla fractional equations.

Two problems are handled, both with :math:`0 < \nu < 1` and
:math:`\rho(t) = t - 1`:

* nonlinear, :math:`\nabla_{a-1}^{\nu}(p \nabla y)(t) + F(t, y(t-1)) = 0`,
* linear, :math:`\nabla_{a-1}^{\nu}(p \nabla y)(t) + q(t) y(t-1) = f(t)`,

on :math:`t \in \mathbb{N}_{a+1}`, with :math:`y(t) \to M`. Solutions are
fixed points of the summation map

.. math::

    (Ty)(t) = M + \sum_{s=t+1}^{\infty} \frac{1}{p(s)}
        \sum_{\tau=a+1}^{s} w_{s-\tau+1} \, G(\tau, y(\tau - 1)),

which is truncated at a finite horizon. Every truncation carries a
ratio-test certificate for the neglected tail.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from nablafrac.errors import (
    DomainError,
    LipschitzError,
    MaxIterError,
    ModelError,
    NoContractionError,
    TailError,
)
from nablafrac.kernel import cumulative_kernel, kernel_weights
from nablafrac.operators import GridFunction, _integer_steps, nabla_diff_grid

__all__ = [
    "ContractionReport",
    "LinearProblem",
    "Membership",
    "Metric",
    "NonlinearProblem",
    "SolverConfig",
    "SolverReport",
    "apply_T",
    "check_lipschitz",
    "contraction_constant_linear",
    "contraction_constant_sup",
    "contraction_constant_weighted",
    "ratio_tail_bound",
    "residual",
    "residual_grid",
    "solve_linear",
    "solve_nonlinear",
    "tail_bound",
    "verify_membership",
]

log = logging.getLogger(__name__)

Sequence = Callable[[float], float]
Forcing = Callable[[float, float], float]

#: number of trailing terms inspected by the ratio test
TAIL_WINDOW = 10
#: largest admissible ratio in the tail certificate
TAIL_MAX_RATIO = 1.0 - 1e-3
#: margin below 1 required of the shifted linear contraction constant
LINEAR_MARGIN = 0.05
#: tolerance of the membership checks
MEMBERSHIP_TOL = 1e-12


# {{{ problem data


@dataclass(frozen=True)
class NonlinearProblem:
    """Data of ``nabla_{a-1}^nu (p nabla y)(t) + F(t, y(t-1)) = 0``.

    ``K`` is the declared Lipschitz constant of ``F`` in its second argument.
    """

    a: float
    nu: float
    M: float
    p: Sequence
    F: Forcing
    K: float

    def __post_init__(self) -> None:
        if not 0.0 < self.nu < 1.0:
            raise DomainError(f"nu must lie in (0,1), got {self.nu}")
        if not self.M >= 0.0:
            raise DomainError(f"M must be nonnegative, got {self.M}")
        if not self.K > 0.0:
            raise DomainError(f"Lipschitz constant K must be positive, got {self.K}")


@dataclass(frozen=True)
class LinearProblem:
    """Data of ``nabla_{a-1}^nu (p nabla y)(t) + q(t) y(t-1) = f(t)``."""

    a: float
    nu: float
    M: float
    p: Sequence
    q: Sequence
    f: Sequence

    def __post_init__(self) -> None:
        if not 0.0 < self.nu < 1.0:
            raise DomainError(f"nu must lie in (0,1), got {self.nu}")
        if not self.M >= 0.0:
            raise DomainError(f"M must be nonnegative, got {self.M}")


Problem = Union[NonlinearProblem, LinearProblem]


class Metric(str, enum.Enum):
    SUP = "sup"
    WEIGHTED = "weighted"


@dataclass(frozen=True)
class SolverConfig:
    """Truncation and stopping parameters.

    Solutions are computed on ``a - 1 .. a + horizon``. ``residual_buffer``
    trailing points are left out of the reported residual maximum and
    ``lipschitz_samples`` random pairs are used to check the declared ``K``
    (0 disables the check).
    """

    horizon: int = 64
    tail_tol: float = 1e-12
    fp_tol: float = 1e-12
    max_iter: int = 200
    metric: Metric = Metric.SUP
    residual_buffer: int = 0
    lipschitz_samples: int = 64

    def __post_init__(self) -> None:
        object.__setattr__(self, "metric", Metric(self.metric))
        if int(self.horizon) != self.horizon or self.horizon < 2:
            raise DomainError(f"horizon must be an integer >= 2, got {self.horizon}")
        if not (self.tail_tol > 0 and self.fp_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")
        if not 0 <= self.residual_buffer < self.horizon:
            raise DomainError("residual_buffer must lie in [0, horizon)")


# }}}


# {{{ reports


@dataclass(frozen=True)
class ContractionReport:
    """Certified contraction constant of the summation map.

    ``passes`` holds iff ``constant + tail_bound < threshold``; the threshold
    is 1 except for the shifted linear search, which asks for a margin.
    """

    constant: float
    tail_bound: float
    metric: Metric
    passes: bool
    L: float | None = None
    L_interval: tuple[float, float] | None = None
    shift: float | None = None

    @property
    def bound(self) -> float:
        return self.constant + self.tail_bound

    def lines(self) -> list[str]:
        out = [
            f"metric = {self.metric.value}",
            f"constant = {self.constant!r}",
            f"tail_bound = {self.tail_bound!r}",
            f"passes = {str(self.passes).lower()}",
        ]
        if self.L is not None:
            lo, hi = self.L_interval
            out.append(f"L = {self.L!r}")
            out.append(f"L_interval = [{lo!r}, {hi!r}]")
        if self.shift is not None:
            out.append(f"b = {self.shift!r}")
        return out


@dataclass(frozen=True)
class Membership:
    y_ge_M: bool
    nabla_nonpositive: bool
    nabla_at_a_zero: bool

    def __bool__(self) -> bool:
        return self.y_ge_M and self.nabla_nonpositive and self.nabla_at_a_zero


@dataclass(frozen=True)
class SolverReport:
    iterations: int
    converged: bool
    final_defect: float
    defects: tuple[float, ...]
    max_residual: float
    zeta_membership: Membership
    tail_bound: float
    limit_gap: float
    contraction: ContractionReport
    #: increments of the returned trajectory on N_b, as accumulated by the map
    nabla_y: GridFunction | None = None

    def lines(self) -> list[str]:
        m = self.zeta_membership
        return [
            f"iterations = {self.iterations}",
            f"converged = {str(self.converged).lower()}",
            f"final_defect = {self.final_defect!r}",
            f"max_residual = {self.max_residual!r}",
            f"tail_bound = {self.tail_bound!r}",
            f"limit_gap = {self.limit_gap!r}",
            f"y_ge_M = {str(m.y_ge_M).lower()}",
            f"nabla_nonpositive = {str(m.nabla_nonpositive).lower()}",
            f"nabla_at_a_zero = {str(m.nabla_at_a_zero).lower()}",
            *(f"contraction.{line}" for line in self.contraction.lines()),
        ]


# }}}


# {{{ tail certificates


def ratio_tail_bound(terms: np.ndarray, window: int = TAIL_WINDOW) -> float:
    """Bound the remainder of a positive series from its last computed terms.

    ``terms`` holds ``u_1 .. u_N`` and the remainder after ``u_N`` is bounded by
    ``u_N * r / (1 - r)`` with ``r`` the largest ratio of consecutive terms in
    the trailing window. When the ratios still increase across the window, ``r``
    is raised to the extrapolated limit ``r_N + N (r_N - r_{N-1})`` (ratios of
    the form ``r_inf - c/N``). :class:`TailError` is raised unless
    ``r < 1 - 1e-3``.
    """
    u_all = np.asarray(terms, dtype=float)
    N = u_all.size
    u = u_all[-window:]
    if u.size < 2:
        raise TailError("ratio test needs at least two terms")
    if not np.all(np.isfinite(u)) or np.any(u < 0):
        raise TailError("series terms must be finite and nonnegative")
    if np.all(u == 0):
        return 0.0
    if np.any(u == 0):
        raise TailError("zero terms inside the ratio-test window")

    ratios = u[1:] / u[:-1]
    r = float(ratios.max())
    if ratios.size >= 2 and np.any(ratios[1:] > ratios[:-1] * (1.0 + 1e-9)):
        r = max(r, float(ratios[-1] + N * (ratios[-1] - ratios[-2])))
    if r >= TAIL_MAX_RATIO:
        raise TailError(f"term ratio {r:.6g} not below {TAIL_MAX_RATIO}; convergence not certified")
    return float(u[-1] * r / (1.0 - r))


def _evaluate(seq: Sequence, points: np.ndarray) -> np.ndarray:
    return np.array([float(seq(float(t))) for t in points])


def _check_positive(name: str, values: np.ndarray, points: np.ndarray) -> None:
    bad = ~(values > 0)
    if np.any(bad):
        t = points[np.argmax(bad)]
        raise ModelError(f"{name}(t) must be positive, {name}({t}) = {values[np.argmax(bad)]}")


class _Discretization:
    """Precomputed data of the summation map based at ``b`` up to ``a + horizon``."""

    def __init__(self, prob: Problem, horizon: int, b: float | None = None) -> None:
        self.prob = prob
        self.a = float(prob.a)
        self.horizon = int(horizon)
        self.b = self.a if b is None else float(b)
        self.shift = _integer_steps(self.b, self.a)
        if not 0 <= self.shift < self.horizon:
            raise DomainError(f"sum base {self.b} must lie in a .. a + horizon - 1")
        self.end = self.a + self.horizon
        self.n = self.horizon - self.shift

        # p on N_a up to the horizon, checked positive
        self.p_points = self.a + np.arange(0, self.horizon + 1)
        self.p_all = _evaluate(prob.p, self.p_points)
        _check_positive("p", self.p_all, self.p_points)

        self.s_points = self.b + np.arange(1, self.n + 1)
        self.p_s = self.p_all[self.shift + 1 :]
        self.w = kernel_weights(prob.nu, self.n).weights
        # closed-form cumulative kernel, independent of the convolution path
        self.cumulative = np.array([cumulative_kernel(prob.nu, k) for k in range(1, self.n + 1)])
        self.outer_envelope = self.cumulative / self.p_s

        if isinstance(prob, NonlinearProblem):
            self.F_at_M = _evaluate(lambda t: prob.F(t, prob.M), self.s_points)
            self._check_forcing(self.F_at_M)
        else:
            self.q = _evaluate(prob.q, self.s_points)
            self.f = _evaluate(prob.f, self.s_points)

        self._weights: np.ndarray | None = None

    @property
    def grid_points(self) -> np.ndarray:
        return self.b + np.arange(-1, self.n + 1)

    def weights(self) -> np.ndarray:
        """Metric weight exp(-sum_{s=a}^t 1/p(s)) on b - 1 .. end."""
        if self._weights is None:
            csum = np.concatenate([[0.0], np.cumsum(1.0 / self.p_all)])
            # grid point b - 1 + j sits at offset shift - 1 + j from a
            self._weights = np.exp(-csum[self.shift : self.shift + self.n + 2])
        return self._weights

    def _check_forcing(self, G: np.ndarray) -> None:
        bad = ~(G >= 0)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise ModelError(f"F must be nonnegative, F({self.s_points[i]}, .) = {G[i]}")

    def forcing(self, y: np.ndarray) -> np.ndarray:
        """Right-hand side G(tau, y(tau - 1)) for tau = b + 1 .. end."""
        y_prev = y[1 : self.n + 1]
        prob = self.prob
        if isinstance(prob, NonlinearProblem):
            G = np.array([float(prob.F(float(t), float(u))) for t, u in zip(self.s_points, y_prev)])
            self._check_forcing(G)
            return G
        return self.q * y_prev - self.f

    def envelope(self, y_bound: float) -> float:
        prob = self.prob
        if isinstance(prob, NonlinearProblem):
            # F(t, u) <= F(t, M) + K |u - M| along any iterate in [M, y_bound]
            return float(self.F_at_M.max() + prob.K * max(0.0, y_bound - prob.M))
        return float(np.abs(self.q).max() * abs(y_bound) + np.abs(self.f).max())

    def tail(self, y_bound: float) -> float:
        B = self.envelope(y_bound)
        if B == 0.0:
            return 0.0
        return B * ratio_tail_bound(self.outer_envelope)

    def sum_map(self, G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Deviation ``Ty - M`` on b - 1 .. end and its increments on b .. end.

        The increments are ``-(1/p(s)) sum_{tau=b+1}^{s} w G`` exactly as summed,
        which is far more accurate than differencing ``Ty`` once ``Ty - M``
        drops below the resolution of ``M``.
        """
        inner = np.convolve(self.w, G)[: self.n]
        outer = inner / self.p_s
        rc = np.cumsum(outer[::-1])[::-1]
        dev = np.empty(self.n + 2)
        dev[0] = rc[0]
        dev[1 : self.n + 1] = rc
        dev[-1] = 0.0
        increments = np.concatenate([[0.0], -outer])
        return dev, increments

    def apply(self, dev: np.ndarray, tail_tol: float) -> tuple[np.ndarray, np.ndarray]:
        y = self.prob.M + dev
        tail = self.tail(float(np.max(np.abs(y))))
        if tail > tail_tol:
            raise TailError(f"tail bound {tail:.3e} exceeds tail_tol {tail_tol:.3e} at horizon {self.horizon}")
        return self.sum_map(self.forcing(y))

    def to_grid(self, values: np.ndarray) -> GridFunction:
        return GridFunction(self.b, -1, values)


def tail_bound(prob: Problem, y_bound: float, horizon: int, b: float | None = None) -> float:
    """Certified bound on the series neglected beyond ``a + horizon``.

    The outer terms are over-estimated by ``B * C(s - b) / p(s)`` with ``C`` the
    cumulative kernel and ``B`` an envelope of the forcing: ``max F(t, M) +
    K (y_bound - M)`` for the nonlinear problem, ``max q * |y_bound| + max |f|``
    for the linear one. Maxima are taken over the stored horizon.
    """
    return _Discretization(prob, horizon, b).tail(y_bound)


# }}}


# {{{ contraction constants


def contraction_constant_sup(prob: NonlinearProblem, horizon: int) -> ContractionReport:
    """Sup-norm constant ``K / Gamma(nu + 1) * sum_{s>a} (s - a)^{nu} / p(s)``."""
    disc = _Discretization(prob, horizon)
    beta = prob.K * float(np.sum(disc.outer_envelope))
    tail = prob.K * ratio_tail_bound(disc.outer_envelope)
    return ContractionReport(
        constant=beta, tail_bound=tail, metric=Metric.SUP, passes=beta + tail < 1.0
    )


_L_SLACK = 1e-14


def contraction_constant_weighted(prob: NonlinearProblem, horizon: int) -> ContractionReport:
    """Weighted-metric constant ``beta / L``.

    ``L = lim exp(-sum_{s=a}^t 1/p(s))`` is bracketed by the truncated sum and
    its ratio-test tail; the lower end of the bracket is used.
    """
    disc = _Discretization(prob, horizon)
    inv_p = 1.0 / disc.p_all
    S = float(np.sum(inv_p))
    # widen by a few ulps so rounding in S cannot push L outside the bracket
    L_hi = math.exp(-S) * (1.0 + _L_SLACK)
    L_lo = math.exp(-(S + ratio_tail_bound(inv_p))) * (1.0 - _L_SLACK)
    total = float(np.sum(disc.outer_envelope))
    tail = ratio_tail_bound(disc.outer_envelope)
    alpha = prob.K * total / L_lo
    alpha_tail = prob.K * tail / L_lo
    return ContractionReport(
        constant=alpha,
        tail_bound=alpha_tail,
        metric=Metric.WEIGHTED,
        passes=alpha + alpha_tail < 1.0,
        L=L_lo,
        L_interval=(L_lo, L_hi),
    )


def contraction_constant_linear(
    prob: LinearProblem, horizon: int, b: float, margin: float = LINEAR_MARGIN
) -> ContractionReport:
    """Sup-norm constant of the linear map based at ``b``.

    ``gamma_b = sum_{s>b} (1/p(s)) sum_{tau=b+1}^{s} w_{s-tau+1} q(tau)``;
    passes iff ``gamma_b + tail < 1 - margin``.
    """
    disc = _Discretization(prob, horizon, b)
    inner = np.convolve(disc.w, np.abs(disc.q))[: disc.n]
    gamma = float(np.sum(inner / disc.p_s))
    qmax = float(np.abs(disc.q).max())
    tail = 0.0 if qmax == 0.0 else qmax * ratio_tail_bound(disc.outer_envelope)
    return ContractionReport(
        constant=gamma,
        tail_bound=tail,
        metric=Metric.SUP,
        passes=gamma + tail < 1.0 - margin,
        shift=disc.b,
    )


def check_lipschitz(prob: NonlinearProblem, horizon: int, samples: int = 64, seed: int = 0) -> float:
    """Largest sampled difference quotient of ``F`` in ``u``.

    Raises :class:`LipschitzError` if it exceeds ``K (1 + 1e-6)``.
    """
    rng = np.random.default_rng(seed)
    taus = prob.a + rng.integers(1, horizon + 1, size=samples)
    hi = 2.0 * prob.M + 2.0
    u = rng.uniform(0.0, hi, size=samples)
    v = rng.uniform(0.0, hi, size=samples)
    worst = 0.0
    for t, x, z in zip(taus, u, v):
        if x == z:
            continue
        q = abs(prob.F(float(t), float(x)) - prob.F(float(t), float(z))) / abs(x - z)
        worst = max(worst, q)
    if worst > prob.K * (1.0 + 1e-6):
        raise LipschitzError(f"sampled Lipschitz quotient {worst:.6g} exceeds declared K = {prob.K}")
    return worst


# }}}


# {{{ map, residual, membership


def apply_T(y: GridFunction, prob: Problem, cfg: SolverConfig, b: float | None = None) -> GridFunction:
    """One application of the truncated summation map.

    ``y`` must be stored on ``b - 1 .. a + horizon`` (``b`` defaults to ``a``).
    For a :class:`LinearProblem` the map is the affine one with forcing
    ``q(tau) y(tau - 1) - f(tau)``; ``q`` may change sign here.
    """
    disc = _Discretization(prob, cfg.horizon, b)
    values = _values_on(y, disc)
    if isinstance(prob, NonlinearProblem) and values.min() < prob.M - MEMBERSHIP_TOL:
        raise DomainError("apply_T needs y >= M on the stored grid")
    dev, _ = disc.apply(values - prob.M, cfg.tail_tol)
    return disc.to_grid(prob.M + dev)


def _values_on(y: GridFunction, disc: _Discretization) -> np.ndarray:
    return np.array([y(t) for t in disc.grid_points])


def residual_grid(
    y: GridFunction, prob: Problem, b: float | None = None, nabla_y: GridFunction | None = None
) -> GridFunction:
    """Equation residual at every ``t`` in ``b + 1 ..`` last stored point.

    ``p`` is evaluated on ``N_b``, ``x = p * nabla y`` and the order-``nu``
    difference of ``x`` based at ``b - 1`` is formed with finite sums only.
    ``nabla y`` is taken from ``nabla_y`` when given (it must cover
    ``b .. last``), otherwise from differences of ``y``. Since ``p`` usually
    grows, differencing ``y`` limits the attainable accuracy far out.
    """
    b = float(prob.a if b is None else b)
    last = y.base + y.horizon
    n = _integer_steps(last, b)
    if n < 1:
        raise IndexError("residual needs y stored up to at least b + 1")
    ys = y.segment(b - 1.0, last)
    points = b + np.arange(0, n + 1)
    p = _evaluate(prob.p, points)
    _check_positive("p", p, points)
    dy = np.diff(ys) if nabla_y is None else nabla_y.segment(b, last)
    x = GridFunction(b, 0, p * dy)
    frac = nabla_diff_grid(x, prob.nu, b - 1.0, last).values[1:]
    taus = points[1:]
    y_prev = ys[1:-1]
    if isinstance(prob, NonlinearProblem):
        rhs = np.array([float(prob.F(float(t), float(u))) for t, u in zip(taus, y_prev)])
    else:
        rhs = _evaluate(prob.q, taus) * y_prev - _evaluate(prob.f, taus)
    return GridFunction(b, 1, frac + rhs)


def residual(
    y: GridFunction, prob: Problem, t: float, b: float | None = None, nabla_y: GridFunction | None = None
) -> float:
    """Residual of the fractional difference equation at ``t`` in ``N_{b+1}``."""
    b = float(prob.a if b is None else b)
    k = _integer_steps(t, b)
    if k < 1:
        raise IndexError(f"residual is defined on N_(b+1), got t = {t}")
    trimmed = GridFunction(y.base, y.first_offset, y.values[: y.index(t) + 1])
    return residual_grid(trimmed, prob, b, nabla_y)(t)


def verify_membership(y: GridFunction, M: float, a: float | None = None) -> Membership:
    """Check ``y >= M``, ``nabla y <= 0`` on ``N_a`` and ``nabla y(a) = 0``."""
    a = y.base if a is None else float(a)
    ka = _integer_steps(a, y.base)
    tol = MEMBERSHIP_TOL
    ge = bool(np.all(y.values >= M - tol))
    d = np.diff(y.values)
    # d[i] = y(off_{i+1}) - y(off_i); keep the steps ending in N_a
    ends = y.offsets[1:]
    on_Na = ends >= ka
    nonpos = bool(np.all(d[on_Na] <= tol))
    try:
        at_a = abs(y(a) - y(a - 1.0)) <= tol
    except IndexError:
        at_a = False
    return Membership(y_ge_M=ge, nabla_nonpositive=nonpos, nabla_at_a_zero=bool(at_a))


# }}}


# {{{ solvers


def _picard(disc: _Discretization, cfg: SolverConfig, metric: Metric):
    # iterate on the deviation y - M, starting from y = M
    dev = np.zeros(disc.n + 2)
    increments = np.zeros(disc.n + 1)
    scale = disc.weights() if metric is Metric.WEIGHTED else np.ones_like(dev)
    defects: list[float] = []
    for _ in range(cfg.max_iter):
        z, increments = disc.apply(dev, cfg.tail_tol)
        d = float(np.max(np.abs(z - dev) / scale))
        defects.append(d)
        dev = z
        log.debug("picard step %d: defect %.3e", len(defects), d)
        if d < cfg.fp_tol:
            return dev, increments, defects, True
    return dev, increments, defects, False


def _finish(
    disc: _Discretization,
    cfg: SolverConfig,
    dev: np.ndarray,
    increments: np.ndarray,
    defects: list[float],
    converged: bool,
    contraction: ContractionReport,
) -> tuple[GridFunction, SolverReport]:
    y = disc.prob.M + dev
    grid = disc.to_grid(y)
    nabla_y = GridFunction(disc.b, 0, increments)
    res = residual_grid(grid, disc.prob, disc.b, nabla_y).values
    if cfg.residual_buffer:
        res = res[: -cfg.residual_buffer]
    tail = disc.tail(float(np.max(np.abs(y))))
    report = SolverReport(
        iterations=len(defects),
        converged=converged,
        final_defect=defects[-1],
        defects=tuple(defects),
        max_residual=float(np.max(np.abs(res))),
        zeta_membership=verify_membership(grid, disc.prob.M, disc.b),
        tail_bound=tail,
        limit_gap=abs(float(y[-1]) - disc.prob.M) + tail,
        contraction=contraction,
        nabla_y=nabla_y,
    )
    return grid, report


def solve_nonlinear(prob: NonlinearProblem, cfg: SolverConfig | None = None) -> tuple[GridFunction, SolverReport]:
    """Picard iteration from ``y = M`` to the unique fixed point in ``zeta_M``.

    Raises :class:`NoContractionError` when the contraction constant of
    ``cfg.metric`` is not certified below 1 and :class:`MaxIterError` when
    ``fp_tol`` is not reached; both carry their report.
    """
    cfg = cfg or SolverConfig()
    if cfg.metric is Metric.WEIGHTED:
        contraction = contraction_constant_weighted(prob, cfg.horizon)
    else:
        contraction = contraction_constant_sup(prob, cfg.horizon)
    if not contraction.passes:
        raise NoContractionError(
            f"{cfg.metric.value} contraction constant {contraction.bound:.6g} is not below 1",
            report=contraction,
        )
    if cfg.lipschitz_samples:
        check_lipschitz(prob, cfg.horizon, cfg.lipschitz_samples)

    disc = _Discretization(prob, cfg.horizon)
    dev, increments, defects, converged = _picard(disc, cfg, cfg.metric)
    grid, report = _finish(disc, cfg, dev, increments, defects, converged, contraction)
    if not converged:
        raise MaxIterError(f"no convergence to {cfg.fp_tol:g} in {cfg.max_iter} iterations", report=report)
    return grid, report


def solve_linear(prob: LinearProblem, cfg: SolverConfig | None = None) -> tuple[float, GridFunction, SolverReport]:
    """Solve the linear equation after shifting its base to the smallest admissible ``b``.

    ``b`` runs over ``a, a + 1, ..`` up to ``a + horizon // 2`` and the first
    base whose constant ``gamma_b`` is certified below ``1 - 0.05`` is used.
    Iteration is always in the sup norm. Returns ``(b, y, report)`` with ``y``
    stored on ``b - 1 .. a + horizon``.
    """
    cfg = cfg or SolverConfig()
    disc0 = _Discretization(prob, cfg.horizon)
    if np.any(disc0.q < 0):
        raise ModelError("solve_linear requires q(t) >= 0")

    contraction = None
    for shift in range(0, cfg.horizon // 2 + 1):
        b = prob.a + shift
        contraction = contraction_constant_linear(prob, cfg.horizon, b)
        log.debug("base shift %d: gamma_b = %.6g", shift, contraction.constant)
        if contraction.passes:
            break
    else:
        raise NoContractionError(
            f"no base b in a .. a + {cfg.horizon // 2} with gamma_b < {1 - LINEAR_MARGIN}",
            report=contraction,
        )

    disc = _Discretization(prob, cfg.horizon, b)
    dev, increments, defects, converged = _picard(disc, cfg, Metric.SUP)
    grid, report = _finish(disc, cfg, dev, increments, defects, converged, contraction)
    if not converged:
        raise MaxIterError(f"no convergence to {cfg.fp_tol:g} in {cfg.max_iter} iterations", report=report)
    return b, grid, report


# }}}
