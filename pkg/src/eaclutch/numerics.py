"""Special functions, quadrature, stiff ODE integration, and nonlinear least squares.

Everything here is pure and reentrant. The Mittag-Leffler function is
implemented in-package (power series plus a spectral integral representation
on the negative real axis); quadrature, ODE integration, Bessel functions,
and least squares delegate to scipy behind stable interfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.integrate
import scipy.optimize
import scipy.special

from .constants import DEFAULT_ABS_TOL, DEFAULT_REL_TOL


class NumericalError(RuntimeError):
    """A numerical routine failed to converge. Carries the partial value."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class StiffnessError(NumericalError):
    """ODE step size underflowed; `time` locates the failure."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class DegenerateFitError(NumericalError):
    """Least-squares Jacobian is singular at the solution."""


@dataclass(frozen=True)
class Tolerance:
    rel: float = DEFAULT_REL_TOL
    abs: float = DEFAULT_ABS_TOL
    max_iter: int = 10_000

    def __post_init__(self):
        if not self.rel > 0:
            raise ValueError("rel tolerance must be > 0")
        if self.abs < 0:
            raise ValueError("abs tolerance must be >= 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


DEFAULT_TOL = Tolerance()


# ---------------------------------------------------------------------------
# Mittag-Leffler function
# ---------------------------------------------------------------------------

_SERIES_SWITCH = 1.0  # |z| below which the power series is accurate to 1e-13


def _ml_series(alpha: float, beta: float, z: float, max_terms: int) -> float:
    """Power series with Kahan-compensated summation."""
    total = 0.0
    comp = 0.0
    term = 1.0 / math.gamma(beta)
    n = 0
    while n < max_terms:
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        n += 1
        # next term via log-space ratio to avoid overflow of z**n
        log_t = n * math.log(abs(z)) - math.lgamma(alpha * n + beta) if z != 0 else -math.inf
        if log_t < -745.0:  # underflow: series has converged
            return total
        term = math.copysign(math.exp(log_t), (-1.0) ** n if z < 0 else 1.0)
        if abs(term) <= 1e-17 * max(abs(total), 1e-300) and n > 3:
            return total + term
    raise NumericalError(
        f"Mittag-Leffler series did not converge after {max_terms} terms "
        f"(alpha={alpha}, beta={beta}, z={z})",
        partial=total,
    )


def _ml_spectral(alpha: float, beta: float, x: float) -> float:
    """E_{alpha,beta}(-x) for 0 < alpha < 1, 0 < beta <= 1, x > 0.

    Spectral representation on the negative real axis; exact because
    |arg(-x)| = pi > alpha*pi, so no exponential contribution remains.
    """
    s1 = math.sin(math.pi * (1.0 - beta))
    s2 = math.sin(math.pi * (1.0 - beta + alpha))
    ca = math.cos(math.pi * alpha)
    inv_a = 1.0 / alpha
    pow_r = (1.0 - beta) * inv_a

    def kernel(r):
        return (
            (1.0 / (math.pi * alpha))
            * r**pow_r
            * math.exp(-(r**inv_a))
            * (r * s1 + x * s2)
            / (r * r + 2.0 * r * x * ca + x * x)
        )

    # the denominator is smallest near r = x (sharp for alpha -> 1)
    pts = [x] if x <= 50.0 else None
    val, err = scipy.integrate.quad(
        kernel, 0.0, np.inf, epsabs=1e-15, epsrel=1e-13, limit=400, points=pts
    )
    return val


def mittag_leffler(alpha: float, beta: float, z: float) -> float:
    """Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z.

    Supports alpha in (0, 1], beta > 0, and any z <= 0; positive z is
    accepted while the power series converges (all production callers use
    z <= 0). Relative accuracy ~1e-11 or better on the supported domain.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    if not beta > 0.0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if z == 0.0:
        return 1.0 / math.gamma(beta)

    if alpha == 1.0:
        if beta == 1.0:
            return math.exp(z)
        if beta == 2.0:
            return math.expm1(z) / z
        if abs(z) <= 10.0:
            return _ml_series(alpha, beta, z, max_terms=10_000)
        raise NumericalError(
            f"E_(1,{beta}) is only supported for |z| <= 10 when beta is not 1 or 2 "
            f"(got z={z}); no cancellation-free evaluation path exists"
        )

    if z >= -_SERIES_SWITCH:
        return _ml_series(alpha, beta, z, max_terms=10_000)

    # reduce beta into (0, 1] where the spectral representation is valid:
    # E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z
    x = -z
    shifts = 0
    b = beta
    while b > 1.0:
        b -= alpha
        shifts += 1
    val = _ml_spectral(alpha, b, x)
    for _ in range(shifts):
        val = 1.0 / math.gamma(b) + z * val
        b += alpha
    return val


# ---------------------------------------------------------------------------
# Modified Bessel function of the second kind
# ---------------------------------------------------------------------------


def bessel_k(nu: float, x: float) -> float:
    """K_nu(x) for x > 0; K_{-nu} = K_nu holds exactly by construction."""
    if x <= 0.0:
        raise ValueError(f"bessel_k requires x > 0, got {x}")
    return float(scipy.special.kv(abs(nu), x))


# ---------------------------------------------------------------------------
# Adaptive quadrature
# ---------------------------------------------------------------------------


def quadrature(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Adaptive integral of f over [a, b]; b may be +inf. Deterministic."""
    val, err = scipy.integrate.quad(
        f, a, b, epsabs=tol.abs, epsrel=tol.rel, limit=max(tol.max_iter, 50)
    )
    if not np.isfinite(val) or err > 100.0 * max(tol.abs, tol.rel * abs(val), 1e-300):
        raise NumericalError(
            f"quadrature failed to converge on [{a}, {b}] (estimate {val}, error {err})",
            partial=val,
        )
    return val


# ---------------------------------------------------------------------------
# Stiff ODE integration with event localization
# ---------------------------------------------------------------------------


@dataclass
class OdeProblem:
    rhs: Callable[[float, np.ndarray], np.ndarray]
    initial_state: np.ndarray
    t0: float = 0.0
    events: Sequence[Callable[[float, np.ndarray], float]] = field(default_factory=tuple)


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray  # shape (len(t), state_dim)
    event_time: float | None
    event_index: int | None
    reached_t_end: bool

    def interp(self, t: float) -> np.ndarray:
        return np.array([np.interp(t, self.t, self.y[:, k]) for k in range(self.y.shape[1])])


def solve_ivp(
    problem: OdeProblem,
    t_end: float,
    tol: Tolerance = DEFAULT_TOL,
    method: str = "LSODA",
    max_step: float = np.inf,
    first_step: float | None = None,
    t_eval: np.ndarray | None = None,
) -> Trajectory:
    """Adaptive stiff-capable integration from problem.t0 to t_end.

    Terminal events are located by root-finding inside the integrator's
    step. The returned trajectory is the solver's natural (dense) step
    sequence, fine enough to reconstruct threshold crossings.
    """
    y0 = np.atleast_1d(np.asarray(problem.initial_state, dtype=float))
    if not np.all(np.isfinite(problem.rhs(problem.t0, y0))):
        raise ValueError("rhs is not finite at the initial state")

    events = []
    for ev in problem.events:
        def wrapped(t, y, _ev=ev):
            return _ev(t, y)

        wrapped.terminal = True
        wrapped.direction = 0
        events.append(wrapped)

    res = scipy.integrate.solve_ivp(
        problem.rhs,
        (problem.t0, t_end),
        y0,
        method=method,
        rtol=tol.rel,
        atol=tol.abs,
        events=events or None,
        dense_output=False,
        max_step=max_step,
        first_step=first_step,
        t_eval=t_eval,
    )
    if res.status == -1:
        t_fail = float(res.t[-1]) if len(res.t) else problem.t0
        raise StiffnessError(
            f"ODE step size underflow near t={t_fail:.6e} s: {res.message}", time=t_fail
        )

    event_time = None
    event_index = None
    t = res.t
    y = res.y.T
    if res.status == 1:
        for k, te in enumerate(res.t_events):
            if len(te):
                if event_time is None or te[0] < event_time:
                    event_time = float(te[0])
                    event_index = k
        if event_time is not None:
            ye = res.y_events[event_index][0]
            if len(t) == 0 or t[-1] < event_time:
                t = np.append(t, event_time)
                y = np.vstack([y, ye])
    return Trajectory(
        t=t, y=y, event_time=event_time, event_index=event_index, reached_t_end=res.status == 0
    )


# ---------------------------------------------------------------------------
# Nonlinear least squares
# ---------------------------------------------------------------------------


@dataclass
class FitResult:
    params: np.ndarray
    residual_norm: float
    stderr: np.ndarray
    init_clamped: bool = False


def fit_least_squares(
    model: Callable[[np.ndarray, np.ndarray], np.ndarray],
    data: Sequence[tuple[float, float]] | tuple[np.ndarray, np.ndarray],
    init: Sequence[float],
    bounds: Sequence[tuple[float, float]] | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> FitResult:
    """Local least-squares minimizer of sum((model(p, x) - y)^2).

    `data` is either a sequence of (x, y) pairs or an (x_array, y_array)
    tuple. Returns fitted params, the residual 2-norm, and per-parameter
    standard errors from the Jacobian at the solution. Deterministic for a
    given init.
    """
    if isinstance(data, tuple) and len(data) == 2 and np.ndim(data[0]) >= 1:
        x = np.asarray(data[0], dtype=float)
        y = np.asarray(data[1], dtype=float)
    else:
        arr = np.asarray(list(data), dtype=float)
        x, y = arr[:, 0], arr[:, 1]
    p0 = np.asarray(init, dtype=float)
    if len(x) < len(p0):
        raise ValueError(f"need at least {len(p0)} data points, got {len(x)}")

    init_clamped = False
    if bounds is not None:
        lo = np.array([b[0] for b in bounds], dtype=float)
        hi = np.array([b[1] for b in bounds], dtype=float)
        clipped = np.clip(p0, lo, hi)
        # strictly interior start keeps trf happy
        span = np.where(np.isfinite(hi - lo), hi - lo, 1.0)
        clipped = np.clip(clipped, lo + 1e-12 * np.abs(span), hi - 1e-12 * np.abs(span))
        if not np.allclose(clipped, p0):
            init_clamped = True
        p0 = clipped
        scipy_bounds = (lo, hi)
        method = "trf"
    else:
        scipy_bounds = (-np.inf, np.inf)
        method = "lm"

    def residuals(p):
        return np.asarray(model(p, x), dtype=float) - y

    res = scipy.optimize.least_squares(
        residuals,
        p0,
        bounds=scipy_bounds,
        method=method,
        xtol=tol.rel,
        ftol=tol.rel,
        gtol=1e-12,
        max_nfev=max(100 * len(p0), tol.max_iter),
    )
    if not res.success and res.status <= 0:
        raise NumericalError(f"least squares failed: {res.message}", partial=res.x)

    jtj = res.jac.T @ res.jac
    m, n = len(x), len(p0)
    dof = max(m - n, 1)
    s_sq = 2.0 * res.cost / dof
    try:
        cov = np.linalg.inv(jtj) * s_sq
        stderr = np.sqrt(np.maximum(np.diag(cov), 0.0))
    except np.linalg.LinAlgError as exc:
        raise DegenerateFitError(
            f"singular Jacobian at the fitted parameters: {exc}", partial=res.x
        ) from exc
    return FitResult(
        params=res.x,
        residual_norm=float(np.linalg.norm(res.fun)),
        stderr=stderr,
        init_clamped=init_clamped,
    )
