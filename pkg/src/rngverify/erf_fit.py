"""Error-function models for ranked-amplitude CDFs and a damped least-squares fitter.

Two model families are supported:

* ``ErfModel``: ``z = (1 + erf((w - w0) / dw)) / 2``
* ``ExtendedErfModel``: ``z = a + b * erf(spow(w - w0, theta) / dw)`` where
  ``spow(d, t) = sign(d) * |d| ** t``.  ``theta`` is chosen by grid search; the
  remaining four parameters are fitted with theta held fixed.

The fitter is a plain Levenberg-Marquardt loop with Marquardt diagonal scaling.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy.special import erf

from .errors import DegenerateInput, InvalidParameter
from .series import CdfPoints

_log = logging.getLogger(__name__)

DECIMATION_CAP = 100_000
MAX_ITERATIONS = 200
RSS_RTOL = 1e-10
STEP_TOL = 1e-12
DW_FLOOR = 1e-9
DEFAULT_THETA_GRID = tuple(round(0.5 + 0.05 * k, 10) for k in range(31))

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


@dataclass(frozen=True)
class ErfModel:
    w0: float
    dw: float

    def __post_init__(self):
        if not self.dw > 0:
            raise InvalidParameter(f"dw must be positive, got {self.dw}")

    @property
    def params(self) -> np.ndarray:
        return np.array([self.w0, self.dw])

    def __call__(self, w):
        return 0.5 * (1.0 + erf((np.asarray(w, dtype=np.float64) - self.w0) / self.dw))

    def jacobian(self, w) -> np.ndarray:
        """Partial derivatives with respect to ``(w0, dw)``, shape ``(len(w), 2)``."""
        u = (np.asarray(w, dtype=np.float64) - self.w0) / self.dw
        g = 0.5 * _TWO_OVER_SQRT_PI * np.exp(-u * u) / self.dw
        return np.column_stack([-g, -g * u])


def _signed_power(d: np.ndarray, theta: float) -> np.ndarray:
    return np.sign(d) * np.abs(d) ** theta


@dataclass(frozen=True)
class ExtendedErfModel:
    a: float
    b: float
    w0: float
    dw: float
    theta: float

    def __post_init__(self):
        if not self.dw > 0:
            raise InvalidParameter(f"dw must be positive, got {self.dw}")
        if not self.theta > 0:
            raise InvalidParameter(f"theta must be positive, got {self.theta}")

    @property
    def params(self) -> np.ndarray:
        return np.array([self.a, self.b, self.w0, self.dw])

    def __call__(self, w):
        d = np.asarray(w, dtype=np.float64) - self.w0
        return self.a + self.b * erf(_signed_power(d, self.theta) / self.dw)

    def jacobian(self, w) -> np.ndarray:
        """Partial derivatives with respect to ``(a, b, w0, dw)``; theta is fixed."""
        d = np.asarray(w, dtype=np.float64) - self.w0
        ad = np.abs(d)
        u = np.sign(d) * ad**self.theta / self.dw
        e = erf(u)
        g = self.b * _TWO_OVER_SQRT_PI * np.exp(-u * u)
        with np.errstate(divide="ignore", invalid="ignore"):
            du_dd = self.theta * ad ** (self.theta - 1.0) / self.dw
        # the signed power has no finite slope at d == 0 when theta < 1
        if self.theta < 1:
            du_dd = np.where(ad > 0, du_dd, 0.0)
        return np.column_stack([np.ones_like(d), e, -g * du_dd, -g * u / self.dw])


Model = Union[ErfModel, ExtendedErfModel]


@dataclass(frozen=True)
class ErfFitResult:
    model: Model
    r2: float
    rss: float
    iterations: int
    converged: bool
    status: str
    n_points: int
    rss_history: tuple = field(default=(), repr=False)


def decimate(points: CdfPoints, cap: int = DECIMATION_CAP) -> CdfPoints:
    """Thin to at most ``cap`` points, uniformly in the rank index."""
    n = len(points)
    if n <= cap:
        return points
    idx = np.round(np.linspace(0, n - 1, cap)).astype(np.int64)
    return CdfPoints(x=points.x[idx], z=points.z[idx])


def _check_points(points: CdfPoints) -> tuple[np.ndarray, np.ndarray]:
    w = np.asarray(points.x, dtype=np.float64)
    z = np.asarray(points.z, dtype=np.float64)
    if w.shape != z.shape or w.ndim != 1:
        raise InvalidParameter("points need matching one-dimensional x and z")
    if w.size < 8:
        raise InvalidParameter(f"an erf fit needs at least 8 points, got {w.size}")
    if np.any(z <= 0) or np.any(z > 1) or np.any(np.diff(z) < 0):
        raise InvalidParameter("z values must lie in (0, 1] and be nondecreasing")
    if np.all(w == w[0]):
        raise DegenerateInput("all abscissae are equal")
    return w, z


def initial_guess(points: CdfPoints) -> ErfModel:
    """Starting point: interpolated median and sqrt(2) times the implied spread.

    Each point carries probability mass equal to its increment in ``z``
    (the first one carries ``z[0]``); the implied sample is that discrete
    distribution over the ``x`` values.
    """
    w = np.asarray(points.x, dtype=np.float64)
    z = np.asarray(points.z, dtype=np.float64)
    w0 = float(np.interp(0.5, z, w))
    mass = np.diff(z, prepend=0.0)
    total = mass.sum()
    if total > 0:
        mean = float(np.dot(mass, w) / total)
        var = float(np.dot(mass, (w - mean) ** 2) / total)
    else:
        var = float(np.var(w))
    dw = max(math.sqrt(2.0 * max(var, 0.0)), DW_FLOOR)
    return ErfModel(w0=w0, dw=dw)


def _levenberg_marquardt(
    make: Callable[[np.ndarray], Model],
    p0: np.ndarray,
    w: np.ndarray,
    z: np.ndarray,
    max_iterations: int = MAX_ITERATIONS,
):
    p = np.asarray(p0, dtype=np.float64)
    model = make(p)
    r = z - model(w)
    rss = float(np.dot(r, r))
    history = [rss]
    lam = 1e-3
    status = "max_iterations"
    it = 0
    while it < max_iterations:
        it += 1
        if rss == 0.0:
            status = "exact"
            break
        J = model.jacobian(w)
        A = J.T @ J
        g = J.T @ r
        diag = np.diag(A).copy()
        diag = np.maximum(diag, 1e-12 * max(diag.max(), 1e-300))
        accepted = False
        while lam < 1e16:
            try:
                step = np.linalg.solve(A + lam * np.diag(diag), g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            try:
                trial = make(p + step)
            except InvalidParameter:
                lam *= 10.0
                continue
            r_new = z - trial(w)
            rss_new = float(np.dot(r_new, r_new))
            if np.isfinite(rss_new) and rss_new < rss:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            # no damping level reduces the residual: a numerical minimum
            status = "stalled"
            break
        rel_change = (rss - rss_new) / rss
        p = p + step
        model, r, rss = trial, r_new, rss_new
        history.append(rss)
        lam = max(lam / 10.0, 1e-12)
        if rel_change < RSS_RTOL:
            status = "rss_tolerance"
            break
        if np.max(np.abs(step)) < STEP_TOL * (1.0 + np.max(np.abs(p))):
            status = "step_tolerance"
            break
    converged = status != "max_iterations"
    return model, rss, it, converged, status, tuple(history)


def _result(model, rss, it, converged, status, history, z) -> ErfFitResult:
    tss = float(np.dot(z - z.mean(), z - z.mean()))
    r2 = 1.0 - rss / tss if tss > 0 else (1.0 if rss == 0 else -math.inf)
    if not converged:
        _log.warning("erf fit did not converge in %d iterations (rss=%g)", it, rss)
    return ErfFitResult(
        model=model,
        r2=min(r2, 1.0),
        rss=rss,
        iterations=it,
        converged=converged,
        status=status,
        n_points=int(z.size),
        rss_history=history,
    )


def fit_erf(
    points: CdfPoints,
    cap: int = DECIMATION_CAP,
    max_iterations: int = MAX_ITERATIONS,
) -> ErfFitResult:
    """Fit ``z = (1 + erf((w - w0) / dw)) / 2`` to ranked CDF points.

    Returns the best parameters found; ``converged`` is False when the
    iteration limit was hit first.
    """
    w, z = _check_points(decimate(points, cap))
    guess = initial_guess(CdfPoints(w, z))
    out = _levenberg_marquardt(
        lambda p: ErfModel(w0=float(p[0]), dw=float(p[1])),
        guess.params,
        w,
        z,
        max_iterations,
    )
    return _result(*out, z)


def fit_erf_extended(
    points: CdfPoints,
    theta_grid: Sequence[float] = DEFAULT_THETA_GRID,
    cap: int = DECIMATION_CAP,
    max_iterations: int = MAX_ITERATIONS,
) -> ErfFitResult:
    """Fit ``z = a + b * erf(spow(w - w0, theta) / dw)``, grid-searching theta.

    For each theta the four remaining parameters are fitted; the fit with the
    smallest residual sum of squares is returned (earliest grid entry on ties).
    """
    theta_grid = [float(t) for t in theta_grid]
    if not theta_grid:
        raise InvalidParameter("theta_grid must not be empty")
    if any(not t > 0 for t in theta_grid):
        raise InvalidParameter("theta values must be positive")
    w, z = _check_points(decimate(points, cap))
    base = initial_guess(CdfPoints(w, z))
    best = None
    for theta in theta_grid:
        p0 = np.array([0.5, 0.5, base.w0, max(base.dw**theta, DW_FLOOR)])
        out = _levenberg_marquardt(
            lambda p, t=theta: ExtendedErfModel(
                a=float(p[0]), b=float(p[1]), w0=float(p[2]), dw=float(p[3]), theta=t
            ),
            p0,
            w,
            z,
            max_iterations,
        )
        if best is None or out[1] < best[1]:
            best = out
    return _result(*best, z)
