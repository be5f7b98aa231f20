"""Self-similar change of variables between the circle and the rescaled line.

With p(t) = 4k / (1 + 16kt), xi = p x and tau = 16 k^2 t / (1 + 16kt), an odd
solution of the circle problem is u(x, t) = p(t) (2x - w(p x, tau)). The
circle x in [-1/2, 1/2] maps onto |xi| <= 2(k - tau).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError, ValidationError
from .field_core import PeriodicField, PeriodicGrid

__all__ = [
    "RescaleMap",
    "PulledBackField",
    "map_forward",
    "map_inverse",
    "assemble_u",
    "inertial_diagnostics",
    "residual_norm",
    "chi_boundary",
    "c0_star",
    "c0_constraint_ok",
    "write_residual_csv",
]


@dataclass(frozen=True)
class RescaleMap:
    """The change of variables for a fixed amplitude k."""

    k: float

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0):
            raise ValidationError("k must be positive and finite")

    def p(self, t):
        return 4.0 * self.k / (1.0 + 16.0 * self.k * np.asarray(t, dtype=float))

    def tau(self, t):
        t = np.asarray(t, dtype=float)
        return 16.0 * self.k**2 * t / (1.0 + 16.0 * self.k * t)

    def time(self, tau):
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < 0) or np.any(tau >= self.k):
            raise ValidationError(f"tau must lie in [0, k) = [0, {self.k:g})")
        return tau / (16.0 * self.k * (self.k - tau))

    def half_width(self, tau) -> float:
        """Half-length 2(k - tau) of the xi-image of the circle."""
        return 2.0 * (self.k - tau)

    def forward(self, x, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValidationError("t must be non-negative")
        p = self.p(t)
        return p * np.asarray(x, dtype=float), self.tau(t), p

    def inverse(self, xi, tau):
        t = self.time(tau)
        return np.asarray(xi, dtype=float) / self.p(t), t


def map_forward(k: float, x, t):
    """(xi, tau, p) for the point (x, t)."""
    return RescaleMap(k).forward(x, t)


def map_inverse(k: float, xi, tau):
    """(x, t) for the point (xi, tau), tau in [0, k)."""
    return RescaleMap(k).inverse(xi, tau)


def _domain_check(w, tau: float, half: float) -> None:
    limit = getattr(w, "half_width", None)
    if callable(limit) and limit(tau) < half * (1.0 - 1e-12):
        raise DomainError(
            f"evaluator covers |xi| <= {limit(tau):g} but {half:g} is required"
        )


def assemble_u(w, k: float, t: float, grid: PeriodicGrid) -> PeriodicField:
    """Sample u(x, t) = p(t) (2x - w(p(t) x, tau(t))) on ``grid``."""
    m = RescaleMap(k)
    xi, tau, p = m.forward(grid.points, t)
    p, tau = float(p), float(tau)
    _domain_check(w, tau, 0.5 * p)
    vals = p * (2.0 * grid.points - np.asarray(w(xi, tau), dtype=float))
    return PeriodicField(grid, vals)


class PulledBackField:
    """w(xi) = 2x - u(x, t) / p(t) of a circle field, as a function of xi.

    Evaluates by trigonometric interpolation of the periodic field; only the
    single time slice ``tau`` of the field is available.
    """

    def __init__(self, field_: PeriodicField, k: float, t: float):
        self.map = RescaleMap(k)
        self.t = float(t)
        self.tau = float(self.map.tau(t))
        self.p = float(self.map.p(t))
        self.field = field_
        self._coeffs = np.fft.rfft(field_.values) / field_.grid.n

    def half_width(self, tau: float) -> float:
        return self.map.half_width(self.tau)

    def _eval(self, x: np.ndarray, order: int) -> np.ndarray:
        n = self.field.grid.n
        m = np.arange(n // 2 + 1)
        weights = np.full(m.size, 2.0)
        weights[0] = 1.0
        weights[-1] = 1.0
        phase = 2j * np.pi * np.outer(x + 0.5, m)
        factor = (2j * np.pi * m) ** order
        return np.real(np.exp(phase) @ (weights * factor * self._coeffs))

    def _check(self, tau: float) -> None:
        if abs(tau - self.tau) > 1e-9 * max(1.0, self.tau):
            raise DomainError(f"field is known only at tau={self.tau:g}, not {tau:g}")

    def __call__(self, xi, tau: float):
        self._check(tau)
        x = np.atleast_1d(np.asarray(xi, dtype=float)) / self.p
        out = 2.0 * x - self._eval(x, 0) / self.p
        return out if np.ndim(xi) else float(out[0])

    def dxi(self, xi, tau: float):
        self._check(tau)
        x = np.atleast_1d(np.asarray(xi, dtype=float)) / self.p
        out = (2.0 - self._eval(x, 1) / self.p) / self.p
        return out if np.ndim(xi) else float(out[0])


def inertial_diagnostics(p: float) -> tuple[float, float, float]:
    """Leading-order (K, E, R) = (p^2/6, 2p^3/3, -8p^4) of the shock on a rarefaction."""
    if not p > 0:
        raise ValidationError("p must be positive")
    if p < 10:
        warnings.warn(f"p={p:g} is below the asymptotic regime p >= 10", RuntimeWarning, stacklevel=2)
    return p * p / 6.0, 2.0 * p**3 / 3.0, -8.0 * p**4


def _dxi(w, xi: np.ndarray, tau: float) -> np.ndarray:
    if hasattr(w, "dxi"):
        return np.asarray(w.dxi(xi, tau), dtype=float)
    if hasattr(w, "derivatives"):
        return np.asarray(w.derivatives(xi, tau)[1], dtype=float)
    h = 1e-5
    return (np.asarray(w(xi + h, tau)) - np.asarray(w(xi - h, tau))) / (2.0 * h)


def residual_norm(w_numeric, w_app, k: float, tau: float, n_points: int = 4097) -> tuple[float, float]:
    """L2 norms of w - w_app and of its xi-derivative over |xi| <= 2(k - tau).

    Composite Simpson quadrature on ``n_points`` uniform nodes.
    """
    if not 0 <= tau < k:
        raise DomainError("tau must lie in [0, k)")
    half = 2.0 * (k - tau)
    for w in (w_numeric, w_app):
        _domain_check(w, tau, half)
    xi = np.linspace(-half, half, n_points)
    diff = np.asarray(w_numeric(xi, tau), dtype=float) - np.asarray(w_app(xi, tau), dtype=float)
    ddiff = _dxi(w_numeric, xi, tau) - _dxi(w_app, xi, tau)
    l2 = math.sqrt(max(0.0, simpson(diff * diff, x=xi)))
    h1 = math.sqrt(max(0.0, simpson(ddiff * ddiff, x=xi)))
    return l2, h1


def chi_boundary(w_app, k: float, tau: float) -> float:
    """chi(tau) = 1 - w_app(2(k - tau), tau), the mismatch at the circle's edge."""
    if not tau < k:
        raise DomainError("tau must be below k")
    return 1.0 - float(w_app(2.0 * (k - tau), tau))


def c0_star(k: float, l: float, delta: float = 0.5) -> float:
    """Largest C0 keeping the shock layer inside the circle for all tau <= C0 k.

    The layer of half-width (1 + delta)^2 a log(a) / 2, a = 4k/l, must fit in
    |xi| <= 2(k - tau), giving C0* = 1 - (1 + delta)^2 a log(a) / (4k).
    """
    if not (k > 0 and l > 0 and delta > 0):
        raise ValidationError("k, l and delta must be positive")
    a = 4.0 * k / l
    return 1.0 - (1.0 + delta) ** 2 * a * math.log(a) / (4.0 * k)


def c0_constraint_ok(c0: float, k: float, l: float, delta: float = 0.5) -> bool:
    """Whether 0 < c0 <= C0*(k, l, delta)."""
    return 0.0 < c0 <= c0_star(k, l, delta)


def write_residual_csv(rows, path: str | Path) -> None:
    """Write (tau, l2, h1) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau", "l2", "h1"])
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
