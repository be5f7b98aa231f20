"""Maximizer of the enstrophy rate R at fixed enstrophy on the unit circle.

In the stretched variable xi = k x the derivative v = u_x of the maximizer is
v = a_plus - 4 k^2 y(xi), where y is a periodic orbit of y'' = 4y - 6y^2 with
first integral (y')^2 = 4y^2 - 4y^3 + c and period k. The solution is
parametrized by k: the period condition fixes c, the zero-mean constraint fixes
a_plus = 4 k m1 with m1 the integral of y over a period, and the enstrophy
follows in closed form. An outer root-find matches the prescribed enstrophy.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .errors import NumericalError, PreconditionError, ValidationError
from .field_core import PeriodicField, PeriodicGrid

__all__ = [
    "C_MIN",
    "CnoidalOrbit",
    "MaximizerSolution",
    "ExpansionReport",
    "cnoidal_period",
    "orbit_from_c",
    "find_cnoidal",
    "maximizer_at_k",
    "solve_maximizer",
    "asymptotic_profile",
    "check_expansions",
    "write_profile_csv",
]

log = logging.getLogger(__name__)

#: Lower end of the admissible first-integral levels (the center y = 2/3).
C_MIN = -16.0 / 27.0
_Y_CENTER = 2.0 / 3.0
_QUAD_OPTS = dict(epsabs=0.0, epsrel=1e-13, limit=200)


def _roots_from_ymin(y_min: float) -> tuple[float, float, float]:
    """(y_min, y_max, y3) of 4y^2 - 4y^3 + c with c fixed by y_min."""
    b = 1.0 - y_min
    y_max = 0.5 * (b + math.sqrt(b * (1.0 + 3.0 * y_min)))
    # Product of the two other roots is -b y_min; avoids cancellation for small y_min.
    y3 = -b * y_min / y_max
    return y_min, y_max, y3


def _c_from_ymin(y_min: float) -> float:
    return -4.0 * y_min * y_min * (1.0 - y_min)


def _ymin_from_c(c: float) -> float:
    # 4 y^2 (1 - y) = -c is increasing on (0, 2/3).
    guess_hi = _Y_CENTER
    return brentq(
        lambda y: 4.0 * y * y * (1.0 - y) + c,
        0.0,
        guess_hi,
        xtol=1e-300,
        rtol=4 * np.finfo(float).eps,
        maxiter=2000,
    )


def _theta_breaks(A: float, D: float) -> list[float]:
    """Geometric breakpoints resolving the boundary layer of width sqrt(A/D) at theta = 0."""
    w = math.sqrt(A / D)
    pts = [0.0]
    b = w
    while b < math.pi / 2:
        pts.append(b)
        b *= 10.0
    pts.append(math.pi / 2)
    return pts


def _theta_integral(y_min: float, power: int) -> float:
    """2 * int_{y_min}^{y_max} y^p dy / sqrt(4y^2 - 4y^3 + c) in the theta variable."""
    _, y_max, y3 = _roots_from_ymin(y_min)
    D = y_max - y_min
    A = y_min - y3

    def f(th):
        s2 = math.sin(th) ** 2
        return (y_min + D * s2) ** power / math.sqrt(A + D * s2)

    pts = _theta_breaks(A, D)
    return 2.0 * sum(quad(f, lo, hi, **_QUAD_OPTS)[0] for lo, hi in zip(pts[:-1], pts[1:]))


def _check_c(c: float) -> None:
    if not (C_MIN < c < 0.0):
        raise ValidationError(f"first-integral level must lie in (-16/27, 0), got {c}")


def cnoidal_period(c: float) -> float:
    """Period in xi of the orbit (y')^2 = 4y^2 - 4y^3 + c."""
    _check_c(c)
    return _theta_integral(_ymin_from_c(c), 0)


@dataclass(frozen=True)
class CnoidalOrbit:
    """Periodic orbit of y'' = 4y - 6y^2 with period k."""

    k: float
    c: float
    y_min: float
    y_max: float
    y3: float
    m1: float
    m3: float

    @property
    def period(self) -> float:
        return _theta_integral(self.y_min, 0)

    def moment(self, power: int) -> float:
        return _theta_integral(self.y_min, power)


def _orbit_from_ymin(y_min: float, k: float | None = None) -> CnoidalOrbit:
    _, y_max, y3 = _roots_from_ymin(y_min)
    period = _theta_integral(y_min, 0)
    return CnoidalOrbit(
        k=period if k is None else k,
        c=_c_from_ymin(y_min),
        y_min=y_min,
        y_max=y_max,
        y3=y3,
        m1=_theta_integral(y_min, 1),
        m3=_theta_integral(y_min, 3),
    )


def orbit_from_c(c: float) -> CnoidalOrbit:
    _check_c(c)
    return _orbit_from_ymin(_ymin_from_c(c))


def find_cnoidal(k: float) -> CnoidalOrbit:
    """Orbit of period k, found by bracketed root-finding in log(y_min)."""
    if not (math.isfinite(k) and k > math.pi + 1e-6):
        raise ValidationError(f"no periodic orbit of period {k}: need k > pi")
    lo, hi = math.log(1e-300), math.log(_Y_CENTER * (1.0 - 1e-12))

    def gap(s):
        return _theta_integral(math.exp(s), 0) - k

    if gap(lo) < 0.0:
        raise NumericalError(f"period {k} exceeds the representable range")
    if gap(hi) > 0.0:
        raise NumericalError(f"period {k} is too close to pi to resolve")
    s = brentq(gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    orbit = _orbit_from_ymin(math.exp(s), k)
    if abs(orbit.period - k) > 1e-10 * k:
        raise NumericalError(f"period root-find missed: {orbit.period} vs {k}")
    return orbit


class _Profile:
    """y(xi) and z(xi) = int_0^xi y on [0, k/2], with y(0) = y_max.

    Integrates the phase ODE theta' = -sqrt(A + D sin^2 theta), y = y_min + D sin^2 theta,
    which is regular at the turning points, together with z' = y and the moments
    needed for the energy.
    """

    def __init__(self, orbit: CnoidalOrbit):
        self.orbit = orbit
        y_min, y_max, y3 = orbit.y_min, orbit.y_max, orbit.y3
        D = y_max - y_min
        A = y_min - y3
        self.half = orbit.k / 2.0

        def rhs(xi, state):
            th, z = state[0], state[1]
            s2 = math.sin(th) ** 2
            y = y_min + D * s2
            return [-math.sqrt(A + D * s2), y, z * z, xi * z]

        sol = solve_ivp(
            rhs,
            (0.0, self.half),
            [math.pi / 2, 0.0, 0.0, 0.0],
            method="DOP853",
            rtol=1e-13,
            atol=1e-15,
            dense_output=True,
        )
        if not sol.success:
            raise NumericalError(f"profile integration failed: {sol.message}")
        self._sol = sol
        self._D = D
        self.z_half, self.int_z2, self.int_xi_z = (float(v) for v in sol.y[1:, -1])

    def yz(self, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """y (even) and z (odd) at arbitrary xi by period extension."""
        xi = np.asarray(xi, dtype=float)
        k = self.orbit.k
        # Reduce to [-k/2, k/2); z gains m1 per period.
        shift = np.floor((xi + self.half) / k)
        red = xi - shift * k
        s = np.clip(np.abs(red), 0.0, self.half)
        th, z = self._sol.sol(s.ravel())[:2]
        y = self.orbit.y_min + self._D * np.sin(th) ** 2
        z = np.sign(red.ravel()) * z + shift.ravel() * self.orbit.m1
        return y.reshape(xi.shape), z.reshape(xi.shape)


@dataclass(frozen=True)
class MaximizerSolution:
    """Maximizer of R at fixed enstrophy, normalized so that u'(0) < 0."""

    target_E: float
    k: float
    lam: float
    a_plus: float
    a_minus: float
    orbit: CnoidalOrbit
    K: float
    E: float
    R: float
    _profile: _Profile

    def v(self, x) -> np.ndarray:
        """u_x(x) = a_plus - 4 k^2 y(k x)."""
        y, _ = self._profile.yz(self.k * np.asarray(x, dtype=float))
        return self.a_plus - 4.0 * self.k**2 * y

    def u(self, x) -> np.ndarray:
        """u(x) = a_plus x - 4 k z(k x)."""
        x = np.asarray(x, dtype=float)
        _, z = self._profile.yz(self.k * x)
        return self.a_plus * x - 4.0 * self.k * z

    def v_derivatives(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """v, v' and v'' from the orbit equation, without numerical differentiation."""
        x = np.asarray(x, dtype=float)
        y, _ = self._profile.yz(self.k * x)
        c = self.orbit.c
        yp2 = np.maximum(4.0 * y * y - 4.0 * y**3 + c, 0.0)
        # v' = -4k^3 y'(kx); y' is odd with y' < 0 just right of the maximum at 0.
        red = np.mod(self.k * x + self.k / 2.0, self.k) - self.k / 2.0
        yp = -np.sign(red) * np.sqrt(yp2)
        ypp = 4.0 * y - 6.0 * y * y
        k = self.k
        return self.a_plus - 4.0 * k**2 * y, -4.0 * k**3 * yp, -4.0 * k**4 * ypp

    def field(self, grid: PeriodicGrid) -> PeriodicField:
        vals = self.u(grid.points)
        return PeriodicField(grid, vals - vals.mean(), mean_zero=True)

    def el_residual(self, x) -> np.ndarray:
        """2v'' - 3v^2 - 2 lambda v + 6E, relative to 6E."""
        v, _, vpp = self.v_derivatives(x)
        return (2.0 * vpp - 3.0 * v * v - 2.0 * self.lam * v + 6.0 * self.E) / (6.0 * self.E)

    def first_integral(self, x) -> np.ndarray:
        """(v')^2 - v^3 - lambda v^2 + 6 E v, constant along the orbit."""
        v, vp, _ = self.v_derivatives(x)
        return vp * vp - v**3 - self.lam * v * v + 6.0 * self.E * v


def _energy_from_profile(prof: _Profile, k: float, a_plus: float) -> float:
    # K = a+^2/24 - (8 a+ / k) int_0^{k/2} xi z + 16 k int_0^{k/2} z^2
    return a_plus**2 / 24.0 - 8.0 * a_plus / k * prof.int_xi_z + 16.0 * k * prof.int_z2


def _chain(orbit: CnoidalOrbit) -> tuple[float, float, float, float, float]:
    k = orbit.k
    a_plus = 4.0 * k * orbit.m1
    lam = 4.0 * k * k - 3.0 * a_plus
    E = a_plus * (8.0 * k * k - 3.0 * a_plus) / 6.0
    a_minus = (-lam - 4.0 * k * k) / 3.0
    R = 2.0 * lam * E + a_plus**2 * (4.0 * k * k - a_plus) - 32.0 * k**5 * orbit.m3
    return a_plus, a_minus, lam, E, R


def _enstrophy_of_k(k: float) -> float:
    return _chain(find_cnoidal(k))[3]


def maximizer_at_k(k: float, target_E: float | None = None) -> MaximizerSolution:
    """Maximizer whose orbit has period k (its enstrophy follows from k)."""
    orbit = find_cnoidal(k)
    a_plus, a_minus, lam, E, R = _chain(orbit)
    prof = _Profile(orbit)
    K = _energy_from_profile(prof, k, a_plus)
    return MaximizerSolution(
        target_E=E if target_E is None else target_E,
        k=k,
        lam=lam,
        a_plus=a_plus,
        a_minus=a_minus,
        orbit=orbit,
        K=K,
        E=E,
        R=R,
        _profile=prof,
    )


def solve_maximizer(target_E: float, monotonicity_samples: int = 6) -> MaximizerSolution:
    """Maximizer with prescribed enstrophy ``target_E``."""
    if not (math.isfinite(target_E) and target_E > 0):
        raise ValidationError("target enstrophy must be positive and finite")
    k_lo = math.pi + 1e-5
    e_lo = _enstrophy_of_k(k_lo)
    if target_E <= e_lo:
        raise PreconditionError(
            f"target enstrophy {target_E:g} is below {e_lo:.3g}, the smallest value with k > pi"
        )
    k_hi = max(4.0, 2.0 * ((3.0 * target_E / 32.0) ** (1.0 / 3.0) + 1.0))
    while _enstrophy_of_k(k_hi) < target_E:
        k_hi *= 1.5
        if k_hi > 600.0:
            raise NumericalError("could not bracket k for the requested enstrophy")
    ks = np.linspace(k_lo, k_hi, monotonicity_samples)
    es = np.array([_enstrophy_of_k(float(kk)) for kk in ks])
    sign_changes = int(np.sum(np.diff(np.sign(es - target_E)) != 0))
    log.info(
        "E(k) on [%.4g, %.4g]: monotone=%s, sign changes=%d",
        k_lo, k_hi, bool(np.all(np.diff(es) > 0)), sign_changes,
    )
    if sign_changes != 1:
        raise NumericalError(f"E(k) - target has {sign_changes} sign changes on the bracket")
    j = int(np.argmax(es >= target_E))
    k = brentq(
        lambda kk: _enstrophy_of_k(kk) - target_E,
        float(ks[j - 1]),
        float(ks[j]),
        xtol=1e-14,
        rtol=4 * np.finfo(float).eps,
        maxiter=200,
    )
    sol = maximizer_at_k(k, target_E)
    if abs(sol.E - target_E) > 1e-8 * target_E:
        raise NumericalError(f"enstrophy mismatch {sol.E} vs {target_E}")
    return sol


def asymptotic_profile(k: float, grid: PeriodicGrid | None = None) -> PeriodicField:
    """Sample 4k(2x - tanh(kx)), the large-k form of the maximizer."""
    if not k > math.pi:
        raise ValidationError("k must exceed pi")
    if grid is None:
        grid = PeriodicGrid(max(1024, 1 << math.ceil(math.log2(64 * k))))
    x = grid.points
    return PeriodicField(grid, 4.0 * k * (2.0 * x - np.tanh(k * x)))


@dataclass(frozen=True)
class ExpansionReport:
    """Residuals of K, E, R against their large-k leading terms.

    Each residual is divided by the order of the next term: k for K, k^2 for E
    and k^4 for R. ``z_sup`` is sup|z - tanh| on [-k/2, k/2] and ``z_ratio``
    divides it by k e^{-k}.
    """

    k: float
    K_residual: float
    E_residual: float
    R_residual: float
    z_sup: float
    z_ratio: float


def check_expansions(solution: MaximizerSolution, n_points: int = 4001) -> ExpansionReport:
    k = solution.k
    xi = np.linspace(-k / 2.0, k / 2.0, n_points)
    _, z = solution._profile.yz(xi)
    z_sup = float(np.max(np.abs(z - np.tanh(xi))))
    return ExpansionReport(
        k=k,
        K_residual=(solution.K - 8.0 * k**2 / 3.0) / k,
        E_residual=(solution.E - 32.0 * k**3 / 3.0) / k**2,
        R_residual=(solution.R - 256.0 * k**5 / 5.0) / k**4,
        z_sup=z_sup,
        z_ratio=z_sup / (k * math.exp(-k)),
    )


def write_profile_csv(solution: MaximizerSolution, grid: PeriodicGrid, path: str | Path) -> None:
    x = grid.points
    u = solution.u(x)
    v = solution.v(x)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "u", "v"])
        for row in zip(x, u, v):
            writer.writerow([repr(float(r)) for r in row])
