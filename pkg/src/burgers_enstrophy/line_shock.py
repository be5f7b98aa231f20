"""Viscous shocks on the infinite line in the rescaled variables (xi, tau).

The rescaled Burgers equation w_tau = 2 w w_xi + w_xi_xi is linearized by
w = d/dxi log psi, with psi solving psi_tau = psi_xi_xi + psi. Starting from
w(xi, 0) = tanh(xi / a), the solution relaxes to the steady shock tanh(xi).

For a = 4 psi is a finite sum of exponentials. For general a it is a pair of
Gaussian integrals psi_plus, psi_minus against phi_a(eta) = (1 + e^{-2|eta|/a})^a,
evaluated here by adaptive quadrature. Derivatives in xi come from Hermite
weights, so the same quadrature engine delivers w, w_xi and w_xi_xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import erfc, logsumexp

from .errors import QuadratureError, ValidationError

__all__ = [
    "LineShockParams",
    "LineShockSolution",
    "SteadyShock",
    "LineMaximizer",
    "psi_closed_a4",
    "w_line_a4",
    "phi_a",
    "psi_pm_general",
    "w_line_general",
    "halfline_diagnostics",
    "sup_deviation_from_tanh",
    "line_maximizer",
    "t_star_formula",
]

SQRT_PI = math.sqrt(math.pi)
EVAL_BUDGET = 100_000
QUAD_RTOL_FLOOR = 1e-13
HALFLINE_CUTOFF = 1e-14

# psi for a = 4 as sum_i c_i exp(alpha_i xi + beta_i tau).
_A4_COEF = np.array([3.0 / 8.0, 0.25, 0.25, 1.0 / 16.0, 1.0 / 16.0])
_A4_ALPHA = np.array([0.0, 0.5, -0.5, 1.0, -1.0])
_A4_BETA = np.array([0.0, 0.25, 0.25, 1.0, 1.0])


@dataclass(frozen=True)
class LineShockParams:
    """Shock-width ratio a = 4k/l and the quadrature tolerance."""

    a: float = 4.0
    quad_tol: float = 1e-10

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a >= 4.0):
            raise ValidationError(f"a must be >= 4, got {self.a}")
        if not (1e-13 <= self.quad_tol <= 1e-6):
            raise ValidationError(f"quad_tol must lie in [1e-13, 1e-6], got {self.quad_tol}")

    @property
    def z_max(self) -> float:
        """Gaussian truncation with e^{-z^2} 2^a <= quad_tol.

        Hermite weights up to cubic order add a polynomial factor, covered by
        an extra 1e4 inside the logarithm.
        """
        return math.sqrt(max(0.0, self.a * math.log(2.0) + math.log(1e4 / self.quad_tol)))


# closed form, a = 4


def _as_array(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _a4_exponents(xi: np.ndarray, tau: float) -> np.ndarray:
    return (
        np.log(_A4_COEF)[:, None]
        + _A4_ALPHA[:, None] * xi[None, :]
        + _A4_BETA[:, None] * tau
    )


def psi_closed_a4(xi, tau: float):
    """psi = (1/8)[3 + 4 cosh(xi/2) e^{tau/4} + cosh(xi) e^tau].

    Points with |xi| > 500 are summed in log-space.
    """
    xi_arr = np.atleast_1d(_as_array(xi))
    direct = (3.0 + 4.0 * np.cosh(xi_arr / 2.0) * math.exp(tau / 4.0) + np.cosh(xi_arr) * math.exp(tau)) / 8.0
    big = np.abs(xi_arr) > 500.0
    if np.any(big):
        with np.errstate(over="ignore"):
            direct[big] = np.exp(logsumexp(_a4_exponents(xi_arr[big], tau), axis=0))
    return direct if np.ndim(xi) else float(direct[0])


def log_psi_closed_a4(xi, tau: float):
    xi_arr = np.atleast_1d(_as_array(xi))
    out = logsumexp(_a4_exponents(xi_arr, tau), axis=0)
    return out if np.ndim(xi) else float(out[0])


def _a4_derivatives(xi: np.ndarray, tau: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """w and its xi-derivatives as cumulants of the exponent weights.

    With weights p_i proportional to c_i exp(alpha_i xi + beta_i tau),
    w = mean(alpha), w_xi = variance, w_xi_xi = third central moment.
    """
    ex = _a4_exponents(xi, tau)
    p = np.exp(ex - ex.max(axis=0))
    p /= p.sum(axis=0)
    m1 = (p * _A4_ALPHA[:, None]).sum(axis=0)
    dev = _A4_ALPHA[:, None] - m1[None, :]
    return m1, (p * dev**2).sum(axis=0), (p * dev**3).sum(axis=0)


def w_line_a4(xi, tau: float):
    """tanh(xi) plus the explicit correction decaying like e^{-3 tau / 4}."""
    xi_arr = np.atleast_1d(_as_array(xi))
    s = np.abs(xi_arr)
    sign = np.sign(xi_arr)
    e2 = np.exp(-2.0 * s)
    sech = 2.0 * np.exp(-s) / (1.0 + e2)
    tanh = (1.0 - e2) / (1.0 + e2)
    # sech(s) sinh(s/2) and sech(s) cosh(s/2), free of overflow
    sech_sinh_half = (np.exp(-s / 2.0) - np.exp(-1.5 * s)) / (1.0 + e2)
    sech_cosh_half = (np.exp(-s / 2.0) + np.exp(-1.5 * s)) / (1.0 + e2)
    g = math.exp(-0.75 * tau)
    num = g * (2.0 * sech_sinh_half - 4.0 * sech_cosh_half * tanh - 3.0 * tanh * sech * math.exp(-tau / 4.0))
    den = 1.0 + 4.0 * sech_cosh_half * g + 3.0 * sech * math.exp(-tau)
    out = sign * (tanh + num / den)
    return out if np.ndim(xi) else float(out[0])


# general a


def phi_a(xi, a: float):
    """phi_a(xi) = (1 + e^{-2|xi|/a})^a evaluated in log-space."""
    if not a > 0:
        raise ValidationError("a must be positive")
    xi_arr = _as_array(xi)
    out = np.exp(a * np.log1p(np.exp(-2.0 * np.abs(xi_arr) / a)))
    return out if np.ndim(xi) else float(out)


def _phi_minus_one(eta, a: float):
    return np.expm1(a * np.log1p(np.exp(-2.0 * np.abs(eta) / a)))


def _hermite_stack(z: float) -> np.ndarray:
    return np.array([1.0, 2.0 * z, 4.0 * z * z - 2.0, 8.0 * z**3 - 12.0 * z])


def _hermite(j: int, z: float) -> float:
    return float(_hermite_stack(z)[j])


def _vec_integral(fn: Callable[[float], np.ndarray], lo: float, hi: float, tol: float) -> np.ndarray:
    """Adaptive Gauss-Kronrod for a vector integrand within ``EVAL_BUDGET`` evaluations.

    The target is max(tol, 1e-13 |I|): integrals of size up to 2^a cannot be
    resolved below double-precision roundoff in absolute terms.
    """
    if not hi > lo:
        return np.zeros(4)
    limit = EVAL_BUDGET // 21
    res, err, info = quad_vec(
        fn, lo, hi, epsabs=tol, epsrel=QUAD_RTOL_FLOOR, norm="max", limit=limit, full_output=True
    )
    target = max(tol, 10.0 * QUAD_RTOL_FLOOR * float(np.max(np.abs(res))))
    # Status 2 flags roundoff; accept it when the error estimate still meets the target.
    if info.status == 1 or not np.all(np.isfinite(res)) or err > target:
        raise QuadratureError(
            f"Gaussian quadrature on [{lo:.3g}, {hi:.3g}] failed (status {info.status}, "
            f"error estimate {err:.2e}, {info.neval} evaluations)"
        )
    return res


def _phi_moments(xi: float, tau: float, params: LineShockParams):
    """Derivatives of order 0..3 of Phi_plus and Phi_minus with respect to xi.

    Phi_plus = int_{-z+}^inf e^{-z^2} phi(xi + 2 tau + 2 sqrt(tau) z) dz with
    z+ = (2 tau + xi) / (2 sqrt tau), and Phi_minus is its mirror image over
    (-inf, z-]. Each xi-derivative brings a Hermite factor H_j / (2 sqrt tau)^j;
    the constant part of phi integrates in closed form and only phi - 1 goes
    through quadrature. Also returns psi_pm = Phi_pm - sqrt(pi) computed
    without cancellation.
    """
    a = params.a
    rt = math.sqrt(tau)
    z_plus = (2.0 * tau + xi) / (2.0 * rt)
    z_minus = (2.0 * tau - xi) / (2.0 * rt)
    zmax = params.z_max
    tol = params.quad_tol

    def f_plus(z):
        return _hermite_stack(z) * math.exp(-z * z) * float(_phi_minus_one(xi + 2.0 * tau + 2.0 * rt * z, a))

    def f_minus(z):
        return _hermite_stack(z) * math.exp(-z * z) * float(_phi_minus_one(xi - 2.0 * tau + 2.0 * rt * z, a))

    P = _vec_integral(f_plus, max(-z_plus, -zmax), zmax, tol)
    Q = _vec_integral(f_minus, -zmax, min(z_minus, zmax), tol)
    base_plus = np.empty(4)
    base_minus = np.empty(4)
    base_plus[0] = 0.5 * SQRT_PI * erfc(-z_plus)
    base_minus[0] = 0.5 * SQRT_PI * erfc(-z_minus)
    for j in range(1, 4):
        base_plus[j] = _hermite(j - 1, -z_plus) * math.exp(-z_plus * z_plus)
        base_minus[j] = -_hermite(j - 1, z_minus) * math.exp(-z_minus * z_minus)
    scale = (2.0 * rt) ** -np.arange(4)
    psi_plus = P[0] - 0.5 * SQRT_PI * erfc(z_plus)
    psi_minus = Q[0] - 0.5 * SQRT_PI * erfc(z_minus)
    return scale * (P + base_plus), scale * (Q + base_minus), psi_plus, psi_minus


def psi_pm_general(xi: float, tau: float, params: LineShockParams) -> tuple[float, float]:
    """The Gaussian integrals psi_plus and psi_minus at (xi, tau), tau > 0."""
    if not tau > 0:
        raise ValidationError("psi_pm_general needs tau > 0")
    _, _, psi_plus, psi_minus = _phi_moments(float(xi), float(tau), params)
    return float(psi_plus), float(psi_minus)


def _general_point(xi: float, tau: float, params: LineShockParams) -> tuple[float, float, float, float]:
    """(w via the Psi assembly, w via cumulants, w_xi, w_xi_xi) at xi >= 0."""
    plus, minus, psi_p, psi_m = _phi_moments(xi, tau, params)
    e = math.exp(-2.0 * xi)
    # Raw moments d^j psi / psi; the common factor e^{xi} cancels.
    moments = []
    for j in range(4):
        num = 0.0
        for i in range(j + 1):
            binom = math.comb(j, i)
            num += binom * (plus[i] + e * (-1) ** (j - i) * minus[i])
        moments.append(num)
    m1, m2, m3 = (moments[j] / moments[0] for j in (1, 2, 3))
    w_xi = m2 - m1 * m1
    w_xixi = m3 - 3.0 * m1 * m2 + 2.0 * m1**3
    # Assembly through Psi = (e^xi psi+ + e^-xi psi-) / (sqrt(pi) (e^xi + e^-xi)).
    tanh = (1.0 - e) / (1.0 + e)
    sech2 = 4.0 * e / (1.0 + e) ** 2
    big_psi = (psi_p + e * psi_m) / (SQRT_PI * (1.0 + e))
    d_big_psi = (plus[1] + e * minus[1]) / (SQRT_PI * (1.0 + e)) + sech2 * (psi_p - psi_m) / (2.0 * SQRT_PI)
    w = tanh + d_big_psi / (1.0 + big_psi)
    return w, m1, w_xi, w_xixi


def w_line_general(xi, tau: float, params: LineShockParams):
    """w(xi, tau) for initial data tanh(xi / a)."""
    return _general_values(xi, tau, params, order=0)


def _general_values(xi, tau: float, params: LineShockParams, order: int):
    xi_arr = np.atleast_1d(_as_array(xi))
    out = np.empty((3, xi_arr.size))
    a = params.a
    for idx, x in enumerate(xi_arr):
        s = abs(float(x))
        sign = 1.0 if x >= 0 else -1.0
        if tau == 0.0:
            t = math.tanh(s / a)
            w, wx, wxx = t, (1.0 - t * t) / a, -2.0 * t * (1.0 - t * t) / (a * a)
        elif s == 0.0 and order == 0:
            w, wx, wxx = 0.0, 0.0, 0.0
        else:
            w, _, wx, wxx = _general_point(s, float(tau), params)
            if s == 0.0:
                w, wxx = 0.0, 0.0
        out[:, idx] = (sign * w, wx, sign * wxx)
    if order == 0:
        res = out[0]
        return res if np.ndim(xi) else float(res[0])
    return tuple(r if np.ndim(xi) else float(r[0]) for r in out)


# solution objects


class LineShockSolution:
    """Evaluator of w(xi, tau) and its first two xi-derivatives.

    Build with :meth:`closed_a4` (exact exponential sum) or :meth:`general`
    (Gaussian quadrature, any a >= 4). Calling the object returns w; ``dxi``
    returns w_xi and ``derivatives`` returns all three.
    """

    def __init__(self, params: LineShockParams, kind: str):
        if kind not in ("closed_a4", "quadrature_general"):
            raise ValidationError(f"unknown solution kind {kind!r}")
        if kind == "closed_a4" and params.a != 4.0:
            raise ValidationError("the closed form exists only for a = 4")
        self.params = params
        self.kind = kind

    @classmethod
    def closed_a4(cls, quad_tol: float = 1e-10) -> "LineShockSolution":
        return cls(LineShockParams(4.0, quad_tol), "closed_a4")

    @classmethod
    def general(cls, a: float, quad_tol: float = 1e-10) -> "LineShockSolution":
        return cls(LineShockParams(float(a), quad_tol), "quadrature_general")

    @property
    def a(self) -> float:
        return self.params.a

    def __repr__(self) -> str:
        return f"LineShockSolution(a={self.a:g}, kind={self.kind!r})"

    def __call__(self, xi, tau: float):
        _check_tau(tau)
        if self.kind == "closed_a4":
            return w_line_a4(xi, tau)
        return w_line_general(xi, tau, self.params)

    def derivatives(self, xi, tau: float):
        _check_tau(tau)
        if self.kind == "closed_a4":
            xi_arr = np.atleast_1d(_as_array(xi))
            res = _a4_derivatives(xi_arr, float(tau))
            return tuple(r if np.ndim(xi) else float(r[0]) for r in res)
        return _general_values(xi, tau, self.params, order=2)

    def dxi(self, xi, tau: float):
        return self.derivatives(xi, tau)[1]


class SteadyShock:
    """The steady viscous shock w = tanh(xi), independent of tau."""

    a = 1.0
    kind = "steady"

    def __call__(self, xi, tau: float = 0.0):
        return np.tanh(xi)

    def derivatives(self, xi, tau: float = 0.0):
        t = np.tanh(xi)
        s2 = 1.0 - t * t
        return t, s2, -2.0 * t * s2

    def dxi(self, xi, tau: float = 0.0):
        return 1.0 - np.tanh(xi) ** 2


def _check_tau(tau: float) -> None:
    if not (math.isfinite(tau) and tau >= 0):
        raise ValidationError("tau must be non-negative and finite")


def _halfline_extent(solution, tau: float) -> float:
    """Smallest power-of-two xi beyond which |w_xi| stays below the cutoff."""
    L = 1.0
    while L < 4096.0:
        wx = np.abs(np.atleast_1d(solution.dxi(np.array([L, 1.5 * L]), tau)))
        if np.all(wx < HALFLINE_CUTOFF):
            return L
        L *= 2.0
    return L


def halfline_diagnostics(solution, tau: float, rtol: float = 1e-12) -> tuple[float, float]:
    """E = int_0^inf w_xi^2 and R = 2 int_0^inf (w_xi^3 - w_xi_xi^2).

    The integrals are truncated where |w_xi| drops below 1e-14.
    """
    L = _halfline_extent(solution, tau)

    def integrand(x):
        _, wx, wxx = solution.derivatives(np.array([x]), tau)
        wx, wxx = float(wx[0]), float(wxx[0])
        return np.array([wx * wx, 2.0 * (wx**3 - wxx * wxx)])

    pts = [p for p in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0) if p < L]
    edges = [0.0, *pts, L]
    total = np.zeros(2)
    for lo, hi in zip(edges[:-1], edges[1:]):
        res, err, info = quad_vec(integrand, lo, hi, epsabs=1e-13, epsrel=rtol, limit=2000, full_output=True)
        if info.status == 1 or not np.all(np.isfinite(res)):
            raise QuadratureError(f"half-line quadrature failed on [{lo}, {hi}] (error {err:.2e})")
        total += res
    return float(total[0]), float(total[1])


def sup_deviation_from_tanh(solution, tau: float, xi_max: float = 40.0, n: int = 4001) -> float:
    """sup over xi >= 0 of |w(xi, tau) - tanh(xi)|, refined around the grid maximum."""
    from scipy.optimize import minimize_scalar

    xi = np.linspace(0.0, xi_max, n)
    dev = np.abs(np.asarray(solution(xi, tau)) - np.tanh(xi))
    i = int(np.argmax(dev))
    lo, hi = xi[max(i - 1, 0)], xi[min(i + 1, n - 1)]
    res = minimize_scalar(
        lambda x: -abs(float(solution(x, tau)) - math.tanh(x)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return max(float(dev[i]), -float(res.fun))


class LineMaximizer(NamedTuple):
    """Odd maximizer of R at fixed enstrophy on the line: u = -4k tanh(kx)."""

    k: float
    R: float
    profile: Callable[[np.ndarray], np.ndarray]


def line_maximizer(E: float) -> LineMaximizer:
    """k = (3E/32)^{1/3}, R = 256 k^5 / 5 and the profile -4k tanh(kx)."""
    if not (math.isfinite(E) and E > 0):
        raise ValidationError("enstrophy must be positive")
    k = (3.0 * E / 32.0) ** (1.0 / 3.0)
    return LineMaximizer(k, 256.0 * k**5 / 5.0, lambda x: -4.0 * k * np.tanh(k * np.asarray(x, dtype=float)))


def t_star_formula(k: float, a: float = 4.0, delta: float = 0.5, variant: str = "a4") -> float:
    """Time by which the shock has formed.

    ``a4``: (1 + delta) log k / (12 k^2). ``general``: (1 + delta)^2 a log a / (32 k^2).
    """
    if not k > 1:
        raise ValidationError("k must exceed 1")
    if not delta > 0 and not (variant == "a4" and delta == 0):
        raise ValidationError("delta must be positive")
    if variant == "a4":
        return (1.0 + delta) * math.log(k) / (12.0 * k * k)
    if variant == "general":
        if not a >= 4:
            raise ValidationError("a must be >= 4")
        return (1.0 + delta) ** 2 * a * math.log(a) / (32.0 * k * k)
    raise ValidationError(f"unknown variant {variant!r}")
