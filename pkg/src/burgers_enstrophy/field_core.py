"""Periodic grids and fields on the unit circle, spectral calculus, and the
scalar diagnostics K, E, R with their a-priori bound audits.

The circle is parametrized by x in [-1/2, 1/2) sampled at x_j = -1/2 + j/n.
All integrals use the trapezoid rule, which on a uniform periodic grid is the
mean of the samples and is exact for trigonometric polynomials of degree < n.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import PreconditionError, ResolutionWarning, ValidationError

__all__ = [
    "PeriodicGrid",
    "PeriodicField",
    "Diagnostics",
    "BoundAudit",
    "SHARP_RATE_CONSTANT",
    "RATE_BOUND_CONSTANT",
    "POINCARE_CONSTANT",
    "spectral_derivative",
    "spectral_tail_fraction",
    "energy",
    "enstrophy",
    "rate_of_change",
    "diagnostics",
    "audit_bounds",
]

#: Constant of the instantaneous bound R <= (3/2) E^{5/3}.
RATE_BOUND_CONSTANT = 1.5
#: Asymptotic value of R / E^{5/3} attained by the maximizer, 3^{5/3} / (5 * 2^{1/3}).
SHARP_RATE_CONSTANT = 3.0 ** (5.0 / 3.0) / (5.0 * 2.0 ** (1.0 / 3.0))
#: Best constant of K <= C E for mean-zero 1-periodic functions.
POINCARE_CONSTANT = 1.0 / (4.0 * math.pi**2)

MEAN_ZERO_RTOL = 1e-12
TAIL_WARN = 1e-8


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid x_j = -1/2 + j/n on the unit circle."""

    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise ValidationError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 16 or not _is_power_of_two(int(self.n)):
            raise ValidationError(f"grid size must be a power of two >= 16, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def spacing(self) -> float:
        return 1.0 / self.n

    @property
    def points(self) -> np.ndarray:
        return -0.5 + np.arange(self.n) / self.n

    @property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers 2*pi*m for the real FFT layout, m = 0..n/2."""
        return 2.0 * np.pi * np.arange(self.n // 2 + 1)


@dataclass(frozen=True)
class PeriodicField:
    """Real samples of a function on a :class:`PeriodicGrid`.

    The sample array is copied and frozen on construction. When ``mean_zero``
    is set, the sample mean must vanish to 1e-12 relative to the amplitude.
    """

    grid: PeriodicGrid
    values: np.ndarray
    mean_zero: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.shape != (self.grid.n,):
            raise ValidationError(
                f"expected {self.grid.n} samples, got array of shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValidationError("field contains non-finite values")
        if self.mean_zero and not _mean_is_zero(vals):
            raise PreconditionError(
                f"field flagged mean-zero has mean {vals.mean():.3e}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(
        cls, grid: PeriodicGrid, func: Callable[[np.ndarray], np.ndarray], mean_zero: bool = False
    ) -> "PeriodicField":
        return cls(grid, func(grid.points), mean_zero=mean_zero)

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    def mean(self) -> float:
        return float(self.values.mean())

    def has_zero_mean(self) -> bool:
        return _mean_is_zero(self.values)

    def odd_defect(self) -> float:
        """Sup-norm of u(x) + u(-x) over the grid (zero for odd fields)."""
        n = self.grid.n
        mirror = self.values[(-np.arange(n)) % n]
        return float(np.max(np.abs(self.values + mirror)))

    def is_odd(self, tol: float = 1e-9) -> bool:
        return self.odd_defect() <= tol

    def with_values(self, values: np.ndarray, mean_zero: bool | None = None) -> "PeriodicField":
        flag = self.mean_zero if mean_zero is None else mean_zero
        return PeriodicField(self.grid, values, mean_zero=flag)

    def resample(self, n: int) -> "PeriodicField":
        """Trigonometric interpolation onto a grid of ``n`` points."""
        target = PeriodicGrid(n)
        if n == self.grid.n:
            return self
        if n < self.grid.n:
            # Power-of-two grids anchored at -1/2 are nested.
            return PeriodicField(target, self.values[:: self.grid.n // n])
        coeffs = np.fft.rfft(self.values) / self.grid.n
        m_keep = self.grid.n // 2
        out = np.zeros(n // 2 + 1, dtype=complex)
        out[:m_keep] = coeffs[:m_keep]
        # Split the old Nyquist mode symmetrically so the interpolant stays real.
        out[m_keep] = 0.5 * coeffs[m_keep]
        vals = np.fft.irfft(out * n, n)
        return PeriodicField(target, vals)


def _mean_is_zero(vals: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(vals)))) if vals.size else 1.0
    return abs(float(vals.mean())) <= MEAN_ZERO_RTOL * scale


@dataclass(frozen=True)
class Diagnostics:
    """Energy K, enstrophy E and enstrophy rate R at time t."""

    t: float
    energy_K: float
    enstrophy_E: float
    rate_R: float

    def __post_init__(self):
        if self.energy_K < 0 or self.enstrophy_E < 0:
            raise ValidationError("energy and enstrophy must be non-negative")

    def rate_bound_margin(self) -> float:
        return RATE_BOUND_CONSTANT * self.enstrophy_E ** (5.0 / 3.0) - self.rate_R


@dataclass(frozen=True)
class BoundAudit:
    """Ratios of a field against the Poincare and rate bounds.

    ``sharp_constant`` is the asymptotic maximizer ratio R/E^{5/3}. It is
    recorded next to ``sharp_constant_below_half``, which is False: the value
    is about 0.99, so a claim that it lies below 1/2 does not hold.
    """

    poincare_ratio: float
    rate_ratio: float
    poincare_ok: bool
    rate_ok: bool
    integral_bound_ok: bool
    sharp_constant: float = SHARP_RATE_CONSTANT
    sharp_constant_below_half: bool = field(default=SHARP_RATE_CONSTANT < 0.5)

    @property
    def violations(self) -> list[str]:
        out = []
        if not self.poincare_ok:
            out.append("poincare")
        if not self.rate_ok:
            out.append("rate")
        return out


def _spectral_multiplier(grid: PeriodicGrid, order: int) -> np.ndarray:
    mult = (1j * grid.wavenumbers) ** order
    if order % 2 == 1 and grid.n % 2 == 0:
        # Odd derivatives of the Nyquist mode are not representable on the grid.
        mult[-1] = 0.0
    return mult


def spectral_derivative(field: PeriodicField, order: int) -> PeriodicField:
    """Derivative of order 1, 2 or 3 computed with the FFT."""
    if order not in (1, 2, 3):
        raise ValidationError(f"derivative order must be 1, 2 or 3, got {order}")
    n = field.grid.n
    coeffs = np.fft.rfft(field.values) * _spectral_multiplier(field.grid, order)
    return PeriodicField(field.grid, np.fft.irfft(coeffs, n))


def spectral_tail_fraction(field: PeriodicField) -> float:
    """Share of spectral energy held by modes above n/3 (mean excluded)."""
    n = field.grid.n
    power = np.abs(np.fft.rfft(field.values)) ** 2
    power[1:-1] *= 2.0
    power[0] = 0.0
    total = power.sum()
    if total == 0.0:
        return 0.0
    return float(power[n // 3 + 1 :].sum() / total)


def energy(field: PeriodicField) -> float:
    """K(u) = (1/2) * integral of u^2 over the circle."""
    return 0.5 * float(np.mean(field.values**2))


def enstrophy(field: PeriodicField) -> float:
    """E(u) = (1/2) * integral of u_x^2 over the circle."""
    ux = spectral_derivative(field, 1).values
    return 0.5 * float(np.mean(ux**2))


def _rate_from_derivatives(ux: np.ndarray, uxx: np.ndarray) -> float:
    return -float(np.mean(uxx**2 + ux**3))


def rate_of_change(field: PeriodicField, warn: bool = True) -> float:
    """R(u) = -integral of (u_xx^2 + u_x^3), the enstrophy growth rate."""
    if warn:
        tail = spectral_tail_fraction(field)
        if tail > TAIL_WARN:
            warnings.warn(
                f"spectral tail fraction {tail:.2e} exceeds {TAIL_WARN:.0e}; R may be unreliable",
                ResolutionWarning,
                stacklevel=2,
            )
    ux = spectral_derivative(field, 1).values
    uxx = spectral_derivative(field, 2).values
    return _rate_from_derivatives(ux, uxx)


def diagnostics(field: PeriodicField, t: float = 0.0, warn: bool = False) -> Diagnostics:
    """All three scalar diagnostics of a field, tagged with time ``t``."""
    if warn:
        rate = rate_of_change(field, warn=True)
    else:
        rate = _rate_from_derivatives(
            spectral_derivative(field, 1).values, spectral_derivative(field, 2).values
        )
    return Diagnostics(float(t), energy(field), enstrophy(field), rate)


def audit_bounds(field: PeriodicField, tol: float = 1e-10) -> BoundAudit:
    """Check K <= E/(4 pi^2) and R <= (3/2) E^{5/3} for a mean-zero field."""
    if not field.has_zero_mean():
        raise PreconditionError(
            "Poincare inequality needs a mean-zero field; "
            f"this one has mean {field.mean():.3e}"
        )
    d = diagnostics(field)
    if d.enstrophy_E == 0.0:
        return BoundAudit(0.0, 0.0, True, True, True)
    e53 = d.enstrophy_E ** (5.0 / 3.0)
    poincare_ratio = d.energy_K / d.enstrophy_E
    rate_ratio = d.rate_R / e53
    poincare_ok = poincare_ratio <= POINCARE_CONSTANT + tol
    rate_ok = d.rate_R <= RATE_BOUND_CONSTANT * e53 + 1e-8 * (1.0 + e53)
    # The integral bound along the flow follows from these two inequalities.
    return BoundAudit(
        poincare_ratio, rate_ratio, poincare_ok, rate_ok, poincare_ok and rate_ok
    )
