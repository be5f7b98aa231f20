"""Grids, fields, spectral derivatives and the K, E, R diagnostics."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burgers_enstrophy.errors import PreconditionError, ResolutionWarning, ValidationError
from burgers_enstrophy.field_core import (
    POINCARE_CONSTANT,
    SHARP_RATE_CONSTANT,
    PeriodicField,
    PeriodicGrid,
    audit_bounds,
    diagnostics,
    energy,
    enstrophy,
    rate_of_change,
    spectral_derivative,
    spectral_tail_fraction,
)
from burgers_enstrophy.initial_data import DataFamily, closed_form_KE, closed_form_R, sample


def _sine(n=64, amp=1.0, mode=1):
    grid = PeriodicGrid(n)
    return PeriodicField(grid, amp * np.sin(2 * np.pi * mode * grid.points), mean_zero=True)


class TestPeriodicGrid:
    def test_points_and_spacing(self):
        grid = PeriodicGrid(16)
        assert grid.spacing == 1 / 16
        assert grid.points[0] == -0.5
        np.testing.assert_allclose(np.diff(grid.points), 1 / 16, rtol=0, atol=1e-15)
        assert grid.points[-1] < 0.5

    @pytest.mark.parametrize("n", [0, 8, 15, 24, 100, -16])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ValidationError):
            PeriodicGrid(n)

    def test_rejects_non_integer(self):
        with pytest.raises(ValidationError):
            PeriodicGrid(16.0)

    def test_wavenumbers(self):
        grid = PeriodicGrid(32)
        np.testing.assert_allclose(grid.wavenumbers, 2 * np.pi * np.arange(17))


class TestPeriodicField:
    def test_values_are_read_only_copies(self):
        grid = PeriodicGrid(16)
        raw = np.zeros(16)
        field = PeriodicField(grid, raw)
        raw[0] = 1.0
        assert field.values[0] == 0.0
        with pytest.raises(ValueError):
            field.values[0] = 2.0

    def test_rejects_wrong_length(self):
        with pytest.raises(ValidationError):
            PeriodicField(PeriodicGrid(16), np.zeros(8))

    def test_rejects_non_finite(self):
        vals = np.zeros(16)
        vals[3] = np.nan
        with pytest.raises(ValidationError):
            PeriodicField(PeriodicGrid(16), vals)

    def test_mean_zero_flag_enforced(self):
        with pytest.raises(PreconditionError):
            PeriodicField(PeriodicGrid(16), np.ones(16), mean_zero=True)

    def test_oddness_predicate(self):
        assert _sine().is_odd(1e-14)
        grid = PeriodicGrid(64)
        even = PeriodicField(grid, np.cos(2 * np.pi * grid.points))
        assert not even.is_odd()

    @pytest.mark.parametrize("n_to", [32, 128, 256])
    def test_resample_band_limited(self, n_to):
        field = _sine(64, mode=3)
        out = field.resample(n_to)
        expected = np.sin(6 * np.pi * out.grid.points)
        np.testing.assert_allclose(out.values, expected, atol=1e-12)


class TestSpectralDerivative:
    def test_sine_first_derivative(self):
        field = _sine(64)
        d = spectral_derivative(field, 1)
        np.testing.assert_allclose(d.values, 2 * np.pi * np.cos(2 * np.pi * field.x), atol=1e-12)

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_constant_gives_zero(self, order):
        field = PeriodicField(PeriodicGrid(32), np.full(32, 3.5))
        assert np.max(np.abs(spectral_derivative(field, order).values)) < 1e-12

    @pytest.mark.parametrize("order", [0, 4, -1])
    def test_rejects_order(self, order):
        with pytest.raises(ValidationError):
            spectral_derivative(_sine(), order)

    @staticmethod
    def _family_error(k, n):
        family = DataFamily.instant(k)
        field = sample(family, PeriodicGrid(n))
        return np.max(np.abs(spectral_derivative(field, 1).values - family.derivative(field.x, 1)))

    @pytest.mark.xfail(
        strict=True,
        reason="u0'' jumps by O(k l^2 sech^2(l/2)) at x = 1/2; for k = l = 5 the "
        "Gibbs error in u0' is about 6e-3 at n = 1024",
    )
    def test_family_k5_matches_analytic_derivative(self):
        assert self._family_error(5.0, 1024) <= 1e-10

    def test_family_derivative_error_is_first_order_in_n(self):
        ratio = self._family_error(5.0, 1024) / self._family_error(5.0, 4096)
        assert ratio == pytest.approx(4.0, rel=0.05)

    def test_family_k20_matches_analytic_derivative(self):
        family = DataFamily.instant(20.0)
        field = sample(family, PeriodicGrid(1024))
        exact = family.derivative(field.x, 1)
        assert self._family_error(20.0, 1024) <= 1e-10 * np.max(np.abs(exact))

    def test_twice_first_equals_second(self):
        field = sample(DataFamily.instant(5.0), PeriodicGrid(1024))
        twice = spectral_derivative(spectral_derivative(field, 1), 1).values
        direct = spectral_derivative(field, 2).values
        assert np.max(np.abs(twice - direct)) <= 1e-10 * np.max(np.abs(direct))


class TestDiagnostics:
    def test_zero_field(self):
        zero = PeriodicField(PeriodicGrid(32), np.zeros(32), mean_zero=True)
        assert energy(zero) == 0.0
        assert enstrophy(zero) == 0.0
        assert rate_of_change(zero) == 0.0

    def test_sine_values(self):
        field = _sine(64)
        assert energy(field) == pytest.approx(0.25, rel=1e-14)
        assert enstrophy(field) == pytest.approx(math.pi**2, rel=1e-13)
        assert rate_of_change(field) == pytest.approx(-8 * math.pi**4, rel=1e-12)

    @pytest.mark.parametrize("k,l", [(10.0, 3.0), (20.0, 5.0), (40.0, 8.0)])
    def test_family_energy_enstrophy_closed_form(self, k, l):
        field = sample(DataFamily.general(k, l), PeriodicGrid(4096))
        K0, E0 = closed_form_KE(k, l)
        assert energy(field) == pytest.approx(K0, rel=1e-8)
        assert enstrophy(field) == pytest.approx(E0, rel=1e-8)

    def test_family_rate_closed_form(self):
        # u0'' jumps at x = 1/2, so the grid value of R converges like 1/n.
        field = sample(DataFamily.general(20.0, 5.0), PeriodicGrid(16384))
        assert rate_of_change(field, warn=False) == pytest.approx(closed_form_R(20.0, 5.0), rel=1e-6)

    def test_underresolved_field_warns(self):
        grid = PeriodicGrid(64)
        rng = np.random.default_rng(0)
        vals = rng.standard_normal(64)
        field = PeriodicField(grid, vals - vals.mean(), mean_zero=True)
        assert spectral_tail_fraction(field) > 1e-8
        with pytest.warns(ResolutionWarning):
            rate_of_change(field)

    def test_resolved_field_does_not_warn(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            rate_of_change(_sine(64))

    def test_diagnostics_bundle(self):
        d = diagnostics(_sine(64), t=0.5)
        assert d.t == 0.5
        assert d.rate_bound_margin() > 0


class TestAuditBounds:
    def test_sine_saturates_poincare(self):
        report = audit_bounds(_sine(64))
        assert report.poincare_ratio == pytest.approx(POINCARE_CONSTANT, rel=1e-13)
        assert report.poincare_ok and report.rate_ok
        assert report.violations == []

    def test_zero_field(self):
        report = audit_bounds(PeriodicField(PeriodicGrid(32), np.zeros(32)))
        assert report.poincare_ratio == 0.0 and report.rate_ratio == 0.0
        assert report.violations == []

    def test_rejects_nonzero_mean(self):
        with pytest.raises(PreconditionError):
            audit_bounds(PeriodicField(PeriodicGrid(32), np.ones(32)))

    def test_sharp_constant_flag(self):
        report = audit_bounds(_sine(64))
        assert report.sharp_constant == pytest.approx(0.9905781746683880, rel=1e-15)
        assert report.sharp_constant_below_half is False

    def test_maximizer_rate_ratio_near_sharp_constant(self):
        from burgers_enstrophy.maximizer import solve_maximizer

        sol = solve_maximizer(1e5)
        report = audit_bounds(sol.field(PeriodicGrid(4096)))
        assert report.rate_ok
        assert report.rate_ratio < 1.5
        assert SHARP_RATE_CONSTANT < 1.5

    @settings(max_examples=40, deadline=None)
    @given(
        coeffs=st.lists(st.floats(-3, 3, allow_nan=False), min_size=6, max_size=6),
        phases=st.lists(st.floats(0, 2 * math.pi), min_size=6, max_size=6),
    )
    def test_bounds_hold_on_random_trig_polynomials(self, coeffs, phases):
        grid = PeriodicGrid(64)
        x = grid.points
        vals = sum(c * np.sin(2 * np.pi * (m + 1) * x + p) for m, (c, p) in enumerate(zip(coeffs, phases)))
        vals = vals - vals.mean()
        field = PeriodicField(grid, vals)
        d = diagnostics(field)
        assert d.energy_K <= d.enstrophy_E * POINCARE_CONSTANT + 1e-10
        e53 = d.enstrophy_E ** (5 / 3)
        assert d.rate_R <= 1.5 * e53 + 1e-8 * (1 + e53)

    @settings(max_examples=30, deadline=None)
    @given(
        amps=st.lists(st.floats(-2, 2, allow_nan=False), min_size=4, max_size=4),
    )
    def test_quadrature_exact_on_trig_polynomials(self, amps):
        grid = PeriodicGrid(32)
        x = grid.points
        modes = [1, 3, 5, 7]
        vals = sum(a * np.sin(2 * np.pi * m * x) for a, m in zip(amps, modes))
        field = PeriodicField(grid, vals)
        K = 0.25 * sum(a * a for a in amps)
        E = 0.25 * sum((2 * np.pi * m * a) ** 2 for a, m in zip(amps, modes))
        assert energy(field) == pytest.approx(K, rel=1e-12, abs=1e-14)
        assert enstrophy(field) == pytest.approx(E, rel=1e-12, abs=1e-12)
