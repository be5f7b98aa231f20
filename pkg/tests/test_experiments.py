"""Sweeps, power-law fits, the constant N and integral-bound audits."""

import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burgers_enstrophy.errors import PreconditionError, ValidationError
from burgers_enstrophy.experiments import (
    SWEEP_HEADER,
    FitResult,
    HorizonRule,
    SweepSpec,
    audit_integral_bound,
    constant_N,
    constant_N_halfline,
    fit_power_law,
    fit_xy,
    read_sweep_csv,
    run_sweep,
    spread,
)
from burgers_enstrophy.experiments import _n_integrand_1
from burgers_enstrophy.field_core import PeriodicField, PeriodicGrid
from burgers_enstrophy.initial_data import DataFamily, LPolicy, sample
from burgers_enstrophy.periodic_solver import SolverConfig, integrate

X = np.array([10.0, 30.0, 100.0, 300.0, 1000.0])


@pytest.fixture(scope="module")
def small_sweep():
    spec = SweepSpec(
        LPolicy.l_equals_k(), (8.0, 12.0, 16.0), SolverConfig(1024, 1.0), horizon=HorizonRule.parse("logk_k2")
    )
    return spec, run_sweep(spec)


class TestFit:
    def test_pure_power(self):
        fit = fit_xy(X, X**1.5)
        assert fit.exponent == pytest.approx(1.5, abs=1e-10)
        assert fit.log_exponent == 0.0
        assert fit.prefactor == pytest.approx(1.0, rel=1e-10)
        assert fit.rms_residual <= 1e-12

    def test_log_corrected(self):
        fit = fit_xy(X, X**1.5 * np.log(X) ** -1.5, with_log_correction=True)
        assert fit.exponent == pytest.approx(1.5, abs=1e-10)
        assert fit.log_exponent == pytest.approx(-1.5, abs=1e-10)

    def test_pinned_log_exponent(self):
        fit = fit_xy(X, 3.0 * X**0.7 * np.log(X) ** -1.5, fixed_log_exponent=-1.5)
        assert fit.exponent == pytest.approx(0.7, abs=1e-10)
        assert fit.log_exponent == -1.5
        assert fit.prefactor == pytest.approx(3.0, rel=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(p=st.floats(-3.0, 3.0), q=st.floats(-3.0, 3.0), c=st.floats(0.1, 10.0))
    def test_recovers_synthetic_exponents(self, p, q, c):
        fit = fit_xy(X, c * X**p * np.log(X) ** q, with_log_correction=True)
        assert fit.exponent == pytest.approx(p, abs=1e-10)
        assert fit.log_exponent == pytest.approx(q, abs=1e-9)
        assert fit.rms_residual >= 0

    def test_rejects_too_few_points(self):
        with pytest.raises(ValidationError):
            fit_xy([2.0, 3.0], [4.0, 9.0])

    def test_rejects_x_at_most_one_with_correction(self):
        with pytest.raises(ValidationError):
            fit_xy([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], with_log_correction=True)
        fit_xy([0.5, 2.0, 3.0], [1.0, 2.0, 3.0])

    def test_rejects_both_log_modes(self):
        with pytest.raises(ValidationError):
            fit_xy(X, X, with_log_correction=True, fixed_log_exponent=-1.5)

    def test_rejects_non_positive_data(self):
        with pytest.raises(ValidationError):
            fit_xy(X, -X)

    def test_json_keys(self):
        d = FitResult(1.0, 0.0, 2.0, 0.1).to_json_dict()
        assert json.loads(json.dumps(d)) == {"exponent": 1.0, "log_exponent": 0.0, "prefactor": 2.0, "rms_residual": 0.1}

    def test_fit_from_csv_rows(self):
        rows = [{"E0": float(x), "Estar": float(x**1.5)} for x in X]
        assert fit_power_law(rows, "E0", "Estar").exponent == pytest.approx(1.5, abs=1e-10)

    def test_spread(self):
        assert spread([2.0, 4.0, 3.0]) == 2.0
        with pytest.raises(ValidationError):
            spread([1.0, 0.0])


class TestConstantN:
    def test_value(self):
        assert constant_N() == pytest.approx(5.5189, abs=5e-4)
        assert constant_N() > 0

    def test_halfline_is_half(self):
        assert constant_N_halfline() == pytest.approx(constant_N() / 2, rel=1e-14)

    def test_integrand_at_origin(self):
        assert _n_integrand_1(0.0) == -28 + 139 - 120 == -9


class TestHorizonRule:
    @pytest.mark.parametrize(
        "text,kind,factor",
        [("fixed", "fixed", 1.0), ("logk_k2", "logk_k2", 1.0), ("logk_k2:2", "logk_k2", 2.0), ("inv_k:0.3", "inv_k", 0.3)],
    )
    def test_parse(self, text, kind, factor):
        rule = HorizonRule.parse(text)
        assert (rule.kind, rule.factor) == (kind, factor)

    @pytest.mark.parametrize("text", ["", "other", "inv_k:x", "inv_k:-1"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValidationError):
            HorizonRule.parse(text)

    def test_windows(self):
        assert HorizonRule.parse("logk_k2").t_end(16.0, 9.0) == pytest.approx(math.log(16) / 256)
        assert HorizonRule.parse("inv_k:0.3").t_end(10.0, 9.0) == pytest.approx(0.03)
        assert HorizonRule().t_end(10.0, 9.0) == 9.0


class TestSweepSpec:
    @pytest.mark.parametrize("ks", [(), (8.0, 8.0), (16.0, 8.0), (1.0, 8.0)])
    def test_rejects_bad_lists(self, ks):
        with pytest.raises(ValidationError):
            SweepSpec(LPolicy.l_equals_k(), ks, SolverConfig(1024, 0.01))

    def test_resolution_precondition(self):
        spec = SweepSpec(LPolicy.l_equals_k(), (8.0, 32.0), SolverConfig(1024, 0.01))
        with pytest.raises(PreconditionError):
            run_sweep(spec)

    def test_config_for(self):
        spec = SweepSpec(LPolicy.l_equals_k(), (8.0,), SolverConfig(1024, 0.01), horizon=HorizonRule.parse("inv_k:0.3"))
        cfg = spec.config_for(8.0)
        assert cfg.t_end == pytest.approx(0.0375) and cfg.n_modes == 1024


class TestAudit:
    def test_zero_field(self):
        zero = PeriodicField(PeriodicGrid(64), np.zeros(64), mean_zero=True)
        audit = audit_integral_bound(integrate(zero, SolverConfig(64, 0.01)))
        assert audit.ok

    def test_family_k16(self):
        u0 = sample(DataFamily.instant(16.0), PeriodicGrid(2048))
        audit = audit_integral_bound(integrate(u0, SolverConfig(2048, 0.02)))
        assert audit.ok
        assert audit.integral_margin_interior > 0
        assert audit.energy_bound_margin > 0
        # Equality holds at t = 0 itself.
        assert audit.integral_margin == pytest.approx(0.0, abs=1e-9)


class TestSweep:
    def test_records(self, small_sweep):
        _, records = small_sweep
        assert [r.k for r in records] == [8.0, 12.0, 16.0]
        for r in records:
            assert r.l == r.k
            assert r.E_star >= r.E0 and r.K_star <= r.K0
            assert r.K_drop == pytest.approx(r.K0 - r.K_star)
            assert r.audit.ok

    def test_deterministic(self, small_sweep):
        spec, records = small_sweep
        again = run_sweep(spec)
        assert [r.key() for r in again] == [r.key() for r in records]

    def test_parallel_matches_serial(self, small_sweep):
        spec, records = small_sweep
        assert [r.key() for r in run_sweep(spec, jobs=2)] == [r.key() for r in records]

    def test_rejects_zero_jobs(self, small_sweep):
        with pytest.raises(ValidationError):
            run_sweep(small_sweep[0], jobs=0)

    def test_failure_is_isolated(self, tmp_path):
        # Within t_end = 1.2e-3 only k = 16 reaches its peak.
        spec = SweepSpec(LPolicy.l_equals_k(), (8.0, 16.0), SolverConfig(1024, 1.2e-3), output=tmp_path / "s.csv")
        records = run_sweep(spec)
        assert [r.k for r in records] == [16.0]
        assert len(read_sweep_csv(tmp_path / "s.csv")) == 1

    def test_csv_persistence(self, tmp_path, small_sweep):
        spec, records = small_sweep
        out = tmp_path / "sweep.csv"
        run_sweep(SweepSpec(spec.policy, spec.k_list, spec.solver, output=out, horizon=spec.horizon))
        with open(out) as fh:
            header = next(csv.reader(fh))
        assert header == SWEEP_HEADER
        rows = read_sweep_csv(out)
        assert [row["Estar"] for row in rows] == [r.E_star for r in records]
        # A second run appends rather than rewriting the header.
        run_sweep(SweepSpec(spec.policy, (8.0,), spec.solver, output=out, horizon=spec.horizon))
        assert len(read_sweep_csv(out)) == 4

    def test_read_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValidationError):
            read_sweep_csv(path)
