"""Enstrophy-growth sweeps, power-law fits, the constant N and trajectory audits."""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import BurgersError, PreconditionError, QuadratureError, ValidationError
from .field_core import POINCARE_CONSTANT, RATE_BOUND_CONSTANT, PeriodicGrid
from .initial_data import LPolicy, sample
from .periodic_solver import SolverConfig, Trajectory, integrate, peak_from_trajectory

__all__ = [
    "SweepSpec",
    "HorizonRule",
    "SweepRecord",
    "FitResult",
    "TrajectoryAudit",
    "SWEEP_HEADER",
    "run_sweep",
    "run_record",
    "read_sweep_csv",
    "fit_power_law",
    "fit_xy",
    "constant_N",
    "constant_N_halfline",
    "audit_integral_bound",
    "spread",
]

log = logging.getLogger(__name__)

SWEEP_HEADER = ["k", "l", "E0", "K0", "Tstar", "Estar", "Kstar", "Kdrop", "wall_time"]
_CSV_TO_ATTR = {"Tstar": "T_star", "Estar": "E_star", "Kstar": "K_star", "Kdrop": "K_drop"}


@dataclass(frozen=True)
class HorizonRule:
    """Integration window t_end(k) for a sweep.

    Kinds: ``fixed`` keeps the solver's t_end, ``logk_k2`` gives
    factor * log(k) / k^2 and ``inv_k`` gives factor / k.
    """

    kind: str = "fixed"
    factor: float = 1.0

    def __post_init__(self):
        if self.kind not in ("fixed", "logk_k2", "inv_k"):
            raise ValidationError(f"unknown horizon rule {self.kind!r}")
        if not (math.isfinite(self.factor) and self.factor > 0):
            raise ValidationError("horizon factor must be positive")

    @classmethod
    def parse(cls, text: str) -> "HorizonRule":
        """Parse ``fixed``, ``logk_k2``, ``logk_k2:2`` or ``inv_k:0.3``."""
        name, _, arg = text.strip().partition(":")
        try:
            return cls(name, float(arg) if arg else 1.0)
        except ValueError as exc:
            raise ValidationError(f"cannot parse horizon rule {text!r}") from exc

    def t_end(self, k: float, default: float) -> float:
        if self.kind == "logk_k2":
            return self.factor * math.log(k) / k**2
        if self.kind == "inv_k":
            return self.factor / k
        return default


@dataclass(frozen=True)
class SweepSpec:
    """A list of amplitudes k run with one l-policy and one solver setup.

    Every k must satisfy n_modes >= 64 k. Records are appended to ``output``
    (CSV) as they complete when a path is given. ``horizon`` sets the
    integration window per k.
    """

    policy: LPolicy
    k_list: tuple[float, ...]
    solver: SolverConfig
    output: Path | None = None
    horizon: HorizonRule = HorizonRule()

    def __post_init__(self):
        ks = tuple(float(k) for k in self.k_list)
        if not ks:
            raise ValidationError("k_list must not be empty")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValidationError("k_list must be strictly increasing")
        if ks[0] <= 1.0:
            raise ValidationError("every k must exceed 1")
        object.__setattr__(self, "k_list", ks)
        if self.output is not None:
            object.__setattr__(self, "output", Path(self.output))

    def check_resolution(self) -> None:
        worst = max(self.k_list)
        if self.solver.n_modes < 64 * worst:
            raise PreconditionError(
                f"n_modes={self.solver.n_modes} cannot resolve k={worst:g} (need >= {64 * worst:g})"
            )

    def config_for(self, k: float) -> SolverConfig:
        return replace(self.solver, t_end=self.horizon.t_end(k, self.solver.t_end))


@dataclass(frozen=True)
class TrajectoryAudit:
    """Smallest margins of the a-priori bounds along a trajectory.

    Margins are right-hand side minus left-hand side, so positive means the
    bound holds. ``integral_margin_interior`` excludes t = 0, where the
    integral bound holds with equality.
    """

    poincare_margin: float
    rate_margin: float
    integral_margin: float
    integral_margin_interior: float
    energy_bound_margin: float
    tol: float = 1e-9

    @property
    def ok(self) -> bool:
        return (
            min(self.poincare_margin, self.rate_margin, self.energy_bound_margin) > 0.0
            and self.integral_margin >= -self.tol
            and self.integral_margin_interior > 0.0
        )


@dataclass(frozen=True)
class SweepRecord:
    """One sweep observation. ``audit`` is kept in memory but not in the CSV."""

    k: float
    l: float
    E0: float
    K0: float
    T_star: float
    E_star: float
    K_star: float
    K_drop: float
    wall_time: float
    audit: TrajectoryAudit | None = field(default=None, compare=False)

    def csv_row(self) -> list[str]:
        vals = [self.k, self.l, self.E0, self.K0, self.T_star, self.E_star, self.K_star, self.K_drop, self.wall_time]
        return [repr(float(v)) for v in vals]

    def key(self) -> tuple[float, ...]:
        """All fields except the wall time, for determinism checks."""
        return (self.k, self.l, self.E0, self.K0, self.T_star, self.E_star, self.K_star, self.K_drop)


@dataclass(frozen=True)
class FitResult:
    exponent: float
    log_exponent: float
    prefactor: float
    rms_residual: float

    def to_json_dict(self) -> dict[str, float]:
        return asdict(self)


def audit_integral_bound(trajectory: Trajectory, tol: float = 1e-9) -> TrajectoryAudit:
    """Check the Poincare, rate and integrated enstrophy bounds along a trajectory.

    Integrated bound: E^{1/3}(T) - E^{1/3}(0) <= (K(0) - K(T)) / 4.
    Dropping K(T) and using Poincare at t = 0: E(T) <= (E0^{1/3} + E0 / (16 pi^2))^3.
    """
    K = trajectory.K
    E = trajectory.E
    R = trajectory.R
    E0, K0 = E[0], K[0]
    poincare = POINCARE_CONSTANT * E - K
    rate = RATE_BOUND_CONSTANT * E ** (5.0 / 3.0) - R
    integral = 0.25 * (K0 - K) - (np.cbrt(E) - np.cbrt(E0))
    energy_bound = (np.cbrt(E0) + E0 / (16.0 * math.pi**2)) ** 3 - E
    if E0 == 0.0:
        # The zero field satisfies every bound with equality.
        return TrajectoryAudit(math.inf, math.inf, 0.0, math.inf, math.inf, tol)
    interior = float(np.min(integral[1:])) if integral.size > 1 else math.inf
    return TrajectoryAudit(
        float(np.min(poincare)),
        float(np.min(rate)),
        float(np.min(integral)),
        interior,
        float(np.min(energy_bound)),
        tol,
    )


def run_record(k: float, policy: LPolicy, config: SolverConfig) -> SweepRecord:
    """Integrate one member of the family past its enstrophy peak."""
    start = time.perf_counter()
    family = policy.family(k)
    u0 = sample(family, PeriodicGrid(config.n_modes))
    trajectory = integrate(u0, config)
    peak = peak_from_trajectory(u0, config, trajectory)
    audit = audit_integral_bound(trajectory)
    return SweepRecord(
        k=float(k),
        l=float(family.l),
        E0=peak.e_initial,
        K0=peak.k_initial,
        T_star=peak.t_star,
        E_star=peak.e_star,
        K_star=peak.k_star,
        K_drop=peak.k_drop,
        wall_time=time.perf_counter() - start,
        audit=audit,
    )


def _append(path: Path, record: SweepRecord) -> None:
    fresh = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(SWEEP_HEADER)
        writer.writerow(record.csv_row())


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[SweepRecord]:
    """Run every k of the sweep; failed records are logged and skipped.

    With ``jobs > 1`` records run in separate processes; the parent process is
    the only writer of the output file.
    """
    spec.check_resolution()
    if jobs < 1:
        raise ValidationError("jobs must be at least 1")
    records: list[SweepRecord] = []

    def accept(rec: SweepRecord) -> None:
        records.append(rec)
        if spec.output is not None:
            _append(spec.output, rec)

    if jobs == 1:
        for k in spec.k_list:
            try:
                accept(run_record(k, spec.policy, spec.config_for(k)))
            except BurgersError as exc:
                log.warning("sweep record k=%g failed: %s", k, exc)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(run_record, k, spec.policy, spec.config_for(k)): k for k in spec.k_list}
            for fut in as_completed(futures):
                try:
                    accept(fut.result())
                except BurgersError as exc:
                    log.warning("sweep record k=%g failed: %s", futures[fut], exc)
    return sorted(records, key=lambda r: r.k)


def read_sweep_csv(path: str | Path) -> list[dict[str, float]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SWEEP_HEADER:
            raise ValidationError(f"unexpected sweep header {reader.fieldnames}")
        return [{key: float(val) for key, val in row.items()} for row in reader]


def _field(record, name: str) -> float:
    if isinstance(record, Mapping):
        if name in record:
            return float(record[name])
        inverse = {v: c for c, v in _CSV_TO_ATTR.items()}
        return float(record[inverse.get(name, name)])
    return float(getattr(record, _CSV_TO_ATTR.get(name, name)))


def fit_xy(
    x: Sequence[float],
    y: Sequence[float],
    with_log_correction: bool = False,
    fixed_log_exponent: float | None = None,
) -> FitResult:
    """Least squares for log y = p log x [+ q log log x] + c.

    With ``fixed_log_exponent`` the log exponent q is held at that value and
    only p and c are fitted.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3 or x.size != y.size:
        raise ValidationError("a fit needs at least 3 matching (x, y) pairs")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValidationError("power-law fits need positive data")
    pinned = fixed_log_exponent is not None
    if with_log_correction and pinned:
        raise ValidationError("choose either a free or a fixed log exponent")
    if (with_log_correction or pinned) and np.any(x <= 1):
        raise ValidationError("the logarithmic correction needs x > 1")
    b = np.log(y)
    q = float(fixed_log_exponent) if pinned else 0.0
    if pinned:
        b = b - q * np.log(np.log(x))
    cols = [np.log(x)]
    if with_log_correction:
        cols.append(np.log(np.log(x)))
    cols.append(np.ones_like(x))
    A = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = A @ coef - b
    if with_log_correction:
        q = float(coef[1])
    return FitResult(
        exponent=float(coef[0]),
        log_exponent=q,
        prefactor=float(math.exp(coef[-1])),
        rms_residual=float(math.sqrt(np.mean(resid**2))),
    )


def fit_power_law(
    records: Iterable,
    x_field: str,
    y_field: str,
    with_log_correction: bool = False,
    fixed_log_exponent: float | None = None,
) -> FitResult:
    """Fit y ~ x^p (log x)^q across sweep records or CSV rows."""
    records = list(records)
    x = [_field(r, x_field) for r in records]
    y = [_field(r, y_field) for r in records]
    return fit_xy(x, y, with_log_correction, fixed_log_exponent)


def spread(values: Sequence[float]) -> float:
    """max / min of positive values."""
    arr = np.asarray(values, dtype=float)
    if np.any(arr <= 0):
        raise ValidationError("spread needs positive values")
    return float(arr.max() / arr.min())


def _sech(x: float) -> float:
    return 1.0 / math.cosh(x)


def _n_integrand_1(x: float) -> float:
    s = _sech(x)
    return math.cosh(x / 2.0) * (-28.0 * s**3 + 139.0 * s**5 - 120.0 * s**7)


def _n_integrand_2(x: float) -> float:
    s = _sech(x)
    return math.sinh(x / 2.0) * math.sinh(x) * (26.0 * s**4 - 30.0 * s**6)


def constant_N_halfline(tol: float = 1e-8) -> float:
    """Sum of the two sech-power integrals over [0, inf).

    Both integrands decay like e^{-3x/2}; the range is cut at x = 40 where the
    tail is below 1e-24.
    """
    total = 0.0
    for fn in (_n_integrand_1, _n_integrand_2):
        val, err = quad(fn, 0.0, 40.0, epsabs=tol * 1e-2, epsrel=0.0, limit=200)
        if not err <= tol:
            raise QuadratureError(f"N integral error estimate {err:.2e} exceeds {tol:.0e}")
        total += val
    return total


def constant_N(tol: float = 1e-8) -> float:
    """The constant N = 5.5189..., the two integrals taken over the whole line.

    Both integrands are even, so this is twice :func:`constant_N_halfline`.
    """
    return 2.0 * constant_N_halfline(tol)
