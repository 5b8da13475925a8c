"""Convergence-study harness: self-refinement error tables and fitted rates.

A temporal study fixes each cutoff N and compares the final state at step tau
against the run with step tau/2 from the same initial state; a spatial study
fixes tau and compares cutoff N against cutoff 2N (zero-extending the coarser
field).  Errors default to the plain coefficient l2 norm
sqrt(sum_k |delta_k|^2); the Plancherel-normalized L2 norm (an extra
sqrt(2 pi)) is selectable via norm_convention="plancherel_2pi".

Runs for distinct (tau, N) pairs are independent and deterministic, so they
are shared through a cache and may execute concurrently; results do not
depend on the schedule.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .initial_data import InitialDataSpec
from .integrator import SchemeParams, Trajectory, evolve, initialize
from .reference import splitting_evolve
from .spectral import SpectralField, l2_error

__all__ = [
    "CSV_HEADER",
    "StudySpec",
    "ConvergenceReport",
    "fit_rate",
    "temporal_study",
    "spatial_study",
    "write_report_csv",
    "diagnostics_series",
]

CSV_HEADER = "study,alpha,lambda,T,row_param,col_param,error,rate,wall_ms"

AXES = ("temporal", "spatial")
SCHEMES = ("lowreg", "lie", "strang")
NORM_CONVENTIONS = ("coefficient_l2", "plancherel_2pi")


@dataclass(frozen=True)
class StudySpec:
    """One convergence table: study axis, physics, and the run grid."""

    axis: str
    taus: tuple[float, ...]
    cutoffs: tuple[int, ...]
    alpha: float = 1.0
    lam: int = -1
    horizon: float = 1.0
    scheme: str = "lowreg"
    init_mode: str = "truncated"
    tail_cutoff: int | None = None
    amplitude: float = 0.1
    exponent_offset: float = 0.51
    norm_convention: str = "coefficient_l2"
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "taus", tuple(float(t) for t in self.taus))
        object.__setattr__(self, "cutoffs", tuple(int(n) for n in self.cutoffs))
        for name in ("alpha", "horizon", "amplitude", "exponent_offset"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "lam", int(self.lam))
        object.__setattr__(self, "jobs", int(self.jobs))
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.norm_convention not in NORM_CONVENTIONS:
            raise ValueError(
                f"norm_convention must be one of {NORM_CONVENTIONS}, "
                f"got {self.norm_convention!r}"
            )
        if not self.taus:
            raise ValueError("at least one tau is required")
        if not self.cutoffs:
            raise ValueError("at least one cutoff is required")
        if any(t <= 0 for t in self.taus):
            raise ValueError(f"steps must be positive, got {self.taus}")
        if any(n < 1 for n in self.cutoffs):
            raise ValueError(f"cutoffs must be >= 1, got {self.cutoffs}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")

    def initial_data(self) -> InitialDataSpec:
        return InitialDataSpec(
            kind="sobolev",
            alpha=self.alpha,
            amplitude=self.amplitude,
            exponent_offset=self.exponent_offset,
        )


@dataclass(frozen=True)
class ConvergenceReport:
    """Error table with per-column fitted rates and per-cell wall times."""

    study: str
    alpha: float
    lam: int
    horizon: float
    scheme: str
    norm_convention: str
    row_params: tuple
    col_params: tuple
    errors: np.ndarray
    rates: tuple[float, ...]
    wall_ms: np.ndarray

    def __post_init__(self):
        for name in ("errors", "wall_ms"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (len(self.row_params), len(self.col_params)):
                raise ValueError(f"{name} has shape {arr.shape}, expected "
                                 f"{(len(self.row_params), len(self.col_params))}")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def fit_rate(values, errors) -> float:
    """Least-squares slope of log2(error) against log2(value).

    For errors ~ C tau^p over a tau grid this returns p; for errors ~ C N^-s
    over a cutoff grid it returns -s.  A non-positive error (e.g. identical
    runs) makes the rate undefined and nan is returned as the flag.
    """
    values = np.asarray(values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if values.shape != errors.shape or values.size < 2:
        raise ValueError("need at least two (value, error) pairs of equal length")
    if np.any(values <= 0):
        raise ValueError("values must be positive to fit a log-log rate")
    if np.any(errors <= 0):
        return math.nan
    return float(np.polyfit(np.log2(values), np.log2(errors), 1)[0])


def _run_final(spec: StudySpec, u0: SpectralField, params: SchemeParams):
    if spec.scheme == "lowreg":
        traj = evolve(u0, params)
    else:
        traj = splitting_evolve(u0, params, 1 if spec.scheme == "lie" else 2)
    return traj.final, traj.wall_ms


def _error_norm(f: SpectralField, g: SpectralField, convention: str) -> float:
    err = l2_error(f, g)
    if convention == "coefficient_l2":
        err /= math.sqrt(2.0 * math.pi)
    return err


def _compute_runs(spec: StudySpec, keys: list[tuple[int, float]]):
    """Evaluate the final state for every (cutoff, tau) key, possibly in a
    thread pool; results are independent of the schedule."""
    data = spec.initial_data()
    states = {
        n: initialize(data, n, init_mode=spec.init_mode, tail_cutoff=spec.tail_cutoff)
        for n in sorted({n for n, _ in keys})
    }

    def worker(key):
        n, tau = key
        params = SchemeParams.from_horizon(spec.lam, tau, n, spec.horizon)
        return _run_final(spec, states[n], params)

    if spec.jobs <= 1 or len(keys) <= 1:
        return {k: worker(k) for k in keys}
    with ThreadPoolExecutor(max_workers=spec.jobs) as pool:
        results = list(pool.map(worker, keys))
    return dict(zip(keys, results))


def temporal_study(spec: StudySpec) -> ConvergenceReport:
    """Error table err(tau, N) = ||u_{tau,N}(T) - u_{tau/2,N}(T)||.

    Rows are the requested taus, columns the cutoffs; each column's rate is
    fitted across its rows.  Runs shared between cells (the tau/2 refinements)
    are computed once.
    """
    if spec.axis != "temporal":
        raise ValueError(f"expected a temporal StudySpec, got axis {spec.axis!r}")
    needed = sorted(
        {(n, t) for n in spec.cutoffs for t in spec.taus}
        | {(n, t / 2.0) for n in spec.cutoffs for t in spec.taus}
    )
    runs = _compute_runs(spec, needed)
    errors = np.empty((len(spec.taus), len(spec.cutoffs)))
    wall = np.empty_like(errors)
    for i, tau in enumerate(spec.taus):
        for j, n in enumerate(spec.cutoffs):
            coarse, w1 = runs[(n, tau)]
            fine, w2 = runs[(n, tau / 2.0)]
            errors[i, j] = _error_norm(coarse, fine, spec.norm_convention)
            wall[i, j] = w1 + w2
    rates = tuple(fit_rate(spec.taus, errors[:, j]) for j in range(len(spec.cutoffs)))
    return ConvergenceReport(
        study="temporal", alpha=spec.alpha, lam=spec.lam, horizon=spec.horizon,
        scheme=spec.scheme, norm_convention=spec.norm_convention,
        row_params=tuple(spec.taus), col_params=tuple(spec.cutoffs),
        errors=errors, rates=rates, wall_ms=wall,
    )


def spatial_study(spec: StudySpec) -> ConvergenceReport:
    """Error table err(N, tau) = ||u_{tau,N}(T) - u_{tau,2N}(T)||.

    Rows are the requested cutoffs, columns the taus; the coarser field is
    zero-extended before differencing.  Each column's rate is reported as +s
    for errors ~ N^-s (the negated log-log slope).
    """
    if spec.axis != "spatial":
        raise ValueError(f"expected a spatial StudySpec, got axis {spec.axis!r}")
    needed = sorted(
        {(n, t) for n in spec.cutoffs for t in spec.taus}
        | {(2 * n, t) for n in spec.cutoffs for t in spec.taus}
    )
    runs = _compute_runs(spec, needed)
    errors = np.empty((len(spec.cutoffs), len(spec.taus)))
    wall = np.empty_like(errors)
    for i, n in enumerate(spec.cutoffs):
        for j, tau in enumerate(spec.taus):
            coarse, w1 = runs[(n, tau)]
            fine, w2 = runs[(2 * n, tau)]
            errors[i, j] = _error_norm(coarse, fine, spec.norm_convention)
            wall[i, j] = w1 + w2
    rates = tuple(
        -fit_rate(spec.cutoffs, errors[:, j]) for j in range(len(spec.taus))
    )
    return ConvergenceReport(
        study="spatial", alpha=spec.alpha, lam=spec.lam, horizon=spec.horizon,
        scheme=spec.scheme, norm_convention=spec.norm_convention,
        row_params=tuple(spec.cutoffs), col_params=tuple(spec.taus),
        errors=errors, rates=rates, wall_ms=wall,
    )


def write_report_csv(report: ConvergenceReport, path_or_file) -> None:
    """One row per table cell under the fixed header; the rate column repeats
    each column's fitted rate on every row of that column."""
    lines = [CSV_HEADER]
    for i, rp in enumerate(report.row_params):
        for j, cp in enumerate(report.col_params):
            lines.append(
                f"{report.study},{report.alpha!r},{report.lam},{report.horizon!r},"
                f"{rp!r},{cp!r},{float(report.errors[i, j])!r},{report.rates[j]!r},"
                f"{float(report.wall_ms[i, j])!r}"
            )
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)


def diagnostics_series(traj: Trajectory):
    """The recorded per-step diagnostics of a run, in step order."""
    return tuple(traj.diagnostics)
