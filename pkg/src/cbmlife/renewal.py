"""Markov renewal recursions over Monte Carlo estimate tables.

All five measures (expected transient cost, its second moment and standard
deviation, availability, reliability, interval reliability) satisfy renewal
equations of the form

    V(t) = sum_k V(t - kT) * P(kT) + (non-renewal term at t)

on the evaluation lattice carried by :class:`~cbmlife.simulate.EstimateTables`.
Each recursion is implemented twice, as a staged bottom-up sweep and as a
memoized top-down recursion, so the two can be cross-checked to machine
precision.  The staged form is the one used by the public operations.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import GridCoverageError, InconsistencyError, TruncationWarning
from .model import CostStructure, MaintenancePolicy
from .simulate import EstimateTables

__all__ = [
    "CostCurve",
    "PerformanceCurve",
    "expected_cost",
    "expected_cost_sq",
    "std_dev",
    "asymptotic_cost_rate",
    "availability",
    "reliability",
    "interval_reliability",
    "cost_curve",
    "performance_curve",
    "write_cost_curve_csv",
    "write_performance_curve_csv",
]

_EPS = 1e-9


@dataclass(frozen=True)
class CostCurve:
    """Transient cost summaries on the evaluation grid."""

    times: np.ndarray
    mean: np.ndarray
    mean_sq: np.ndarray
    std: np.ndarray

    @property
    def rate(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(self.times > 0.0, self.mean / self.times, 0.0)
        return out

    def validate(self) -> None:
        if self.mean[0] != 0.0:
            raise InconsistencyError("expected cost at t=0 must be 0")
        if np.any(np.diff(self.mean) < -1e-9):
            raise InconsistencyError("expected cost must be nondecreasing")
        if np.any(self.std < 0.0):
            raise InconsistencyError("standard deviation must be nonnegative")


@dataclass(frozen=True)
class PerformanceCurve:
    """A probability-valued curve (availability, reliability, interval)."""

    times: np.ndarray
    values: np.ndarray
    kind: str

    def validate(self) -> None:
        if np.any(self.values < -1e-12) or np.any(self.values > 1.0 + 1e-12):
            raise InconsistencyError(f"{self.kind} left [0, 1]")


def _check_policy(tables: EstimateTables, policy: MaintenancePolicy | None) -> None:
    if policy is None:
        return
    if (
        abs(policy.inspection_period - tables.T) > 1e-12
        or abs(policy.preventive_threshold - tables.M) > 1e-12
    ):
        raise GridCoverageError("policy does not match the supplied tables")


def _kf(t: float, T: float, kmax: int) -> int:
    return min(int(math.floor(t / T + _EPS)), kmax)


def _lookup(values: dict, t: float) -> float:
    key = int(round(t * 1e9))
    try:
        return values[key]
    except KeyError:
        raise GridCoverageError(f"recursion lookup off the grid at t={t}") from None


# -- expected cost -----------------------------------------------------------

def _cost_nonrenewal(tables, costs, idx, kf):
    """G(t) of the cost recursion: replacement, inspection, downtime terms."""
    Cc, Cp, CI, Cd = (
        costs.corrective,
        costs.preventive,
        costs.inspection,
        costs.downtime_rate,
    )
    g = 0.0
    mass = 0.0
    for k in range(1, kf + 1):
        pp = tables.p_preventive[k]
        pc = tables.p_corrective[k]
        g += (Cp + CI * (k - 1)) * pp
        g += (Cc + CI * (k - 1)) * pc
        g += Cd * tables.joint_downtime[k]
        mass += pp + pc
    g += kf * CI * (1.0 - mass)
    g += Cd * tables.residual_downtime[idx]
    return g


def _solve_cost_staged(tables: EstimateTables, costs: CostStructure) -> dict:
    T = tables.T
    values: dict[int, float] = {}
    Cd = costs.downtime_rate
    for idx, t in enumerate(tables.times):
        kf = _kf(t, T, tables.kmax)
        if kf == 0:
            values[int(round(t * 1e9))] = Cd * tables.residual_downtime[idx]
            continue
        acc = 0.0
        for k in range(1, kf + 1):
            p = tables.p_preventive[k] + tables.p_corrective[k]
            acc += _lookup(values, t - k * T) * p
        acc += _cost_nonrenewal(tables, costs, idx, kf)
        values[int(round(t * 1e9))] = acc
    return values


def _solve_cost_memo(tables: EstimateTables, costs: CostStructure) -> dict:
    T = tables.T
    Cd = costs.downtime_rate
    memo: dict[int, float] = {}

    def solve(t: float) -> float:
        key = int(round(t * 1e9))
        if key in memo:
            return memo[key]
        idx = tables.index_of(t)
        kf = _kf(t, T, tables.kmax)
        if kf == 0:
            val = Cd * tables.residual_downtime[idx]
        else:
            val = sum(
                solve(t - k * T)
                * (tables.p_preventive[k] + tables.p_corrective[k])
                for k in range(1, kf + 1)
            )
            val += _cost_nonrenewal(tables, costs, idx, kf)
        memo[key] = val
        return val

    for t in tables.times:
        solve(float(t))
    return memo


def _solve_cost_sq_staged(tables, costs, ec: dict) -> dict:
    T = tables.T
    Cc, Cp, CI, Cd = (
        costs.corrective,
        costs.preventive,
        costs.inspection,
        costs.downtime_rate,
    )
    values: dict[int, float] = {}
    for idx, t in enumerate(tables.times):
        kf = _kf(t, T, tables.kmax)
        if kf == 0:
            values[int(round(t * 1e9))] = Cd * Cd * tables.residual_downtime_sq[idx]
            continue
        acc = 0.0
        h = 0.0
        mass = 0.0
        for k in range(1, kf + 1):
            pp = tables.p_preventive[k]
            pc = tables.p_corrective[k]
            mass += pp + pc
            acc += _lookup(values, t - k * T) * (pp + pc)
            ec_k = _lookup(ec, t - k * T)
            cp_k = Cp + CI * (k - 1)
            cc_k = Cc + CI * (k - 1)
            h += cp_k * cp_k * pp + 2.0 * cp_k * ec_k * pp
            h += cc_k * cc_k * pc + 2.0 * cc_k * ec_k * pc
            h += 2.0 * (cc_k + ec_k) * Cd * tables.joint_downtime[k]
            h += Cd * Cd * tables.joint_downtime_sq[k]
        h += (kf * CI) ** 2 * (1.0 - mass)
        h += 2.0 * kf * CI * Cd * tables.residual_downtime[idx]
        h += Cd * Cd * tables.residual_downtime_sq[idx]
        values[int(round(t * 1e9))] = acc + h
    return values


def expected_cost(
    tables: EstimateTables,
    costs: CostStructure,
    policy: MaintenancePolicy | None = None,
    t: float = 0.0,
) -> float:
    """E[C(t)] via the cost renewal recursion."""
    _check_policy(tables, policy)
    tables.index_of(t)
    return _lookup(_solve_cost_staged(tables, costs), t)


def expected_cost_sq(
    tables: EstimateTables,
    costs: CostStructure,
    policy: MaintenancePolicy | None = None,
    t: float = 0.0,
) -> float:
    """E[C(t)^2] via the second-moment recursion with its cross terms."""
    _check_policy(tables, policy)
    tables.index_of(t)
    ec = _solve_cost_staged(tables, costs)
    return _lookup(_solve_cost_sq_staged(tables, costs, ec), t)


def std_dev(
    tables: EstimateTables,
    costs: CostStructure,
    policy: MaintenancePolicy | None = None,
    t: float = 0.0,
) -> float:
    """Standard deviation of the transient cost at t."""
    _check_policy(tables, policy)
    ec = expected_cost(tables, costs, None, t)
    sq = expected_cost_sq(tables, costs, None, t)
    var = sq - ec * ec
    if var < -1e-6 * ec * ec:
        raise InconsistencyError(
            f"negative variance {var} at t={t} beyond the noise clamp"
        )
    return math.sqrt(max(var, 0.0))


def cost_curve(tables: EstimateTables, costs: CostStructure) -> CostCurve:
    """Full transient cost curve on the evaluation grid."""
    ec = _solve_cost_staged(tables, costs)
    sq = _solve_cost_sq_staged(tables, costs, ec)
    times = tables.times
    mean = np.array([_lookup(ec, t) for t in times])
    mean_sq = np.array([_lookup(sq, t) for t in times])
    var = mean_sq - mean * mean
    bad = var < -1e-6 * mean * mean
    if bad.any():
        raise InconsistencyError("negative variance beyond the noise clamp")
    std = np.sqrt(np.maximum(var, 0.0))
    curve = CostCurve(times=times, mean=mean, mean_sq=mean_sq, std=std)
    curve.validate()
    return curve


def asymptotic_cost_rate(
    tables: EstimateTables,
    costs: CostStructure,
    policy: MaintenancePolicy | None = None,
) -> float:
    """Long-run expected cost per time unit (renewal reward ratio)."""
    _check_policy(tables, policy)
    if tables.censored_fraction >= 0.01:
        warnings.warn(
            f"censored mass {tables.censored_fraction:.3f} >= 1%; "
            "asymptotic sums are truncated",
            TruncationWarning,
            stacklevel=2,
        )
    ks = np.arange(1, tables.kmax + 1)
    pp = tables.p_preventive[1:]
    pc = tables.p_corrective[1:]
    numerator = float(
        np.sum(
            costs.corrective * pc
            + costs.preventive * pp
            + costs.inspection * (ks - 1) * (pp + pc)
        )
        + costs.downtime_rate * tables.joint_downtime[1:].sum()
    )
    denominator = float(np.sum(ks * tables.T * (pp + pc)))
    if denominator == 0.0:
        raise InconsistencyError("no replacement mass observed; rate undefined")
    return numerator / denominator


# -- performance measures ----------------------------------------------------

def _solve_survival_staged(tables: EstimateTables, preventive_only: bool) -> dict:
    T = tables.T
    values: dict[int, float] = {}
    for idx, t in enumerate(tables.times):
        kf = _kf(t, T, tables.kmax)
        acc = float(tables.alive_no_replacement[idx])
        for k in range(1, kf + 1):
            p = tables.p_preventive[k]
            if not preventive_only:
                p += tables.p_corrective[k]
            acc += _lookup(values, t - k * T) * p
        values[int(round(t * 1e9))] = acc
    return values


def _solve_survival_memo(tables: EstimateTables, preventive_only: bool) -> dict:
    T = tables.T
    memo: dict[int, float] = {}

    def solve(t: float) -> float:
        key = int(round(t * 1e9))
        if key in memo:
            return memo[key]
        idx = tables.index_of(t)
        kf = _kf(t, T, tables.kmax)
        val = float(tables.alive_no_replacement[idx])
        for k in range(1, kf + 1):
            p = tables.p_preventive[k]
            if not preventive_only:
                p += tables.p_corrective[k]
            val += solve(t - k * T) * p
        memo[key] = val
        return val

    for t in tables.times:
        solve(float(t))
    return memo


def availability(tables: EstimateTables, t: float) -> float:
    """P[system working at t]."""
    tables.index_of(t)
    return _lookup(_solve_survival_staged(tables, preventive_only=False), t)


def reliability(tables: EstimateTables, t: float) -> float:
    """P[no failure in (0, t]]; only preventive replacements renew it."""
    tables.index_of(t)
    return _lookup(_solve_survival_staged(tables, preventive_only=True), t)


def _solve_interval(tables: EstimateTables, s: float) -> dict:
    """IR(t, t+s) for all grid t with t+s on the grid, fixed s."""
    T = tables.T
    rel = _solve_survival_staged(tables, preventive_only=True)
    memo: dict[int, float] = {}

    def solve(t: float) -> float:
        key = int(round(t * 1e9))
        if key in memo:
            return memo[key]
        end = t + s
        idx_end = tables.index_of(end)
        kf_t = _kf(t, T, tables.kmax)
        kf_end = _kf(end, T, tables.kmax)
        val = float(tables.alive_no_replacement[idx_end])
        for k in range(kf_t + 1, kf_end + 1):
            val += _lookup(rel, end - k * T) * tables.p_preventive[k]
        for k in range(1, kf_t + 1):
            val += solve(t - k * T) * (
                tables.p_preventive[k] + tables.p_corrective[k]
            )
        memo[key] = val
        return val

    for t in tables.times:
        if t + s <= tables.horizon + _EPS:
            try:
                tables.index_of(t + s)
            except GridCoverageError:
                continue
            solve(float(t))
    return memo


def interval_reliability(tables: EstimateTables, t: float, s: float) -> float:
    """P[system works throughout (t, t+s]]."""
    if t < 0.0 or s < 0.0:
        raise GridCoverageError("t and s must be nonnegative")
    if t + s > tables.horizon + _EPS:
        raise GridCoverageError("t + s exceeds the life-cycle horizon")
    tables.index_of(t)
    tables.index_of(t + s)
    return _lookup(_solve_interval(tables, s), t)


def performance_curve(
    tables: EstimateTables, kind: str, s: float = 0.0
) -> PerformanceCurve:
    """Availability, reliability, or interval-reliability curve."""
    if kind == "availability":
        solved = _solve_survival_staged(tables, preventive_only=False)
        times = tables.times
    elif kind == "reliability":
        solved = _solve_survival_staged(tables, preventive_only=True)
        times = tables.times
    elif kind == "interval_reliability":
        solved = _solve_interval(tables, s)
        times = np.array(
            [t for t in tables.times if int(round(t * 1e9)) in solved]
        )
    else:
        raise ValueError(f"unknown performance measure '{kind}'")
    values = np.array([_lookup(solved, t) for t in times])
    curve = PerformanceCurve(times=times, values=values, kind=kind)
    curve.validate()
    return curve


# -- exports -----------------------------------------------------------------

def write_cost_curve_csv(curve: CostCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "value", "stddev"])
        for t, v, s in zip(curve.times, curve.mean, curve.std):
            writer.writerow([f"{t:.6f}", f"{v:.6f}", f"{s:.6f}"])


def write_performance_curve_csv(curve: PerformanceCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "value"])
        for t, v in zip(curve.times, curve.values):
            writer.writerow([f"{t:.6f}", f"{v:.6f}"])
