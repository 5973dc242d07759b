"""Monte Carlo simulation of the sector walk with reproducible substreams.

Trajectory i draws its uniforms from a counter-based Philox generator
keyed on (seed, i), so results are independent of execution order and
identical across the compiled kernel and the numpy fallback.  The
compiled kernel (qwalklab.sector._kernel, built from Cython) is used
when importable; otherwise the numpy implementation takes over.  Both
share one semantics: a step consumes one uniform, selects the move by
bisect-right in the cumulative table, and folds the exponent vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .. import qcalc
from .core import SectorPoint

try:
    from . import _kernel

    HAVE_KERNEL = True
except ImportError:  # built without Cython
    _kernel = None
    HAVE_KERNEL = False

Rational = Union[int, Fraction]

_MASK64 = (1 << 64) - 1


def trajectory_generator(seed: int, index: int) -> np.random.Generator:
    """Substream for trajectory `index`: Philox keyed on (seed, index)."""
    key = ((seed & _MASK64) << 64) | (index & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def _move_tables(d: int, q: Rational):
    moves = qcalc.enumerate_moves(d)
    qf = Fraction(q)
    deg = Fraction(qcalc.vertex_degree(d, qf))
    gammas = np.array([m.gamma for m in moves], dtype=np.int64)
    r_inc = np.array([m.r_increment for m in moves], dtype=np.int64)
    probs = np.array([float(qf**m.z_exponent / deg) for m in moves])
    cum = np.cumsum(probs)
    cum[-1] = 1.0  # guard against accumulated rounding; uniforms are < 1
    return gammas, cum, r_inc


@dataclass
class WalkStats:
    """Summary of a batch of sector-walk trajectories.

    rho_samples holds the R-norm at the horizon per trajectory;
    boundary_visits counts pre-step states on the boundary (some x_i=0)
    over t = 0..horizon-1; last_boundary_step is the last t in
    0..horizon at which the state was on the boundary (-1 if never).
    The interior increment histogram counts R-increments of steps whose
    pre-state was interior.
    """

    d: int
    q: Fraction
    horizon: int
    trajectory_count: int
    seed: int
    rho_samples: np.ndarray
    boundary_visits: np.ndarray
    last_boundary_step: np.ndarray
    interior_increment_histogram: dict[int, int]
    backend: str
    checkpoints: tuple[int, ...] = ()
    rho_at_checkpoints: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))

    def interior_step_count(self) -> int:
        return sum(self.interior_increment_histogram.values())

    def interior_mean(self) -> float:
        n = self.interior_step_count()
        return sum(r * c for r, c in self.interior_increment_histogram.items()) / n

    def interior_variance(self) -> float:
        n = self.interior_step_count()
        m = self.interior_mean()
        return sum(r * r * c for r, c in self.interior_increment_histogram.items()) / n - m * m

    def interior_stderr(self) -> float:
        return math.sqrt(self.interior_variance() / self.interior_step_count())

    def normalized_endpoints(self, drift: float, sigma: float) -> np.ndarray:
        """CLT-normalized endpoint values (rho - drift*t) / (sigma sqrt(t))."""
        t = self.horizon
        return (self.rho_samples - drift * t) / (sigma * math.sqrt(t))

    def rho_histogram(self) -> dict[int, int]:
        vals, counts = np.unique(self.rho_samples, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}


def simulate(
    d: int,
    q: Rational,
    horizon: int,
    trajectories: int,
    seed: int,
    *,
    start: Optional[SectorPoint] = None,
    checkpoints: Sequence[int] = (),
    backend: Optional[str] = None,
) -> WalkStats:
    """Simulate `trajectories` independent sector walks for `horizon` steps.

    Deterministic for a given seed: trajectory i uses substream
    (seed, i) regardless of backend or batching.
    """
    if trajectories < 1:
        raise ValueError("trajectories must be >= 1")
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if start is None:
        start = SectorPoint.origin(d)
    if start.d != d:
        raise ValueError("start point rank mismatch")
    cps = tuple(sorted(set(int(c) for c in checkpoints)))
    if cps and (cps[0] < 0 or cps[-1] > horizon):
        raise ValueError("checkpoints must lie in [0, horizon]")
    if backend is None:
        backend = "cython" if HAVE_KERNEL else "python"
    if backend == "cython" and not HAVE_KERNEL:
        raise RuntimeError("compiled kernel not available; build with Cython or use backend='python'")
    if backend not in ("cython", "python"):
        raise ValueError(f"unknown backend {backend!r}")

    gammas, cum, r_inc = _move_tables(d, q)
    weights = np.array(qcalc.r_weights(d), dtype=np.int64)
    start_alpha = np.array(start.alpha, dtype=np.int64)
    cp_arr = np.array(cps, dtype=np.int64)

    def make_generator(i: int) -> np.random.Generator:
        return trajectory_generator(seed, i)

    if backend == "cython":
        hist_offset = int(np.abs(r_inc).max(initial=0))
        hist = np.zeros(2 * hist_offset + 1, dtype=np.int64)
        rho_cp = np.zeros((trajectories, len(cps)), dtype=np.int64)
        visits = np.zeros(trajectories, dtype=np.int64)
        last_b = np.zeros(trajectories, dtype=np.int64)
        rho_final = np.zeros(trajectories, dtype=np.int64)
        row = np.zeros(len(cps), dtype=np.int64)
        for i in range(trajectories):
            uniforms = make_generator(i).random(horizon)
            v, lb, r = _kernel.run_trajectory(
                gammas, cum, r_inc, weights, start_alpha, uniforms, cp_arr, row, hist, hist_offset
            )
            visits[i] = v
            last_b[i] = lb
            rho_final[i] = r
            if len(cps):
                rho_cp[i] = row
    else:
        rho_cp, visits, last_b, hist, rho_final = _fallback_run(
            gammas, cum, r_inc, weights, start_alpha, horizon, cp_arr, trajectories, make_generator
        )
        hist_offset = (hist.size - 1) // 2

    hist_dict = {int(r - hist_offset): int(c) for r, c in enumerate(hist) if c}
    return WalkStats(
        d=d,
        q=Fraction(q),
        horizon=horizon,
        trajectory_count=trajectories,
        seed=seed,
        rho_samples=rho_final,
        boundary_visits=visits,
        last_boundary_step=last_b,
        interior_increment_histogram=hist_dict,
        backend=backend,
        checkpoints=cps,
        rho_at_checkpoints=rho_cp,
    )


def _fallback_run(gammas, cum, r_inc, weights, start_alpha, horizon, cp_arr, trajectories, make_generator):
    from . import _fallback

    return _fallback.run_walks(
        gammas, cum, r_inc, weights, start_alpha, horizon, cp_arr, trajectories, make_generator
    )


@dataclass(frozen=True)
class TailExperiment:
    """Monte Carlo estimates of the schedule tail probabilities."""

    p_exceed_r0_at_t0: float
    p_below_r1_at_t1: float
    normal_tail_reference: float  # P[Z > c s] for the standard normal
    t0_step: int
    t1_step: int
    schedule: qcalc.MixingSchedule
    pre_asymptotic: bool
    stats: WalkStats


def tail_experiment(
    d: int,
    q: Rational,
    n: int,
    s: float,
    trajectories: int,
    seed: int,
    *,
    backend: Optional[str] = None,
) -> TailExperiment:
    """Estimate P[rho(t0) > r0] and P[rho(t1) < r1] for the mixing schedule.

    t0 and t1 are rounded to the nearest integer step (clamped at 0); a
    pre-asymptotic schedule is flagged, never suppressed.
    """
    schedule = qcalc.mixing_schedule(d, q, n, s)
    consts = qcalc.drift_constants(d, q)
    t0 = max(0, round(schedule.t_0))
    t1 = max(0, round(schedule.t_1))
    stats = simulate(
        d, q, horizon=max(t0, t1), trajectories=trajectories, seed=seed,
        checkpoints=sorted({t0, t1}), backend=backend,
    )
    cps = stats.checkpoints
    rho_t0 = stats.rho_at_checkpoints[:, cps.index(t0)]
    rho_t1 = stats.rho_at_checkpoints[:, cps.index(t1)]
    p_exceed = float(np.mean(rho_t0 > schedule.r_0))
    p_below = float(np.mean(rho_t1 < schedule.r_1))
    reference = 0.5 * math.erfc(consts.c_constant * s / math.sqrt(2))
    return TailExperiment(
        p_exceed_r0_at_t0=p_exceed,
        p_below_r1_at_t1=p_below,
        normal_tail_reference=reference,
        t0_step=t0,
        t1_step=t1,
        schedule=schedule,
        pre_asymptotic=schedule.pre_asymptotic,
        stats=stats,
    )


def clt_summary(stats: WalkStats, consts: qcalc.DriftConstants) -> tuple[float, float]:
    """Sample mean and variance of the CLT-normalized endpoints."""
    xi = stats.normalized_endpoints(float(consts.drift), math.sqrt(float(consts.variance)))
    return float(np.mean(xi)), float(np.var(xi))
