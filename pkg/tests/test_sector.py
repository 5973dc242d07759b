"""Sector walk: folding, exact laws, exact evolution, and Monte Carlo."""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qwalklab import qcalc, sector
from qwalklab.sector import SectorPoint

Q_SWEEP = (2, 3, 4, 5, 7, 8, 9)


# ---------------------------------------------------------------------------
# Points and folding


def test_point_round_trip():
    p = SectorPoint.from_x((2, 0, 5))
    assert p.alpha == (7, 5, 5, 0)
    assert SectorPoint.from_alpha(p.alpha) == p
    assert p.is_boundary()
    assert not SectorPoint.from_x((1, 1, 1)).is_boundary()


def test_point_validation():
    with pytest.raises(ValueError):
        SectorPoint.from_alpha((1, 2, 0))
    with pytest.raises(ValueError):
        SectorPoint.from_alpha((2, 1, 1))
    with pytest.raises(ValueError):
        SectorPoint.from_x((1, -1))


def test_fold_examples():
    for a in (1, 4):
        assert sector.fold(3, (a + 1, 0, 1)).x == (a, 1)
    for b in (1, 5):
        assert sector.fold(3, (b, b + 1, 1)).x == (1, b - 1)
    assert sector.fold(3, (4, 2, 0)).x == (2, 2)  # interior: no-op
    with pytest.raises(ValueError):
        sector.fold(3, (1, 0))


@given(st.integers(min_value=2, max_value=6).flatmap(
    lambda d: st.tuples(st.just(d), st.lists(st.integers(0, 8), min_size=d, max_size=d))
))
def test_fold_properties(args):
    d, raw = args
    p = sector.fold(d, raw)
    assert p.alpha[-1] == 0
    assert all(p.alpha[i] >= p.alpha[i + 1] for i in range(d - 1))
    assert sector.fold(d, p.alpha) == p  # idempotent on folded vectors
    assert sorted(a - min(raw) for a in raw) == sorted(p.alpha)


# ---------------------------------------------------------------------------
# Transition law


def test_origin_law_d3():
    for q in Q_SWEEP:
        law = sector.transition_distribution(3, q, SectorPoint.origin(3)).as_dict()
        assert law == {(1, 0): Fraction(1, 2), (0, 1): Fraction(1, 2)}


def test_y_axis_law_d3():
    for q in Q_SWEEP:
        k = 2 * (q * q + q + 1)
        for b in (1, 3):
            law = sector.transition_distribution(3, q, SectorPoint.from_x((0, b))).as_dict()
            dy = {}
            for (x1, x2), mass in law.items():
                dy[x2 - b] = dy.get(x2 - b, Fraction(0)) + mass
            assert dy == {
                1: Fraction(q * q, k),
                0: Fraction(q * q + q, k),
                -1: Fraction(q + 2, k),
            }


def test_x_axis_law_is_mirror_of_y_axis():
    for q in (2, 5):
        for a in (1, 4):
            lx = sector.transition_distribution(3, q, SectorPoint.from_x((a, 0))).as_dict()
            ly = sector.transition_distribution(3, q, SectorPoint.from_x((0, a))).as_dict()
            assert {(y, x): m for (x, y), m in lx.items()} == ly


def test_interior_law_d3():
    for q in Q_SWEEP:
        k = 2 * (q * q + q + 1)
        law = sector.transition_distribution(3, q, SectorPoint.from_x((3, 4))).as_dict()
        assert sorted(law.values(), reverse=True) == [
            Fraction(q * q, k), Fraction(q * q, k),
            Fraction(q, k), Fraction(q, k),
            Fraction(1, k), Fraction(1, k),
        ]


def test_step_law_sums_to_one_exhaustive():
    # every boundary stratum with entries <= 3, all d <= 7.  Folding is
    # q-independent, so grouping the weight exponents by folded target and
    # checking the exponent multiset against the degree polynomial proves
    # the law sums to 1 for every q at once.
    from qwalklab.qpoly import QPolynomial
    from qwalklab.sector.core import _folded_targets

    for d in range(2, 8):
        degree = qcalc.vertex_degree(d)
        for x in product(range(4), repeat=d - 1):
            p = SectorPoint.from_x(x)
            total = QPolynomial.zero()
            targets = set()
            for target_x, z in _folded_targets(d, p.alpha):
                total = total + QPolynomial.monomial(1, z)
                targets.add(target_x)
            assert total == degree
            # the public law aggregates exactly these targets
            if d <= 4:
                for q in Q_SWEEP:
                    law = sector.transition_distribution(d, q, p)
                    assert sum(m for _, m in law.entries) == 1
                    assert {t.x for t, _ in law.entries} == targets


def test_interior_increment_law_matches_homogeneous_law():
    for d in range(2, 6):
        for q in (2, 5):
            expected = qcalc.radial_increment_law(d, q)
            p = SectorPoint.from_x((2,) * (d - 1))
            law = sector.transition_distribution(d, q, p)
            got: dict[int, Fraction] = {}
            r0 = p.r_norm()
            for t, mass in law.entries:
                inc = t.r_norm() - r0
                got[inc] = got.get(inc, Fraction(0)) + mass
            assert got == expected


def test_d2_reduces_to_biased_ray_walk():
    for q in (2, 3, 7):
        law0 = sector.transition_distribution(2, q, SectorPoint.origin(2)).as_dict()
        assert law0 == {(1,): Fraction(1)}  # reflection at 0
        law = sector.transition_distribution(2, q, SectorPoint.from_x((4,))).as_dict()
        assert law == {(5,): Fraction(q, q + 1), (3,): Fraction(1, q + 1)}


def test_bias_check_examples():
    up, down = sector.bias_check(2, 5)[0]
    assert (up, down) == (Fraction(5, 6), Fraction(1, 6))
    for q in (2, 3):
        k = 2 * (q * q + q + 1)
        pairs = sector.bias_check(3, q)
        assert pairs[0] == (Fraction(q * q + q, k), Fraction(q + 1, k))
    for q in Q_SWEEP:
        for upm, downm in sector.bias_check(7, q):
            assert upm == q * downm


# ---------------------------------------------------------------------------
# Exact evolution


def test_evolve_horizon_zero_and_one():
    start = SectorPoint.from_x((1, 2))
    res0 = sector.evolve_exact(3, 2, start, 0)
    assert res0.distribution == {(1, 2): Fraction(1)}
    res1 = sector.evolve_exact(3, 2, start, 1)
    assert res1.distribution == sector.transition_distribution(3, 2, start).as_dict()
    assert res1.truncated_mass == 0


def test_evolve_two_steps_matches_hand_composition():
    origin = SectorPoint.origin(3)
    first = sector.transition_distribution(3, 2, origin)
    composed: dict[tuple[int, int], Fraction] = {}
    for target, mass in first.entries:
        for t2, m2 in sector.transition_distribution(3, 2, target).entries:
            composed[t2.x] = composed.get(t2.x, Fraction(0)) + mass * m2
    res = sector.evolve_exact(3, 2, origin, 2)
    assert res.distribution == composed
    assert res.total_mass() == 1


def test_evolve_truncation_accounting():
    res = sector.evolve_exact(3, 2, SectorPoint.origin(3), 6, r_max=4)
    assert res.truncated_mass > 0
    assert all(qcalc.r_norm(3, x) <= 4 for x in res.distribution)
    assert res.total_mass() == 1


def test_evolve_state_cap_error():
    with pytest.raises(RuntimeError, match="cap"):
        sector.evolve_exact(4, 2, SectorPoint.origin(4), 8, state_cap=10)


def test_evolve_mass_conservation_no_truncation():
    for d, q, t in ((2, 3, 12), (3, 2, 8), (4, 2, 5)):
        res = sector.evolve_exact(d, q, SectorPoint.origin(d), t)
        assert sum(res.distribution.values()) == 1


# ---------------------------------------------------------------------------
# Monte Carlo


BACKENDS = ["python"] + (["cython"] if sector.HAVE_KERNEL else [])


def test_simulate_deterministic_per_seed():
    a = sector.simulate(3, 2, 100, 32, seed=11)
    b = sector.simulate(3, 2, 100, 32, seed=11)
    assert np.array_equal(a.rho_samples, b.rho_samples)
    assert np.array_equal(a.boundary_visits, b.boundary_visits)
    assert a.interior_increment_histogram == b.interior_increment_histogram
    c = sector.simulate(3, 2, 100, 32, seed=12)
    assert not np.array_equal(a.rho_samples, c.rho_samples)


@pytest.mark.skipif(not sector.HAVE_KERNEL, reason="compiled kernel not built")
def test_backends_agree_bit_for_bit():
    for d, q in ((2, 3), (3, 2), (5, 4)):
        a = sector.simulate(d, q, 200, 40, seed=77, checkpoints=(0, 13, 200), backend="cython")
        b = sector.simulate(d, q, 200, 40, seed=77, checkpoints=(0, 13, 200), backend="python")
        assert np.array_equal(a.rho_samples, b.rho_samples)
        assert np.array_equal(a.boundary_visits, b.boundary_visits)
        assert np.array_equal(a.last_boundary_step, b.last_boundary_step)
        assert np.array_equal(a.rho_at_checkpoints, b.rho_at_checkpoints)
        assert a.interior_increment_histogram == b.interior_increment_histogram


@pytest.mark.parametrize("backend", BACKENDS)
def test_simulate_increment_support(backend):
    st_ = sector.simulate(4, 3, 200, 10, seed=5, backend=backend)
    allowed = {m.r_increment for m in qcalc.enumerate_moves(4)}
    assert set(st_.interior_increment_histogram) <= allowed


def test_simulate_horizon_zero():
    st_ = sector.simulate(3, 2, 0, 8, seed=1)
    assert np.array_equal(st_.rho_samples, np.zeros(8, dtype=np.int64))
    assert st_.interior_step_count() == 0


def test_simulate_interior_mean_matches_exact_drift():
    # ~1e5 interior steps at d=3, q=5
    st_ = sector.simulate(3, 5, 500, 200, seed=31)
    drift = float(qcalc.drift_constants(3, 5).drift)
    assert abs(st_.interior_mean() - drift) < 4 * st_.interior_stderr()


def test_simulate_checkpoint_at_horizon_equals_samples():
    st_ = sector.simulate(3, 2, 50, 16, seed=3, checkpoints=(25, 50))
    assert np.array_equal(st_.rho_at_checkpoints[:, 1], st_.rho_samples)


def test_simulate_matches_exact_evolution():
    # P[R(X_T) = r] against the exact law at T=4, 3 sigma per class
    res = sector.evolve_exact(3, 2, SectorPoint.origin(3), 4)
    exact = res.r_norm_law()
    n = 20_000
    st_ = sector.simulate(3, 2, 4, n, seed=123)
    hist = st_.rho_histogram()
    for r, p in exact.items():
        pf = float(p)
        se = math.sqrt(pf * (1 - pf) / n)
        assert abs(hist.get(r, 0) / n - pf) <= 3 * se + 1e-12, r


def test_trajectory_substreams_differ():
    g0 = sector.trajectory_generator(9, 0).random(8)
    g1 = sector.trajectory_generator(9, 1).random(8)
    g0b = sector.trajectory_generator(9, 0).random(8)
    assert not np.array_equal(g0, g1)
    assert np.array_equal(g0, g0b)


def test_tail_experiment_reports():
    tail = sector.tail_experiment(3, 5, n=5**12, s=2.0, trajectories=2000, seed=17)
    assert 0 <= tail.p_exceed_r0_at_t0 <= 1
    assert 0 <= tail.p_below_r1_at_t1 <= 1
    assert tail.p_exceed_r0_at_t0 <= tail.normal_tail_reference + 0.05
    # large s pushes both tails to zero
    far = sector.tail_experiment(3, 5, n=5**12, s=50.0, trajectories=500, seed=18)
    assert far.p_exceed_r0_at_t0 == 0.0
    assert far.p_below_r1_at_t1 <= 0.01


def test_clt_normalization_small_run():
    st_ = sector.simulate(3, 3, 10_000, 400, seed=21)
    mean, var = sector.clt_summary(st_, qcalc.drift_constants(3, 3))
    assert abs(mean) < 0.2
    assert 0.6 < var < 1.4
