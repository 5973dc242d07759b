"""Exact constants for the q-weighted sector walk and its mixing schedule.

Everything here is exact: Gaussian binomials and vertex degrees as
integer-coefficient polynomials in q (see :mod:`qwalklab.qpoly`), the
move table of the rank-(d-1) sector walk with its q-power weights, the
radial drift/variance constants as rationals, and the closed-form
bounds (sphere sizes, fiber bounds, operator-norm budgets) used to
predict total-variation mixing.  Floats appear only in the final
reporting layer (schedules, norm budgets in log-space).

Conventions.  A move is a non-constant binary vector gamma of length d.
Its weight exponent Z is the number of inverted pairs (i<j with
gamma_i=1, gamma_j=0), its difference vector gamma' has entries
gamma_i - gamma_{i+1}, and the radial increment is the R-norm of
gamma', where R(x) = sum_j j(d-j) x_j over 1-based coordinates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import NamedTuple, Optional, Sequence, Union

from .qpoly import QPolynomial

Rational = Union[int, Fraction]


# ---------------------------------------------------------------------------
# Gaussian binomials and vertex degree


@lru_cache(maxsize=None)
def _gaussian_binomial_poly(d: int, j: int) -> QPolynomial:
    # q-Pascal recurrence: [d j] = [d-1 j-1] + q^j [d-1 j]
    if j == 0 or j == d:
        return QPolynomial.one()
    return _gaussian_binomial_poly(d - 1, j - 1) + QPolynomial.monomial(1, j) * _gaussian_binomial_poly(d - 1, j)


def gaussian_binomial(d: int, j: int, q: Optional[Rational] = None):
    """Gaussian binomial [d j]_q, symbolic when q is None, else exact value.

    Counts j-dimensional subspaces of a d-dimensional space over a field
    of size q; equals prod_{i=1..j} (q^{d-i+1}-1)/(q^i-1).
    """
    if d <= 0:
        raise ValueError("d must be >= 1")
    if j < 0 or j > d:
        raise ValueError(f"j must satisfy 0 <= j <= d, got j={j}, d={d}")
    poly = _gaussian_binomial_poly(d, j)
    return poly if q is None else poly(q)


def vertex_degree(d: int, q: Optional[Rational] = None):
    """Degree of a vertex: sum_{j=1}^{d-1} [d j]_q, symbolic or evaluated."""
    if d < 2:
        raise ValueError("d must be >= 2")
    total = QPolynomial.zero()
    for j in range(1, d):
        total = total + _gaussian_binomial_poly(d, j)
    return total if q is None else total(q)


# ---------------------------------------------------------------------------
# Moves of the sector walk


@dataclass(frozen=True)
class GammaMove:
    """One admissible step: binary vector, weight exponent, and radial data."""

    gamma: tuple[int, ...]
    z_exponent: int
    gamma_prime: tuple[int, ...]
    r_increment: int


def r_weights(d: int) -> tuple[int, ...]:
    """R-norm weights (j(d-j) for 1-based j), indexed 0-based."""
    return tuple((i + 1) * (d - 1 - i) for i in range(d - 1))


def r_norm(d: int, x: Sequence[int]) -> int:
    """Weighted coordinate sum R(x) = sum_j j(d-j) x_j."""
    w = r_weights(d)
    if len(x) != d - 1:
        raise ValueError(f"x must have length {d - 1}, got {len(x)}")
    return sum(wi * xi for wi, xi in zip(w, x))


@lru_cache(maxsize=None)
def enumerate_moves(d: int) -> tuple[GammaMove, ...]:
    """All 2^d - 2 non-constant binary moves with their invariants."""
    if d < 2:
        raise ValueError("d must be >= 2")
    weights = r_weights(d)
    moves = []
    for gamma in product((0, 1), repeat=d):
        s = sum(gamma)
        if s == 0 or s == d:
            continue
        z = sum(
            1
            for i in range(d)
            for j in range(i + 1, d)
            if gamma[i] == 1 and gamma[j] == 0
        )
        gp = tuple(gamma[i] - gamma[i + 1] for i in range(d - 1))
        r = sum(w * g for w, g in zip(weights, gp))
        moves.append(GammaMove(gamma, z, gp, r))
    return tuple(moves)


def drift_polynomial(d: int) -> QPolynomial:
    """sum_gamma R(gamma') q^{Z_gamma}: numerator of the radial drift."""
    total = QPolynomial.zero()
    for m in enumerate_moves(d):
        total = total + QPolynomial.monomial(m.r_increment, m.z_exponent)
    return total


def second_moment_polynomial(d: int) -> QPolynomial:
    """sum_gamma R(gamma')^2 q^{Z_gamma}: numerator of the radial second moment."""
    total = QPolynomial.zero()
    for m in enumerate_moves(d):
        total = total + QPolynomial.monomial(m.r_increment**2, m.z_exponent)
    return total


def radial_increment_law(d: int, q: Rational) -> dict[int, Fraction]:
    """Interior law of the per-step R-increment: r -> exact probability."""
    deg = Fraction(vertex_degree(d, Fraction(q)))
    law: dict[int, Fraction] = {}
    for m in enumerate_moves(d):
        law[m.r_increment] = law.get(m.r_increment, Fraction(0)) + Fraction(q) ** m.z_exponent / deg
    return law


# ---------------------------------------------------------------------------
# Drift constants


def is_prime_power(m: int) -> bool:
    if m < 2:
        return False
    p = 2
    n = m
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            return n == 1
        p += 1
    return True  # m itself prime


@dataclass(frozen=True)
class DriftConstants:
    """Exact drift/variance of the radial process and the cutoff constant."""

    d: int
    q: Fraction
    degree: Fraction           # deg(xi) at q
    drift: Fraction            # mean radial increment E_d
    variance: Fraction         # sigma_d^2
    cutoff_constant: Fraction  # C_{d,q} = 1/E_d
    c_constant: float          # E_d^{3/2} / sigma_d, tail-bound constant
    prime_power: bool          # whether q is a prime power (warning flag otherwise)


def drift_constants(d: int, q: Rational) -> DriftConstants:
    """Exact radial drift, variance, and cutoff constant at a concrete q.

    q is nominally a prime power >= 2, but any rational q > 1 is accepted
    (the formulas are rational functions); non-prime-power q is flagged.
    """
    qf = Fraction(q)
    if qf <= 1:
        raise ValueError("q must be > 1")
    pp = qf.denominator == 1 and is_prime_power(qf.numerator)
    if not pp:
        warnings.warn(f"q = {qf} is not a prime power; constants are formal", stacklevel=2)
    deg = Fraction(vertex_degree(d, qf))
    drift = Fraction(drift_polynomial(d)(qf)) / deg
    second = Fraction(second_moment_polynomial(d)(qf)) / deg
    variance = second - drift * drift
    c = float(drift) ** 1.5 / math.sqrt(float(variance))
    return DriftConstants(
        d=d,
        q=qf,
        degree=deg,
        drift=drift,
        variance=variance,
        cutoff_constant=1 / drift,
        c_constant=c,
        prime_power=pp,
    )


# ---------------------------------------------------------------------------
# Mixing schedule


@dataclass(frozen=True)
class MixingSchedule:
    """Cutoff time, window and radii for an n-vertex quotient.

    Times and radii are real-valued; callers round outward (floor for
    lower bounds, ceil for upper).  The radii r_0/r_1 are R-norm radii
    and the logarithms are base q.  For d=3 a companion report in
    graph-distance units (base q^2) is attached, and for d=2 the
    classical regular-graph rendering (degree k = q+1, base k-1).
    """

    d: int
    q: Fraction
    n: int
    s: float
    t_cutoff: float
    t_0: float
    t_1: float
    r_0: float
    r_1: float
    window: float
    cutoff_constant: Fraction
    pre_asymptotic: bool
    section3: Optional[dict] = None   # d=3 report, base q^2, distance rho = R/2
    srw_graph: Optional[dict] = None  # d=2 report, (k/(k-2)) log_{k-1} n form


def mixing_schedule(d: int, q: Rational, n: int, s: float) -> MixingSchedule:
    """Cutoff schedule: t_{0,1} = C_{d,q} log_q n -/+ (s+1) sqrt(log_q n)."""
    qf = Fraction(q)
    if s < 0:
        raise ValueError("s must be >= 0")
    if n < qf * qf:
        raise ValueError(f"n must be >= q^2, got n={n}, q={qf}")
    consts = drift_constants(d, qf)
    logq_n = math.log(n) / math.log(qf)
    llog = math.log(logq_n) / math.log(qf)
    window = math.sqrt(logq_n)
    c_dq = float(consts.cutoff_constant)
    t_cut = c_dq * logq_n
    t_0 = t_cut - (s + 1) * window
    t_1 = t_cut + (s + 1) * window
    r_0 = logq_n - d * llog
    r_1 = logq_n + 2 * (d**d + 1) * llog

    section3 = None
    srw_graph = None
    if d == 3:
        # graph-distance units: rho = R/2, logarithms base q^2
        log2_n = logq_n / 2
        llog2 = math.log(log2_n) / math.log(qf * qf)
        coeff = (qf * qf + qf + 1) / (qf * qf - 1)
        c_q = math.sqrt(
            float((qf * qf - 1) ** 3 / ((qf * qf + qf + 1) * (qf**3 + 4 * qf * qf + qf)))
        )
        section3 = {
            "coefficient": coeff,
            "t_cutoff": float(coeff) * log2_n,
            "t_0": float(coeff) * log2_n - (s + 1) * math.sqrt(log2_n),
            "t_1": float(coeff) * log2_n + (s + 1) * math.sqrt(log2_n),
            "r_0": log2_n - 3 * llog2,
            "r_1": log2_n + 16 * llog2,
            "window": math.sqrt(log2_n),
            "c_q": c_q,
        }
    if d == 2:
        k = qf + 1
        srw_graph = {
            "k": k,
            "coefficient": k / (k - 2),  # equals C_{2,q} exactly
            "log_base": k - 1,
            "t_cutoff": float(k / (k - 2)) * logq_n,
        }
    return MixingSchedule(
        d=d,
        q=qf,
        n=n,
        s=float(s),
        t_cutoff=t_cut,
        t_0=t_0,
        t_1=t_1,
        r_0=r_0,
        r_1=r_1,
        window=window,
        cutoff_constant=consts.cutoff_constant,
        pre_asymptotic=(r_0 <= 0 or t_0 <= 0),
        section3=section3,
        srw_graph=srw_graph,
    )


# ---------------------------------------------------------------------------
# Closed-form bounds (d=3 spheres, fibers, norm budgets)


def sphere_size_d3(q: Rational, r: int) -> Rational:
    """Size of the graph-distance r-sphere around a vertex for d=3.

    (r+1)q^{2r} + 2r q^{2r-1} + 2r q^{2r-2} + (r-1)q^{2r-3}; stated for
    r >= 1.  r=0 returns 1 by convention (outside the formula's range).
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    if r == 0:
        warnings.warn("sphere formula is stated for r >= 1; returning 1 by convention", stacklevel=2)
        return 1 if isinstance(q, int) else Fraction(1)
    terms = ((r + 1, 2 * r), (2 * r, 2 * r - 1), (2 * r, 2 * r - 2), (r - 1, 2 * r - 3))
    total = 0
    for coeff, expo in terms:
        if coeff:
            total += coeff * q**expo
    return total


def ball_size_d3(q: Rational, r: int) -> Rational:
    """Exact size of the r-ball: 1 + sum of sphere sizes up to r."""
    total = 1 if isinstance(q, int) else Fraction(1)
    for rr in range(1, r + 1):
        total += sphere_size_d3(q, rr)
    return total


def ball_bound_d3(q: Rational, r: int) -> Rational:
    """Crude ball bound 8 r^2 q^{2r} (valid for r >= 1)."""
    if r < 1:
        raise ValueError("r must be >= 1")
    return 8 * r * r * q ** (2 * r)


class FiberBound(NamedTuple):
    product_form: Rational    # prod_{j=1}^{d-1} (q^{j+1}-1)/(q-1) * q^{R(x)}
    factorial_form: Rational  # d! q^{C(d,2)+R(x)}


def fiber_bound(d: int, q: Rational, x: Sequence[int]) -> FiberBound:
    """Upper bounds on the number of vertices projecting to x.

    The product form multiplies the branching degrees of the flow
    decomposition of the fiber; the factorial form is its crude upper
    estimate d! q^{C(d,2)+R(x)} (always >= the product form).
    """
    if len(x) != d - 1:
        raise ValueError(f"x must have length {d - 1}")
    r = r_norm(d, x)
    qf = Fraction(q)
    prod = Fraction(1)
    for j in range(1, d):
        prod *= (qf ** (j + 1) - 1) / (qf - 1)
    product_form = prod * qf**r
    factorial_form = math.factorial(d) * qf ** (math.comb(d, 2) + r)
    if isinstance(q, int):
        if product_form.denominator == 1:
            product_form = product_form.numerator
        factorial_form = int(factorial_form)
    return FiberBound(product_form, factorial_form)


class NormBudget(NamedTuple):
    """Upper bounds (natural-log scale plus linear when representable)."""

    general_log: float
    general: Optional[float]
    sharp_log: Optional[float]   # d=3 only
    sharp: Optional[float]       # d=3 only


def _exp_or_none(x: float) -> Optional[float]:
    try:
        return math.exp(x)
    except OverflowError:
        return None


def l2_norm_budget(d: int, q: Rational, x: Sequence[int], n: int) -> NormBudget:
    """Budget bounding the TV mass of the orthogonal component at profile x.

    General form: (sqrt(n)/2) (2qR)^{d^d} q^{-R/2} with R = R(x), the
    literal closed form (meaningful once R is large).  For d=3 also the
    sharper (sqrt(n)/2) C(x+2,2) C(2y+5,5) q^{9/2-(x+y)}.  Computed in
    log-space; linear values are None when they overflow a float.
    """
    if len(x) != d - 1:
        raise ValueError(f"x must have length {d - 1}")
    if n < 1:
        raise ValueError("n must be >= 1")
    r = r_norm(d, x)
    qf = float(Fraction(q))
    lq = math.log(qf)
    log_sqrt_n_half = 0.5 * math.log(n) - math.log(2)
    if r == 0:
        general_log = -math.inf
    else:
        general_log = log_sqrt_n_half + (d**d) * math.log(2 * qf * r) - (r / 2) * lq
    sharp_log = sharp = None
    if d == 3:
        xx, yy = x
        sharp_log = (
            log_sqrt_n_half
            + math.lgamma(xx + 3) - math.lgamma(3) - math.lgamma(xx + 1)
            + math.lgamma(2 * yy + 6) - math.lgamma(6) - math.lgamma(2 * yy + 1)
            + (4.5 - (xx + yy)) * lq
        )
        sharp = _exp_or_none(sharp_log)
    general = 0.0 if general_log == -math.inf else _exp_or_none(general_log)
    return NormBudget(general_log, general, sharp_log, sharp)


def two_step_drift_bound(q: Rational) -> Fraction:
    """Exact lower bound on the two-step boundary-distance drift for d=3.

    (4q^4 + q^3 - 5q^2 - 9q - 7) / (4 (q^2+q+1)^2); positive for all
    integer q >= 2, which yields transience of the boundary distances.
    """
    qf = Fraction(q)
    num = 4 * qf**4 + qf**3 - 5 * qf**2 - 9 * qf - 7
    return num / (4 * (qf**2 + qf + 1) ** 2)
