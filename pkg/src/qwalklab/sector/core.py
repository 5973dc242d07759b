"""Exact transition law and distribution evolution of the sector walk.

The walk lives on the sector identified with N^{d-1}.  A point is kept
in two equivalent forms: the descending exponent vector alpha of length
d with last entry 0, and the difference vector x of length d-1 with
x_i = alpha_i - alpha_{i+1}.  A step adds a non-constant binary vector
gamma to alpha with probability q^{Z_gamma}/deg(xi) and folds the
result back into the sector by sorting the entries in descending order
and subtracting the last one.  Folding can merge several gamma onto the
same target; their masses add.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

from .. import qcalc

Rational = Union[int, Fraction]


@dataclass(frozen=True)
class SectorPoint:
    """Point of the sector in both exponent (alpha) and difference (x) form."""

    alpha: tuple[int, ...]
    x: tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.alpha)

    @classmethod
    def from_alpha(cls, alpha: Sequence[int]) -> "SectorPoint":
        alpha = tuple(alpha)
        if len(alpha) < 2:
            raise ValueError("alpha must have length d >= 2")
        if alpha[-1] != 0:
            raise ValueError("alpha must end in 0")
        if any(alpha[i] < alpha[i + 1] for i in range(len(alpha) - 1)):
            raise ValueError("alpha must be descending")
        x = tuple(alpha[i] - alpha[i + 1] for i in range(len(alpha) - 1))
        return cls(alpha, x)

    @classmethod
    def from_x(cls, x: Sequence[int]) -> "SectorPoint":
        x = tuple(x)
        if any(xi < 0 for xi in x):
            raise ValueError("x entries must be >= 0")
        alpha = []
        acc = 0
        for xi in reversed(x):
            acc += xi
            alpha.append(acc)
        alpha.reverse()
        alpha.append(0)
        return cls(tuple(alpha), x)

    @classmethod
    def origin(cls, d: int) -> "SectorPoint":
        return cls((0,) * d, (0,) * (d - 1))

    def is_boundary(self) -> bool:
        return any(xi == 0 for xi in self.x)

    def r_norm(self) -> int:
        return qcalc.r_norm(self.d, self.x)


def fold(d: int, raw: Sequence[int]) -> SectorPoint:
    """Fold an exponent vector into the sector: sort descending, rebase to 0."""
    if len(raw) != d:
        raise ValueError(f"raw vector must have length {d}, got {len(raw)}")
    ordered = sorted(raw, reverse=True)
    base = ordered[-1]
    return SectorPoint.from_alpha(tuple(a - base for a in ordered))


@dataclass(frozen=True)
class StepLaw:
    """One-step law from a source point: distinct targets with exact masses."""

    source: SectorPoint
    entries: tuple[tuple[SectorPoint, Fraction], ...]

    def __post_init__(self):
        total = sum((p for _, p in self.entries), Fraction(0))
        if total != 1:
            raise ValueError(f"step law masses sum to {total}, not 1")

    def as_dict(self) -> dict[tuple[int, ...], Fraction]:
        return {t.x: p for t, p in self.entries}

    def probability(self, x: Sequence[int]) -> Fraction:
        return self.as_dict().get(tuple(x), Fraction(0))


@lru_cache(maxsize=200_000)
def _folded_targets(d: int, alpha: tuple[int, ...]) -> tuple[tuple[tuple[int, ...], int], ...]:
    # q-independent structure of the law: (target x, Z exponent) per move
    out = []
    for m in qcalc.enumerate_moves(d):
        stepped = tuple(a + g for a, g in zip(alpha, m.gamma))
        out.append((fold(d, stepped).x, m.z_exponent))
    return tuple(out)


@lru_cache(maxsize=1024)
def _z_masses(d: int, qf: Fraction) -> dict[int, Fraction]:
    deg = Fraction(qcalc.vertex_degree(d, qf))
    return {z: qf**z / deg for z in {m.z_exponent for m in qcalc.enumerate_moves(d)}}


def transition_distribution(d: int, q: Rational, p: SectorPoint) -> StepLaw:
    """Exact one-step law from p: mass q^{Z_gamma}/deg per move, folded."""
    if p.d != d:
        raise ValueError(f"point has rank {p.d}, expected {d}")
    z_mass = _z_masses(d, Fraction(q))
    masses: dict[tuple[int, ...], Fraction] = {}
    for target_x, z in _folded_targets(d, p.alpha):
        masses[target_x] = masses.get(target_x, Fraction(0)) + z_mass[z]
    entries = tuple(
        (SectorPoint.from_x(x), mass) for x, mass in sorted(masses.items())
    )
    return StepLaw(source=p, entries=entries)


def bias_check(d: int, q: Rational) -> list[tuple[Fraction, Fraction]]:
    """Per-coordinate (up-mass, down-mass) over interior moves.

    Summing q^{Z_gamma}/deg over moves with coordinate increment +1 and
    -1; the up-mass is exactly q times the down-mass, which is asserted.
    """
    qf = Fraction(q)
    deg = Fraction(qcalc.vertex_degree(d, qf))
    pairs = []
    for i in range(d - 1):
        up = sum((qf**m.z_exponent for m in qcalc.enumerate_moves(d) if m.gamma_prime[i] == 1), Fraction(0))
        down = sum((qf**m.z_exponent for m in qcalc.enumerate_moves(d) if m.gamma_prime[i] == -1), Fraction(0))
        up, down = up / deg, down / deg
        assert up == qf * down, f"coordinate {i}: up {up} != q * down {down}"
        pairs.append((up, down))
    return pairs


@dataclass(frozen=True)
class EvolveResult:
    """Distribution of the walk at a horizon, with truncation accounting."""

    d: int
    horizon: int
    distribution: dict[tuple[int, ...], Fraction]
    truncated_mass: Fraction
    r_max: Optional[int]

    def total_mass(self) -> Fraction:
        return sum(self.distribution.values(), Fraction(0)) + self.truncated_mass

    def r_norm_law(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for x, p in self.distribution.items():
            r = qcalc.r_norm(self.d, x)
            out[r] = out.get(r, Fraction(0)) + p
        return out


def evolve_exact(
    d: int,
    q: Rational,
    start: SectorPoint,
    horizon: int,
    r_max: Optional[int] = None,
    state_cap: int = 500_000,
) -> EvolveResult:
    """Exact forward evolution of the sector walk for `horizon` steps.

    States with R-norm beyond r_max are truncated: their mass moves to
    an absorbing bucket reported separately, so that distribution mass
    plus truncated mass is exactly 1.  Raises if the live state count
    ever exceeds state_cap.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    dist: dict[tuple[int, ...], Fraction] = {start.x: Fraction(1)}
    truncated = Fraction(0)
    q_powers = _z_masses(d, Fraction(q))
    for t in range(horizon):
        new: dict[tuple[int, ...], Fraction] = {}
        for x, mass in dist.items():
            alpha = SectorPoint.from_x(x).alpha
            for target_x, z in _folded_targets(d, alpha):
                if r_max is not None and qcalc.r_norm(d, target_x) > r_max:
                    truncated += mass * q_powers[z]
                else:
                    new[target_x] = new.get(target_x, Fraction(0)) + mass * q_powers[z]
        if len(new) > state_cap:
            raise RuntimeError(
                f"state space exceeded cap {state_cap} at horizon {t + 1} ({len(new)} states)"
            )
        dist = new
    return EvolveResult(d=d, horizon=horizon, distribution=dist, truncated_mass=truncated, r_max=r_max)
