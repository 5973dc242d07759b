"""Projective matrix groups over small finite fields and their Cayley graphs.

Field elements are encoded as integers 0..q-1 in base-p digits: the
element sum_i c_i t^i of F_p[t]/(modulus) is stored as sum_i c_i p^i
(for prime fields this is the usual residue).  Matrices are tuples of
tuples of such integers.  A projective matrix is represented by the
unique scalar multiple whose first nonzero entry in row-major order is
1, so equality of classes is plain tuple equality.

Generator file format: line 1 `gens <d> <p> <e>`; when e > 1, line 2
`modulus c_0 c_1 ... c_e`; then one matrix per line as d*d field
elements in row-major order.
"""

from __future__ import annotations

import os
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import IO, Optional, Sequence, Union

from .graphlab import RegularGraph

Matrix = tuple[tuple[int, ...], ...]


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def _poly_digits(a: int, p: int) -> list[int]:
    out = []
    while a:
        out.append(a % p)
        a //= p
    return out


def _poly_int(digits: Sequence[int], p: int) -> int:
    out = 0
    for c in reversed(digits):
        out = out * p + c
    return out


def _poly_mulmod(a: list[int], b: list[int], modulus: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    e = len(modulus) - 1
    inv_lead = pow(modulus[-1], p - 2, p)
    for i in range(len(prod) - 1, e - 1, -1):
        c = prod[i]
        if c:
            f = (c * inv_lead) % p
            for j in range(e + 1):
                prod[i - e + j] = (prod[i - e + j] - f * modulus[j]) % p
    prod = prod[:e]
    while prod and prod[-1] == 0:
        prod.pop()
    return prod


def _poly_is_irreducible(modulus: Sequence[int], p: int) -> bool:
    # exhaustive trial division by monic polynomials of degree <= e/2
    e = len(modulus) - 1
    mod = [c % p for c in modulus]
    for deg in range(1, e // 2 + 1):
        for code in range(p**deg):
            divisor = _poly_digits(code, p) + [0] * (deg - len(_poly_digits(code, p))) + [1]
            # long division remainder of mod by divisor
            rem = list(mod)
            while len(rem) >= len(divisor) and any(rem):
                while rem and rem[-1] == 0:
                    rem.pop()
                if len(rem) < len(divisor):
                    break
                f = rem[-1]  # divisor is monic
                shift = len(rem) - len(divisor)
                for j, dj in enumerate(divisor):
                    rem[shift + j] = (rem[shift + j] - f * dj) % p
            while rem and rem[-1] == 0:
                rem.pop()
            if not rem:
                return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Finite field F_{p^e}; the modulus is required (and checked) for e > 1."""

    p: int
    e: int = 1
    modulus: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.e < 1:
            raise ValueError("e must be >= 1")
        if self.e == 1:
            if self.modulus is not None:
                raise ValueError("modulus is only meaningful for e > 1")
            return
        if self.modulus is None:
            raise ValueError("extension fields need an irreducible modulus")
        if len(self.modulus) != self.e + 1 or self.modulus[-1] % self.p == 0:
            raise ValueError(f"modulus must have degree {self.e}")
        if self.q <= 1 << 20 and not _poly_is_irreducible(self.modulus, self.p):
            raise ValueError("modulus is reducible")

    @property
    def q(self) -> int:
        return self.p**self.e


class Field:
    """Arithmetic on base-p-encoded elements of F_{p^e}."""

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.p = spec.p
        self.e = spec.e
        self.q = spec.q
        self._mod = [c % spec.p for c in spec.modulus] if spec.e > 1 else None

    def check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise ValueError(f"field element {a} out of range 0..{self.q - 1}")
        return a

    def add(self, a: int, b: int) -> int:
        if self.e == 1:
            return (a + b) % self.p
        da, db = _poly_digits(a, self.p), _poly_digits(b, self.p)
        n = max(len(da), len(db))
        da += [0] * (n - len(da))
        db += [0] * (n - len(db))
        return _poly_int([(x + y) % self.p for x, y in zip(da, db)], self.p)

    def neg(self, a: int) -> int:
        if self.e == 1:
            return (-a) % self.p
        return _poly_int([(-c) % self.p for c in _poly_digits(a, self.p)], self.p)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.e == 1:
            return (a * b) % self.p
        return _poly_int(
            _poly_mulmod(_poly_digits(a, self.p), _poly_digits(b, self.p), self._mod, self.p),
            self.p,
        )

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        if self.e == 1:
            return pow(a, self.p - 2, self.p)
        return self.power(a, self.q - 2)

    def power(self, a: int, n: int) -> int:
        result = 1
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result


class MatrixGroup:
    """PGL_d(F_q) on canonical representatives (first nonzero entry 1)."""

    def __init__(self, field: Field, d: int):
        if d < 2:
            raise ValueError("d must be >= 2")
        self.field = field
        self.d = d

    def identity(self) -> Matrix:
        return tuple(
            tuple(1 if i == j else 0 for j in range(self.d)) for i in range(self.d)
        )

    def mul(self, a: Matrix, b: Matrix) -> Matrix:
        f = self.field
        d = self.d
        out = []
        for i in range(d):
            row = []
            for j in range(d):
                acc = 0
                for t in range(d):
                    acc = f.add(acc, f.mul(a[i][t], b[t][j]))
                row.append(acc)
            out.append(tuple(row))
        return self.canonicalize(tuple(out))

    def determinant(self, m: Matrix) -> int:
        f = self.field
        d = self.d
        rows = [list(r) for r in m]
        det = 1
        for col in range(d):
            pivot = next((r for r in range(col, d) if rows[r][col] != 0), None)
            if pivot is None:
                return 0
            if pivot != col:
                rows[col], rows[pivot] = rows[pivot], rows[col]
                det = f.neg(det)
            det = f.mul(det, rows[col][col])
            inv_p = f.inv(rows[col][col])
            for r in range(col + 1, d):
                factor = f.mul(rows[r][col], inv_p)
                if factor:
                    for c in range(col, d):
                        rows[r][c] = f.sub(rows[r][c], f.mul(factor, rows[col][c]))
        return det

    def inverse(self, m: Matrix) -> Matrix:
        f = self.field
        d = self.d
        aug = [list(m[i]) + [1 if i == j else 0 for j in range(d)] for i in range(d)]
        for col in range(d):
            pivot = next((r for r in range(col, d) if aug[r][col] != 0), None)
            if pivot is None:
                raise ValueError("matrix is singular")
            if pivot != col:
                aug[col], aug[pivot] = aug[pivot], aug[col]
            inv_p = f.inv(aug[col][col])
            aug[col] = [f.mul(x, inv_p) for x in aug[col]]
            for r in range(d):
                if r != col and aug[r][col]:
                    factor = aug[r][col]
                    aug[r] = [f.sub(x, f.mul(factor, y)) for x, y in zip(aug[r], aug[col])]
        return self.canonicalize(tuple(tuple(row[d:]) for row in aug))

    def canonicalize(self, m: Matrix) -> Matrix:
        """Scale so the first nonzero entry in row-major order is 1."""
        f = self.field
        lead = next((x for row in m for x in row if x != 0), None)
        if lead is None:
            raise ValueError("zero matrix")
        if lead == 1:
            return m
        s = f.inv(lead)
        return tuple(tuple(f.mul(s, x) for x in row) for row in m)

    def is_invertible(self, m: Matrix) -> bool:
        return self.determinant(m) != 0

    def dth_power_classes(self) -> set[int]:
        """Set of d-th powers in F_q^*; dets of PSL representatives land here."""
        return {self.field.power(a, self.d) for a in range(1, self.field.q)}


def pgl_order(d: int, q: int) -> int:
    """|PGL_d(F_q)| = prod_{i=0}^{d-1} (q^d - q^i) / (q - 1)."""
    total = 1
    for i in range(d):
        total *= q**d - q**i
    return total // (q - 1)


@dataclass
class GeneratorSet:
    """Projective generator matrices; symmetric means closed under inverse."""

    group: MatrixGroup
    matrices: list[Matrix]
    symmetric: bool = field(init=False)

    def __post_init__(self):
        if not self.matrices:
            raise ValueError("generator set is empty")
        canon = []
        for m in self.matrices:
            if not self.group.is_invertible(m):
                raise ValueError(f"generator is singular: {m}")
            canon.append(self.group.canonicalize(m))
        self.matrices = canon
        inv_counts = Counter(self.group.inverse(m) for m in self.matrices)
        self.symmetric = inv_counts == Counter(self.matrices)

    def symmetrized(self) -> "GeneratorSet":
        """Return a symmetric set by appending missing inverses."""
        if self.symmetric:
            return self
        have = Counter(self.matrices)
        need = Counter(self.group.inverse(m) for m in self.matrices)
        extra = []
        for m, c in need.items():
            missing = c - have.get(m, 0)
            extra.extend([m] * max(0, missing))
        return GeneratorSet(self.group, self.matrices + extra)


@dataclass(frozen=True)
class CayleyClosure:
    graph: RegularGraph
    order: int
    in_psl: bool
    vertex_matrices: list[Matrix]


def cayley_graph(gens: GeneratorSet, cap: int, auto_symmetrize: bool = False) -> CayleyClosure:
    """BFS closure of the generators from the identity (right multiplication).

    Vertex numbering is deterministic: each BFS layer is expanded in
    sorted order.  Raises if the closure exceeds `cap` vertices.  The
    returned graph has one neighbor slot per generator occurrence, so
    its degree is len(gens) counting multiplicity.
    """
    if auto_symmetrize:
        gens = gens.symmetrized()
    if not gens.symmetric:
        raise ValueError("generator set is not symmetric; pass auto_symmetrize=True to close it")
    group = gens.group
    identity = group.identity()
    index: dict[Matrix, int] = {identity: 0}
    frontier = [identity]
    elements = [identity]
    while frontier:
        new: set[Matrix] = set()
        for g in frontier:
            for s in gens.matrices:
                h = group.mul(g, s)
                if h not in index and h not in new:
                    new.add(h)
        if len(index) + len(new) > cap:
            raise RuntimeError(
                f"closure exceeded cap {cap}: {len(index)} found, frontier adds {len(new)}"
            )
        frontier = sorted(new)
        for h in frontier:
            index[h] = len(elements)
            elements.append(h)
    adj = [[index[group.mul(g, s)] for s in gens.matrices] for g in elements]
    graph = RegularGraph(adj, len(gens.matrices))
    powers = group.dth_power_classes()
    in_psl = all(group.determinant(g) in powers for g in elements)
    return CayleyClosure(graph=graph, order=len(elements), in_psl=in_psl, vertex_matrices=elements)


def enumerate_pgl(field: Field, d: int) -> set[Matrix]:
    """Brute-force enumeration of PGL_d(F_q) as canonical matrices.

    Exponential in d^2 log q; meant as an independent oracle at desk
    scale (q^{d^2} matrices are scanned).
    """
    group = MatrixGroup(field, d)
    q = field.q
    total = q ** (d * d)
    out: set[Matrix] = set()
    for code in range(total):
        entries = []
        c = code
        for _ in range(d * d):
            entries.append(c % q)
            c //= q
        m = tuple(tuple(entries[i * d : (i + 1) * d]) for i in range(d))
        if group.is_invertible(m):
            out.add(group.canonicalize(m))
    return out


# ---------------------------------------------------------------------------
# Generator file I/O


def load_generators(source: Union[str, os.PathLike, IO[str]]) -> GeneratorSet:
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    lines = [ln.strip() for ln in lines if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise ValueError("empty generator file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "gens":
        raise ValueError("line 1: expected header 'gens <d> <p> <e>'")
    d, p, e = int(head[1]), int(head[2]), int(head[3])
    body = lines[1:]
    modulus = None
    if e > 1:
        if not body or not body[0].startswith("modulus"):
            raise ValueError("line 2: extension field needs 'modulus c_0 ... c_e'")
        modulus = tuple(int(c) for c in body[0].split()[1:])
        body = body[1:]
    spec = FieldSpec(p, e, modulus)
    group = MatrixGroup(Field(spec), d)
    mats = []
    for ln in body:
        vals = [int(x) for x in ln.split()]
        if len(vals) != d * d:
            raise ValueError(f"expected {d * d} entries per matrix line, got {len(vals)}")
        for v in vals:
            group.field.check(v)
        mats.append(tuple(tuple(vals[i * d : (i + 1) * d]) for i in range(d)))
    return GeneratorSet(group, mats)


def save_generators(gens: GeneratorSet, path: Union[str, os.PathLike]):
    spec = gens.group.field.spec
    lines = [f"gens {gens.group.d} {spec.p} {spec.e}"]
    if spec.e > 1:
        lines.append("modulus " + " ".join(str(c) for c in spec.modulus))
    for m in gens.matrices:
        lines.append(" ".join(str(x) for row in m for x in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
