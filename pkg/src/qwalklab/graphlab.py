"""Finite-graph measurement: exact SRW evolution, TV mixing profiles,
cutoff detection, and spectral certification.

Graphs are k-regular with multi-edges allowed; adjacency is stored as
neighbor lists with multiplicity.  A self-loop occupies a single
neighbor slot (one line `u u` in the edge-list format adds u to its own
list once), so the degree always equals the list length.  Distribution
evolution runs in exact rationals by default on small instances and in
IEEE doubles (scipy sparse) on large ones; the mode is recorded in the
profile.  The lazy walk (stay probability 1/2) is only applied when
explicitly requested.

Edge-list format: line 1 `graph <n> <k> <directed|undirected>`, then one
`u v` pair per line (0-indexed, multi-edges repeated).  Coloring file:
one `v c` per line.
"""

from __future__ import annotations

import math
import os
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

Number = Union[Fraction, float]

EXACT_AUTO_CAP = 200_000  # n * horizon above which auto mode switches to floats


class GraphFormatError(ValueError):
    pass


def _dense_cap() -> int:
    return int(os.environ.get("QWALKLAB_DENSE_CAP", "4096"))


# ---------------------------------------------------------------------------
# Graph containers


class RegularGraph:
    """Undirected k-regular multigraph as symmetric neighbor lists."""

    directed = False

    def __init__(self, adjacency: Sequence[Sequence[int]], k: Optional[int] = None,
                 coloring: Optional[Sequence[int]] = None):
        self.adj = [list(nb) for nb in adjacency]
        self.n = len(self.adj)
        if k is None:
            if not self.adj:
                raise ValueError("empty graph")
            k = len(self.adj[0])
        self.k = k
        self.coloring = list(coloring) if coloring is not None else None
        self.validate()

    def validate(self):
        for v, nb in enumerate(self.adj):
            if len(nb) != self.k:
                raise ValueError(f"vertex {v} has degree {len(nb)}, expected {self.k}")
        counts: dict[tuple[int, int], int] = {}
        for u, nb in enumerate(self.adj):
            for v in nb:
                if not 0 <= v < self.n:
                    raise ValueError(f"vertex {u} has out-of-range neighbor {v}")
                if u != v:
                    counts[(u, v)] = counts.get((u, v), 0) + 1
        for (u, v), c in counts.items():
            if counts.get((v, u), 0) != c:
                raise ValueError(f"asymmetric multi-edge between {u} and {v}")
        if self.coloring is not None:
            if len(self.coloring) != self.n:
                raise ValueError("coloring length mismatch")
            m = max(self.coloring) + 1
            if set(self.coloring) != set(range(m)):
                raise ValueError("coloring must be surjective onto 0..m-1")

    def num_colors(self) -> int:
        return max(self.coloring) + 1 if self.coloring is not None else 1

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for u, nb in enumerate(self.adj):
            for v in nb:
                a[u, v] += 1
        return a

    def sparse_adjacency(self) -> sp.csr_matrix:
        rows, cols = [], []
        for u, nb in enumerate(self.adj):
            rows.extend([u] * len(nb))
            cols.extend(nb)
        data = np.ones(len(rows))
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def is_connected(self) -> bool:
        seen = [False] * self.n
        seen[0] = True
        queue = deque([0])
        count = 1
        while queue:
            u = queue.popleft()
            for v in self.adj[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    queue.append(v)
        return count == self.n

    def is_bipartite(self) -> bool:
        side = [-1] * self.n
        for s in range(self.n):
            if side[s] != -1:
                continue
            side[s] = 0
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for v in self.adj[u]:
                    if side[v] == -1:
                        side[v] = 1 - side[u]
                        queue.append(v)
                    elif side[v] == side[u]:
                        return False
        return True


class RegularDigraph:
    """Directed graph, k-out and k-in regular, as out-neighbor lists."""

    directed = True

    def __init__(self, out_neighbors: Sequence[Sequence[int]], k: Optional[int] = None):
        self.out = [list(nb) for nb in out_neighbors]
        self.n = len(self.out)
        if k is None:
            if not self.out:
                raise ValueError("empty digraph")
            k = len(self.out[0])
        self.k = k
        self.validate()
        self._rev = None

    def validate(self):
        indeg = [0] * self.n
        for v, nb in enumerate(self.out):
            if len(nb) != self.k:
                raise ValueError(f"vertex {v} has out-degree {len(nb)}, expected {self.k}")
            for w in nb:
                if not 0 <= w < self.n:
                    raise ValueError(f"vertex {v} has out-of-range neighbor {w}")
                indeg[w] += 1
        for v, dg in enumerate(indeg):
            if dg != self.k:
                raise ValueError(f"vertex {v} has in-degree {dg}, expected {self.k}")

    def reverse_adjacency(self) -> list[list[int]]:
        if self._rev is None:
            rev = [[] for _ in range(self.n)]
            for u, nb in enumerate(self.out):
                for v in nb:
                    rev[v].append(u)
            self._rev = rev
        return self._rev

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for u, nb in enumerate(self.out):
            for v in nb:
                a[u, v] += 1
        return a

    def sparse_adjacency(self) -> sp.csr_matrix:
        rows, cols = [], []
        for u, nb in enumerate(self.out):
            rows.extend([u] * len(nb))
            cols.extend(nb)
        return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n))

    def is_strongly_connected(self) -> bool:
        for adj in (self.out, self.reverse_adjacency()):
            seen = [False] * self.n
            seen[0] = True
            queue = deque([0])
            count = 1
            while queue:
                u = queue.popleft()
                for v in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        count += 1
                        queue.append(v)
            if count != self.n:
                return False
        return True


Graph = Union[RegularGraph, RegularDigraph]


# ---------------------------------------------------------------------------
# File I/O


def load_graph(source: Union[str, os.PathLike, IO[str]]) -> Graph:
    """Parse the edge-list format; validates regularity and reports the
    first offending vertex on violation."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    if not lines:
        raise GraphFormatError("line 1: empty graph file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "graph":
        raise GraphFormatError("line 1: expected header 'graph <n> <k> <directed|undirected>'")
    try:
        n, k = int(head[1]), int(head[2])
    except ValueError:
        raise GraphFormatError("line 1: n and k must be integers") from None
    if head[3] not in ("directed", "undirected"):
        raise GraphFormatError(f"line 1: unknown orientation {head[3]!r}")
    directed = head[3] == "directed"
    adj: list[list[int]] = [[] for _ in range(n)]
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected 'u v'")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: vertex ids must be integers") from None
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"line {lineno}: vertex id out of range 0..{n - 1}")
        if directed:
            adj[u].append(v)
        elif u == v:
            adj[u].append(u)  # self-loop: one neighbor slot
        else:
            adj[u].append(v)
            adj[v].append(u)
    try:
        return RegularDigraph(adj, k) if directed else RegularGraph(adj, k)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None


def save_graph(g: Graph, path: Union[str, os.PathLike]):
    """Write the edge-list format (each undirected edge listed once)."""
    lines = [f"graph {g.n} {g.k} {'directed' if g.directed else 'undirected'}"]
    if g.directed:
        for u, nb in enumerate(g.out):
            for v in nb:
                lines.append(f"{u} {v}")
    else:
        emitted: dict[tuple[int, int], int] = {}
        for u, nb in enumerate(g.adj):
            for v in nb:
                key = (u, v) if u <= v else (v, u)
                emitted[key] = emitted.get(key, 0) + 1
        for (u, v), c in sorted(emitted.items()):
            copies = c if u == v else c // 2
            for _ in range(copies):
                lines.append(f"{u} {v}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_coloring(source: Union[str, os.PathLike, IO[str]], n: int) -> list[int]:
    """Parse a `v c` per line coloring file; must cover all n vertices."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    col = [-1] * n
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected 'v c'")
        v, c = int(parts[0]), int(parts[1])
        if not 0 <= v < n:
            raise GraphFormatError(f"line {lineno}: vertex id out of range")
        col[v] = c
    if any(c < 0 for c in col):
        missing = col.index(-1)
        raise GraphFormatError(f"vertex {missing} has no color")
    m = max(col) + 1
    if set(col) != set(range(m)):
        raise GraphFormatError("coloring must be surjective onto 0..m-1")
    return col


# ---------------------------------------------------------------------------
# SRW evolution


def _step_exact(g: Graph, mu: list[Fraction], lazy: bool) -> list[Fraction]:
    k = Fraction(g.k)
    incoming = g.reverse_adjacency() if g.directed else g.adj
    new = [sum((mu[u] for u in incoming[w]), Fraction(0)) / k for w in range(g.n)]
    if lazy:
        new = [(a + b) / 2 for a, b in zip(new, mu)]
    return new


def _transition_matrix(g: Graph, lazy: bool) -> sp.csr_matrix:
    p = g.sparse_adjacency().T.tocsr() * (1.0 / g.k)
    if lazy:
        p = 0.5 * (p + sp.identity(g.n, format="csr"))
    return p.tocsr()


def evolve_srw(g: Graph, v0: int, horizon: int, mode: str = "exact", lazy: bool = False):
    """Distributions mu^0..mu^horizon of SRW started at v0.

    Exact mode returns lists of Fractions (each summing to exactly 1);
    float mode returns a (horizon+1, n) float array.  Exact mode stores
    all horizon+1 distributions, so keep it to desk-size instances.
    """
    if not 0 <= v0 < g.n:
        raise ValueError(f"start vertex {v0} out of range")
    if mode == "exact":
        mu = [Fraction(0)] * g.n
        mu[v0] = Fraction(1)
        out = [mu]
        for _ in range(horizon):
            mu = _step_exact(g, mu, lazy)
            out.append(mu)
        return out
    if mode == "float":
        pt = _transition_matrix(g, lazy)
        mu = np.zeros(g.n)
        mu[v0] = 1.0
        out = np.empty((horizon + 1, g.n))
        out[0] = mu
        for t in range(1, horizon + 1):
            mu = pt @ mu
            out[t] = mu
        return out
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# TV profiles and cutoff detection


@dataclass
class MixingProfile:
    """TV distance to uniform over time, split along the color decomposition.

    Without a coloring the trivial component is the constants, so
    tv_trivial is 0 and tv_orth equals tv_total.  t_mix maps each
    requested epsilon to the first time the (strict) threshold is met,
    or None if the horizon was exhausted first.
    """

    times: list[int]
    tv_total: list[Number]
    tv_trivial: list[Number]
    tv_orth: list[Number]
    t_mix: dict[float, Optional[int]]
    mode: str
    lazy: bool


def _tv_split_exact(mu, coloring, class_size, n):
    pi = Fraction(1, n)
    tv = sum((abs(m - pi) for m in mu), Fraction(0)) / 2
    if coloring is None:
        return tv, Fraction(0), tv
    sums: dict[int, Fraction] = {}
    for v, m in enumerate(mu):
        sums[coloring[v]] = sums.get(coloring[v], Fraction(0)) + m
    proj = [sums[coloring[v]] / class_size[coloring[v]] for v in range(n)]
    tv_triv = sum((abs(p - pi) for p in proj), Fraction(0)) / 2
    tv_orth = sum((abs(m - p) for m, p in zip(mu, proj)), Fraction(0)) / 2
    return tv, tv_triv, tv_orth


def _tv_split_float(mu, coloring, class_size, n):
    pi = 1.0 / n
    tv = 0.5 * float(np.abs(mu - pi).sum())
    if coloring is None:
        return tv, 0.0, tv
    sums = np.bincount(coloring, weights=mu, minlength=len(class_size))
    proj = (sums / class_size)[coloring]
    tv_triv = 0.5 * float(np.abs(proj - pi).sum())
    tv_orth = 0.5 * float(np.abs(mu - proj).sum())
    return tv, tv_triv, tv_orth


def tv_profile(
    g: Graph,
    v0: int,
    horizon: int,
    eps: Sequence[float] = (),
    lazy: bool = False,
    mode: str = "auto",
    worst: bool = False,
) -> MixingProfile:
    """TV mixing profile of SRW from v0 (or the worst start when `worst`).

    t_mix uses the strict definition: first t with tv(t) < eps.  Auto
    mode evolves exactly while n*horizon stays small and in doubles
    beyond that.
    """
    connected = g.is_strongly_connected() if g.directed else g.is_connected()
    if not connected:
        raise ValueError("graph is not connected")
    if mode == "auto":
        mode = "exact" if g.n * max(horizon, 1) <= EXACT_AUTO_CAP else "float"
    starts = range(g.n) if worst else [v0]
    has_coloring = not g.directed and g.coloring is not None
    col_arr = np.array(g.coloring) if has_coloring else None
    col_list = list(g.coloring) if has_coloring else None
    class_size_int = None
    class_size_float = None
    if has_coloring:
        class_size_int = [g.coloring.count(c) for c in range(g.num_colors())]
        class_size_float = np.array(class_size_int, dtype=float)

    exact = mode == "exact"
    per_t_total: list[Optional[Number]] = [None] * (horizon + 1)
    per_t_triv: list[Optional[Number]] = [None] * (horizon + 1)
    per_t_orth: list[Optional[Number]] = [None] * (horizon + 1)
    for s in starts:
        if exact:
            mu = [Fraction(0)] * g.n
            mu[s] = Fraction(1)
        else:
            pt = _transition_matrix(g, lazy)
            mu = np.zeros(g.n)
            mu[s] = 1.0
        for t in range(horizon + 1):
            if exact:
                tv, tvt, tvo = _tv_split_exact(mu, col_list, class_size_int, g.n)
            else:
                tv, tvt, tvo = _tv_split_float(mu, col_arr, class_size_float, g.n)
            if per_t_total[t] is None or tv > per_t_total[t]:
                per_t_total[t] = tv
                per_t_triv[t] = tvt
                per_t_orth[t] = tvo
            if t < horizon:
                mu = _step_exact(g, mu, lazy) if exact else pt @ mu
    t_mix: dict[float, Optional[int]] = {}
    for e in eps:
        t_mix[e] = next((t for t, tv in enumerate(per_t_total) if tv < e), None)
    return MixingProfile(
        times=list(range(horizon + 1)),
        tv_total=per_t_total,
        tv_trivial=per_t_triv,
        tv_orth=per_t_orth,
        t_mix=t_mix,
        mode=mode,
        lazy=lazy,
    )


def mixing_times(g: Graph, v0: int, eps: Sequence[float], lazy: bool = False,
                 max_steps: int = 2_000_000) -> dict[float, Optional[int]]:
    """First (strict) crossing times of each threshold, evolved in doubles
    until the smallest threshold is crossed or max_steps is reached."""
    connected = g.is_strongly_connected() if g.directed else g.is_connected()
    if not connected:
        raise ValueError("graph is not connected")
    pt = _transition_matrix(g, lazy)
    mu = np.zeros(g.n)
    mu[v0] = 1.0
    pi = 1.0 / g.n
    remaining = sorted(set(eps), reverse=True)
    found: dict[float, Optional[int]] = {}
    t = 0
    while remaining and t <= max_steps:
        tv = 0.5 * float(np.abs(mu - pi).sum())
        while remaining and tv < remaining[0]:
            found[remaining.pop(0)] = t
        if remaining:
            mu = pt @ mu
            t += 1
    for e in remaining:
        found[e] = None
    return found


def cutoff_ratio(family: Sequence[tuple[Graph, int]], eps: float, lazy: bool = False,
                 max_steps: int = 2_000_000) -> list[float]:
    """t_mix(eps) / t_mix(1-eps) per family member.

    Ratios decreasing toward 1 along a growing family is the operational
    signature of cutoff.  A zero t_mix(1-eps) yields math.inf.
    """
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    ratios = []
    for g, v0 in family:
        tm = mixing_times(g, v0, [eps, 1 - eps], lazy=lazy, max_steps=max_steps)
        lo, hi = tm[eps], tm[1 - eps]
        if lo is None or hi is None:
            raise RuntimeError(f"mixing did not occur within {max_steps} steps")
        ratios.append(math.inf if hi == 0 else lo / hi)
    return ratios


# ---------------------------------------------------------------------------
# Spectral certification


@dataclass
class SpectralReport:
    """Adjacency spectrum with the trivial part split off.

    For graphs the trivial eigenvalues are k, -k when bipartite, and the
    color-quotient eigenvalues when an (equitable) coloring is present;
    certification checks the rest against [-2 sqrt(k-1), 2 sqrt(k-1)].
    For digraphs the trivial eigenvalues are those of modulus k and the
    bound is |z| <= sqrt(k).
    """

    n: int
    k: int
    eigenvalues: np.ndarray
    trivial_count: int
    lambda_nontrivial: float
    bound: float
    is_ramanujan: bool
    method: str


def _quotient_matrix(g: RegularGraph) -> np.ndarray:
    m = g.num_colors()
    q = np.zeros((m, m))
    counts = np.zeros(m)
    for u, nb in enumerate(g.adj):
        cu = g.coloring[u]
        counts[cu] += 1
        for v in nb:
            q[cu, g.coloring[v]] += 1
    per_vertex = np.zeros((m, m))
    for u, nb in enumerate(g.adj):
        cu = g.coloring[u]
        row = np.zeros(m)
        for v in nb:
            row[g.coloring[v]] += 1
        if not np.array_equal(row, per_vertex[cu]) and per_vertex[cu].any():
            raise ValueError("coloring is not equitable; cannot split trivial spectrum")
        per_vertex[cu] = row
    return per_vertex


def _remove_nearest(values: list[float], target: float, tol: float) -> bool:
    best, best_i = None, None
    for i, v in enumerate(values):
        d = abs(v - target)
        if best is None or d < best:
            best, best_i = d, i
    if best is not None and best <= tol:
        values.pop(best_i)
        return True
    return False


def spectral_report(g: Graph, cap: Optional[int] = None, tol_factor: float = 1e-9) -> SpectralReport:
    """Eigenvalue report and Ramanujan certification.

    Dense eigensolve up to `cap` vertices (default from the environment
    variable QWALKLAB_DENSE_CAP, 4096); beyond the cap, an iterative
    extremal-eigenvalue solve with residual tolerance 1e-10 (graphs
    only).  Matching and bound slack use tol = tol_factor * k.
    """
    cap = _dense_cap() if cap is None else cap
    tol = tol_factor * g.k
    if g.directed:
        if g.n > cap:
            raise ValueError(f"digraph spectral report needs n <= cap ({cap})")
        eig = np.linalg.eigvals(g.adjacency_matrix())
        mods = np.abs(eig)
        trivial = mods >= g.k - tol
        nontrivial = mods[~trivial]
        lam = float(nontrivial.max()) if nontrivial.size else 0.0
        bound = math.sqrt(g.k)
        return SpectralReport(
            n=g.n, k=g.k, eigenvalues=eig, trivial_count=int(trivial.sum()),
            lambda_nontrivial=lam, bound=bound, is_ramanujan=bool(lam <= bound + tol),
            method="dense",
        )
    trivial_targets = [float(g.k)]
    if g.coloring is not None:
        qeig = sorted(np.linalg.eigvalsh(_quotient_matrix(g)).tolist())
        # the quotient spectrum contains k (and -k when bipartite) already
        trivial_targets = [float(v) for v in qeig]
    elif g.is_bipartite():
        trivial_targets.append(float(-g.k))
    if g.n <= cap:
        eig = np.linalg.eigvalsh(g.adjacency_matrix())
        values = eig.tolist()
        method = "dense"
    else:
        a = g.sparse_adjacency()
        m = min(g.n - 2, max(8, 2 * len(trivial_targets) + 2))
        top = spla.eigsh(a, k=m, which="LA", tol=1e-10, return_eigenvectors=False)
        bot = spla.eigsh(a, k=m, which="SA", tol=1e-10, return_eigenvectors=False)
        values = sorted(set(np.concatenate([top, bot]).tolist()))
        eig = np.array(values)
        method = "iterative"
    removed = 0
    for tgt in trivial_targets:
        if _remove_nearest(values, tgt, max(tol, 1e-8 * g.k)):
            removed += 1
    lam = max((abs(v) for v in values), default=0.0)
    bound = 2 * math.sqrt(g.k - 1)
    return SpectralReport(
        n=g.n, k=g.k, eigenvalues=eig, trivial_count=removed,
        lambda_nontrivial=lam, bound=bound, is_ramanujan=bool(lam <= bound + tol),
        method=method,
    )


# ---------------------------------------------------------------------------
# Operator norm bounds and collision-freeness


def normal_bound(ell: int, r: int, k: int, lam: float) -> float:
    """Norm bound C(ell+r-1, r-1) k^{r-1} lam^{ell-r+1} for an r-normal
    k-regular digraph with nontrivial spectral radius lam (log-space)."""
    if ell < 1 or r < 1 or k < 1 or lam < 0:
        raise ValueError("need ell >= 1, r >= 1, k >= 1, lam >= 0")
    e = ell - r + 1
    if lam == 0:
        return 0.0 if e > 0 else math.inf if e < 0 else math.exp(
            _log_comb(ell + r - 1, r - 1) + (r - 1) * math.log(k)
        )
    log_val = _log_comb(ell + r - 1, r - 1) + (r - 1) * math.log(k) + e * math.log(lam)
    return math.exp(log_val)


def ram_digraph_bound(ell: int, r: int, k: int) -> float:
    """Norm bound (ell+r)^r k^{(r+ell)/2} for r-normal Ramanujan digraphs."""
    if ell < 1 or r < 1 or k < 1:
        raise ValueError("need ell >= 1, r >= 1, k >= 1")
    return math.exp(r * math.log(ell + r) + 0.5 * (r + ell) * math.log(k))


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def collision_free_check(dg: RegularDigraph, horizon: int) -> tuple[bool, Optional[tuple[int, int]]]:
    """Walk-count collision check up to the given length horizon.

    Counts directed walks of each length 1..horizon between all ordered
    pairs with counters saturating at 2; returns (False, first ordered
    pair) as soon as some pair accumulates two walks.  Exact for
    acyclic/tree-like local digraphs and conservative otherwise (a walk
    revisiting a pair counts against it).
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    a = np.zeros((dg.n, dg.n), dtype=np.int64)
    for u, nb in enumerate(dg.out):
        for v in nb:
            a[u, v] += 1
    a = np.minimum(a, 2)
    walks = a.copy()
    total = a.copy()
    for _ in range(2, horizon + 1):
        walks = np.minimum(walks @ a, 2)
        total = np.minimum(total + walks, 2)
        if not walks.any():
            break
    bad = np.argwhere(total >= 2)
    if bad.size:
        u, v = bad[0]
        return False, (int(u), int(v))
    return True, None
