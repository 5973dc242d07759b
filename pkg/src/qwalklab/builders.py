"""Constructors for the classical baseline graphs used in experiments."""

from __future__ import annotations

import numpy as np

from .graphlab import RegularDigraph, RegularGraph


def cycle_graph(n: int, coloring_parity: bool = False) -> RegularGraph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    adj = [[(i - 1) % n, (i + 1) % n] for i in range(n)]
    coloring = [i % 2 for i in range(n)] if coloring_parity else None
    if coloring_parity and n % 2:
        raise ValueError("parity coloring needs even n")
    return RegularGraph(adj, 2, coloring=coloring)


def complete_graph(n: int) -> RegularGraph:
    adj = [[j for j in range(n) if j != i] for i in range(n)]
    return RegularGraph(adj, n - 1)


def hypercube_graph(m: int) -> RegularGraph:
    n = 1 << m
    adj = [[v ^ (1 << b) for b in range(m)] for v in range(n)]
    return RegularGraph(adj, m)


def petersen_graph() -> RegularGraph:
    # outer 5-cycle 0..4, inner pentagram 5..9, spokes i -- i+5
    adj = [[] for _ in range(10)]
    for i in range(5):
        adj[i].extend([(i + 1) % 5, (i - 1) % 5, i + 5])
        adj[i + 5].extend([5 + (i + 2) % 5, 5 + (i - 2) % 5, i])
    return RegularGraph(adj, 3)


def directed_cycle(n: int) -> RegularDigraph:
    return RegularDigraph([[(i + 1) % n] for i in range(n)], 1)


def de_bruijn_digraph(k: int, m: int) -> RegularDigraph:
    """k-regular de Bruijn digraph on k^m vertices (k-in and k-out)."""
    n = k**m
    out = [[(v * k + a) % n for a in range(k)] for v in range(n)]
    return RegularDigraph(out, k)


def bottlenecked_cubic_graph(n: int, path_len: int, seed: int) -> RegularGraph:
    """3-regular multigraph: a random cubic block with a planted long path.

    The random block is a shuffled Hamiltonian cycle plus a random
    perfect matching; one matching edge is rerouted through a path of
    path_len extra vertices whose alternate edges are doubled to keep
    the graph cubic.  The long path is a bottleneck, so the graph is far
    from an expander.
    """
    if path_len % 2 or path_len < 2:
        raise ValueError("path_len must be even and >= 2")
    m = n - path_len
    if m < 8 or m % 2:
        raise ValueError("need an even random block of at least 8 vertices")
    rng = np.random.Generator(np.random.Philox(key=seed))
    order = rng.permutation(m)
    adj = [[] for _ in range(n)]
    for i in range(m):
        u, v = int(order[i]), int(order[(i + 1) % m])
        adj[u].append(v)
        adj[v].append(u)
    pairing = rng.permutation(m)
    matching = [(int(pairing[2 * i]), int(pairing[2 * i + 1])) for i in range(m // 2)]
    for u, v in matching[1:]:
        adj[u].append(v)
        adj[v].append(u)
    # reroute the first matching edge through the planted path
    a, b = matching[0]
    path = list(range(m, n))
    chain = [a] + path + [b]
    for i in range(len(chain) - 1):
        u, v = chain[i], chain[i + 1]
        adj[u].append(v)
        adj[v].append(u)
        if i % 2 == 1:  # double every other internal edge to restore degree 3
            adj[u].append(v)
            adj[v].append(u)
    return RegularGraph(adj, 3)
