"""Shared fixtures: the two-source butterfly-like example and random DAGs."""

import random

from robustnc.field import GF
from robustnc.linear_code import LinearNetworkCode
from robustnc.network import Network, validate

EX_VERTICES = ["s1", "s2", "u", "v", "a", "b", "c", "t"]
EX_EDGES = [("e1", "s1", "a"), ("e2", "s1", "u"), ("e3", "s1", "b"), ("e4", "s2", "u"),
            ("e5", "s2", "b"), ("e6", "s2", "c"), ("e7", "u", "v"), ("e8", "v", "a"),
            ("e9", "v", "c"), ("e10", "a", "t"), ("e11", "b", "t"), ("e12", "c", "t")]


def example_net() -> Network:
    return validate(Network.build(EX_VERTICES, EX_EDGES, ["s1", "s2"], "t"))


def example_code(F, c1=None, c2=None) -> LinearNetworkCode:
    """Unit transfer coefficients; odd characteristic uses (-1,2,1) and (1,1,1)."""
    net = example_net()
    if c1 is None:
        if F.p == 2:
            w = F.primitive
            c1, c2 = (w, F.add(1, w), 1), (1, 1, w)
        else:
            c1, c2 = (-1, 2, 1), (1, 1, 1)
    src = {(0, 0, 0): c1[0], (0, 0, 1): c1[1], (0, 0, 2): c1[2],
           (1, 0, 3): c2[0], (1, 0, 4): c2[1], (1, 0, 5): c2[2]}
    tr = {(d, e): 1 for d, a in enumerate(net.edges) for e, b in enumerate(net.edges) if a.head == b.tail}
    return LinearNetworkCode.from_coefficients(net, F, 1, src, tr)


def three_layer(Z, names=("D", "W", "M")) -> Network:
    """Sources D_j, relays W_i, sink M; Z[i] lists the sources feeding relay i."""
    K = 1 + max(j for z in Z for j in z)
    V = [f"D{j}" for j in range(K)] + [f"W{i}" for i in range(len(Z))] + ["M"]
    E = [(f"D{j}W{i}", f"D{j}", f"W{i}") for i, z in enumerate(Z) for j in z]
    E += [(f"W{i}M", f"W{i}", "M") for i in range(len(Z))]
    return validate(Network.build(V, E, [f"D{j}" for j in range(K)], "M"))


def random_dag(rng: random.Random, n_nodes=(5, 8), n_edges=(6, 14), n_sources=(2, 3), min_h=1):
    """Random DAG whose sources all reach the sink and have min-cut at least min_h.

    Nodes are ordered; edges go forward.  Sinks and sources are fixed ends.
    """
    from robustnc.network import min_source_cut
    from robustnc.errors import NetworkError
    while True:
        n = rng.randint(*n_nodes)
        s = rng.randint(*n_sources)
        if n < s + 2:
            continue
        m = rng.randint(*n_edges)
        V = [f"v{i}" for i in range(n)]
        sources = V[:s]
        sink = V[-1]
        E = []
        for idx in range(m):
            a = rng.randrange(n - 1)
            lo = max(a + 1, s)
            b = rng.randrange(lo, n)
            E.append((f"x{idx}", V[a], V[b]))
        # drop isolated non-terminals
        used = {t for _, t, _ in E} | {h for _, _, h in E} | set(sources) | {sink}
        V2 = [v for v in V if v in used]
        try:
            net = validate(Network.build(V2, E, sources, sink))
        except NetworkError:
            continue
        if min_source_cut(net) >= min_h:
            return net


def random_code(net: Network, F, k: int, rng: random.Random, density: float = 1.0) -> LinearNetworkCode:
    """Random local coefficients on every permitted position."""
    src, tr = {}, {}
    for i, s in enumerate(net.sources):
        for e in net.out_edges(s):
            for j in range(k):
                if rng.random() < density:
                    src[(i, j, e)] = rng.randrange(F.q)
    for d, a in enumerate(net.edges):
        for e in net.out_edges(a.head):
            if rng.random() < density:
                tr[(d, e)] = rng.randrange(F.q)
    return LinearNetworkCode.from_coefficients(net, F, k, src, tr)
