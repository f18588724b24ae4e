"""Directed acyclic multigraphs with designated sources and a sink.

Edge order as given defines the canonical edge index used by every matrix.
All capacities are unit; parallel edges are kept distinct by id.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

from .errors import FlowError, NetworkError
from .field import FieldMatrix


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str


@dataclass(frozen=True, eq=False)
class Network:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    sources: tuple[str, ...]
    sinks: tuple[str, ...]

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (self.vertices, self.edges, self.sources, self.sinks) == (
            other.vertices, other.edges, other.sources, other.sinks)

    def __hash__(self):
        return hash((self.vertices, self.edges, self.sources, self.sinks))

    @classmethod
    def build(cls, vertices: Iterable[str], edges: Iterable, sources: Iterable[str], sink) -> "Network":
        """Convenience constructor; edges may be Edge objects or (id, tail, head) triples."""
        es = []
        for e in edges:
            if isinstance(e, Edge):
                es.append(e)
            elif isinstance(e, dict):
                es.append(Edge(str(e["id"]), str(e["tail"]), str(e["head"])))
            else:
                eid, t, h = e
                es.append(Edge(str(eid), str(t), str(h)))
        sinks = (sink,) if isinstance(sink, str) else tuple(sink)
        return cls(tuple(vertices), tuple(es), tuple(sources), sinks)

    # -- structure ----------------------------------------------------------

    @property
    def sink(self) -> str:
        if len(self.sinks) != 1:
            raise NetworkError(f"network has {len(self.sinks)} sinks, expected one")
        return self.sinks[0]

    @property
    def s(self) -> int:
        return len(self.sources)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_index(self) -> dict[str, int]:
        return {e.id: i for i, e in enumerate(self.edges)}

    @cached_property
    def _in(self) -> dict[str, tuple[int, ...]]:
        d: dict[str, list[int]] = {v: [] for v in self.vertices}
        for i, e in enumerate(self.edges):
            d.setdefault(e.head, []).append(i)
        return {v: tuple(x) for v, x in d.items()}

    @cached_property
    def _out(self) -> dict[str, tuple[int, ...]]:
        d: dict[str, list[int]] = {v: [] for v in self.vertices}
        for i, e in enumerate(self.edges):
            d.setdefault(e.tail, []).append(i)
        return {v: tuple(x) for v, x in d.items()}

    def in_edges(self, v: str) -> tuple[int, ...]:
        """Indices of edges entering v, in canonical order."""
        return self._in.get(v, ())

    def out_edges(self, v: str) -> tuple[int, ...]:
        return self._out.get(v, ())

    def index_of(self, edge_id: str) -> int:
        try:
            return self.edge_index[edge_id]
        except KeyError:
            raise NetworkError(f"unknown edge id {edge_id!r}") from None

    def indices_of(self, ids: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.index_of(e) for e in ids)

    @cached_property
    def topo_order(self) -> tuple[str, ...]:
        indeg = {v: 0 for v in self.vertices}
        for e in self.edges:
            indeg[e.head] += 1
        ready = deque(v for v in self.vertices if indeg[v] == 0)
        order = []
        while ready:
            v = ready.popleft()
            order.append(v)
            for i in self.out_edges(v):
                h = self.edges[i].head
                indeg[h] -= 1
                if indeg[h] == 0:
                    ready.append(h)
        if len(order) != len(self.vertices):
            raise NetworkError("cycle detected")
        return tuple(order)

    @cached_property
    def edge_topo_order(self) -> tuple[int, ...]:
        """Edge indices sorted by tail position in topological order, ties by file order."""
        pos = {v: i for i, v in enumerate(self.topo_order)}
        return tuple(sorted(range(len(self.edges)), key=lambda i: (pos[self.edges[i].tail], i)))

    @cached_property
    def sink_edges(self) -> tuple[int, ...]:
        return self.in_edges(self.sink)

    def reaches(self, starts: Iterable[str], removed: Iterable[int] = ()) -> set[str]:
        """Vertices reachable from ``starts`` after deleting edge indices ``removed``."""
        gone = set(removed)
        seen = set(starts)
        stack = list(seen)
        while stack:
            v = stack.pop()
            for i in self.out_edges(v):
                if i in gone:
                    continue
                h = self.edges[i].head
                if h not in seen:
                    seen.add(h)
                    stack.append(h)
        return seen

    def to_dict(self) -> dict:
        out = {
            "vertices": list(self.vertices),
            "edges": [{"id": e.id, "tail": e.tail, "head": e.head} for e in self.edges],
            "sources": list(self.sources),
        }
        out["sink"] = self.sinks[0] if len(self.sinks) == 1 else list(self.sinks)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Network":
        try:
            return cls.build(d["vertices"], d["edges"], d["sources"], d["sink"])
        except (KeyError, TypeError, ValueError) as exc:
            raise NetworkError(f"malformed network description: {exc}") from None


def validate(net: Network) -> Network:
    """Check every structural invariant of a single-sink computing network."""
    if len(set(net.vertices)) != len(net.vertices):
        raise NetworkError("duplicate vertex id")
    vs = set(net.vertices)
    ids = [e.id for e in net.edges]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise NetworkError(f"duplicate edge id {dup!r}")
    for e in net.edges:
        if e.tail not in vs or e.head not in vs:
            raise NetworkError(f"edge {e.id!r} references an unknown vertex")
        if e.tail == e.head:
            raise NetworkError("cycle detected (self-loop)")
    if len(net.sinks) != 1:
        raise NetworkError("exactly one sink required")
    gamma = net.sink
    if gamma not in vs:
        raise NetworkError("sink is not a vertex")
    if not net.sources:
        raise NetworkError("at least one source required")
    if len(set(net.sources)) != len(net.sources):
        raise NetworkError("duplicate source")
    for s in net.sources:
        if s not in vs:
            raise NetworkError(f"source {s!r} is not a vertex")
        if s == gamma:
            raise NetworkError("sink cannot be a source")
        if net.in_edges(s):
            raise NetworkError(f"source {s!r} has an incoming edge")
    net.topo_order  # raises on cycles
    if net.out_edges(gamma):
        raise NetworkError("sink has an outgoing edge")
    # every non-sink vertex must reach the sink: search backwards from it
    back = {gamma}
    stack = [gamma]
    while stack:
        v = stack.pop()
        for i in net.in_edges(v):
            t = net.edges[i].tail
            if t not in back:
                back.add(t)
                stack.append(t)
    missing = [v for v in net.vertices if v not in back]
    if missing:
        raise NetworkError(f"unreachable sink from vertex {missing[0]!r}")
    return net


# ---------------------------------------------------------------------------
# Unit-capacity max-flow (BFS augmenting paths)
# ---------------------------------------------------------------------------

@dataclass
class FlowResult:
    value: int
    flow: list[int]          # 0/1 per edge index
    source_side: set[str]    # residual-reachable vertices from the sources

    def cut(self, net: Network) -> tuple[int, ...]:
        S = self.source_side
        return tuple(i for i, e in enumerate(net.edges) if e.tail in S and e.head not in S)


def max_flow(net: Network, starts: Iterable[str], target: str) -> FlowResult:
    """Unit-capacity max-flow from a vertex set (infinite super-source) to ``target``."""
    starts = set(starts)
    flow = [0] * len(net.edges)
    value = 0
    if target in starts:
        raise FlowError("target inside the source set")
    while True:
        # BFS in the residual graph
        parent: dict[str, tuple[int, int] | None] = {v: None for v in starts}
        queue = deque(starts)
        found = False
        while queue and not found:
            v = queue.popleft()
            for i in net.out_edges(v):
                if flow[i] == 0:
                    h = net.edges[i].head
                    if h not in parent:
                        parent[h] = (i, +1)
                        if h == target:
                            found = True
                            break
                        queue.append(h)
            if found:
                break
            for i in net.in_edges(v):
                if flow[i] == 1:
                    t = net.edges[i].tail
                    if t not in parent:
                        parent[t] = (i, -1)
                        queue.append(t)
        if not found:
            return FlowResult(value, flow, set(parent))
        v = target
        while parent[v] is not None:
            i, d = parent[v]
            if d > 0:
                flow[i] = 1
                v = net.edges[i].tail
            else:
                flow[i] = 0
                v = net.edges[i].head
        value += 1


@dataclass(frozen=True)
class CutReport:
    value: int
    cut: tuple[int, ...]           # edge indices
    cut_ids: tuple[str, ...]
    separated_sources: tuple[str, ...]   # I_C

    @property
    def size(self) -> int:
        return len(self.cut)


def separated_sources(net: Network, cut: Iterable[int]) -> tuple[str, ...]:
    """I_C: sources with no path to the sink after deleting ``cut``."""
    gamma = net.sink
    return tuple(s for s in net.sources if gamma not in net.reaches([s], cut))


def min_cut(net: Network, starts: Iterable[str], target: str | None = None) -> CutReport:
    starts = list(starts)
    if not starts:
        raise FlowError("empty source set")
    target = net.sink if target is None else target
    for v in starts:
        if target not in net.reaches([v]):
            raise FlowError(f"{target!r} is unreachable from {v!r}")
    res = max_flow(net, starts, target)
    cut = res.cut(net)
    if len(cut) != res.value:
        raise FlowError("max-flow/min-cut mismatch")
    sep = separated_sources(net, cut) if len(net.sinks) == 1 and target == net.sink else ()
    return CutReport(res.value, cut, tuple(net.edges[i].id for i in cut), sep)


def mincut_value(net: Network, starts: Iterable[str], target: str | None = None) -> int:
    target = net.sink if target is None else target
    return max_flow(net, starts, target).value


def source_subsets(net: Network):
    """Nonempty subsets of source positions, smallest first."""
    s = net.s
    for r in range(1, s + 1):
        yield from combinations(range(s), r)


@dataclass(frozen=True)
class CutQuantities:
    cutset_rate_bound: Fraction
    singleton_bound: int
    delta: int
    subset_mincuts: dict


def cut_quantities(net: Network, T: FieldMatrix, k: int) -> CutQuantities:
    """Cut-set rate bound, Singleton-like bound and delta, minimised over source subsets."""
    if T.nrows != net.s:
        raise NetworkError(f"target matrix has {T.nrows} rows for {net.s} sources")
    rate = None
    singleton = None
    delta = None
    mcs = {}
    for I in source_subsets(net):
        mc = mincut_value(net, [net.sources[i] for i in I])
        mcs[I] = mc
        r = T.select_rows(I).rank()
        if r > 0:
            val = Fraction(mc, r)
            rate = val if rate is None else min(rate, val)
        sb = mc - k * r + 1
        singleton = sb if singleton is None else min(singleton, sb)
        d = mc - k * len(I)
        delta = d if delta is None else min(delta, d)
    return CutQuantities(rate, singleton, delta, mcs)


def min_source_cut(net: Network) -> int:
    """min over cuts of |C| = min over single sources of mincut(sigma_i, gamma)."""
    return min(mincut_value(net, [s]) for s in net.sources)


def reverse(net: Network) -> Network:
    """Reverse every edge; the sink becomes the unique source, sources become sinks."""
    return Network(
        net.vertices,
        tuple(Edge(e.id, e.head, e.tail) for e in net.edges),
        net.sinks,
        net.sources,
    )


PATTERN_NODE = "__sigma_rho__"


@dataclass(frozen=True)
class AugmentedNetwork:
    network: Network
    pattern_node: str
    pattern: tuple[int, ...]
    degenerate: bool
    origin: tuple[int | None, ...] = ()   # original edge index behind each augmented edge


def _check_pattern(net: Network, rho: Iterable[int]) -> tuple[int, ...]:
    rho = tuple(sorted(set(rho)))
    for i in rho:
        if not 0 <= i < net.num_edges:
            raise NetworkError(f"unknown edge index {i}")
    return rho


def augment_with_pattern(net: Network, rho: Iterable[int]) -> AugmentedNetwork:
    """Add a node sigma_rho with one edge into head(e) for every e in rho."""
    rho = _check_pattern(net, rho)
    node = PATTERN_NODE
    while node in net.vertices:
        node += "_"
    new_edges = tuple(Edge(f"{net.edges[i].id}'", node, net.edges[i].head) for i in rho)
    aug = Network(net.vertices + (node,), net.edges + new_edges, net.sources, net.sinks)
    return AugmentedNetwork(aug, node, rho, not rho, tuple(range(net.num_edges)) + rho)


def split_pattern(net: Network, rho: Iterable[int]) -> AugmentedNetwork:
    """Subdivide each e = (u, v) in rho as u -> m_e -> v and join sigma_rho to m_e.

    Unlike :func:`augment_with_pattern` the injected error has to use e itself,
    so a pattern edge sitting downstream of another cannot be bypassed.
    """
    rho = _check_pattern(net, rho)
    taken = set(net.vertices)

    def fresh(name):
        while name in taken:
            name += "_"
        taken.add(name)
        return name

    node = fresh(PATTERN_NODE)
    verts = list(net.vertices) + [node]
    edges: list[Edge] = []
    origin: list[int | None] = []
    for i, e in enumerate(net.edges):
        if i in rho:
            mid = fresh(f"__mid_{i}__")
            verts.append(mid)
            edges += [Edge(f"{e.id}~", e.tail, mid), Edge(e.id, mid, e.head), Edge(f"{e.id}'", node, mid)]
            origin += [i, i, i]
        else:
            edges.append(e)
            origin.append(i)
    aug = Network(tuple(verts), tuple(edges), net.sources, net.sinks)
    return AugmentedNetwork(aug, node, rho, not rho, tuple(origin))


# ---------------------------------------------------------------------------
# Edge-disjoint path families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathFamily:
    paths: tuple[tuple[int, ...], ...]      # edge indices of the original network
    origins: tuple[tuple[str, object], ...]  # ("source", i) or ("pattern", edge index)

    def edges(self) -> set[int]:
        return {e for p in self.paths for e in p}


def disjoint_path_family(net: Network, rho: Sequence[int], k: int, delta: int) -> PathFamily:
    """s*k + delta edge-disjoint paths: k from each source, one starting at each edge of rho.

    Max-flow runs on the pattern-augmented network with a super-source joined to
    sigma_rho by delta edges and to each source by k edges.  Every pattern edge
    e = (u, v) is subdivided as u -> m_e -> v so that the error channel enters
    at m_e and shares the unit capacity of e with ordinary traffic.
    """
    if k < 1:
        raise FlowError("k must be positive")
    rho = tuple(rho)
    if len(rho) != delta or len(set(rho)) != delta:
        raise FlowError(f"pattern size {len(rho)} differs from delta={delta}")
    gamma = net.sink
    taken = set(net.vertices)

    def fresh(name):
        while name in taken:
            name += "_"
        taken.add(name)
        return name

    top = fresh("__super__")
    sig = fresh("__sigma_rho__")
    verts = list(net.vertices) + [top, sig]
    edges: list[Edge] = []
    origin_of: list[tuple[str, object]] = []   # per flow-network edge, what it maps to
    rho_set = set(rho)
    for i, e in enumerate(net.edges):
        if i in rho_set:
            mid = fresh(f"__mid_{i}__")
            verts.append(mid)
            edges.append(Edge(f"__in_{i}", e.tail, mid))
            origin_of.append(("skip", i))
            edges.append(Edge(e.id, mid, e.head))
            origin_of.append(("edge", i))
            edges.append(Edge(f"__err_{i}", sig, mid))
            origin_of.append(("err", i))
        else:
            edges.append(e)
            origin_of.append(("edge", i))
    for j in range(delta):
        edges.append(Edge(f"__top_rho_{j}", top, sig))
        origin_of.append(("aux", None))
    for si, s in enumerate(net.sources):
        for j in range(k):
            edges.append(Edge(f"__top_{si}_{j}", top, s))
            origin_of.append(("src", si))
    flow_net = Network(tuple(verts), tuple(edges), (top,), net.sinks)
    res = max_flow(flow_net, [top], gamma)
    need = net.s * k + delta
    if res.value < need:
        raise FlowError(f"flow value {res.value} below s*k+delta={need}")

    remaining = {v: [i for i in flow_net.out_edges(v) if res.flow[i]] for v in flow_net.vertices}
    paths, origins = [], []
    while remaining[top]:
        first = remaining[top].pop()
        kind, tag = origin_of[first]
        v = flow_net.edges[first].head
        path: list[int] = []
        origin = ("source", tag) if kind == "src" else None
        while v != gamma:
            i = remaining[v].pop()
            kind_i, idx = origin_of[i]
            if kind_i == "err":
                origin = ("pattern", idx)
            elif kind_i == "edge":
                path.append(idx)
            v = flow_net.edges[i].head
        paths.append(tuple(path))
        origins.append(origin)
    order = sorted(range(len(paths)), key=lambda t: (origins[t][0] != "source", str(origins[t][1]), paths[t]))
    fam = PathFamily(tuple(paths[t] for t in order), tuple(origins[t] for t in order))
    _check_family(net, fam, k, rho)
    return fam


def _check_family(net: Network, fam: PathFamily, k: int, rho: Sequence[int]) -> None:
    used: set[int] = set()
    for p, (kind, tag) in zip(fam.paths, fam.origins):
        if not p:
            raise FlowError("empty path in family")
        for a, b in zip(p, p[1:]):
            if net.edges[a].head != net.edges[b].tail:
                raise FlowError("path is not contiguous")
        if net.edges[p[-1]].head != net.sink:
            raise FlowError("path does not end at the sink")
        if used & set(p):
            raise FlowError("paths are not edge-disjoint")
        used |= set(p)
        if kind == "source" and net.edges[p[0]].tail != net.sources[tag]:
            raise FlowError("source path starts elsewhere")
        if kind == "pattern" and p[0] != tag:
            raise FlowError("pattern path does not start at its edge")
    counts = [sum(1 for kind, tag in fam.origins if kind == "source" and tag == i) for i in range(net.s)]
    if counts != [k] * net.s:
        raise FlowError(f"per-source path counts {counts}, expected {k}")
    if sorted(tag for kind, tag in fam.origins if kind == "pattern") != sorted(rho):
        raise FlowError("pattern paths do not start at the pattern edges")
