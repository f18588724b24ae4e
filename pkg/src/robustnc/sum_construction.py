"""Codes computing the sum of the source messages with the largest possible distance.

The general construction dualises a multicast code of the reverse network
and then picks the source encoders so that every received word lies in a
k-dimensional space D avoiding the error spans of up to h-k edges.  A separate
polynomial-evaluation construction covers three-layer networks.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field as dc_field
from itertools import combinations
from math import comb

from .distance import DistanceCertificate, min_distance
from .errors import ConstructionError, FieldTooSmall, InvariantBreach, NetworkError
from .field import Field, FieldMatrix, GF, next_prime, rank_rows, rref_rows, ones_column
from .linear_code import LinearNetworkCode, transfer_inverse
from .network import Edge, Network, min_source_cut, reverse

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Degree normalisation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Normalized:
    network: Network
    original: Network
    aux_source_edges: tuple[tuple[int, ...], ...]   # per source, the h auxiliary edge indices (or ())
    aux_sink_edges: tuple[int, ...]                 # auxiliary edges after the old sink (or ())

    @property
    def identity(self) -> bool:
        return self.network is self.original


def _normalize(net: Network, h: int) -> Normalized:
    taken = set(net.vertices)

    def fresh(name):
        while name in taken:
            name += "_"
        taken.add(name)
        return name

    verts = list(net.vertices)
    edges = list(net.edges)
    sources = []
    aux_src = []
    for s in net.sources:
        if len(net.out_edges(s)) == h:
            sources.append(s)
            aux_src.append(())
            continue
        a = fresh(f"{s}__aux")
        verts.insert(0, a)
        idx = []
        for j in range(h):
            idx.append(len(edges))
            edges.append(Edge(f"{a}{j}", a, s))
        sources.append(a)
        aux_src.append(tuple(idx))
    sink = net.sink
    aux_sink: list[int] = []
    if len(net.in_edges(sink)) != h:
        new = fresh(f"{sink}__aux")
        verts.append(new)
        for j in range(h):
            aux_sink.append(len(edges))
            edges.append(Edge(f"{new}{j}", sink, new))
        sink = new
    if not aux_sink and not any(aux_src):
        return Normalized(net, net, tuple(aux_src), ())
    out = Network(tuple(verts), tuple(edges), tuple(sources), (sink,))
    return Normalized(out, net, tuple(aux_src), tuple(aux_sink))


def normalize_degrees(net: Network, h: int) -> Network:
    """Give every source out-degree h and the sink in-degree h via auxiliary nodes.

    Each auxiliary node is joined to the node it replaces by h parallel edges,
    so no source-to-sink min-cut falls below h.
    """
    return _normalize(net, h).network


# ---------------------------------------------------------------------------
# Multicast on the reverse network
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MulticastSolution:
    B: FieldMatrix                   # h x |E|, supported on the sink edges of the forward network
    K: FieldMatrix                   # transfer matrix of the reverse network
    F: tuple[FieldMatrix, ...]       # per source, h x h, columns ordered like Out(sigma_i)
    B_tilde: FieldMatrix             # h x h restriction of B to the sink edges


def _rand(rng: random.Random, q: int) -> int:
    return rng.randrange(q)


def multicast_reverse(net: Network, h: int, field: Field, rng: random.Random | int, retries: int = 50) -> MulticastSolution:
    """Random linear multicast of h symbols from the sink to every source on the reverse network."""
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    rev = reverse(net)
    n = net.num_edges
    q = field.q
    sink_edges = net.sink_edges
    if len(sink_edges) != h:
        raise ConstructionError(f"sink in-degree {len(sink_edges)} differs from h={h}; normalise first")
    outs = [net.out_edges(s) for s in net.sources]
    for s, o in zip(net.sources, outs):
        if len(o) != h:
            raise ConstructionError(f"source {s!r} has out-degree {len(o)}, expected {h}")
    allowed = [(x, y) for x in range(n) for y in range(n) if rev.edges[x].head == rev.edges[y].tail]
    for attempt in range(retries):
        Bt = [[_rand(rng, q) for _ in range(h)] for _ in range(h)]
        B = [[0] * n for _ in range(h)]
        for r in range(h):
            for c, e in enumerate(sink_edges):
                B[r][e] = Bt[r][c]
        K = [[0] * n for _ in range(n)]
        for x, y in allowed:
            K[x][y] = _rand(rng, q)
        Km = FieldMatrix.from_rows(field, K, n)
        P = transfer_inverse(rev, field, Km)
        Bm = FieldMatrix.from_rows(field, B, n)
        BP = Bm @ P
        Fs = tuple(BP.select_cols(o) for o in outs)
        if all(Fi.rank() == h for Fi in Fs):
            Btm = FieldMatrix.from_rows(field, Bt, h)
            if Btm.rank() == h:
                log.debug("multicast solution over %s after %d attempts", field, attempt + 1)
                return MulticastSolution(Bm, Km, Fs, Btm)
    raise FieldTooSmall(
        f"no multicast solution over {field} after {retries} attempts; a larger field is required")


# ---------------------------------------------------------------------------
# The subspace D
# ---------------------------------------------------------------------------

def distinct_rows(G: FieldMatrix) -> list[tuple[int, ...]]:
    """Nonzero rows of G up to scaling, in first-occurrence order."""
    F = G.field
    seen: dict[tuple[int, ...], None] = {}
    for row in G.rows:
        if any(row):
            lead = next(c for c in row if c)
            seen.setdefault(tuple(F.scale(F.inv(lead), row)), None)
    return list(seen)


def violating_subset(G: FieldMatrix, D: FieldMatrix, h: int, k: int) -> tuple[tuple[int, ...], ...] | None:
    """A set of at most h-k rows of G whose span meets the row space of D, if any."""
    F = G.field
    rows = distinct_rows(G)
    w = min(h - k, len(rows))
    if w <= 0:
        return None
    for sub in combinations(rows, w):
        r = rank_rows(F, sub, h)
        if rank_rows(F, list(D.rows) + list(sub), h) != k + r:
            # shrink to a smallest violating subset for the report
            for size in range(1, w + 1):
                for small in combinations(sub, size):
                    if rank_rows(F, list(D.rows) + list(small), h) != k + rank_rows(F, small, h):
                        return small
            return sub
    return None


def find_D(G: FieldMatrix, h: int, k: int, rng: random.Random | int, retries: int = 200) -> FieldMatrix:
    """Random k x h matrix in RREF whose row space avoids every span of h-k rows of G."""
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    F = G.field
    if not 1 <= k <= h:
        raise ConstructionError(f"need 1 <= k <= h, got k={k}, h={h}")
    if k == h:
        return FieldMatrix.identity(F, h)
    worst = None
    for _ in range(retries):
        raw = [[_rand(rng, F.q) for _ in range(h)] for _ in range(k)]
        red, piv = rref_rows(F, raw, h)
        if len(piv) < k:
            continue
        D = FieldMatrix.from_rows(F, red, h)
        bad = violating_subset(G, D, h, k)
        if bad is None:
            return D
        if worst is None or len(bad) < len(worst):
            worst = bad
    raise FieldTooSmall(f"no valid D over {F} after {retries} attempts; smallest violating rows {worst}")


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


@dataclass(frozen=True)
class GaussianMargin:
    lhs: int
    rhs: int

    @property
    def sufficient(self) -> bool:
        return self.lhs < self.rhs


def gaussian_margin(h: int, k: int, E: int, q: int) -> GaussianMargin:
    """Counting certificate that a k-space avoiding all (h-k)-row spans exists over GF(q)."""
    if not 0 < h - k <= E:
        raise ConstructionError(f"need 0 < h-k <= E, got h={h}, k={k}, E={E}")
    g = gaussian_binomial(h, k, q)
    return GaussianMargin((g - q ** (k * (h - k))) * comb(E, h - k), g)


# ---------------------------------------------------------------------------
# Full construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SumCodeBundle:
    code: LinearNetworkCode                 # on the caller's network
    normalized_code: LinearNetworkCode      # on the degree-normalised network
    D: FieldMatrix | None
    pivots: tuple[int, ...]
    F_primes: tuple[FieldMatrix, ...]
    sink_combiner: FieldMatrix | None       # maps the sink word onto the normalised sink edges
    h: int
    k: int
    certificate: DistanceCertificate
    seed: int | None = None
    notes: tuple[str, ...] = dc_field(default=())

    @property
    def field(self) -> Field:
        return self.code.field

    def summary(self) -> dict:
        return {"h": self.h, "k": self.k, "d_min": self.certificate.d_min,
                "q": self.field.q, "seed": self.seed}

    def direct_sum(self, y) -> tuple[int, ...]:
        """Error-free readout: the pivot coordinates of D carry the sum directly."""
        if self.D is None or self.sink_combiner is None:
            raise ConstructionError("direct readout needs the D-based construction")
        w = self.sink_combiner.vecmul(y)
        return tuple(w[c] for c in self.pivots)


def _attempt(net: Network, norm: Normalized, h: int, k: int, field: Field, rng: random.Random):
    nn = norm.network
    sol = multicast_reverse(nn, h, field, rng)
    K = sol.K.transpose()
    P = transfer_inverse(nn, field, K)
    G = P.select_cols(nn.sink_edges)
    D = find_D(G, h, k, rng)
    _, pivots = D.rref()
    BtT_inv = sol.B_tilde.transpose().inverse()
    F_primes = tuple(Fi.transpose() @ BtT_inv for Fi in sol.F)
    n = nn.num_edges
    Bs = []
    for i, s in enumerate(nn.sources):
        Ei = D @ F_primes[i].inverse()
        rows = [[0] * n for _ in range(k)]
        for c, e in enumerate(nn.out_edges(s)):
            for r in range(k):
                rows[r][e] = Ei.rows[r][c]
        Bs.append(FieldMatrix.from_rows(field, rows, n))
    ncode = LinearNetworkCode(nn, field, k, tuple(Bs), K)
    stacked = FieldMatrix(field, tuple(D.rows) * nn.s, h)
    if ncode.F != stacked:
        raise InvariantBreach("global matrix of the sum code is not D stacked once per source")
    return ncode, D, tuple(pivots), F_primes


def _fold(norm: Normalized, ncode: LinearNetworkCode, k: int) -> tuple[LinearNetworkCode, FieldMatrix]:
    """Carry a code on the normalised network back to the original one."""
    net, field = norm.original, ncode.field
    if norm.identity:
        return ncode, FieldMatrix.identity(field, len(net.sink_edges))
    n = net.num_edges
    K = ncode.K
    Bs = []
    for i, s in enumerate(net.sources):
        aux = norm.aux_source_edges[i]
        src = ncode.B[i]
        rows = [[0] * n for _ in range(k)]
        for e in net.out_edges(s):
            for r in range(k):
                if aux:
                    acc = 0
                    for a in aux:
                        acc = field.add(acc, field.mul(src.rows[r][a], K.rows[a][e]))
                    rows[r][e] = acc
                else:
                    rows[r][e] = src.rows[r][e]
        Bs.append(FieldMatrix.from_rows(field, rows, n))
    Kt = FieldMatrix.from_rows(field, [row[:n] for row in K.rows[:n]], n)
    code = LinearNetworkCode(net, field, k, tuple(Bs), Kt)
    if norm.aux_sink_edges:
        L = FieldMatrix.from_rows(field, [[K.rows[d][a] for a in norm.aux_sink_edges] for d in net.sink_edges],
                                  len(norm.aux_sink_edges))
    else:
        L = FieldMatrix.identity(field, len(net.sink_edges))
    return code, L


def construct_sum_code(net: Network, k: int, field: Field, seed: int = 0, grow: bool = True,
                       max_growth: int = 8, verify_probes: int = 100) -> SumCodeBundle:
    """Sum-computing code of rate k and distance h - k + 1, where h is the smallest source min-cut.

    When the random searches fail the field is replaced by GF(next_prime(2q))
    (with ``grow``), which is logged in the bundle notes.
    """
    h = min_source_cut(net)
    if not 1 <= k <= h:
        raise ConstructionError(f"rate k={k} outside 1..h={h}")
    rng = random.Random(seed)
    norm = _normalize(net, h)
    notes = []
    F = field
    for step in range(max_growth + 1):
        if F.q <= net.s:
            msg = f"q={F.q} does not exceed s={net.s}"
        else:
            if k < h:
                m = gaussian_margin(h, k, norm.network.num_edges, F.q)
                notes.append(f"q={F.q}: counting bound {'sufficient' if m.sufficient else 'not sufficient'}")
            try:
                ncode, D, pivots, F_primes = _attempt(net, norm, h, k, F, rng)
                break
            except FieldTooSmall as exc:
                msg = str(exc)
        if not grow or step == max_growth:
            raise FieldTooSmall(msg)
        F = GF(next_prime(2 * F.q))
        notes.append(f"grew field: {msg}; now GF({F.q})")
        log.info("sum construction: growing field to GF(%d)", F.q)
    code, L = _fold(norm, ncode, k)
    stacked = FieldMatrix(F, tuple(D.rows) * net.s, h)
    if code.F @ L != stacked:
        raise InvariantBreach("folded code does not reproduce the stacked D at the sink")
    prng = random.Random(seed + 1)
    for _ in range(verify_probes):
        x = [prng.randrange(F.q) for _ in range(net.s * k)]
        total = [0] * k
        for i in range(net.s):
            total = F.axpy(total, 1, x[i * k:(i + 1) * k])
        if L.vecmul(code.F.vecmul(x)) != D.vecmul(total):
            raise InvariantBreach("sink word is not (sum of messages) . D")
    cert = min_distance(code, ones_column(F, net.s), k)
    if cert.d_min != h - k + 1:
        raise InvariantBreach(f"constructed distance {cert.d_min} differs from h-k+1={h - k + 1}")
    return SumCodeBundle(code, ncode, D, pivots, F_primes, L, h, k, cert, seed, tuple(notes))


# ---------------------------------------------------------------------------
# Three-layer networks
# ---------------------------------------------------------------------------

def _poly_mul(F: Field, a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = F.add(out[i + j], F.mul(x, y))
    return out


def _poly_eval(F: Field, a: list[int], t: int) -> int:
    acc = 0
    for c in reversed(a):
        acc = F.add(F.mul(acc, t), c)
    return acc


def three_layer_relays(net: Network) -> tuple[str, ...]:
    """Relay order of a three-layer network; raises if the shape is wrong."""
    src = set(net.sources)
    gamma = net.sink
    relays = tuple(v for v in net.vertices if v not in src and v != gamma)
    rs = set(relays)
    for r in relays:
        outs = net.out_edges(r)
        if len(outs) != 1 or net.edges[outs[0]].head != gamma:
            raise NetworkError(f"relay {r!r} must have exactly one edge, into the sink")
    for s in net.sources:
        heads = [net.edges[e].head for e in net.out_edges(s)]
        if any(h not in rs for h in heads):
            raise NetworkError(f"source {s!r} must only feed relays")
        if len(set(heads)) != len(heads):
            raise NetworkError(f"source {s!r} has parallel edges to one relay")
    return relays


def three_layer_sum_code(net: Network, k: int, field: Field) -> SumCodeBundle:
    """Polynomial-evaluation sum code on a sources -> relays -> sink network.

    Relay j is given the point w^j.  Source i maps x_i to a polynomial of
    degree at most N - c* + k - 1 vanishing on the relays it cannot reach and
    whose top k coefficients are x_i; the relays add what they receive.  The
    sink then sees a Reed-Solomon codeword of the summed polynomial, whose top
    coefficients are the sum, so the distance is c* - k + 1.
    """
    relays = three_layer_relays(net)
    N = len(relays)
    if field.q - 1 < N:
        raise FieldTooSmall(f"q-1={field.q - 1} is below the number of relays {N}")
    degs = [len(net.out_edges(s)) for s in net.sources]
    c_star = min(degs)
    if not 1 <= k <= c_star:
        raise ConstructionError(f"rate k={k} outside 1..{c_star}")
    Fd = field
    w = Fd.primitive
    alpha = {r: Fd.pow(w, j) for j, r in enumerate(relays)}
    top = N - c_star + k - 1
    n = net.num_edges
    Bs = []
    for s in net.sources:
        reach = {net.edges[e].head for e in net.out_edges(s)}
        zpoly = [1]
        for r in relays:
            if r not in reach:
                zpoly = _poly_mul(Fd, zpoly, [Fd.neg(alpha[r]), 1])
        z = len(zpoly) - 1
        base = top - z - k + 1
        Mz = FieldMatrix.from_rows(
            Fd, [[zpoly[z + l - m] if 0 <= z + l - m <= z else 0 for l in range(k)] for m in range(k)], k)
        Minv = Mz.inverse()
        rows = [[0] * n for _ in range(k)]
        for e in net.out_edges(s):
            a = alpha[net.edges[e].head]
            za = _poly_eval(Fd, zpoly, a)
            v = [Fd.mul(Fd.pow(a, base + m), za) for m in range(k)]
            col = FieldMatrix.from_rows(Fd, [[c] for c in v], 1)
            colB = Minv @ col
            for r in range(k):
                rows[r][e] = colB.rows[r][0]
        Bs.append(FieldMatrix.from_rows(Fd, rows, n))
    K = [[0] * n for _ in range(n)]
    for d, ed in enumerate(net.edges):
        if ed.tail in alpha or ed.head not in alpha:
            continue
        K[d][net.out_edges(ed.head)[0]] = 1
    code = LinearNetworkCode(net, Fd, k, tuple(Bs), FieldMatrix.from_rows(Fd, K, n))
    cert = min_distance(code, ones_column(Fd, net.s), k)
    if cert.d_min != c_star - k + 1:
        raise InvariantBreach(f"three-layer distance {cert.d_min} differs from c*-k+1={c_star - k + 1}")
    return SumCodeBundle(code, code, None, (), (), None, c_star, k, cert)
