"""Scalar linear network codes: local coefficients, global matrices, transmission."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import CodeError, DimensionError, InvariantBreach
from .field import Field, FieldMatrix
from .network import Network

STAR = None  # erasure / outage mark in a received word


@dataclass(frozen=True)
class ErrorVector:
    values: tuple[int, ...]

    @classmethod
    def zero(cls, n: int) -> "ErrorVector":
        return cls((0,) * n)

    @classmethod
    def on(cls, n: int, entries: Mapping[int, int]) -> "ErrorVector":
        v = [0] * n
        for i, c in entries.items():
            v[i] = c
        return cls(tuple(v))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.values) if c)

    @property
    def weight(self) -> int:
        return len(self.support)

    def matches(self, rho: Iterable[int]) -> bool:
        return set(self.support) <= set(rho)


def transfer_inverse(net: Network, field: Field, K: FieldMatrix) -> FieldMatrix:
    """(I - K)^{-1} by substitution along the topological edge order.

    Column e of P satisfies P[:, e] = 1_e + sum_d P[:, d] K[d, e], and K[d, e]
    can only be nonzero for edges d entering tail(e), which come earlier.
    """
    n = net.num_edges
    cols: list[list[int] | None] = [None] * n
    for e in net.edge_topo_order:
        col = [0] * n
        col[e] = 1
        for d in net.in_edges(net.edges[e].tail):
            c = K.rows[d][e]
            if c:
                prev = cols[d]
                if prev is None:
                    raise InvariantBreach("transfer matrix is not nilpotent along the edge order")
                col = field.axpy(col, c, prev)
        cols[e] = col
    rows = [[cols[j][i] for j in range(n)] for i in range(n)]
    return FieldMatrix.from_rows(field, rows, n)


@dataclass(frozen=True)
class EncodingMatrices:
    F: FieldMatrix          # sk x |In(gamma)|
    G: FieldMatrix          # |E| x |In(gamma)|
    P: FieldMatrix          # (I - K)^{-1}

    @property
    def extended(self) -> FieldMatrix:
        return self.F.vstack(self.G)


@dataclass(frozen=True, eq=False)
class LinearNetworkCode:
    network: Network
    field: Field
    k: int
    B: tuple[FieldMatrix, ...]   # one k x |E| matrix per source
    K: FieldMatrix               # |E| x |E|

    def __post_init__(self):
        net, F = self.network, self.field
        n = net.num_edges
        if self.k < 1:
            raise CodeError("rate k must be positive")
        if len(self.B) != net.s:
            raise CodeError(f"{len(self.B)} source matrices for {net.s} sources")
        for i, Bi in enumerate(self.B):
            if Bi.field != F or Bi.shape != (self.k, n):
                raise DimensionError(f"B_{i} must be {self.k}x{n} over {F}")
            src = net.sources[i]
            for j, row in enumerate(Bi.rows):
                for e, c in enumerate(row):
                    if c and net.edges[e].tail != src:
                        raise CodeError(f"B_{i}[{j}] is nonzero on edge {net.edges[e].id!r} not leaving {src!r}")
        if self.K.field != F or self.K.shape != (n, n):
            raise DimensionError(f"K must be {n}x{n} over {F}")
        for d, row in enumerate(self.K.rows):
            for e, c in enumerate(row):
                if c and net.edges[d].head != net.edges[e].tail:
                    raise CodeError(
                        f"K is nonzero at ({net.edges[d].id!r}, {net.edges[e].id!r}) but they are not adjacent")

    def __eq__(self, other):
        if not isinstance(other, LinearNetworkCode):
            return NotImplemented
        return (self.network, self.field, self.k, self.B, self.K) == (
            other.network, other.field, other.k, other.B, other.K)

    def __hash__(self):
        return hash((self.field, self.k, self.B, self.K))

    @classmethod
    def from_coefficients(cls, net: Network, field: Field, k: int,
                          source_coeffs: Mapping[tuple[int, int, int], int],
                          transfer_coeffs: Mapping[tuple[int, int], int]) -> "LinearNetworkCode":
        """Build from sparse maps {(i, j, e): value} and {(d, e): value} with edge indices."""
        n = net.num_edges
        B = [[[0] * n for _ in range(k)] for _ in range(net.s)]
        for (i, j, e), v in source_coeffs.items():
            B[i][j][e] = field.coerce(v)
        K = [[0] * n for _ in range(n)]
        for (d, e), v in transfer_coeffs.items():
            K[d][e] = field.coerce(v)
        return cls(net, field, k,
                   tuple(FieldMatrix.from_rows(field, b, n) for b in B),
                   FieldMatrix.from_rows(field, K, n))

    def source_coefficients(self) -> dict[tuple[int, int, int], int]:
        return {(i, j, e): c
                for i, Bi in enumerate(self.B)
                for j, row in enumerate(Bi.rows)
                for e, c in enumerate(row) if c}

    def transfer_coefficients(self) -> dict[tuple[int, int], int]:
        return {(d, e): c for d, row in enumerate(self.K.rows) for e, c in enumerate(row) if c}

    @property
    def s(self) -> int:
        return self.network.s

    @cached_property
    def B_stack(self) -> FieldMatrix:
        rows = tuple(r for Bi in self.B for r in Bi.rows)
        return FieldMatrix(self.field, rows, self.network.num_edges)

    @cached_property
    def matrices(self) -> EncodingMatrices:
        return derive_matrices(self)

    @property
    def F(self) -> FieldMatrix:
        return self.matrices.F

    @property
    def G(self) -> FieldMatrix:
        return self.matrices.G


def derive_matrices(code: LinearNetworkCode) -> EncodingMatrices:
    net = code.network
    P = transfer_inverse(net, code.field, code.K)
    sink_cols = net.sink_edges
    G = P.select_cols(sink_cols)
    F = code.B_stack @ G
    for a, e in enumerate(sink_cols):
        want = tuple(int(a == b) for b in range(len(sink_cols)))
        if G.rows[e] != want:
            raise InvariantBreach("rows of G at the sink edges do not form an identity matrix")
    return EncodingMatrices(F, G, P)


def target_matrix(T: FieldMatrix, k: int) -> FieldMatrix:
    """T kron I_k."""
    return T.kron(FieldMatrix.identity(T.field, k))


def _check_message(code: LinearNetworkCode, x: Sequence[int]) -> tuple[int, ...]:
    if len(x) != code.s * code.k:
        raise DimensionError(f"message of length {len(x)}, expected {code.s * code.k}")
    return tuple(code.field.coerce(v) for v in x)


def _check_error(code: LinearNetworkCode, z) -> tuple[int, ...]:
    vals = z.values if isinstance(z, ErrorVector) else tuple(z)
    if len(vals) != code.network.num_edges:
        raise DimensionError(f"error vector of length {len(vals)}, expected {code.network.num_edges}")
    return tuple(code.field.coerce(v) for v in vals)


def propagate(code: LinearNetworkCode, x: Sequence[int], z=None, outages: Iterable[int] = ()) -> list[int]:
    """Edge-by-edge simulation; returns the symbol carried by every edge.

    Outaged edges deliver zero downstream (the receiving node substitutes 0).
    """
    net, F, k = code.network, code.field, code.k
    x = _check_message(code, x)
    zz = _check_error(code, z) if z is not None else (0,) * net.num_edges
    out = set(outages)
    src_pos = {v: i for i, v in enumerate(net.sources)}
    u = [0] * net.num_edges
    for e in net.edge_topo_order:
        tail = net.edges[e].tail
        acc = zz[e]
        i = src_pos.get(tail)
        if i is not None:
            Bi = code.B[i]
            for j in range(k):
                c = Bi.rows[j][e]
                if c and x[i * k + j]:
                    acc = F.add(acc, F.mul(c, x[i * k + j]))
        for d in net.in_edges(tail):
            c = code.K.rows[d][e]
            if c and d not in out and u[d]:
                acc = F.add(acc, F.mul(c, u[d]))
        u[e] = acc
    return u


def transmit(code: LinearNetworkCode, x: Sequence[int], z=None) -> tuple[int, ...]:
    """The word observed at the sink; checked against x.F + z.G."""
    u = propagate(code, x, z)
    y = tuple(u[e] for e in code.network.sink_edges)
    expect = code.F.vecmul(_check_message(code, x))
    if z is not None:
        zy = code.G.vecmul(_check_error(code, z))
        expect = tuple(code.field.add(a, b) for a, b in zip(expect, zy))
    if y != expect:
        raise InvariantBreach("simulated transmission disagrees with x.F + z.G")
    return y


def transmit_with_outages(code: LinearNetworkCode, x: Sequence[int], outages: Iterable[int]) -> tuple:
    """Sink word when the given edges are down; outaged sink edges read as STAR."""
    outages = set(outages)
    u = propagate(code, x, None, outages)
    return tuple(STAR if e in outages else u[e] for e in code.network.sink_edges)


def computes_function(code: LinearNetworkCode, T: FieldMatrix, k: int | None = None) -> bool:
    """True iff x.F = 0 forces x.(T kron I_k) = 0, i.e. the sink can evaluate the target."""
    k = code.k if k is None else k
    if T.nrows != code.s:
        raise DimensionError(f"target has {T.nrows} rows for {code.s} sources")
    if k != code.k:
        return False
    M = target_matrix(T, k)
    return code.F.rank() == code.F.hstack(M).rank()


def decode_error_free(code: LinearNetworkCode, T: FieldMatrix, y: Sequence[int]) -> tuple[int, ...]:
    """Target value from an error-free sink word."""
    x = code.F.solve_left(y)
    if x is None:
        raise CodeError("word is not in the code's image")
    return target_matrix(T, code.k).vecmul(x)
