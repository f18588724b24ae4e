"""Error-tolerance distance, the code metric, and error-pattern rank."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Iterator, Sequence

from .errors import InvariantBreach, NetworkError
from .field import Field, FieldMatrix, rank_rows, rref_rows, solve_left_rows
from .linear_code import LinearNetworkCode, target_matrix
from .network import Network, max_flow, split_pattern


def delta_space(code: LinearNetworkCode, rho: Iterable[int]) -> FieldMatrix:
    """RREF basis of the span of the G rows indexed by rho."""
    G = code.G
    red, _ = rref_rows(code.field, [G.rows[e] for e in rho], G.ncols)
    return FieldMatrix.from_rows(code.field, red, G.ncols)


def _normalize(F: Field, row: Sequence[int]) -> tuple[int, ...]:
    lead = next(c for c in row if c)
    if lead == 1:
        return tuple(row)
    return tuple(F.scale(F.inv(lead), row))


def row_classes(code: LinearNetworkCode) -> list[int]:
    """One representative edge per projective class of nonzero G rows (first in edge order).

    Errors on edges with proportional G rows reach the sink identically up to
    scale, so a pattern can always swap an edge for its representative.
    """
    seen: dict[tuple[int, ...], int] = {}
    for e, row in enumerate(code.G.rows):
        if any(row):
            seen.setdefault(_normalize(code.field, row), e)
    return sorted(seen.values())


def independent_patterns(code: LinearNetworkCode, size: int, reps: Sequence[int] | None = None) -> Iterator[tuple[int, ...]]:
    """Subsets of representative edges whose G rows are linearly independent."""
    reps = row_classes(code) if reps is None else reps
    G, F = code.G, code.field
    for rho in combinations(reps, size):
        if rank_rows(F, [G.rows[e] for e in rho], G.ncols) == size:
            yield rho


@dataclass(frozen=True)
class PhiWitness:
    x: tuple[int, ...]
    z: tuple[int, ...]   # full-length error vector matching the pattern


def phi_intersects(code: LinearNetworkCode, T: FieldMatrix, k: int | None, rho: Sequence[int]) -> PhiWitness | None:
    """A witness (x, z) with x.F = z.G, z matching rho and x.(T kron I_k) != 0, or None.

    The pairs (x, z_rho) with x.F - z_rho.G_rho = 0 form the left kernel of
    [F; -G_rho]; its x-projection is spanned by the x-parts of a kernel basis,
    so one basis vector escaping ker(T kron I_k) decides the question.
    """
    k = code.k if k is None else k
    Fd = code.field
    M = target_matrix(T, k)
    rho = list(rho)
    sk = code.F.nrows
    stacked = code.F.vstack((-code.G).select_rows(rho)) if rho else code.F
    for v in stacked.left_null_space().rows:
        x = v[:sk]
        if any(M.vecmul(x)):
            z = [0] * code.network.num_edges
            for e, c in zip(rho, v[sk:]):
                z[e] = c
            return PhiWitness(tuple(x), tuple(z))
    return None


@dataclass(frozen=True)
class DistanceCertificate:
    d_min: int
    pattern: tuple[int, ...]
    x: tuple[int, ...]
    z: tuple[int, ...]

    def verify(self, code: LinearNetworkCode, T: FieldMatrix) -> bool:
        if len(self.pattern) != self.d_min:
            return False
        if any(c for e, c in enumerate(self.z) if e not in self.pattern):
            return False
        if not any(target_matrix(T, code.k).vecmul(self.x)):
            return False
        return code.F.vecmul(self.x) == code.G.vecmul(self.z)

    def to_dict(self, code: LinearNetworkCode) -> dict:
        ids = [code.network.edges[e].id for e in self.pattern]
        return {"d_min": self.d_min, "pattern": ids, "x": list(self.x),
                "z": {code.network.edges[e].id: self.z[e] for e in self.pattern}}


def min_distance(code: LinearNetworkCode, T: FieldMatrix, k: int | None = None, prune: bool = True) -> DistanceCertificate:
    """Smallest pattern size whose error space meets Phi, with a witness.

    With ``prune`` the search runs over independent sets of representative
    rows only; a dependent or duplicated pattern spans the same space as a
    smaller one that is examined first.  ``prune=False`` tries every edge subset.
    """
    k = code.k if k is None else k
    n = code.network.num_edges
    w0 = phi_intersects(code, T, k, ())
    if w0 is not None:
        return DistanceCertificate(0, (), w0.x, w0.z)
    reps = row_classes(code) if prune else list(range(n))
    for size in range(1, len(reps) + 1):
        pats = independent_patterns(code, size, reps) if prune else combinations(reps, size)
        for rho in pats:
            w = phi_intersects(code, T, k, rho)
            if w is not None:
                return DistanceCertificate(size, tuple(rho), w.x, w.z)
    raise InvariantBreach("no pattern meets Phi; the sink rows of G should guarantee one")


def dist_C(code: LinearNetworkCode, y1: Sequence[int], y2: Sequence[int]) -> int:
    """Fewest edge errors turning y2 into y1 (minimum weight z with z.G = y1 - y2)."""
    return dist_C_witness(code, y1, y2)[0]


def dist_C_witness(code: LinearNetworkCode, y1: Sequence[int], y2: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    F, G = code.field, code.G
    diff = [F.sub(F.coerce(a), F.coerce(b)) for a, b in zip(y1, y2)]
    n = code.network.num_edges
    if not any(diff):
        return 0, (0,) * n
    reps = row_classes(code)
    for size in range(1, G.ncols + 1):
        for rho in independent_patterns(code, size, reps):
            c = solve_left_rows(F, [G.rows[e] for e in rho], diff)
            if c is not None:
                z = [0] * n
                for e, v in zip(rho, c):
                    z[e] = v
                return size, tuple(z)
    raise InvariantBreach("difference not reachable by errors; sink rows of G should span everything")


@dataclass(frozen=True)
class PatternRankReport:
    pattern: tuple[int, ...]
    rank: int
    cut: tuple[int, ...]   # original edges of a minimum sigma_rho - sink cut


def pattern_rank(net: Network, rho: Iterable[int]) -> PatternRankReport:
    """Rank of an error pattern: min-cut from sigma_rho to the sink once the pattern edges are subdivided."""
    aug = split_pattern(net, rho)
    if aug.degenerate:
        return PatternRankReport((), 0, ())
    res = max_flow(aug.network, [aug.pattern_node], net.sink)
    cut = tuple(sorted({aug.origin[i] for i in res.cut(aug.network)}))
    return PatternRankReport(aug.pattern, res.value, cut)


def enumerate_R(net: Network, delta: int, limit: int | None = None) -> list[tuple[int, ...]]:
    """All delta-subsets of edges whose rank equals delta."""
    if delta < 1:
        raise NetworkError("delta must be at least 1")
    out = []
    for rho in combinations(range(net.num_edges), delta):
        if pattern_rank(net, rho).rank == delta:
            out.append(rho)
            if limit is not None and len(out) > limit:
                raise NetworkError(f"R({delta}) has more than {limit} patterns")
    return out


def is_robust(code: LinearNetworkCode, T: FieldMatrix, k: int | None, tau: int) -> bool:
    return min_distance(code, T, k).d_min >= 2 * tau + 1


def is_robust_exhaustive(code: LinearNetworkCode, T: FieldMatrix, tau: int) -> bool:
    """Direct check: no sink word arises from two target values with <= tau errors each."""
    F = code.field
    n = code.network.num_edges
    M = target_matrix(T, code.k)
    errs = [code.G.vecmul(z) for z in _low_weight_vectors(F, n, tau)]
    seen: dict[tuple[int, ...], tuple[int, ...]] = {}
    for x in product(range(F.q), repeat=code.F.nrows):
        y0 = code.F.vecmul(x)
        a = M.vecmul(x)
        for ez in errs:
            y = tuple(F.add(u, v) for u, v in zip(y0, ez))
            prev = seen.setdefault(y, a)
            if prev != a:
                return False
    return True


def _low_weight_vectors(F: Field, n: int, w: int) -> Iterator[tuple[int, ...]]:
    yield (0,) * n
    for size in range(1, w + 1):
        for supp in combinations(range(n), size):
            for vals in product(range(1, F.q), repeat=size):
                z = [0] * n
                for e, v in zip(supp, vals):
                    z[e] = v
                yield tuple(z)
