"""Bounds on the rate at which a linear target can be computed against tau edge errors."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

from .decoder import md_decode
from .errors import CapacityError
from .field import Field, FieldMatrix, GF, next_prime
from .identity_construction import construct_identity_code
from .linear_code import LinearNetworkCode
from .distance import enumerate_R
from .network import Network, cut_quantities, mincut_value, min_source_cut, source_subsets
from .sum_construction import construct_sum_code


def _check_tau(net: Network, tau: int) -> int:
    h = min_source_cut(net)
    if tau < 0 or 2 * tau >= h:
        raise CapacityError(f"2*tau={2 * tau} must be below the smallest cut {h}")
    return h


def robust_upper(net: Network, T: FieldMatrix, tau: int) -> Fraction:
    """min over source sets I with Rank(T_I) > 0 of (mincut(I) - 2 tau) / Rank(T_I)."""
    _check_tau(net, tau)
    if T.nrows != net.s:
        raise CapacityError(f"target has {T.nrows} rows for {net.s} sources")
    best = None
    for I in source_subsets(net):
        r = T.select_rows(I).rank()
        if r == 0:
            continue
        v = Fraction(mincut_value(net, [net.sources[i] for i in I]) - 2 * tau, r)
        best = v if best is None else min(best, v)
    if best is None:
        raise CapacityError("target matrix is zero")
    return best


def classify_target(T: FieldMatrix) -> str:
    """'sum' for a single column without zeros, 'identity' for I_s, otherwise 'general'."""
    if T.ncols == 1 and all(r[0] for r in T.rows):
        return "sum"
    if T.nrows == T.ncols and T == FieldMatrix.identity(T.field, T.nrows):
        return "identity"
    return "general"


@dataclass(frozen=True, eq=False)
class TimeSharingScheme:
    rounds: tuple[LinearNetworkCode, ...]
    columns: tuple[tuple[int, ...], ...]
    rate_per_round: int
    T: FieldMatrix

    @property
    def l(self) -> int:
        return len(self.rounds)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.rate_per_round, self.l)

    def combine(self, per_round: Sequence[Sequence[int]]) -> tuple[int, ...]:
        """Concatenate the round results in column order, matching x.(T kron I_k)."""
        if len(per_round) != self.l:
            raise CapacityError(f"{len(per_round)} round results for {self.l} rounds")
        return tuple(v for r in per_round for v in r)

    def decode(self, words: Sequence[Sequence[int]], tau: int) -> tuple[int, ...]:
        out = []
        for code, col, y in zip(self.rounds, self.columns, words):
            Tc = FieldMatrix.from_rows(code.field, [[c] for c in col], 1)
            res = md_decode(code, Tc, code.k, y, tau)
            if not res.ok:
                raise CapacityError("round decoding failed")
            out.append(res.value)
        return self.combine(out)


def _restrict_sources(net: Network, keep: Sequence[int]) -> Network:
    """Same graph with only the chosen sources; dropped sources become silent nodes."""
    return Network(net.vertices, net.edges, tuple(net.sources[i] for i in keep), net.sinks)


def time_sharing_scheme(net: Network, T: FieldMatrix, tau: int, field: Field | None = None,
                        seed: int = 0) -> TimeSharingScheme:
    """One scaled-sum code per column of T, each of rate min|C| - 2 tau."""
    h = _check_tau(net, tau)
    w = h - 2 * tau
    if w <= 0:
        raise CapacityError("no positive rate survives 2*tau errors")
    F = T.field if field is None else field
    rounds, cols = [], []
    n = net.num_edges
    for c in range(T.ncols):
        col = T.col(c)
        keep = [i for i, t in enumerate(col) if t]
        if not keep:
            raise CapacityError(f"column {c} of the target is zero")
        sub = _restrict_sources(net, keep)
        bundle = construct_sum_code(sub, w, F, seed=seed + c, grow=False) if F.q > len(keep) else None
        if bundle is None:
            raise CapacityError(f"field of size {F.q} too small for {len(keep)} sources")
        Bs = []
        for i in range(net.s):
            if i in keep:
                Bs.append(bundle.code.B[keep.index(i)].scaled(col[i]))
            else:
                Bs.append(FieldMatrix.zeros(F, w, n))
        rounds.append(LinearNetworkCode(net, F, w, tuple(Bs), bundle.code.K))
        cols.append(tuple(col))
    return TimeSharingScheme(tuple(rounds), tuple(cols), w, T)


@dataclass(frozen=True, eq=False)
class CapacityReport:
    upper: Fraction
    lower: Fraction
    scheme: str
    rounds: int = 1
    witness: object = dc_field(default=None, repr=False)

    @property
    def gap(self) -> bool:
        return self.lower < self.upper

    def to_dict(self) -> dict:
        return {"upper": str(self.upper), "lower": str(self.lower), "scheme": self.scheme,
                "rounds": self.rounds, "gap": self.gap}


def _field_for(q_min: int, base: Field | None) -> Field:
    if base is not None and base.q >= q_min:
        return base
    return GF(next_prime(max(q_min, 2)))


def robust_lower(net: Network, T: FieldMatrix, tau: int, field: Field | None = None, seed: int = 0,
                 build_witness: bool = True) -> CapacityReport:
    """Achievable rate with a constructed witness code (or codes)."""
    h = _check_tau(net, tau)
    upper = robust_upper(net, T, tau)
    kind = classify_target(T)
    base = T.field if field is None else field
    if kind == "sum":
        lower = Fraction(h - 2 * tau)
        witness = None
        if build_witness:
            if all(c == 1 for c in T.col(0)):
                witness = construct_sum_code(net, h - 2 * tau, _field_for(net.s + 1, base), seed=seed)
            else:
                witness = time_sharing_scheme(net, T, tau, base, seed)
        return CapacityReport(upper, lower, "sum", 1, witness)
    if kind == "identity":
        k = None
        for I in source_subsets(net):
            v = (mincut_value(net, [net.sources[i] for i in I]) - 2 * tau) // len(I)
            k = v if k is None else min(k, v)
        lower = Fraction(max(k, 0))
        witness = None
        if build_witness and k >= 1:
            delta = cut_quantities(net, FieldMatrix.identity(base, net.s), k).delta
            npat = 1 if delta == 0 else len(enumerate_R(net, delta))
            witness = construct_identity_code(net, k, _field_for(npat, base), seed=seed)
        return CapacityReport(upper, lower, "identity", 1, witness)
    l = T.ncols
    lower = Fraction(h - 2 * tau, l)
    witness = time_sharing_scheme(net, T, tau, base, seed) if build_witness else None
    return CapacityReport(upper, lower, "time-sharing", l, witness)
