"""Minimum-distance, outage and erasure decoding at the sink."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import DecodingError, InvariantBreach
from .field import FieldMatrix, rank_rows, solve_left_rows
from .linear_code import STAR, LinearNetworkCode, target_matrix

OK = "ok"
FAILURE = "detected-failure"


@dataclass(frozen=True)
class DecodeResult:
    status: str
    value: tuple[int, ...] | None
    x: tuple[int, ...] | None = None
    z: tuple[int, ...] | None = None

    @property
    def ok(self) -> bool:
        return self.status == OK


def _split(code: LinearNetworkCode, y: Sequence) -> tuple[list[int], list[int]]:
    n_in = code.G.ncols
    if len(y) != n_in:
        raise DecodingError(f"received word of length {len(y)}, expected {n_in}")
    keep = [j for j, v in enumerate(y) if v is not STAR]
    return keep, [code.field.coerce(y[j]) for j in keep]


def _solve(code: LinearNetworkCode, M: FieldMatrix, cols: list[int], yk: list[int],
           rho: Sequence[int]) -> tuple | None:
    """Solve x.F + z_rho.G_rho = y on the kept columns.

    Returns (a, x, z, unique) or None; unique tells whether every solution gives
    the same target value.
    """
    Fd = code.field
    sk = code.F.nrows
    rows = [[r[j] for j in cols] for r in code.F.rows]
    rows += [[code.G.rows[e][j] for j in cols] for e in rho]
    sol = solve_left_rows(Fd, rows, yk) if cols else [0] * len(rows)
    if sol is None:
        return None
    x = tuple(sol[:sk])
    z = [0] * code.network.num_edges
    for e, c in zip(rho, sol[sk:]):
        z[e] = c
    kernel = FieldMatrix.from_rows(Fd, rows, len(cols)).left_null_space() if cols else \
        FieldMatrix.identity(Fd, len(rows))
    unique = not any(any(M.vecmul(v[:sk])) for v in kernel.rows)
    return M.vecmul(x), x, tuple(z), unique


def _punctured_classes(code: LinearNetworkCode, cols: list[int]) -> list[int]:
    Fd = code.field
    seen: dict[tuple[int, ...], int] = {}
    for e, row in enumerate(code.G.rows):
        r = [row[j] for j in cols]
        if any(r):
            lead = next(c for c in r if c)
            seen.setdefault(tuple(Fd.scale(Fd.inv(lead), r)), e)
    return sorted(seen.values())


def md_decode(code: LinearNetworkCode, T: FieldMatrix, k: int | None, y: Sequence, tau: int) -> DecodeResult:
    """Minimum-distance decoding against at most tau edge errors.

    Supports are tried by increasing size; the first size admitting a solution
    gives the answer.  STAR coordinates, if present, are punctured (erasures),
    which is sound as long as #STAR + 2*tau < d_min.
    """
    k = code.k if k is None else k
    M = target_matrix(T, k)
    cols, yk = _split(code, y)
    if not cols:
        raise DecodingError("every coordinate is erased")
    reps = _punctured_classes(code, cols)
    Fd = code.field
    for size in range(0, tau + 1):
        found: dict[tuple[int, ...], tuple] = {}
        for rho in combinations(reps, size):
            if size > 1 and rank_rows(Fd, [[code.G.rows[e][j] for j in cols] for e in rho], len(cols)) < size:
                continue
            res = _solve(code, M, cols, yk, rho)
            if res is None:
                continue
            a, x, z, unique = res
            if not unique:
                raise InvariantBreach("decoding is ambiguous; the distance precondition does not hold")
            found.setdefault(a, (x, z))
        if len(found) > 1:
            raise InvariantBreach("equal-weight supports decode to different values")
        if found:
            (a, (x, z)), = found.items()
            return DecodeResult(OK, a, x, z)
    return DecodeResult(FAILURE, None)


def outage_decode(code: LinearNetworkCode, T: FieldMatrix, k: int | None, y: Sequence,
                  rho_o: Iterable[int]) -> DecodeResult:
    """Decode with all outage locations known: z is confined to rho_o."""
    k = code.k if k is None else k
    rho_o = sorted(set(rho_o))
    sink = code.network.sink_edges
    for j, v in enumerate(y):
        if v is STAR and sink[j] not in rho_o:
            raise DecodingError(f"erased coordinate {j} is not a known outage")
    M = target_matrix(T, k)
    cols, yk = _split(code, y)
    res = _solve(code, M, cols, yk, rho_o)
    if res is None:
        raise DecodingError("no message and outage vector explain the received word")
    a, x, z, unique = res
    if not unique:
        raise DecodingError("outage set too large: the target is not determined")
    return DecodeResult(OK, a, x, z)


def erasure_decode(code: LinearNetworkCode, T: FieldMatrix, k: int | None, y: Sequence) -> DecodeResult:
    """Match the word on its non-STAR coordinates against the error-free image."""
    k = code.k if k is None else k
    M = target_matrix(T, k)
    cols, yk = _split(code, y)
    if not cols:
        raise DecodingError("every coordinate is erased")
    res = _solve(code, M, cols, yk, ())
    if res is None:
        raise DecodingError("no message matches the non-erased coordinates")
    a, x, _, unique = res
    if not unique:
        raise DecodingError("several target values match the non-erased coordinates")
    return DecodeResult(OK, a, x, (0,) * code.network.num_edges)
