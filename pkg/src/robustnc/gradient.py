"""Straggler- and Byzantine-tolerant gradient coding on top of three-layer sum codes.

Data subsets are sources, workers are relays and the master is the sink, so
recovering the full gradient is robust computation of the sum.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .decoder import erasure_decode, md_decode
from .distance import min_distance
from .errors import DecodingError, GradientCodingError, RobustNCError
from .field import Field, FieldMatrix, ones_column
from .linear_code import STAR, LinearNetworkCode
from .network import Edge, Network, validate
from .sum_construction import three_layer_sum_code


@dataclass(frozen=True)
class WorkerProfile:
    r: Fraction   # storage fraction
    s: Fraction   # speed

    def __post_init__(self):
        object.__setattr__(self, "r", Fraction(self.r))
        object.__setattr__(self, "s", Fraction(self.s))
        if not 0 <= self.r <= 1:
            raise GradientCodingError(f"storage fraction {self.r} outside [0, 1]")
        if self.s <= 0:
            raise GradientCodingError(f"speed {self.s} must be positive")


@dataclass(frozen=True)
class DataAssignment:
    sizes: tuple[Fraction, ...]            # relative size of each subset
    Z: tuple[tuple[int, ...], ...]         # subsets held by each worker

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(Fraction(x) for x in self.sizes))
        object.__setattr__(self, "Z", tuple(tuple(sorted(set(z))) for z in self.Z))
        for z in self.Z:
            for j in z:
                if not 0 <= j < self.K:
                    raise GradientCodingError(f"subset index {j} outside 0..{self.K - 1}")

    @property
    def K(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return len(self.Z)

    def replication(self) -> list[int]:
        return [sum(1 for z in self.Z if j in z) for j in range(self.K)]

    def loads(self) -> list[Fraction]:
        total = sum(self.sizes)
        return [sum((self.sizes[j] for j in z), Fraction(0)) / total for z in self.Z]

    @classmethod
    def cyclic(cls, n: int, width: int) -> "DataAssignment":
        """n equal subsets; worker i holds subsets i, i+1, ..., i+width-1 (mod n)."""
        return cls((Fraction(1, n),) * n, tuple(tuple((i + t) % n for t in range(width)) for i in range(n)))

    def to_dict(self) -> dict:
        return {"K": self.K, "sizes": [str(x) for x in self.sizes], "Z": [list(z) for z in self.Z]}

    @classmethod
    def from_dict(cls, d: dict) -> "DataAssignment":
        sizes = [Fraction(x) for x in d["sizes"]]
        if "K" in d and d["K"] != len(sizes):
            raise GradientCodingError("K disagrees with the number of subset sizes")
        return cls(tuple(sizes), tuple(tuple(z) for z in d["Z"]))


def build_network(assignment: DataAssignment) -> Network:
    """Subsets -> workers -> master."""
    rep = assignment.replication()
    orphans = [j for j, c in enumerate(rep) if c == 0]
    if orphans:
        raise GradientCodingError(f"subset {orphans[0]} is assigned to no worker")
    subs = [f"D{j}" for j in range(assignment.K)]
    workers = [f"W{i}" for i in range(assignment.n)]
    edges = [Edge(f"D{j}-W{i}", f"D{j}", f"W{i}")
             for j in range(assignment.K) for i, z in enumerate(assignment.Z) if j in z]
    edges += [Edge(f"W{i}-M", f"W{i}", "M") for i in range(assignment.n)]
    return validate(Network(tuple(subs + workers + ["M"]), tuple(edges), tuple(subs), ("M",)))


def check_replication(assignment: DataAssignment, tau_s: int, m: int) -> bool:
    return min(assignment.replication()) >= tau_s + m


@dataclass(frozen=True, eq=False)
class GradientCodingScheme:
    assignment: DataAssignment
    network: Network
    code: LinearNetworkCode
    d_min: int
    tau_s: int
    tau_b: int
    m: int
    p: int
    seed: int = 0

    @property
    def field(self) -> Field:
        return self.code.field

    @property
    def T(self) -> FieldMatrix:
        return ones_column(self.field, self.assignment.K)

    def encoder(self, i: int) -> tuple[int, ...]:
        """f_i: column of the global matrix for the edge from worker i to the master."""
        return self.code.F.col(i)

    def params(self) -> dict:
        return {"tau_s": self.tau_s, "tau_b": self.tau_b, "m": self.m, "p": self.p,
                "q": self.field.q, "seed": self.seed, "d_min": self.d_min}


def build_scheme(assignment: DataAssignment, tau_s: int, tau_b: int, m: int, p: int,
                 field: Field, seed: int = 0) -> GradientCodingScheme:
    if m < 1 or p < 1 or p % m:
        raise GradientCodingError(f"m={m} must divide p={p}")
    if tau_s < 0 or tau_b < 0:
        raise GradientCodingError("tolerances must be nonnegative")
    if not check_replication(assignment, tau_s, m):
        raise GradientCodingError(
            f"every subset needs at least tau_s+m={tau_s + m} workers, minimum is {min(assignment.replication())}")
    if tau_b and not check_replication(assignment, 2 * tau_b, m):
        raise GradientCodingError(
            f"Byzantine tolerance {tau_b} needs replication 2*tau_b+m={2 * tau_b + m}")
    net = build_network(assignment)
    bundle = three_layer_sum_code(net, m, field)
    d = bundle.certificate.d_min
    if d < tau_s + 1 or d < 2 * tau_b + 1:
        raise GradientCodingError(f"distance {d} too small for tau_s={tau_s}, tau_b={tau_b}")
    return GradientCodingScheme(assignment, net, bundle.code, d, tau_s, tau_b, m, p, seed)


def _blocks(scheme: GradientCodingScheme) -> int:
    return scheme.p // scheme.m


def worker_encode(scheme: GradientCodingScheme, i: int, gradients: Mapping[int, Sequence[int]]) -> tuple[int, ...]:
    """Message of worker i: for each block l, sum over held subsets of g_j(l) . f_i."""
    F, m = scheme.field, scheme.m
    f = scheme.encoder(i)
    out = []
    held = scheme.assignment.Z[i]
    for j in held:
        if j not in gradients:
            raise GradientCodingError(f"worker {i} is missing the gradient of subset {j}")
        if len(gradients[j]) != scheme.p:
            raise GradientCodingError(f"gradient {j} has length {len(gradients[j])}, expected {scheme.p}")
    for b in range(_blocks(scheme)):
        acc = 0
        for j in held:
            g = gradients[j]
            for c in range(m):
                coef = f[j * m + c]
                if coef:
                    acc = F.add(acc, F.mul(coef, F.coerce(g[b * m + c])))
        out.append(acc)
    return tuple(out)


def master_decode(scheme: GradientCodingScheme, messages: Sequence, tau_b: int | None = None) -> tuple[int, ...]:
    """Recover sum_j g_j from worker messages; STAR marks a straggler.

    Erasure decoding is used without Byzantine budget; otherwise minimum
    distance decoding over the non-straggler coordinates.
    """
    tau_b = scheme.tau_b if tau_b is None else tau_b
    if len(messages) != scheme.assignment.n:
        raise GradientCodingError(f"{len(messages)} messages for {scheme.assignment.n} workers")
    stars = sum(1 for msg in messages if msg is STAR)
    if stars > scheme.tau_s:
        raise GradientCodingError(f"{stars} stragglers exceed tau_s={scheme.tau_s}")
    if stars + 2 * tau_b > scheme.d_min - 1:
        raise GradientCodingError("straggler and Byzantine budgets exceed the code distance")
    total = [0] * scheme.p
    T = scheme.T
    for b in range(_blocks(scheme)):
        y = tuple(STAR if msg is STAR else msg[b] for msg in messages)
        try:
            res = erasure_decode(scheme.code, T, scheme.m, y) if tau_b == 0 else \
                md_decode(scheme.code, T, scheme.m, y, tau_b)
        except DecodingError as exc:
            raise GradientCodingError(f"block {b}: {exc}") from None
        if not res.ok:
            raise GradientCodingError(f"block {b}: more corrupted workers than tolerated")
        total[b * scheme.m:(b + 1) * scheme.m] = res.value
    return tuple(total)


# ---------------------------------------------------------------------------
# Load optimisation and assignment
# ---------------------------------------------------------------------------

def _covered(profiles: Sequence[WorkerProfile], t: Fraction) -> Fraction:
    return sum((min(w.r, t * w.s) for w in profiles), Fraction(0))


def optimize_load(profiles: Sequence[WorkerProfile], tau_s: int, m: int) -> tuple[Fraction, ...]:
    """Loads minimising max mu_i / s_i subject to mu_i <= r_i and sum mu_i >= tau_s + m.

    The smallest feasible time t solves sum min(r_i, t s_i) = tau_s + m; the
    left side is piecewise linear with breakpoints r_i / s_i, so binary search
    over breakpoints locates the piece and the piece is solved exactly.
    """
    L = Fraction(tau_s + m)
    if sum(w.r for w in profiles) < L:
        raise GradientCodingError(f"total storage {sum(w.r for w in profiles)} below tau_s+m={L}")
    bps = sorted({w.r / w.s for w in profiles})
    lo, hi = 0, len(bps) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _covered(profiles, bps[mid]) >= L:
            hi = mid
        else:
            lo = mid + 1
    upper = bps[lo]
    lower = bps[lo - 1] if lo > 0 else Fraction(0)
    # on (lower, upper] workers with breakpoint <= lower are saturated
    fixed = sum((w.r for w in profiles if w.r / w.s <= lower), Fraction(0))
    slope = sum((w.s for w in profiles if w.r / w.s > lower), Fraction(0))
    t = (L - fixed) / slope
    if not lower <= t <= upper or _covered(profiles, t) != L:
        raise GradientCodingError("load optimisation failed to bracket the solution")
    return tuple(min(w.r, t * w.s) for w in profiles)


def load_to_assignment(mu: Sequence, tau_s: int, m: int) -> DataAssignment:
    """Wrap worker intervals of length mu_i around the unit circle; cut at every endpoint.

    Laying the intervals end to end covers [0, sum mu) and so every point of
    the circle at least floor(sum mu) >= tau_s + m times, each worker at most
    once since mu_i <= 1.
    """
    mu = [Fraction(x) for x in mu]
    L = tau_s + m
    if any(not 0 <= x <= 1 for x in mu):
        raise GradientCodingError("every load must lie in [0, 1]")
    if sum(mu) < L:
        raise GradientCodingError(f"loads sum to {sum(mu)}, below tau_s+m={L}")
    starts = []
    c = Fraction(0)
    for x in mu:
        starts.append(c)
        c += x
    cuts = sorted({Fraction(0)} | {s - (s.numerator // s.denominator) for s in starts + [c]})
    segs = list(zip(cuts, cuts[1:] + [Fraction(1)]))
    segs = [(a, b) for a, b in segs if b > a]
    Z = []
    for st, x in zip(starts, mu):
        held = []
        for j, (a, b) in enumerate(segs):
            mid = (a + b) / 2
            # is mid inside [st, st + x) modulo 1?
            off = (mid - st) % 1
            if x == 1 or off < x:
                held.append(j)
        Z.append(tuple(held))
    a = DataAssignment(tuple(b - a for a, b in segs), tuple(Z))
    if a.loads() != mu:
        raise GradientCodingError("realised loads differ from the requested ones")
    if min(a.replication()) < L:
        raise GradientCodingError("interval filling left a subset under-covered")
    return a


# ---------------------------------------------------------------------------
# End-to-end simulation
# ---------------------------------------------------------------------------

def quantize(values: Sequence[float], scale: int, field: Field) -> tuple[int, ...]:
    """Best-effort fixed-point embedding of reals into a prime field."""
    if not field.is_prime_field:
        raise GradientCodingError("quantisation needs a prime field")
    return tuple(round(v * scale) % field.p for v in values)


def dequantize(values: Sequence[int], scale: int, field: Field) -> tuple[float, ...]:
    p = field.p
    return tuple(((v - p) if v > p // 2 else v) / scale for v in values)


def simulate(scheme: GradientCodingScheme, gradients: Sequence[Sequence[int]], stragglers=(),
             byzantine: Mapping[int, Sequence[int] | None] | None = None, seed: int = 0,
             timings: bool = False) -> dict:
    """Encode at every worker, drop stragglers, corrupt Byzantine workers, decode at the master.

    A Byzantine entry of None adds a random nonzero offset to that worker's message.
    """
    F = scheme.field
    rng = random.Random(seed)
    byzantine = dict(byzantine or {})
    stragglers = set(stragglers)
    expected = [0] * scheme.p
    for g in gradients:
        expected = F.axpy(expected, 1, [F.coerce(v) for v in g])
    t0 = time.perf_counter()
    grads = {j: tuple(g) for j, g in enumerate(gradients)}
    msgs = [worker_encode(scheme, i, {j: grads[j] for j in z}) for i, z in enumerate(scheme.assignment.Z)]
    t1 = time.perf_counter()
    received: list = list(msgs)
    for i in stragglers:
        received[i] = STAR
    for i, bad in byzantine.items():
        if i in stragglers:
            continue
        if bad is None:
            off = [rng.randrange(F.q) for _ in msgs[i]]
            if not any(off):
                off[0] = 1
            bad = tuple(F.add(a, b) for a, b in zip(msgs[i], off))
        received[i] = tuple(bad)
    corrupted = sum(1 for i in byzantine if i not in stragglers and tuple(received[i]) != msgs[i])
    within = len(stragglers) <= scheme.tau_s and corrupted <= scheme.tau_b and \
        len(stragglers) + 2 * corrupted <= scheme.d_min - 1
    report = {"stragglers": sorted(stragglers), "byzantine": sorted(byzantine), "within_budget": within,
              "expected": list(expected)}
    try:
        decoded = master_decode(scheme, received)
        report.update(decoded=list(decoded), success=list(decoded) == expected, error=None)
    except RobustNCError as exc:
        report.update(decoded=None, success=False, error=str(exc))
    report["expected_failure"] = not within
    t2 = time.perf_counter()
    if timings:
        report["timings"] = {"encode": t1 - t0, "decode": t2 - t1}
    return report


def straggler_sweep(scheme: GradientCodingScheme, gradients: Sequence[Sequence[int]]) -> bool:
    """True when every straggler set of size tau_s decodes the exact sum."""
    for S in combinations(range(scheme.assignment.n), scheme.tau_s):
        if not simulate(scheme, gradients, S)["success"]:
            return False
    return True


def verify_distance(scheme: GradientCodingScheme) -> int:
    return min_distance(scheme.code, scheme.T, scheme.m).d_min
