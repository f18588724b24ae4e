"""Codes delivering every source message with distance delta + 1.

Every edge carries an extended global vector indexed by the sk message
symbols followed by the edges (error components).  For each error pattern rho
of size and rank delta a frontier CUT_rho walks down a family of sk + delta
edge-disjoint paths, and each new edge vector is chosen so the frontier keeps
full rank sk + delta on the message-plus-rho coordinates.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field as dc_field
from itertools import product

from .distance import DistanceCertificate, enumerate_R, min_distance, phi_intersects
from .errors import ConstructionError, FieldTooSmall, InvariantBreach
from .field import Field, FieldMatrix, in_span, rank_rows, rref_rows
from .linear_code import LinearNetworkCode, computes_function
from .network import Network, PathFamily, cut_quantities, disjoint_path_family

log = logging.getLogger(__name__)

Channel = tuple  # ("msg", j) | ("err", e) | ("edge", e)


@dataclass
class ConstructionState:
    network: Network
    field: Field
    k: int
    delta: int
    patterns: list[tuple[int, ...]]
    families: dict[tuple[int, ...], PathFamily]
    edge_sets: dict[tuple[int, ...], set[int]]
    pred: dict[tuple[int, ...], dict[int, Channel]]
    cuts: dict[tuple[int, ...], list[Channel]]
    vectors: dict[Channel, list[int]]
    masks: dict[tuple[int, ...], set[int]]
    source_coeffs: dict[tuple[int, int, int], int] = dc_field(default_factory=dict)
    transfer_coeffs: dict[tuple[int, int], int] = dc_field(default_factory=dict)
    invariant_checks: int = 0
    draws: int = 0
    fallbacks: int = 0

    @property
    def sk(self) -> int:
        return self.network.s * self.k

    @property
    def length(self) -> int:
        return self.sk + self.network.num_edges

    def unit(self, i: int) -> list[int]:
        v = [0] * self.length
        v[i] = 1
        return v

    def restrict(self, rho, v) -> list[int]:
        """f^rho: components outside [sk] and rho set to zero."""
        m = self.masks[rho]
        return [c if i in m else 0 for i, c in enumerate(v)]

    def restrict_c(self, rho, v) -> list[int]:
        """f^{rho^c}: components inside [sk] and rho set to zero."""
        m = self.masks[rho]
        return [0 if i in m else c for i, c in enumerate(v)]

    def cut_rank(self, rho) -> int:
        return rank_rows(self.field, [self.restrict(rho, self.vectors[c]) for c in self.cuts[rho]], self.length)

    def check_invariant(self) -> None:
        want = self.sk + self.delta
        for rho in self.patterns:
            r = self.cut_rank(rho)
            self.invariant_checks += 1
            if r != want:
                raise InvariantBreach(f"frontier rank {r} != sk+delta={want} for pattern {rho}")

    def inputs(self, e: int) -> list[Channel]:
        """Channels feeding edge e: In(tail e), or the message channels at a source, plus e'."""
        net = self.network
        tail = net.edges[e].tail
        if tail in net.sources:
            i = net.sources.index(tail)
            chans = [("msg", i * self.k + j) for j in range(self.k)]
        else:
            chans = [("edge", d) for d in net.in_edges(tail)]
        return chans + [("err", e)]


def init_state(net: Network, k: int, delta: int, field: Field,
               patterns: list[tuple[int, ...]] | None = None, limit: int | None = 5000) -> ConstructionState:
    if delta < 0:
        raise ConstructionError("delta is negative: rate k exceeds the cut-set bound")
    if patterns is None:
        patterns = [()] if delta == 0 else enumerate_R(net, delta, limit)
    if not patterns:
        raise ConstructionError(f"R({delta}) is empty")
    sk = net.s * k
    families, edge_sets, preds, cuts, masks = {}, {}, {}, {}, {}
    for rho in patterns:
        fam = disjoint_path_family(net, rho, k, delta)
        families[rho] = fam
        pred: dict[int, Channel] = {}
        next_msg = {i: 0 for i in range(net.s)}
        for path, (kind, tag) in zip(fam.paths, fam.origins):
            if kind == "source":
                start: Channel = ("msg", tag * k + next_msg[tag])
                next_msg[tag] += 1
            else:
                start = ("err", tag)
            prev = start
            for e in path:
                pred[e] = prev
                prev = ("edge", e)
        preds[rho] = pred
        edge_sets[rho] = set(pred)
        cuts[rho] = [("msg", j) for j in range(sk)] + [("err", e) for e in rho]
        masks[rho] = set(range(sk)) | {sk + e for e in rho}
    st = ConstructionState(net, field, k, delta, list(patterns), families, edge_sets, preds, cuts, {}, masks)
    for j in range(sk):
        st.vectors[("msg", j)] = st.unit(j)
    for e in range(net.num_edges):
        st.vectors[("err", e)] = st.unit(sk + e)
    st.check_invariant()
    return st


def _forbidden(st: ConstructionState, e: int, gens: list[Channel]) -> list[tuple[list, list[int]]]:
    """RREF bases of L^rho(CUT_rho - {e_rho}) + L^{rho^c}(In(i) + {e'}) for each rho using e."""
    out = []
    for rho in st.patterns:
        if e not in st.edge_sets[rho]:
            continue
        ep = st.pred[rho][e]
        rows = [st.restrict(rho, st.vectors[c]) for c in st.cuts[rho] if c != ep]
        rows += [st.restrict_c(rho, st.vectors[c]) for c in gens]
        out.append((rho, rref_rows(st.field, rows, st.length)))
    return out


def _combine(st: ConstructionState, gens: list[Channel], coeffs) -> list[int]:
    v = [0] * st.length
    for c, a in zip(gens, coeffs):
        if a:
            v = st.field.axpy(v, a, st.vectors[c])
    return v


def choose_g(st: ConstructionState, e: int, rng: random.Random | int, max_draws: int = 64,
             enum_limit: int = 4096) -> tuple[list[int], dict[Channel, int]]:
    """Pick g in the span of the inputs of e avoiding every forbidden sum-space.

    Returns the vector and its coefficients over the input channels.
    """
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    F = st.field
    gens = st.inputs(e)
    forb = _forbidden(st, e, gens)
    for rho, (basis, piv) in forb:
        ep = st.pred[rho][e]
        if ep not in gens or in_span(F, basis, piv, st.vectors[ep]):
            raise InvariantBreach(f"predecessor of edge {e} lies in the forbidden space for {rho}")

    def ok(v):
        return not any(in_span(F, b, p, v) for _, (b, p) in forb)

    for _ in range(max_draws):
        st.draws += 1
        coeffs = [rng.randrange(F.q) for _ in gens]
        v = _combine(st, gens, coeffs)
        if ok(v):
            return v, dict(zip(gens, coeffs))
    # exhaustive fallback over an independent subset of the inputs
    st.fallbacks += 1
    basis_idx: list[int] = []
    rows: list[list[int]] = []
    for i, c in enumerate(gens):
        trial = rows + [st.vectors[c]]
        if rank_rows(F, trial, st.length) == len(trial):
            rows, basis_idx = trial, basis_idx + [i]
    if F.q ** len(basis_idx) <= enum_limit:
        for vals in product(range(F.q), repeat=len(basis_idx)):
            coeffs = [0] * len(gens)
            for i, a in zip(basis_idx, vals):
                coeffs[i] = a
            v = _combine(st, gens, coeffs)
            if ok(v):
                return v, dict(zip(gens, coeffs))
        raise InvariantBreach(f"no admissible vector for edge {e}; the field is below |R(delta)|")
    for _ in range(100 * max_draws):
        coeffs = [rng.randrange(F.q) for _ in gens]
        v = _combine(st, gens, coeffs)
        if ok(v):
            return v, dict(zip(gens, coeffs))
    raise InvariantBreach(f"no admissible vector found for edge {e}")


def update_edge(st: ConstructionState, e: int, g: list[int] | None, coeffs: dict[Channel, int] | None) -> None:
    """Fix the vector of edge e (normalised so its own error enters with coefficient 1)."""
    F = st.field
    net = st.network
    col = st.sk + e
    if g is None:
        st.vectors[("edge", e)] = st.unit(col)
        st.check_invariant()
        return
    coeffs = dict(coeffs)
    if g[col] == 0:
        f = list(g)
        f[col] = 1
    else:
        c = F.inv(g[col])
        f = F.scale(c, g)
        coeffs = {ch: F.mul(c, a) for ch, a in coeffs.items()}
    st.vectors[("edge", e)] = f
    tail = net.edges[e].tail
    for ch, a in coeffs.items():
        if not a:
            continue
        if ch[0] == "msg":
            i = net.sources.index(tail)
            st.source_coeffs[(i, ch[1] - i * st.k, e)] = a
        elif ch[0] == "edge":
            st.transfer_coeffs[(ch[1], e)] = a
    for rho in st.patterns:
        if e in st.edge_sets[rho]:
            ep = st.pred[rho][e]
            cut = st.cuts[rho]
            if ep not in cut:
                raise InvariantBreach(f"predecessor {ep} of edge {e} is not on the frontier of {rho}")
            cut[cut.index(ep)] = ("edge", e)
    st.check_invariant()


@dataclass(frozen=True, eq=False)
class IdentityCodeResult:
    code: LinearNetworkCode
    certificate: DistanceCertificate
    delta: int
    num_patterns: int
    invariant_checks: int
    seed: int

    def summary(self) -> dict:
        return {"delta": self.delta, "R_size": self.num_patterns, "k": self.code.k,
                "q": self.code.field.q, "d_min": self.certificate.d_min, "seed": self.seed}


def construct_identity_code(net: Network, k: int, field: Field, seed: int = 0,
                            limit: int | None = 5000, cross_check: bool = True) -> IdentityCodeResult:
    """Rate-k code delivering all source messages with distance delta + 1."""
    F = field
    ident = FieldMatrix.identity(F, net.s)
    delta = cut_quantities(net, ident, k).delta
    if delta < 0:
        raise ConstructionError(f"rate k={k} exceeds min over source sets of mincut/|I|")
    patterns = [()] if delta == 0 else enumerate_R(net, delta, limit)
    if F.q < len(patterns):
        raise FieldTooSmall(f"q={F.q} is below |R({delta})|={len(patterns)}")
    if F.q == len(patterns):
        log.info("field size equals |R(delta)|; sampling is tight")
    rng = random.Random(seed)
    st = init_state(net, k, delta, F, patterns)
    used = set().union(*st.edge_sets.values())
    for e in net.edge_topo_order:
        if e in used:
            g, coeffs = choose_g(st, e, rng)
            update_edge(st, e, g, coeffs)
        else:
            update_edge(st, e, None, None)
    sink = set(net.sink_edges)
    for rho in st.patterns:
        if any(c[0] != "edge" or c[1] not in sink for c in st.cuts[rho]):
            raise InvariantBreach(f"frontier of {rho} did not reach the sink")
    code = LinearNetworkCode.from_coefficients(net, F, k, st.source_coeffs, st.transfer_coeffs)
    _check_vectors(st, code)
    if not computes_function(code, ident, k):
        raise InvariantBreach("constructed code does not deliver the messages")
    if cross_check:
        for rho in st.patterns:
            if phi_intersects(code, ident, k, rho) is not None:
                raise InvariantBreach(f"pattern {rho} reaches Phi")
    cert = min_distance(code, ident, k)
    if cert.d_min != delta + 1:
        raise InvariantBreach(f"distance {cert.d_min} differs from delta+1={delta + 1}")
    return IdentityCodeResult(code, cert, delta, len(patterns), st.invariant_checks, seed)


def _check_vectors(st: ConstructionState, code: LinearNetworkCode) -> None:
    """The extended vectors tracked during construction must match the derived code."""
    P = code.matrices.P
    Bs = code.B_stack
    F = st.field
    for e in range(st.network.num_edges):
        col = P.col(e)
        want = [F.dot(Bs.rows[j], col) for j in range(st.sk)] + list(col)
        if st.vectors[("edge", e)] != want:
            raise InvariantBreach(f"tracked vector of edge {e} disagrees with the derived code")
