"""Command-line front end.

Exit status: 0 on success, 1 on a domain error, 2 on a usage error.  All
randomness flows from ``--seed``; with equal inputs and seed the output files
are byte-identical.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from fractions import Fraction

from . import io
from .capacity import robust_lower
from .decoder import erasure_decode, md_decode, outage_decode
from .distance import is_robust, is_robust_exhaustive, min_distance
from .errors import RobustNCError
from .field import GF, Field, FieldMatrix, ones_column
from .gradient import (WorkerProfile, build_scheme, load_to_assignment, optimize_load, simulate)
from .identity_construction import construct_identity_code
from .linear_code import ErrorVector, transmit_with_outages, propagate
from .network import cut_quantities, min_cut
from .sum_construction import construct_sum_code

log = logging.getLogger("robustnc")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"expected integers, got {text!r}") from None


def _fracs(text: str) -> list[Fraction]:
    try:
        return [Fraction(t) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"expected rationals, got {text!r}") from None


def _field(text: str) -> Field:
    """'q' for a prime, or 'p^m'."""
    try:
        if "^" in text:
            p, m = text.split("^")
            return GF(int(p), int(m))
        return GF(int(text))
    except ValueError:
        raise UsageError(f"bad field {text!r}; use a prime or p^m") from None


def _target(text: str, F: Field, s: int) -> FieldMatrix:
    """'sum', 'identity', inline rows '1,0;0,1', or a JSON file {"rows": [...]}."""
    if text == "sum":
        return ones_column(F, s)
    if text == "identity":
        return FieldMatrix.identity(F, s)
    if ";" in text or "," in text or text.isdigit():
        rows = [_ints(r) for r in text.split(";")]
    else:
        rows = io.read_json(text)["rows"]
    if len(rows) != s or len({len(r) for r in rows}) != 1:
        raise UsageError(f"target must have {s} rows of equal length")
    return FieldMatrix.from_rows(F, [[F.coerce(v) for v in r] for r in rows], len(rows[0]))


def _edge_ids(net, text: str | None) -> list[int]:
    if not text:
        return []
    return [net.index_of(t.strip()) for t in text.split(",") if t.strip()]


def _fmt(x: Fraction) -> str:
    return str(Fraction(x))


def _emit(args, obj: dict, plain: str) -> None:
    if getattr(args, "json", False):
        sys.stdout.write(io.dumps(obj))
    else:
        print(plain)


def _save(path, text: str) -> None:
    if path:
        io.write_text(path, text)


# ---------------------------------------------------------------------------
# net
# ---------------------------------------------------------------------------

def cmd_net_validate(args) -> int:
    net = io.read_network(args.net)
    info = {"valid": True, "vertices": len(net.vertices), "edges": net.num_edges,
            "sources": list(net.sources), "sink": net.sink}
    _emit(args, info, f"valid: {len(net.vertices)} vertices, {net.num_edges} edges, "
                      f"{net.s} sources, sink {net.sink}")
    return 0


def cmd_net_mincut(args) -> int:
    net = io.read_network(args.net)
    starts = [v.strip() for v in args.source.split(",") if v.strip()]
    rep = min_cut(net, starts, args.to)
    _emit(args, {"value": rep.value, "cut": list(rep.cut_ids),
                 "separated_sources": list(rep.separated_sources)}, str(rep.value))
    return 0


def cmd_net_bounds(args) -> int:
    net = io.read_network(args.net)
    F = _field(args.field)
    T = _target(args.target, F, net.s)
    out = {}
    if args.k is not None:
        cq = cut_quantities(net, T, args.k)
        out["cut_quantities"] = {"cutset_rate_bound": _fmt(cq.cutset_rate_bound),
                                 "singleton_bound": cq.singleton_bound, "delta": cq.delta}
    if args.tau is not None:
        rep = robust_lower(net, T, args.tau, F, seed=args.seed, build_witness=args.witness)
        out["capacity"] = rep.to_dict()
    if not out:
        raise UsageError("give --tau, --k or both")
    lines = []
    if "cut_quantities" in out:
        c = out["cut_quantities"]
        lines.append(f"cutset rate bound {c['cutset_rate_bound']}, singleton bound {c['singleton_bound']}, "
                     f"delta {c['delta']}")
    if "capacity" in out:
        c = out["capacity"]
        lines.append(f"capacity in [{c['lower']}, {c['upper']}] via {c['scheme']}")
    _emit(args, out, "\n".join(lines))
    return 0


# ---------------------------------------------------------------------------
# code
# ---------------------------------------------------------------------------

def cmd_code_construct_sum(args) -> int:
    net = io.read_network(args.net)
    b = construct_sum_code(net, args.k, _field(args.field), seed=args.seed, grow=not args.no_grow)
    _save(args.out, io.dumps(io.code_to_dict(b.code)))
    summary = b.summary()
    _emit(args, summary, f"sum code: k={b.k} h={b.h} d_min={summary['d_min']} q={summary['q']}")
    return 0


def cmd_code_construct_identity(args) -> int:
    net = io.read_network(args.net)
    r = construct_identity_code(net, args.k, _field(args.field), seed=args.seed)
    _save(args.out, io.dumps(io.code_to_dict(r.code)))
    s = r.summary()
    _emit(args, s, f"identity code: k={s['k']} delta={s['delta']} |R|={s['R_size']} "
                   f"d_min={s['d_min']} q={s['q']}")
    return 0


def _load_code(args):
    net = io.read_network(args.net)
    code = io.read_code(args.code, net)
    T = _target(args.target, code.field, net.s)
    k = code.k if args.k is None else args.k
    if k != code.k:
        raise UsageError(f"--k {k} disagrees with the code rate {code.k}")
    return net, code, T


def cmd_code_distance(args) -> int:
    _, code, T = _load_code(args)
    cert = min_distance(code, T, code.k)
    _emit(args, cert.to_dict(code), str(cert.d_min))
    return 0


def cmd_code_robust(args) -> int:
    _, code, T = _load_code(args)
    ok = is_robust_exhaustive(code, T, args.tau) if args.exhaustive else is_robust(code, T, code.k, args.tau)
    _emit(args, {"robust": ok, "tau": args.tau}, "robust" if ok else "not robust")
    return 0


def cmd_code_simulate(args) -> int:
    net, code, _ = _load_code(args)
    x = _ints(args.message)
    z = ErrorVector.zero(net.num_edges).values
    if args.errors:
        entries = {}
        for tok in args.errors.split(","):
            eid, _, val = tok.partition(":")
            if not val:
                raise UsageError(f"error entries look like edge:value, got {tok!r}")
            entries[net.index_of(eid.strip())] = int(val)
        z = ErrorVector.on(net.num_edges, {e: code.field.coerce(v) for e, v in entries.items()}).values
    outages = _edge_ids(net, args.outages)
    if outages:
        if any(z):
            raise UsageError("combine --errors and --outages in separate runs")
        y = transmit_with_outages(code, x, outages)
    else:
        vals = propagate(code, x, z)
        y = tuple(vals[e] for e in net.sink_edges)
    word = io.format_word(y)
    _save(args.out, word + "\n")
    _emit(args, {"word": word}, word)
    return 0


def cmd_decode(args) -> int:
    net, code, T = _load_code(args)
    y = io.read_word(args.word, code.field)
    if args.outages is not None:
        res = outage_decode(code, T, code.k, y, _edge_ids(net, args.outages))
    elif args.tau == 0:
        res = erasure_decode(code, T, code.k, y)
    else:
        res = md_decode(code, T, code.k, y, args.tau)
    value = None if res.value is None else list(res.value)
    _emit(args, {"status": res.status, "value": value},
          res.status if value is None else " ".join(map(str, value)))
    return 0 if res.ok else 1


# ---------------------------------------------------------------------------
# grad
# ---------------------------------------------------------------------------

def cmd_grad_plan(args) -> int:
    r, s = _fracs(args.r), _fracs(args.s)
    if len(r) != len(s):
        raise UsageError("--r and --s need one entry per worker")
    mu = optimize_load([WorkerProfile(a, b) for a, b in zip(r, s)], args.tau_s, args.m)
    a = load_to_assignment(mu, args.tau_s, args.m)
    _save(args.out, io.dumps(a.to_dict()))
    _emit(args, {"mu": [_fmt(v) for v in mu], "assignment": a.to_dict()},
          "mu = " + ",".join(_fmt(v) for v in mu))
    return 0


def cmd_grad_build(args) -> int:
    a = io.read_assignment(args.assignment)
    sch = build_scheme(a, args.tau_s, args.tau_b, args.m, args.p, _field(args.field), seed=args.seed)
    _save(args.out, io.dumps(io.scheme_to_dict(sch)))
    _emit(args, sch.params(), f"scheme: n={a.n} K={a.K} d_min={sch.d_min} q={sch.field.q}")
    return 0


def cmd_grad_simulate(args) -> int:
    sch = io.read_scheme(args.scheme)
    F = sch.field
    rng = random.Random(args.seed)
    if args.gradients:
        grads = io.read_json(args.gradients)["gradients"]
    else:
        grads = [[rng.randrange(F.q) for _ in range(sch.p)] for _ in range(sch.assignment.K)]
    if len(grads) != sch.assignment.K:
        raise UsageError(f"{len(grads)} gradients for {sch.assignment.K} subsets")
    byz = {i: None for i in _ints(args.byzantine or "")}
    rep = simulate(sch, grads, _ints(args.stragglers or ""), byz, seed=args.seed, timings=args.timings)
    _save(args.out, io.dumps(rep))
    _emit(args, rep, "success" if rep["success"] else f"failure: {rep['error']}")
    return 0 if rep["success"] else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robustnc", description="Robust linear network function computation.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="group", required=True)

    def common(sp, seed=False):
        sp.add_argument("--json", action="store_true", help="structured output on stdout")
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        return sp

    net = sub.add_parser("net").add_subparsers(dest="cmd", required=True)
    sp = common(net.add_parser("validate"))
    sp.add_argument("--net", required=True)
    sp.set_defaults(func=cmd_net_validate)
    sp = common(net.add_parser("mincut"))
    sp.add_argument("--net", required=True)
    sp.add_argument("--from", dest="source", required=True, help="comma separated start vertices")
    sp.add_argument("--to", default=None)
    sp.set_defaults(func=cmd_net_mincut)
    sp = common(net.add_parser("bounds"), seed=True)
    sp.add_argument("--net", required=True)
    sp.add_argument("--target", default="sum")
    sp.add_argument("--field", default="2")
    sp.add_argument("--tau", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--witness", action="store_true", help="also construct a witness code")
    sp.set_defaults(func=cmd_net_bounds)

    code = sub.add_parser("code").add_subparsers(dest="cmd", required=True)
    for name, fn in (("construct-sum", cmd_code_construct_sum), ("construct-identity", cmd_code_construct_identity)):
        sp = common(code.add_parser(name), seed=True)
        sp.add_argument("--net", required=True)
        sp.add_argument("--k", type=int, required=True)
        sp.add_argument("--field", required=True)
        sp.add_argument("--out")
        if name == "construct-sum":
            sp.add_argument("--no-grow", action="store_true")
        sp.set_defaults(func=fn)

    def code_args(sp):
        sp.add_argument("--net", required=True)
        sp.add_argument("--code", required=True)
        sp.add_argument("--target", default="sum")
        sp.add_argument("--k", type=int)
        return sp

    sp = code_args(common(code.add_parser("distance")))
    sp.set_defaults(func=cmd_code_distance)
    sp = code_args(common(code.add_parser("robust")))
    sp.add_argument("--tau", type=int, required=True)
    sp.add_argument("--exhaustive", action="store_true")
    sp.set_defaults(func=cmd_code_robust)
    sp = code_args(common(code.add_parser("simulate")))
    sp.add_argument("--message", required=True, help="x as comma separated symbols")
    sp.add_argument("--errors", help="edge:value pairs")
    sp.add_argument("--outages", help="comma separated edge ids")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_code_simulate)

    sp = code_args(common(sub.add_parser("decode")))
    sp.add_argument("--word", required=True, help="file of symbols, '*' for erasures")
    sp.add_argument("--tau", type=int, default=1)
    sp.add_argument("--outages", help="known outage edge ids")
    sp.set_defaults(func=cmd_decode)

    grad = sub.add_parser("grad").add_subparsers(dest="cmd", required=True)
    sp = common(grad.add_parser("plan"))
    sp.add_argument("--r", required=True)
    sp.add_argument("--s", required=True)
    sp.add_argument("--tau-s", type=int, required=True)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_grad_plan)
    sp = common(grad.add_parser("build"), seed=True)
    sp.add_argument("--assignment", required=True)
    sp.add_argument("--tau-s", type=int, default=0)
    sp.add_argument("--tau-b", type=int, default=0)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--p", type=int, default=1)
    sp.add_argument("--field", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_grad_build)
    sp = common(grad.add_parser("simulate"), seed=True)
    sp.add_argument("--scheme", required=True)
    sp.add_argument("--gradients", help='JSON file {"gradients": [[...], ...]}; random when absent')
    sp.add_argument("--stragglers")
    sp.add_argument("--byzantine")
    sp.add_argument("--timings", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_grad_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except RobustNCError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
