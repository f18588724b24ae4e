"""Acceptance gate: one PASS/FAIL line per criterion, with wall-clock limits."""

import itertools
import random
import time
from fractions import Fraction

import pytest

from helpers import example_code, random_code, random_dag
from robustnc.capacity import robust_lower, robust_upper
from robustnc.decoder import md_decode
from robustnc.distance import enumerate_R, is_robust_exhaustive, min_distance
from robustnc.field import GF, FieldMatrix, next_prime, ones_column
from robustnc.gradient import (DataAssignment, WorkerProfile, build_scheme, load_to_assignment, master_decode,
                               optimize_load, worker_encode)
from robustnc.identity_construction import construct_identity_code
from robustnc.linear_code import STAR, computes_function, derive_matrices, transmit
from robustnc.network import cut_quantities, min_source_cut
from robustnc.sum_construction import construct_sum_code

G_MULTISET = sorted([(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1)] * 3)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail, elapsed, limit):
        ok = ok and (limit is None or elapsed < limit)
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail} [{elapsed:.2f}s" + \
            (f" / limit {limit:g}s]" if limit else "]")
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
    return emit


def test_criterion_1_golden_example(report):
    t0 = time.perf_counter()
    F5 = GF(5)
    code = example_code(F5)
    M = derive_matrices(code)
    ok = M.F.tolist() == [[1, 1, 2], [1, 1, 2]]
    ok &= sorted(M.G.rows) == G_MULTISET
    ok &= min_distance(code, ones_column(F5, 2), 1).d_min == 3
    F4 = GF(2, 2)
    ok &= min_distance(example_code(F4), ones_column(F4, 2), 1).d_min == 3
    report(1, ok, "example F, G multiset, d_min=3 over GF(5) and GF(4)", time.perf_counter() - t0, 1)


def test_criterion_2_decoder_exhaustive(report):
    t0 = time.perf_counter()
    cases = wrong = 0
    for q in (5, 7):
        F = GF(q)
        code = example_code(F)
        T = ones_column(F, 2)
        n = code.network.num_edges
        errors = [[0] * n]
        for e in range(n):
            for c in range(1, q):
                z = [0] * n
                z[e] = c
                errors.append(z)
        for x in itertools.product(range(q), repeat=2):
            want = ((x[0] + x[1]) % q,)
            for z in errors:
                cases += 1
                res = md_decode(code, T, 1, transmit(code, x, z), 1)
                if not res.ok or res.value != want:
                    wrong += 1
    report(2, wrong == 0, f"{cases - wrong}/{cases} words decoded to the true sum", time.perf_counter() - t0, 30)


def test_criterion_3_sum_singleton(report):
    t0 = time.perf_counter()
    rng = random.Random(2024)
    instances = good = 0
    while instances < 25:
        net = random_dag(rng, n_nodes=(5, 8), n_edges=(6, 14), n_sources=(2, 3), min_h=1)
        instances += 1
        h = min_source_cut(net)
        ok = True
        for k in range(1, h + 1):
            b = construct_sum_code(net, k, GF(5), seed=instances * 10 + k)
            T = ones_column(b.field, net.s)
            d = min_distance(b.code, T, k, prune=False).d_min
            ok &= d == h - k + 1 == cut_quantities(net, T, k).singleton_bound
        good += ok
    report(3, good == instances, f"{good}/{instances} random DAGs meet min-cut - k + 1 for every k",
           time.perf_counter() - t0, 300)


def test_criterion_4_identity_singleton(report):
    t0 = time.perf_counter()
    rng = random.Random(77)
    instances = good = positive = 0
    while instances < 15:
        net = random_dag(rng, n_nodes=(4, 7), n_edges=(5, 11), n_sources=(1, 3), min_h=1)
        I2 = FieldMatrix.identity(GF(2), net.s)
        k = max(1, min(cut_quantities(net, I2, 1).cutset_rate_bound.__floor__(), 2))
        delta = cut_quantities(net, I2, k).delta
        pats = [()] if delta == 0 else enumerate_R(net, delta)
        if len(pats) > 60:
            continue
        instances += 1
        positive += delta > 0
        F = GF(next_prime(max(len(pats), 2)))
        r = construct_identity_code(net, k, F, seed=instances)
        d = min_distance(r.code, FieldMatrix.identity(F, net.s), k).d_min
        checks_ok = r.invariant_checks >= len(pats) * net.num_edges
        good += d == delta + 1 and checks_ok
    report(4, good == instances, f"{good}/{instances} random DAGs reach delta + 1 ({positive} with delta > 0), "
                                 "loop invariant asserted after every edge", time.perf_counter() - t0, 300)


def test_criterion_5_robustness_iff(report):
    t0 = time.perf_counter()
    rng = random.Random(55)
    checked = agree = yes = no = 0
    while checked < 40:
        net = random_dag(rng, n_nodes=(4, 6), n_edges=(4, 9), n_sources=(1, 2), min_h=1)
        q = rng.choice([2, 3])
        F = GF(q)
        k = rng.choice([1, 2])
        if q ** (net.s * k) > 81:
            continue
        code = random_code(net, F, k, rng)
        T = rng.choice([ones_column(F, net.s), FieldMatrix.identity(F, net.s)])
        if not computes_function(code, T, k):
            continue
        d = min_distance(code, T, k).d_min
        for tau in range(0, 3):
            if tau > net.num_edges:
                continue
            exhaustive = is_robust_exhaustive(code, T, tau)
            predicted = d >= 2 * tau + 1
            agree += exhaustive == predicted
            yes += predicted
            no += not predicted
            checked += 1
    ok = agree == checked and yes > 0 and no > 0
    report(5, ok, f"{agree}/{checked} exhaustive checks agree with d_min >= 2 tau + 1 "
                  f"({yes} robust, {no} not)", time.perf_counter() - t0, None)


def test_criterion_6_capacity_sandwich(report):
    t0 = time.perf_counter()
    rng = random.Random(66)
    F = GF(7)
    total = good = 0
    while total < 50:
        net = random_dag(rng, n_nodes=(4, 7), n_edges=(5, 12), n_sources=(1, 3), min_h=1)
        h = min_source_cut(net)
        tau = rng.randint(0, (h - 1) // 2)
        kind = total % 3
        if kind == 0:
            T = ones_column(F, net.s)
        elif kind == 1:
            T = FieldMatrix.identity(F, net.s)
        else:
            T = FieldMatrix.from_rows(F, [[rng.randrange(7) for _ in range(2)] for _ in range(net.s)], 2)
            if T.rank() < 2 or any(not any(T.col(j)) for j in range(2)):
                continue
        total += 1
        rep = robust_lower(net, T, tau, F, seed=total, build_witness=(kind == 0))
        upper = robust_upper(net, T, tau)
        ok = rep.lower <= upper == rep.upper
        if kind == 0:
            ok &= rep.lower == upper
            code = rep.witness.code
            ok &= min_distance(code, ones_column(code.field, net.s), code.k).d_min >= 2 * tau + 1
        elif kind == 1:
            ok &= rep.lower == upper.__floor__()
            if upper.denominator == 1:
                ok &= rep.lower == upper
        good += ok
    report(6, good == total, f"{good}/{total} instances: lower <= upper, equality for the sum, "
                             "floor for the identity", time.perf_counter() - t0, None)


def _gradient_instances():
    out = []
    for n in (3, 4, 5):
        for w in range(2, n + 1):
            out.append(DataAssignment.cyclic(n, w))
        prof = [WorkerProfile(1, Fraction(1 + i % 3, 1)) for i in range(n)]
        out.append(load_to_assignment(optimize_load(prof, 1, 1), 1, 1))
        if n >= 4:
            out.append(load_to_assignment(optimize_load(prof, 2, 1), 2, 1))
    return out


def test_criterion_7_gradient_end_to_end(report):
    t0 = time.perf_counter()
    F = GF(11)
    rng = random.Random(7)
    straggler_runs = byz_runs = bad = 0
    for a in _gradient_instances():
        n = a.n
        rep = min(a.replication())
        for m in (1, 2):
            if m > rep:
                continue
            tau_s = rep - m
            s = build_scheme(a, tau_s, 0, m, 2 * m, F)
            grads = [[rng.randrange(11) for _ in range(2 * m)] for _ in range(a.K)]
            want = tuple(sum(g[c] for g in grads) % 11 for c in range(2 * m))
            msgs = [worker_encode(s, i, {j: grads[j] for j in z}) for i, z in enumerate(a.Z)]
            for S in itertools.combinations(range(n), tau_s):
                straggler_runs += 1
                word = [STAR if i in S else msgs[i] for i in range(n)]
                bad += master_decode(s, word) != want
            if rep >= 2 + m:
                sb = build_scheme(a, 0, 1, m, m, F)
                if sb.d_min < 3:
                    bad += 1
                    continue
                g1 = [[rng.randrange(11) for _ in range(m)] for _ in range(a.K)]
                want1 = tuple(sum(g[c] for g in g1) % 11 for c in range(m))
                msgs1 = [worker_encode(sb, i, {j: g1[j] for j in z}) for i, z in enumerate(a.Z)]
                for i in range(n):
                    for off in range(1, 11):
                        byz_runs += 1
                        word = list(msgs1)
                        word[i] = ((word[i][0] + off) % 11,)
                        bad += master_decode(sb, word) != want1
    ok = bad == 0 and byz_runs > 0
    report(7, ok, f"{straggler_runs} straggler sets and {byz_runs} single corruptions, {bad} wrong",
           time.perf_counter() - t0, 120)


FAREY = sorted({Fraction(a, b) for b in range(1, 25) for a in range(b + 1)})
BANK = [
    ((1, 1, 1), (1, 1, 2)),
    ((1, 1, 1), (1, 1, 1)),
    ((1, 1, 1), (1, 2, 3)),
    ((Fraction(1, 2), 1, 1), (1, 1, 1)),
    ((Fraction(3, 4), 1, 1), (3, 1, 2)),
    ((1, Fraction(2, 3), 1), (1, 2, 1)),
    ((1, 1, Fraction(1, 2)), (2, 1, 4)),
    ((1, 1, 1), (2, 3, 3)),
]


def _grid_optimum(prof, L):
    best = None
    for m1 in FAREY:
        if m1 > prof[0].r:
            break
        for m2 in FAREY:
            if m2 > prof[1].r:
                break
            need = L - m1 - m2
            cands = [v for v in FAREY if v >= need and v <= prof[2].r]
            if not cands:
                continue
            t = max(m1 / prof[0].s, m2 / prof[1].s, cands[0] / prof[2].s)
            best = t if best is None else min(best, t)
    return best


def test_criterion_8_load_optimizer(report):
    t0 = time.perf_counter()
    good = total = 0
    for r, s in BANK:
        prof = [WorkerProfile(a, b) for a, b in zip(r, s)]
        for tau_s, m in ((1, 1), (0, 2), (0, 1)):
            L = tau_s + m
            if sum(p.r for p in prof) < L:
                continue
            total += 1
            mu = optimize_load(prof, tau_s, m)
            t = max(x / p.s for x, p in zip(mu, prof))
            g = _grid_optimum(prof, L)
            a = load_to_assignment(mu, tau_s, m)
            good += t == g and a.loads() == list(mu) and min(a.replication()) >= L
    report(8, good == total, f"{good}/{total} profiles match the grid optimum and realise mu exactly",
           time.perf_counter() - t0, None)
