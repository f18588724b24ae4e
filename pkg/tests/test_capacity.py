import random
from fractions import Fraction

import pytest

from helpers import example_net, random_dag
from robustnc.capacity import (classify_target, robust_lower, robust_upper, time_sharing_scheme)
from robustnc.decoder import md_decode
from robustnc.distance import is_robust
from robustnc.errors import CapacityError
from robustnc.field import GF, FieldMatrix, ones_column
from robustnc.linear_code import transmit
from robustnc.network import Network, validate


def disjoint3():
    E = [(f"a{i}", "s1", "t") for i in range(3)] + [(f"b{i}", "s2", "t") for i in range(3)]
    return validate(Network.build(["s1", "s2", "t"], E, ["s1", "s2"], "t"))


def test_upper_examples():
    F = GF(5)
    net = example_net()
    assert robust_upper(net, ones_column(F, 2), 1) == 1
    assert robust_upper(net, ones_column(F, 2), 0) == 3
    assert robust_upper(disjoint3(), FieldMatrix.identity(F, 2), 1) == 1


def test_tau_too_large():
    with pytest.raises(CapacityError):
        robust_upper(example_net(), ones_column(GF(5), 2), 2)


def test_classify():
    F = GF(5)
    assert classify_target(ones_column(F, 3)) == "sum"
    assert classify_target(FieldMatrix.identity(F, 2)) == "identity"
    assert classify_target(FieldMatrix.from_rows(F, [[1, 0], [1, 1]])) == "general"
    assert classify_target(FieldMatrix.from_rows(F, [[1], [0]])) == "general"


def test_lower_sum_example_with_witness():
    F = GF(5)
    net = example_net()
    rep = robust_lower(net, ones_column(F, 2), 1, F)
    assert rep.lower == rep.upper == 1 and not rep.gap
    code = rep.witness.code
    T = ones_column(code.field, 2)
    assert is_robust(code, T, code.k, 1)
    q = code.field.q
    n = net.num_edges
    for x in [(a, b) for a in range(q) for b in range(q)]:
        for e in range(n):
            z = [0] * n
            z[e] = 1
            assert md_decode(code, T, 1, transmit(code, x, z), 1).value == ((x[0] + x[1]) % q,)


def test_lower_identity_floor():
    F = GF(5)
    net = disjoint3()
    rep = robust_lower(net, FieldMatrix.identity(F, 2), 0, F, build_witness=False)
    assert rep.upper == Fraction(3) and rep.lower == 3
    rep = robust_lower(example_net(), FieldMatrix.identity(F, 2), 0, F, build_witness=False)
    assert rep.upper == Fraction(3, 2) and rep.lower == 1


def test_identity_witness_robust():
    F = GF(13)
    net = disjoint3()
    rep = robust_lower(net, FieldMatrix.identity(F, 2), 1, F)
    code = rep.witness.code
    assert rep.lower == 1
    assert is_robust(code, FieldMatrix.identity(code.field, 2), 1, 1)


def test_time_sharing_identity_two_rounds():
    F = GF(11)
    net = example_net()
    T = FieldMatrix.identity(F, 2)
    ts = time_sharing_scheme(net, T, 0, F)
    assert ts.l == 2 and ts.rate == Fraction(3, 2)
    rng = random.Random(0)
    for _ in range(20):
        x = [rng.randrange(11) for _ in range(6)]
        words = [transmit(c, x) for c in ts.rounds]
        assert ts.decode(words, 0) == tuple(x)


def test_time_sharing_general_target_tau1():
    F = GF(7)
    net = example_net()
    T = FieldMatrix.from_rows(F, [[1, 2], [3, 1]])
    ts = time_sharing_scheme(net, T, 1, F)
    assert ts.rate_per_round == 1
    rng = random.Random(1)
    for _ in range(30):
        x = [rng.randrange(7) for _ in range(2)]
        words = []
        for c in ts.rounds:
            z = [0] * net.num_edges
            z[rng.randrange(net.num_edges)] = rng.randrange(1, 7)
            words.append(transmit(c, x, z))
        want = tuple(F.dot(x, T.col(j)) for j in range(2))
        assert ts.decode(words, 1) == want


def test_general_three_sources():
    F = GF(11)
    E = [("e1", "s1", "t"), ("e2", "s1", "t"), ("e3", "s2", "t"), ("e4", "s2", "a"), ("e5", "s3", "a"),
         ("e6", "s3", "t"), ("e7", "a", "t"), ("e8", "a", "t")]
    net = validate(Network.build(["s1", "s2", "s3", "a", "t"], E, ["s1", "s2", "s3"], "t"))
    T = FieldMatrix.from_rows(F, [[1, 0], [1, 1], [0, 1]])
    rep = robust_lower(net, T, 0, F)
    assert rep.lower == 1 == rep.witness.rate
    assert rep.lower <= rep.upper


def test_rate_nonpositive():
    with pytest.raises(CapacityError):
        time_sharing_scheme(example_net(), ones_column(GF(5), 2), 2, GF(5))


def test_sandwich_random():
    rng = random.Random(303)
    F = GF(7)
    for _ in range(12):
        net = random_dag(rng, min_h=1)
        for T in (ones_column(F, net.s), FieldMatrix.identity(F, net.s)):
            rep = robust_lower(net, T, 0, F, build_witness=False)
            assert rep.lower <= rep.upper
