import random

import pytest

from helpers import example_net, random_dag
from robustnc.distance import enumerate_R, min_distance, phi_intersects
from robustnc.errors import ConstructionError, FieldTooSmall
from robustnc.field import GF, FieldMatrix, rank_rows
from robustnc.identity_construction import choose_g, construct_identity_code, init_state, update_edge
from robustnc.linear_code import computes_function
from robustnc.network import Network, cut_quantities, validate


def parallel(n=3):
    return validate(Network.build(["s", "t"], [(f"a{i}", "s", "t") for i in range(n)], ["s"], "t"))


def two_by_two():
    E = [("a0", "s1", "t"), ("a1", "s1", "t"), ("b0", "s2", "t"), ("b1", "s2", "t")]
    return validate(Network.build(["s1", "s2", "t"], E, ["s1", "s2"], "t"))


def test_init_state_examples():
    net = parallel()
    pats = enumerate_R(net, 2)
    st = init_state(net, 1, 2, GF(3), pats)
    for rho in pats:
        assert st.cuts[rho] == [("msg", 0)] + [("err", e) for e in rho]
        assert st.cut_rank(rho) == 3
    net2 = two_by_two()
    delta = cut_quantities(net2, FieldMatrix.identity(GF(5), 2), 1).delta
    assert delta == 1
    st = init_state(net2, 1, delta, GF(5))
    assert len(st.patterns) == 4
    for rho in st.patterns:
        assert len(st.families[rho].paths) == 2 + delta


def test_choose_g_and_update():
    net = parallel()
    F = GF(3)
    st = init_state(net, 1, 2, F)
    rng = random.Random(0)
    for e in net.edge_topo_order:
        g, coeffs = choose_g(st, e, rng)
        update_edge(st, e, g, coeffs)
        assert st.vectors[("edge", e)][st.sk + e] == 1
    sink = set(net.sink_edges)
    for rho in st.patterns:
        assert all(c[0] == "edge" and c[1] in sink for c in st.cuts[rho])


def test_update_without_vector_sets_unit():
    E = [("a", "s", "t"), ("b", "s", "u"), ("c", "u", "t")]
    net = validate(Network.build(["s", "u", "t"], E, ["s"], "t"))
    st = init_state(net, 2, 0, GF(5))
    used = set().union(*st.edge_sets.values())
    assert used == {0, 1, 2}
    update_edge(st, 0, None, None)
    assert st.vectors[("edge", 0)] == st.unit(st.sk + 0)


def test_normalisation_of_g():
    net = parallel()
    F = GF(5)
    st = init_state(net, 1, 2, F)
    e = 0
    g, coeffs = choose_g(st, e, 3)
    g2 = F.scale(2, g)
    coeffs2 = {c: F.mul(2, a) for c, a in coeffs.items()}
    update_edge(st, e, g2, coeffs2)
    if g[st.sk + e]:
        assert st.vectors[("edge", e)] == F.scale(F.inv(g[st.sk + e]), g)


@pytest.mark.parametrize("net,k,q,d", [
    (parallel(), 1, 3, 3),
    (two_by_two(), 1, 5, 2),
    (two_by_two(), 2, 5, 1),
    (example_net(), 1, 13, 2),
])
def test_construct_examples(net, k, q, d):
    r = construct_identity_code(net, k, GF(q), seed=1)
    I = FieldMatrix.identity(GF(q), net.s)
    assert r.certificate.d_min == d == r.delta + 1
    assert computes_function(r.code, I, k)
    assert min_distance(r.code, I, k, prune=False).d_min == d


def test_field_below_R_rejected():
    with pytest.raises(FieldTooSmall):
        construct_identity_code(example_net(), 1, GF(11))


def test_rate_too_high():
    with pytest.raises(ConstructionError):
        construct_identity_code(two_by_two(), 3, GF(5))


def test_field_equal_to_R_allowed():
    # |R(2)| = 3 on three parallel edges; q = 3 is accepted
    r = construct_identity_code(parallel(), 1, GF(3), seed=2)
    assert r.num_patterns == 3 and r.certificate.d_min == 3


def test_random_dags():
    rng = random.Random(202)
    done = 0
    while done < 5:
        net = random_dag(rng, n_nodes=(4, 6), n_edges=(5, 9), n_sources=(1, 2), min_h=2)
        F0 = GF(2)
        delta = cut_quantities(net, FieldMatrix.identity(F0, net.s), 1).delta
        if delta < 1:
            continue
        pats = enumerate_R(net, delta)
        from robustnc.field import next_prime
        F = GF(next_prime(max(len(pats), 2)))
        r = construct_identity_code(net, 1, F, seed=done)
        I = FieldMatrix.identity(F, net.s)
        assert r.certificate.d_min == delta + 1 == cut_quantities(net, I, 1).singleton_bound
        for rho in pats:
            assert phi_intersects(r.code, I, 1, rho) is None
        assert r.invariant_checks >= len(pats) * net.num_edges
        done += 1
