import itertools

import pytest
from hypothesis import given, settings, strategies as st

from robustnc.errors import DimensionError, FieldError, SingularMatrixError
from robustnc.field import (GF, FieldMatrix, field_arith, field_from_dict, is_irreducible, is_prime,
                            mat_rank, next_prime, prime_factors)

SMALL = [GF(2), GF(3), GF(5), GF(7), GF(2, 2), GF(2, 3), GF(3, 2, [2, 2, 1]), GF(2, 4)]


def test_prime_helpers():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert next_prime(10) == 11 and next_prime(11) == 11
    assert prime_factors(60) == [2, 3, 5]


def test_arith_examples():
    F5, F7, F4 = GF(5), GF(7), GF(2, 2)
    assert field_arith(F5(2), F5(4), "add") == F5(1)
    w = F4(F4.primitive)
    assert field_arith(w, w, "mul") == w + F4(1)
    assert field_arith(F7(3), F7(5), "div") == F7(2)


def test_arith_errors():
    with pytest.raises(FieldError):
        field_arith(GF(5)(1), GF(5)(0), "div")
    with pytest.raises(FieldError):
        field_arith(GF(5)(1), GF(7)(1), "add")
    with pytest.raises(FieldError):
        GF(6)


def test_gf4_modulus_is_x2_x_1():
    F4 = GF(2, 2)
    assert list(F4.modulus) == [1, 1, 1]
    assert is_irreducible(F4.modulus, 2)


@pytest.mark.parametrize("F", SMALL, ids=repr)
def test_field_axioms_exhaustive(F):
    els = list(F.elements())
    for a in els:
        assert F.add(a, F.neg(a)) == 0
        if a:
            assert F.mul(a, F.inv(a)) == 1
    for a, b, c in itertools.product(els, repeat=3):
        assert F.add(F.add(a, b), c) == F.add(a, F.add(b, c))
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))


@pytest.mark.parametrize("F", SMALL, ids=repr)
def test_primitive_generates(F):
    w = F.primitive
    powers = {F.pow(w, e) for e in range(F.q - 1)}
    assert powers == set(range(1, F.q))
    for d in prime_factors(F.q - 1):
        assert F.pow(w, (F.q - 1) // d) != 1


def test_field_roundtrip():
    for F in SMALL:
        assert field_from_dict(F.to_dict()) == F


def test_rank_examples():
    F5 = GF(5)
    assert mat_rank(FieldMatrix.identity(F5, 3)) == 3
    assert mat_rank(FieldMatrix.zeros(F5, 2, 4)) == 0
    assert mat_rank(FieldMatrix.from_rows(F5, [[1, 1, 2], [1, 1, 2]])) == 1


def test_matrix_examples():
    F5, F3 = GF(5), GF(3)
    assert FieldMatrix.from_rows(F5, [[1, 1], [0, 1]]).inverse().tolist() == [[1, 4], [0, 1]]
    ns = FieldMatrix.from_rows(F3, [[1], [1]]).left_null_space()
    assert ns.nrows == 1 and F3.scale(F3.inv(ns.rows[0][0]), ns.rows[0]) == [1, 2]
    R, piv = FieldMatrix.from_rows(F5, [[2, 0], [0, 3]]).rref()
    assert R.tolist() == [[1, 0], [0, 1]] and list(piv) == [0, 1]


def test_matrix_errors():
    F5 = GF(5)
    with pytest.raises(SingularMatrixError):
        FieldMatrix.from_rows(F5, [[1, 2], [2, 4]]).inverse()
    with pytest.raises(DimensionError):
        FieldMatrix.identity(F5, 2) @ FieldMatrix.identity(F5, 3)


def matrices(q_choices=(2, 3, 5, 7), max_dim=5):
    @st.composite
    def build(draw):
        q = draw(st.sampled_from(q_choices))
        r = draw(st.integers(1, max_dim))
        c = draw(st.integers(1, max_dim))
        rows = draw(st.lists(st.lists(st.integers(0, q - 1), min_size=c, max_size=c), min_size=r, max_size=r))
        return FieldMatrix.from_rows(GF(q), rows, c)
    return build()


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_rank_properties(M):
    assert M.rank() == M.T.rank()
    R, piv = M.rref()
    assert R.rank() == M.rank() == len(piv)
    N = M.left_null_space()
    assert N.nrows == M.nrows - M.rank()
    for v in N.rows:
        assert not any(M.vecmul(v))


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_inverse_property(M):
    if M.nrows != M.ncols:
        return
    if M.rank() < M.nrows:
        with pytest.raises(SingularMatrixError):
            M.inverse()
        return
    I = FieldMatrix.identity(M.field, M.nrows)
    assert M @ M.inverse() == I and M.inverse() @ M == I


@settings(max_examples=100, deadline=None)
@given(matrices(), st.data())
def test_solve_left(M, data):
    x = data.draw(st.lists(st.integers(0, M.field.q - 1), min_size=M.nrows, max_size=M.nrows))
    b = M.vecmul(x)
    sol = M.solve_left(b)
    assert sol is not None and M.vecmul(sol) == b


def test_extension_elementwise_vs_polynomial():
    # GF(8) multiplication agrees with schoolbook polynomial product mod the modulus
    F = GF(2, 3)
    mod = list(F.modulus)

    def polymul(a, b):
        da = [(a >> i) & 1 for i in range(3)]
        db = [(b >> i) & 1 for i in range(3)]
        prod = [0] * 5
        for i, x in enumerate(da):
            for j, y in enumerate(db):
                prod[i + j] ^= x & y
        for d in range(4, 2, -1):
            if prod[d]:
                for i, c in enumerate(mod):
                    prod[d - 3 + i] ^= c
        return sum(b << i for i, b in enumerate(prod[:3]))

    for a, b in itertools.product(range(8), repeat=2):
        assert F.mul(a, b) == polymul(a, b)


def test_odd_extension_needs_modulus():
    with pytest.raises(FieldError):
        GF(3, 2)
    with pytest.raises(FieldError):
        GF(3, 2, [2, 0, 1])   # x^2 - 1 factors
