"""Exact arithmetic in GF(p^m) and dense linear algebra over it.

Field elements are plain Python ints in ``range(q)``.  For extension fields an
element ``v`` encodes the polynomial ``sum(c_i x^i)`` with ``v = sum(c_i p^i)``
(coefficients low-to-high), so equality of canonical values is structural.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import DimensionError, FieldError, SingularMatrixError, ZeroDivision

# Primitive (Conway) polynomials for GF(2^m), low-to-high coefficient lists.
_CONWAY_2 = {
    1: (1, 1),
    2: (1, 1, 1),
    3: (1, 1, 0, 1),
    4: (1, 1, 0, 0, 1),
    5: (1, 0, 1, 0, 0, 1),
    6: (1, 1, 0, 1, 1, 0, 1),
    7: (1, 1, 0, 0, 0, 0, 0, 1),
    8: (1, 0, 1, 1, 1, 0, 0, 0, 1),
    9: (1, 0, 0, 0, 1, 0, 0, 0, 0, 1),
    10: (1, 1, 1, 1, 0, 1, 1, 0, 0, 0, 1),
    11: (1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    12: (1, 1, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1),
    13: (1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    14: (1, 0, 0, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 1),
    15: (1, 0, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    16: (1, 0, 1, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    n = max(n, 2)
    while not is_prime(n):
        n += 1
    return n


def prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


# -- polynomials over GF(p), coefficient lists low-to-high -------------------

def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a = _poly_trim([c % p for c in a])
    b = _poly_trim([c % p for c in b])
    inv_lead = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        c = a[-1] * inv_lead % p
        shift = len(a) - len(b)
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bc) % p
        _poly_trim(a)
    return a


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg/2."""
    deg = len(poly) - 1
    if deg < 1 or poly[-1] % p == 0:
        return False
    for d in range(1, deg // 2 + 1):
        for low in range(p ** d):
            cand = [(low // p ** i) % p for i in range(d)] + [1]
            if not _poly_mod(poly, cand, p):
                return False
    return True


class Field:
    """A finite field GF(p^m).  Use :func:`GF` to obtain cached instances."""

    p: int
    m: int
    q: int
    modulus: tuple[int, ...]
    primitive: int

    def __init__(self, p: int, m: int, modulus: tuple[int, ...]):
        self.p, self.m, self.modulus = p, m, tuple(modulus)
        self.q = p ** m

    # identity and hashing are by (p, m, modulus)
    def _key(self):
        return (self.p, self.m, self.modulus)

    def __eq__(self, other):
        return isinstance(other, Field) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.m == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.m}, modulus={list(self.modulus)})"

    def __call__(self, value) -> "FieldElement":
        return FieldElement(self, self.coerce(value))

    @property
    def is_prime_field(self) -> bool:
        return self.m == 1

    def to_dict(self) -> dict:
        return {"p": self.p, "m": self.m, "modulus": list(self.modulus)}

    def elements(self) -> range:
        return range(self.q)

    def coerce(self, value) -> int:
        if isinstance(value, FieldElement):
            if value.field != self:
                raise FieldError(f"element of {value.field} used in {self}")
            return value.value
        if self.m == 1:
            return int(value) % self.p
        v = int(value)
        if not 0 <= v < self.q:
            raise FieldError(f"{v} is not a canonical element of {self}")
        return v

    # scalar ops, overridden per representation
    def add(self, a: int, b: int) -> int:
        raise NotImplementedError

    def neg(self, a: int) -> int:
        raise NotImplementedError

    def mul(self, a: int, b: int) -> int:
        raise NotImplementedError

    def inv(self, a: int) -> int:
        raise NotImplementedError

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        r = 1
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    # vector kernels used by elimination
    def axpy(self, dst: list[int], c: int, src: Sequence[int]) -> list[int]:
        """dst + c*src."""
        add, mul = self.add, self.mul
        return [add(a, mul(c, b)) for a, b in zip(dst, src)]

    def scale(self, c: int, v: Sequence[int]) -> list[int]:
        mul = self.mul
        return [mul(c, a) for a in v]

    def dot(self, u: Sequence[int], v: Sequence[int]) -> int:
        add, mul = self.add, self.mul
        acc = 0
        for a, b in zip(u, v):
            if a and b:
                acc = add(acc, mul(a, b))
        return acc

    def _find_primitive(self) -> int:
        order = self.q - 1
        if order == 1:
            return 1
        factors = prime_factors(order)
        for g in range(2, self.q):
            if all(self.pow(g, order // f) != 1 for f in factors):
                return g
        raise FieldError(f"no primitive element found in {self}")


class PrimeField(Field):
    def __init__(self, p: int):
        super().__init__(p, 1, (0, 1))
        self.primitive = 1 if p == 2 else self._find_primitive()

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return -a % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return a * b % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivision("inverse of zero")
        return pow(a, self.p - 2, self.p)

    def axpy(self, dst, c, src):
        p = self.p
        return [(a + c * b) % p for a, b in zip(dst, src)]

    def scale(self, c, v):
        p = self.p
        return [c * a % p for a in v]

    def dot(self, u, v):
        return sum(a * b for a, b in zip(u, v)) % self.p


class ExtensionField(Field):
    """GF(p^m), m > 1, via log/antilog tables of a primitive element."""

    def __init__(self, p: int, m: int, modulus: tuple[int, ...]):
        super().__init__(p, m, modulus)
        q = self.q
        if q > 1 << 20:
            raise FieldError(f"extension field of size {q} is too large for table arithmetic")
        self._digits = [tuple((v // p ** i) % p for i in range(m)) for v in range(q)]
        self._weights = [p ** i for i in range(m)]
        # Multiplication by x for every element, then search a generator.
        self._times_x = [self._poly_mulx(v) for v in range(q)]
        self.primitive = self._search_generator()
        self._exp = [0] * (2 * (q - 1))
        self._log = [0] * q
        v = 1
        for i in range(q - 1):
            self._exp[i] = v
            self._log[v] = i
            v = self._poly_mul(v, self.primitive)
        for i in range(q - 1, 2 * (q - 1)):
            self._exp[i] = self._exp[i - (q - 1)]
        self._neg = [self._from_digits([(-c) % p for c in self._digits[v]]) for v in range(q)]

    def _from_digits(self, ds: Iterable[int]) -> int:
        return sum(c * w for c, w in zip(ds, self._weights))

    def _poly_add(self, a: int, b: int) -> int:
        p = self.p
        return self._from_digits([(x + y) % p for x, y in zip(self._digits[a], self._digits[b])])

    def _poly_mulx(self, a: int) -> int:
        p, m = self.p, self.m
        ds = (0,) + self._digits[a]
        top = ds[m]
        out = [(ds[i] - top * self.modulus[i]) % p for i in range(m)]
        return self._from_digits(out)

    def _poly_mul(self, a: int, b: int) -> int:
        # Horner over the digits of b, highest first.
        acc = 0
        for c in reversed(self._digits[b]):
            acc = self._times_x[acc]
            for _ in range(c):
                acc = self._poly_add(acc, a)
        return acc

    def _search_generator(self) -> int:
        order = self.q - 1
        factors = prime_factors(order)

        def ok(g):
            for f in factors:
                e, r, base = order // f, 1, g
                while e:
                    if e & 1:
                        r = self._poly_mul(r, base)
                    base = self._poly_mul(base, base)
                    e >>= 1
                if r == 1:
                    return False
            return True

        x = self.p  # the polynomial "x"
        if ok(x):
            return x
        for g in range(2, self.q):
            if ok(g):
                return g
        raise FieldError(f"no primitive element in {self}")

    def add(self, a, b):
        if self.p == 2:
            return a ^ b
        return self._poly_add(a, b)

    def neg(self, a):
        return a if self.p == 2 else self._neg[a]

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a):
        if a == 0:
            raise ZeroDivision("inverse of zero")
        return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]

    def axpy(self, dst, c, src):
        if c == 0:
            return list(dst)
        exp, log, lc = self._exp, self._log, self._log[c]
        if self.p == 2:
            return [a ^ (exp[lc + log[b]] if b else 0) for a, b in zip(dst, src)]
        add = self._poly_add
        return [add(a, exp[lc + log[b]]) if b else a for a, b in zip(dst, src)]


@lru_cache(maxsize=None)
def _make_field(p: int, m: int, modulus: tuple[int, ...] | None) -> Field:
    if not is_prime(p):
        raise FieldError(f"characteristic {p} is not prime")
    if m < 1:
        raise FieldError("extension degree must be positive")
    if m == 1 and modulus in (None, (0, 1)):
        return PrimeField(p)
    if modulus is None:
        if p == 2 and m in _CONWAY_2:
            modulus = _CONWAY_2[m]
        else:
            raise FieldError(f"no built-in modulus for GF({p}^{m}); supply one")
    modulus = tuple(int(c) % p for c in modulus)
    if len(modulus) != m + 1 or modulus[-1] != 1:
        raise FieldError("modulus must be monic of degree m (low-to-high coefficients)")
    if not is_irreducible(modulus, p):
        raise FieldError(f"modulus {list(modulus)} is reducible over GF({p})")
    if m == 1:
        raise FieldError("prime fields use the canonical modulus x")
    return ExtensionField(p, m, modulus)


def GF(p: int, m: int = 1, modulus: Sequence[int] | None = None) -> Field:
    """Return the (cached) field GF(p^m)."""
    return _make_field(int(p), int(m), None if modulus is None else tuple(int(c) for c in modulus))


def field_from_dict(d: dict) -> Field:
    return GF(d["p"], d.get("m", 1), d.get("modulus"))


@dataclass(frozen=True)
class FieldElement:
    """A field value bound to its field, with operator support."""

    field: Field
    value: int

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldError(f"field mismatch: {self.field} vs {other.field}")
            return other.value
        return self.field.coerce(other)

    def __add__(self, o):
        return FieldElement(self.field, self.field.add(self.value, self._other(o)))

    __radd__ = __add__

    def __sub__(self, o):
        return FieldElement(self.field, self.field.sub(self.value, self._other(o)))

    def __rsub__(self, o):
        return FieldElement(self.field, self.field.sub(self._other(o), self.value))

    def __mul__(self, o):
        return FieldElement(self.field, self.field.mul(self.value, self._other(o)))

    __rmul__ = __mul__

    def __truediv__(self, o):
        b = self._other(o)
        if b == 0:
            raise ZeroDivision("division by zero in finite field")
        return FieldElement(self.field, self.field.div(self.value, b))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def __pow__(self, e: int):
        return FieldElement(self.field, self.field.pow(self.value, e))

    def inverse(self):
        return FieldElement(self.field, self.field.inv(self.value))

    def __eq__(self, o):
        if isinstance(o, FieldElement):
            return self.field == o.field and self.value == o.value
        if isinstance(o, int):
            return self.value == self.field.coerce(o) if self.field.m == 1 else self.value == o
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.value))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value}@{self.field!r}"


def field_arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """Apply ``op`` in {add, sub, mul, div} to two elements of the same field."""
    if not isinstance(a, FieldElement) or not isinstance(b, FieldElement):
        raise FieldError("field_arith expects FieldElement operands")
    if a.field != b.field:
        raise FieldError(f"field mismatch: {a.field} vs {b.field}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise FieldError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# Dense matrices
# ---------------------------------------------------------------------------

def rref_rows(F: Field, rows: Sequence[Sequence[int]], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row-echelon form (first nonzero pivot).  Returns (nonzero rows, pivot columns)."""
    work = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    nrows = len(work)
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if work[i][c]), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        lead = work[r][c]
        if lead != 1:
            work[r] = F.scale(F.inv(lead), work[r])
        prow = work[r]
        for i in range(nrows):
            if i != r and work[i][c]:
                work[i] = F.axpy(work[i], F.neg(work[i][c]), prow)
        pivots.append(c)
        r += 1
    return work[:r], pivots


def rank_rows(F: Field, rows: Sequence[Sequence[int]], ncols: int) -> int:
    return len(rref_rows(F, rows, ncols)[1])


def null_space_rows(F: Field, rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Basis of {v : rows . v = 0} (right null space of the matrix with these rows)."""
    red, pivots = rref_rows(F, rows, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for fc in free:
        v = [0] * ncols
        v[fc] = 1
        for row, pc in zip(red, pivots):
            if row[fc]:
                v[pc] = F.neg(row[fc])
        basis.append(v)
    return basis


def in_span(F: Field, basis_rref: Sequence[Sequence[int]], pivots: Sequence[int], v: Sequence[int]) -> bool:
    """Membership test against an RREF basis."""
    w = list(v)
    for row, pc in zip(basis_rref, pivots):
        if w[pc]:
            w = F.axpy(w, F.neg(w[pc]), row)
    return not any(w)


def solve_left_rows(F: Field, rows: Sequence[Sequence[int]], b: Sequence[int]) -> list[int] | None:
    """Find v with v . M = b where M has the given rows; None when inconsistent."""
    nrows = len(rows)
    ncols = len(b)
    # Transpose system: M^T v^T = b^T, solved on the augmented matrix.
    aug = [[rows[i][c] for i in range(nrows)] + [b[c]] for c in range(ncols)]
    red, pivots = rref_rows(F, aug, nrows + 1)
    if pivots and pivots[-1] == nrows:
        return None
    v = [0] * nrows
    for row, pc in zip(red, pivots):
        v[pc] = row[nrows]
    return v


@dataclass(frozen=True)
class FieldMatrix:
    """Immutable dense matrix over a finite field."""

    field: Field
    rows: tuple[tuple[int, ...], ...]
    ncols: int
    nrows: int = dc_field(init=False)

    def __post_init__(self):
        rows = tuple(tuple(self.field.coerce(v) for v in r) for r in self.rows)
        for r in rows:
            if len(r) != self.ncols:
                raise DimensionError(f"row of length {len(r)} in a matrix with {self.ncols} columns")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "nrows", len(rows))

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence[int]], ncols: int | None = None) -> "FieldMatrix":
        rows = [list(r) for r in rows]
        if ncols is None:
            if not rows:
                raise DimensionError("ncols required for an empty matrix")
            ncols = len(rows[0])
        return cls(field, tuple(tuple(r) for r in rows), ncols)

    @classmethod
    def zeros(cls, field: Field, nrows: int, ncols: int) -> "FieldMatrix":
        return cls(field, tuple((0,) * ncols for _ in range(nrows)), ncols)

    @classmethod
    def identity(cls, field: Field, n: int) -> "FieldMatrix":
        return cls(field, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), n)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.rows[i]

    def col(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.rows)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def transpose(self) -> "FieldMatrix":
        cols = tuple(tuple(r[j] for r in self.rows) for j in range(self.ncols))
        return FieldMatrix(self.field, cols, self.nrows)

    @property
    def T(self) -> "FieldMatrix":
        return self.transpose()

    def _check_field(self, other: "FieldMatrix"):
        if other.field != self.field:
            raise FieldError("matrices over different fields")

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_field(other)
        if self.ncols != other.nrows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        F = self.field
        out = []
        for r in self.rows:
            acc = [0] * other.ncols
            for a, orow in zip(r, other.rows):
                if a:
                    acc = F.axpy(acc, a, orow)
            out.append(tuple(acc))
        return FieldMatrix(F, tuple(out), other.ncols)

    def vecmul(self, v: Sequence[int]) -> tuple[int, ...]:
        """Row vector times matrix."""
        if len(v) != self.nrows:
            raise DimensionError(f"vector of length {len(v)} times {self.shape} matrix")
        F = self.field
        acc = [0] * self.ncols
        for a, r in zip(v, self.rows):
            if a:
                acc = F.axpy(acc, a, r)
        return tuple(acc)

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_field(other)
        if self.shape != other.shape:
            raise DimensionError("shape mismatch")
        F = self.field
        return FieldMatrix(F, tuple(tuple(F.add(a, b) for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)), self.ncols)

    def __neg__(self) -> "FieldMatrix":
        F = self.field
        return FieldMatrix(F, tuple(tuple(F.neg(a) for a in r) for r in self.rows), self.ncols)

    def __sub__(self, other: "FieldMatrix") -> "FieldMatrix":
        return self + (-other)

    def scaled(self, c: int) -> "FieldMatrix":
        F = self.field
        return FieldMatrix(F, tuple(tuple(F.scale(c, r)) for r in self.rows), self.ncols)

    def vstack(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_field(other)
        if self.ncols != other.ncols:
            raise DimensionError("vstack needs equal column counts")
        return FieldMatrix(self.field, self.rows + other.rows, self.ncols)

    def hstack(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_field(other)
        if self.nrows != other.nrows:
            raise DimensionError("hstack needs equal row counts")
        return FieldMatrix(self.field, tuple(a + b for a, b in zip(self.rows, other.rows)), self.ncols + other.ncols)

    def select_rows(self, idx: Iterable[int]) -> "FieldMatrix":
        return FieldMatrix(self.field, tuple(self.rows[i] for i in idx), self.ncols)

    def select_cols(self, idx: Sequence[int]) -> "FieldMatrix":
        idx = list(idx)
        return FieldMatrix(self.field, tuple(tuple(r[j] for j in idx) for r in self.rows), len(idx))

    def kron(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_field(other)
        F = self.field
        rows = []
        for r in self.rows:
            for s in other.rows:
                rows.append(tuple(F.mul(a, b) for a in r for b in s))
        return FieldMatrix(F, tuple(rows), self.ncols * other.ncols)

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.rows)

    # -- elimination-based operations --------------------------------------

    def rref(self) -> tuple["FieldMatrix", list[int]]:
        """RREF (zero rows kept at the bottom) and the pivot columns."""
        red, piv = rref_rows(self.field, self.rows, self.ncols)
        red = red + [[0] * self.ncols for _ in range(self.nrows - len(red))]
        return FieldMatrix.from_rows(self.field, red, self.ncols), piv

    def rank(self) -> int:
        return rank_rows(self.field, self.rows, self.ncols)

    def inverse(self) -> "FieldMatrix":
        n = self.nrows
        if n != self.ncols:
            raise DimensionError(f"inverse of non-square {self.shape} matrix")
        F = self.field
        aug = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(self.rows)]
        red, piv = rref_rows(F, aug, 2 * n)
        if piv[:n] != list(range(n)):
            raise SingularMatrixError("matrix is singular")
        return FieldMatrix.from_rows(F, [r[n:] for r in red], n)

    def solve_left(self, b: Sequence[int]) -> tuple[int, ...] | None:
        """A vector v with v . self = b, or None."""
        if len(b) != self.ncols:
            raise DimensionError("right-hand side length mismatch")
        v = solve_left_rows(self.field, self.rows, [self.field.coerce(x) for x in b])
        return None if v is None else tuple(v)

    def solve(self, b: Sequence[int]) -> tuple[int, ...] | None:
        """A vector x with self . x = b, or None (augmented elimination)."""
        return self.transpose().solve_left(b)

    def left_null_space(self) -> "FieldMatrix":
        """Rows form a basis of {v : v . self = 0}."""
        basis = null_space_rows(self.field, list(zip(*self.rows)) if self.ncols else [], self.nrows)
        return FieldMatrix.from_rows(self.field, basis, self.nrows)

    def right_null_space(self) -> "FieldMatrix":
        return FieldMatrix.from_rows(self.field, null_space_rows(self.field, self.rows, self.ncols), self.ncols)

    def row_space_basis(self) -> "FieldMatrix":
        red, _ = rref_rows(self.field, self.rows, self.ncols)
        return FieldMatrix.from_rows(self.field, red, self.ncols)


def mat_rank(M: FieldMatrix) -> int:
    return M.rank()


def ones_column(F: Field, s: int) -> FieldMatrix:
    return FieldMatrix.from_rows(F, [[1] for _ in range(s)], 1)
