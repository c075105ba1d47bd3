"""Exact scalar fields and exact linear algebra.

Two scalar kinds are supported everywhere in this package:

* rationals, represented directly by :class:`fractions.Fraction`;
* elements of a cyclotomic field Q(zeta_N), represented in the power
  basis ``1, zeta, ..., zeta^(phi(N)-1)`` reduced modulo the N-th
  cyclotomic polynomial.

All arithmetic is exact; nothing in this module (or the package) ever
rounds.  Values are immutable after construction and safe to share.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from typing import Iterable, Sequence, Union

__all__ = [
    "Cyclotomic",
    "ExactMatrix",
    "FieldMismatch",
    "Positivity",
    "Scalar",
    "conj",
    "cyclotomic_poly",
    "hermitian_dot",
    "is_positive_rational",
    "kernel_basis",
    "scalar_from_json",
    "scalar_to_json",
]


class FieldMismatch(ValueError):
    """Raised when scalars from incompatible fields are combined."""


# --------------------------------------------------------------------------
# integer polynomials (ascending coefficients), used to build Phi_N

def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _poly_divmod_monic_int(num, den):
    # den is monic with integer coefficients, so the quotient is integral
    num = list(num)
    dd = len(den) - 1
    q = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        if c:
            q[i - dd] = c
            for j in range(dd + 1):
                num[i - dd + j] -= c * den[j]
    while num and num[-1] == 0:
        num.pop()
    return q, num


_CYCLOTOMIC_CACHE: dict[int, tuple[int, ...]] = {}


def cyclotomic_poly(N: int) -> tuple[int, ...]:
    """N-th cyclotomic polynomial Phi_N as ascending integer coefficients.

    Computed by dividing x^N - 1 by the product of Phi_d over the proper
    divisors d of N.
    """
    if N < 1:
        raise ValueError("N must be a positive integer")
    cached = _CYCLOTOMIC_CACHE.get(N)
    if cached is not None:
        return cached
    for m in range(1, N + 1):
        if N % m or m in _CYCLOTOMIC_CACHE:
            continue
        if m == 1:
            _CYCLOTOMIC_CACHE[1] = (-1, 1)
            continue
        prod = [1]
        for d in range(1, m):
            if m % d == 0:
                prod = _poly_mul(prod, _CYCLOTOMIC_CACHE[d])
        xm1 = [0] * (m + 1)
        xm1[0], xm1[m] = -1, 1
        q, rem = _poly_divmod_monic_int(xm1, prod)
        assert not rem, "cyclotomic division must be exact"
        _CYCLOTOMIC_CACHE[m] = tuple(q)
    return _CYCLOTOMIC_CACHE[N]


# --------------------------------------------------------------------------
# cyclotomic field elements

class _FieldData:
    """Per-conductor reduction tables, computed once."""

    def __init__(self, N: int):
        phi = cyclotomic_poly(N)
        self.N = N
        self.deg = len(phi) - 1
        self.phi = phi
        # power_table[p] = coefficients of zeta^p reduced mod Phi_N,
        # for p = 0 .. max(N, 2*deg) - 1  (covers products and conjugation)
        top = [Fraction(-c) for c in phi[:-1]]  # zeta^deg
        table = []
        for p in range(max(N, 2 * self.deg - 1)):
            if p < self.deg:
                vec = [Fraction(0)] * self.deg
                vec[p] = Fraction(1)
            else:
                prev = table[p - 1]
                vec = [Fraction(0)] + list(prev[: self.deg - 1])
                lead = prev[self.deg - 1]
                if lead:
                    for i in range(self.deg):
                        vec[i] += lead * top[i]
            table.append(tuple(vec))
        self.power_table = tuple(table)


_FIELD_CACHE: dict[int, _FieldData] = {}


def _field_data(N: int) -> _FieldData:
    data = _FIELD_CACHE.get(N)
    if data is None:
        data = _FIELD_CACHE[N] = _FieldData(N)
    return data


class Cyclotomic:
    """An element of Q(zeta_N) in the reduced power basis.

    Equal field elements always have equal coefficient vectors, so ``==``
    and ``hash`` are structural.  Elements of different conductors never
    combine; rationals promote into any conductor.
    """

    __slots__ = ("N", "coeffs")

    def __init__(self, N: int, coeffs: Iterable[Union[Fraction, int]]):
        data = _field_data(N)
        vec = [Fraction(0)] * data.deg
        for p, c in enumerate(coeffs):
            if not c:
                continue
            c = Fraction(c)
            red = data.power_table[p] if p >= data.deg else None
            if red is None:
                vec[p] += c
            else:
                for i, ri in enumerate(red):
                    if ri:
                        vec[i] += c * ri
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "coeffs", tuple(vec))

    def __setattr__(self, *a):
        raise AttributeError("Cyclotomic values are immutable")

    # -- constructors

    @classmethod
    def from_rational(cls, N: int, value) -> "Cyclotomic":
        return cls(N, [Fraction(value)])

    @classmethod
    def root_of_unity(cls, N: int, k: int = 1) -> "Cyclotomic":
        """zeta_N^k as an element of Q(zeta_N)."""
        data = _field_data(N)
        return cls(N, data.power_table[k % N])

    # -- coercion

    def _coerce(self, other):
        if isinstance(other, Cyclotomic):
            if other.N != self.N:
                raise FieldMismatch(
                    f"conductor mismatch: {self.N} vs {other.N}")
            return other
        if isinstance(other, (int, Fraction)):
            return Cyclotomic.from_rational(self.N, other)
        return None

    # -- arithmetic

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Cyclotomic(self.N, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.N, [-a for a in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Cyclotomic(self.N, [a - b for a, b in zip(self.coeffs, o.coeffs)])

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        conv = [Fraction(0)] * (2 * len(a) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        conv[i + j] += ai * bj
        return Cyclotomic(self.N, conv)

    __rmul__ = __mul__

    def inverse(self) -> "Cyclotomic":
        if self.is_zero():
            raise ZeroDivisionError("cyclotomic division by zero")
        # extended Euclid in Q[x] against Phi_N (irreducible over Q)
        phi = [Fraction(c) for c in _field_data(self.N).phi]
        a = list(self.coeffs)
        while a and not a[-1]:
            a.pop()
        r0, r1 = phi, a
        s0, s1 = [], [Fraction(1)]
        while r1:
            q, rem = _poly_divmod_frac(r0, r1)
            r0, r1 = r1, rem
            s0, s1 = s1, _poly_sub(s0, _poly_mul_frac(q, s1))
        # r0 is a nonzero constant gcd; s0 * self == r0 (mod Phi_N)
        c = r0[0]
        return Cyclotomic(self.N, [x / c for x in s0])

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Cyclotomic.from_rational(self.N, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- structure

    def conjugate(self) -> "Cyclotomic":
        """Complex conjugation, the field automorphism zeta -> zeta^(N-1)."""
        data = _field_data(self.N)
        vec = [Fraction(0)] * data.deg
        for p, c in enumerate(self.coeffs):
            if c:
                red = data.power_table[(self.N - p) % self.N]
                for i, ri in enumerate(red):
                    if ri:
                        vec[i] += c * ri
        return Cyclotomic(self.N, vec)

    def embed(self, M: int) -> "Cyclotomic":
        """Image under Q(zeta_N) -> Q(zeta_M), requires N | M."""
        if M % self.N:
            raise FieldMismatch(f"{self.N} does not divide {M}")
        step = M // self.N
        data = _field_data(M)
        vec = [Fraction(0)] * data.deg
        for p, c in enumerate(self.coeffs):
            if c:
                red = data.power_table[(p * step) % M]
                for i, ri in enumerate(red):
                    if ri:
                        vec[i] += c * ri
        return Cyclotomic(M, vec)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element lies outside the rational subfield")
        return self.coeffs[0]

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, Cyclotomic):
            return self.N == other.N and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        return NotImplemented

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.N, self.coeffs))

    def __repr__(self):
        return f"Cyclotomic({self.N}, {list(self.coeffs)!r})"


def _poly_divmod_frac(num, den):
    num = list(num)
    dd = len(den) - 1
    lead = den[-1]
    q = [Fraction(0)] * max(len(num) - dd, 0)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i] / lead
        if c:
            q[i - dd] = c
            for j in range(dd + 1):
                num[i - dd + j] -= c * den[j]
    while num and not num[-1]:
        num.pop()
    return q, num


def _poly_mul_frac(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _poly_sub(a, b):
    out = list(a) + [Fraction(0)] * max(0, len(b) - len(a))
    for i, bi in enumerate(b):
        out[i] -= bi
    while out and not out[-1]:
        out.pop()
    return out


Scalar = Union[Fraction, Cyclotomic]


# --------------------------------------------------------------------------
# scalar-level operations

def conj(s: Scalar) -> Scalar:
    """Complex conjugation; rationals are fixed."""
    if isinstance(s, Cyclotomic):
        return s.conjugate()
    return Fraction(s)


def hermitian_dot(u: Sequence[Scalar], v: Sequence[Scalar]) -> Scalar:
    """Standard Hermitian inner product sum_i u_i * conj(v_i)."""
    if len(u) != len(v):
        raise ValueError(f"length mismatch: {len(u)} vs {len(v)}")
    total = None
    for a, b in zip(u, v):
        term = a * conj(b)
        total = term if total is None else total + term
    if total is None:
        raise ValueError("empty vectors")
    return total


class Positivity(enum.Enum):
    """Sign classification within the rational subfield."""

    POSITIVE = "yes-positive"
    ZERO = "yes-zero"
    NEGATIVE = "negative"
    NOT_RATIONAL = "not-rational-real"


def is_positive_rational(s: Scalar) -> Positivity:
    """Sign test, restricted to the rational subfield.

    Cyclotomic elements outside Q (after canonical reduction) report
    NOT_RATIONAL; real-but-irrational elements are deliberately not
    decided.
    """
    if isinstance(s, Cyclotomic):
        if not s.is_rational():
            return Positivity.NOT_RATIONAL
        s = s.coeffs[0]
    if s > 0:
        return Positivity.POSITIVE
    if s < 0:
        return Positivity.NEGATIVE
    return Positivity.ZERO


def _as_scalar(value, conductor):
    if isinstance(value, Cyclotomic):
        if conductor is None or value.N != conductor:
            raise FieldMismatch("mixed scalar fields in matrix")
        return value
    value = Fraction(value)
    if conductor is not None:
        return Cyclotomic.from_rational(conductor, value)
    return value


def scalar_zero(conductor: int | None) -> Scalar:
    return Fraction(0) if conductor is None else Cyclotomic.from_rational(conductor, 0)


def scalar_one(conductor: int | None) -> Scalar:
    return Fraction(1) if conductor is None else Cyclotomic.from_rational(conductor, 1)


def scalar_is_zero(s: Scalar) -> bool:
    if isinstance(s, Cyclotomic):
        return s.is_zero()
    return s == 0


def scalar_to_json(s: Scalar):
    if isinstance(s, Cyclotomic):
        return {"N": s.N, "coeffs": [str(c) for c in s.coeffs]}
    return str(Fraction(s))


def scalar_from_json(obj) -> Scalar:
    if isinstance(obj, dict):
        return Cyclotomic(obj["N"], [Fraction(c) for c in obj["coeffs"]])
    return Fraction(obj)


# --------------------------------------------------------------------------
# exact matrices

class ExactMatrix:
    """Dense rectangular matrix over one scalar field.

    Entries are all Fraction or all Cyclotomic with a single conductor.
    Elimination is exact with a fixed pivot rule (leftmost column, first
    nonzero row), which makes every derived basis deterministic.
    """

    __slots__ = ("rows", "cols", "entries", "conductor")

    def __init__(self, entries: Sequence[Sequence[Scalar]], conductor: int | None = None):
        rows = len(entries)
        cols = len(entries[0]) if rows else 0
        if conductor is None:
            for row in entries:
                for e in row:
                    if isinstance(e, Cyclotomic):
                        conductor = e.N
                        break
                if conductor is not None:
                    break
        grid = []
        for row in entries:
            if len(row) != cols:
                raise ValueError("ragged matrix")
            grid.append(tuple(_as_scalar(e, conductor) for e in row))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", tuple(grid))
        object.__setattr__(self, "conductor", conductor)

    def __setattr__(self, *a):
        raise AttributeError("ExactMatrix is immutable")

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[Scalar]], conductor=None):
        rows = len(columns[0]) if columns else 0
        return cls([[columns[j][i] for j in range(len(columns))]
                    for i in range(rows)], conductor)

    def column(self, j: int) -> tuple:
        return tuple(self.entries[i][j] for i in range(self.rows))

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix([[self.entries[i][j] for i in range(self.rows)]
                            for j in range(self.cols)], self.conductor)

    def conjugate(self) -> "ExactMatrix":
        return ExactMatrix([[conj(e) for e in row] for row in self.entries],
                           self.conductor)

    def mul_vec(self, v: Sequence[Scalar]) -> tuple:
        if len(v) != self.cols:
            raise ValueError("dimension mismatch")
        zero = scalar_zero(self.conductor)
        out = []
        for row in self.entries:
            acc = zero
            for a, b in zip(row, v):
                acc = acc + a * b
            out.append(acc)
        return tuple(out)

    def matmul(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        zero = scalar_zero(self.conductor)
        grid = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = zero
                for k in range(self.cols):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            grid.append(row)
        return ExactMatrix(grid, self.conductor)

    def _rref(self):
        """Reduced row echelon form; returns (grid, pivot column list)."""
        grid = [list(row) for row in self.entries]
        pivots = []
        prow = 0
        for col in range(self.cols):
            pivot = None
            for r in range(prow, self.rows):
                if not scalar_is_zero(grid[r][col]):
                    pivot = r
                    break
            if pivot is None:
                continue
            grid[prow], grid[pivot] = grid[pivot], grid[prow]
            pv = grid[prow][col]
            grid[prow] = [e / pv for e in grid[prow]]
            for r in range(self.rows):
                if r != prow and not scalar_is_zero(grid[r][col]):
                    f = grid[r][col]
                    grid[r] = [a - f * b for a, b in zip(grid[r], grid[prow])]
            pivots.append(col)
            prow += 1
            if prow == self.rows:
                break
        return grid, pivots

    def rank(self) -> int:
        return len(self._rref()[1])

    def kernel_basis(self) -> list[tuple]:
        """Deterministic basis of the right kernel; empty when injective."""
        grid, pivots = self._rref()
        pivot_set = set(pivots)
        free = [c for c in range(self.cols) if c not in pivot_set]
        zero = scalar_zero(self.conductor)
        one = scalar_one(self.conductor)
        basis = []
        for f in free:
            vec = [zero] * self.cols
            vec[f] = one
            for prow, pcol in enumerate(pivots):
                vec[pcol] = -grid[prow][f]
            basis.append(tuple(vec))
        return basis

    def solve(self, rhs: Sequence[Scalar]):
        """One exact solution of M x = rhs (free variables zero), or None."""
        if len(rhs) != self.rows:
            raise ValueError("dimension mismatch")
        aug = ExactMatrix([list(row) + [r] for row, r in zip(self.entries, rhs)],
                          self.conductor)
        grid, pivots = aug._rref()
        if self.cols in pivots:
            return None  # inconsistent
        zero = scalar_zero(self.conductor)
        x = [zero] * self.cols
        for prow, pcol in enumerate(pivots):
            x[pcol] = grid[prow][self.cols]
        return tuple(x)

    def __eq__(self, other):
        return (isinstance(other, ExactMatrix)
                and self.entries == other.entries)

    def __repr__(self):
        return f"ExactMatrix({[list(r) for r in self.entries]!r})"


def kernel_basis(matrix: ExactMatrix) -> list[tuple]:
    """Module-level alias for :meth:`ExactMatrix.kernel_basis`."""
    return matrix.kernel_basis()
