"""Exact rational scalars and small integer/rational linear algebra.

Every module downstream (fans, polytopes, Picard lattices, feasibility
sweeps) routes its arithmetic through the helpers here so that no floating
point can leak into a verdict.  Scalars are `fractions.Fraction` values,
which already normalize eagerly (gcd-reduced, positive denominator).  This
module adds the canonical string format used in all JSON interfaces, lattice
vector helpers, and the few dense exact solvers the geometry needs.

Vectors are plain tuples, matrices are tuples of rows.  All values are
immutable and safe to share between threads.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence, Union

Scalar = Union[int, Fraction]
Vector = tuple  # tuple of int or Fraction
Matrix = tuple  # tuple of row tuples


class KProperError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(KProperError):
    """Structurally invalid mathematical data (fan, polytope, divisor)."""


class InputError(KProperError):
    """Malformed user input: files, JSON, rational strings, CLI flags."""


class GeometryError(KProperError):
    """An operation's mathematical precondition does not hold."""


_RATIONAL_RE = re.compile(r"^-?\d+(/\d+)?$")


def parse_rational(text: str, where: str = "") -> Fraction:
    """Parse a canonical rational string: reduced "p/q" with q >= 2, or "p".

    The format is deliberately strict so that serialized data has a unique
    spelling.  Non-canonical strings like "2/4", "3/1", "+3" or "-0" are
    rejected with a message naming the canonical form.
    """
    context = f" in {where}" if where else ""
    if not isinstance(text, str) or not _RATIONAL_RE.match(text):
        raise InputError(f'malformed rational "{text}"{context}; expected canonical "p/q" or "p"')
    if "/" in text:
        num_s, den_s = text.split("/")
        if int(den_s) == 0:
            raise InputError(f'malformed rational "{text}"{context}; zero denominator')
        value = Fraction(int(num_s), int(den_s))
    else:
        value = Fraction(int(text))
    canonical = format_rational(value)
    if canonical != text:
        raise InputError(f'non-canonical rational "{text}"{context}; expected "{canonical}"')
    return value


def format_rational(q: Scalar) -> str:
    """Canonical string form: "p/q" with q >= 2, or "p" when q = 1."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def primitive(v: Sequence[int]) -> tuple[int, ...]:
    """Divide an integer vector by the gcd of its entries, keeping direction.

    Raises for the zero vector, which has no primitive representative.
    """
    entries = tuple(v)
    if any(not isinstance(x, int) for x in entries):
        raise ValidationError(f"primitive requires integer entries, got {entries!r}")
    g = gcd(*entries) if entries else 0
    if g == 0:
        raise GeometryError("zero vector has no primitive representative")
    return tuple(x // g for x in entries)


def is_primitive(v: Sequence[int]) -> bool:
    entries = tuple(v)
    return bool(entries) and all(isinstance(x, int) for x in entries) and gcd(*entries) == 1


def dot(u: Sequence[Scalar], v: Sequence[Scalar]) -> Fraction:
    if len(u) != len(v):
        raise ValidationError(f"dot product dimension mismatch: {len(u)} vs {len(v)}")
    return Fraction(sum(a * b for a, b in zip(u, v)))


def vec_add(u: Sequence[Scalar], v: Sequence[Scalar]) -> tuple:
    if len(u) != len(v):
        raise ValidationError(f"vector dimension mismatch: {len(u)} vs {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u: Sequence[Scalar], v: Sequence[Scalar]) -> tuple:
    if len(u) != len(v):
        raise ValidationError(f"vector dimension mismatch: {len(u)} vs {len(v)}")
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c: Scalar, v: Sequence[Scalar]) -> tuple:
    return tuple(c * x for x in v)


def mat_vec(m: Matrix, v: Sequence[Scalar]) -> tuple:
    return tuple(dot(row, v) for row in m)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m))


def identity_matrix(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def det(m: Matrix) -> Fraction:
    """Exact determinant by fraction elimination (square matrices only)."""
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValidationError("determinant requires a square matrix")
    rows = [[Fraction(x) for x in row] for row in m]
    sign = 1
    result = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            sign = -sign
        result *= rows[col][col]
        inv = 1 / rows[col][col]
        for r in range(col + 1, n):
            factor = rows[r][col] * inv
            if factor:
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
    return sign * result


def is_unimodular(m: Matrix) -> bool:
    """True iff the matrix is square, integral, and has determinant +-1."""
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValidationError("unimodularity requires a square matrix")
    if any(not isinstance(x, int) for row in m for x in row):
        raise ValidationError("unimodularity requires integer entries")
    return abs(det(m)) == 1


def solve_exact(a: Matrix, b: Sequence[Scalar]):
    """Solve A x = b exactly for square A; return None when A is singular."""
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValidationError("solve_exact requires a square matrix")
    if len(b) != n:
        raise ValidationError(f"solve_exact dimension mismatch: matrix {n}x{n}, rhs {len(b)}")
    rows = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(a)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [x * inv for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col]:
                factor = rows[r][col]
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
    return tuple(rows[i][n] for i in range(n))


def solve_linear_system(rows: Sequence[Sequence[Scalar]], rhs: Sequence[Scalar]):
    """Solve a (possibly rectangular) exact linear system.

    Returns (particular_solution, nullspace_basis) with the basis given as a
    tuple of vectors, or None when the system is inconsistent.
    """
    m = len(rows)
    if len(rhs) != m:
        raise ValidationError("system dimension mismatch")
    if m == 0:
        raise ValidationError("empty system has no well-defined unknown count")
    n = len(rows[0])
    aug = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(rows)]
    pivots: list[int] = []
    r = 0
    for col in range(n):
        pivot = next((i for i in range(r, m) if aug[i][col] != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        inv = 1 / aug[r][col]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][col]:
                factor = aug[i][col]
                aug[i] = [x - factor * y for x, y in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][n] != 0:
            return None
    particular = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        particular[col] = aug[i][n]
    free_cols = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free_cols:
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        for i, col in enumerate(pivots):
            vec[col] = -aug[i][fc]
        basis.append(tuple(vec))
    return tuple(particular), tuple(basis)


def clear_denominators(values: Sequence[Scalar]) -> tuple[int, tuple[int, ...]]:
    """Return (c, (c*v as ints)) with c the least positive common multiplier."""
    fracs = [Fraction(v) for v in values]
    c = lcm(*(f.denominator for f in fracs)) if fracs else 1
    return c, tuple(int(f * c) for f in fracs)


def integer_vector(v: Sequence[Scalar]) -> tuple[int, ...]:
    """Cast an exactly-integral rational vector to int entries."""
    out = []
    for x in v:
        f = Fraction(x)
        if f.denominator != 1:
            raise ValidationError(f"expected integral vector, got {tuple(v)!r}")
        out.append(f.numerator)
    return tuple(out)
