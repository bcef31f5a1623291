import random
from fractions import Fraction

import pytest

from kproper.rationals import (
    GeometryError,
    InputError,
    ValidationError,
    det,
    dot,
    format_rational,
    is_unimodular,
    parse_rational,
    primitive,
    solve_exact,
    solve_linear_system,
)


def test_parse_canonical_forms():
    assert parse_rational("0") == 0
    assert parse_rational("-7") == -7
    assert parse_rational("5/6") == Fraction(5, 6)
    assert parse_rational("-1/1000000") == Fraction(-1, 10**6)


@pytest.mark.parametrize("bad", ["2/4", "3/1", "+3", "-0", "03", "1/0", "1/-2", "", "x", "1.5"])
def test_parse_rejects_non_canonical(bad):
    with pytest.raises(InputError):
        parse_rational(bad)


def test_parse_error_names_canonical_form():
    with pytest.raises(InputError, match='"1/2"'):
        parse_rational("2/4")


def test_format_round_trip():
    rng = random.Random(7)
    for _ in range(200):
        q = Fraction(rng.randint(-50, 50), rng.randint(1, 50))
        assert parse_rational(format_rational(q)) == q


def test_primitive_examples():
    assert primitive((2, 4)) == (1, 2)
    assert primitive((1, 0)) == (1, 0)
    assert primitive((0, -3)) == (0, -1)


def test_primitive_zero_vector_errors():
    with pytest.raises(GeometryError, match="zero vector"):
        primitive((0, 0))


def test_primitive_idempotent():
    rng = random.Random(11)
    for _ in range(100):
        v = tuple(rng.randint(-20, 20) for _ in range(rng.choice((2, 3))))
        if all(x == 0 for x in v):
            continue
        assert primitive(primitive(v)) == primitive(v)


def test_solve_exact_identity():
    assert solve_exact(((1, 0), (0, 1)), (3, 7)) == (3, 7)


def test_solve_exact_singular_is_none():
    assert solve_exact(((1, 1), (2, 2)), (1, 1)) is None


def test_solve_exact_hand_elimination():
    # row reduce [[1,0],[1,1]] | (-1,-1): x = -1, then y = -1 - x = 0
    assert solve_exact(((1, 0), (1, 1)), (-1, -1)) == (-1, 0)


def test_solve_exact_dimension_mismatch():
    with pytest.raises(ValidationError):
        solve_exact(((1, 0), (0, 1)), (1, 2, 3))


def test_solve_exact_satisfies_system():
    rng = random.Random(13)
    for _ in range(100):
        n = rng.choice((2, 3))
        a = tuple(tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(n)) for _ in range(n))
        b = tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(n))
        x = solve_exact(a, b)
        if x is None:
            assert det(a) == 0
        else:
            assert tuple(dot(row, x) for row in a) == b


def test_is_unimodular():
    assert is_unimodular(((1, 0), (0, 1)))
    assert is_unimodular(((0, -1), (1, -1)))
    assert not is_unimodular(((2, 0), (0, 1)))


def test_is_unimodular_rejects_non_integer():
    with pytest.raises(ValidationError):
        is_unimodular(((Fraction(1, 2), 0), (0, 1)))


def test_exact_field_identities():
    rng = random.Random(17)
    for _ in range(300):
        x = Fraction(rng.randint(-99, 99), rng.randint(1, 99))
        y = Fraction(rng.randint(-99, 99), rng.randint(1, 99))
        assert (x + y) - y == x
        if y != 0:
            assert (x * y) / y == x


def test_solve_linear_system_nullspace():
    solution = solve_linear_system([[1, 1, 0]], [2])
    assert solution is not None
    particular, basis = solution
    assert dot(particular, (1, 1, 0)) == 2
    assert len(basis) == 2
    for v in basis:
        assert dot(v, (1, 1, 0)) == 0


def test_solve_linear_system_inconsistent():
    assert solve_linear_system([[1, 0], [1, 0]], [1, 2]) is None
