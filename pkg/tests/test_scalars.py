import math
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigidity_lab.errors import FieldMismatchError, RefinementError
from rigidity_lab.scalars import (INF, Exact, Interval, compare, floor, is_irrational,
                                  parse_scalar, scalar_from_json, scalar_to_json)

fractions = st.fractions(min_value=-1000, max_value=1000, max_denominator=500)
radicands = st.sampled_from([2, 3, 5, 6, 7, 10, 11])


def _decimal(x: Exact) -> Decimal:
    """80-digit decimal value of a + b sqrt(d), independent of the Exact arithmetic."""
    a = Decimal(x.a.numerator) / Decimal(x.a.denominator)
    b = Decimal(x.b.numerator) / Decimal(x.b.denominator)
    return a + b * Decimal(x.d).sqrt()


@pytest.mark.parametrize("text, expected", [
    ("1/2", Exact(Fraction(1, 2))),
    ("0.25", Exact(Fraction(1, 4))),
    ("sqrt2", Exact(0, 1, 2)),
    ("sqrt(3)", Exact(0, 1, 3)),
    ("sqrt2/8", Exact(0, Fraction(1, 8), 2)),
    ("3-2*sqrt2", Exact(3, -2, 2)),
    ("-7+5sqrt2", Exact(-7, 5, 2)),
    ("1e-6", Exact(Fraction(1, 10**6))),
    ("sqrt8", Exact(0, 2, 2)),
    ("sqrt4", Exact(2)),
])
def test_parse_scalar(text, expected):
    assert parse_scalar(text) == expected


@pytest.mark.parametrize("text", ["inf", "INF", "infinity"])
def test_parse_infinity(text):
    assert parse_scalar(text) is INF


@pytest.mark.parametrize("text", ["", "abc", "sqrt", "1/2/3x"])
def test_parse_rejects_garbage(text):
    with pytest.raises(ValueError):
        parse_scalar(text)


def test_canonical_form_makes_equal_values_equal():
    assert Exact(0, 2, 4) == Exact(4)
    assert Exact(1, 0, 7) == Exact(1)
    assert Exact(0, 1, 12) == Exact(0, 2, 3)
    assert hash(Exact(0, 1, 12)) == hash(Exact(0, 2, 3))


def test_field_arithmetic():
    r2 = Exact.sqrt(2)
    assert r2 * r2 == Exact(2)
    assert (r2 - 1) * (r2 + 1) == Exact(1)
    assert 1 / (r2 - 1) == r2 + 1
    assert (3 - 2 * r2).conjugate() == 3 + 2 * r2
    assert (3 - 2 * r2).norm() == 1


def test_mixing_fields_is_refused():
    with pytest.raises(FieldMismatchError):
        Exact.sqrt(2) + Exact.sqrt(3)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        Exact(1) / Exact(0)


@given(fractions, fractions, radicands)
def test_sign_matches_decimal_oracle(a, b, d):
    x = Exact(a, b, d)
    value = _decimal(x)
    expected = (value > 0) - (value < 0)
    assert x.sign() == expected


@given(fractions, fractions, radicands)
def test_floor_matches_decimal_oracle(a, b, d):
    x = Exact(a, b, d)
    assert x.floor() == math.floor(_decimal(x))
    assert floor(x) == x.floor()


@given(fractions, fractions, radicands)
def test_enclosure_contains_value(a, b, d):
    x = Exact(a, b, d)
    box = x.enclose()
    value = _decimal(x)
    to_dec = lambda q: Decimal(q.numerator) / Decimal(q.denominator)  # noqa: E731
    assert to_dec(box.lo) <= value <= to_dec(box.hi)


@given(fractions, fractions, fractions, fractions, radicands)
def test_compare_matches_decimal_oracle(a1, b1, a2, b2, d):
    x, y = Exact(a1, b1, d), Exact(a2, b2, d)
    dx, dy = _decimal(x), _decimal(y)
    assert compare(x, y) == (dx > dy) - (dx < dy)


@given(fractions, fractions, radicands)
def test_json_round_trip(a, b, d):
    x = Exact(a, b, d)
    assert scalar_from_json(scalar_to_json(x)) == x


def test_json_round_trip_interval_and_infinity():
    box = Interval(Fraction(1, 3), Fraction(5, 8))
    assert scalar_from_json(scalar_to_json(box)) == box
    assert scalar_from_json(scalar_to_json(INF)) is INF


def test_infinity_orders_above_everything():
    assert compare(INF, Exact(10**9)) == 1
    assert compare(Exact(10**9), INF) == -1
    assert compare(INF, INF) == 0


def test_overlapping_intervals_are_undecidable():
    with pytest.raises(RefinementError):
        compare(Interval(0, 2), Interval(1, 3))
    with pytest.raises(RefinementError):
        compare(Interval(1, 2), Exact.sqrt(2))


def test_separated_intervals_compare():
    assert compare(Interval(0, 1), Interval(2, 3)) == -1
    assert compare(Interval(2, 3), Exact.sqrt(2)) == 1


def test_interval_floor_needs_integer_free_box():
    assert Interval(Fraction(3, 2), Fraction(7, 4)).floor() == 1
    with pytest.raises(RefinementError):
        Interval(Fraction(1, 2), Fraction(3, 2)).floor()


def test_irrationality_is_exact():
    assert is_irrational(Exact.sqrt(2))
    assert not is_irrational(Exact(0, 3, 9))
    with pytest.raises(RefinementError):
        is_irrational(Interval(0, 1))


def test_interval_rejects_empty():
    with pytest.raises(ValueError):
        Interval(2, 1)


@settings(max_examples=50)
@given(fractions, fractions, radicands, fractions, fractions)
def test_ring_laws(a, b, d, c, e):
    x, y = Exact(a, b, d), Exact(c, e, d)
    assert x + y == y + x
    assert x * y == y * x
    assert (x - y) + y == x
    if y != Exact(0):
        assert (x / y) * y == x
