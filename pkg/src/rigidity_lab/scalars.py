"""Exact quadratic-field scalars, rational-endpoint intervals and +inf.

Two scalar kinds carry every distance in the closure engine:

* :class:`Exact` is ``a + b*sqrt(d)`` with rational ``a, b`` and square-free
  ``d``. Comparison and floor are exact.
* :class:`Interval` is ``[lo, hi]`` with :class:`~fractions.Fraction`
  endpoints. Because the endpoints are exact rationals, interval arithmetic
  needs no rounding and every enclosure stays sound.

:data:`INF` is the extended-real +infinity used for unbounded radii.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import FieldMismatchError, RefinementError

# 3.1415926535897932384626433832795028841971|69399... : truncation and truncation + 1 ulp(40)
PI_LO = Fraction("3.1415926535897932384626433832795028841971")
PI_HI = PI_LO + Fraction(1, 10**40)

_MAX_REFINE_BITS = 4096


class _Infinity:
    """Positive infinity as a first-class value, never a float sentinel."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __float__(self):
        return math.inf

    def __hash__(self):
        return hash("rigidity_lab.INF")

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r} cannot be an exact rational")
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def squarefree_decompose(k: int) -> tuple[int, int]:
    """Return ``(s, d)`` with ``k == s*s*d`` and ``d`` square-free."""
    if k < 1:
        raise ValueError("radicand must be a positive integer")
    s, d = 1, 1
    rest = k
    p = 2
    while p * p <= rest:
        while rest % (p * p) == 0:
            rest //= p * p
            s *= p
        if rest % p == 0:
            rest //= p
            d *= p
        p += 1
    return s, d * rest


def _sqrt_bounds(d: int, bits: int) -> tuple[Fraction, Fraction]:
    scale = 1 << bits
    root = math.isqrt(d * scale * scale)
    lo = Fraction(root, scale)
    hi = lo if root * root == d * scale * scale else Fraction(root + 1, scale)
    return lo, hi


@dataclass(frozen=True)
class Exact:
    """``a + b*sqrt(d)`` with rational ``a, b`` and square-free ``d >= 1``.

    Values are kept in a canonical form (``b == 0`` forces ``d == 1``), so
    structural equality coincides with numerical equality.
    """

    a: Fraction
    b: Fraction = Fraction(0)
    d: int = 1

    def __post_init__(self):
        a = _as_fraction(self.a)
        b = _as_fraction(self.b)
        d = int(self.d)
        if d < 1:
            raise ValueError("d must be a positive square-free integer")
        s, core = squarefree_decompose(d)
        b *= s
        if core == 1:
            a, b = a + b, Fraction(0)
        if b == 0:
            core = 1
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", core)

    @classmethod
    def sqrt(cls, k: int, coef=1) -> "Exact":
        return cls(0, coef, k)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def _field(self, other: "Exact") -> int:
        if self.d == 1:
            return other.d
        if other.d == 1 or other.d == self.d:
            return self.d
        raise FieldMismatchError(
            f"cannot combine elements of Q(sqrt{self.d}) and Q(sqrt{other.d})"
        )

    def __add__(self, other):
        other = _coerce(other)
        if isinstance(other, Interval):
            return self.enclose() + other
        return Exact(self.a + other.a, self.b + other.b, self._field(other))

    __radd__ = __add__

    def __neg__(self):
        return Exact(-self.a, -self.b, self.d)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        if isinstance(other, Interval):
            return self.enclose() * other
        d = self._field(other)
        return Exact(
            self.a * other.a + self.b * other.b * d,
            self.a * other.b + self.b * other.a,
            d,
        )

    __rmul__ = __mul__

    def conjugate(self) -> "Exact":
        return Exact(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        """Field norm ``a^2 - b^2 d``; zero only for the zero element."""
        return self.a * self.a - self.b * self.b * self.d

    def __truediv__(self, other):
        other = _coerce(other)
        if isinstance(other, Interval):
            return self.enclose() / other
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        self._field(other)
        num = self * other.conjugate()
        return Exact(num.a / n, num.b / n, num.d)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 d
        diff = a * a - b * b * self.d
        return sa if diff > 0 else sb

    def enclose(self, bits: int = 128) -> "Interval":
        """A rational interval of width about ``|b| 2^-bits`` containing the value."""
        if self.b == 0:
            return Interval(self.a, self.a)
        lo, hi = _sqrt_bounds(self.d, bits)
        ends = (self.a + self.b * lo, self.a + self.b * hi)
        return Interval(min(ends), max(ends))

    def floor(self) -> int:
        """Exact floor, by refining sqrt(d) until the enclosure fits between integers."""
        if self.b == 0:
            return math.floor(self.a)
        bits = 64
        while True:
            box = self.enclose(bits)
            lo, hi = math.floor(box.lo), math.floor(box.hi)
            if lo == hi:
                return lo
            # a quadratic irrational is never an integer, so this terminates
            bits *= 2

    def __float__(self):
        if self.b == 0:
            return float(self.a)
        return float(self.enclose(80).midpoint())

    def __lt__(self, other):
        return compare(self, other) < 0

    def __le__(self, other):
        return compare(self, other) <= 0

    def __gt__(self, other):
        return compare(self, other) > 0

    def __ge__(self, other):
        return compare(self, other) >= 0

    def __str__(self):
        if self.b == 0:
            return _fmt_q(self.a)
        rad = f"sqrt{self.d}"
        if self.b == 1:
            tail = rad
        elif self.b == -1:
            tail = "-" + rad
        else:
            tail = f"{_fmt_q(self.b)}*{rad}"
        if self.a == 0:
            return tail
        sep = "" if tail.startswith("-") else "+"
        return f"{_fmt_q(self.a)}{sep}{tail}"

    def to_json(self) -> dict:
        return {"exact": [self.a.numerator, self.a.denominator,
                          self.b.numerator, self.b.denominator, self.d]}


def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]`` with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo = _as_fraction(self.lo)
        hi = _as_fraction(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def around(cls, value: float, radius: float) -> "Interval":
        return cls(Fraction(value) - Fraction(radius), Fraction(value) + Fraction(radius))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def enclose(self, bits: int = 128) -> "Interval":
        return self

    def contains(self, value) -> bool:
        box = _enclosure(_coerce(value))
        return self.lo <= box.lo and box.hi <= self.hi

    def __add__(self, other):
        o = _enclosure(_coerce(other))
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = _enclosure(_coerce(other))
        return Interval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        return _enclosure(_coerce(other)) - self

    def __mul__(self, other):
        o = _enclosure(_coerce(other))
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _enclosure(_coerce(other))
        if o.lo <= 0 <= o.hi:
            raise RefinementError(f"divisor interval [{o.lo}, {o.hi}] contains zero")
        return self * Interval(1 / o.hi, 1 / o.lo)

    def __rtruediv__(self, other):
        return _enclosure(_coerce(other)) / self

    def floor(self) -> int:
        lo, hi = math.floor(self.lo), math.floor(self.hi)
        if lo != hi:
            raise RefinementError(
                f"floor undecidable on [{float(self.lo)!r}, {float(self.hi)!r}]"
            )
        return lo

    def sign(self) -> int:
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        raise RefinementError("sign undecidable: interval straddles zero")

    def __float__(self):
        return float(self.midpoint())

    def __lt__(self, other):
        return compare(self, other) < 0

    def __le__(self, other):
        return compare(self, other) <= 0

    def __gt__(self, other):
        return compare(self, other) > 0

    def __ge__(self, other):
        return compare(self, other) >= 0

    def __str__(self):
        return f"[{float(self.lo)!r}, {float(self.hi)!r}]"

    def to_json(self) -> dict:
        return {"interval": [_fraction_text(self.lo), _fraction_text(self.hi)]}


Scalar = Union[Exact, Interval]


def _fraction_text(q: Fraction) -> str:
    """Exact decimal text when the denominator allows it, else ``p/q``."""
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{q.numerator}/{q.denominator}"
    places = max(twos, fives)
    scaled = q * 10**places
    assert scaled.denominator == 1
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    sign = "-" if q < 0 else ""
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def _coerce(value) -> Scalar:
    if isinstance(value, (Exact, Interval)):
        return value
    if isinstance(value, (int, Fraction)):
        return Exact(value)
    if isinstance(value, float):
        return Exact(Fraction(value))
    raise TypeError(f"not a scalar: {value!r}")


def _enclosure(value: Scalar) -> Interval:
    return value.enclose()


def compare(x, y) -> int:
    """Three-way comparison; raises :class:`RefinementError` when undecidable."""
    if x is INF or y is INF:
        if x is y:
            return 0
        return 1 if x is INF else -1
    x, y = _coerce(x), _coerce(y)
    if isinstance(x, Exact) and isinstance(y, Exact):
        return (x - y).sign()
    bits = 128
    while bits <= _MAX_REFINE_BITS:
        bx, by = x.enclose(bits), y.enclose(bits)
        if bx.hi < by.lo:
            return -1
        if bx.lo > by.hi:
            return 1
        if bx.lo == bx.hi == by.lo == by.hi:
            return 0
        if isinstance(x, Interval) and isinstance(y, Interval):
            break
        bits *= 2
    raise RefinementError(f"cannot decide order of {x} and {y}")


def floor(x: Scalar) -> int:
    return _coerce(x).floor()


def is_irrational(x: Scalar) -> bool:
    """Exact irrationality test; only defined for :class:`Exact`."""
    if not isinstance(x, Exact):
        raise RefinementError("rationality of an interval value is undecidable")
    return not x.is_rational


def scalar_to_json(x) -> dict | str:
    if x is INF:
        return "inf"
    return _coerce(x).to_json()


def scalar_from_json(obj) -> Scalar | _Infinity:
    if obj == "inf":
        return INF
    if "exact" in obj:
        an, ad, bn, bd, d = obj["exact"]
        return Exact(Fraction(an, ad), Fraction(bn, bd), d)
    if "interval" in obj:
        lo, hi = obj["interval"]
        return Interval(Fraction(lo), Fraction(hi))
    raise ValueError(f"unrecognised scalar encoding {obj!r}")


_RAT = r"\d+(?:\.\d*)?(?:/\d+)?"
_TERM = re.compile(
    rf"^(?P<coef>{_RAT})?\*?sqrt\(?(?P<rad>\d+)\)?(?:/(?P<den>\d+))?$|^(?P<q>{_RAT}(?:[eE][-+]?\d+)?)$"
)


def parse_scalar(text: str):
    """Parse ``p/q``, decimals, ``sqrt<k>``, ``a+b*sqrt<k>``, ``sqrt2/8`` or ``inf``."""
    s = text.strip().replace(" ", "")
    if s.lower() in ("inf", "+inf", "infinity", "oo"):
        return INF
    if not s:
        raise ValueError("empty scalar")
    terms = re.findall(r"[+-]?(?:[eE][+-]?|[^+-])+", s)
    total = Exact(0)
    for term in terms:
        sign = -1 if term.startswith("-") else 1
        body = term.lstrip("+-")
        m = _TERM.match(body)
        if not m:
            raise ValueError(f"cannot parse scalar term {term!r} in {text!r}")
        if m.group("q") is not None:
            total = total + sign * Fraction(m.group("q"))
            continue
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if m.group("den"):
            coef /= int(m.group("den"))
        total = total + Exact.sqrt(int(m.group("rad")), sign * coef)
    return total
