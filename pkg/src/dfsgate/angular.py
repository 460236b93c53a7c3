"""Angular momentum coupling coefficients for small spin systems.

Exact evaluation of the Wigner 6j symbol, Clebsch-Gordan coefficients
and the reduced matrix elements that appear in the three-spin qubit
encoding.  The Racah single-sum formulas are evaluated with exact
integer factorials through :class:`fractions.Fraction`, so every value
returned here is a correctly rounded float of an exact surd.  That is
more than enough headroom for the small angular momenta (j <= 3) this
package ever asks for, and it keeps the module free of any external
symbolic dependency.

Phase conventions are Condon-Shortley throughout.  Reduced matrix
elements follow the normalization in which a bare spin-1/2 satisfies
``<1/2||S||1/2> = sqrt(3/2)``, i.e. ``<j||J||j> = sqrt(j(j+1)(2j+1))``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "HalfInt",
    "SPIN_HALF_RME",
    "clebsch_gordan",
    "reduced_spin_element",
    "triangle_ok",
    "wigner_6j",
]

#: Reduced matrix element of a single spin-1/2 operator, sqrt(3/2).
SPIN_HALF_RME = math.sqrt(1.5)


class HalfInt:
    """An exact half-integer, stored as twice its value.

    Angular momentum labels are either integers or half-odd integers;
    storing ``2j`` as an int keeps all arithmetic exact and hashable.

    Parameters
    ----------
    value : int, float, Fraction or HalfInt
        Must be an exact multiple of 1/2 (so ``1.5`` is fine, ``0.3``
        raises).

    Examples
    --------
    >>> HalfInt(1.5) + HalfInt(0.5)
    HalfInt(2)
    >>> HalfInt(1.5).twice
    3
    """

    __slots__ = ("twice",)

    def __init__(self, value):
        if isinstance(value, HalfInt):
            object.__setattr__(self, "twice", value.twice)
            return
        frac = Fraction(value) * 2
        if frac.denominator != 1:
            raise ValueError(f"{value!r} is not a multiple of 1/2")
        object.__setattr__(self, "twice", int(frac))

    @classmethod
    def from_twice(cls, twice: int) -> "HalfInt":
        """Build from an already doubled integer value."""
        obj = cls.__new__(cls)
        object.__setattr__(obj, "twice", int(twice))
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("HalfInt is immutable")

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def as_fraction(self) -> Fraction:
        return Fraction(self.twice, 2)

    def __float__(self) -> float:
        return self.twice / 2.0

    def __int__(self) -> int:
        if not self.is_integer:
            raise ValueError(f"{self} is not an integer")
        return self.twice // 2

    def _twice_of(self, other):
        if isinstance(other, HalfInt):
            return other.twice
        try:
            return HalfInt(other).twice
        except (ValueError, TypeError):
            return None

    def __add__(self, other):
        t = self._twice_of(other)
        return NotImplemented if t is None else HalfInt.from_twice(self.twice + t)

    __radd__ = __add__

    def __sub__(self, other):
        t = self._twice_of(other)
        return NotImplemented if t is None else HalfInt.from_twice(self.twice - t)

    def __rsub__(self, other):
        t = self._twice_of(other)
        return NotImplemented if t is None else HalfInt.from_twice(t - self.twice)

    def __neg__(self):
        return HalfInt.from_twice(-self.twice)

    def __abs__(self):
        return HalfInt.from_twice(abs(self.twice))

    def __eq__(self, other):
        t = self._twice_of(other)
        return NotImplemented if t is None else self.twice == t

    def __lt__(self, other):
        t = self._twice_of(other)
        return NotImplemented if t is None else self.twice < t

    def __le__(self, other):
        t = self._twice_of(other)
        return NotImplemented if t is None else self.twice <= t

    def __gt__(self, other):
        t = self._twice_of(other)
        return NotImplemented if t is None else self.twice > t

    def __ge__(self, other):
        t = self._twice_of(other)
        return NotImplemented if t is None else self.twice >= t

    def __hash__(self):
        return hash(self.as_fraction())

    def __repr__(self):
        if self.is_integer:
            return f"HalfInt({self.twice // 2})"
        return f"HalfInt({self.twice}/2)"

    def __str__(self):
        if self.is_integer:
            return str(self.twice // 2)
        return f"{self.twice}/2"


def _twice(j) -> int:
    """Doubled integer value of a half-integer-like argument."""
    return HalfInt(j).twice


def triangle_ok(j1, j2, j3) -> bool:
    """Check the triangle condition on three angular momenta.

    True iff ``|j1 - j2| <= j3 <= j1 + j2`` and ``j1 + j2 + j3`` is an
    integer.  Negative inputs raise ValueError.
    """
    a, b, c = _twice(j1), _twice(j2), _twice(j3)
    if min(a, b, c) < 0:
        raise ValueError("angular momenta must be non-negative")
    if (a + b + c) % 2:
        return False
    return abs(a - b) <= c <= a + b


def _delta_sq(ta: int, tb: int, tc: int) -> Fraction:
    """Squared triangle coefficient Delta(a,b,c)^2 for doubled args."""
    return Fraction(
        math.factorial((ta + tb - tc) // 2)
        * math.factorial((ta - tb + tc) // 2)
        * math.factorial((-ta + tb + tc) // 2),
        math.factorial((ta + tb + tc) // 2 + 1),
    )


def _signed_sqrt(s: Fraction, pref: Fraction) -> float:
    """Float value of sign(s) * sqrt(s^2 * pref), evaluated exactly."""
    if s == 0:
        return 0.0
    mag = math.sqrt(float(s * s * pref))
    return mag if s > 0 else -mag


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol {j1 j2 j3; j4 j5 j6}.

    Evaluated with the Racah single-sum formula over exact rationals.
    Returns 0.0 (not an error) when any of the four triads violates the
    triangle condition.

    Examples
    --------
    >>> round(wigner_6j(0.5, 1, 0.5, 0.5, 0, 0.5), 15)
    0.5
    >>> wigner_6j(0, 1, 0, 0, 0, 0)
    0.0
    """
    return _wigner_6j(*(_twice(j) for j in (j1, j2, j3, j4, j5, j6)))


@lru_cache(maxsize=None)
def _wigner_6j(a, b, c, d, e, f) -> float:
    if min(a, b, c, d, e, f) < 0:
        raise ValueError("angular momenta must be non-negative")
    triads = ((a, b, c), (a, e, f), (d, b, f), (d, e, c))
    for ta, tb, tc in triads:
        if (ta + tb + tc) % 2 or not abs(ta - tb) <= tc <= ta + tb:
            return 0.0
    pref = Fraction(1)
    for tr in triads:
        pref *= _delta_sq(*tr)
    sums = [(ta + tb + tc) // 2 for ta, tb, tc in triads]
    caps = [
        (a + b + d + e) // 2,
        (b + c + e + f) // 2,
        (c + a + f + d) // 2,
    ]
    total = Fraction(0)
    for t in range(max(sums), min(caps) + 1):
        term = Fraction(math.factorial(t + 1))
        for s in sums:
            term /= math.factorial(t - s)
        for cap in caps:
            term /= math.factorial(cap - t)
        total += term if t % 2 == 0 else -term
    return _signed_sqrt(total, pref)


def clebsch_gordan(j1, m1, j2, m2, j, m) -> float:
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | j m>.

    Condon-Shortley phases; Racah's closed form with exact integer
    factorials.  Selection rule violations (``m1 + m2 != m``, triangle
    failure, ``|m| > j``) return 0.0.

    Examples
    --------
    >>> round(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0), 15) == round(2**-0.5, 15)
    True
    """
    return _cg(
        _twice(j1), _twice(m1), _twice(j2), _twice(m2), _twice(j), _twice(m)
    )


@lru_cache(maxsize=None)
def _cg(tj1, tm1, tj2, tm2, tj, tm) -> float:
    if min(tj1, tj2, tj) < 0:
        raise ValueError("angular momenta must be non-negative")
    for tjx, tmx in ((tj1, tm1), (tj2, tm2), (tj, tm)):
        if (tjx + tmx) % 2:
            raise ValueError("m must differ from j by an integer")
    if tm1 + tm2 != tm:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tm) > tj:
        return 0.0
    if (tj1 + tj2 + tj) % 2 or not abs(tj1 - tj2) <= tj <= tj1 + tj2:
        return 0.0

    pref = (
        Fraction(tj + 1)
        * _delta_sq(tj1, tj2, tj)
        * math.factorial((tj1 + tm1) // 2)
        * math.factorial((tj1 - tm1) // 2)
        * math.factorial((tj2 + tm2) // 2)
        * math.factorial((tj2 - tm2) // 2)
        * math.factorial((tj + tm) // 2)
        * math.factorial((tj - tm) // 2)
    )
    # Summation limits keep every factorial argument non-negative.
    k_lo = max(
        0,
        -(tj - tj2 + tm1) // 2,
        -(tj - tj1 - tm2) // 2,
    )
    k_hi = min(
        (tj1 + tj2 - tj) // 2,
        (tj1 - tm1) // 2,
        (tj2 + tm2) // 2,
    )
    total = Fraction(0)
    for k in range(k_lo, k_hi + 1):
        den = (
            math.factorial(k)
            * math.factorial((tj1 + tj2 - tj) // 2 - k)
            * math.factorial((tj1 - tm1) // 2 - k)
            * math.factorial((tj2 + tm2) // 2 - k)
            * math.factorial((tj - tj2 + tm1) // 2 + k)
            * math.factorial((tj - tj1 - tm2) // 2 + k)
        )
        total += Fraction(-1 if k % 2 else 1, den)
    return _signed_sqrt(total, pref)


# Reduced matrix elements <jzt, 1/2 || S_role || jzt', 1/2> of the three
# single-spin operators inside the lowest (total spin 1/2) pair of
# three-spin multiplets.  Rows/columns are indexed by the z-t pair spin
# jzt in {0, 1}.  The sign asymmetry between the z and t rows is a
# Condon-Shortley artifact; the n element is diagonal because S_n
# cannot change the pair spin.
_SQRT2 = math.sqrt(2.0)
_REDUCED = {
    "z": ((0.0, -1.0 / _SQRT2), (-1.0 / _SQRT2, math.sqrt(2.0 / 3.0))),
    "t": ((0.0, 1.0 / _SQRT2), (1.0 / _SQRT2, math.sqrt(2.0 / 3.0))),
    "n": ((math.sqrt(6.0) / 2.0, 0.0), (0.0, -1.0 / math.sqrt(6.0))),
}


def reduced_spin_element(role: str, jzt, jzt_prime) -> float:
    """Reduced matrix element <jzt,1/2||S_role||jzt',1/2>.

    ``role`` names one of the three spins of a qubit: "z" and "t" form
    the inner pair (with pair spin jzt), "n" is the spin coupled to the
    pair to reach total spin 1/2.

    Parameters
    ----------
    role : {"z", "t", "n"}
    jzt, jzt_prime : int
        Pair spin labels, each 0 or 1.
    """
    try:
        table = _REDUCED[role]
    except KeyError:
        raise ValueError(f"role must be one of z, t, n; got {role!r}") from None
    a, b = int(HalfInt(jzt).twice / 2), int(HalfInt(jzt_prime).twice / 2)
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError("pair spin labels must be 0 or 1")
    return table[a][b]
