"""Exact angular-momentum algebra.

Wigner 3-j and 6-j symbols are evaluated by the Racah factorial sums using
exact integer/rational arithmetic (angular momenta are stored as doubled
integers, so half-integer values are represented without rounding).  The
result is converted to a float only at the very end; for the small quantum
numbers of an alkali D line this makes the symbols exact to one ulp.

``coupling_zero_field`` gives the angular prefactor that multiplies the
reduced dipole matrix element for a hyperfine transition at zero magnetic
field; it vanishes unless m_g = m_x + q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

Spinlike = Union["HalfInt", int, float, Fraction]


@dataclass(frozen=True, order=True)
class HalfInt:
    """An integer or half-integer angular momentum, stored as 2*value."""

    twice: int

    @classmethod
    def of(cls, value: Spinlike) -> "HalfInt":
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, int):
            return cls(2 * value)
        if isinstance(value, Fraction):
            twice = 2 * value
            if twice.denominator != 1:
                raise ValueError(f"{value} is not integer or half-integer")
            return cls(int(twice))
        twice = 2.0 * value
        if twice != round(twice):
            raise ValueError(f"{value} is not integer or half-integer")
        return cls(int(round(twice)))

    @property
    def value(self) -> float:
        return self.twice / 2.0

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __float__(self) -> float:
        return self.value

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.twice)

    def __add__(self, other: "HalfInt") -> "HalfInt":
        return HalfInt(self.twice + other.twice)

    def __sub__(self, other: "HalfInt") -> "HalfInt":
        return HalfInt(self.twice - other.twice)

    def __repr__(self) -> str:
        if self.is_integer:
            return str(self.twice // 2)
        return f"{self.twice}/2"


def _pair(j: Spinlike, m: Spinlike) -> tuple[int, int]:
    """Validate a (j, m) pair and return doubled integers."""
    jj, mm = HalfInt.of(j), HalfInt.of(m)
    if jj.twice < 0:
        raise ValueError(f"angular momentum magnitude j={jj} must be >= 0")
    if abs(mm.twice) > jj.twice:
        raise ValueError(f"projection m={mm} exceeds j={jj}")
    if (jj.twice - mm.twice) % 2 != 0:
        raise ValueError(f"m={mm} and j={jj} must differ by an integer")
    return jj.twice, mm.twice


def _triangle_ok(tj1: int, tj2: int, tj3: int) -> bool:
    return abs(tj1 - tj2) <= tj3 <= tj1 + tj2


def _fact(n: int) -> int:
    if n < 0:
        raise ValueError("negative factorial argument")
    return math.factorial(n)


def _delta2(tj1: int, tj2: int, tj3: int) -> Fraction:
    """Square of the Racah triangle coefficient, exact."""
    return Fraction(
        _fact((tj1 + tj2 - tj3) // 2)
        * _fact((tj1 - tj2 + tj3) // 2)
        * _fact((-tj1 + tj2 + tj3) // 2),
        _fact((tj1 + tj2 + tj3) // 2 + 1),
    )


def _signed_sqrt(s: Fraction, r: Fraction) -> float:
    # value = s * sqrt(r), exact rationals in, float out
    return float(s) * math.sqrt(float(r))


@lru_cache(maxsize=None)
def _wigner_3j_t(tj1: int, tj2: int, tj3: int, tm1: int, tm2: int, tm3: int) -> float:
    if tm1 + tm2 + tm3 != 0:
        return 0.0
    if not _triangle_ok(tj1, tj2, tj3) or (tj1 + tj2 + tj3) % 2 != 0:
        return 0.0

    j1pm1 = (tj1 + tm1) // 2
    j1mm1 = (tj1 - tm1) // 2
    j2pm2 = (tj2 + tm2) // 2
    j2mm2 = (tj2 - tm2) // 2
    j3pm3 = (tj3 + tm3) // 2
    j3mm3 = (tj3 - tm3) // 2
    j12m3 = (tj1 + tj2 - tj3) // 2

    kmin = max(0, (tj2 - tj3 - tm1) // 2, (tj1 - tj3 + tm2) // 2)
    kmax = min(j12m3, j1mm1, j2pm2)
    total = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (
            _fact(k)
            * _fact(j12m3 - k)
            * _fact(j1mm1 - k)
            * _fact(j2pm2 - k)
            * _fact((tj3 - tj2 + tm1) // 2 + k)
            * _fact((tj3 - tj1 - tm2) // 2 + k)
        )
        total += Fraction(-1 if k % 2 else 1, den)
    if total == 0:
        return 0.0

    phase = -1 if ((tj1 - tj2 - tm3) // 2) % 2 else 1
    radicand = _delta2(tj1, tj2, tj3) * (
        _fact(j1pm1) * _fact(j1mm1) * _fact(j2pm2) * _fact(j2mm2) * _fact(j3pm3) * _fact(j3mm3)
    )
    return _signed_sqrt(phase * total, radicand)


def wigner_3j(j1: Spinlike, j2: Spinlike, j3: Spinlike,
              m1: Spinlike, m2: Spinlike, m3: Spinlike) -> float:
    """Wigner 3-j symbol (j1 j2 j3; m1 m2 m3)."""
    tj1, tm1 = _pair(j1, m1)
    tj2, tm2 = _pair(j2, m2)
    tj3, tm3 = _pair(j3, m3)
    return _wigner_3j_t(tj1, tj2, tj3, tm1, tm2, tm3)


@lru_cache(maxsize=None)
def _wigner_6j_t(tj1: int, tj2: int, tj3: int, tj4: int, tj5: int, tj6: int) -> float:
    triads = (
        (tj1, tj2, tj3),
        (tj1, tj5, tj6),
        (tj4, tj2, tj6),
        (tj4, tj5, tj3),
    )
    for ta, tb, tc in triads:
        if (ta + tb + tc) % 2 != 0:
            raise ValueError("6-j triad does not couple to an integer sum")
    for ta, tb, tc in triads:
        if not _triangle_ok(ta, tb, tc):
            return 0.0

    t = [(ta + tb + tc) // 2 for ta, tb, tc in triads]
    q = [
        (tj1 + tj2 + tj4 + tj5) // 2,
        (tj2 + tj3 + tj5 + tj6) // 2,
        (tj3 + tj1 + tj6 + tj4) // 2,
    ]
    total = Fraction(0)
    for k in range(max(t), min(q) + 1):
        den = 1
        for ti in t:
            den *= _fact(k - ti)
        for qi in q:
            den *= _fact(qi - k)
        total += Fraction((-1 if k % 2 else 1) * _fact(k + 1), den)
    if total == 0:
        return 0.0

    radicand = Fraction(1)
    for ta, tb, tc in triads:
        radicand *= _delta2(ta, tb, tc)
    return _signed_sqrt(total, radicand)


def wigner_6j(j1: Spinlike, j2: Spinlike, j3: Spinlike,
              j4: Spinlike, j5: Spinlike, j6: Spinlike) -> float:
    """Wigner 6-j symbol {j1 j2 j3; j4 j5 j6}."""
    tjs = [HalfInt.of(j).twice for j in (j1, j2, j3, j4, j5, j6)]
    for tj in tjs:
        if tj < 0:
            raise ValueError("angular momentum magnitudes must be >= 0")
    return _wigner_6j_t(*tjs)


def clebsch_gordan(j1: Spinlike, m1: Spinlike, j2: Spinlike, m2: Spinlike,
                   j: Spinlike, m: Spinlike) -> float:
    """<j1 m1, j2 m2 | j m>."""
    tj1, tm1 = _pair(j1, m1)
    tj2, tm2 = _pair(j2, m2)
    tj, tm = _pair(j, m)
    phase = -1 if ((-tj1 + tj2 - tm) // 2) % 2 else 1
    return phase * math.sqrt(tj + 1) * _wigner_3j_t(tj1, tj2, tj, tm1, tm2, -tm)


def coupling_zero_field(F_g: Spinlike, m_Fg: Spinlike, F_x: Spinlike, m_Fx: Spinlike,
                        q: int, I: Spinlike, J_g: Spinlike, J_x: Spinlike) -> float:
    """Angular prefactor A_gx of a zero-field hyperfine transition.

    The transition dipole moment between magnetic sublevels factors as
    <g|e r_q|x> = A_gx * d where d is the reduced dipole matrix element of
    the fine-structure line and q in {-1, 0, +1} is the spherical component
    of the light field.  Returns 0 unless m_Fg = m_Fx + q.
    """
    if q not in (-1, 0, 1):
        raise ValueError(f"q must be -1, 0 or +1, got {q}")
    tFg, tmg = _pair(F_g, m_Fg)
    tFx, tmx = _pair(F_x, m_Fx)
    tI = HalfInt.of(I).twice
    tJg = HalfInt.of(J_g).twice
    tJx = HalfInt.of(J_x).twice
    if tmg != tmx + 2 * q:
        return 0.0

    six = _wigner_6j_t(tJg, tJx, 2, tFx, tFg, tI)
    three = _wigner_3j_t(tFx, 2, tFg, tmx, 2 * q, -tmg)
    # exponent 1 + I + J_x + F_x + F_g - m_Fx is an integer for physical inputs
    exp2 = 2 + tI + tJx + tFx + tFg - tmx
    phase = -1 if (exp2 // 2) % 2 else 1
    root = math.sqrt((tFg + 1) * (tFx + 1) * (tJg + 1))
    return phase * root * six * three
