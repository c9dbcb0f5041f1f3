"""Wigner-symbol and dipole-prefactor tests.

Reference values are cross-checked against an independent implementation
(sympy.physics.wigner, which uses its own exact Racah evaluation) and
against hand-evaluated closed forms.
"""

import math
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Rational
from sympy.physics.wigner import wigner_3j as sympy_3j
from sympy.physics.wigner import wigner_6j as sympy_6j

from rbcavity.angular import (
    HalfInt,
    clebsch_gordan,
    coupling_zero_field,
    wigner_3j,
    wigner_6j,
)

I_RB = Fr(3, 2)
J_G = Fr(1, 2)
J_D2 = Fr(3, 2)
J_D1 = Fr(1, 2)


class TestHalfInt:
    def test_construction(self):
        assert HalfInt.of(2).twice == 4
        assert HalfInt.of(1.5).twice == 3
        assert HalfInt.of(Fr(1, 2)).twice == 1
        assert float(HalfInt.of(Fr(5, 2))) == 2.5

    def test_rejects_non_half_integer(self):
        with pytest.raises(ValueError):
            HalfInt.of(0.3)

    def test_repr(self):
        assert repr(HalfInt.of(2)) == "2"
        assert repr(HalfInt.of(1.5)) == "3/2"


class TestWigner3j:
    def test_known_value(self):
        # Racah closed form gives -1/sqrt(3)
        assert wigner_3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1 / math.sqrt(3), abs=1e-15)

    def test_m_sum_selection_rule(self):
        assert wigner_3j(1, 1, 1, 1, 1, 1) == 0.0

    def test_triangle_violation(self):
        assert wigner_3j(1, 1, 3, 0, 0, 0) == 0.0

    def test_invalid_projection_raises(self):
        with pytest.raises(ValueError):
            wigner_3j(1, 1, 1, 2, -1, -1)

    def test_parity_mismatch_raises(self):
        with pytest.raises(ValueError):
            wigner_3j(1, 1, 1, 0.5, 0, -0.5)

    @pytest.mark.parametrize("tjs", [
        (2, 2, 2, 0, 2, -2),
        (3, 1, 2, 1, 1, -2),
        (4, 4, 4, 2, 0, -2),
        (3, 3, 4, 3, -1, -2),
        (1, 1, 2, 1, -1, 0),
    ])
    def test_against_sympy(self, tjs):
        args = [Fr(t, 2) for t in tjs]
        ref = float(sympy_3j(*[Rational(t, 2) for t in tjs]))
        assert wigner_3j(*args) == pytest.approx(ref, abs=1e-14)

    @given(st.integers(0, 5), st.integers(0, 5), st.integers(-5, 5), st.integers(-5, 5))
    @settings(max_examples=120, deadline=None)
    def test_symmetries(self, tj1, tj2, tm1, tm2):
        # even column permutations leave the symbol unchanged; odd ones and a
        # global m sign flip multiply by (-1)^(j1+j2+j3)
        if abs(tm1) > tj1 or (tj1 - tm1) % 2:
            return
        if abs(tm2) > tj2 or (tj2 - tm2) % 2:
            return
        tm3 = -tm1 - tm2
        for tj3 in range(abs(tj1 - tj2), tj1 + tj2 + 1, 2):
            if abs(tm3) > tj3:
                continue
            j1, j2, j3 = Fr(tj1, 2), Fr(tj2, 2), Fr(tj3, 2)
            m1, m2, m3 = Fr(tm1, 2), Fr(tm2, 2), Fr(tm3, 2)
            base = wigner_3j(j1, j2, j3, m1, m2, m3)
            cyc = wigner_3j(j2, j3, j1, m2, m3, m1)
            assert cyc == pytest.approx(base, abs=1e-13)
            sign = (-1) ** ((tj1 + tj2 + tj3) // 2)
            swapped = wigner_3j(j2, j1, j3, m2, m1, m3)
            assert swapped == pytest.approx(sign * base, abs=1e-13)
            flipped = wigner_3j(j1, j2, j3, -m1, -m2, -m3)
            assert flipped == pytest.approx(sign * base, abs=1e-13)

    @pytest.mark.parametrize("tj1,tj2", [(1, 1), (2, 2), (1, 2), (3, 2), (2, 4)])
    def test_orthogonality(self, tj1, tj2):
        # sum_{m1,m2} (2j3+1) 3j(j1 j2 j3; m1 m2 m3) 3j(j1 j2 j3'; m1 m2 m3')
        #   = delta_{j3 j3'} delta_{m3 m3'}
        for tj3 in range(abs(tj1 - tj2), tj1 + tj2 + 1, 2):
            for tj3p in range(abs(tj1 - tj2), tj1 + tj2 + 1, 2):
                tm3 = tj3 % 2
                tm3p = tj3p % 2
                if tm3 != tm3p:
                    continue
                acc = 0.0
                for tm1 in range(-tj1, tj1 + 1, 2):
                    tm2 = tm3 - tm1   # m1 + m2 + (-m3) = 0
                    if abs(tm2) > tj2:
                        continue
                    acc += (tj3 + 1) * wigner_3j(
                        Fr(tj1, 2), Fr(tj2, 2), Fr(tj3, 2), Fr(tm1, 2), Fr(tm2, 2), Fr(-tm3, 2)
                    ) * wigner_3j(
                        Fr(tj1, 2), Fr(tj2, 2), Fr(tj3p, 2), Fr(tm1, 2), Fr(tm2, 2), Fr(-tm3, 2)
                    )
                expected = 1.0 if tj3 == tj3p else 0.0
                assert acc == pytest.approx(expected, abs=1e-12)


class TestWigner6j:
    def test_known_value(self):
        assert wigner_6j(1, 1, 1, 1, 1, 1) == pytest.approx(1 / 6, abs=1e-15)

    def test_triangle_violation(self):
        assert wigner_6j(1, 1, 3, 1, 1, 1) == 0.0

    def test_half_integer_value(self):
        ref = float(sympy_6j(Rational(1, 2), Rational(1, 2), 1, Rational(1, 2), Rational(1, 2), 1))
        assert wigner_6j(0.5, 0.5, 1, 0.5, 0.5, 1) == pytest.approx(ref, abs=1e-15)

    def test_non_integer_triad_raises(self):
        with pytest.raises(ValueError):
            wigner_6j(0.5, 0.5, 0.5, 0.5, 0.5, 0.5)

    @given(st.tuples(*[st.integers(0, 6)] * 6))
    @settings(max_examples=200, deadline=None)
    def test_column_symmetries(self, tjs):
        tj1, tj2, tj3, tj4, tj5, tj6 = tjs
        triads = [(tj1, tj2, tj3), (tj1, tj5, tj6), (tj4, tj2, tj6), (tj4, tj5, tj3)]
        if any((a + b + c) % 2 for a, b, c in triads):
            return
        js = [Fr(t, 2) for t in tjs]
        base = wigner_6j(*js)
        # column permutation
        perm = wigner_6j(js[1], js[0], js[2], js[4], js[3], js[5])
        assert perm == pytest.approx(base, abs=1e-13)
        perm2 = wigner_6j(js[2], js[1], js[0], js[5], js[4], js[3])
        assert perm2 == pytest.approx(base, abs=1e-13)
        # upper/lower swap of two columns
        swap = wigner_6j(js[3], js[4], js[2], js[0], js[1], js[5])
        assert swap == pytest.approx(base, abs=1e-13)

    @given(st.tuples(*[st.integers(0, 5)] * 6))
    @settings(max_examples=120, deadline=None)
    def test_against_sympy(self, tjs):
        triads = [
            (tjs[0], tjs[1], tjs[2]),
            (tjs[0], tjs[4], tjs[5]),
            (tjs[3], tjs[1], tjs[5]),
            (tjs[3], tjs[4], tjs[2]),
        ]
        if any((a + b + c) % 2 for a, b, c in triads):
            return
        ref = float(sympy_6j(*[Rational(t, 2) for t in tjs]))
        assert wigner_6j(*[Fr(t, 2) for t in tjs]) == pytest.approx(ref, abs=1e-13)


class TestCouplingZeroField:
    def test_polarisation_selection_rule(self):
        # vanishes unless m_g = m_x + q
        for q in (-1, 0, 1):
            for mg in (-1, 0, 1):
                for mx in (-1, 0, 1):
                    if mg != mx + q:
                        assert coupling_zero_field(1, mg, 1, mx, q, I_RB, J_G, J_D2) == 0.0

    def test_d2_known_strengths(self):
        # |2,2> -> |3,3> cycling transition carries the full line strength of
        # that excited sublevel: |A|^2 = 1/2
        a = coupling_zero_field(2, 2, 3, 3, -1, I_RB, J_G, J_D2)
        assert a * a == pytest.approx(0.5, abs=1e-14)
        # each |1,m> -> |0,0>: |A|^2 = 1/6
        b = coupling_zero_field(1, -1, 0, 0, -1, I_RB, J_G, J_D2)
        assert b * b == pytest.approx(1 / 6, abs=1e-14)

    def test_d1_stretched_to_f1(self):
        # |1,±1> -> |F_x=1, 0|: |A|^2 = 1/12 on the D1 line
        for mg, q in ((1, 1), (-1, -1)):
            a = coupling_zero_field(1, mg, 1, 0, q, I_RB, J_G, J_D1)
            assert a * a == pytest.approx(1 / 12, abs=1e-14)

    @pytest.mark.parametrize("J_x,F_x,m_x", [
        (J_D2, 0, 0), (J_D2, 1, 0), (J_D2, 1, -1), (J_D2, 2, 2), (J_D2, 3, -3),
        (J_D1, 1, 0), (J_D1, 1, 1), (J_D1, 2, 0), (J_D1, 2, -2),
    ])
    def test_manifold_sum_rule(self, J_x, F_x, m_x):
        # summed over every lower sublevel and polarisation, the strength out
        # of any excited sublevel equals (2J_g+1)/(2J_x+1)
        total = 0.0
        for F_g in (1, 2):
            for m_g in range(-F_g, F_g + 1):
                for q in (-1, 0, 1):
                    a = coupling_zero_field(F_g, m_g, F_x, m_x, q, I_RB, J_G, J_x)
                    total += a * a
        expected = (2 * float(J_G) + 1) / (2 * float(J_x) + 1)
        assert total == pytest.approx(expected, abs=1e-12)

    def test_invalid_q(self):
        with pytest.raises(ValueError):
            coupling_zero_field(1, 0, 1, 0, 2, I_RB, J_G, J_D2)


class TestClebschGordan:
    def test_trivial(self):
        assert clebsch_gordan(0.5, 0.5, 0.5, 0.5, 1, 1) == pytest.approx(1.0)

    def test_singlet(self):
        up_down = clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0)
        down_up = clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0, 0)
        assert up_down == pytest.approx(1 / math.sqrt(2), abs=1e-15)
        assert down_up == pytest.approx(-1 / math.sqrt(2), abs=1e-15)

    def test_completeness(self):
        # sum over (F, M) of |<m_I m_J|F M>|^2 = 1 for each (m_I, m_J)
        I, J = Fr(3, 2), Fr(3, 2)
        for tmi in range(-3, 4, 2):
            for tmj in range(-3, 4, 2):
                acc = 0.0
                for tF in range(0, 7, 2):
                    tM = tmi + tmj
                    if abs(tM) > tF:
                        continue
                    c = clebsch_gordan(I, Fr(tmi, 2), J, Fr(tmj, 2), Fr(tF, 2), Fr(tM, 2))
                    acc += c * c
                assert acc == pytest.approx(1.0, abs=1e-12)
