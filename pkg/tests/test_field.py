import math
from fractions import Fraction

import mpmath
import pytest
from gmpy2 import kronecker
from hypothesis import given, settings, strategies as st

from hms.field import make_field, hj_expand, hj_expand_rational, HJExpansion

SQUAREFREE_SMALL = [d for d in range(2, 150)
                    if all(d % (p * p) for p in range(2, 13))]


def brute_fundamental_unit(D):
    """Smallest unit > 1 of the maximal order, by direct search over the
    sqrt(D)-coefficient.  Only feasible for small D."""
    half = D % 4 == 1
    for b in range(1, 400000):
        for target in (-4, 4) if half else (-1, 1):
            # a^2 - b^2 D = target (coords (a + b sqrt(D))/k, k = 2 or 1)
            m = b * b * D + (target if half else target)
            if m < 0:
                continue
            a = math.isqrt(m)
            if a * a == m and (not half or (a - b) % 2 == 0):
                k = 2 if half else 1
                return Fraction(a, k), Fraction(b, k)
    raise RuntimeError("no unit found")


@pytest.mark.parametrize("D", [d for d in SQUAREFREE_SMALL if d < 110])
def test_fundamental_unit_matches_brute_force(D):
    F = make_field(D)
    ea, eb = F.eps.ab()
    if abs(eb) > 300000:
        pytest.skip("unit too large for the brute-force oracle")
    a, b = brute_fundamental_unit(D)
    assert (ea, abs(eb)) == (a, b)
    assert abs(F.eps.norm()) == 1
    assert F.eps.sign_at(0) > 0 and F.eps.compare_at(1, 0) > 0  # eps > 1 at v


@pytest.mark.parametrize("D", [2, 3, 5])
def test_unit_known_values(D):
    F = make_field(D)
    if D == 5:
        assert F.eps == F.elt(0, 1)  # (1+sqrt 5)/2
        assert F.unit_norm == -1
        assert F.eps_plus == F.eps * F.eps
    if D == 3:
        assert F.eps == F.from_ab(2, 1)
        assert F.unit_norm == 1
        assert F.eps.is_totally_positive()
        assert F.eps_plus == F.eps
    if D == 2:
        assert F.eps == F.from_ab(1, 1)
        assert F.unit_norm == -1


@pytest.mark.parametrize("D", SQUAREFREE_SMALL)
def test_eps_plus_is_minimal(D):
    F = make_field(D)
    assert F.eps_plus.is_totally_positive()
    # no smaller positive power of eps (or its negative) is totally positive
    if F.eps_plus == F.eps * F.eps:
        assert not F.eps.is_totally_positive()
        assert not (-F.eps).is_totally_positive()


def test_elem_arith_basics():
    F = make_field(5)
    phi = F.elt(0, 1)
    assert not phi.is_totally_positive()
    assert phi.norm() == -1
    F3 = make_field(3)
    assert (F3.from_ab(2, 1)).norm() == 1
    F2 = make_field(2)
    assert F2.sqrtD().trace() == 0
    x = F.elt(Fraction(1, 2), Fraction(-3, 7))
    assert x.conj().conj() == x
    assert x * x.inverse() == F.one()
    with pytest.raises(ZeroDivisionError):
        F.zero().inverse()


def test_sign_decisions_are_exact():
    F = make_field(2)
    # 577/408 is a convergent of sqrt(2): differences are tiny but exact
    x = F.sqrtD() - Fraction(577, 408)
    assert x.sign_at(0) == -1
    x = F.sqrtD() - Fraction(665857, 470832)
    assert x.sign_at(0) == -1
    x = F.sqrtD() - Fraction(470832, 332929)  # slightly below sqrt 2
    assert x.sign_at(0) == 1


def test_floor_at():
    F = make_field(5)
    phi = F.elt(0, 1)
    assert phi.floor_at(0) == 1
    assert phi.floor_at(1) == -1
    assert (phi * phi).floor_at(0) == 2
    assert F.elt(Fraction(7, 2)).floor_at(0) == 3


def test_hj_rational_examples():
    assert hj_expand(Fraction(7, 3)).digits == (3, 2, 2)
    assert hj_expand(Fraction(3, 2)).digits == (2, 2)


def test_hj_quadratic_examples():
    F = make_field(5)
    e = hj_expand((3 + F.sqrtD()) / 2)
    assert e.flavor == "periodic" and e.preperiod == () and e.period == (3,)


@given(p=st.integers(2, 5000), q=st.integers(1, 5000))
@settings(max_examples=300, deadline=None)
def test_hj_rational_roundtrip(p, q):
    if p <= q:
        p, q = q + p, q  # force p/q > 1
    x = Fraction(p, q)
    e = hj_expand_rational(x)
    assert all(b >= 2 for b in e.digits)
    assert e.value() == x


@pytest.mark.parametrize("D", [2, 3, 5, 6, 7, 10, 11, 13, 85, 165])
def test_hj_periodic_tail_self_consistent(D):
    F = make_field(D)
    for seed in (1 + F.sqrtD(), (3 + F.sqrtD()) / 2 if D % 4 == 1 else 2 + F.sqrtD()):
        e = hj_expand(seed)
        assert e.flavor == "periodic"
        assert all(b >= 2 for b in e.preperiod + e.period)
        # the purely periodic tail w satisfies w = b0 - 1/w1 exactly:
        # solve the quadratic fixed-point equation of one full period
        A, B, C, E = 1, 0, 0, 1
        for b in e.period:
            A, B, C, E = A * b - C, B * b - E, A, B
        # w = (A w + B)/(C w + E)  =>  C w^2 + (E - A) w - B = 0
        # verify the discriminant is a square times D (tail lives in F)
        disc = (E - A) ** 2 + 4 * C * B
        k = math.isqrt(abs(disc) // D) if disc % D == 0 else None
        assert disc > 0
        w = (F.elt(A - E) + F.sqrtD() * math.isqrt(disc // D)) / (2 * C) \
            if disc % D == 0 and math.isqrt(disc // D) ** 2 * D == disc else None
        if w is not None:
            assert (C * w * w + (E - A) * w - B).is_zero()


def test_zeta_minus_one_known_values():
    assert make_field(5).zeta_minus_one() == Fraction(1, 30)
    assert make_field(2).zeta_minus_one() == Fraction(1, 12)
    assert make_field(3).zeta_minus_one() == Fraction(1, 6)


@pytest.mark.parametrize("D", [d for d in SQUAREFREE_SMALL
                               if (d if d % 4 == 1 else 4 * d) <= 200])
def test_zeta_functional_equation(D):
    F = make_field(D)
    d = F.d
    mpmath.mp.dps = 30
    # L(2, chi_d) via Hurwitz zeta, chi_d the Kronecker symbol
    L = sum(int(kronecker(d, a)) * mpmath.zeta(2, mpmath.mpf(a) / d)
            for a in range(1, d + 1)) / mpmath.mpf(d) ** 2
    zeta_F2 = mpmath.zeta(2) * L
    predicted = mpmath.mpf(d) ** mpmath.mpf(1.5) * zeta_F2 / (4 * mpmath.pi ** 4)
    actual = F.zeta_minus_one()
    assert abs(float(predicted) - float(actual)) < 1e-8


def test_make_field_rejects_bad_input():
    with pytest.raises(ValueError):
        make_field(12)
    with pytest.raises(ValueError):
        make_field(1)


def test_place_swap_conjugates_consistently():
    F = make_field(85)
    x = F.elt(3, Fraction(2, 5))
    assert x.sign_at(1) == x.conj().sign_at(0)
    assert x.floor_at(1) == x.conj().floor_at(0)
    e1 = hj_expand(1 + F.sqrtD() * 2, place=1)
    e2 = hj_expand((1 + F.sqrtD() * 2).conj(), place=0)
    assert e1 == e2
