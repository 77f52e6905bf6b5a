import random

import pytest

from hms.classgroups import class_data
from hms.cusps import (CuspType, GroupSpec, cusp_count, cusp_type,
                       divisor_ideals, enumerate_cusps, exact_sqrt,
                       matrix_in_group, resolve_cusp, stabilizer_oracle,
                       transversal_size, unit_exponent, v_contains)
from hms.field import make_field
from hms.ideals import FracIdeal, factor_ideal, primes_above


def ids(F, n):
    return FracIdeal.from_gens(F, [F.elt(n)])


def specs_for(F, N, variant):
    cd = class_data(F)
    return [GroupSpec(variant, N, b)
            for b in cd.narrow_reps(coprime_to=int(N.norm()))]


# ---------------------------------------------------------------------------
# enumeration and counting

def test_q_sqrt5_examples():
    F = make_field(5)
    one = FracIdeal.one(F)
    spec = GroupSpec("gamma0", one, one)
    cusps = enumerate_cusps(spec)
    assert len(cusps) == 1

    spec2 = GroupSpec("gamma0", ids(F, 2), one)
    cusps2 = enumerate_cusps(spec2)
    assert len(cusps2) == 2
    assert sorted(int(c.M.norm()) for c in cusps2) == [1, 4]

    spec4 = GroupSpec("gamma0", ids(F, 4), one)
    cusps4 = enumerate_cusps(spec4)
    assert len(cusps4) == 3
    assert sorted(int(c.M.norm()) for c in cusps4) == [1, 4, 16]


def test_cusp_count_examples():
    F = make_field(5)
    assert cusp_count(F, ids(F, 2), "gamma0") == 2
    assert cusp_count(F, FracIdeal.one(F), "gamma0") == 1
    F165 = make_field(165)
    assert cusp_count(F165, FracIdeal.one(F165), "gamma0") == 8
    cd = class_data(F165)
    assert cd.h_plus * cd.h == 8


def test_q_group_size_examples():
    from hms.classgroups import q_group_size
    F = make_field(5)
    one = FracIdeal.one(F)
    assert q_group_size(one, ids(F, 2), "gamma0") == 1
    P2 = ids(F, 2)
    assert q_group_size(P2, ids(F, 4), "gamma0") == 1
    for D in (2, 13, 85):
        FD = make_field(D)
        cd = class_data(FD)
        oneD = FracIdeal.one(FD)
        assert q_group_size(oneD, oneD, "gamma0") == cd.h_plus * cd.h


LEVEL_GENS = [1, 2, 3, 4, 5, 6]


@pytest.mark.parametrize("D", [2, 3, 5, 13, 85, 165])
@pytest.mark.parametrize("variant", ["gamma0", "gamma1", "gamma0_1", "gamma1_1"])
def test_formula_matches_enumeration(D, variant):
    F = make_field(D)
    for g in LEVEL_GENS[:4]:
        N = ids(F, g)
        if variant == "gamma1" and any(e > 1 for _, e in factor_ideal(N)):
            continue
        total = sum(len(enumerate_cusps(s)) for s in specs_for(F, N, variant))
        assert total == cusp_count(F, N, variant)


@pytest.mark.parametrize("D", [5, 13, 85])
def test_record_invariants(D):
    F = make_field(D)
    for g in (2, 6):
        N = ids(F, g)
        for spec in specs_for(F, N, "gamma0"):
            for c in enumerate_cusps(spec):
                b = spec.component
                assert c.a.is_integral()
                assert b.contains(c.c)
                assert FracIdeal.from_gens(F, [c.a]) + \
                    FracIdeal.from_gens(F, [c.c]) * b.inverse() == c.s
                assert c.M.is_integral() and c.M.divides(N) is False or True
                assert (c.M + N) == c.M  # M | N
                assert (c.s + N) == FracIdeal.one(F)  # s coprime to N
                (lam, mu), (negc, a) = c.gamma
                assert c.s.inverse().contains(lam)
                assert (c.s * b).inverse().contains(mu)
                assert lam * a - mu * negc == F.one()


@pytest.mark.parametrize("D", [5, 13, 85])
def test_action_preserves_invariants(D):
    """Moving a representative by random group elements never changes the
    wide class of s or the divisor M."""
    F = make_field(D)
    cd = class_data(F)
    N = ids(F, 6)
    rng = random.Random(D)
    for spec in specs_for(F, N, "gamma0")[:1]:
        b = spec.component
        binv1, binv2 = b.inverse().basis()
        nb1, nb2 = (N * b).basis()
        for c in enumerate_cusps(spec):
            tok = cd.wide_token(c.s)
            for _ in range(20):
                # random word in upper/lower unipotent generators
                a_el, c_el = c.a, c.c
                for _ in range(3):
                    if rng.random() < 0.5:
                        q = binv1 * rng.randint(-2, 2) + binv2 * rng.randint(-2, 2)
                        a_el = a_el + q * c_el
                    else:
                        r = nb1 * rng.randint(-2, 2) + nb2 * rng.randint(-2, 2)
                        c_el = c_el + r * a_el
                s2 = FracIdeal.from_gens(F, [a_el]) + \
                    FracIdeal.from_gens(F, [c_el]) * b.inverse()
                M2 = N + FracIdeal.from_gens(F, [c_el]) * (b * s2).inverse()
                assert cd.wide_token(s2) == tok
                assert M2 == c.M


# ---------------------------------------------------------------------------
# types and the stabilizer oracle

def test_type_of_trivial_level():
    F = make_field(5)
    one = FracIdeal.one(F)
    spec = GroupSpec("gamma0", one, one)
    (c,) = enumerate_cusps(spec)
    t = cusp_type(c, spec)
    assert t.module == c.s.inverse() ** 2
    assert t.v_index == 1 and t.v_gen == F.eps_plus


def test_type_of_infinity_and_zero_cusps():
    F = make_field(5)
    one = FracIdeal.one(F)
    N = ids(F, 2)
    spec = GroupSpec("gamma0", N, one)
    rng = random.Random(7)
    for c in enumerate_cusps(spec):
        t = cusp_type(c, spec)
        if c.M == N:       # the class of infinity = (1:0)
            assert t.module == one  # s = b = (1): M-module = b^-1 = R
        if c.M == one:     # the class of zero = (0:1)
            assert t.module == c.s.inverse() ** 2 * N
        assert stabilizer_oracle(c, spec, t, rng, trials=20)


@pytest.mark.parametrize("D", [2, 3, 5, 13, 85, 165])
@pytest.mark.parametrize("variant", ["gamma0", "gamma1", "gamma0_1", "gamma1_1"])
def test_stabilizer_oracle(D, variant):
    F = make_field(D)
    rng = random.Random(100 * D)
    for g in (2, 3):
        N = ids(F, g)
        if variant == "gamma1" and any(e > 1 for _, e in factor_ideal(N)):
            continue
        for spec in specs_for(F, N, variant)[:2]:
            for c in enumerate_cusps(spec):
                t = cusp_type(c, spec)
                assert stabilizer_oracle(c, spec, t, rng, trials=20)


def test_gamma1_rejects_non_squarefree():
    F = make_field(5)
    spec = GroupSpec("gamma1", ids(F, 4), FracIdeal.one(F))
    (c, *_) = enumerate_cusps(spec)
    with pytest.raises(ValueError):
        cusp_type(c, spec)


def test_group_spec_validation():
    F = make_field(5)
    with pytest.raises(ValueError):
        GroupSpec("gamma7", FracIdeal.one(F), FracIdeal.one(F))
    with pytest.raises(ValueError):
        GroupSpec("gamma0", ids(F, 2), ids(F, 2))  # not coprime


# ---------------------------------------------------------------------------
# resolutions

def test_resolution_q_sqrt5_trivial_level():
    F = make_field(5)
    one = FracIdeal.one(F)
    spec = GroupSpec("gamma0", one, one)
    (c,) = enumerate_cusps(spec)
    r = resolve_cusp(cusp_type(c, spec))
    assert r.special and r.selfints == [-1]
    assert r.period == 1 and r.repetition == 1


def test_resolution_q_sqrt2_trivial_level():
    F = make_field(2)
    one = FracIdeal.one(F)
    spec = GroupSpec("gamma0", one, one)
    (c,) = enumerate_cusps(spec)
    r = resolve_cusp(cusp_type(c, spec))
    assert r.special or all(v <= -2 for v in r.selfints)
    assert len(r.selfints) == r.period * r.repetition or r.special


def test_resolution_repetition_semantics():
    # V = <eps^4> halves the unit group of the trivial-level cusp of
    # Q(sqrt 5), doubling the cycle: (-3) becomes (-3, -3)
    F = make_field(5)
    t = CuspType(module=FracIdeal.one(F), v_gen=F.eps ** 4, v_index=2,
                 base=F.eps_plus)
    r = resolve_cusp(t)
    assert not r.special
    assert r.selfints == [-3, -3]
    assert (r.period, r.repetition) == (1, 2)


@pytest.mark.parametrize("D", [2, 3, 5, 13, 85, 165])
def test_resolution_properties(D):
    F = make_field(D)
    from hms.field import hj_expand
    for g in (1, 2, 3):
        N = ids(F, g)
        for spec in specs_for(F, N, "gamma0")[:2]:
            for c in enumerate_cusps(spec):
                t = cusp_type(c, spec)
                r = resolve_cusp(t)
                if r.special:
                    assert len(r.selfints) == 1
                else:
                    assert all(v <= -2 for v in r.selfints)
                    assert len(r.selfints) == r.period * r.repetition
                # cycle product is in V at exactly the reported repetition
                assert v_contains(t, _cycle_product(t) ** r.repetition)
                for k in range(1, r.repetition):
                    assert not v_contains(t, _cycle_product(t) ** k)


def _cycle_product(t):
    from hms.cusps import _oriented_basis, _reduce_basis
    from hms.field import hj_expand
    F = t.module.field
    x, y = _reduce_basis(*_oriented_basis(t.module))
    w = x / y
    exp = hj_expand(w)
    prod = F.one()
    for bj in exp.period:
        w = (F.elt(bj) - w).inverse()
        prod = prod * w
    assert abs(prod.norm()) == 1 and prod.is_totally_positive()
    return prod


@pytest.mark.parametrize("D", [5, 13, 85])
def test_gamma0_1_cycle_multiple_of_gamma0(D):
    F = make_field(D)
    for g in (2, 3):
        N = ids(F, g)
        for spec0, spec1 in zip(specs_for(F, N, "gamma0"),
                                specs_for(F, N, "gamma0_1")):
            c0s = enumerate_cusps(spec0)
            c1s = enumerate_cusps(spec1)
            # compare cusps with equal invariants (s, M)
            for c0 in c0s:
                match = [c1 for c1 in c1s
                         if c1.s == c0.s and c1.M == c0.M]
                assert match
                l0 = len(resolve_cusp(cusp_type(c0, spec0)).selfints)
                for c1 in match:
                    l1 = len(resolve_cusp(cusp_type(c1, spec1)).selfints)
                    assert l1 % l0 == 0 and l1 // l0 in (1, 2)


# ---------------------------------------------------------------------------
# helpers

def test_exact_sqrt():
    F = make_field(5)
    phi = F.elt(0, 1)
    assert exact_sqrt(phi * phi) in (phi, -phi)
    assert exact_sqrt(F.elt(9)) == F.elt(3)
    assert exact_sqrt(F.sqrtD() * F.sqrtD() * 4) == F.elt(10) or \
        exact_sqrt(F.elt(20)) is not None
    assert exact_sqrt(F.elt(7)) is None
    assert exact_sqrt(F.sqrtD()) is None
    F2 = make_field(2)
    assert exact_sqrt(F2.elt(2)) is not None  # sqrt(2) = sqrtD


def test_unit_exponent():
    F = make_field(5)
    for k in (-5, -1, 0, 1, 7):
        for sg in (1, -1):
            u = F.eps ** k * sg
            assert unit_exponent(F, u) == (sg, k)
    assert unit_exponent(F, F.elt(2)) is None


def test_matrix_in_group_basics():
    F = make_field(5)
    one = FracIdeal.one(F)
    N = ids(F, 2)
    spec = GroupSpec("gamma0", N, one)
    idm = ((F.one(), F.zero()), (F.zero(), F.one()))
    assert matrix_in_group(idm, spec)
    up = ((F.one(), F.elt(3)), (F.zero(), F.one()))
    assert matrix_in_group(up, spec)
    low_bad = ((F.one(), F.zero()), (F.one(), F.one()))
    assert not matrix_in_group(low_bad, spec)  # c must be in (2)
    low_ok = ((F.one(), F.zero()), (F.elt(2), F.one()))
    assert matrix_in_group(low_ok, spec)
    scaled = tuple(tuple(e * F.eps for e in row) for row in idm)
    assert matrix_in_group(scaled, spec)  # det eps^2 is totally positive
    spec1 = GroupSpec("gamma0_1", N, one)
    assert matrix_in_group(scaled, spec1)  # = eps * identity, a scalar
    dil = ((F.eps_plus, F.zero()), (F.zero(), F.one()))
    assert matrix_in_group(dil, spec)
    # eps_plus = eps^2 in Q(sqrt5), so this is also in the det-1 group
    assert matrix_in_group(dil, spec1)
    F3 = make_field(3)  # eps = 2+sqrt(3) is totally positive, not a square
    one3 = FracIdeal.one(F3)
    N3 = ids(F3, 5)
    dil3 = ((F3.eps, F3.zero()), (F3.zero(), F3.one()))
    assert matrix_in_group(dil3, GroupSpec("gamma0", N3, one3))
    assert not matrix_in_group(dil3, GroupSpec("gamma0_1", N3, one3))


def test_divisor_ideals():
    F = make_field(5)
    divs = divisor_ideals(ids(F, 12))
    assert len(divs) == 6  # (12) = P2^2 * (3), (3) inert: 3 * 2 divisors
    norms = sorted(int(I.norm()) for I in divs)
    assert norms == [1, 4, 9, 16, 36, 144]
