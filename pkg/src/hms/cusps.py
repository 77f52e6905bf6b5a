"""Cusps of Hilbert modular surfaces for the standard level structures.

Enumeration proceeds by listing invariants (ideal class s, divisor M of the
level), taking a transversal of a unit/level subgroup inside the product of
two residue unit groups, and lifting each tuple to an actual point (a : c)
with the required gcd normalizations.  The translation structure at each
cusp is a group G(M, V) = [[V, M], [0, 1]]; its resolution is a cycle of
rational curves read off a periodic negative-regular continued fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct

from .abgroup import FiniteAbelianGroup
from .classgroups import class_data, phi_gt0, phi_sq
from .field import Elt, RealQuadraticField, hj_expand
from .ideals import (FracIdeal, ResidueRing, _hnf_express, approximate,
                     element_with_valuations, factor_ideal, residue_units)

VARIANTS = ("gamma0", "gamma1", "gamma0_1", "gamma1_1")


@dataclass(frozen=True)
class GroupSpec:
    """A congruence subgroup: variant, level ideal, component ideal."""
    variant: str
    level: FracIdeal
    component: FracIdeal

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not self.level.is_integral():
            raise ValueError("level must be an integral ideal")
        if not self.component.is_integral():
            raise ValueError("component representative must be integral")
        if (self.component + self.level) != FracIdeal.one(self.level.field):
            raise ValueError("component must be coprime to the level")

    @property
    def field(self) -> RealQuadraticField:
        return self.level.field

    @property
    def det_one(self) -> bool:
        return self.variant.endswith("_1")

    @property
    def upper_one(self) -> bool:  # Gamma_1-type: top-left entry = 1 mod level
        return self.variant.startswith("gamma1")


def divisor_ideals(N: FracIdeal) -> list[FracIdeal]:
    """All integral divisors of N, sorted by (norm, canonical key)."""
    fac = factor_ideal(N)
    divs = []
    for exps in iproduct(*[range(e + 1) for _, e in fac]):
        I = FracIdeal.one(N.field)
        for (P, _), k in zip(fac, exps):
            I = I * P ** k
        divs.append(I)
    return sorted(divs, key=lambda I: (I.norm(), I.key()))


# ---------------------------------------------------------------------------
# transversals of the unit/level subgroup H in (R/M)^x x (R/(N/M))^x

@lru_cache(maxsize=None)
def _transversal_data(M: FracIdeal, N: FracIdeal, variant: str):
    F = M.field
    NM = N * M.inverse()
    assert NM.is_integral()
    G1 = residue_units(M)
    G2 = residue_units(NM)
    elements = [(x, y) for x in G1.elements for y in G2.elements]
    op = lambda a, b: (G1.op(a[0], b[0]), G2.op(a[1], b[1]))
    identity = (G1.identity, G2.identity)
    Gp = FiniteAbelianGroup(elements, op, identity)

    u = (F.eps * F.eps) if variant.endswith("_1") else F.eps_plus
    hgens = [(G1.image(F.eps), G2.image(F.eps)),
             (G1.image(-F.one()), G2.image(-F.one())),
             (G1.image(u), G2.identity),
             (G1.identity, G2.image(u))]
    if variant in ("gamma0", "gamma0_1"):
        GN = residue_units(N)
        for r in (GN.gens or [GN.identity]):
            rl = GN.ring.lift(r)
            rinv = GN.ring.lift(GN.inverse(r))
            hgens.append((G1.image(rl), G2.image(rinv)))
    H = Gp.subgroup(hgens)
    T = Gp.coset_transversal(H, key=lambda x: Gp.dlog[x])
    return G1, G2, T


def transversal(M: FracIdeal, N: FracIdeal, variant: str):
    return _transversal_data(M, N, variant)[2]


def transversal_size(M: FracIdeal, N: FracIdeal, variant: str) -> int:
    return len(transversal(M, N, variant))


# ---------------------------------------------------------------------------
# cusp enumeration

@dataclass
class CuspRecord:
    a: Elt
    c: Elt
    s: FracIdeal          # a R + c b^-1
    M: FracIdeal          # N + c (b s)^-1
    gamma: tuple          # ((lam, mu), (-c, a)), det 1, gamma (a:c) = infinity


def _bezout_in_modules(a: Elt, I: FracIdeal, c: Elt, J: FracIdeal):
    """lam in I, mu in J with lam*a + mu*c = 1 (requires aI + cJ = R)."""
    F = a.field
    basis_elts = [a * g for g in I.basis()] + [c * g for g in J.basis()]
    den = 1
    for g in basis_elts:
        q = g.x.denominator * g.y.denominator // math.gcd(
            g.x.denominator, g.y.denominator)
        den = den * q // math.gcd(den, q)
    rows = [(int(g.x * den), int(g.y * den)) for g in basis_elts]
    coeffs = _hnf_express(rows, 0, 0, 0, (den, 0))
    i1, i2 = I.basis()
    j1, j2 = J.basis()
    lam = i1 * coeffs[0] + i2 * coeffs[1]
    mu = j1 * coeffs[2] + j2 * coeffs[3]
    assert I.contains(lam) and J.contains(mu)
    assert lam * a + mu * c == F.one()
    return lam, mu


def _prime_support(*ideals):
    """Distinct primes dividing any of the given integral ideals."""
    seen = {}
    for I in ideals:
        for P, _ in factor_ideal(I):
            seen[P.key()] = P
    return [seen[k] for k in sorted(seen)]


def _coprime_lift(rep, ring: ResidueRing, modulus: FracIdeal, avoid_primes):
    """Element congruent to rep modulo `modulus`, with valuation 0 at every
    prime of avoid_primes (all coprime to the modulus)."""
    F = ring.field
    lifted = ring.lift(rep)
    cons = [(P, 0, "exact") for P in avoid_primes]
    if modulus == FracIdeal.one(F):
        if not cons:
            return F.one()
        return approximate(F, cons)
    if not cons:
        return lifted if not lifted.is_zero() else F.one()
    return approximate(F, cons, congruence=(lifted, modulus))


def enumerate_cusps(spec: GroupSpec) -> list[CuspRecord]:
    F = spec.field
    N, b = spec.level, spec.component
    cd = class_data(F)
    records = []
    for s in cd.wide_reps(coprime_to=int(N.norm())):
        for M in divisor_ideals(N):
            NM = N * M.inverse()
            G1, G2, T = _transversal_data(M, N, spec.variant)
            s_primes = _prime_support(s)
            M_primes = _prime_support(M)
            # generator of s/sM: exact valuations at primes of s, zero at M
            g1 = element_with_valuations(
                s, [(P, s.valuation_at(P)) for P in s_primes]
                   + [(P, 0) for P in M_primes])
            # generator of sbM/sbN: exact valuations at all primes of sbN
            sbM = s * b * M
            g2 = element_with_valuations(
                sbM, [(P, sbM.valuation_at(P))
                      for P in _prime_support(s * b * N)])
            sbN_primes = _prime_support(s * b * N)
            for (t1, t2) in T:
                l1 = _coprime_lift(t1, G1.ring, M,
                                   [P for P in sbN_primes
                                    if M.valuation_at(P) == 0])
                l2 = _coprime_lift(t2, G2.ring, NM,
                                   [P for P in sbN_primes
                                    if NM.valuation_at(P) == 0])
                c = g2 * l2
                a0 = g1 * l1
                # correct a0 so that gcd(a, c b^-1) = s
                cb = FracIdeal.from_gens(F, [c]) * b.inverse()
                sM = s * M
                a0_ideal = (FracIdeal.from_gens(F, [a0])
                            if not a0.is_zero() else None)
                cons = [(P, sM.valuation_at(P)) for P in _prime_support(sM)]
                for P, _ in factor_ideal(cb):
                    if sM.valuation_at(P) > 0:
                        continue
                    divides_a0 = (a0_ideal is None
                                  or a0_ideal.valuation_at(P) > 0)
                    cons.append((P, 0 if divides_a0 else 1))
                x = element_with_valuations(sM, cons)
                a = a0 + x
                # verify the defining invariants exactly
                aR = FracIdeal.from_gens(F, [a])
                cI = FracIdeal.from_gens(F, [c])
                assert aR + cI * b.inverse() == s
                assert N + cI * (b * s).inverse() == M
                assert cI + s * b * N == s * b * M
                lam, mu = _bezout_in_modules(a, s.inverse(), c,
                                             (s * b).inverse())
                records.append(CuspRecord(a=a, c=c, s=s, M=M,
                                          gamma=((lam, mu), (-c, a))))
    return records


def cusp_count(F: RealQuadraticField, N: FracIdeal, variant: str) -> int:
    """Number of cusps summed over all components (closed form)."""
    cd = class_data(F)
    total = 0
    for M in divisor_ideals(N):
        if variant == "gamma0":
            total += phi_gt0(M + N * M.inverse())
        elif variant == "gamma0_1":
            total += phi_sq(M + N * M.inverse())
        else:
            total += transversal_size(M, N, variant)
    return cd.h_plus * cd.h * total


# ---------------------------------------------------------------------------
# cusp types G(M, V)

@dataclass
class CuspType:
    module: FracIdeal     # the translation module M
    v_gen: Elt            # totally positive unit generating V
    v_index: int          # index of V in <base>
    base: Elt             # ambient generator (eps_plus, or eps^2)


def unit_exponent(F: RealQuadraticField, u: Elt):
    """(sign, k) with u = sign * eps^k, or None if u is not a unit."""
    if not (u.is_integral() and abs(u.norm()) == 1):
        return None
    guess = 0
    ua = abs(u.approx(0))
    if ua > 0:
        guess = round(math.log(ua) / math.log(F.eps.approx(0)))
    for k in range(guess - 2, guess + 3):
        cand = F.eps ** k
        if u == cand:
            return (1, k)
        if u == -cand:
            return (-1, k)
    raise AssertionError("unit exponent not found near numeric estimate")


def in_unit_group(u: Elt, gen: Elt) -> bool:
    """Is the unit u a power of gen (gen != +-1)?"""
    F = u.field
    du = unit_exponent(F, u)
    dg = unit_exponent(F, gen)
    if du is None:
        return False
    if du == (1, 0):
        return True
    if du[1] % dg[1] != 0:
        return False
    return gen ** (du[1] // dg[1]) == u


def _min_power_with(base: Elt, pred) -> int:
    k = 1
    while not pred(base ** k):
        k += 1
        assert k <= 10 ** 4
    return k


def _type_data(cusp: CuspRecord, spec: GroupSpec):
    F = spec.field
    N, b = spec.level, spec.component
    s, M = cusp.s, cusp.M
    one = FracIdeal.one(F)
    eps_sq = F.eps * F.eps
    if spec.variant in ("gamma0", "gamma0_1"):
        module = s.inverse() ** 2 * b.inverse() * N * (N + M * M).inverse()
        W = M + N * M.inverse()
        base = F.eps_plus if spec.variant == "gamma0" else eps_sq
        if W == one:
            j = 1
        else:
            G = residue_units(W)
            j = G.element_order(G.image(base))
        return module, base, j
    if spec.variant == "gamma1_1":
        module = s.inverse() ** 2 * b.inverse() * (N * M.inverse())
        W = N * M * (N + M * M).inverse()
        base = eps_sq
        if W == one:
            j = 1
        else:
            # V = squares of units congruent to 1 modulo W
            G = residue_units(W)
            minus = G.image(-F.one())
            e = G.image(F.eps)
            j = 1
            acc = e
            while acc != G.identity and acc != minus:
                j += 1
                acc = G.op(acc, e)
        return module, base, j
    # gamma1, squarefree level only
    for P, e in factor_ideal(N):
        if e > 1:
            raise ValueError("gamma1 types require a squarefree level")
    module = s.inverse() ** 2 * b.inverse() * (N * M.inverse())
    base = F.eps_plus
    NM = N * M.inverse()
    if M == one:
        # the congruence against elements of U is vacuous modulo (1)
        return module, base, 1
    G1 = residue_units(M)
    if NM == one:
        S = set(G1.elements)  # U = all units
    else:
        # image modulo M of the units congruent to 1 modulo N/M
        G2 = residue_units(NM)
        o1 = G1.element_order(G1.image(F.eps))
        o2 = G2.element_order(G2.image(F.eps))
        L = math.lcm(o1, o2)
        images = set()
        for sg in (F.one(), -F.one()):
            for k in range(L):
                u = sg * F.eps ** k
                if G2.image(u) == G2.identity:
                    images.add(G1.image(u))
        S = G1.subgroup(images)
    j = _min_power_with(base, lambda v: G1.image(v) in S)
    return module, base, j


def _coset_reps(amb: FracIdeal, sub: FracIdeal):
    """Representatives of amb/sub for fractional ideals sub <= amb."""
    a1, a2 = amb.basis()
    det = a1.x * a2.y - a1.y * a2.x
    rows = []
    for g in sub.basis():
        u = (g.x * a2.y - g.y * a2.x) / det
        v = (a1.x * g.y - a1.y * g.x) / det
        assert u.denominator == 1 and v.denominator == 1
        rows.append((int(u), int(v)))
    from .ideals import _hnf_rows
    A, B, C = _hnf_rows(rows)
    return [a1 * i + a2 * j for i in range(A) for j in range(C)]


def _solve_in_modules(target: Elt, I: FracIdeal, J: FracIdeal):
    """x in I with target - x in J, or None."""
    rows_elts = list(I.basis()) + list(J.basis())
    den = 1
    for g in rows_elts + [target]:
        q = g.x.denominator * g.y.denominator // math.gcd(
            g.x.denominator, g.y.denominator)
        den = den * q // math.gcd(den, q)
    rows = [(int(g.x * den), int(g.y * den)) for g in rows_elts]
    try:
        coeffs = _hnf_express(rows, 0, 0, 0,
                              (int(target.x * den), int(target.y * den)))
    except AssertionError:
        return None
    i1, i2 = I.basis()
    return i1 * coeffs[0] + i2 * coeffs[1]


def cusp_type(cusp: CuspRecord, spec: GroupSpec) -> CuspType:
    """Translation type G(M, V) of the cusp.

    Side effect: the record's transition matrix is refined by an upper
    triangular factor [[1, x], [0, 1]] so that conjugation by it identifies
    the stabilizer with G(M, V) exactly (not just up to an affine shift).
    """
    F = spec.field
    module, base, j = _type_data(cusp, spec)
    v_gen = base ** j
    ctype = CuspType(module=module, v_gen=v_gen, v_index=j, base=base)
    # the m-values admissible for v_gen form a single coset of the module
    # inside the ambient translation module s^-2 b^-1
    amb = cusp.s.inverse() ** 2 * spec.component.inverse()
    m_good = None
    for rep in _coset_reps(amb, module):
        if matrix_in_group(conjugated_translation(cusp, v_gen, rep), spec):
            m_good = rep
            break
    assert m_good is not None, "no admissible translation for the V generator"
    # find x with x*(v_gen - 1) = m_good modulo the module; denominators
    # supported at the level are allowed (the oracle remains the arbiter)
    shift = v_gen - F.one()
    two = FracIdeal.from_gens(F, [F.elt(2)])
    x = None
    for slack in (FracIdeal.one(F), cusp.M, spec.level,
                  spec.level * cusp.M, spec.level * cusp.M * two):
        x = _solve_in_modules(m_good, _scale(amb * slack.inverse(), shift),
                              module)
        if x is not None:
            break
    assert x is not None, "no affine correction found"
    x = x / shift
    (lam, mu), (negc, a) = cusp.gamma
    lam2, mu2 = lam + x * negc, mu + x * a
    assert lam2 * a - mu2 * negc == F.one()  # det stays 1
    cusp.gamma = ((lam2, mu2), (negc, a))
    return ctype


def _scale(I: FracIdeal, e: Elt) -> FracIdeal:
    return I * FracIdeal.from_gens(e.field, [e])


def v_contains(ctype: CuspType, u: Elt) -> bool:
    """Membership of a unit u in V = <v_gen>."""
    return in_unit_group(u, ctype.v_gen)


# ---------------------------------------------------------------------------
# group membership (up to scalars) and the stabilizer oracle

def _sqrt_fraction(q: Fraction):
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def exact_sqrt(e: Elt):
    """Square root of e in F, or None."""
    F = e.field
    a, bb = e.ab()
    if bb == 0:
        r = _sqrt_fraction(a)
        if r is not None:
            return F.from_ab(r, 0)
        r = _sqrt_fraction(a / F.D)
        if r is not None:
            return F.from_ab(0, r)
        return None
    s = _sqrt_fraction(e.norm())
    if s is None:
        return None
    for sg in (1, -1):
        t = (a + sg * s) / 2
        x = _sqrt_fraction(t)
        if x is not None and x != 0:
            y = bb / (2 * x)
            cand = F.from_ab(x, y)
            if cand * cand == e:
                return cand
    return None


def _is_unit(e: Elt) -> bool:
    return e.is_integral() and abs(e.norm()) == 1


def matrix_in_group(mat, spec: GroupSpec) -> bool:
    """Membership of a GL2+(F) matrix in the congruence subgroup, as a
    transformation (i.e. up to F^x scalars)."""
    (p, q), (r, t) = mat
    F = spec.field
    N, b = spec.level, spec.component
    det = p * t - q * r
    if not (_is_unit(det) and det.is_totally_positive()):
        return False  # any scalar z changes det by the square unit z^2
    if not (p.is_integral() and t.is_integral()):
        return False
    if not b.inverse().contains(q):
        return False
    if not (N * b).contains(r):
        return False
    if spec.det_one:
        w = exact_sqrt(det)
        if w is None:
            return False
        scalars = (w.inverse(), -w.inverse())
    else:
        scalars = None  # unit scalars leave all conditions unchanged
    if not spec.upper_one:
        return True
    # top-left entry must become 1 modulo N for some allowed scalar
    ring = ResidueRing(N)
    one_r = ring.reduce(F.one())
    if spec.det_one:
        return any(ring.reduce(z * p) == one_r for z in scalars)
    G = residue_units(N)
    target = G.inverse(G.image(p)) if ring.reduce(p) in G.dlog else None
    if target is None:
        return False
    units_im = G.subgroup([G.image(-F.one()), G.image(F.eps)])
    return target in units_im


def _gamma_matrices(cusp: CuspRecord):
    (lam, mu), (negc, a) = cusp.gamma
    gamma = ((lam, mu), (negc, a))
    gamma_inv = ((a, -mu), (-negc, lam))  # det(gamma) = 1
    return gamma, gamma_inv


def _mat_mul(X, Y):
    (a, b), (c, d) = X
    (e, f), (g, h) = Y
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def conjugated_translation(cusp: CuspRecord, v: Elt, m: Elt):
    """gamma^-1 [[v, m], [0, 1]] gamma."""
    gamma, gamma_inv = _gamma_matrices(cusp)
    F = v.field
    upper = ((v, m), (F.zero(), F.one()))
    return _mat_mul(_mat_mul(gamma_inv, upper), gamma)


def stabilizer_oracle(cusp: CuspRecord, spec: GroupSpec, ctype: CuspType,
                      rng, trials: int = 20) -> bool:
    """Two-sided check of the computed type G(M, V).

    Direction 1: for random (v, m) in V x M the conjugated translation lies
    in the group.  Direction 2: for random (v, m) in the ambient stabilizer
    of the cusp inside Gamma(1)_b, membership holds iff (v, m) in V x M.
    """
    F = spec.field
    m1, m2 = ctype.module.basis()
    for _ in range(trials):
        v = ctype.v_gen ** rng.randint(-2, 2)
        m = m1 * rng.randint(-4, 4) + m2 * rng.randint(-4, 4)
        if not matrix_in_group(conjugated_translation(cusp, v, m), spec):
            return False
    amb = cusp.s.inverse() ** 2 * spec.component.inverse()
    a1, a2 = amb.basis()
    for _ in range(trials):
        k = rng.randint(-3, 3)
        v = F.eps_plus ** k
        m = a1 * rng.randint(-4, 4) + a2 * rng.randint(-4, 4)
        inside = v_contains(ctype, v) and ctype.module.contains(m)
        got = matrix_in_group(conjugated_translation(cusp, v, m), spec)
        if got != inside:
            return False
    return True


# ---------------------------------------------------------------------------
# cusp resolution

@dataclass
class ResolutionCycle:
    selfints: list
    period: int
    repetition: int
    special: bool


def _oriented_basis(M: FracIdeal):
    x, y = M.basis()
    cross = x * y.conj() - x.conj() * y
    if (cross / M.field.sqrtD()).sign_at(0) < 0:
        x, y = y, x
    return x, y


def _reduce_basis(x: Elt, y: Elt):
    """Basis change (det +1) until w = x/y satisfies w > 1 > w' > 0, making
    the minus continued fraction of w purely periodic."""
    for _ in range(10 ** 5):
        w = x / y
        if (w.compare_at(1, 0) > 0 and w.sign_at(1) > 0
                and w.compare_at(1, 1) < 0):
            return x, y
        bq = w.floor_at(0) + 1
        x, y = y, y * bq - x
    raise RuntimeError("basis reduction did not terminate")


def resolve_cusp(ctype: CuspType) -> ResolutionCycle:
    F = ctype.module.field
    x, y = _oriented_basis(ctype.module)
    x, y = _reduce_basis(x, y)
    w0 = x / y
    exp = hj_expand(w0)
    assert exp.flavor == "periodic" and exp.preperiod == ()
    digits = list(exp.period)
    d = len(digits)
    # w_{j+1} = 1/(b_j - w_j); the cycle product w_1 ... w_d is the
    # automorphy factor of the module
    w = w0
    prod = F.one()
    for bj in digits:
        w = (F.elt(bj) - w).inverse()
        prod = prod * w
    assert w == w0
    assert _is_unit(prod) and prod.is_totally_positive()
    k = 1
    acc = prod
    while not v_contains(ctype, acc):
        k += 1
        acc = acc * prod
        assert k <= 10 ** 4
    if d * k == 1:
        return ResolutionCycle(selfints=[-digits[0] + 2], period=1,
                               repetition=1, special=True)
    return ResolutionCycle(selfints=[-bj for bj in digits] * k, period=d,
                           repetition=k, special=False)
