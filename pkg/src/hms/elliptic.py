"""Elliptic fixed points of Hilbert modular groups over real quadratic fields.

Counts elliptic points of each order q for the groups Gamma0(N)_b and their
determinant-one variants, splits the counts into rotation types, and resolves
the resulting cyclic quotient singularities into chains of rational curves
with exact local Chern numbers.

The order-q counts are class-number weighted sums over the orders of a CM
quartic extension K/F that contain a unit of order q modulo scalars; the
adelic factor is a product of local embedding numbers for Eichler orders.
The local numbers come from a closed-form case analysis (vertex profiles on
the Bruhat-Tits tree) and are cross-checked against an enumerative count of
optimal embeddings into matrices over R/P^m up to unit conjugation.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .classgroups import class_data
from .cm import CMOrderData, cm_extension, cm_order_data, divisor_ideals_of, \
    short_vectors
from .field import Elt, RealQuadraticField, hj_expand_rational
from .ideals import FracIdeal, PrimeIdeal, ResidueRing, crt, factor_ideal, \
    element_with_valuations, primes_above


# ---------------------------------------------------------------------------
# torsion order enumeration

@dataclass(eq=False)
class TorsionOrderSpec:
    """An R-order R[g] generated by a torsion unit of order q mod scalars.

    g is a root of x^2 - t x + u with t^2 - 4u totally negative; u runs over
    representatives of the totally positive units modulo squares.
    """
    q: int
    u: Elt
    t: Elt
    det_one: bool
    base: CMOrderData          # data of R[g] itself (conductor, h, Q, w)

    @property
    def ext(self):
        return self.base.ext

    def __repr__(self):
        return f"TorsionOrderSpec(q={self.q}, u={self.u}, t={self.t})"


def trace_candidates(F: RealQuadraticField, u: Elt) -> list[Elt]:
    """All integral t (up to sign; one of each pair +-t, plus 0) with
    t^2 - 4u totally negative.

    Any such t satisfies t_v^2 < 4 u_v at both places, so the positive
    definite rational form Q(t) = Tr(t^2 conj(u))/Nm(u) is < 8; the exact
    lattice-point enumeration below is therefore complete.  (Equivalently:
    the coordinates of t are bounded by 2 max_v sqrt(u_v) + 1.)
    """
    un = u.norm()
    uc = u.conj()
    w = F.omega()
    gram = [
        [uc.trace() / un, (w * uc).trace() / un],
        [(w * uc).trace() / un, (w * w * uc).trace() / un],
    ]
    cands = [F.zero()]
    for (a, b) in short_vectors(gram, Fraction(8)):
        cands.append(F.elt(a) + w * b)
    out = []
    for t in cands:
        delta = t * t - 4 * u
        if delta.sign_at(0) < 0 and delta.sign_at(1) < 0:
            out.append(t)
    return out


def _is_unit_in_R(a: Elt) -> bool:
    return a.is_integral() and abs(a.norm()) == 1


def _unit_quotient_order(ext, z, limit: int = 12):
    """Order of z modulo R^x in K^x, or None if it exceeds limit."""
    p = z
    for k in range(1, limit + 1):
        a, b = p
        if b.is_zero() and _is_unit_in_R(a):
            return k
        p = ext.mul(p, z)
    return None


_ORDER_CACHE: dict = {}


def _order_data_cached(F, u, t, divisor, budget=None) -> CMOrderData:
    dkey = None if divisor is None else divisor.key()
    key = (F.D, u.ab(), t.ab(), dkey)
    if key not in _ORDER_CACHE:
        _ORDER_CACHE[key] = cm_order_data(F, u, t, divisor=divisor,
                                          budget=budget)
    return _ORDER_CACHE[key]


_TORSION_CACHE: dict[int, list] = {}


def torsion_orders(F: RealQuadraticField) -> list[TorsionOrderSpec]:
    """All R-orders (up to isomorphism) generated by a unit of order q mod
    scalars, for both determinant classes in R^x_{>0}/R^x2.

    In the determinant-one class q <= 6: a root of x^2 - t x + 1 with
    totally negative discriminant has absolute value 1 at both complex
    places, hence is a root of unity, and #mu_K <= 12.  In the other
    class q can reach 12 (e.g. sqrt(eps) zeta_12 over Q(sqrt 3)), so the
    search runs up to the torsion bound 12 there."""
    if F.D in _TORSION_CACHE:
        return _TORSION_CACHE[F.D]
    classes = list(F.totally_positive_unit_square_classes())
    classes.sort(key=lambda u: u != F.one())   # determinant-one class first
    specs = []
    seen = set()
    for u in classes:
        det_one = u == F.one()
        for t in trace_candidates(F, u):
            ext, z = cm_extension(F, u, t)
            q = _unit_quotient_order(ext, z)
            if q is None or q < 2 or (det_one and q > 6):
                continue
            if not det_one and q % 2:
                continue
            base = _order_data_cached(F, u, t, None)
            key = (q, id(base.ext), base.conductor.key())
            if key in seen:
                continue
            seen.add(key)
            specs.append(TorsionOrderSpec(q=q, u=u, t=t, det_one=det_one,
                                          base=base))
    specs.sort(key=lambda s: (s.q, not s.det_one, s.u.ab(), s.t.ab()))
    _TORSION_CACHE[F.D] = specs
    return specs


# ---------------------------------------------------------------------------
# local embedding numbers: closed forms
#
# Setting: P a prime of R, E the Eichler order of level P^nu in M_2(F_P),
# S the local quadratic order of conductor P^f in K_P.  Optimal embeddings
# of S into E up to E^x-conjugacy correspond to configurations of the two
# "fixed" points of K_P^x on the Bruhat-Tits tree relative to the path of
# length nu stabilised by E.  Writing q = Nm(P), the counts below enumerate
# the possible depth profiles: the deeper endpoint sits at depth f, the
# shallower at depth c <= f, and profiles with c < f occur in two mirror
# roles.  The closed forms are validated against the enumerative oracle
# local_embedding_count_enumerative on a grid in the test suite.

def _split_local_count(q: int, f: int, nu: int) -> int:
    if nu == 0:
        return 1
    if f == 0:
        return 2
    total = 0
    # shallower endpoint on the fixed path (c = 0)
    if nu > f:
        total += 4
    elif nu == f:
        total += 2
    for c in range(1, f + 1):
        role = 2 if c < f else 1
        # both endpoints hang off the path at distinct feet (gap delta >= 1)
        delta = nu - f - c
        if delta >= 1:
            total += role * 2 * (q - 1) * q ** (c - 1)
        # same foot, branches sharing a prefix of length s (nu = f + c - 2s)
        two_s = f + c - nu
        if two_s >= 0 and two_s % 2 == 0:
            s = two_s // 2
            if s <= c:
                if s == c:
                    cnt = 1
                elif s == 0:
                    cnt = (q - 2) * q ** (c - 1)
                else:
                    cnt = (q - 1) * q ** (c - s - 1)
                total += role * cnt
    return total


def _inert_local_count(q: int, f: int, nu: int) -> int:
    if nu == 0:
        return 1
    total = 0
    for c in range(0, f + 1):
        role = 2 if c < f else 1
        two_j = f + c - nu
        if two_j < 0 or two_j % 2:
            continue
        j = two_j // 2
        if j > c or (j == c and c == f):
            continue
        if j == 0:
            cnt = 1 if c == 0 else q ** c
        elif j == c:
            cnt = 1
        else:
            cnt = (q - 1) * q ** (c - j - 1)
        total += role * cnt
    return total


def _ramified_local_count(q: int, f: int, nu: int) -> int:
    if nu == 0:
        return 1
    total = 0
    for c in range(0, f + 1):
        role = 2 if c < f else 1
        # endpoints on the same side of the ramification midpoint
        two_s = f + c - nu
        if two_s >= 0 and two_s % 2 == 0:
            s = two_s // 2
            if s <= c:
                if s == c:
                    cnt = 1
                elif s == 0:
                    cnt = (q - 1) * q ** (c - 1)
                else:
                    cnt = (q - 1) * q ** (c - s - 1)
                total += role * cnt
        # opposite sides
        if nu == f + c + 1:
            total += role * q ** c
    return total


_LOCAL_CACHE: dict = {}


def local_embedding_number(order: CMOrderData, P: PrimeIdeal, e: int) -> int:
    """Number of optimal embeddings of the completion of the order at P into
    an Eichler order of level P^e, up to local unit conjugation."""
    assert e >= 0
    if e == 0:
        return 1
    ext = order.ext
    key = (id(ext), P.key(), order.divisor.valuation_at(P), e)
    if key in _LOCAL_CACHE:
        return _LOCAL_CACHE[key]
    f = order.divisor.valuation_at(P)
    vdr = ext.rel_disc.valuation_at(P)
    q = int(P.norm())
    if vdr == 0:
        sym = ext.symbol(P)
        assert sym in (1, -1)
        m = _split_local_count(q, f, e) if sym == 1 \
            else _inert_local_count(q, f, e)
    elif vdr == 1:
        m = _ramified_local_count(q, f, e)
    else:
        # wildly ramified completion: no closed form derived; fall back to
        # the enumerative ground truth
        m = local_embedding_count_enumerative(ext, P, e, f)
    _LOCAL_CACHE[key] = m
    return m


# ---------------------------------------------------------------------------
# local embedding numbers: enumerative oracle

def uniformizer(F: RealQuadraticField, P: PrimeIdeal) -> Elt:
    """Element of valuation 1 at P and 0 at the other primes above p,
    with small coordinates (built from the two-element presentation)."""
    n, g = P.two_elt()
    others = [Q for Q in primes_above(F, P.p) if Q != P]
    p = F.elt(n)
    for cand in (g, g + p, g + p * F.omega(), g - p):
        I = FracIdeal.from_gens(F, [cand])
        if I.valuation_at(P) == 1 and \
                all(I.valuation_at(Q) == 0 for Q in others):
            return cand
    return element_with_valuations(P, [(P, 1)] + [(Q, 0) for Q in others])


def _local_order_generator(ext, P: PrimeIdeal, f: int):
    """(t, u) of a generator of the local order of conductor P^f in K_P."""
    z, _ = ext.good_generator(P)
    t0, u0 = ext.rel_trace(z), ext.rel_norm(z)
    if f == 0:
        return t0, u0
    pif = uniformizer(ext.F, P) ** f
    return pif * t0, pif * pif * u0


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[rx] = ry


def local_embedding_count_enumerative(ext, P: PrimeIdeal, nu: int, f: int,
                                      slack: int = 0) -> int:
    """Optimal embedding number of the conductor-P^f order into the
    level-P^nu Eichler order, by direct orbit enumeration.

    Embeddings of the conductor-f order are partitioned, according to the
    exact conductor f' <= f of their image's saturation, into restrictions
    of optimal embeddings of the conductor-f' orders, and restriction is a
    bijection on conjugacy orbits.  Hence the optimal count at conductor f
    is N(f) - N(f-1) where N(g) is the total number of conjugacy orbits of
    embeddings of the conductor-g order.
    """
    if nu == 0:
        return 1
    F = ext.F
    t, u = _local_order_generator(ext, P, f)
    total = _embedding_orbit_count(F, P, nu, t, u, f, slack)
    if f == 0:
        return total
    t1, u1 = _local_order_generator(ext, P, f - 1)
    below = _embedding_orbit_count(F, P, nu, t1, u1, f - 1, slack)
    assert total >= below
    return total - below


def _embedding_orbit_count(F: RealQuadraticField, P: PrimeIdeal,
                           nu: int, t: Elt, u: Elt, f: int,
                           slack: int = 0) -> int:
    """Number of conjugacy orbits, under units of the level-P^nu Eichler
    order, of 2x2 matrices with trace t, determinant u and lower-left
    entry in P^nu, where x^2 - t x + u generates a local order of
    conductor P^f.

    A matrix is normalised by diagonal conjugation to
    [[a, pi^j], [-f(a)/pi^j, t-a]] with v(f(a)) >= nu + j; the state
    (a, j) is keyed by a modulo P^(nu+j+1+slack), which identifies
    exactly one conjugacy class (a deep lower elementary move matches a
    exactly, after which b, c and the trace force the rest), and the
    state graph is closed under conjugation by the elementary unit
    generators.
    """
    m = nu + 2 * f + 2
    depth_max = nu + m + 2 + slack
    pi = uniformizer(F, P)
    pi_pow = [F.one()]
    for _ in range(depth_max + 1):
        pi_pow.append(pi_pow[-1] * pi)
    P_pow = [FracIdeal.one(F)]
    for _ in range(depth_max + 1):
        P_pow.append(P_pow[-1] * P)
    rings = {k: ResidueRing(P_pow[k]) for k in range(1, depth_max + 1)}

    # v_P(p): 1 for split/inert, 2 for ramified
    eP = 2 if P.kind == "ramified" else 1
    p = P.p

    def vcap(e: Elt, cap: int) -> int:
        """min(v_P(e), cap).  Ideal membership only reads off v_P for
        globally integral elements, so clear the p-part of the
        denominators first and shift."""
        if e.is_zero():
            return cap
        x, y = e.ab()
        den = math.lcm(x.denominator, y.denominator)
        k = 0
        while den % p == 0:
            den //= p
            k += 1
        vden = k * eP
        # den is now coprime to p, so it does not shift v_P
        e2 = e * (den * p ** k)
        lim = cap + vden
        while len(P_pow) <= lim:
            P_pow.append(P_pow[-1] * P)
        v = 0
        while v < lim and P_pow[v + 1].contains(e2):
            v += 1
        return min(v - vden, cap)

    def fpoly(a: Elt) -> Elt:
        return a * a - t * a + u

    digits = [rings[1].lift(r) for r in rings[1].elements()]
    gens = [F.one(), -F.one(), F.omega(), -F.omega()]

    def a_candidates(target: int, kappa: int) -> list[Elt]:
        """Lifts, one per class mod P^kappa, of the a with v(f(a)) >= target.

        The refinement runs to depth max(kappa, target) so every returned
        lift genuinely achieves the target valuation (beyond the key depth
        the continuation is a Hensel lift towards a root and exists only
        when the class contains a valid element)."""
        depth = max(kappa, target)
        cur = [F.zero()]
        for k in range(depth):
            nxt = []
            need = min(target, k + 1)
            ring = rings[k + 1]
            for a in cur:
                for d in digits:
                    # canonical representative mod P^(k+1) keeps the
                    # coordinates small; the conditions only depend on
                    # the class at this depth
                    a2 = ring.lift(ring.reduce(a + d * pi_pow[k]))
                    if vcap(fpoly(a2), need) >= need:
                        nxt.append(a2)
            cur = nxt
        return cur

    def kmod(j: int) -> int:
        return nu + j + 1 + slack

    def state_key(a: Elt, j: int):
        return (j, rings[kmod(j)].reduce(a))

    states = {}   # key -> exact-valuation lift
    for j in range(m + 1):
        for a in a_candidates(nu + j, kmod(j)):
            key = state_key(a, j)
            if key not in states:
                states[key] = (a, j)

    uf = _UnionFind()
    for key in states:
        uf.add(key)

    reducers = gens + [F.one() + F.omega(), -F.one() - F.omega(),
                       F.one() - F.omega(), F.omega() - F.one()]

    def to_state(a: Elt, b: Elt, c: Elt):
        """Normalise the matrix [[a, b], [c, t-a]] to a window state,
        applying further upper conjugations while v(b) > m."""
        while True:
            j = vcap(b, m + 1)
            if j <= m:
                return (j, rings[kmod(j)].reduce(a))
            moves = []
            for s in reducers:
                b2 = b + s * (2 * a - t) - s * s * c
                moves.append((vcap(b2, m + 1), s, b2))
            v2, s, b2 = min(moves, key=lambda mv: mv[0])
            assert v2 <= m, "no conjugation reduces v(b) into the window"
            a, b = a - s * c, b2

    for key, (a, j) in list(states.items()):
        c = -fpoly(a) / pi_pow[j]
        for s in gens:
            # upper elementary conjugation: a -> a - s c, b -> b + s(2a-t) - s^2 c
            a2 = a - s * c
            b2 = pi_pow[j] + s * (2 * a - t) - s * s * c
            k2 = to_state(a2, b2, c)
            assert k2 in states, "conjugate left the enumerated state space"
            uf.union(key, k2)
        for s in gens:
            # lower elementary conjugation: a -> a + s pi^(nu+j)
            k2 = state_key(a + s * pi_pow[nu + j], j)
            assert k2 in states, "conjugate left the enumerated state space"
            uf.union(key, k2)

    return len({uf.find(key) for key in states})


# ---------------------------------------------------------------------------
# global counts

@dataclass(eq=False)
class _Contribution:
    q: int
    tor: TorsionOrderSpec
    order: CMOrderData
    weight: Fraction


def _contributions(spec, budget=None) -> list[_Contribution]:
    """Weighted order contributions to the elliptic point counts of spec.

    For Gamma0 (variant "gamma0") each isomorphism class of orders S with
    #(S^x/R^x) = q contributes (2/h+) h(S) m(S); for the determinant-one
    variant each S containing a 2q-th root of unity with #mu_S = 2q
    contributes (2/h) (h(S)/Q(S)) m(S).  m(S) is the product of the local
    embedding numbers at the primes dividing the level.
    """
    assert spec.variant in ("gamma0", "gamma0_1"), \
        "elliptic counts are implemented for gamma0 and gamma0_1 only"
    F = spec.field
    cd = class_data(F)
    fac = factor_ideal(spec.level)
    det_one = spec.det_one
    seen = set()
    out = []
    for tor in torsion_orders(F):
        q = tor.q
        if det_one:
            if not tor.det_one:
                continue
        elif tor.base.w != q:
            continue
        for g in divisor_ideals_of(tor.base.conductor):
            od = _order_data_cached(F, tor.u, tor.t, g, budget)
            if det_one:
                assert (2 * od.w) % od.Q == 0
                if 2 * od.w // od.Q != 2 * q:   # #mu_S != 2q
                    continue
                weight = Fraction(2 * od.h, od.Q * cd.h)
            else:
                if od.w != q:
                    continue
                weight = Fraction(2 * od.h, cd.h_plus)
            okey = (q, id(od.ext), g.key())
            if okey in seen:
                continue
            seen.add(okey)
            mhat = 1
            for P, e in fac:
                mhat *= local_embedding_number(od, P, e)
                if mhat == 0:
                    break
            if mhat == 0:
                continue
            out.append(_Contribution(q, tor, od, weight * mhat))
    return out


def elliptic_counts(spec, budget=None) -> list[tuple[int, int]]:
    """[(q, m_q)] for the surface of spec; includes q with m_q = 0 whenever
    the field admits order-q torsion at all.  Independent of the component."""
    totals = defaultdict(Fraction)
    for tor in torsion_orders(spec.field):
        if spec.det_one and not tor.det_one:
            continue
        totals[tor.q] += 0
    for con in _contributions(spec, budget):
        totals[con.q] += con.weight
    out = []
    for q in sorted(totals):
        val = totals[q]
        assert val.denominator == 1 and val >= 0, \
            f"non-integral elliptic count m_{q} = {val}"
        out.append((q, int(val)))
    return out


# ---------------------------------------------------------------------------
# rotation types

@dataclass(frozen=True, order=True)
class RotationType:
    q: int
    a: int
    b: int

    def __post_init__(self):
        assert self.a == 1 and 1 <= self.b < self.q
        assert math.gcd(self.b, self.q) == 1

    def flipped(self) -> "RotationType":
        return RotationType(self.q, 1, self.q - self.b)

    def conjugate(self) -> "RotationType":
        return normalize_rotation(self.q, -1, -self.b)


def normalize_rotation(q: int, a: int, b: int) -> RotationType:
    """Canonical representative of (q; a, b) under simultaneous scaling and
    negation of the exponents."""
    a %= q
    b %= q
    assert math.gcd(a, q) == 1 and math.gcd(b, q) == 1
    lam = pow(a, -1, q)
    return RotationType(q, 1, (lam * b) % q)


_COS_CACHE: dict = {}


def _cos_elements(F: RealQuadraticField, q: int) -> list[Elt]:
    """[2cos(2 pi k / q) as elements of F for k = 0..q-1], place 0 values."""
    if (F.D, q) in _COS_CACHE:
        return _COS_CACHE[(F.D, q)]
    from .cusps import exact_sqrt
    if q == 2:
        c1 = F.elt(-2)
    elif q == 3:
        c1 = F.elt(-1)
    elif q == 4:
        c1 = F.zero()
    elif q == 6:
        c1 = F.one()
    elif q in (5, 8, 10, 12):
        # 2cos(2 pi / q) = (sqrt5 - 1)/2, sqrt2, (sqrt5 + 1)/2, sqrt3
        n = {5: 5, 8: 2, 10: 5, 12: 3}[q]
        r = exact_sqrt(F.elt(n))
        assert r is not None, f"order-{q} rotation needs sqrt({n}) in F"
        if r.sign_at(0) < 0:
            r = -r
        c1 = {5: (r - 1) / 2, 8: r, 10: (r + 1) / 2, 12: r}[q]
    else:
        raise ValueError(f"unsupported rotation order {q}")
    vals = [F.elt(2), c1]
    for _ in range(2, q):
        vals.append(c1 * vals[-1] - vals[-2])
    _COS_CACHE[(F.D, q)] = vals
    return vals


def _reference_root(tor: TorsionOrderSpec, N: FracIdeal) -> Elt:
    """Smallest x in R with x^2 - t x + u = 0 mod N (exists whenever the
    order embeds into the level-N Eichler order)."""
    F, t, u = N.field, tor.t, tor.u
    if N == FracIdeal.one(F):
        return F.zero()
    parts = []
    for P, e in factor_ideal(N):
        rr = ResidueRing(P ** e)
        zero = rr.reduce(F.zero())
        root = None
        for r in sorted(rr.elements()):
            a = rr.lift(r)
            if rr.reduce(a * a - t * a + u) == zero:
                root = a
                break
        if root is None:
            raise RuntimeError("no root of the torsion polynomial mod P^e")
        parts.append((root, P ** e))
    return crt(F, parts)


def reference_rotation_type(tor: TorsionOrderSpec, N: FracIdeal) -> RotationType:
    """Rotation type of the embedding x |-> [[x, 1], [-f(x), t - x]] at a
    canonical root x of f(x) = x^2 - t x + u modulo N."""
    q, t, u = tor.q, tor.t, tor.u
    if t.is_zero():
        assert q == 2
        return RotationType(2, 1, 1)
    F = N.field
    x = _reference_root(tor, N)
    c = -(x * x - t * x + u)
    assert not c.is_zero()
    vals = _cos_elements(F, q)
    e = t * t / u - 2
    half = [k for k in range(1, q // 2 + 1) if 2 * k != q]
    k0 = next(k for k in half if vals[k] == e)
    ec = e.conj()
    k1 = next(k for k in half if vals[k] == ec)
    kappa = []
    for place, k in ((0, k0), (1, k1)):
        s = -t.sign_at(place) * c.sign_at(place)
        kappa.append(k if s > 0 else q - k)
    return normalize_rotation(q, kappa[0], kappa[1])


def _symbol_character(ext, I: FracIdeal) -> int:
    val = 1
    for P, e in factor_ideal(I):
        s = ext.symbol(P)
        assert s in (1, -1), "character undefined at a ramified prime"
        val *= s ** e
    return val


def rotation_distribution(spec, budget=None) -> list[tuple[RotationType, Fraction]]:
    """[(type, count)] splitting each order-q count into rotation types.

    If K/F is unramified at all finite places and every prime with odd
    level valuation splits in K, each order of conductor g contributes
    entirely to the type selected by the quadratic character of K at g*b
    relative to the reference embedding.  Otherwise the two candidate types
    receive equal shares.  Totals are checked against elliptic_counts.
    """
    F = spec.field
    N = spec.level
    fac = factor_ideal(N)
    totals: dict[RotationType, Fraction] = defaultdict(Fraction)
    ref_cache: dict[int, RotationType] = {}
    for con in _contributions(spec, budget):
        tor = con.tor
        if id(tor) not in ref_cache:
            ref_cache[id(tor)] = reference_rotation_type(tor, N)
        T = ref_cache[id(tor)]
        Tf = T.flipped() if T.b != (tor.q - T.b) % tor.q else T
        ext = con.order.ext
        oriented = ext.rel_disc == FracIdeal.one(F) and \
            all(ext.symbol(P) == 1 for P, e in fac if e % 2)
        if T == Tf:
            totals[T] += con.weight
        elif oriented:
            sig = _symbol_character(ext, con.order.divisor) * \
                _symbol_character(ext, spec.component)
            sig_ref = _symbol_character(ext, tor.base.conductor)
            totals[T if sig == sig_ref else Tf] += con.weight
        else:
            totals[T] += con.weight / 2
            totals[Tf] += con.weight / 2
    per_q = defaultdict(Fraction)
    out = []
    for T in sorted(totals):
        val = totals[T]
        assert val.denominator == 1 and val >= 0, \
            f"non-integral rotation type count {T}: {val}"
        per_q[T.q] += val
        if val:
            out.append((T, int(val)))
    counts = dict(elliptic_counts(spec, budget))
    for q, mq in counts.items():
        assert per_q.get(q, 0) == mq, \
            f"rotation type counts for q={q} do not sum to m_q"
    return out


# ---------------------------------------------------------------------------
# resolution of the quotient singularities

@dataclass(frozen=True)
class EllipticResolution:
    rtype: RotationType
    chain: tuple[int, ...]     # self-intersections, all <= -2
    length: int
    chern: Fraction            # self-intersection of the local Chern cycle


def resolve_elliptic(rt: RotationType) -> EllipticResolution:
    """Resolve the cyclic quotient singularity of type (q; 1, b): the
    exceptional chain is read off the negative continued fraction of q/b and
    the local Chern cycle sum (x_i + y_i - 1) C_i from the recurrence
    P_{i+1} = b_i P_i - P_{i-1}, P_0 = (1, 0), P_1 = (b/q, 1/q)."""
    q, b = rt.q, rt.b
    digits = hj_expand_rational(Fraction(q, b)).digits
    assert all(d >= 2 for d in digits)
    P = [(Fraction(1), Fraction(0)), (Fraction(b, q), Fraction(1, q))]
    for d in digits:
        x = d * P[-1][0] - P[-2][0]
        y = d * P[-1][1] - P[-2][1]
        P.append((x, y))
    assert P[-1] == (Fraction(0), Fraction(1))
    coeff = [x + y - 1 for (x, y) in P[1:-1]]
    chern = Fraction(0)
    for i, a in enumerate(coeff):
        chern += a * a * (-digits[i])
        if i + 1 < len(coeff):
            chern += 2 * a * coeff[i + 1]
    return EllipticResolution(rtype=rt, chain=tuple(-d for d in digits),
                              length=len(digits), chern=chern)


def elliptic_record(rt: RotationType, count: int) -> dict:
    """JSON-ready record for one rotation type on a surface."""
    res = resolve_elliptic(rt)
    return {
        "q": rt.q,
        "type": [rt.q, rt.a, rt.b],
        "count": count,
        "chain": list(res.chain),
        "chern": f"{res.chern.numerator}/{res.chern.denominator}",
    }
