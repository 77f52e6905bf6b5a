"""Fractional ideals of the ring of integers R of a real quadratic field.

An ideal is stored as a rank-2 lattice in upper-triangular Hermite form
against the integral basis (1, omega): generators (A/den) and
(B + C*omega)/den with integers A, C > 0, 0 <= B < A, gcd(den, A, B, C)
normalized.  Two-element generators are recovered on demand for
serialization.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from sympy import factorint, sqrt_mod

from .abgroup import FiniteAbelianGroup
from .field import Elt, RealQuadraticField


# ---------------------------------------------------------------------------
# integer lattice utilities (2-column rows, with transform tracking)

def _hnf_rows(rows):
    """HNF [(A,0),(B,C)] of the lattice spanned by integer rows (x, y).

    Returns (A, B, C) with A, C > 0, 0 <= B < A.  Raises if rank < 2.
    """
    rows = [list(r) for r in rows if r != (0, 0) and r != [0, 0]]
    # step 1: gcd on the y column
    while True:
        nz = [r for r in rows if r[1] != 0]
        if len(nz) <= 1:
            break
        nz.sort(key=lambda r: abs(r[1]))
        piv = nz[0]
        for r in nz[1:]:
            q = r[1] // piv[1]
            r[0] -= q * piv[0]
            r[1] -= q * piv[1]
    ys = [r for r in rows if r[1] != 0]
    if not ys:
        raise ValueError("lattice has rank < 2")
    B, C = ys[0]
    if C < 0:
        B, C = -B, -C
    xs = [abs(r[0]) for r in rows if r[1] == 0 and r[0] != 0]
    if not xs:
        raise ValueError("lattice has rank < 2")
    A = math.gcd(*xs) if len(xs) > 1 else xs[0]
    B %= A
    return A, B, C


def _hnf_express(rows, A, B, C, target):
    """Integer coefficients c with sum c_i * rows_i = target, where target
    lies in the lattice with HNF (A, B, C).  Solved by tracking the same
    row reduction with an identity transform."""
    work = [list(r) for r in rows]
    n = len(work)
    T = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def combine(i, j, q):  # row_i -= q * row_j
        work[i][0] -= q * work[j][0]
        work[i][1] -= q * work[j][1]
        for k in range(n):
            T[i][k] -= q * T[j][k]

    while True:
        nzi = [i for i in range(n) if work[i][1] != 0]
        if len(nzi) <= 1:
            break
        nzi.sort(key=lambda i: abs(work[i][1]))
        p = nzi[0]
        for i in nzi[1:]:
            combine(i, p, work[i][1] // work[p][1])
    pi = next(i for i in range(n) if work[i][1] != 0)
    if work[pi][1] < 0:
        work[pi][0] *= -1
        work[pi][1] *= -1
        T[pi] = [-t for t in T[pi]]
    # gcd on x column among rows with y == 0
    xi = [i for i in range(n) if i != pi and work[i][0] != 0 and work[i][1] == 0]
    while len(xi) > 1:
        xi.sort(key=lambda i: abs(work[i][0]))
        p = xi[0]
        for i in xi[1:]:
            combine(i, p, work[i][0] // work[p][0])
        xi = [i for i in xi if work[i][0] != 0]
    px = xi[0]
    if work[px][0] < 0:
        work[px][0] *= -1
        T[px] = [-t for t in T[px]]
    # target = u * (x-pivot) + v * (y-pivot)
    tx, ty = target
    assert ty % work[pi][1] == 0
    v = ty // work[pi][1]
    rem = tx - v * work[pi][0]
    assert rem % work[px][0] == 0
    u = rem // work[px][0]
    coeffs = [u * T[px][k] + v * T[pi][k] for k in range(len(rows))]
    return coeffs


# ---------------------------------------------------------------------------

class FracIdeal:
    """Fractional ideal of R, canonical Hermite-form lattice."""

    __slots__ = ("field", "den", "A", "B", "C", "_norm")

    def __init__(self, field: RealQuadraticField, den: int, A: int, B: int, C: int):
        g = math.gcd(math.gcd(A, B), math.gcd(C, den))
        self.field = field
        self.den = den // g
        self.A = A // g
        self.B = B // g
        self.C = C // g
        self._norm = None

    # -- constructors ----------------------------------------------------
    @staticmethod
    def from_gens(field: RealQuadraticField, gens) -> "FracIdeal":
        """Ideal generated over R by the given elements."""
        elts = []
        for g in gens:
            if not isinstance(g, Elt):
                g = field.elt(g, 0)
            if not g.is_zero():
                elts.append(g)
                elts.append(g * field.omega())
        if not elts:
            raise ValueError("zero ideal")
        den = 1
        for e in elts:
            den = den * (q := (e.x.denominator * e.y.denominator // math.gcd(e.x.denominator, e.y.denominator))) // math.gcd(den, q)
        rows = [(int(e.x * den), int(e.y * den)) for e in elts]
        A, B, C = _hnf_rows(rows)
        return FracIdeal(field, den, A, B, C)

    @staticmethod
    def one(field: RealQuadraticField) -> "FracIdeal":
        return FracIdeal(field, 1, 1, 0, 1)

    # -- basic data ------------------------------------------------------
    def basis(self) -> tuple[Elt, Elt]:
        F = self.field
        return (F.elt(Fraction(self.A, self.den), 0),
                F.elt(Fraction(self.B, self.den), Fraction(self.C, self.den)))

    def norm(self) -> Fraction:
        if self._norm is None:
            self._norm = Fraction(self.A * self.C, self.den * self.den)
        return self._norm

    def is_integral(self) -> bool:
        return self.den == 1

    def key(self):
        return (self.field.D, self.den, self.A, self.B, self.C)

    def __eq__(self, other):
        return isinstance(other, FracIdeal) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        b1, b2 = self.basis()
        return "FracIdeal<%s, %s>" % (b1, b2)

    # -- membership ------------------------------------------------------
    def contains(self, e: Elt) -> bool:
        x = e.x * self.den
        y = e.y * self.den
        if x.denominator != 1 or y.denominator != 1:
            return False
        x, y = int(x), int(y)
        if y % self.C:
            return False
        return (x - self.B * (y // self.C)) % self.A == 0

    def __contains__(self, e):
        return self.contains(e)

    # -- arithmetic ------------------------------------------------------
    def __mul__(self, other):
        if isinstance(other, FracIdeal):
            g1, g2 = self.basis()
            h1, h2 = other.basis()
            return FracIdeal.from_gens(self.field, [g1 * h1, g1 * h2, g2 * h1, g2 * h2])
        if isinstance(other, (int, Fraction, Elt)):
            g1, g2 = self.basis()
            return FracIdeal.from_gens(self.field, [g1 * other, g2 * other])
        return NotImplemented

    __rmul__ = __mul__

    def __add__(self, other):
        g1, g2 = self.basis()
        h1, h2 = other.basis()
        return FracIdeal.from_gens(self.field, [g1, g2, h1, h2])

    def conj(self) -> "FracIdeal":
        g1, g2 = self.basis()
        return FracIdeal.from_gens(self.field, [g1.conj(), g2.conj()])

    def inverse(self) -> "FracIdeal":
        return self.conj() * (1 / self.norm())

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        r = FracIdeal.one(self.field)
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def intersection(self, other) -> "FracIdeal":
        return (self.inverse() + other.inverse()).inverse()

    def divides(self, other) -> bool:
        """self | other, i.e. other subset of self."""
        return (other * self.inverse()).is_integral()

    def valuation_at(self, P: "PrimeIdeal") -> int:
        num = self * self.den
        v = _integral_valuation(num, P)
        if self.den > 1:
            v -= _integral_valuation(FracIdeal.from_gens(self.field, [self.field.elt(self.den)]), P)
        return v

    # -- serialization ---------------------------------------------------
    def two_elt(self):
        """(n, second generator) with n the least positive rational in the
        ideal; the pair generates the ideal over R."""
        F = self.field
        return (Fraction(self.A, self.den),
                F.elt(Fraction(self.B, self.den), Fraction(self.C, self.den)))


def _integral_valuation(I: FracIdeal, P: "PrimeIdeal") -> int:
    assert I.is_integral()
    v = 0
    Pinv = P.inverse()
    J = I
    while True:
        K = J * Pinv
        if not K.is_integral():
            return v
        J = K
        v += 1


# ---------------------------------------------------------------------------

class PrimeIdeal(FracIdeal):
    __slots__ = ("p", "f", "kind", "second")

    def __init__(self, field, p: int, kind: str, root: int | None):
        self.p = p
        self.kind = kind
        self.f = 2 if kind == "inert" else 1
        if kind == "inert":
            self.second = field.elt(p)
            base = FracIdeal.from_gens(field, [field.elt(p)])
        else:
            self.second = field.elt(-root, 1)  # omega - root
            base = FracIdeal.from_gens(field, [field.elt(p), self.second])
        FracIdeal.__init__(self, field, base.den, base.A, base.B, base.C)


@lru_cache(maxsize=None)
def primes_above(field: RealQuadraticField, p: int) -> tuple[PrimeIdeal, ...]:
    """Prime ideals of R above the rational prime p."""
    s, t = field.omega_minpoly()  # omega^2 = s*omega + t
    # minpoly x^2 - s x - t mod p
    if field.d % p == 0:
        # ramified: double root of the minpoly mod p
        if p == 2:
            r = next(r for r in range(2) if (r * r - s * r - t) % 2 == 0)
        else:
            r = s * pow(2, -1, p) % p
        assert (r * r - s * r - t) % p == 0
        return (PrimeIdeal(field, p, "ramified", r),)
    if p == 2:
        roots = [r for r in range(2) if (r * r - s * r - t) % 2 == 0]
        if roots:
            assert len(roots) == 2
            return tuple(PrimeIdeal(field, 2, "split", r) for r in sorted(roots))
        return (PrimeIdeal(field, 2, "inert", None),)
    disc = (s * s + 4 * t) % p
    r2 = sqrt_mod(disc, p, all_roots=False) if pow(disc, (p - 1) // 2, p) == 1 else None
    if disc == 0:
        r2 = 0
    if r2 is None:
        return (PrimeIdeal(field, p, "inert", None),)
    inv2 = pow(2, -1, p)
    roots = sorted({(s + r2) * inv2 % p, (s - r2) * inv2 % p})
    return tuple(PrimeIdeal(field, p, "split", r) for r in roots)


def ideals_of_norm_up_to(field: RealQuadraticField, bound: int,
                         include_one: bool = True) -> list[FracIdeal]:
    """All integral ideals of norm <= bound, sorted by (norm, key)."""
    from sympy import primerange
    out = [(1, FracIdeal.one(field))]
    for p in primerange(2, bound + 1):
        for P in primes_above(field, p):
            np = int(P.norm())
            if np > bound:
                continue
            new = []
            for n, I in out:
                nk, Ik = n * np, I * P
                while nk <= bound:
                    new.append((nk, Ik))
                    nk, Ik = nk * np, Ik * P
            out.extend(new)
    if not include_one:
        out = [(n, I) for n, I in out if n > 1]
    return [I for _, I in sorted(out, key=lambda t: (t[0], t[1].key()))]


def factor_ideal(I: FracIdeal) -> list[tuple[PrimeIdeal, int]]:
    """Prime factorization; exponents may be negative for fractional ideals."""
    F = I.field
    n = I.norm() * I.den ** 2  # norm of the scaled integral ideal
    primes = set()
    for p in factorint(int(n)):
        primes.update(primes_above(F, p))
    for p in factorint(I.den):
        primes.update(primes_above(F, p))
    out = []
    for P in sorted(primes, key=lambda P: (P.p, P.B, P.A)):
        v = I.valuation_at(P)
        if v:
            out.append((P, v))
    out.sort(key=lambda t: (t[0].p, t[0].B, t[0].A))
    return out


# ---------------------------------------------------------------------------
# residue rings and unit groups

class ResidueRing:
    """R / M for an integral ideal M; canonical representatives (x, y) with
    0 <= x < A, 0 <= y < C in the Hermite basis of M."""

    def __init__(self, M: FracIdeal):
        assert M.is_integral()
        self.M = M
        self.field = M.field
        self.size = M.A * M.C

    def reduce(self, e: Elt) -> tuple[int, int]:
        if e.x.denominator != 1 or e.y.denominator != 1:
            # a rational denominator must be invertible modulo M
            d = e.x.denominator * e.y.denominator // math.gcd(e.x.denominator, e.y.denominator)
            inv = self.inverse_of(self.field.elt(d))
            e = e * d  # integral now
            return self.mul(self.reduce(e), inv)
        x, y = int(e.x), int(e.y)
        M = self.M
        y_r = y % M.C
        x_r = (x - M.B * ((y - y_r) // M.C)) % M.A
        return (x_r, y_r)

    def lift(self, r: tuple[int, int]) -> Elt:
        return self.field.elt(r[0], r[1])

    def add(self, a, b):
        return self.reduce(self.lift(a) + self.lift(b))

    def mul(self, a, b):
        return self.reduce(self.lift(a) * self.lift(b))

    def elements(self):
        for y in range(self.M.C):
            for x in range(self.M.A):
                yield (x, y)

    def is_unit(self, r: tuple[int, int]) -> bool:
        e = self.lift(r)
        if e.is_zero():
            return self.size == 1
        return (FracIdeal.from_gens(self.field, [e]) + self.M) == FracIdeal.one(self.field)

    def inverse_of(self, e: Elt) -> tuple[int, int]:
        """Inverse of a unit modulo M, by expressing 1 in (e) + M."""
        F = self.field
        gens = [e, e * F.omega()] + list(self.M.basis()) + [self.M.basis()[1] * F.omega()]
        den = 1
        for g in gens:
            q = g.x.denominator * g.y.denominator // math.gcd(g.x.denominator, g.y.denominator)
            den = den * q // math.gcd(den, q)
        rows = [(int(g.x * den), int(g.y * den)) for g in gens]
        A, B, C = _hnf_rows(rows)
        coeffs = _hnf_express(rows, A, B, C, (den, 0))
        inv = F.elt(coeffs[0]) + F.elt(coeffs[1]) * F.omega()
        r = self.reduce(inv)
        assert self.mul(r, self.reduce(e)) == self.reduce(F.one())
        return r


class ResidueUnitGroup(FiniteAbelianGroup):
    """(R/M)^x with cyclic decomposition, discrete logs and determinism."""

    def __init__(self, M: FracIdeal):
        self.ring = ResidueRing(M)
        self.M = M
        units = [r for r in self.ring.elements() if self.ring.is_unit(r)]
        FiniteAbelianGroup.__init__(self, units, self.ring.mul,
                                    self.ring.reduce(M.field.one()))

    def image(self, e: Elt) -> tuple[int, int]:
        return self.ring.reduce(e)


@lru_cache(maxsize=None)
def residue_units(M: FracIdeal) -> ResidueUnitGroup:
    return ResidueUnitGroup(M)


# ---------------------------------------------------------------------------
# weak approximation

def element_with_valuations(J: FracIdeal, constraints) -> Elt:
    """Element x of J with v_P(x) = e for each (P, e) in constraints and
    v_Q(x) >= v_Q(J) elsewhere.  Requires e >= v_P(J)."""
    F = J.field
    constraints = list(constraints)
    if not constraints:
        b1, b2 = J.basis()
        return b1
    pieces = []
    vJ = {P: J.valuation_at(P) for P, _ in constraints}
    for P, e in constraints:
        assert e >= vJ[P], "required valuation below the ideal's"
        A = J
        for Q, eq in constraints:
            shift = (e - vJ[P]) if Q == P else (eq - vJ[Q] + 1)
            A = A * Q ** shift
        pieces.append(_min_valuation_element(A, P))
    x = F.zero()
    for piece in pieces:
        x = x + piece
    for P, e in constraints:
        assert FracIdeal.from_gens(F, [x]).valuation_at(P) == e
    return x


def _min_valuation_element(A: FracIdeal, P: PrimeIdeal) -> Elt:
    """Element of A with minimal P-valuation (= v_P(A))."""
    b1, b2 = A.basis()
    v = A.valuation_at(P)
    for cand in (b1, b2, b1 + b2):
        if FracIdeal.from_gens(A.field, [cand]).valuation_at(P) == v:
            return cand
    raise AssertionError("no basis combination achieves the ideal valuation")


def idempotent_split(A: FracIdeal, B: FracIdeal) -> tuple[Elt, Elt]:
    """(a, b) with a in A, b in B, a + b = 1, for coprime integral ideals."""
    F = A.field
    gens = list(A.basis()) + list(B.basis())
    den = 1
    for g in gens:
        q = g.x.denominator * g.y.denominator // math.gcd(g.x.denominator, g.y.denominator)
        den = den * q // math.gcd(den, q)
    rows = [(int(g.x * den), int(g.y * den)) for g in gens]
    hA, hB, hC = _hnf_rows(rows)
    coeffs = _hnf_express(rows, hA, hB, hC, (den, 0))
    a = gens[0] * coeffs[0] + gens[1] * coeffs[1]
    b = gens[2] * coeffs[2] + gens[3] * coeffs[3]
    assert (a + b) == F.one() and A.contains(a) and B.contains(b)
    return a, b


def crt(field: RealQuadraticField, residues) -> Elt:
    """x with x = r_i (mod M_i) for pairwise coprime integral ideals M_i."""
    residues = list(residues)
    if not residues:
        return field.zero()
    x, M = residues[0]
    for r, N in residues[1:]:
        a, b = idempotent_split(M, N)  # a in M, b in N, a + b = 1
        x = x * b + r * a
        M = M * N
    return x


def approximate(field: RealQuadraticField, constraints, congruence=None) -> Elt:
    """Weak approximation: constraints are (PrimeIdeal, exponent, mode) with
    mode "exact" or "at-least"; optional congruence (target, modulus ideal)
    with modulus coprime to the constraint primes.

    Returns a deterministic element satisfying everything, or raises on
    inconsistency.
    """
    constraints = list(constraints)
    if not constraints and congruence is None:
        return field.one()
    residues = []
    for P, e, mode in constraints:
        if e < 0:
            raise ValueError("negative valuations need an ambient ideal")
        if mode == "exact":
            pi = _min_valuation_element(P ** e, P) if e else field.one()
            if e and FracIdeal.from_gens(field, [pi]).valuation_at(P) != e:
                pi = element_with_valuations(P ** e, [(P, e)])
            residues.append((pi, P ** (e + 1)))
        elif mode == "at-least":
            residues.append((field.zero(), P ** e))
        else:
            raise ValueError("mode must be 'exact' or 'at-least'")
    if congruence is not None:
        target, modulus = congruence
        for P, _, _ in constraints:
            if modulus.valuation_at(P) > 0:
                raise ValueError("congruence modulus shares a prime with the constraints")
        residues.append((target, modulus))
    x = crt(field, residues)
    for P, e, mode in constraints:
        v = FracIdeal.from_gens(field, [x]).valuation_at(P) if not x.is_zero() else None
        if mode == "exact" and v != e:
            raise ValueError("inconsistent constraints")
        if mode == "at-least" and (v is not None and v < e):
            raise ValueError("inconsistent constraints")
    return x
