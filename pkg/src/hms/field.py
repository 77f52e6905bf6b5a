"""Exact arithmetic in a real quadratic field F = Q(sqrt(D)).

Elements are stored with exact rational coordinates against the integral
basis (1, omega), where omega = (1+sqrt(D))/2 when D = 1 (mod 4) and
omega = sqrt(D) otherwise.  All comparisons (signs at the two real places,
floors, continued-fraction digits) are decided by exact integer arithmetic;
no branch anywhere in this module consults floating point.

The two real places are ordered deterministically: place 0 ("v") sends
sqrt(D) to the positive real root, place 1 ("v'") to the negative root.
Swapping the places conjugates every derived quantity simultaneously and
changes no emitted invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from sympy import divisor_sigma, factorint

__all__ = [
    "RealQuadraticField",
    "Elt",
    "HJExpansion",
    "make_field",
    "hj_expand",
    "hj_expand_rational",
]


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _floor_sqrt_mult(b: int, D: int) -> int:
    """floor(b*sqrt(D)) for an integer b of either sign."""
    m = b * b * D
    r = math.isqrt(m)
    if b >= 0:
        return r
    return -r if r * r == m else -r - 1


def _floor_quad(A: int, B: int, C: int, D: int) -> int:
    """floor((A + B*sqrt(D))/C) for integers with C > 0, D not a square.

    Exact: floor(B*sqrt(D)) is computed by integer square root, and since
    B*sqrt(D) is irrational for B != 0 no integer lies strictly between it
    and its floor, so integer floor-division finishes the job.
    """
    if B == 0:
        return A // C
    return (A + _floor_sqrt_mult(B, D)) // C


def _sign_ab(a: Fraction, b: Fraction, D: int) -> int:
    """Sign of a + b*sqrt(D), exactly."""
    if b == 0:
        return _sign(a)
    if a == 0:
        return _sign(b)
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    t = a * a - b * b * D  # = (a + b*sqrt(D)) * (a - b*sqrt(D))
    if t == 0:
        return 0
    # signs of a and b differ, so a - b*sqrt(D) has the sign of a
    return _sign(t) if a > 0 else -_sign(t)


class Elt:
    """Element x + y*omega of a real quadratic field, exact coordinates."""

    __slots__ = ("field", "x", "y")

    def __init__(self, field: "RealQuadraticField", x, y):
        self.field = field
        self.x = Fraction(x)
        self.y = Fraction(y)

    # -- coordinates against (1, sqrt(D)) --------------------------------
    def ab(self) -> tuple[Fraction, Fraction]:
        if self.field.omega_is_half:
            return (self.x + self.y / 2, self.y / 2)
        return (self.x, self.y)

    # -- ring operations -------------------------------------------------
    def _coerce(self, other) -> "Elt":
        if isinstance(other, Elt):
            if other.field is not self.field and other.field.D != self.field.D:
                raise ValueError("elements of different fields")
            return other
        return Elt(self.field, other, 0)

    def __add__(self, other):
        o = self._coerce(other)
        return Elt(self.field, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __neg__(self):
        return Elt(self.field, -self.x, -self.y)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        F = self.field
        if F.omega_is_half:
            k = (F.D - 1) // 4
            return Elt(F, self.x * o.x + self.y * o.y * k,
                       self.x * o.y + self.y * o.x + self.y * o.y)
        return Elt(F, self.x * o.x + self.y * o.y * F.D,
                   self.x * o.y + self.y * o.x)

    __rmul__ = __mul__

    def inverse(self) -> "Elt":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.conj()
        return Elt(self.field, c.x / n, c.y / n)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        r = self.field.one()
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def conj(self) -> "Elt":
        if self.field.omega_is_half:
            return Elt(self.field, self.x + self.y, -self.y)
        return Elt(self.field, self.x, -self.y)

    def norm(self) -> Fraction:
        a, b = self.ab()
        return a * a - b * b * self.field.D

    def trace(self) -> Fraction:
        a, _ = self.ab()
        return 2 * a

    # -- order and signs -------------------------------------------------
    def sign_at(self, place: int) -> int:
        a, b = self.ab()
        return _sign_ab(a, -b if place else b, self.field.D)

    def is_totally_positive(self) -> bool:
        return self.sign_at(0) > 0 and self.sign_at(1) > 0

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def compare_at(self, other, place: int = 0) -> int:
        """Sign of (self - other) at the given place, exactly."""
        return (self - self._coerce(other)).sign_at(place)

    def floor_at(self, place: int = 0) -> int:
        a, b = self.ab()
        if place:
            b = -b
        if b == 0:
            return a.numerator // a.denominator
        # (A + B*sqrt(D)) / C with integers, C > 0
        C = a.denominator * b.denominator
        A = a.numerator * b.denominator
        B = b.numerator * a.denominator
        g = math.gcd(math.gcd(abs(A), abs(B)), C)
        return _floor_quad(A // g, B // g, C // g, self.field.D)

    def is_integral(self) -> bool:
        return self.x.denominator == 1 and self.y.denominator == 1

    def is_rational(self) -> bool:
        return self.y == 0

    def as_rational(self) -> Fraction:
        if self.y != 0:
            raise ValueError("not rational")
        return self.x

    # -- misc ------------------------------------------------------------
    def approx(self, place: int = 0) -> float:
        """Floating approximation; for display and test seeds only."""
        a, b = self.ab()
        s = math.sqrt(self.field.D)
        return float(a) + float(b) * (-s if place else s)

    def __eq__(self, other):
        if isinstance(other, Elt):
            return self.field.D == other.field.D and self.x == other.x and self.y == other.y
        if isinstance(other, (int, Fraction)):
            return self.y == 0 and self.x == other
        return NotImplemented

    def __hash__(self):
        return hash((self.field.D, self.x, self.y))

    def __repr__(self):
        F = self.field
        w = "(1+sqrt(%d))/2" % F.D if F.omega_is_half else "sqrt(%d)" % F.D
        if self.y == 0:
            return str(self.x)
        if self.x == 0:
            return "%s*%s" % (self.y, w)
        return "%s + %s*%s" % (self.x, self.y, w)


@dataclass(frozen=True)
class HJExpansion:
    """Minus-sign continued fraction x = b0 - 1/(b1 - 1/(...)).

    flavor "finite": digits in `preperiod`, period empty.
    flavor "periodic": eventually periodic with the given period.
    """

    preperiod: tuple
    period: tuple
    flavor: str

    @property
    def digits(self) -> tuple:
        if self.flavor != "finite":
            raise ValueError("periodic expansion has no finite digit list")
        return self.preperiod

    def value(self) -> Fraction:
        """Reconstruct the rational value of a finite expansion."""
        ds = self.digits
        v = Fraction(ds[-1])
        for b in reversed(ds[:-1]):
            v = b - 1 / v
        return v


def hj_expand_rational(x, max_steps: int = 10000) -> HJExpansion:
    x = Fraction(x)
    digits = []
    for _ in range(max_steps):
        if x.denominator == 1:
            digits.append(x.numerator)
            return HJExpansion(tuple(digits), (), "finite")
        b = -((-x.numerator) // x.denominator)  # ceil
        digits.append(b)
        x = 1 / (b - x)
    raise RuntimeError("hj_expand_rational: step budget exhausted")


def _canonical_pqn(a: Fraction, b: Fraction, D: int) -> tuple[int, int, int]:
    """Write a + b*sqrt(D) (b != 0) as (P + sqrt(N))/Q with Q | N - P^2."""
    C = a.denominator * b.denominator
    A = a.numerator * b.denominator
    B = b.numerator * a.denominator
    if B < 0:
        A, B, C = -A, -B, -C
    P, Q, N = A, C, B * B * D  # value is (A + sqrt(B^2 D))/C since B > 0
    if (N - P * P) % Q != 0:
        P, N, Q = P * abs(Q), N * Q * Q, Q * abs(Q)
    return P, Q, N


def hj_expand_quadratic(elt: Elt, place: int = 0, max_steps: int = 10000) -> HJExpansion:
    a, b = elt.ab()
    if place:
        b = -b
    if b == 0:
        return hj_expand_rational(a, max_steps)
    D = elt.field.D
    P, Q, N = _canonical_pqn(a, b, D)
    seen = {}
    digits = []
    for i in range(max_steps):
        key = (P, Q)
        if key in seen:
            j = seen[key]
            return HJExpansion(tuple(digits[:j]), tuple(digits[j:i]), "periodic")
        seen[key] = i
        # digit: smallest integer strictly greater than (P + sqrt(N))/Q
        b0 = _floor_pqn(P, Q, N) + 1
        digits.append(b0)
        Pn = b0 * Q - P
        Qn = (Pn * Pn - N) // Q
        P, Q = Pn, Qn
    raise RuntimeError("hj_expand_quadratic: no period within step budget")


def _floor_pqn(P: int, Q: int, N: int) -> int:
    """floor((P + sqrt(N))/Q), Q of either sign, N > 0 not a square."""
    r = math.isqrt(N)  # floor(sqrt(N)); sqrt(N) irrational here
    if Q > 0:
        return (P + r) // Q
    # (P + sqrt(N))/Q = (-P - sqrt(N))/(-Q); floor(-sqrt(N)) = -r - 1
    return (-P - r - 1) // (-Q)


def hj_expand(x, place: int = 0, max_steps: int = 10000) -> HJExpansion:
    """Hirzebruch-Jung expansion of a rational or quadratic irrational."""
    if isinstance(x, Elt):
        return hj_expand_quadratic(x, place, max_steps)
    return hj_expand_rational(x, max_steps)


class RealQuadraticField:
    """F = Q(sqrt(D)), D > 1 squarefree, with unit and place data."""

    def __init__(self, D: int):
        if D <= 1:
            raise ValueError("D must be an integer > 1")
        fac = factorint(D)
        if any(e > 1 for e in fac.values()):
            raise ValueError("D must be squarefree")
        self.D = D
        self.omega_is_half = D % 4 == 1
        self.d = D if self.omega_is_half else 4 * D
        self.eps = self._fundamental_unit()
        self.unit_norm = int(self.eps.norm())
        if self.unit_norm == -1:
            self.eps_plus = self.eps * self.eps
        elif self.eps.is_totally_positive():
            self.eps_plus = self.eps
        else:
            self.eps_plus = -self.eps
        assert self.eps_plus.is_totally_positive()

    # -- element constructors -------------------------------------------
    def elt(self, x, y=0) -> Elt:
        return Elt(self, x, y)

    def from_ab(self, a, b) -> Elt:
        a, b = Fraction(a), Fraction(b)
        if self.omega_is_half:
            return Elt(self, a - b, 2 * b)
        return Elt(self, a, b)

    def zero(self) -> Elt:
        return Elt(self, 0, 0)

    def one(self) -> Elt:
        return Elt(self, 1, 0)

    def omega(self) -> Elt:
        return Elt(self, 0, 1)

    def sqrtD(self) -> Elt:
        return self.from_ab(0, 1)

    def omega_minpoly(self) -> tuple[int, int]:
        """(s, t) with omega^2 = s*omega + t."""
        if self.omega_is_half:
            return (1, (self.D - 1) // 4)
        return (0, self.D)

    # -- units -----------------------------------------------------------
    def _fundamental_unit(self) -> Elt:
        D = self.D
        if self.omega_is_half:
            P, Q, N = 1, 2, D
        else:
            P, Q, N = 0, 1, D
        # regular continued fraction of omega; period detection on (P, Q)
        # states starting from the first complete quotient.
        digits = []
        first = None
        for _ in range(100000):
            a = _floor_pqn(P, Q, N)
            Pn = a * Q - P
            Qn = (N - Pn * Pn) // Q
            state = (Pn, Qn)
            if first is None:
                first = state
                P, Q = Pn, Qn
                continue
            digits.append(a)
            if state == first:
                # one full period of the expansion of the first complete
                # quotient alpha_1 = (P1 + sqrt(N))/Q1
                A, B, C, E = 1, 0, 0, 1
                for d in digits:
                    A, B, C, E = A * d + B, A, C * d + E, C
                # eps = C*alpha_1 + E with alpha_1 = (first[0]+sqrt(N))/first[1]
                P1, Q1 = first
                a_part = Fraction(C * P1, Q1) + E
                b_part = Fraction(C, Q1)
                # N = k^2 * D with k = 1 here (N == D always)
                eps = self.from_ab(a_part, b_part)
                assert abs(eps.norm()) == 1, "unit computation failed"
                return eps
            P, Q = Pn, Qn
        raise RuntimeError("fundamental unit: period not found")

    def totally_positive_unit_square_classes(self) -> list[Elt]:
        """Representatives of R_{>0}^x / (R^x)^2: [1] or [1, eps_plus]."""
        if self.unit_norm == 1:
            return [self.one(), self.eps_plus]
        return [self.one()]

    # -- zeta ------------------------------------------------------------
    def zeta_minus_one(self) -> Fraction:
        """zeta_F(-1), by the finite divisor sum over b^2 < d_F."""
        d = self.d
        total = 0
        b = d % 2
        while b * b < d:
            term = int(divisor_sigma((d - b * b) // 4, 1))
            total += term if b == 0 else 2 * term
            b += 2
        return Fraction(total, 60)

    def __repr__(self):
        return "RealQuadraticField(%d)" % self.D

    def __eq__(self, other):
        return isinstance(other, RealQuadraticField) and other.D == self.D

    def __hash__(self):
        return hash(("RQF", self.D))


@lru_cache(maxsize=None)
def make_field(D: int) -> RealQuadraticField:
    return RealQuadraticField(D)
