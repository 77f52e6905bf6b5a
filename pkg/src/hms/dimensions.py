"""Hilbert series of cusp forms for level structures of Gamma_0 type.

The series sum_k dim S_k T^k (k even) over all components is assembled
from three exact rational pieces: a constant-class-number term, a volume
term built from zeta_F(-1), and one term per conjugacy pair (u, t) of
totally positive unit u and trace t with t^2 - 4u totally negative.  The
last terms are rational functions in T^2 whose denominators come from
the characteristic polynomial of the norm of the recurrence
D_k = t D_{k-1} - u D_{k-2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .classgroups import class_data
from .cm import cm_order_data, divisor_ideals_of
from .elliptic import local_embedding_number, trace_candidates
from .field import Elt, RealQuadraticField
from .ideals import FracIdeal, factor_ideal


# ---------------------------------------------------------------------------
# polynomial and rational function helpers (coefficient lists, low degree
# first, exact Fractions)

def _trim(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_add(p, q):
    n = max(len(p), len(q))
    return _trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0)
                  for i in range(n)])


def poly_mul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return _trim(out)


def poly_scale(p, c):
    return _trim([a * c for a in p])


def _poly_divmod(p, q):
    assert q, "division by the zero polynomial"
    r = list(p)
    if len(r) < len(q):
        return [], _trim(r)
    d = [Fraction(0)] * (len(r) - len(q) + 1)
    for k in range(len(d) - 1, -1, -1):
        c = r[k + len(q) - 1] / q[-1]
        if c == 0:
            continue
        d[k] = c
        for i in range(len(q)):
            r[k + i] -= c * q[i]
    return _trim(d), _trim(r)


def _poly_gcd(p, q):
    p, q = list(p), list(q)
    while q:
        _, r = _poly_divmod(p, q)
        p, q = q, r
    if p:
        p = poly_scale(p, 1 / p[-1])
    return p


@dataclass
class RationalSeries:
    """A power series given as num/den with integer coefficients,
    den[0] == 1 and gcd(num, den) == 1."""

    num: list[int]
    den: list[int]

    def taylor(self, nmax: int) -> list[Fraction]:
        """Coefficients of T^0 .. T^nmax."""
        out = []
        num, den = self.num, self.den
        for k in range(nmax + 1):
            c = Fraction(num[k] if k < len(num) else 0)
            for i in range(1, min(k, len(den) - 1) + 1):
                c -= den[i] * out[k - i]
            out.append(c / den[0])
        return out

    def serialize(self) -> dict:
        dims = {k: int(c) for k, c in enumerate(self.taylor(20))
                if k % 2 == 0 and k > 0}
        return {"num": list(self.num), "den": list(self.den), "dims": dims}


class _RatFun:
    """Rational function num/den over Fraction coefficients."""

    def __init__(self, num, den=None):
        self.num = _trim([Fraction(c) for c in num])
        self.den = _trim([Fraction(c) for c in (den or [1])])
        assert self.den, "zero denominator"
        self._reduce()

    def _reduce(self):
        if not self.num:
            self.den = [Fraction(1)]
            return
        g = _poly_gcd(self.num, self.den)
        if len(g) > 1:
            self.num, r = _poly_divmod(self.num, g)
            assert not r
            self.den, r = _poly_divmod(self.den, g)
            assert not r
        c = self.den[0]
        assert c != 0, "denominator vanishes at T = 0"
        self.num = poly_scale(self.num, 1 / c)
        self.den = poly_scale(self.den, 1 / c)

    def __add__(self, other):
        return _RatFun(poly_add(poly_mul(self.num, other.den),
                                poly_mul(other.num, self.den)),
                       poly_mul(self.den, other.den))

    def __mul__(self, other):
        if isinstance(other, _RatFun):
            return _RatFun(poly_mul(self.num, other.num),
                           poly_mul(self.den, other.den))
        return _RatFun(poly_scale(self.num, Fraction(other)), self.den)

    __rmul__ = __mul__

    def derivative(self):
        def dpoly(p):
            return _trim([i * p[i] for i in range(1, len(p))])
        num = poly_add(poly_mul(dpoly(self.num), self.den),
                       poly_scale(poly_mul(self.num, dpoly(self.den)), -1))
        return _RatFun(num, poly_mul(self.den, self.den))

    def compose_minus(self):
        """self(-T)."""
        return _RatFun([c if i % 2 == 0 else -c
                        for i, c in enumerate(self.num)],
                       [c if i % 2 == 0 else -c
                        for i, c in enumerate(self.den)])

    def as_series(self) -> RationalSeries:
        lcm = 1
        for c in self.num + self.den:
            lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
        num = [c * lcm for c in self.num]
        den = [c * lcm for c in self.den]
        assert all(c.denominator == 1 for c in num + den)
        num = [int(c) for c in num]
        den = [int(c) for c in den]
        g = 0
        for c in num + den:
            g = math.gcd(g, c)
        if g > 1:
            num = [c // g for c in num]
            den = [c // g for c in den]
        assert den[0] == 1, "denominator constant term must be 1"
        return RationalSeries(num, den)


_T = _RatFun([0, 1])


# ---------------------------------------------------------------------------
# trace pairs

@dataclass(eq=False)
class TracePair:
    """A pair (u, t): u a totally positive unit representative, t a trace
    with t^2 - 4u totally negative.  weight counts how many literal
    traces the representative stands for (t and -t give isomorphic
    orders and equal series terms)."""

    u: Elt
    t: Elt
    weight: int
    base: "object"   # CMOrderData of the order R[x]/(x^2 - t x + u)

    @property
    def conductor(self) -> FracIdeal:
        return self.base.conductor

    @property
    def ext(self):
        return self.base.ext


def enumerate_trace_pairs(F: RealQuadraticField,
                          budget=None) -> list[TracePair]:
    """All pairs (u, t) up to the symmetry t <-> -t, with weights."""
    pairs = []
    for u in F.totally_positive_unit_square_classes():
        for t in trace_candidates(F, u):
            delta = t * t - 4 * u
            assert delta.sign_at(0) < 0 and delta.sign_at(1) < 0
            base = cm_order_data(F, u, t, budget=budget)
            pairs.append(TracePair(u=u, t=t,
                                   weight=1 if t.is_zero() else 2,
                                   base=base))
    pairs.sort(key=lambda p: (p.u.ab(), p.t.ab()))
    return pairs


# ---------------------------------------------------------------------------
# the three kinds of terms

def term_AB(F: RealQuadraticField, N: FracIdeal):
    """The constant A = -h^+ and the volume factor
    B = |zeta_F(-1)| h Nm(N) prod (1 + Nm(p)^-1) / 2."""
    cd = class_data(F)
    A = Fraction(-cd.h_plus)
    B = Fraction(abs(F.zeta_minus_one())) * cd.h * int(N.norm()) / 2
    for P, _ in factor_ideal(N):
        B *= 1 + Fraction(1, P.norm())
    return A, B


def term_C(pair: TracePair, N: FracIdeal, budget=None) -> Fraction:
    """Mass of the pair: class numbers of the superorders of R[x] weighted
    by unit indices and local embedding numbers at the level primes."""
    maxod = cm_order_data(pair.base.field, pair.u, pair.t,
                          divisor=FracIdeal.one(pair.base.field),
                          budget=budget)
    # w = #(Z_K^x / R^x) = (#torsion / 2) * Q already includes the Hasse
    # unit index
    head = Fraction(maxod.h, 2 * maxod.w)
    level = factor_ideal(N)
    total = Fraction(0)
    for g in divisor_ideals_of(pair.conductor):
        term = Fraction(int(g.norm()))
        for P, _ in factor_ideal(g):
            term *= 1 - Fraction(pair.ext.symbol(P), P.norm())
        if term == 0:
            continue
        od = cm_order_data(pair.base.field, pair.u, pair.t, divisor=g,
                           budget=budget)
        for P, e in level:
            m = local_embedding_number(od, P, e)
            if m == 0:
                term = Fraction(0)
                break
            term *= m
        total += term
    return head * total


def _norm_recurrence(pair: TracePair):
    """Characteristic coefficients (e1, e2, e3, e4) of the sequence
    s_k = Nm(D_k):  s_k = e1 s_{k-1} - e2 s_{k-2} + e3 s_{k-3} - e4 s_{k-4},
    via Newton's identities from the power sums tr(M^m) tr(Mbar^m)."""
    t, u = pair.t, pair.u
    F = pair.base.field
    # tau_m = alpha^m + beta^m in F
    tau = [2 * F.one(), t]
    for _ in range(3):
        tau.append(t * tau[-1] - u * tau[-2])
    p = [(tau[m] * tau[m].conj()).as_rational() for m in range(1, 5)]
    e1 = p[0]
    e2 = (e1 * p[0] - p[1]) / 2
    e3 = (e2 * p[0] - e1 * p[1] + p[2]) / 3
    e4 = (e3 * p[0] - e2 * p[1] + e1 * p[2] - p[3]) / 4
    for e in (e1, e2, e3, e4):
        assert e.denominator == 1, "norm recurrence must be integral"
    return e1, e2, e3, e4


def norm_series(pair: TracePair) -> _RatFun:
    """sum_{m >= 1} Nm(D_{2m-2}) T^{2m} as a rational function."""
    F = pair.base.field
    t, u = pair.t, pair.u
    D = [F.one(), t]
    for _ in range(2):
        D.append(t * D[-1] - u * D[-2])
    s = [(d * d.conj()).as_rational() for d in D]    # s_0 .. s_3
    e1, e2, e3, e4 = _norm_recurrence(pair)
    den = [Fraction(1), -e1, e2, -e3, e4]
    num = poly_mul(den, [Fraction(v) for v in s])[:4]
    G = _RatFun(num, den)
    even = Fraction(1, 2) * (G + G.compose_minus())
    return _T * _T * even


def direct_norm_coefficients(pair: TracePair, nmax: int) -> list[Fraction]:
    """Coefficients of T^0..T^nmax of sum_m Nm(D_{2m-2}) T^{2m}, summed
    directly from the recurrence (independent route)."""
    F = pair.base.field
    t, u = pair.t, pair.u
    D = [F.one(), t]
    while len(D) < nmax:
        D.append(t * D[-1] - u * D[-2])
    out = [Fraction(0)] * (nmax + 1)
    for m in range(1, nmax // 2 + 1):
        d = D[2 * m - 2]
        out[2 * m] = Fraction((d * d.conj()).as_rational())
    return out


# ---------------------------------------------------------------------------
# assembly

def hilbert_series(F: RealQuadraticField, N: FracIdeal,
                   budget=None) -> RationalSeries:
    """Hilbert series of even-weight cusp forms for the Gamma_0 level N
    groups, summed over all components, as an exact rational function."""
    A, B = term_AB(F, N)
    # A T^2
    total = _RatFun([0, 0, A])
    # B * T (T d/dT)^2 (T / (1 - T^2))
    g = _RatFun([0, 1], [1, 0, -1])
    for _ in range(2):
        g = _T * g.derivative()
    total = total + B * (_T * g)
    for pair in enumerate_trace_pairs(F, budget=budget):
        C = term_C(pair, N, budget=budget) * pair.weight
        if C != 0:
            total = total + C * norm_series(pair)
    series = total.as_series()
    coeffs = series.taylor(20)
    assert coeffs[0] == 0, "constant coefficient must vanish"
    assert all(coeffs[k] == 0 for k in range(1, 21, 2)), \
        "odd coefficients must vanish"
    return series


def hilbert_series_direct_taylor(F: RealQuadraticField, N: FracIdeal,
                                 nmax: int = 20,
                                 budget=None) -> list[Fraction]:
    """Taylor coefficients of the series by direct termwise summation,
    bypassing the rational-function arithmetic (cross-check route)."""
    A, B = term_AB(F, N)
    out = [Fraction(0)] * (nmax + 1)
    if nmax >= 2:
        out[2] += A
    # T (T d/dT)^2 (T/(1-T^2)) = sum_j (2j+1)^2 T^(2j+2)
    for j in range(nmax // 2):
        if 2 * j + 2 <= nmax:
            out[2 * j + 2] += B * (2 * j + 1) ** 2
    for pair in enumerate_trace_pairs(F, budget=budget):
        C = term_C(pair, N, budget=budget) * pair.weight
        if C == 0:
            continue
        for k, c in enumerate(direct_norm_coefficients(pair, nmax)):
            out[k] += C * c
    return out


def dim_cusp_forms(F: RealQuadraticField, N: FracIdeal, k: int,
                   budget=None) -> int:
    """dim S_k(Gamma_0(N)) for even weight k >= 2, over all components."""
    if k < 2 or k % 2 != 0:
        raise ValueError("weight must be an even integer >= 2")
    c = hilbert_series(F, N, budget=budget).taylor(k)[k]
    assert c.denominator == 1 and c >= 0, "dimension must be a nonneg integer"
    return int(c)
