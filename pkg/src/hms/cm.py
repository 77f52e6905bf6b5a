"""Totally imaginary quadratic extensions K = F(gamma) of a real
quadratic field F, and their R-orders.

gamma satisfies gamma^2 = t*gamma - u with t, u in R and t^2 - 4u totally
negative.  Elements of K are pairs (a, b) of field elements meaning
a + b*gamma; lattices (orders and ideals) are rank-4 Z-modules in the
coordinates (1, omega, gamma, omega*gamma), stored in Hermite form.

Provided here: the maximal order Z_K (radical/multiplier enlargement at
the primes whose square divides the discriminant), conductors, splitting
symbols (K/p), torsion units, Hasse unit indices Q(S), and class numbers
h(Z_K) by exact enumeration of prime ideals below the Minkowski bound
with an exact principality test (relative norm equation plus a bounded
quadratic-form search), extended to arbitrary conductors by the standard
conductor class number formula.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from sympy import isprime

from .classgroups import tp_generator
from .field import Elt, RealQuadraticField
from .ideals import FracIdeal, PrimeIdeal, ResidueRing, factor_ideal, primes_above

__all__ = [
    "CMBudgetError",
    "CMExtension",
    "CMOrder",
    "CMOrderData",
    "cm_extension",
    "cm_order_data",
    "divisor_ideals_of",
]

DEFAULT_BUDGET = 2_000_000


class CMBudgetError(RuntimeError):
    """Raised when an enumeration exceeds its configured budget."""


# ---------------------------------------------------------------------------
# small exact integer linear algebra

def _hnf_rect(rows, n):
    """Row Hermite form of an integer matrix with n columns; requires full
    column rank.  Returns n rows, upper triangular, positive diagonal,
    off-pivot entries above each pivot reduced into [0, pivot)."""
    rows = [list(r) for r in rows if any(r)]
    out = []
    for col in range(n):
        live = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        assert live, "matrix does not have full column rank"
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            piv = live[0]
            new_live = [piv]
            for r in live[1:]:
                q = r[col] // piv[col]
                rr = [x - q * y for x, y in zip(r, piv)]
                (new_live if rr[col] != 0 else rest).append(rr)
            live = new_live
        piv = live[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        out.append(piv)
        rows = rest
    for i in range(n):  # ascending: row i only touches columns >= i
        for j in range(i):
            q = out[j][i] // out[i][i]
            if q:
                out[j] = [x - q * y for x, y in zip(out[j], out[i])]
    return [tuple(r) for r in out]


def _triangular_solve(rows, den, vec):
    """Integer coordinates of vec w.r.t. the upper triangular basis
    rows/den (row i has pivot at column i), or None if vec is outside."""
    n = len(rows)
    coords = []
    rem = [Fraction(v) for v in vec]
    for i in range(n):
        num = rem[i] * den
        if num.denominator != 1:
            return None
        q, r = divmod(int(num), rows[i][i])
        if r:
            return None
        coords.append(q)
        for j in range(i, n):
            rem[j] -= Fraction(q * rows[i][j], den)
    if any(x != 0 for x in rem):
        return None
    return coords


def _snf_column_transform(rows):
    """Diagonalize an integer matrix by row and column operations; return
    (diag, C) where C is the accumulated square column transform with
    (row ops) * original * C diagonal."""
    A = [list(r) for r in rows]
    assert A
    m, n = len(A), len(A[0])
    C = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def col_op(j, k, q):  # col_j -= q * col_k
        for r in A:
            r[j] -= q * r[k]
        for r in C:
            r[j] -= q * r[k]

    def col_swap(j, k):
        for r in A:
            r[j], r[k] = r[k], r[j]
        for r in C:
            r[j], r[k] = r[k], r[j]

    t = 0
    while t < min(m, n):
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] != 0 and (piv is None
                                     or abs(A[i][j]) < abs(A[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        i0, j0 = piv
        A[t], A[i0] = A[i0], A[t]
        if j0 != t:
            col_swap(t, j0)
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                    if A[i][t]:
                        A[t], A[i] = A[i], A[t]
                        dirty = True
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    col_op(j, t, q)
                    if A[t][j]:
                        col_swap(t, j)
                        dirty = True
        t += 1
    diag = [A[i][i] for i in range(min(m, n))]
    return diag, C


def _integral_preimage(W, n):
    """Basis of {v in Q^n : W v in Z^k} for a rational k x n matrix W of
    full column rank; returns n tuples of Fractions."""
    den = 1
    for row in W:
        for e in row:
            den = den * e.denominator // math.gcd(den, e.denominator)
    B = [[int(e * den) for e in row] for row in W]
    diag, C = _snf_column_transform(B)
    assert len(diag) >= n and all(diag[:n]), "constraint matrix rank-deficient"
    basis = []
    for j in range(n):
        c = Fraction(den, abs(diag[j]))
        basis.append(tuple(C[i][j] * c for i in range(n)))
    return basis


# ---------------------------------------------------------------------------
# exact short-vector enumeration

def _gram_lll(G):
    """Exact LLL reduction (delta = 3/4) given only an integer Gram matrix.

    Returns (G', U) with U unimodular and G' = U G U^T; x' G' x'^T equals
    (x' U) G (x' U)^T, so coordinates transform by x = x' U.  Reduction
    makes the Fincke-Pohst search tree small even for very skew lattices
    (e.g. ideal lattices of fields with a large fundamental unit)."""
    n = len(G)
    G = [[int(e) for e in row] for row in G]
    U = [[int(i == j) for j in range(n)] for i in range(n)]

    # The reduction quality only affects enumeration speed, never
    # correctness: G' = U G U^T holds exactly for any unimodular U.  The
    # Gram-Schmidt data may therefore be computed in floating point, with
    # a scale shift against overflow and an iteration cap against
    # precision-induced cycling.
    def gs():
        s = max(abs(e) for row in G for e in row).bit_length()
        s = max(0, s - 512)
        d = [0.0] * n
        mu = [[0.0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i):
                mu[i][j] = (float(G[i][j] >> s) - sum(
                    mu[i][k] * mu[j][k] * d[k] for k in range(j))) / d[j]
            d[i] = float(G[i][i] >> s) - sum(
                mu[i][k] ** 2 * d[k] for k in range(i))
            if d[i] <= 0:
                return None, None    # lost precision; stop reducing
        return d, mu

    def addmul(k, j, q):
        # b_k -= q b_j
        for i in range(n):
            U[k][i] -= q * U[j][i]
        for i in range(n):
            G[k][i] -= q * G[j][i]
        for i in range(n):
            G[i][k] -= q * G[i][j]

    def swap(k):
        U[k], U[k - 1] = U[k - 1], U[k]
        G[k], G[k - 1] = G[k - 1], G[k]
        for row in G:
            row[k], row[k - 1] = row[k - 1], row[k]

    k = 1
    steps = 0
    while k < n and steps < 10000:
        steps += 1
        d, mu = gs()
        if d is None:
            break
        for j in range(k - 1, -1, -1):
            q = math.floor(mu[k][j] + 0.5)
            if q:
                addmul(k, j, q)
                for jj in range(j):
                    mu[k][jj] -= q * mu[j][jj]
                mu[k][j] -= q
        if d[k] >= (0.75 - mu[k][k - 1] ** 2) * d[k - 1]:
            k += 1
        else:
            swap(k)
            k = max(k - 1, 1)
    return G, U


def _to_original_coords(vecs, U):
    """Map reduced-basis coordinate vectors back through U, normalizing
    the sign of the first nonzero entry."""
    n = len(U)
    res = set()
    for v in vecs:
        w = tuple(sum(v[i] * U[i][j] for i in range(n)) for j in range(n))
        for e in w:
            if e:
                if e < 0:
                    w = tuple(-t for t in w)
                break
        res.add(w)
    return sorted(res)


def short_vectors(gram, bound, budget=None):
    """All nonzero integer vectors x, one per {x, -x} pair, with
    x^T G x <= bound, for an exact positive definite Gram matrix.

    The search-tree pruning bounds use floating point with a generous
    outward slack (relative margin 1e-6 against rounding error of order
    1e-12), and every surviving candidate is verified with exact integer
    arithmetic, so the returned set is exact."""
    n = len(gram)
    den = 1
    for row in gram:
        for e in row:
            e = Fraction(e)
            den = den * e.denominator // math.gcd(den, e.denominator)
    G = [[int(Fraction(gram[i][j]) * den) for j in range(n)] for i in range(n)]
    G, U = _gram_lll(G)
    bound_exact = Fraction(bound) * den
    # float Cholesky: q(x) = sum_i d[i] * (x_i - c_i(x_{i+1..}))^2
    d = [0.0] * n
    mu = [[0.0] * n for _ in range(n)]
    for i in range(n):
        d[i] = G[i][i] - sum(d[k] * mu[k][i] * mu[k][i] for k in range(i))
        assert d[i] > 0, "Gram matrix not positive definite"
        for j in range(i + 1, n):
            mu[i][j] = (G[i][j] - sum(d[k] * mu[k][i] * mu[k][j]
                                      for k in range(i))) / d[i]
    slack = 1e-6 * float(bound_exact) + 1e-6
    x = [0] * n
    out = []
    counter = [0]

    def qform(v):
        s = 0
        for i in range(n):
            vi = v[i]
            if vi:
                s += G[i][i] * vi * vi
                for j in range(i + 1, n):
                    if v[j]:
                        s += 2 * G[i][j] * vi * v[j]
        return s

    def rec(i, rem):
        counter[0] += 1
        if budget is not None and counter[0] > budget:
            raise CMBudgetError("short-vector enumeration budget exceeded")
        if i < 0:
            v = tuple(x)
            if any(v):
                for e in v:
                    if e:
                        if e < 0:
                            v = tuple(-w for w in v)
                        break
                if qform(v) <= bound_exact:
                    out.append(v)
            return
        c = -sum(mu[i][j] * x[j] for j in range(i + 1, n))
        r = math.sqrt(max(rem, 0.0) / d[i])
        for xi in range(math.ceil(c - r - 1e-9), math.floor(c + r + 1e-9) + 1):
            x[i] = xi
            rec(i - 1, rem - d[i] * (xi - c) ** 2)
        x[i] = 0

    rec(n - 1, float(bound_exact) + slack)
    return _to_original_coords(out, U)


def trace_min_vectors(gram, budget=None):
    """Nonzero integer vectors (one per {x, -x} pair) attaining the
    minimum of x^T G x, for an exact positive definite Gram matrix.

    Fincke-Pohst search with a shrinking radius; pruning uses floating
    point with outward slack and every candidate is verified with exact
    integer arithmetic, so the minimum and the attaining set are exact."""
    n = len(gram)
    den = 1
    for row in gram:
        for e in row:
            e = Fraction(e)
            den = den * e.denominator // math.gcd(den, e.denominator)
    G = [[int(Fraction(gram[i][j]) * den) for j in range(n)] for i in range(n)]
    G, U = _gram_lll(G)
    d = [0.0] * n
    mu = [[0.0] * n for _ in range(n)]
    for i in range(n):
        d[i] = G[i][i] - sum(d[k] * mu[k][i] * mu[k][i] for k in range(i))
        assert d[i] > 0, "Gram matrix not positive definite"
        for j in range(i + 1, n):
            mu[i][j] = (G[i][j] - sum(d[k] * mu[k][i] * mu[k][j]
                                      for k in range(i))) / d[i]

    def qform(v):
        s = 0
        for i in range(n):
            vi = v[i]
            if vi:
                s += G[i][i] * vi * vi
                for j in range(i + 1, n):
                    if v[j]:
                        s += 2 * G[i][j] * vi * v[j]
        return s

    # the unit vectors give a valid initial radius
    state = {"best": min(G[i][i] for i in range(n)), "out": set()}
    x = [0] * n
    counter = [0]

    def rec(i, acc):
        counter[0] += 1
        if budget is not None and counter[0] > budget:
            raise CMBudgetError("short-vector enumeration budget exceeded")
        if i < 0:
            v = tuple(x)
            if any(v):
                for e in v:
                    if e:
                        if e < 0:
                            v = tuple(-w for w in v)
                        break
                q = qform(v)
                if q < state["best"]:
                    state["best"] = q
                    state["out"] = {v}
                elif q == state["best"]:
                    state["out"].add(v)
            return
        c = -sum(mu[i][j] * x[j] for j in range(i + 1, n))
        T = (state["best"] * (1 + 1e-6) + 1e-6 - acc) / d[i]
        if T < 0:
            return
        r = math.sqrt(T)
        lo, hi = math.ceil(c - r - 1e-9), math.floor(c + r + 1e-9)
        # search from the center outward so the radius shrinks early
        for xi in sorted(range(lo, hi + 1), key=lambda t: abs(t - c)):
            step = acc + d[i] * (xi - c) ** 2
            if step <= state["best"] * (1 + 1e-6) + 1e-6:
                x[i] = xi
                rec(i - 1, step)
        x[i] = 0

    rec(n - 1, 0.0)
    assert state["out"], "minimum search returned no vector"
    return _to_original_coords(state["out"], U)


# ---------------------------------------------------------------------------
# integer 4-vector kernel (coordinates w.r.t. (1, w, g, wg) times 1/den)

def _vmul(mt, v, w):
    """Product of two integer coordinate vectors via the multiplication
    table mt[i][j] = coordinates of basis_i * basis_j."""
    r0 = r1 = r2 = r3 = 0
    for i in range(4):
        vi = v[i]
        if not vi:
            continue
        row = mt[i]
        for j in range(4):
            wj = w[j]
            if not wj:
                continue
            c = vi * wj
            t = row[j]
            r0 += c * t[0]
            r1 += c * t[1]
            r2 += c * t[2]
            r3 += c * t[3]
    return (r0, r1, r2, r3)


def _vconj(cj, v):
    """K/F-conjugate of an integer coordinate vector."""
    r0 = r1 = r2 = r3 = 0
    for i in range(4):
        vi = v[i]
        if vi:
            t = cj[i]
            r0 += vi * t[0]
            r1 += vi * t[1]
            r2 += vi * t[2]
            r3 += vi * t[3]
    return (r0, r1, r2, r3)


def _vcombine(rows, coeffs):
    """Integer linear combination of coordinate vectors."""
    r = [0, 0, 0, 0]
    for c, row in zip(coeffs, rows):
        if c:
            r[0] += c * row[0]
            r[1] += c * row[1]
            r[2] += c * row[2]
            r[3] += c * row[3]
    return tuple(r)


# ---------------------------------------------------------------------------
# lattices in K

class KLattice:
    """Full-rank Z-lattice in K; rows/den in coordinates (1, w, g, wg)."""

    __slots__ = ("ext", "den", "rows", "_hash")

    def __init__(self, ext, den, rows):
        g = den
        for r in rows:
            for e in r:
                g = math.gcd(g, abs(e))
        self.ext = ext
        self.den = den // g
        self.rows = tuple(tuple(e // g for e in r) for r in rows)
        self._hash = None

    @staticmethod
    def from_vectors(ext, vecs):
        den = 1
        for v in vecs:
            for e in v:
                e = Fraction(e)
                den = den * e.denominator // math.gcd(den, e.denominator)
        rows = [tuple(int(Fraction(e) * den) for e in v) for v in vecs]
        return KLattice(ext, den, _hnf_rect(rows, 4))

    def vectors(self):
        return [tuple(Fraction(e, self.den) for e in r) for r in self.rows]

    def elements(self):
        return [self.ext.from_vec(v) for v in self.vectors()]

    def coords_of(self, z):
        return _triangular_solve(self.rows, self.den, self.ext.to_vec(z))

    def contains(self, z) -> bool:
        return self.coords_of(z) is not None

    def det(self) -> Fraction:
        p = 1
        for i in range(4):
            p *= self.rows[i][i]
        return Fraction(p, self.den ** 4)

    def key(self):
        return (self.den, self.rows)

    def __eq__(self, other):
        return (isinstance(other, KLattice) and self.ext is other.ext
                and self.key() == other.key())

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __repr__(self):
        return "KLattice(den=%d, diag=%s)" % (
            self.den, [self.rows[i][i] for i in range(4)])


# ---------------------------------------------------------------------------

class CMExtension:
    """K = F(gamma), gamma^2 = t*gamma - u, with t^2 - 4u totally negative."""

    def __init__(self, F: RealQuadraticField, u: Elt, t: Elt):
        assert t.is_integral() and u.is_integral()
        self.F = F
        self.t = t
        self.u = u
        self.delta = t * t - 4 * u
        assert self.delta.sign_at(0) < 0 and self.delta.sign_at(1) < 0
        self._orders = {}
        self._symbols = {}
        self._good_gens = {}
        self._h = None
        self._torsion = None
        self._vtab = None
        self.maximal = self._maximal_order()
        self.abs_disc = self._lattice_disc(self.maximal)
        assert self.abs_disc > 0
        self.gamma_conductor = self.conductor_of(self.standard_lattice())
        self.rel_disc = (FracIdeal.from_gens(F, [self.delta])
                         * self.gamma_conductor.inverse() ** 2)
        assert self.rel_disc.is_integral()
        assert self.abs_disc == self.rel_disc.norm() * F.d ** 2

    # -- element arithmetic (pairs (a, b) meaning a + b*gamma) -----------
    def from_F(self, e):
        if not isinstance(e, Elt):
            e = self.F.elt(e)
        return (e, self.F.zero())

    def one(self):
        return self.from_F(1)

    def gamma(self):
        return (self.F.zero(), self.F.one())

    def mul(self, z1, z2):
        a1, b1 = z1
        a2, b2 = z2
        bb = b1 * b2
        return (a1 * a2 - self.u * bb, a1 * b2 + b1 * a2 + self.t * bb)

    def add(self, z1, z2):
        return (z1[0] + z2[0], z1[1] + z2[1])

    def neg(self, z):
        return (-z[0], -z[1])

    def conj(self, z):
        a, b = z
        return (a + self.t * b, -b)

    def rel_trace(self, z) -> Elt:
        return 2 * z[0] + self.t * z[1]

    def rel_norm(self, z) -> Elt:
        a, b = z
        return a * a + a * b * self.t + b * b * self.u

    def abs_norm(self, z) -> Fraction:
        return self.rel_norm(z).norm()

    def abs_trace(self, z) -> Fraction:
        return self.rel_trace(z).trace()

    def inv(self, z):
        n = self.rel_norm(z)
        zc = self.conj(z)
        return (zc[0] / n, zc[1] / n)

    def pow(self, z, n: int):
        r = self.one()
        b = z
        while n:
            if n & 1:
                r = self.mul(r, b)
            b = self.mul(b, b)
            n >>= 1
        return r

    def to_vec(self, z):
        a, b = z
        return (a.x, a.y, b.x, b.y)

    def from_vec(self, v):
        return (self.F.elt(v[0], v[1]), self.F.elt(v[2], v[3]))

    def eq(self, z1, z2):
        return z1[0] == z2[0] and z1[1] == z2[1]

    def is_zero(self, z) -> bool:
        return z[0].is_zero() and z[1].is_zero()

    # -- integer kernel tables -------------------------------------------
    def _tables(self):
        """(mul table, conjugation matrix, trace vector, Tr w, Nm w) with
        all entries integral; products, conjugates and absolute traces of
        coordinate vectors then need no rational arithmetic."""
        if self._vtab is None:
            B = self._basis_elements()
            mt = []
            for a in B:
                row = []
                for b in B:
                    v = self.to_vec(self.mul(a, b))
                    assert all(e.denominator == 1 for e in v)
                    row.append(tuple(int(e) for e in v))
                mt.append(tuple(row))
            cj = []
            tr = []
            for b in B:
                v = self.to_vec(self.conj(b))
                assert all(e.denominator == 1 for e in v)
                cj.append(tuple(int(e) for e in v))
                e = self.abs_trace(b)
                assert e.denominator == 1
                tr.append(int(e))
            w = self.F.omega()
            tw, nw = w.trace(), w.norm()
            assert tw.denominator == 1 and nw.denominator == 1
            self._vtab = (tuple(mt), tuple(cj), tuple(tr), int(tw), int(nw))
        return self._vtab

    def _elt_int_vec(self, z):
        """(integer coordinate vector, denominator) of a K element."""
        v = self.to_vec(z)
        den = 1
        for e in v:
            den = den * e.denominator // math.gcd(den, e.denominator)
        return tuple(int(e * den) for e in v), den

    def _vec_rel_norm(self, v):
        """Integer F-coordinates (x, y) of z * conj(z) for a vector z."""
        mt, cj = self._tables()[:2]
        n = _vmul(mt, v, _vconj(cj, v))
        assert n[2] == 0 and n[3] == 0
        return n[0], n[1]

    def _vec_abs_norm_int(self, v) -> int:
        """Nm_{K/Q} of an integer coordinate vector (exact integer)."""
        x, y = self._vec_rel_norm(v)
        _, _, _, tw, nw = self._tables()
        return x * x + tw * x * y + nw * y * y

    def _vec_gram(self, rows, den):
        """Trace form Gram matrix of coordinate vectors rows/den."""
        mt, cj, tr = self._tables()[:3]
        conj_rows = [_vconj(cj, r) for r in rows]
        den2 = den * den
        return [[Fraction(sum(t * e for t, e in
                              zip(tr, _vmul(mt, ri, cf))), den2)
                 for cf in conj_rows] for ri in rows]

    def _lat_scale_vec(self, L: KLattice, v, vden) -> KLattice:
        """The lattice L * (v / vden)."""
        mt = self._tables()[0]
        vecs = [_vmul(mt, r, v) for r in L.rows]
        return KLattice(self, L.den * vden, _hnf_rect(vecs, 4))

    # -- lattice helpers -------------------------------------------------
    def standard_lattice(self) -> KLattice:
        """R[gamma] = span(1, omega, gamma, omega*gamma)."""
        return KLattice(self, 1, ((1, 0, 0, 0), (0, 1, 0, 0),
                                  (0, 0, 1, 0), (0, 0, 0, 1)))

    def _basis_elements(self):
        F = self.F
        return [self.from_F(1), self.from_F(F.omega()),
                self.gamma(), self.mul(self.from_F(F.omega()), self.gamma())]

    def lat_mul(self, L1: KLattice, L2: KLattice) -> KLattice:
        mt = self._tables()[0]
        vecs = [_vmul(mt, a, b) for a in L1.rows for b in L2.rows]
        return KLattice(self, L1.den * L2.den, _hnf_rect(vecs, 4))

    def lat_scale(self, L: KLattice, z) -> KLattice:
        zv, zden = self._elt_int_vec(z)
        return self._lat_scale_vec(L, zv, zden)

    def ideal_lattice(self, I: FracIdeal, L: KLattice) -> KLattice:
        """The lattice I * L for a fractional R-ideal I."""
        mt = self._tables()[0]
        gens = [self._elt_int_vec(self.from_F(g)) for g in I.basis()]
        lcmg = 1
        for _, gd in gens:
            lcmg = lcmg * gd // math.gcd(lcmg, gd)
        vecs = []
        for gv, gd in gens:
            m = lcmg // gd
            for r in L.rows:
                vecs.append(tuple(m * e for e in _vmul(mt, gv, r)))
        return KLattice(self, L.den * lcmg, _hnf_rect(vecs, 4))

    def _inv_matrix(self, L: KLattice):
        """Exact inverse of the (upper triangular) basis matrix of L, so
        that multiplying a coordinate vector gives L-coordinates."""
        n = 4
        M = [[Fraction(L.rows[i][j], L.den) for j in range(n)] for i in range(n)]
        inv = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
        for i in range(n - 1, -1, -1):
            piv = M[i][i]
            inv[i] = [e / piv for e in inv[i]]
            M[i] = [e / piv for e in M[i]]
            for j in range(i):
                f = M[j][i]
                if f:
                    M[j] = [a - f * b for a, b in zip(M[j], M[i])]
                    inv[j] = [a - f * b for a, b in zip(inv[j], inv[i])]
        return inv

    def colon(self, A: KLattice, B: KLattice) -> KLattice:
        """(A : B) = {x in K : x*B subset A}."""
        mt = self._tables()[0]
        Ainv = self._inv_matrix(A)
        unit = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))
        W = []
        for b in B.rows:
            # column j of T = coordinates of basis_j * b; x = sum c_j basis_j
            # lies in (A : B) iff Ainv^T * T * c is integral for every b
            # (membership in A reads coordinates against the basis rows)
            cols = [_vmul(mt, u, b) for u in unit]
            for i in range(4):
                W.append(tuple(sum(Ainv[k][i] * cols[j][k]
                                   for k in range(4)) / B.den
                               for j in range(4)))
        vecs = _integral_preimage(W, 4)
        return KLattice.from_vectors(self, vecs)

    def conductor_of(self, S: KLattice) -> FracIdeal:
        """{x in F : x * Z_K subset S} as a fractional R-ideal."""
        Sinv = self._inv_matrix(S)
        F = self.F
        gens = [self.from_F(1), self.from_F(F.omega())]
        W = []
        for b in self.maximal.elements():
            cols = [self.to_vec(self.mul(g, b)) for g in gens]
            for i in range(4):
                W.append(tuple(sum(Sinv[k][i] * Fraction(cols[j][k])
                                   for k in range(4)) for j in range(2)))
        vecs = _integral_preimage(W, 2)
        return FracIdeal.from_gens(F, [F.elt(v[0], v[1]) for v in vecs])

    def _lattice_disc(self, L: KLattice) -> int:
        e = L.elements()
        M = [[self.abs_trace(self.mul(e[i], e[j])) for j in range(4)]
             for i in range(4)]
        det = Fraction(0)
        for perm in itertools.permutations(range(4)):
            sign = 1
            for i in range(4):
                for j in range(i + 1, 4):
                    if perm[i] > perm[j]:
                        sign = -sign
            det += sign * M[0][perm[0]] * M[1][perm[1]] * M[2][perm[2]] * M[3][perm[3]]
        assert det.denominator == 1
        return abs(int(det))

    # -- maximal order ---------------------------------------------------
    def _maximal_order(self) -> KLattice:
        S = self.standard_lattice()
        disc_ideal = FracIdeal.from_gens(self.F, [self.delta])
        for P, e in factor_ideal(disc_ideal):
            if e < 2:
                continue
            while True:
                S2 = self._enlarge_at(S, P)
                if S2 == S:
                    break
                S = S2
        els = S.elements()
        for a in els:
            for b in els:
                assert S.contains(self.mul(a, b))
        assert S.contains(self.one()) and S.contains(self.gamma())
        return S

    def _enlarge_at(self, S: KLattice, P: PrimeIdeal) -> KLattice:
        """One multiplier-ring step at P: S' = (J : J), J = radical of PS
        in S (nilpotents of S/PS all square to zero here)."""
        PS = self.ideal_lattice(P, S)
        M = []
        for v in PS.vectors():
            c = _triangular_solve(S.rows, S.den, v)
            assert c is not None
            M.append(c)
        H = _hnf_rect(M, 4)
        count = H[0][0] * H[1][1] * H[2][2] * H[3][3]
        if count > 200000:
            raise CMBudgetError("residue algebra too large for radical step")
        svecs = S.vectors()
        nil = []
        for c in itertools.product(range(H[0][0]), range(H[1][1]),
                                   range(H[2][2]), range(H[3][3])):
            v = tuple(sum(c[k] * svecs[k][j] for k in range(4))
                      for j in range(4))
            z = self.from_vec(v)
            if PS.contains(self.mul(z, z)):
                nil.append(self.to_vec(z))
        J = KLattice.from_vectors(
            self, nil + [self.to_vec(z) for z in PS.elements()])
        return self.colon(J, J)

    # -- splitting symbols -----------------------------------------------
    def good_generator(self, P: PrimeIdeal):
        """(z, disc(z)) with z in Z_K generating Z_K locally at P, i.e.
        v_P(disc z) = v_P(rel_disc)."""
        key = P.key()
        if key in self._good_gens:
            return self._good_gens[key]
        target = self.rel_disc.valuation_at(P)
        mvecs = self.maximal.vectors()
        for radius in (2, 4, 7):
            for coeffs in itertools.product(range(-radius, radius + 1), repeat=4):
                v = tuple(sum(Fraction(coeffs[k]) * mvecs[k][j]
                              for k in range(4)) for j in range(4))
                z = self.from_vec(v)
                if z[1].is_zero():
                    continue
                disc = self.rel_trace(z) ** 2 - 4 * self.rel_norm(z)
                if FracIdeal.from_gens(self.F, [disc]).valuation_at(P) == target:
                    self._good_gens[key] = (z, disc)
                    return self._good_gens[key]
        raise AssertionError("no P-good generator found")

    def symbol(self, P: PrimeIdeal) -> int:
        """(K/P): +1 split, -1 inert, 0 ramified."""
        key = P.key()
        if key in self._symbols:
            return self._symbols[key]
        if self.rel_disc.valuation_at(P) > 0:
            s = 0
        elif P.p == 2:
            s = 1 if self._roots_mod(P) else -1
        else:
            _, disc = self.good_generator(P)
            rr = ResidueRing(P)
            q = int(P.norm())
            p = self._ring_pow(rr, rr.reduce(disc), (q - 1) // 2)
            if p == rr.reduce(self.F.one()):
                s = 1
            else:
                assert p == rr.reduce(-self.F.one())
                s = -1
        self._symbols[key] = s
        return s

    @staticmethod
    def _ring_pow(rr: ResidueRing, r, n: int):
        out = rr.reduce(rr.field.one())
        b = r
        while n:
            if n & 1:
                out = rr.mul(out, b)
            b = rr.mul(b, b)
            n >>= 1
        return out

    def _roots_mod(self, P: PrimeIdeal):
        """Roots mod P of the characteristic polynomial of the P-good
        generator, by enumerating the residue field."""
        z, _ = self.good_generator(P)
        tr, nm = self.rel_trace(z), self.rel_norm(z)
        rr = ResidueRing(P)
        out = []
        for r in rr.elements():
            x = rr.lift(r)
            if P.contains(x * x - tr * x + nm):
                out.append(x)
        return out

    # -- torsion units and square roots ----------------------------------
    def sqrt_in_K(self, w):
        """The solutions x of x^2 = w in K, up to sign (one per pair)."""
        from .cusps import exact_sqrt
        c, dcoef = w
        t, u = self.t, self.u
        sols = []
        if dcoef.is_zero():
            r = exact_sqrt(c)
            if r is not None and not r.is_zero():
                sols.append(self.from_F(r))
        # x = a + b*gamma, b != 0: beta = b^2 satisfies
        # (t^2 - 4u) beta^2 - (2 t d + 4 c) beta + d^2 = 0
        A = t * t - 4 * u
        B = -(2 * t * dcoef + 4 * c)
        C = dcoef * dcoef
        disc = B * B - 4 * A * C
        rt = exact_sqrt(disc)
        if rt is not None:
            for sg in (1, -1):
                beta = (-B + sg * rt) / (2 * A)
                if beta.is_zero():
                    continue
                b = exact_sqrt(beta)
                if b is None or b.is_zero():
                    continue
                a = (dcoef - t * beta) / (2 * b)
                x = (a, b)
                if self.eq(self.mul(x, x), w) and not any(
                        self.eq(x, s) or self.eq(self.neg(x), s) for s in sols):
                    sols.append(x)
        return sols

    def torsion_units(self):
        """All roots of unity of K, as a list closed under multiplication."""
        if self._torsion is not None:
            return self._torsion
        from .cusps import exact_sqrt
        F = self.F
        found = {self.to_vec(self.one()): self.one(),
                 self.to_vec(self.from_F(-1)): self.from_F(-1)}
        # traces tau = zeta_m + zeta_m^{-1} of primitive m-th roots, phi(m) <= 4
        cands = [(3, [F.elt(-1)]), (4, [F.elt(0)]), (6, [F.elt(1)])]
        r5 = exact_sqrt(F.elt(5))
        if r5 is not None:
            cands += [(5, [(-1 + r5) / 2, (-1 - r5) / 2]),
                      (10, [(1 + r5) / 2, (1 - r5) / 2])]
        r2 = exact_sqrt(F.elt(2))
        if r2 is not None:
            cands.append((8, [r2, -r2]))
        r3 = exact_sqrt(F.elt(3))
        if r3 is not None:
            cands.append((12, [r3, -r3]))
        denom = 4 * self.u - self.t * self.t  # totally positive
        for m, taus in cands:
            for tau in taus:
                beta = (4 - tau * tau) / denom
                b = exact_sqrt(beta)
                if b is None or b.is_zero():
                    continue
                z = ((tau - b * self.t) / 2, b)
                assert self.rel_norm(z) == F.one()
                assert self.rel_trace(z) == tau
                p = z
                for _ in range(m):
                    found[self.to_vec(p)] = p
                    p = self.mul(p, z)
                assert self.eq(p, z)
        # close under multiplication (e.g. zeta_3 and i generate zeta_12)
        while True:
            new = {}
            vals = list(found.values())
            for z1 in vals:
                for z2 in vals:
                    p = self.mul(z1, z2)
                    v = self.to_vec(p)
                    if v not in found:
                        new[v] = p
            if not new:
                break
            found.update(new)
        tors = list(found.values())
        n = len(tors)
        orders = []
        for z in tors:
            k, p = 1, z
            while not self.eq(p, self.one()):
                p = self.mul(p, z)
                k += 1
            orders.append(k)
        assert max(orders) == n and n % 2 == 0  # cyclic, contains -1
        for z in tors:
            assert self.maximal.contains(z)
        self._torsion = tors
        return tors

    # -- orders ----------------------------------------------------------
    def order(self, cond: FracIdeal) -> "CMOrder":
        key = cond.key()
        if key not in self._orders:
            self._orders[key] = CMOrder(self, cond)
        return self._orders[key]

    # -- ideals of the maximal order -------------------------------------
    def minkowski_bound(self) -> int:
        # (4!/4^4) * (4/pi)^2 = 3/(2 pi^2) < 0.152
        s = math.isqrt(self.abs_disc) + 1
        return int(Fraction(152, 1000) * s) + 1

    def prime_lattices(self, limit: int):
        """Prime ideals of Z_K of absolute norm <= limit, as lattices,
        each with its absolute norm."""
        out = []
        F = self.F
        for p in range(2, limit + 1):
            if not isprime(p):
                continue
            for P in primes_above(F, p):
                np = int(P.norm())
                if np > limit:
                    continue
                s = self.symbol(P)
                if s == -1:
                    if np * np <= limit:
                        out.append((self.ideal_lattice(P, self.maximal),
                                    np * np))
                    continue
                roots = self._roots_mod(P)
                z, _ = self.good_generator(P)
                PZ = self.ideal_lattice(P, self.maximal)
                assert len(roots) == (2 if s == 1 else 1)
                for r in roots:
                    gen = self.add(z, self.neg(self.from_F(r)))
                    vecs = ([self.to_vec(w) for w in PZ.elements()]
                            + [self.to_vec(self.mul(gen, e))
                               for e in self.maximal.elements()])
                    L = KLattice.from_vectors(self, vecs)
                    assert L.det() / self.maximal.det() == np
                    out.append((L, np))
                if s == 0:
                    assert self.lat_mul(out[-1][0], out[-1][0]) == PZ
        return out

    def lattice_abs_norm(self, L: KLattice) -> Fraction:
        return L.det() / self.maximal.det()

    def reduce_ideal(self, L: KLattice, budget=None) -> KLattice:
        """A small integral lattice in the ideal class of L."""
        n = self.lattice_abs_norm(L)
        if n <= self.minkowski_bound():
            return L
        Linv = self.colon(self.maximal, L)
        gram = self._vec_gram(Linv.rows, Linv.den)
        best = None
        for v in trace_min_vectors(gram, budget=budget):
            z = _vcombine(Linv.rows, v)
            nz = self._vec_abs_norm_int(z)
            if best is None or nz < best[1]:
                best = (z, nz)
        out = self._lat_scale_vec(L, best[0], Linv.den)
        assert self.lattice_abs_norm(out).denominator == 1
        return out

    def principal_generator(self, L: KLattice, budget=None):
        """z with z*Z_K = L for an integral Z_K-ideal lattice L, or None.

        The relative norm ideal of L must be narrow-principal with a
        totally positive generator mu; any generator z of L then has
        rel_norm(z) = mu up to a totally positive unit, and after
        adjusting by a power of the fundamental unit it satisfies
        Tr_{K/Q}(z conj(z) / mu) = 4 exactly (the AM-GM minimum), so a
        bounded quadratic-form search over two unit classes finds it.
        """
        N = self.lattice_abs_norm(L)
        assert N.denominator == 1
        mt, cj, tr = self._tables()[:3]
        rows = L.rows
        den2 = L.den * L.den

        def relnorm_elt(v):
            x, y = self._vec_rel_norm(v)
            return self.F.elt(Fraction(x, den2), Fraction(y, den2))

        gens = [relnorm_elt(r) for r in rows]
        gens += [relnorm_elt(tuple(x + y for x, y in zip(a, b)))
                 for a, b in itertools.combinations(rows, 2)]
        nid = FracIdeal.from_gens(self.F, [g for g in gens if not g.is_zero()])
        extra = itertools.combinations(rows, 3)
        while nid.norm() != N:
            try:
                combo = next(extra)
            except StopIteration:
                raise AssertionError("relative norm ideal did not stabilize")
            s = _vcombine(combo, (1, 1, 1))
            if any(s):
                nid = nid + FracIdeal.from_gens(self.F, [relnorm_elt(s)])
        mu0 = tp_generator(nid)
        if mu0 is None:
            return None
        conj_rows = [_vconj(cj, r) for r in rows]
        for mu in (mu0, mu0 * self.F.eps_plus):
            mu_inv = 1 / mu
            mv, md = self._elt_int_vec(self.from_F(mu_inv))
            gram = [[Fraction(sum(t * e for t, e in
                                  zip(tr, _vmul(mt, _vmul(mt, ri, cf), mv))),
                              den2 * md)
                     for cf in conj_rows] for ri in rows]
            for v in short_vectors(gram, Fraction(4), budget=budget):
                z = _vcombine(rows, v)
                if relnorm_elt(z) == mu:
                    assert self._lat_scale_vec(self.maximal, z, L.den) == L
                    return self.from_vec(tuple(Fraction(e, L.den) for e in z))
        return None

    def class_number(self, budget=None) -> int:
        """h(Z_K), by closing the trivial class under multiplication by
        the primes below the Minkowski bound."""
        if self._h is not None:
            return self._h
        if budget is None:
            budget = DEFAULT_BUDGET
        primes = self.prime_lattices(self.minkowski_bound())
        reps = [self.maximal]
        i = 0
        ops = 0
        while i < len(reps):
            for P, _np in primes:
                ops += 1
                if ops * 100 > budget:
                    raise CMBudgetError("class-group closure budget exceeded")
                J = self.reduce_ideal(self.lat_mul(reps[i], P), budget=budget)
                if self._class_index(J, reps, budget) is None:
                    reps.append(J)
            i += 1
        self._h = len(reps)
        return self._h

    def _class_index(self, J: KLattice, reps, budget):
        for idx, C in enumerate(reps):
            Q = self.lat_mul(J, self.colon(self.maximal, C))
            # clear the denominator: same ideal class, integral lattice
            Q = KLattice(self, 1, Q.rows)
            if self.principal_generator(self.reduce_ideal(Q, budget=budget),
                                        budget=budget) is not None:
                return idx
        return None


class CMOrder:
    """The order S = R + cond * Z_K inside a CMExtension."""

    def __init__(self, ext: CMExtension, cond: FracIdeal):
        assert cond.is_integral()
        self.ext = ext
        self.cond = cond
        vecs = [ext.to_vec(ext.from_F(1)),
                ext.to_vec(ext.from_F(ext.F.omega()))]
        for c in cond.basis():
            for e in ext.maximal.elements():
                vecs.append(ext.to_vec(ext.mul(ext.from_F(c), e)))
        self.lattice = KLattice.from_vectors(ext, vecs)
        assert ext.conductor_of(self.lattice) == cond
        self._tors = None
        self._Q = None

    def torsion(self):
        if self._tors is None:
            self._tors = [z for z in self.ext.torsion_units()
                          if self.lattice.contains(z)]
        return self._tors

    def hasse_index(self) -> int:
        """Q(S) = [S^x : mu_S R^x], which is 1 or 2; it is 2 exactly when
        some zeta * s (zeta torsion, s in {1, -1, eps, -eps}) has a square
        root in S^x outside mu_S R^x."""
        if self._Q is not None:
            return self._Q
        ext = self.ext
        F = ext.F
        tors = self.torsion()
        self._Q = 1
        for zeta in tors:
            for s in (F.one(), -F.one(), F.eps, -F.eps):
                w = ext.mul(zeta, ext.from_F(s))
                for x in ext.sqrt_in_K(w):
                    if not self.lattice.contains(x):
                        continue
                    in_muR = False
                    for z2 in tors:
                        # x * z2^{-1} = x * conj(z2) since |z2| = 1
                        if ext.mul(x, ext.conj(z2))[1].is_zero():
                            in_muR = True
                            break
                    if not in_muR:
                        self._Q = 2
                        return self._Q
        return self._Q

    def unit_index_in_maximal(self) -> int:
        """[Z_K^x : S^x]."""
        ext = self.ext
        wK = len(ext.torsion_units())
        QK = ext.order(FracIdeal.one(ext.F)).hasse_index()
        wS = len(self.torsion())
        QS = self.hasse_index()
        num = QK * wK
        den = QS * wS
        assert num % den == 0
        return num // den

    def w(self) -> int:
        """#(S^x / R^x) = (#torsion / 2) * Q(S)."""
        return (len(self.torsion()) // 2) * self.hasse_index()

    def class_number(self, budget=None) -> int:
        """h(S) by the conductor formula over h(Z_K)."""
        ext = self.ext
        hK = ext.class_number(budget=budget)
        val = Fraction(hK) * int(self.cond.norm())
        for P, _e in factor_ideal(self.cond):
            val *= 1 - Fraction(ext.symbol(P), int(P.norm()))
        val /= self.unit_index_in_maximal()
        assert val.denominator == 1 and val > 0
        return int(val)


# ---------------------------------------------------------------------------
# public constructors

_registry: dict[int, list[CMExtension]] = {}


def cm_extension(F: RealQuadraticField, u: Elt, t: Elt):
    """(ext, z) where ext is the cached extension isomorphic to
    F[x]/(x^2 - t x + u) and z in ext satisfies z^2 = t z - u."""
    from .cusps import exact_sqrt
    delta = t * t - 4 * u
    assert delta.sign_at(0) < 0 and delta.sign_at(1) < 0, \
        "t^2 - 4u must be totally negative"
    bucket = _registry.setdefault(F.D, [])
    for ext in bucket:
        s = exact_sqrt(delta / ext.delta)
        if s is not None:
            z = ((t - s * ext.t) / 2, s)
            assert ext.eq(ext.mul(z, z), (t * z[0] - u, t * z[1]))
            return ext, z
    ext = CMExtension(F, u, t)
    bucket.append(ext)
    return ext, ext.gamma()


def divisor_ideals_of(I: FracIdeal):
    """All integral divisors of an integral ideal, sorted by (norm, key)."""
    out = [FracIdeal.one(I.field)]
    for P, e in factor_ideal(I):
        out = [d * P ** k for d in out for k in range(e + 1)]
    return sorted(out, key=lambda J: (J.norm(), J.key()))


@dataclass
class CMOrderData:
    field: RealQuadraticField
    u: Elt
    t: Elt
    conductor: FracIdeal        # conductor of R[z] for z^2 = t z - u
    divisor: FracIdeal          # conductor of this order S
    h: int                      # h(S)
    Q: int                      # Hasse unit index of S
    w: int                      # #(S^x / R^x)
    h_K: int
    unit_index_K: int           # [Z_K^x : R^x]
    ext: CMExtension
    order: CMOrder


def cm_order_data(F: RealQuadraticField, u, t, divisor=None,
                  budget=None) -> CMOrderData:
    """Class number, unit data and conductor for the order of the given
    conductor divisor inside K = F[x]/(x^2 - t x + u)."""
    if not isinstance(u, Elt):
        u = F.elt(u)
    if not isinstance(t, Elt):
        t = F.elt(t)
    ext, z = cm_extension(F, u, t)
    vecs = [ext.to_vec(ext.from_F(1)), ext.to_vec(ext.from_F(F.omega())),
            ext.to_vec(z), ext.to_vec(ext.mul(ext.from_F(F.omega()), z))]
    cond = ext.conductor_of(KLattice.from_vectors(ext, vecs))
    if divisor is None:
        divisor = cond
    assert divisor.is_integral() and (cond * divisor.inverse()).is_integral(), \
        "divisor must divide the conductor"
    order = ext.order(divisor)
    maximal = ext.order(FracIdeal.one(F))
    return CMOrderData(
        field=F, u=u, t=t, conductor=cond, divisor=divisor,
        h=order.class_number(budget=budget),
        Q=order.hasse_index(), w=order.w(),
        h_K=ext.class_number(budget=budget),
        unit_index_K=maximal.w(),
        ext=ext, order=order)
