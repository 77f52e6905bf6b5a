"""Class group and narrow class group of a real quadratic field.

The narrow class group is realized as the form class group of discriminant
d_F: every narrow ideal class is labelled by the cycle of reduced
indefinite binary quadratic forms attached to any representative ideal,
and the group law is ideal multiplication followed by re-labelling.  The
wide class group is the quotient by the narrow class of (sqrt(D)).
"""

from __future__ import annotations

import math
from functools import lru_cache

from sympy import isprime

from .abgroup import FiniteAbelianGroup
from .field import RealQuadraticField
from .ideals import FracIdeal, primes_above, residue_units


# ---------------------------------------------------------------------------
# reduced indefinite binary quadratic forms of discriminant d_F

def _is_reduced(a: int, b: int, c: int, Delta: int) -> bool:
    if b <= 0 or b * b >= Delta:
        return False
    t = 2 * abs(a)
    if Delta >= (t + b) ** 2:      # need sqrt(Delta) < 2|a| + b
        return False
    if t > b and (t - b) ** 2 >= Delta:  # need 2|a| < sqrt(Delta) + b
        return False
    return True


def _rho(a: int, b: int, c: int, Delta: int):
    """One reduction step (a,b,c) -> (c, r, (r^2-Delta)/(4c))."""
    s = math.isqrt(Delta)
    ac = abs(c)
    if ac > s:
        lo = -ac + 1
    else:
        lo = s - 2 * ac + 1
    # r = -b (mod 2|c|) in the window [lo, lo + 2|c| - 1]
    r = lo + ((-b - lo) % (2 * ac))
    return (c, r, (r * r - Delta) // (4 * c))


def reduce_form(f, Delta):
    a, b, c = f
    for _ in range(10000):
        if _is_reduced(a, b, c, Delta):
            return (a, b, c)
        a, b, c = _rho(a, b, c, Delta)
    raise RuntimeError("form reduction did not terminate")


def form_cycle(f, Delta):
    """The rho-cycle of the reduced form equivalent to f."""
    f = reduce_form(f, Delta)
    cyc = [f]
    g = _rho(*f, Delta)
    while g != f:
        cyc.append(g)
        g = _rho(*g, Delta)
    return cyc


def cycle_token(f, Delta):
    """Canonical label of the proper (narrow) class of f: the smallest
    reduced form with a > 0 in its cycle."""
    return min(g for g in form_cycle(f, Delta) if g[0] > 0)


def all_reduced_forms(Delta):
    out = []
    s = math.isqrt(Delta)
    for b in range(1, s + 1):
        if (Delta - b * b) % 4:
            continue
        m = (Delta - b * b) // 4  # = -a*c > 0
        for a in range(1, math.isqrt(m) + 1):
            if m % a:
                continue
            for aa in {a, m // a}:
                for sign in (1, -1):
                    cand = (sign * aa, b, -m // (sign * aa))
                    if _is_reduced(*cand, Delta):
                        out.append(cand)
    return sorted(set(out))


# ---------------------------------------------------------------------------
# ideals <-> forms

def _oriented_form(I: FracIdeal):
    """(alpha, beta, (a,b,c)) with Nm(x*alpha + y*beta)/Nm(I) = ax^2+bxy+cy^2."""
    F = I.field
    alpha, beta = I.basis()
    # orientation: (alpha*conj(beta) - conj(alpha)*beta)/sqrt(D) > 0 at v
    cross = alpha * beta.conj() - alpha.conj() * beta
    if (cross / F.sqrtD()).sign_at(0) < 0:
        alpha, beta = beta, alpha
    n = I.norm()
    a = alpha.norm() / n
    b = (alpha * beta.conj() + alpha.conj() * beta) / n  # Tr(alpha*conj(beta))/n
    c = beta.norm() / n
    b = b.as_rational()
    assert a.denominator == b.denominator == c.denominator == 1
    f = (int(a), int(b), int(c))
    assert f[1] ** 2 - 4 * f[0] * f[2] == F.d
    return alpha, beta, f


def form_of_ideal(I: FracIdeal):
    """Reduced-cycle token of the narrow class of I."""
    _, _, f = _oriented_form(I)
    return cycle_token(f, I.field.d)


def ideal_of_form(F: RealQuadraticField, f) -> FracIdeal:
    a, b, c = f
    assert a > 0
    # Z*a + Z*(-b + sqrt(d_F))/2; sqrt(d_F) = sqrt(D) or 2*sqrt(D)
    root = F.sqrtD() if F.d == F.D else 2 * F.sqrtD()
    return FracIdeal.from_gens(F, [F.elt(a), (root - b) / 2 + F.elt(0)])


# ---------------------------------------------------------------------------

class ClassGroupData:
    """Cl(R) and Cl+(R) with deterministic representatives."""

    def __init__(self, F: RealQuadraticField):
        self.field = F
        Delta = F.d
        forms = all_reduced_forms(Delta)
        tokens = sorted({cycle_token(f, Delta) for f in forms})
        self.h_plus = len(tokens)

        def op(t1, t2):
            return form_of_ideal(ideal_of_form(F, t1) * ideal_of_form(F, t2))

        identity = form_of_ideal(FracIdeal.one(F))
        self.narrow_group = FiniteAbelianGroup(tokens, op, identity)
        self._identity = identity
        # kernel of Cl+ -> Cl: the narrow class of (sqrt(D))
        tw = form_of_ideal(FracIdeal.from_gens(F, [F.sqrtD()]))
        self._twist = tw
        ker = self.narrow_group.subgroup([tw])
        self.h = self.h_plus // len(ker)
        assert (self.h_plus == self.h) == (F.unit_norm == -1 or len(ker) == 1)
        # wide class group as quotient of the narrow one
        cosets = {}
        for t in tokens:
            cos = frozenset(op(t, k) for k in ker)
            cosets.setdefault(cos, []).append(t)
        reps = {cos: min(mem) for cos, mem in cosets.items()}
        self._wide_cos = {t: reps[cos] for cos, mem in cosets.items() for t in mem}
        self.wide_group = FiniteAbelianGroup(
            sorted(reps.values()), lambda x, y: self._wide_cos[op(x, y)],
            self._wide_cos[identity])
        self.narrow_structure = list(self.narrow_group.orders)
        self.wide_structure = list(self.wide_group.orders)
        self._tokens = tokens

    # -- class labels ----------------------------------------------------
    def narrow_token(self, I: FracIdeal):
        return form_of_ideal(I)

    def narrow_index(self, I: FracIdeal) -> int:
        return self._tokens.index(form_of_ideal(I))

    def wide_token(self, I: FracIdeal):
        return self._wide_cos[form_of_ideal(I)]

    def is_narrow_principal(self, I: FracIdeal) -> bool:
        return form_of_ideal(I) == self._identity

    def is_principal(self, I: FracIdeal) -> bool:
        return self.wide_token(I) == self._wide_cos[self._identity]

    # -- representatives -------------------------------------------------
    def narrow_reps(self, coprime_to: int = 1) -> list[FracIdeal]:
        """One integral ideal per narrow class, coprime to 30*coprime_to,
        deterministic (ordered by their class token)."""
        return self._reps(self._tokens, form_of_ideal, coprime_to)

    def wide_reps(self, coprime_to: int = 1) -> list[FracIdeal]:
        toks = sorted(set(self._wide_cos.values()))
        return self._reps(toks, lambda I: self._wide_cos[form_of_ideal(I)], coprime_to)

    def _reps(self, tokens, label, coprime_to: int):
        F = self.field
        avoid = 30 * max(1, coprime_to)
        found = {}
        one = FracIdeal.one(F)
        found[label(one)] = one
        p = 1
        small_primes = []
        while len(found) < len(tokens):
            p += 1
            if p > 10 ** 5:
                raise RuntimeError("no small prime representative found")
            if not isprime(p) or avoid % p == 0:
                continue
            for P in primes_above(F, p):
                small_primes.append(P)
                t = label(P)
                if t not in found:
                    found[t] = P
                # products of two primes as a fallback for stubborn classes
            if len(found) < len(tokens) and len(small_primes) > 2 * len(tokens):
                for P in small_primes:
                    for Q in small_primes:
                        t = label(P * Q)
                        if t not in found:
                            found[t] = P * Q
        return [found[t] for t in tokens]


@lru_cache(maxsize=None)
def class_data(F: RealQuadraticField) -> ClassGroupData:
    return ClassGroupData(F)


# ---------------------------------------------------------------------------
# explicit totally positive generators of narrow-principal ideals

def _apply_form(f, M):
    """f composed with the column substitution (x,y) -> M(x,y)."""
    a, b, c = f
    (p, q), (r, s) = M
    return (a * p * p + b * p * r + c * r * r,
            2 * (a * p * q + c * r * s) + b * (p * s + q * r),
            a * q * q + b * q * s + c * s * s)


def _mat_mul(M, N):
    (a, b), (c, d) = M
    (e, f), (g, h) = N
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def _rho_transform(f, Delta):
    """The SL2 matrix M with rho(f) = f o M."""
    g = _rho(*f, Delta)
    s, rem = divmod(g[1] + f[1], 2 * f[2])
    assert rem == 0
    return g, ((0, -1), (1, s))


def _reduce_with_transform(f, Delta):
    U = ((1, 0), (0, 1))
    g = f
    for _ in range(10000):
        if _is_reduced(*g, Delta):
            assert _apply_form(f, U) == g
            return g, U
        g, M = _rho_transform(g, Delta)
        U = _mat_mul(U, M)
    raise RuntimeError("form reduction did not terminate")


def tp_generator(I: FracIdeal):
    """A totally positive z with (z) = I, or None if I is not
    narrow-principal.  Found by aligning the reduced-form cycle of I with
    the cycle of the principal form while tracking the SL2 transforms."""
    F = I.field
    d = F.d
    alpha, beta, f0 = _oriented_form(I)
    g1, U1 = _reduce_with_transform(f0, d)
    sigma = d % 2
    principal = (1, sigma, (sigma * sigma - d) // 4)
    g, V = _reduce_with_transform(principal, d)
    cycle_len = len(form_cycle(principal, d))
    for _ in range(cycle_len + 1):
        if g == g1:
            break
        g, M = _rho_transform(g, d)
        V = _mat_mul(V, M)
    else:
        return None
    # principal o (V U1^{-1}) = f0, so f0 represents 1 at W^{-1} (1,0)
    (a, b), (c, e) = U1
    U1_inv = ((e, -b), (-c, a))  # det U1 = 1
    W = _mat_mul(V, U1_inv)
    assert _apply_form(principal, W) == f0
    (p, q), (r, s) = W
    x0, y0 = s, -r  # first column of W^{-1}
    assert f0[0] * x0 * x0 + f0[1] * x0 * y0 + f0[2] * y0 * y0 == 1
    z = alpha * x0 + beta * y0
    assert z.norm() == I.norm()
    if z.sign_at(0) < 0:
        z = -z
    assert z.is_totally_positive() and z in I
    assert FracIdeal.from_gens(F, [z]) == I
    return z


# ---------------------------------------------------------------------------
# unit-image quotients of residue unit groups

def phi_gt0(M: FracIdeal) -> int:
    """#((R/M)^x / image of totally positive units)."""
    F = M.field
    G = residue_units(M)
    return G.quotient_size([G.image(F.eps_plus)])


def phi_sq(M: FracIdeal) -> int:
    """#((R/M)^x / image of squares of units)."""
    F = M.field
    G = residue_units(M)
    return G.quotient_size([G.image(F.eps * F.eps)])


def q_group_size(M: FracIdeal, N: FracIdeal, variant: str) -> int:
    """#Q_i(M, N): number of cusps with invariant M over all components.

    variant in {"gamma0", "gamma1", "gamma0_1", "gamma1_1"}.
    """
    from .cusps import transversal_size  # local import; cusps builds on this

    F = M.field
    cd = class_data(F)
    return cd.h_plus * cd.h * transversal_size(M, N, variant)
