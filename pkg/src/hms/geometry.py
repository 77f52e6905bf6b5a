"""Geometric invariants of the resolved surfaces: volume, Chern numbers,
Hodge and Betti numbers, and Kodaira-dimension candidate sets.

The Chern numbers combine the volume term with the cusp resolution
cycles and the elliptic point resolutions; the holomorphic Euler
characteristic follows by Noether's formula and must come out integral,
which is a strong end-to-end check on every upstream quantity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .classgroups import class_data
from .cusps import (GroupSpec, ResolutionCycle, cusp_type, enumerate_cusps,
                    resolve_cusp)
from .dimensions import dim_cusp_forms
from .elliptic import (EllipticResolution, RotationType, resolve_elliptic,
                       rotation_distribution)
from .field import RealQuadraticField
from .ideals import FracIdeal, ResidueRing, factor_ideal


# ---------------------------------------------------------------------------
# index and volume

def p1_size(N: FracIdeal) -> int:
    """#P^1(R/N) = Nm(N) prod_{p | N} (1 + Nm(p)^-1)."""
    size = Fraction(int(N.norm()))
    for P, _ in factor_ideal(N):
        size *= 1 + Fraction(1, P.norm())
    assert size.denominator == 1
    return int(size)


def p1_size_enumerated(N: FracIdeal) -> int:
    """#P^1(R/N) by direct orbit enumeration (small-level oracle)."""
    ring = ResidueRing(N)
    units = [ring.lift(r) for r in ring.elements() if ring.is_unit(r)]
    one = FracIdeal.one(N.field)
    seen = set()
    for x in ring.elements():
        for y in ring.elements():
            xe, ye = ring.lift(x), ring.lift(y)
            if xe.is_zero() and ye.is_zero():
                continue
            # (x : y) must be unimodular: x R + y R + N = R
            if FracIdeal.from_gens(N.field, [xe, ye]) + N != one:
                continue
            key = min((ring.reduce(u * xe), ring.reduce(u * ye))
                      for u in units)
            seen.add(key)
    return len(seen)


def covolume(spec: GroupSpec) -> Fraction:
    """Volume of the quotient, 2 [Gamma(1) : Gamma] zeta_F(-1)."""
    if spec.variant not in ("gamma0", "gamma0_1"):
        raise ValueError("volume implemented for gamma0/gamma0_1 only")
    F = spec.field
    index = Fraction(p1_size(spec.level))
    if not spec.det_one:
        # 2 zeta_F(-1) is the covolume of the determinant-one group of
        # level (1); the totally-positive-determinant group contains its
        # image with index #(R^x_{>0} / R^x2), so its quotient is smaller
        index /= len(F.totally_positive_unit_square_classes())
    return 2 * index * Fraction(abs(F.zeta_minus_one()))


# ---------------------------------------------------------------------------
# Chern numbers

def _cusp_terms(cycle: ResolutionCycle):
    """(sum of (2 - b_k) over the raw cycle digits, number of curves)."""
    if cycle.special:
        # length-one cycle: one nodal curve; its raw digit b satisfies
        # selfint = -b + 2, and the Chern term 2 - b equals the stored
        # self-intersection
        return Fraction(cycle.selfints[0]), 1
    return Fraction(sum(2 + s for s in cycle.selfints)), len(cycle.selfints)


def chern_numbers(vol: Fraction,
                  cusp_cycles: list[ResolutionCycle],
                  elliptic: list[tuple[RotationType, int]]):
    """(c1^2, c2) of the resolved surface."""
    c1 = 2 * vol
    c2 = vol
    for cycle in cusp_cycles:
        term, length = _cusp_terms(cycle)
        c1 += term
        c2 += length
    for rt, count in elliptic:
        res = resolve_elliptic(rt)
        c1 += count * res.chern
        c2 += count * (res.length + Fraction(rt.q - 1, rt.q))
    if c1.denominator != 1 or c2.denominator != 1:
        raise ArithmeticError(
            f"non-integral Chern numbers c1^2={c1}, c2={c2}: "
            "upstream cusp/elliptic data is inconsistent")
    return int(c1), int(c2)


# ---------------------------------------------------------------------------
# invariants

@dataclass
class SurfaceInvariants:
    vol: Fraction
    c1_sq: int
    c2: int
    chi: int
    hodge: dict
    betti: list
    K2_min_lower_bound: int
    kodaira_set: frozenset
    blowdowns_applied: int = 0


def hodge_betti(c1_sq: int, c2: int) -> dict:
    """chi, Hodge numbers and Betti numbers from the Chern numbers."""
    if (c1_sq + c2) % 12 != 0:
        raise ArithmeticError(
            f"Noether failure: c1^2 + c2 = {c1_sq + c2} not divisible by 12")
    chi = (c1_sq + c2) // 12
    assert chi >= 1, "holomorphic Euler characteristic must be positive"
    hodge = {"h00": 1, "h01": 0, "h02": chi - 1, "h11": c2 - 2 * chi}
    betti = [1, 0, c2 - 2, 0, 1]
    return {"chi": chi, "hodge": hodge, "betti": betti}


def classify_kodaira(chi: int, K2_current: int,
                     blowdowns: int = 0) -> frozenset:
    """Candidate Kodaira dimensions; K2_current + blowdowns estimates the
    minimal-model K^2 (exact when the blow-down count is certified)."""
    if chi < 1:
        raise ValueError("chi must be >= 1")
    K2 = K2_current + blowdowns
    if chi == 1:
        if K2 < 0:
            return frozenset({-1, 0, 1, 2})
        if K2 == 0:
            return frozenset({0, 1})
        if K2 <= 9:
            return frozenset({-1, 2})
        return frozenset({2})
    if chi == 2:
        if K2 < 0:
            return frozenset({0, 1, 2})
        if K2 == 0:
            return frozenset({0, 1})
        return frozenset({2})
    if K2 < 0:
        return frozenset({1, 2})
    if K2 == 0:
        return frozenset({1})
    return frozenset({2})


def surface_invariants(spec: GroupSpec, blowdowns: int = 0,
                       budget=None) -> SurfaceInvariants:
    """Full invariant record for one surface (one component)."""
    vol = covolume(spec)
    cycles = [resolve_cusp(cusp_type(c, spec)) for c in enumerate_cusps(spec)]
    elliptic = rotation_distribution(spec, budget=budget)
    c1_sq, c2 = chern_numbers(vol, cycles, elliptic)
    hb = hodge_betti(c1_sq, c2)
    return SurfaceInvariants(
        vol=vol, c1_sq=c1_sq, c2=c2, chi=hb["chi"], hodge=hb["hodge"],
        betti=hb["betti"], K2_min_lower_bound=c1_sq + blowdowns,
        kodaira_set=classify_kodaira(hb["chi"], c1_sq, blowdowns),
        blowdowns_applied=blowdowns)


# ---------------------------------------------------------------------------
# curve configurations and rationality

@dataclass
class CurveConfig:
    """Curves with self-intersections and pairwise intersection numbers.

    selfints[i] is C_i^2; meets[(i, j)] = C_i . C_j for i < j (absent
    pairs are disjoint); canonical_degrees[i] = K . C_i when known."""

    selfints: list
    meets: dict = field(default_factory=dict)
    canonical_degrees: dict = field(default_factory=dict)

    def intersection(self, i: int, j: int) -> int:
        if i == j:
            return self.selfints[i]
        return self.meets.get((min(i, j), max(i, j)), 0)


def rationality_criterion(config: CurveConfig,
                          blow_down: tuple = ()) -> bool:
    """True if the configuration certifies a rational surface: either two
    (-1)-curves meeting, or a curve with C^2 >= 0 and K.C < 0, possibly
    after blowing down a supplied disjoint set of (-1)-curves."""
    for i in blow_down:
        if config.selfints[i] != -1:
            raise ValueError("only (-1)-curves can be blown down")
        for j in blow_down:
            if i < j and config.intersection(i, j) != 0:
                raise ValueError("blow-down set must be disjoint curves")
    n = len(config.selfints)
    kept = [i for i in range(n) if i not in blow_down]
    # after blowing down E, C^2 increases by (C.E)^2 and K.C drops by C.E
    selfint = {}
    kdeg = {}
    for i in kept:
        extra = sum(config.intersection(i, e) ** 2 for e in blow_down)
        selfint[i] = config.selfints[i] + extra
        if i in config.canonical_degrees:
            kdeg[i] = config.canonical_degrees[i] - sum(
                config.intersection(i, e) for e in blow_down)
    def meet(i, j):
        base = config.intersection(i, j)
        return base + sum(config.intersection(i, e) * config.intersection(j, e)
                          for e in blow_down)
    for i in kept:
        for j in kept:
            if i < j and selfint[i] == -1 and selfint[j] == -1 \
                    and meet(i, j) > 0:
                return True
    for i in kept:
        if selfint[i] >= 0 and kdeg.get(i, 0) < 0:
            return True
    return False


# ---------------------------------------------------------------------------
# cross-pipeline consistency

def consistency_check(F: RealQuadraticField, N: FracIdeal,
                      budget=None, report: dict | None = None) -> bool:
    """sum over components of chi(X_0(N)_b) == dim S_2(Gamma_0(N)) + h^+."""
    cd = class_data(F)
    chis = []
    for b in cd.narrow_reps(coprime_to=int(N.norm())):
        spec = GroupSpec("gamma0", N, b)
        chis.append(surface_invariants(spec, budget=budget).chi)
    dim2 = dim_cusp_forms(F, N, 2, budget=budget)
    ok = sum(chis) == dim2 + cd.h_plus
    if report is not None:
        report.update({"chis": chis, "dim_S2": dim2, "h_plus": cd.h_plus,
                       "lhs": sum(chis), "rhs": dim2 + cd.h_plus})
    return ok
