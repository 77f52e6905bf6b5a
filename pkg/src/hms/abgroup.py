"""Small finite abelian groups given by explicit element enumeration.

Used for residue unit groups, class groups, and coset transversals.  All
groups handled here are tiny (at most a few thousand elements), so the
algorithms favour clarity and determinism over asymptotics: discrete logs
are table lookups, subgroups are BFS closures.
"""

from __future__ import annotations

from itertools import product
from math import gcd, lcm


class FiniteAbelianGroup:
    """Concrete finite abelian group with a cyclic decomposition.

    elements: hashable canonical values.
    op(a, b), identity: group law.
    gens/orders: decomposition G = prod <gens[i]> with |gens[i]| = orders[i]
    (invariant-factor style: orders[i+1] | orders[i]).
    dlog: element -> exponent vector.
    """

    def __init__(self, elements, op, identity):
        self.elements = list(elements)
        self.op = op
        self.identity = identity
        self.order = len(self.elements)
        self.gens, self.orders = _cyclic_decomposition(self.elements, op, identity)
        self.dlog = {}
        for vec in product(*[range(m) for m in self.orders]):
            e = identity
            for g, k in zip(self.gens, vec):
                e = op(e, _pow(g, k, op, identity))
            if e in self.dlog:
                raise AssertionError("decomposition is not direct")
            self.dlog[e] = vec
        if len(self.dlog) != self.order:
            raise AssertionError("decomposition misses elements")

    def power(self, a, k: int):
        if k < 0:
            k %= self.element_order(a)
        return _pow(a, k, self.op, self.identity)

    def inverse(self, a):
        return self.power(a, self.element_order(a) - 1)

    def element_order(self, a) -> int:
        n = 1
        x = a
        while x != self.identity:
            x = self.op(x, a)
            n += 1
        return n

    def from_vector(self, vec):
        e = self.identity
        for g, k in zip(self.gens, vec):
            e = self.op(e, self.power(g, k))
        return e

    def subgroup(self, generators) -> set:
        """BFS closure of the given generators."""
        seen = {self.identity}
        frontier = [self.identity]
        gens = list(generators)
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.op(x, g)
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        return seen

    def quotient_size(self, generators) -> int:
        return self.order // len(self.subgroup(generators))

    def coset_transversal(self, subgroup_set, key=None) -> list:
        """Deterministic transversal: the key-least element of each coset."""
        if key is None:
            key = lambda x: x
        reps = {}
        for x in sorted(self.elements, key=key):
            cos = frozenset(self.op(x, h) for h in subgroup_set)
            if cos not in reps:
                reps[cos] = x
        return sorted(reps.values(), key=key)


def _pow(a, k, op, identity):
    r = identity
    b = a
    while k:
        if k & 1:
            r = op(r, b)
        b = op(b, b)
        k >>= 1
    return r


def _order_of(a, op, identity) -> int:
    n = 1
    x = a
    while x != identity:
        x = op(x, a)
        n += 1
    return n


def _cyclic_decomposition(elements, op, identity):
    """Generators and orders with orders[i+1] | orders[i]."""
    if len(elements) == 1:
        return [], []
    orders = {a: _order_of(a, op, identity) for a in elements}
    exponent = 1
    for m in orders.values():
        exponent = lcm(exponent, m)
    # build an element of maximal (= exponent) order by combining
    g = max(elements, key=lambda a: orders[a])
    og = orders[g]
    for h in elements:
        if exponent % og == 0 and og == exponent:
            break
        oh = orders[h]
        if lcm(og, oh) > og:
            g, og = _combine(g, og, h, oh, op, identity)
    assert og == exponent
    # quotient by <g> and recurse
    gpow = {}
    x = identity
    for k in range(og):
        gpow[x] = k
        x = op(x, g)
    cosets = {}
    for a in elements:
        cos = frozenset(op(a, _pow(g, k, op, identity)) for k in range(og))
        cosets.setdefault(cos, []).append(a)
    coset_list = sorted(cosets, key=lambda c: min(map(_sort_key, c), default=0))
    rep = {c: min(cosets[c], key=_sort_key) for c in coset_list}
    cos_of = {}
    for c, members in cosets.items():
        for a in members:
            cos_of[a] = c
    q_elements = [rep[c] for c in coset_list]
    q_op = lambda a, b: rep[cos_of[op(a, b)]]
    q_identity = rep[cos_of[identity]]
    q_gens, q_orders = _cyclic_decomposition(q_elements, q_op, q_identity)
    gens, gorders = [g], [og]
    for qg, m in zip(q_gens, q_orders):
        # lift: adjust so the lift has exact order m
        t = gpow[_pow(qg, m, op, identity)]
        assert t % m == 0
        lifted = op(qg, _pow(g, og - (t // m) % og, op, identity))
        assert _order_of(lifted, op, identity) == m
        gens.append(lifted)
        gorders.append(m)
    return gens, gorders


def _combine(g, og, h, oh, op, identity):
    """Element of order lcm(og, oh) inside <g, h>."""
    from sympy import factorint

    L = lcm(og, oh)
    a = b = 1
    for p, e in factorint(L).items():
        pe = p ** e
        if og % pe == 0:
            a *= pe
        else:
            b *= pe
    x = op(_pow(g, og // a, op, identity), _pow(h, oh // b, op, identity))
    assert _order_of(x, op, identity) == L
    return x, L


def _sort_key(a):
    return a if not isinstance(a, (tuple, frozenset)) else tuple(map(_sort_key, sorted(a, key=repr)))
