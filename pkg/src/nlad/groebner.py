"""Reduced Groebner bases over the rationals via Buchberger's algorithm.

Lex order with a configurable variable ranking.  The pair queue uses the normal
selection strategy with Gebauer-Moeller style applications of Buchberger's
product and chain criteria.  Coefficient arithmetic is exact: inputs are scaled
to coprime integer coefficients, the reduction loop works in pure integer
cross-multiplication (no rational normalization in the hot path), and the final
basis is normalized monic.  Resource caps abort runaway computations instead of
hanging.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .poly import Polynomial

MAX_PAIRS = 10_000
MAX_COEFF_BITS = 8_000_000  # ~1 MB per coefficient


class ResourceCapExceeded(RuntimeError):
    """Basis computation exceeded the pair or coefficient-size budget."""


def _lex_key(exps: tuple, ranking: tuple) -> tuple:
    return tuple(exps[v] for v in ranking)


def _divides(a: tuple, b: tuple) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: tuple, b: tuple) -> tuple:
    return tuple(max(x, y) for x, y in zip(a, b))


def _sub_exps(a: tuple, b: tuple) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def _int_terms(poly: Polynomial) -> dict[tuple, int]:
    """Integer-primitive coefficient dict of a rational polynomial."""
    prim = poly.primitive()
    return {e: c.numerator for e, c in prim.terms.items()}


def _content_normalize(terms: dict[tuple, int]) -> dict[tuple, int]:
    g = 0
    for c in terms.values():
        g = gcd(g, c)
    if g > 1:
        return {e: c // g for e, c in terms.items()}
    return terms


def _check_coeff_size(terms: dict[tuple, int]):
    for c in terms.values():
        if c.bit_length() > MAX_COEFF_BITS:
            raise ResourceCapExceeded("coefficient exceeded size cap")


class _Basis:
    """Basis elements as integer term dicts with cached leading terms."""

    def __init__(self, ranking: tuple):
        self.ranking = ranking
        self.terms: list[dict[tuple, int]] = []
        self.leads: list[tuple] = []
        self.lead_coeffs: list[int] = []

    def __len__(self):
        return len(self.terms)

    def add(self, terms: dict[tuple, int]):
        terms = _content_normalize(terms)
        le = max(terms, key=lambda t: _lex_key(t, self.ranking))
        self.terms.append(terms)
        self.leads.append(le)
        self.lead_coeffs.append(terms[le])


def _reduce_int(terms: dict[tuple, int], basis: _Basis,
                skip: int | None = None) -> dict[tuple, int]:
    """Full normal form by integer cross-multiplication; result is primitive up
    to sign.  skip excludes one basis index (for inter-reduction)."""
    ranking = basis.ranking
    work = dict(terms)
    remainder: dict[tuple, int] = {}
    active = [i for i in range(len(basis)) if i != skip]
    while work:
        le = max(work, key=lambda t: _lex_key(t, ranking))
        lc = work.pop(le)
        if lc == 0:
            continue
        hit = -1
        for i in active:
            if _divides(basis.leads[i], le):
                hit = i
                break
        if hit < 0:
            remainder[le] = lc
            continue
        gc = basis.lead_coeffs[hit]
        d = gcd(lc, gc)
        a, b = gc // d, lc // d  # a * lc == b * gc
        if a < 0:
            a, b = -a, -b
        shift = _sub_exps(le, basis.leads[hit])
        if a != 1:
            work = {e: c * a for e, c in work.items()}
            remainder = {e: c * a for e, c in remainder.items()}
        for ge, gcf in basis.terms[hit].items():
            if ge == basis.leads[hit]:
                continue
            e = tuple(x + y for x, y in zip(ge, shift))
            s = work.get(e, 0) - b * gcf
            if s:
                work[e] = s
            else:
                work.pop(e, None)
        _check_coeff_size(work)
    return _content_normalize(remainder)


def _s_poly_int(basis: _Basis, i: int, j: int) -> dict[tuple, int]:
    fe, ge = basis.leads[i], basis.leads[j]
    fc, gc = basis.lead_coeffs[i], basis.lead_coeffs[j]
    d = gcd(fc, gc)
    t = _lcm(fe, ge)
    sf, sg = _sub_exps(t, fe), _sub_exps(t, ge)
    mf, mg = gc // d, fc // d
    out: dict[tuple, int] = {}
    for e, c in basis.terms[i].items():
        ee = tuple(x + y for x, y in zip(e, sf))
        out[ee] = out.get(ee, 0) + mf * c
    for e, c in basis.terms[j].items():
        ee = tuple(x + y for x, y in zip(e, sg))
        s = out.get(ee, 0) - mg * c
        if s:
            out[ee] = s
        else:
            out.pop(ee, None)
    return {e: c for e, c in out.items() if c}


@dataclass
class GroebnerResult:
    basis: list[Polynomial]            # reduced, monic, sorted by leading monomial
    ranking: tuple                     # variable indices, most significant first
    zero_dimensional: bool
    leading_monomials: list[tuple]
    pure_power_exponents: dict[int, int]  # variable index -> exponent, if any
    pairs_processed: int

    def order_descriptor(self) -> str:
        return "lex " + " > ".join(f"u{v + 1}" for v in self.ranking)

    def to_json(self) -> str:
        return json.dumps({
            "order": self.order_descriptor(),
            "zero_dimensional": self.zero_dimensional,
            "leading_monomials": [list(e) for e in self.leading_monomials],
            "pure_power_exponents": {f"u{v + 1}": k
                                     for v, k in sorted(self.pure_power_exponents.items())},
            "basis": [p.to_text() for p in self.basis],
        }, indent=2)


def buchberger(polys: list[Polynomial], ranking=None) -> GroebnerResult:
    """Reduced lex Groebner basis of the ideal generated by polys.

    ranking lists variable indices from most to least significant; default is
    u1 > u2 > ... > un.
    """
    polys = [p for p in polys if p]
    if not polys:
        raise ValueError("need at least one nonzero polynomial")
    nvars = polys[0].nvars
    if any(p.nvars != nvars for p in polys):
        raise ValueError("polynomials must share one variable arity")
    ranking = tuple(ranking) if ranking is not None else tuple(range(nvars))
    if sorted(ranking) != list(range(nvars)):
        raise ValueError("ranking must be a permutation of the variables")

    basis = _Basis(ranking)
    heap: list[tuple[tuple, int, int]] = []  # (lcm lex key, i, j)
    alive: set[tuple[int, int]] = set()

    def add_to_basis(terms: dict[tuple, int]):
        i = len(basis)
        basis.add(terms)
        pe = basis.leads[i]
        # chain (Gebauer-Moeller B) criterion: drop old pairs strictly refined
        # by the new element
        for (a, b) in list(alive):
            lab = _lcm(basis.leads[a], basis.leads[b])
            if _divides(pe, lab):
                la = _lcm(basis.leads[a], pe)
                lb = _lcm(basis.leads[b], pe)
                if la != lab and lb != lab:
                    alive.discard((a, b))
        for j in range(i):
            je = basis.leads[j]
            # product criterion: coprime leading monomials never yield new info
            if _lcm(pe, je) == tuple(x + y for x, y in zip(pe, je)):
                continue
            alive.add((j, i))
            heapq.heappush(heap, (_lex_key(_lcm(pe, je), ranking), j, i))

    for p in polys:
        add_to_basis(_int_terms(p))

    processed = 0
    while heap:
        _, i, j = heapq.heappop(heap)
        if (i, j) not in alive:
            continue
        alive.discard((i, j))
        if processed >= MAX_PAIRS:
            raise ResourceCapExceeded(f"more than {MAX_PAIRS} S-pairs processed")
        processed += 1
        s = _reduce_int(_s_poly_int(basis, i, j), basis)
        if s:
            add_to_basis(s)

    # minimalize: keep only elements whose leading monomial is not divisible by
    # another's, then inter-reduce tails and normalize monic
    n = len(basis)
    keep_idx = []
    for i in range(n):
        li = basis.leads[i]
        if not any(j != i and _divides(basis.leads[j], li)
                   and (basis.leads[j] != li or j < i) for j in range(n)):
            keep_idx.append(i)
    minimal = _Basis(ranking)
    for i in keep_idx:
        minimal.add(basis.terms[i])
    reduced = []
    for i in range(len(minimal)):
        r = _reduce_int(minimal.terms[i], minimal, skip=i)
        if r:
            reduced.append(r)
    final = []
    for terms in reduced:
        le = max(terms, key=lambda t: _lex_key(t, ranking))
        lc = terms[le]
        final.append(Polynomial(nvars, {e: Fraction(c, lc) for e, c in terms.items()}))
    final.sort(key=lambda g: _lex_key(
        max(g.terms, key=lambda t: _lex_key(t, ranking)), ranking), reverse=True)

    lead_exps = [max(g.terms, key=lambda t: _lex_key(t, ranking)) for g in final]
    pure: dict[int, int] = {}
    for e in lead_exps:
        nz = [i for i, k in enumerate(e) if k > 0]
        if len(nz) == 1:
            v = nz[0]
            if v not in pure or e[v] < pure[v]:
                pure[v] = e[v]
    # a constant in the basis means the ideal is the whole ring (empty variety)
    if any(sum(e) == 0 for e in lead_exps):
        zero_dim = True
    else:
        zero_dim = all(v in pure for v in range(nvars))
    return GroebnerResult(final, ranking, zero_dim, lead_exps, pure, processed)


def reduces_to_zero(poly: Polynomial, result: GroebnerResult) -> bool:
    """Ideal-membership check against a computed basis."""
    basis = _Basis(result.ranking)
    for g in result.basis:
        basis.add(_int_terms(g))
    return not _reduce_int(_int_terms(poly), basis)
