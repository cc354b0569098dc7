"""Exact multivariate polynomials over the rationals, with small-matrix
determinants via Laplace expansion.

Polynomials are dictionaries from exponent tuples (one slot per variable
u_1 ... u_n) to Fraction coefficients; zero coefficients are never stored.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd


class ArityError(ValueError):
    """Polynomials with different variable counts were combined."""


class Polynomial:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict | None = None):
        self.nvars = nvars
        self.terms: dict[tuple, Fraction] = {}
        if terms:
            for exps, c in terms.items():
                c = Fraction(c)
                if c != 0:
                    if len(exps) != nvars:
                        raise ArityError("exponent tuple length mismatch")
                    self.terms[tuple(exps)] = c

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, nvars: int, c) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: Fraction(c)})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "Polynomial":
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): Fraction(1)})

    # -- basic protocol ----------------------------------------------------

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def _check(self, other: "Polynomial"):
        if self.nvars != other.nvars:
            raise ArityError("cannot combine polynomials of different arity")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.nvars, other)
        self._check(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e, Fraction(0)) + c
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return Polynomial(self.nvars, terms)

    def __neg__(self):
        return Polynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.nvars, other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            return Polynomial(self.nvars, {e: cc * c for e, cc in self.terms.items()})
        self._check(other)
        terms: dict[tuple, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(e, Fraction(0)) + c1 * c2
                if s:
                    terms[e] = s
                else:
                    terms.pop(e, None)
        return Polynomial(self.nvars, terms)

    __rmul__ = __mul__
    __radd__ = __add__

    # -- calculus and evaluation ------------------------------------------

    def partial_derivative(self, var: int) -> "Polynomial":
        terms: dict[tuple, Fraction] = {}
        for e, c in self.terms.items():
            if e[var] > 0:
                ne = list(e)
                ne[var] -= 1
                terms[tuple(ne)] = c * e[var]
        return Polynomial(self.nvars, terms)

    def evaluate(self, values) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, k in zip(values, e):
                v *= Fraction(x) ** k if k else 1
            total += v
        return total

    def evaluate_float(self, values) -> float:
        total = 0.0
        for e, c in self.terms.items():
            v = float(c)
            for x, k in zip(values, e):
                if k:
                    v *= float(x) ** k
            total += v
        return total

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, var: int) -> int:
        return max((e[var] for e in self.terms), default=0)

    def coefficients_in(self, var: int) -> list["Polynomial"]:
        """Coefficients (polynomials in the remaining variables' slots) of
        powers of one variable, index = power."""
        out = [Polynomial(self.nvars) for _ in range(self.degree_in(var) + 1)]
        for e, c in self.terms.items():
            ne = list(e)
            k = ne[var]
            ne[var] = 0
            out[k] = out[k] + Polynomial(self.nvars, {tuple(ne): c})
        return out

    def primitive(self) -> "Polynomial":
        """Scale to coprime integer coefficients (sign preserved)."""
        if not self.terms:
            return self
        denom = 1
        for c in self.terms.values():
            denom = denom * c.denominator // gcd(denom, c.denominator)
        ints = {e: c.numerator * (denom // c.denominator) for e, c in self.terms.items()}
        g = 0
        for v in ints.values():
            g = gcd(g, v)
        return Polynomial(self.nvars, {e: Fraction(v // g) for e, v in ints.items()})

    # -- text format -------------------------------------------------------

    def to_text(self, order_key=None) -> str:
        """Render as a sum of 'c * u1^a u2^b ...' terms with exact fractions."""
        if not self.terms:
            return "0"
        keys = sorted(self.terms, key=order_key or (lambda e: (-sum(e), tuple(-x for x in e))))
        parts = []
        for e in keys:
            c = self.terms[e]
            mono = " ".join(f"u{i + 1}^{k}" if k > 1 else f"u{i + 1}"
                            for i, k in enumerate(e) if k)
            if mono:
                parts.append(f"{c} * {mono}" if c != 1 else mono)
            else:
                parts.append(str(c))
        return " + ".join(parts).replace("+ -", "- ")

    _TERM_RE = re.compile(r"u(\d+)(?:\^(\d+))?")

    @classmethod
    def from_text(cls, text: str, nvars: int) -> "Polynomial":
        poly = cls(nvars)
        text = text.replace("- ", "+ -").replace("*", " ")
        for chunk in text.split("+"):
            chunk = chunk.strip()
            if not chunk:
                continue
            exps = [0] * nvars
            coeff = Fraction(1)
            for tok in chunk.split():
                if tok.startswith("-") and cls._TERM_RE.fullmatch(tok[1:]):
                    coeff = -coeff
                    tok = tok[1:]
                m = cls._TERM_RE.fullmatch(tok)
                if m:
                    exps[int(m.group(1)) - 1] += int(m.group(2) or 1)
                else:
                    coeff *= Fraction(tok)
            poly = poly + cls(nvars, {tuple(exps): coeff})
        return poly

    def __repr__(self):
        return f"Polynomial({self.to_text()})"


class PolyMatrix:
    """Square matrix of polynomials, dimension at most 4 (Laplace expansion)."""

    def __init__(self, entries: list[list[Polynomial]]):
        n = len(entries)
        if n == 0 or any(len(row) != n for row in entries):
            raise ValueError("matrix must be square")
        if n > 4:
            raise ValueError("dimension capped at 4 for Laplace expansion")
        self.entries = entries
        self.n = n
        self.nvars = entries[0][0].nvars

    def row(self, i: int) -> list[Polynomial]:
        return list(self.entries[i])

    def minor(self, i: int, j: int) -> "PolyMatrix":
        rows = [[e for jj, e in enumerate(row) if jj != j]
                for ii, row in enumerate(self.entries) if ii != i]
        return PolyMatrix(rows)


def determinant(m: PolyMatrix) -> Polynomial:
    """Exact determinant by Laplace expansion along the first row."""
    if m.n == 1:
        return m.entries[0][0]
    det = Polynomial(m.nvars)
    for j, e in enumerate(m.entries[0]):
        if not e:
            continue
        cofactor = determinant(m.minor(0, j))
        term = e * cofactor
        det = det + (term if j % 2 == 0 else -term)
    return det
