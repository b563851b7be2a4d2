"""Exact sparse multivariate polynomials over chart coordinates.

This is the coefficient ring for the whole engine. A polynomial is a
mapping from monomials to nonzero rational coefficients, where a
monomial is a sorted tuple of (variable id, positive exponent) pairs.
Variables are small integers allocated by a chart (see extcalc); the
polynomial only remembers which chart it belongs to through an opaque
``space`` tag so that operands from different charts cannot be mixed
silently.

All arithmetic is exact (``fractions.Fraction``). There is no floating
point anywhere and no simplification beyond the normalized sparse
representation, which makes equality a dictionary comparison.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

Rational = Fraction
VarId = int

# A monomial: tuple of (VarId, exponent) pairs, sorted by VarId, exponents > 0.
Monomial = tuple

ScalarLike = Union[int, Fraction]


class ChartMismatchError(ValueError):
    """Raised when combining polynomials tagged with different spaces."""


def _merge_spaces(a, b):
    if a is None:
        return b
    if b is None:
        return a
    if a is not b:
        raise ChartMismatchError("operands belong to different charts")
    return a


def mul_monomials(m1: Monomial, m2: Monomial) -> Monomial:
    """Merge two sorted exponent vectors, adding exponents."""
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    n1, n2 = len(m1), len(m2)
    while i < n1 and j < n2:
        v1, e1 = m1[i]
        v2, e2 = m2[j]
        if v1 == v2:
            out.append((v1, e1 + e2))
            i += 1
            j += 1
        elif v1 < v2:
            out.append((v1, e1))
            i += 1
        else:
            out.append((v2, e2))
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


def monomial_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


class Poly:
    """Immutable sparse polynomial with exact rational coefficients."""

    __slots__ = ("space", "terms")

    def __init__(self, space, terms: Mapping[Monomial, ScalarLike], *, _clean: bool = False):
        self.space = space
        if _clean:
            self.terms = dict(terms)
        else:
            clean = {}
            for mono, coeff in terms.items():
                c = coeff if isinstance(coeff, Fraction) else Fraction(coeff)
                if c:
                    clean[mono] = clean.get(mono, Fraction(0)) + c
                    if not clean[mono]:
                        del clean[mono]
            self.terms = clean

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(space=None) -> "Poly":
        return Poly(space, {}, _clean=True)

    @staticmethod
    def const(value: ScalarLike, space=None) -> "Poly":
        c = value if isinstance(value, Fraction) else Fraction(value)
        if not c:
            return Poly(space, {}, _clean=True)
        return Poly(space, {(): c}, _clean=True)

    @staticmethod
    def variable(v: VarId, space=None) -> "Poly":
        return Poly(space, {((v, 1),): Fraction(1)}, _clean=True)

    @staticmethod
    def monomial(mono: Monomial, coeff: ScalarLike, space=None) -> "Poly":
        c = coeff if isinstance(coeff, Fraction) else Fraction(coeff)
        if not c:
            return Poly(space, {}, _clean=True)
        return Poly(space, {tuple(mono): c}, _clean=True)

    # -- predicates -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and () in self.terms:
            return self.terms[()]
        raise ValueError("polynomial is not constant")

    def degree(self) -> int:
        """Total degree; zero polynomial reports -1."""
        if not self.terms:
            return -1
        return max(monomial_degree(m) for m in self.terms)

    def variables(self) -> set:
        out = set()
        for mono in self.terms:
            for v, _ in mono:
                out.add(v)
        return out

    # -- ring operations -------------------------------------------------

    def add(self, other: "Poly") -> "Poly":
        space = _merge_spaces(self.space, other.space)
        if not self.terms:
            return other if other.space is space else Poly(space, other.terms, _clean=True)
        if not other.terms:
            return self if self.space is space else Poly(space, self.terms, _clean=True)
        terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            acc = terms.get(mono)
            if acc is None:
                terms[mono] = coeff
            else:
                acc = acc + coeff
                if acc:
                    terms[mono] = acc
                else:
                    del terms[mono]
        return Poly(space, terms, _clean=True)

    def neg(self) -> "Poly":
        return Poly(self.space, {m: -c for m, c in self.terms.items()}, _clean=True)

    def sub(self, other: "Poly") -> "Poly":
        return self.add(other.neg())

    def mul(self, other: "Poly") -> "Poly":
        space = _merge_spaces(self.space, other.space)
        if not self.terms or not other.terms:
            return Poly.zero(space)
        # multiply the smaller operand into the larger one
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        terms: dict = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                mono = mul_monomials(m1, m2)
                acc = terms.get(mono)
                if acc is None:
                    terms[mono] = c1 * c2
                else:
                    acc = acc + c1 * c2
                    if acc:
                        terms[mono] = acc
                    else:
                        del terms[mono]
        return Poly(space, terms, _clean=True)

    def scale(self, factor: ScalarLike) -> "Poly":
        c = factor if isinstance(factor, Fraction) else Fraction(factor)
        if not c:
            return Poly.zero(self.space)
        return Poly(self.space, {m: k * c for m, k in self.terms.items()}, _clean=True)

    def pow(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly.const(1, self.space)
        base = self
        while n:
            if n & 1:
                out = out.mul(base)
            base = base.mul(base) if n > 1 else base
            n >>= 1
        return out

    # operator sugar; scalars are accepted on either side

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(other, self.space)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else self.add(other)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else self.sub(other)

    def __rsub__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else other.sub(self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, Poly):
            return self.mul(other)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return self.neg()

    def __pow__(self, n):
        return self.pow(n)

    # -- calculus and evaluation ------------------------------------------

    def partial_derivative(self, v: VarId) -> "Poly":
        terms: dict = {}
        for mono, coeff in self.terms.items():
            for idx, (var, exp) in enumerate(mono):
                if var == v:
                    if exp == 1:
                        new = mono[:idx] + mono[idx + 1 :]
                    else:
                        new = mono[:idx] + ((var, exp - 1),) + mono[idx + 1 :]
                    acc = terms.get(new)
                    c = coeff * exp
                    if acc is None:
                        terms[new] = c
                    else:
                        acc = acc + c
                        if acc:
                            terms[new] = acc
                        else:
                            del terms[new]
                    break
        return Poly(self.space, terms, _clean=True)

    def substitute(self, mapping: Mapping[VarId, "Poly"], space=None) -> "Poly":
        """Simultaneous substitution; unmapped variables stay themselves."""
        target = space if space is not None else self.space
        if not mapping:
            return self if target is self.space else Poly(target, self.terms, _clean=True)
        out = Poly.zero(target)
        for mono, coeff in self.terms.items():
            part = Poly.const(coeff, target)
            for var, exp in mono:
                image = mapping.get(var)
                if image is None:
                    image = Poly.variable(var, target)
                part = part.mul(image.pow(exp))
            out = out.add(part)
        return out

    def evaluate(self, point: Mapping[VarId, ScalarLike]) -> Fraction:
        total = Fraction(0)
        for mono, coeff in self.terms.items():
            val = coeff
            for var, exp in mono:
                try:
                    x = point[var]
                except KeyError:
                    raise ValueError(f"no value assigned to variable {var}") from None
                x = x if isinstance(x, Fraction) else Fraction(x)
                val = val * x**exp
            total += val
        return total

    # -- comparison and display -------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        if self.space is not None and other.space is not None and self.space is not other.space:
            return False
        return self.terms == other.terms

    __hash__ = None  # mutable dict inside; equality is structural

    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        names = getattr(self.space, "names", None)

        def varname(v):
            if names is not None and 0 <= v < len(names):
                return names[v]
            return f"q{v}"

        parts = []
        for mono in sorted(self.terms, key=lambda m: (monomial_degree(m), m)):
            coeff = self.terms[mono]
            factors = "*".join(
                varname(v) + (f"^{e}" if e > 1 else "") for v, e in mono
            )
            if not factors:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append(factors)
            elif coeff == -1:
                parts.append("-" + factors)
            else:
                parts.append(f"{coeff}*{factors}")
        return "Poly(" + " + ".join(parts).replace("+ -", "- ") + ")"


def monomials_up_to_degree(vars: Sequence[VarId], max_degree: int) -> Iterable[Monomial]:
    """All exponent vectors over ``vars`` with total degree <= max_degree."""
    vs = sorted(set(vars))
    for total in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(vs, total):
            mono = []
            for v in vs:
                e = combo.count(v)
                if e:
                    mono.append((v, e))
            yield tuple(mono)


def random_polynomial(
    vars: Sequence[VarId],
    max_degree: int,
    seed: int,
    space=None,
    *,
    nonzero: bool = False,
) -> Poly:
    """Deterministic random polynomial with small integer coefficients.

    Coefficients are drawn uniformly from [-9, 9]; zero draws drop the
    monomial, so a degree-2 instance in 4 variables has at most 15 terms.
    With ``nonzero`` the draw is repeated until some term survives.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    rng = random.Random(seed)
    while True:
        terms = {}
        for mono in monomials_up_to_degree(vars, max_degree):
            c = rng.randint(-9, 9)
            if c:
                terms[mono] = Fraction(c)
        if terms or not nonzero:
            return Poly(space, terms, _clean=True)


def random_rational(rng: random.Random, *, nonzero: bool = False) -> Fraction:
    """Small random rational with denominator in [1, 4]."""
    while True:
        value = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
        if value or not nonzero:
            return value
