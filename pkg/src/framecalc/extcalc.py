"""Graded exterior algebra over a coordinate chart.

Forms and multivector fields share one sparse representation: a mapping
from strictly increasing tuples of coordinate ids to polynomial
coefficients. All permutation signs are folded into the coefficient at
insertion time, so equality of normalized objects is a dictionary
comparison.

Sign conventions, fixed once here and unit-tested before anything else:

* interior product of a decomposable multivector contracts the first
  factor innermost: (V1 ^ ... ^ Vp) _| a = Vp _| ... _| V1 _| a,
  so (d/dx ^ d/dy) _| (dx ^ dy) = +1;
* the volume contractions are b_mu = d/dx^mu _| b and
  b_{mu nu} = d/dx^mu _| (d/dx^nu _| b), i.e. nu is contracted first;
* the multivector bracket extends the Lie bracket so that
  [U, V ^ W] = [U, V] ^ W + (-1)^((u-1) v) V ^ [U, W] with u, v, w the
  degrees, and [U, V] = -(-1)^((u-1)(v-1)) [V, U].
"""

from __future__ import annotations

import itertools
from bisect import bisect_left
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from framecalc.symcore import (
    ChartMismatchError,
    Poly,
    Rational,
    VarId,
)

Key = tuple  # strictly increasing tuple of VarId


class Chart:
    """Ordered list of named coordinates with semantic role tags.

    A coordinate is declared as (name, role, index) where role is a
    short string such as "x", "e", "w", "kappa", "pe", "pw", and index
    is the tuple of integer labels the model layer uses to address it.
    Charts are immutable; ``extend`` returns a new chart that shares the
    variable ids of the parent as a prefix, and ``lift`` moves objects
    from the parent onto the extension.
    """

    def __init__(self, coords: Sequence[tuple], parent: Optional["Chart"] = None):
        self.names: tuple = tuple(c[0] for c in coords)
        self.roles: tuple = tuple(c[1] for c in coords)
        self.indices: tuple = tuple(tuple(c[2]) for c in coords)
        self.parent = parent
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate coordinate names")
        self._by_name = {n: i for i, n in enumerate(self.names)}
        self._by_role_index = {}
        self._role_vars: dict = {}
        for vid, (role, idx) in enumerate(zip(self.roles, self.indices)):
            self._by_role_index[(role, idx)] = vid
            self._role_vars.setdefault(role, []).append(vid)

    @property
    def dim(self) -> int:
        return len(self.names)

    def var(self, name: str) -> VarId:
        return self._by_name[name]

    def coord(self, role: str, *index: int) -> VarId:
        return self._by_role_index[(role, tuple(index))]

    def has_coord(self, role: str, *index: int) -> bool:
        return (role, tuple(index)) in self._by_role_index

    def role_vars(self, role: str) -> list:
        return list(self._role_vars.get(role, ()))

    def role_of(self, vid: VarId) -> tuple:
        return self.roles[vid], self.indices[vid]

    def extend(self, coords: Sequence[tuple]) -> "Chart":
        base = list(zip(self.names, self.roles, self.indices))
        return Chart(base + list(coords), parent=self)

    def is_extension_of(self, other: "Chart") -> bool:
        c = self
        while c is not None:
            if c is other:
                return True
            c = c.parent
        return False

    # polynomial helpers

    def poly_var(self, name: str) -> Poly:
        return Poly.variable(self.var(name), self)

    def poly_const(self, value) -> Poly:
        return Poly.const(value, self)

    def zero_poly(self) -> Poly:
        return Poly.zero(self)

    def __repr__(self):
        return f"Chart({len(self.names)} coords)"


def lift_poly(p: Poly, chart: Chart) -> Poly:
    """Reinterpret a polynomial on an extension of its chart."""
    if p.space is None or p.space is chart:
        return Poly(chart, p.terms, _clean=True)
    if not chart.is_extension_of(p.space):
        raise ChartMismatchError("target chart does not extend the source chart")
    return Poly(chart, p.terms, _clean=True)


# -- key algebra ---------------------------------------------------------


def merge_keys(k1: Key, k2: Key):
    """Merge two increasing tuples; returns (key, sign) or None on collision."""
    if not k1:
        return k2, 1
    if not k2:
        return k1, 1
    out = []
    i = j = 0
    n1, n2 = len(k1), len(k2)
    sign = 1
    while i < n1 and j < n2:
        a, b = k1[i], k2[j]
        if a == b:
            return None
        if a < b:
            out.append(a)
            i += 1
        else:
            out.append(b)
            j += 1
            if (n1 - i) & 1:
                sign = -sign
    out.extend(k1[i:])
    out.extend(k2[j:])
    return tuple(out), sign


def insert_key(key: Key, v: VarId):
    """Insert one id in front position semantics: dv ^ dq_key."""
    pos = bisect_left(key, v)
    if pos < len(key) and key[pos] == v:
        return None
    return key[:pos] + (v,) + key[pos:], (-1) ** pos


def subset_sign(part: Key, whole: Key):
    """Sign of contracting the increasing tuple ``part`` out of ``whole``.

    Matches iterated innermost-first contraction by basis vectors:
    the first (smallest) element of part is contracted first.
    Returns (remaining key, sign) or None if part is not a subset.
    """
    pos = {v: i for i, v in enumerate(whole)}
    total = 0
    for rank, v in enumerate(part):
        i = pos.get(v)
        if i is None:
            return None
        total += i - rank
    dropped = set(part)
    remaining = tuple(v for v in whole if v not in dropped)
    return remaining, (-1) ** (total & 1)


class _Graded:
    """Shared sparse container for forms and multivectors."""

    __slots__ = ("chart", "degree", "terms")

    def __init__(self, chart: Chart, degree: int, terms: Mapping[Key, Poly], *, _clean=False):
        if degree < 0:
            raise ValueError("negative degree")
        self.chart = chart
        self.degree = degree
        if _clean:
            self.terms = dict(terms)
            return
        clean = {}
        for key, coeff in terms.items():
            key = tuple(key)
            if len(key) != degree:
                raise ValueError(f"key {key} does not have degree {degree}")
            if list(key) != sorted(set(key)):
                raise ValueError(f"key {key} is not strictly increasing")
            if not isinstance(coeff, Poly):
                coeff = Poly.const(coeff, chart)
            if coeff.is_zero():
                continue
            prev = clean.get(key)
            coeff = coeff if prev is None else prev.add(coeff)
            if coeff.is_zero():
                clean.pop(key, None)
            else:
                clean[key] = coeff
        self.terms = clean

    def is_zero(self) -> bool:
        return not self.terms

    def term_count(self) -> int:
        return len(self.terms)

    def coefficient(self, key: Key) -> Poly:
        return self.terms.get(tuple(key), Poly.zero(self.chart))

    def _check_mate(self, other):
        if self.chart is not other.chart:
            raise ChartMismatchError("operands live on different charts")

    def _binop_terms(self, other, negate: bool):
        self._check_mate(other)
        if self.degree != other.degree:
            if self.is_zero():
                return other.neg().terms if negate else dict(other.terms), other.degree
            if other.is_zero():
                return dict(self.terms), self.degree
            raise ValueError("degree mismatch")
        terms = dict(self.terms)
        for key, coeff in other.terms.items():
            c = coeff.neg() if negate else coeff
            prev = terms.get(key)
            c = c if prev is None else prev.add(c)
            if c.is_zero():
                terms.pop(key, None)
            else:
                terms[key] = c
        return terms, self.degree

    def map_coefficients(self, fn):
        terms = {}
        for key, coeff in self.terms.items():
            c = fn(coeff)
            if not c.is_zero():
                terms[key] = c
        return type(self)(self.chart, self.degree, terms, _clean=True)

    def __eq__(self, other):
        if not isinstance(other, _Graded):
            return NotImplemented
        if type(self) is not type(other):
            return NotImplemented
        if self.chart is not other.chart:
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        kind = type(self).__name__
        if not self.terms:
            return f"{kind}(deg={self.degree}, 0)"
        names = self.chart.names
        sym = "d" if isinstance(self, Form) else "@"
        parts = []
        for key in sorted(self.terms):
            basis = "^".join(f"{sym}{names[v]}" for v in key) or "1"
            parts.append(f"({self.terms[key]!r})·{basis}")
        return f"{kind}(deg={self.degree}, " + " + ".join(parts) + ")"


def _wedge(a: _Graded, b: _Graded, cls):
    a._check_mate(b)
    degree = a.degree + b.degree
    terms: dict = {}
    if degree > a.chart.dim:
        return cls(a.chart, degree, {}, _clean=True)
    for k1, f1 in a.terms.items():
        for k2, f2 in b.terms.items():
            merged = merge_keys(k1, k2)
            if merged is None:
                continue
            key, sign = merged
            c = f1.mul(f2)
            if sign < 0:
                c = c.neg()
            prev = terms.get(key)
            c = c if prev is None else prev.add(c)
            if c.is_zero():
                terms.pop(key, None)
            else:
                terms[key] = c
    return cls(a.chart, degree, terms, _clean=True)


class Form(_Graded):
    """Differential k-form with polynomial coefficients."""

    @staticmethod
    def zero(chart: Chart, degree: int = 0) -> "Form":
        return Form(chart, degree, {}, _clean=True)

    @staticmethod
    def function(p: Poly, chart: Chart) -> "Form":
        return Form(chart, 0, {(): p})

    @staticmethod
    def d_coord(chart: Chart, vid: VarId) -> "Form":
        return Form(chart, 1, {(vid,): Poly.const(1, chart)}, _clean=True)

    def wedge(self, other: "Form") -> "Form":
        return _wedge(self, other, Form)

    def add(self, other: "Form") -> "Form":
        terms, degree = self._binop_terms(other, False)
        return Form(self.chart, degree, terms, _clean=True)

    def sub(self, other: "Form") -> "Form":
        terms, degree = self._binop_terms(other, True)
        return Form(self.chart, degree, terms, _clean=True)

    def neg(self) -> "Form":
        return Form(self.chart, self.degree, {k: c.neg() for k, c in self.terms.items()}, _clean=True)

    def scale(self, factor) -> "Form":
        if isinstance(factor, Poly):
            return self.map_coefficients(lambda c: c.mul(factor))
        return self.map_coefficients(lambda c: c.scale(factor))

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.sub(other)

    def __neg__(self):
        return self.neg()

    def __xor__(self, other):
        return self.wedge(other)

    def exterior_derivative(self) -> "Form":
        terms: dict = {}
        for key, coeff in self.terms.items():
            for v in coeff.variables():
                dv = coeff.partial_derivative(v)
                if dv.is_zero():
                    continue
                ins = insert_key(key, v)
                if ins is None:
                    continue
                new_key, sign = ins
                c = dv if sign > 0 else dv.neg()
                prev = terms.get(new_key)
                c = c if prev is None else prev.add(c)
                if c.is_zero():
                    terms.pop(new_key, None)
                else:
                    terms[new_key] = c
        return Form(self.chart, self.degree + 1, terms, _clean=True)

    def lift(self, chart: Chart) -> "Form":
        if chart is self.chart:
            return self
        if not chart.is_extension_of(self.chart):
            raise ChartMismatchError("target chart does not extend the source chart")
        return Form(
            chart,
            self.degree,
            {k: Poly(chart, c.terms, _clean=True) for k, c in self.terms.items()},
            _clean=True,
        )


class MultiVector(_Graded):
    """Multivector field in the coordinate frame basis."""

    @staticmethod
    def zero(chart: Chart, degree: int = 1) -> "MultiVector":
        return MultiVector(chart, degree, {}, _clean=True)

    @staticmethod
    def basis_vector(chart: Chart, vid: VarId) -> "MultiVector":
        return MultiVector(chart, 1, {(vid,): Poly.const(1, chart)}, _clean=True)

    def wedge(self, other: "MultiVector") -> "MultiVector":
        return _wedge(self, other, MultiVector)

    def add(self, other: "MultiVector") -> "MultiVector":
        terms, degree = self._binop_terms(other, False)
        return MultiVector(self.chart, degree, terms, _clean=True)

    def sub(self, other: "MultiVector") -> "MultiVector":
        terms, degree = self._binop_terms(other, True)
        return MultiVector(self.chart, degree, terms, _clean=True)

    def neg(self) -> "MultiVector":
        return MultiVector(
            self.chart, self.degree, {k: c.neg() for k, c in self.terms.items()}, _clean=True
        )

    def scale(self, factor) -> "MultiVector":
        if isinstance(factor, Poly):
            return self.map_coefficients(lambda c: c.mul(factor))
        return self.map_coefficients(lambda c: c.scale(factor))

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.sub(other)

    def __neg__(self):
        return self.neg()

    def __xor__(self, other):
        return self.wedge(other)

    def apply(self, f: Poly) -> Poly:
        """Directional derivative v(f) of a function, degree-1 fields only."""
        if self.degree != 1:
            raise ValueError("apply expects a vector field")
        out = Poly.zero(self.chart)
        for (v,), coeff in self.terms.items():
            df = f.partial_derivative(v)
            if not df.is_zero():
                out = out.add(coeff.mul(df))
        return out

    def lift(self, chart: Chart) -> "MultiVector":
        if chart is self.chart:
            return self
        if not chart.is_extension_of(self.chart):
            raise ChartMismatchError("target chart does not extend the source chart")
        return MultiVector(
            chart,
            self.degree,
            {k: Poly(chart, c.terms, _clean=True) for k, c in self.terms.items()},
            _clean=True,
        )


# -- core pairings --------------------------------------------------------


def wedge(a, b):
    return a.wedge(b)


def exterior_derivative(a: Form) -> Form:
    return a.exterior_derivative()


def contract_vector(v: MultiVector, alpha: Form) -> Form:
    """Interior product of a degree-1 field, the basic contraction."""
    if v.degree != 1:
        raise ValueError("contract_vector expects a vector field")
    v._check_mate(alpha)
    if alpha.degree == 0:
        return Form.zero(alpha.chart, 0)
    comp = {key[0]: coeff for key, coeff in v.terms.items()}
    terms: dict = {}
    for key, f in alpha.terms.items():
        for pos, var in enumerate(key):
            u = comp.get(var)
            if u is None:
                continue
            c = u.mul(f)
            if pos & 1:
                c = c.neg()
            new_key = key[:pos] + key[pos + 1 :]
            prev = terms.get(new_key)
            c = c if prev is None else prev.add(c)
            if c.is_zero():
                terms.pop(new_key, None)
            else:
                terms[new_key] = c
    return Form(alpha.chart, alpha.degree - 1, terms, _clean=True)


def contract_factors(factors: Sequence[MultiVector], alpha: Form) -> Form:
    """(V1 ^ ... ^ Vp) _| alpha with V1 contracted innermost (first)."""
    out = alpha
    for v in factors:
        out = contract_vector(v, out)
        if out.is_zero():
            return Form.zero(alpha.chart, out.degree)
    return out


def interior_product(X: MultiVector, alpha: Form) -> Form:
    """Interior product with the innermost-first nesting convention."""
    X._check_mate(alpha)
    if X.degree == 0:
        # a 0-vector acts by plain multiplication
        scalar = X.terms.get((), Poly.zero(X.chart))
        return alpha.scale(scalar)
    if X.degree > alpha.degree:
        return Form.zero(alpha.chart, 0)
    if X.degree == 1:
        return contract_vector(X, alpha)
    terms: dict = {}
    for part, u in X.terms.items():
        for key, f in alpha.terms.items():
            hit = subset_sign(part, key)
            if hit is None:
                continue
            new_key, sign = hit
            c = u.mul(f)
            if sign < 0:
                c = c.neg()
            prev = terms.get(new_key)
            c = c if prev is None else prev.add(c)
            if c.is_zero():
                terms.pop(new_key, None)
            else:
                terms[new_key] = c
    return Form(alpha.chart, alpha.degree - X.degree, terms, _clean=True)


def lie_bracket(v: MultiVector, w: MultiVector) -> MultiVector:
    """Commutator of two vector fields."""
    if v.degree != 1 or w.degree != 1:
        raise ValueError("lie_bracket expects degree-1 fields")
    v._check_mate(w)
    comps: dict = {}

    def accumulate(key, poly):
        prev = comps.get(key)
        poly = poly if prev is None else prev.add(poly)
        if poly.is_zero():
            comps.pop(key, None)
        else:
            comps[key] = poly

    for (a,), va in v.terms.items():
        for key, wb in w.terms.items():
            d = wb.partial_derivative(a)
            if not d.is_zero():
                accumulate(key, va.mul(d))
    for (a,), wa in w.terms.items():
        for key, vb in v.terms.items():
            d = vb.partial_derivative(a)
            if not d.is_zero():
                accumulate(key, wa.mul(d).neg())
    return MultiVector(v.chart, 1, comps, _clean=True)


def _wedge_key_chain(keys: Sequence[Key]):
    """Ordered wedge of several increasing keys; (key, sign) or None."""
    out: Key = ()
    sign = 1
    for k in keys:
        merged = merge_keys(out, k)
        if merged is None:
            return None
        out, s = merged
        sign *= s
    return out, sign


def schouten_nijenhuis(U: MultiVector, V: MultiVector) -> MultiVector:
    """Graded bracket of multivector fields.

    Reduces to the Lie bracket on vectors and, for decomposables,
    expands pairwise: [X1^..^Xp, Y1^..^Yq] =
    sum_{i,j} (-1)^(i+j) [Xi, Yj] ^ X1..no Xi..Xp ^ Y1..no Yj..Yq.
    Degree-0 arguments are handled through the graded Leibniz rule.
    """
    U._check_mate(V)
    p, q = U.degree, V.degree
    chart = U.chart

    if p == 0 and q == 0:
        return MultiVector.zero(chart, 0)
    if p == 0:
        # [f, Y1^..^Yq] = sum_j (-1)^j Yj(f) * (drop j), 1-based j
        f = U.terms.get((), Poly.zero(chart))
        terms: dict = {}
        for key, coeff in V.terms.items():
            for pos, var in enumerate(key):
                df = f.partial_derivative(var)
                if df.is_zero():
                    continue
                c = coeff.mul(df)
                if (pos + 1) & 1:
                    c = c.neg()
                new_key = key[:pos] + key[pos + 1 :]
                prev = terms.get(new_key)
                c = c if prev is None else prev.add(c)
                if c.is_zero():
                    terms.pop(new_key, None)
                else:
                    terms[new_key] = c
        return MultiVector(chart, q - 1, terms, _clean=True)
    if q == 0:
        sign = (-1) ** p
        res = schouten_nijenhuis(V, U)
        return res.scale(sign)

    degree = p + q - 1
    terms: dict = {}

    def accumulate(key, poly):
        prev = terms.get(key)
        poly = poly if prev is None else prev.add(poly)
        if poly.is_zero():
            terms.pop(key, None)
        else:
            terms[key] = poly

    for P, u in U.terms.items():
        for L, v in V.terms.items():
            for i in range(p):
                a = P[i]
                rest_u = P[:i] + P[i + 1 :]
                for j in range(q):
                    b = L[j]
                    rest_v = L[:j] + L[j + 1 :]
                    pieces = []  # (direction var, coefficient poly)
                    if i == 0 and j == 0:
                        dv = v.partial_derivative(a)
                        if not dv.is_zero():
                            pieces.append((b, u.mul(dv)))
                        du = u.partial_derivative(b)
                        if not du.is_zero():
                            pieces.append((a, v.mul(du).neg()))
                    elif i == 0:
                        du = u.partial_derivative(b)
                        if not du.is_zero():
                            pieces.append((a, v.mul(du).neg()))
                    elif j == 0:
                        dv = v.partial_derivative(a)
                        if not dv.is_zero():
                            pieces.append((b, u.mul(dv)))
                    if not pieces:
                        continue
                    pair_sign = (-1) ** (i + j)
                    for c_var, c_poly in pieces:
                        chain = _wedge_key_chain([(c_var,), rest_u, rest_v])
                        if chain is None:
                            continue
                        key, sign = chain
                        total = pair_sign * sign
                        accumulate(key, c_poly if total > 0 else c_poly.neg())
    return MultiVector(chart, degree, terms, _clean=True)


def lie_derivative(v: MultiVector, alpha: Form) -> Form:
    """Cartan formula: L_v = d(v _| .) + v _| d(.)."""
    if v.degree != 1:
        raise ValueError("lie_derivative expects a vector field")
    return contract_vector(v, alpha.exterior_derivative()).add(
        contract_vector(v, alpha).exterior_derivative()
    )


def pullback(mapping: Mapping[VarId, Poly], alpha: Form, chart: Optional[Chart] = None) -> Form:
    """Pull a form back along the polynomial map q -> mapping[q].

    Coordinates missing from the mapping are kept as themselves, which
    realizes constraint-surface inclusions as partial substitutions. The
    basis 1-forms follow by the chain rule: dq -> d(mapping[q]).
    """
    target = chart if chart is not None else alpha.chart
    differentials: dict = {}

    def d_of(vid: VarId) -> Form:
        got = differentials.get(vid)
        if got is not None:
            return got
        image = mapping.get(vid)
        if image is None:
            out = Form.d_coord(target, vid)
        else:
            terms = {}
            for w in image.variables():
                dw = image.partial_derivative(w)
                if not dw.is_zero():
                    terms[(w,)] = Poly(target, dw.terms, _clean=True)
            out = Form(target, 1, terms, _clean=True)
        differentials[vid] = out
        return out

    result = Form.zero(target, alpha.degree)
    for key, coeff in alpha.terms.items():
        part = Form.function(coeff.substitute(mapping, space=target), target)
        for vid in key:
            part = part.wedge(d_of(vid))
            if part.is_zero():
                break
        if not part.is_zero():
            result = result.add(part)
    return result


def is_locally_hamiltonian(xi: MultiVector, omega: Form) -> Form:
    """Residual d(xi _| omega); zero means the field preserves omega."""
    return interior_product(xi, omega).exterior_derivative()


def volume_forms(chart: Chart):
    """The base volume form and its first two contraction families.

    Returns (b, {mu: b_mu}, {(mu, nu): b_munu}) built from the chart's
    base coordinates, with b_mu = d/dx^mu _| b and
    b_munu = d/dx^mu _| d/dx^nu _| b (nu contracted first).
    """
    base = chart.role_vars("x")
    if not base:
        raise ValueError("chart has no base coordinates")
    n = len(base)
    beta = Form(chart, n, {tuple(base): Poly.const(1, chart)}, _clean=True)
    beta_mu = {}
    for mu in range(n):
        beta_mu[mu] = contract_vector(MultiVector.basis_vector(chart, base[mu]), beta)
    beta_munu = {}
    for mu in range(n):
        d_mu = MultiVector.basis_vector(chart, base[mu])
        for nu in range(n):
            if mu == nu:
                beta_munu[(mu, nu)] = Form.zero(chart, n - 2)
                continue
            beta_munu[(mu, nu)] = contract_vector(d_mu, beta_mu[nu])
    return beta, beta_mu, beta_munu
