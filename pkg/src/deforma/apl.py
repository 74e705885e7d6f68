"""Polynomial differential forms on standard simplices, exactly.

A form on the n-simplex {(t_0..t_n) : sum t_i = 1} lives in
K[t_0..t_n, dt_0..dt_n] / (1 - sum t_i, sum dt_i).  The normal form
eliminates t_0 = 1 - sum_{i>=1} t_i and dt_0 = -sum_{i>=1} dt_i, leaving a
unique sparse representation over monomials t_1^{a_1}..t_n^{a_n} dt_I with
I a sorted subset of {1..n}.  All coefficients are rational.

The module also provides the simplicial face maps, integration over the
simplex, Whitney elementary forms, vertex Poincare contractions, and
Dupont's simplicial homotopy operator built from them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

Mono = tuple  # (exponents: tuple[int,...] of length n, dts: sorted tuple of indices 1..n)


@dataclass
class APLForm:
    """Sparse polynomial form on the standard n-simplex in normal form."""

    n: int
    terms: dict[Mono, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (exps, dts), c in self.terms.items():
            c = Fraction(c)
            if not c:
                continue
            if len(exps) != self.n:
                raise ValueError(f"exponent tuple {exps} on a {self.n}-simplex")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            if list(dts) != sorted(set(dts)) or any(
                not 1 <= i <= self.n for i in dts
            ):
                raise ValueError(f"bad dt index tuple {dts}")
            clean[(tuple(exps), tuple(dts))] = c
        self.terms = clean

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, APLForm)
            and self.n == other.n
            and self.terms == other.terms
        )

    def form_degrees(self) -> set[int]:
        return {len(dts) for (_, dts) in self.terms}

    def homogeneous_degree(self) -> int | None:
        degs = self.form_degrees()
        if len(degs) != 1:
            return None
        return degs.pop()

    def component(self, p: int) -> "APLForm":
        """The form-degree p part."""
        return APLForm(
            self.n, {m: c for m, c in self.terms.items() if len(m[1]) == p}
        )


def zero_form(n: int) -> APLForm:
    return APLForm(n, {})


def const_form(n: int, c) -> APLForm:
    return APLForm(n, {((0,) * n, ()): Fraction(c)})


def t(n: int, i: int) -> APLForm:
    """The barycentric coordinate t_i on the n-simplex, 0 <= i <= n."""
    if not 0 <= i <= n:
        raise ValueError(f"coordinate index {i} on a {n}-simplex")
    if i == 0:
        terms = {((0,) * n, ()): Fraction(1)}
        for j in range(1, n + 1):
            e = [0] * n
            e[j - 1] = 1
            terms[(tuple(e), ())] = Fraction(-1)
        return APLForm(n, terms)
    e = [0] * n
    e[i - 1] = 1
    return APLForm(n, {(tuple(e), ()): Fraction(1)})


def dt(n: int, i: int) -> APLForm:
    """The one-form dt_i on the n-simplex, 0 <= i <= n."""
    if not 0 <= i <= n:
        raise ValueError(f"coordinate index {i} on a {n}-simplex")
    if i == 0:
        return APLForm(
            n, {((0,) * n, (j,)): Fraction(-1) for j in range(1, n + 1)}
        )
    return APLForm(n, {((0,) * n, (i,)): Fraction(1)})


def fadd(a: APLForm, b: APLForm) -> APLForm:
    if a.n != b.n:
        raise ValueError("forms on different simplices")
    terms = dict(a.terms)
    for m, c in b.terms.items():
        v = terms.get(m, Fraction(0)) + c
        if v:
            terms[m] = v
        else:
            terms.pop(m, None)
    return APLForm(a.n, terms)


def fscale(c, a: APLForm) -> APLForm:
    c = Fraction(c)
    if not c:
        return zero_form(a.n)
    return APLForm(a.n, {m: c * x for m, x in a.terms.items()})


def _wedge_dts(I: tuple, J: tuple) -> tuple[tuple, int] | tuple[None, int]:
    """Merge two sorted dt index tuples; (None, 0) if they intersect."""
    if set(I) & set(J):
        return None, 0
    sign = 1
    # count inversions while merging: each dt is odd
    for pos, j in enumerate(J):
        greater = sum(1 for i in I if i > j)
        if greater % 2:
            sign = -sign
    merged = tuple(sorted(I + J))
    return merged, sign


def fmul(a: APLForm, b: APLForm) -> APLForm:
    """Wedge product; graded-commutative with dt's odd."""
    if a.n != b.n:
        raise ValueError("forms on different simplices")
    terms: dict[Mono, Fraction] = {}
    for (ea, Ia), ca in a.terms.items():
        for (eb, Ib), cb in b.terms.items():
            merged, sgn = _wedge_dts(Ia, Ib)
            if merged is None:
                continue
            mono = (tuple(x + y for x, y in zip(ea, eb)), merged)
            v = terms.get(mono, Fraction(0)) + sgn * ca * cb
            if v:
                terms[mono] = v
            else:
                terms.pop(mono, None)
    return APLForm(a.n, terms)


def fd(a: APLForm) -> APLForm:
    """Exterior differential; d^2 = 0."""
    terms: dict[Mono, Fraction] = {}
    for (exps, dts), c in a.terms.items():
        for j in range(1, a.n + 1):
            e = exps[j - 1]
            if not e or j in dts:
                continue
            newexps = list(exps)
            newexps[j - 1] -= 1
            merged, sgn = _wedge_dts((j,), dts)
            mono = (tuple(newexps), merged)
            v = terms.get(mono, Fraction(0)) + sgn * e * c
            if v:
                terms[mono] = v
            else:
                terms.pop(mono, None)
    return APLForm(a.n, terms)


def face(k: int, a: APLForm) -> APLForm:
    """The face map delta^k: forms on the n-simplex to forms on the
    (n-1)-simplex; t_i goes to t_i (i<k), 0 (i=k), t_{i-1} (i>k)."""
    n = a.n
    if not 0 <= k <= n:
        raise ValueError(f"face index {k} on a {n}-simplex")
    m = n - 1
    # images of the source coordinates t_1..t_n and dt_1..dt_n
    sub_t = {}
    sub_dt = {}
    for i in range(1, n + 1):
        if i < k:
            j = i
        elif i == k:
            sub_t[i] = zero_form(m)
            sub_dt[i] = zero_form(m)
            continue
        else:
            j = i - 1
        sub_t[i] = t(m, j)
        sub_dt[i] = dt(m, j)
    out = zero_form(m)
    for (exps, dts), c in a.terms.items():
        acc = const_form(m, c)
        for i in range(1, n + 1):
            e = exps[i - 1]
            for _ in range(e):
                acc = fmul(acc, sub_t[i])
                if not acc:
                    break
            if not acc:
                break
        if not acc:
            continue
        for i in dts:
            acc = fmul(acc, sub_dt[i])
            if not acc:
                break
        if acc:
            out = fadd(out, acc)
    return out


def integrate(a: APLForm) -> Fraction:
    """Integral over the n-simplex of the top-degree component, with the
    orientation for which dt_1 ^ ... ^ dt_n integrates to 1/n!.

    Uses int_{Delta_n} t_1^{a_1} ... t_n^{a_n} dt_1...dt_n
    = a_1! ... a_n! / (n + sum a_i)!.
    """
    n = a.n
    if n == 0:
        return a.terms.get(((), ()), Fraction(0))
    top = tuple(range(1, n + 1))
    out = Fraction(0)
    for (exps, dts), c in a.terms.items():
        if dts != top:
            continue
        num = math.prod(math.factorial(e) for e in exps)
        out += c * Fraction(num, math.factorial(n + sum(exps)))
    return out


def evaluate_at_vertex(a: APLForm, i: int) -> Fraction:
    """The value of the 0-form part at the vertex e_i."""
    n = a.n
    if not 0 <= i <= n:
        raise ValueError(f"vertex {i} on a {n}-simplex")
    out = Fraction(0)
    for (exps, dts), c in a.terms.items():
        if dts:
            continue
        if i == 0:
            if all(e == 0 for e in exps):
                out += c
        elif all(e == 0 for j, e in enumerate(exps) if j != i - 1):
            out += c
    return out


def whitney_form(n: int, I: tuple) -> APLForm:
    """Whitney elementary form omega_I on the n-simplex for a strictly
    increasing vertex tuple I = (i_0 < ... < i_k):

        omega_I = k! sum_j (-1)^j t_{i_j} dt_{i_0} ^ ... ^ (omit j) ... ^ dt_{i_k}
    """
    I = tuple(I)
    if list(I) != sorted(set(I)) or any(not 0 <= i <= n for i in I):
        raise ValueError(f"bad vertex tuple {I} on a {n}-simplex")
    k = len(I) - 1
    out = zero_form(n)
    for j in range(k + 1):
        part = const_form(n, Fraction(math.factorial(k) * (-1) ** j))
        part = fmul(part, t(n, I[j]))
        for idx, i in enumerate(I):
            if idx == j:
                continue
            part = fmul(part, dt(n, i))
        out = fadd(out, part)
    return out


def vertex_contraction(a: APLForm, i: int) -> APLForm:
    """The Poincare operator h_i for the dilation toward vertex e_i:
    h_i(a) = int_0^1 (du-component of phi_i^* a) du, where
    phi_i(u, x) = u x + (1-u) e_i.

    Satisfies d h_i + h_i d = Id - (evaluation at e_i) exactly.
    """
    n = a.n
    if not 0 <= i <= n:
        raise ValueError(f"vertex {i} on a {n}-simplex")
    out = zero_form(n)
    for (exps, dts), c in a.terms.items():
        k = len(dts)
        if k == 0:
            continue
        # phi^*(t_j) = u t_j + (1-u) delta_{ij}; phi^*(dt_j) = u dt_j + (t_j - delta_{ij}) du
        # pick the du-contributor at position p of the sorted dt tuple and
        # move du to the front past the p earlier odd generators (the
        # cylinder homotopy reads off gamma from phi^* a = beta + du ^ gamma)
        base_u = sum(e for j, e in enumerate(exps, start=1) if j != i)
        for p, jp in enumerate(dts):
            sgn = sign_pow(p)
            # coefficient form (t_{jp} - delta_{i,jp}) times t-monomial with
            # the binomial expansion of (u t_i + 1 - u)^{a_i} when i >= 1
            rest_dts = tuple(x for x in dts if x != jp)
            coeff_form = fadd(t(n, jp), fscale(-(1 if jp == i else 0), const_form(n, 1)))
            tmono = APLForm(n, {(exps, ()): Fraction(1)})
            if i >= 1 and exps[i - 1]:
                ai = exps[i - 1]
                acc = zero_form(n)
                lowered = list(exps)
                for b in range(ai + 1):
                    lowered_b = list(exps)
                    lowered_b[i - 1] = b
                    alpha = base_u + b + k - 1
                    beta = ai - b
                    integral = Fraction(
                        math.factorial(alpha) * math.factorial(beta),
                        math.factorial(alpha + beta + 1),
                    )
                    acc = fadd(
                        acc,
                        fscale(
                            math.comb(ai, b) * integral,
                            APLForm(n, {(tuple(lowered_b), ()): Fraction(1)}),
                        ),
                    )
                tpart = acc
            else:
                alpha = base_u + k - 1
                tpart = fscale(Fraction(1, alpha + 1), tmono)
            piece = fscale(sgn * c, fmul(fmul(tpart, coeff_form), dts_form(n, rest_dts)))
            out = fadd(out, piece)
    return out


def sign_pow(e: int) -> int:
    return -1 if e % 2 else 1


def dts_form(n: int, dts: tuple) -> APLForm:
    return APLForm(n, {((0,) * n, tuple(dts)): Fraction(1)})


def dupont_operator(a: APLForm) -> APLForm:
    """Dupont's simplicial contraction on the n-simplex:

        s_n = sum over strictly increasing vertex tuples I = (i_0 < ... < i_k)
              of (-1)^k omega_I ^ (h_{i_k} ... h_{i_1} h_{i_0}),

    which satisfies E_n I_n - Id = -(s_n d + d s_n) for the Whitney
    projection I_n and inclusion E_n.  The composition order and the sign
    (-1)^k were pinned by checking that identity exhaustively on monomials
    through the 4-simplex; n <= 2 alone does not discriminate.
    """
    n = a.n
    out = zero_form(n)
    for k in range(n + 1):
        for I in combinations(range(n + 1), k + 1):
            inner = a
            for i in I:
                inner = vertex_contraction(inner, i)
                if not inner:
                    break
            if inner:
                out = fadd(out, fscale(sign_pow(k), fmul(whitney_form(n, I), inner)))
    return out


def dupont_h(a: APLForm) -> APLForm:
    """The homotopy h = -s_n, normalized so that E I - Id = h d + d h.

    Also satisfies the transfer side conditions h^2 = 0, I h = 0, h E = 0
    (checked exhaustively on monomials through the 3-simplex)."""
    return fscale(-1, dupont_operator(a))


def whitney_projection(a: APLForm) -> dict[tuple, Fraction]:
    """Integrate over every face: maps a form on the n-simplex to the
    simplicial cochain {vertex tuple I: integral of the restriction}."""
    out = {}
    n = a.n
    for k in range(n + 1):
        for I in combinations(range(n + 1), k + 1):
            restricted = restrict_to_face(a, I)
            val = integrate(restricted)
            if val:
                out[I] = val
    return out


def restrict_to_face(a: APLForm, I: tuple) -> APLForm:
    """Pull back to the face spanned by vertices I (a |I|-1 simplex)."""
    n = a.n
    missing = sorted(set(range(n + 1)) - set(I), reverse=True)
    out = a
    for j in missing:
        out = face(j, out)
    return out
