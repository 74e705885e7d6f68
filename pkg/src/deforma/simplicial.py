"""Semicosimplicial complexes and DGLAs, their total complex, and the
Thom-Whitney totalization with the Whitney/Dupont contraction.

A semicosimplicial object here is a finite truncation: levels 0..N with
coface maps del_k: level_{n-1} -> level_n for 0 <= k <= n satisfying
del_l del_k = del_{k+1} del_l for l <= k.

The total complex places level n in total degree (internal degree + n) with
differential (-1)^n d_n plus the alternating coface sum.  The Thom-Whitney
totalization tensors level n with polynomial forms on the n-simplex and
keeps the face-compatible sequences; its elements are handled lazily as
per-level dictionaries {basis key: form}.

Sign conventions (all verified exactly in tests):
  - d(v (x) a) = dv (x) a + (-1)^{deg v} v (x) da;
  - integration I multiplies the level-n, internal-degree-q component by
    (-1)^{nq}; with our face maps Stokes holds with no extra sign, which
    makes this twist the unique one turning I into a chain map;
  - the inclusion E uses the same twist so that I E = Id on the nose.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from . import linalg
from .apl import (
    APLForm,
    dupont_h as apl_dupont_h,
    face,
    fadd,
    fd,
    fmul,
    fscale,
    integrate,
    whitney_form,
    zero_form,
)
from .dgla import DGLA, ValidityReport, check_dgla, check_dgla_morphism, DGLAMorphism
from .graded import (
    Complex,
    GradedLinearMap,
    GradedVectorSpace,
    Vector,
    sign,
    vadd,
    vbasis,
    vscale,
)

Key = tuple


def _as_complex(level) -> Complex:
    return level.complex if isinstance(level, DGLA) else level


@dataclass
class SemicosimplicialObject:
    """levels[n] is a Complex or DGLA; cofaces[n] (n >= 1) lists the n+1
    maps del_0..del_n from level n-1 to level n.  cofaces[0] is empty."""

    levels: list
    cofaces: list[list[GradedLinearMap]]

    def __post_init__(self):
        if len(self.cofaces) != len(self.levels):
            raise ValueError("need one coface list per level")
        if self.cofaces[0]:
            raise ValueError("level 0 has no cofaces")
        for n in range(1, len(self.levels)):
            if len(self.cofaces[n]) != n + 1:
                raise ValueError(f"level {n} needs {n + 1} cofaces")

    @property
    def truncation(self) -> int:
        return len(self.levels) - 1

    def complex(self, n: int) -> Complex:
        return _as_complex(self.levels[n])

    def is_dgla(self) -> bool:
        return all(isinstance(lv, DGLA) for lv in self.levels)

    def coface(self, n: int, k: int) -> GradedLinearMap:
        return self.cofaces[n][k]


def check_semicosimplicial(S: SemicosimplicialObject) -> ValidityReport:
    """Cosimplicial identities del_l del_k = del_{k+1} del_l (l <= k) plus
    structure preservation of every coface."""
    bad: list[str] = []
    for n in range(1, S.truncation + 1):
        for k in range(n + 1):
            dk = S.coface(n, k)
            if dk.degree != 0:
                bad.append(f"coface ({n},{k}) has degree {dk.degree}")
                continue
            before = dk.compose(S.complex(n - 1).differential)
            after = S.complex(n).differential.compose(dk)
            if not (before == after):
                bad.append(f"coface ({n},{k}) is not a chain map")
            if S.is_dgla():
                rep = check_dgla_morphism(
                    DGLAMorphism(S.levels[n - 1], S.levels[n], dk))
                if not rep:
                    bad.append(f"coface ({n},{k}): " + "; ".join(rep.violations))
    for n in range(2, S.truncation + 1):
        for k in range(n):
            for l in range(k + 1):
                lhs = S.coface(n, l).compose(S.coface(n - 1, k))
                rhs = S.coface(n, k + 1).compose(S.coface(n - 1, l))
                if not (lhs == rhs):
                    bad.append(
                        f"identity del_{l} del_{k} = del_{k + 1} del_{l} "
                        f"fails into level {n}"
                    )
    return ValidityReport(not bad, bad)


# total complex ---------------------------------------------------------------


@dataclass
class TotComplex:
    complex: Complex
    # (level, level key) <-> Tot key
    to_tot: dict
    from_tot: dict

    def include(self, n: int, vec: Vector) -> Vector:
        return {self.to_tot[(n, k)]: c for k, c in vec.items()}


def tot(S: SemicosimplicialObject) -> TotComplex:
    """Total complex: level-n internal degree q sits in total degree q + n,
    with differential (-1)^n d_n + sum_k (-1)^k del_k."""
    rep = check_semicosimplicial(S)
    if not rep:
        raise ValueError("invalid semicosimplicial object: "
                         + "; ".join(rep.violations))
    comps: dict[int, list[str]] = {}
    to_tot = {}
    from_tot = {}
    degs = set()
    for n in range(S.truncation + 1):
        for q in S.complex(n).space.degrees():
            degs.add(q + n)
    for t in sorted(degs):
        labels = []
        for n in range(S.truncation + 1):
            sp = S.complex(n).space
            for i, lab in enumerate(sp.components.get(t - n, [])):
                to_tot[(n, (t - n, i))] = (t, len(labels))
                from_tot[(t, len(labels))] = (n, (t - n, i))
                labels.append(f"{n}:{lab}")
        if labels:
            comps[t] = labels
    space = GradedVectorSpace(comps)
    blocks: dict[int, list] = {}
    for t in space.degrees():
        rows, cols = space.dim(t + 1), space.dim(t)
        if not rows or not cols:
            continue
        m = linalg.zeros(rows, cols)
        for i in range(cols):
            n, key = from_tot[(t, i)]
            img: Vector = {}
            dn = S.complex(n).d(vbasis(key))
            for k, c in dn.items():
                img = vadd(img, {to_tot[(n, k)]: sign(n) * c})
            if n + 1 <= S.truncation:
                for k in range(n + 2):
                    dk = S.coface(n + 1, k).apply(vbasis(key))
                    for kk, c in dk.items():
                        img = vadd(img, {to_tot[(n + 1, kk)]: sign(k) * c})
            for (tt, j), c in img.items():
                m[j][i] = c
        if not linalg.is_zero(m):
            blocks[t] = m
    cx = Complex(space, GradedLinearMap(space, space, 1, blocks))
    return TotComplex(cx, to_tot, from_tot)


# Thom-Whitney elements -------------------------------------------------------


@dataclass
class TWElement:
    """parts[n] maps level-n basis keys to forms on the n-simplex."""

    parts: list[dict]

    def is_zero(self) -> bool:
        return all(not p for p in self.parts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TWElement):
            return NotImplemented
        if len(self.parts) != len(other.parts):
            return False
        return all(a == b for a, b in zip(self.parts, other.parts))


def tw_zero(S: SemicosimplicialObject) -> TWElement:
    return TWElement([{} for _ in range(S.truncation + 1)])


def _put(part: dict, key, form: APLForm):
    cur = part.get(key)
    tot_form = fadd(cur, form) if cur is not None else form
    if tot_form.terms:
        part[key] = tot_form
    else:
        part.pop(key, None)


def tw_add(x: TWElement, y: TWElement) -> TWElement:
    parts = [dict(p) for p in x.parts]
    for n, p in enumerate(y.parts):
        for k, a in p.items():
            _put(parts[n], k, a)
    return TWElement(parts)


def tw_scale(c, x: TWElement) -> TWElement:
    c = Fraction(c)
    if not c:
        return TWElement([{} for _ in x.parts])
    return TWElement([{k: fscale(c, a) for k, a in p.items()} for p in x.parts])


def tw_degree(x: TWElement) -> int | None:
    """Total degree: internal degree plus form degree, must be uniform."""
    degs = set()
    for p in x.parts:
        for (q, _i), a in p.items():
            for (_e, dts) in a.terms:
                degs.add(q + len(dts))
    if not degs:
        return None
    if len(degs) > 1:
        raise ValueError(f"inhomogeneous TW element: degrees {sorted(degs)}")
    return degs.pop()


def tw_d(S: SemicosimplicialObject, x: TWElement) -> TWElement:
    """d(v (x) a) = dv (x) a + (-1)^{deg v} v (x) da, levelwise."""
    out = tw_zero(S)
    for n, p in enumerate(x.parts):
        cx = S.complex(n)
        for key, a in p.items():
            for k, c in cx.d(vbasis(key)).items():
                _put(out.parts[n], k, fscale(c, a))
            da = fd(a)
            if da.terms:
                _put(out.parts[n], key, fscale(sign(key[0]), da))
    return out


def tw_compatibility_violations(S: SemicosimplicialObject,
                                x: TWElement) -> list[str]:
    """The defining condition: (Id (x) delta^k) x_n = (del_k (x) Id) x_{n-1}."""
    bad = []
    for n in range(1, S.truncation + 1):
        for k in range(n + 1):
            lhs: dict = {}
            for key, a in x.parts[n].items():
                _put(lhs, key, face(k, a))
            rhs: dict = {}
            for key, a in x.parts[n - 1].items():
                for kk, c in S.coface(n, k).apply(vbasis(key)).items():
                    _put(rhs, kk, fscale(c, a))
            if lhs != rhs:
                bad.append(f"compatibility fails at level {n}, face {k}")
    return bad


def tw_bilinear(S_out: SemicosimplicialObject, phi, x: TWElement,
                y: TWElement) -> TWElement:
    """Levelwise bilinear extension: (v (x) a) * (w (x) b) maps to
    (-1)^{|a| |w|} phi(n, v, w) (x) (a ^ b).  phi(n, v_key, w_key) -> Vector
    in the output level n.  Preserves face compatibility whenever phi
    commutes with the cofaces."""
    out = tw_zero(S_out)
    for n in range(min(len(x.parts), len(y.parts))):
        for (vk, a) in x.parts[n].items():
            for (wk, b) in y.parts[n].items():
                val = phi(n, vk, wk)
                if not val:
                    continue
                for (ea, dta), ca in a.terms.items():
                    mono = APLForm(n, {(ea, dta): ca})
                    prod = fmul(mono, b)
                    if not prod.terms:
                        continue
                    s = sign(len(dta) * wk[0])
                    for k, c in val.items():
                        _put(out.parts[n], k, fscale(s * c, prod))
    return out


def tw_bracket(S: SemicosimplicialObject, x: TWElement,
               y: TWElement) -> TWElement:
    """The DGLA bracket on the Thom-Whitney totalization."""
    if not S.is_dgla():
        raise ValueError("levels are not DGLAs")

    def phi(n, vk, wk):
        return S.levels[n].bracket_basis(vk, wk)

    return tw_bilinear(S, phi, x, y)


def tw_tensor_phi(S_out: SemicosimplicialObject, phi, x: TWElement,
                  y: TWElement) -> TWElement:
    """A levelwise bilinear map of semicosimplicial objects induces a map of
    Thom-Whitney totalizations; alias of tw_bilinear with the Koszul rule."""
    return tw_bilinear(S_out, phi, x, y)


# Whitney / Dupont maps -------------------------------------------------------


def whitney_I(S: SemicosimplicialObject, T: TotComplex,
              x: TWElement) -> Vector:
    """Integration over each simplex.  The level-n internal-degree-q
    component carries the sign (-1)^{nq}; with our orientation of Stokes'
    theorem this is the unique twist making I a chain map to Tot."""
    out: Vector = {}
    for n, p in enumerate(x.parts):
        for key, a in p.items():
            val = integrate(a)
            if val:
                out = vadd(out, {T.to_tot[(n, key)]: sign(n * key[0]) * val})
    return out


def _composite_map(S: SemicosimplicialObject, n: int, m: int,
                   image: tuple) -> GradedLinearMap:
    """Composite of cofaces level_n -> level_m whose underlying injection
    [n] -> [m] has the given image; factored off the largest missing index."""
    if m == n:
        return GradedLinearMap.identity(S.complex(n).space)
    missing = [j for j in range(m + 1) if j not in image]
    j = max(missing)
    prev = tuple(i if i < j else i - 1 for i in image)
    return S.coface(m, j).compose(_composite_map(S, n, m - 1, prev))


def whitney_E(S: SemicosimplicialObject, T: TotComplex, x: Vector) -> TWElement:
    """Inclusion of Tot into the Thom-Whitney totalization via elementary
    forms: a level-n element v spreads to level m >= n as the sum over
    order-preserving injections f of (composite coface along f)(v) tensor
    the elementary form of the image of f, with the same (-1)^{nq} twist as
    whitney_I so that I E = Id.  The twist depends only on the source level
    n: a level-dependent sign would break face compatibility of the image."""
    out = tw_zero(S)
    for tk, c in x.items():
        n, key = T.from_tot[tk]
        q = key[0]
        for m in range(n, S.truncation + 1):
            for image in combinations(range(m + 1), n + 1):
                comp = _composite_map(S, n, m, image).apply(vbasis(key))
                if not comp:
                    continue
                w = whitney_form(m, image)
                for kk, cc in comp.items():
                    _put(out.parts[m], kk, fscale(sign(n * q) * c * cc, w))
    return out


def tw_dupont_h(S: SemicosimplicialObject, x: TWElement) -> TWElement:
    """Levelwise Dupont homotopy with the Koszul sign of passing a degree -1
    operator over the level factor: h(v (x) a) = (-1)^{deg v} v (x) h_n(a).
    Satisfies E I - Id = h d + d h on face-compatible elements."""
    out = tw_zero(S)
    for n, p in enumerate(x.parts):
        for key, a in p.items():
            ha = apl_dupont_h(a)
            if ha.terms:
                _put(out.parts[n], key, fscale(sign(key[0]), ha))
    return out


# Cech diagrams ---------------------------------------------------------------


@dataclass
class CechDiagram:
    S: SemicosimplicialObject
    # (simplex tuple, section key) <-> level key
    to_level: dict
    from_level: dict

    def include(self, simplex: tuple, vec: Vector) -> Vector:
        return {self.to_level[(simplex, k)]: c for k, c in vec.items()}


def cech_diagram(nerve: list[tuple], sections: dict,
                 restrictions: dict | None = None) -> CechDiagram:
    """Cech semicosimplicial object of a cover.

    nerve lists the simplices (increasing tuples of open-set indices) with
    nonempty intersection; sections maps each simplex to a Complex or DGLA;
    restrictions maps (J, I) with J = I minus one vertex to the restriction
    map sections[J] -> sections[I].  Omitted restrictions default to the
    identity, which requires equal section spaces (constant coefficients).
    Level n is the direct sum over (n+1)-simplices, and the coface del_h
    restricts from the simplex with its h-th vertex omitted.
    """
    restrictions = dict(restrictions or {})
    nerve = sorted(set(tuple(s) for s in nerve), key=lambda s: (len(s), s))
    for s in nerve:
        if list(s) != sorted(set(s)):
            raise ValueError(f"simplex {s} is not strictly increasing")
        if s not in sections:
            raise ValueError(f"missing sections over {s}")
    by_size: dict[int, list[tuple]] = {}
    for s in nerve:
        by_size.setdefault(len(s) - 1, []).append(s)
    N = max(by_size)
    if sorted(by_size) != list(range(N + 1)):
        raise ValueError("nerve is not closed under faces")

    def restriction(J: tuple, I: tuple) -> GradedLinearMap:
        r = restrictions.get((J, I))
        if r is None:
            src, tgt = _as_complex(sections[J]).space, _as_complex(sections[I]).space
            if src.components != tgt.components:
                raise ValueError(f"missing restriction {J} -> {I}")
            r = GradedLinearMap.identity(src)
        return r

    is_dgla = all(isinstance(sections[s], DGLA) for s in nerve)
    levels = []
    to_level: dict = {}
    from_level: dict = {}
    for n in range(N + 1):
        comps: dict[int, list[str]] = {}
        for I in by_size[n]:
            sp = _as_complex(sections[I]).space
            for d in sp.degrees():
                labels = comps.setdefault(d, [])
                for i, lab in enumerate(sp.components[d]):
                    to_level[(I, (d, i))] = (d, len(labels))
                    from_level[(n, (d, len(labels)))] = (I, (d, i))
                    labels.append(f"{','.join(map(str, I))}|{lab}")
        space = GradedVectorSpace(comps)
        blocks: dict[int, list] = {}
        for d in space.degrees():
            rows, cols = space.dim(d + 1), space.dim(d)
            if not rows or not cols:
                continue
            m = linalg.zeros(rows, cols)
            for i in range(cols):
                I, key = from_level[(n, (d, i))]
                for k, c in _as_complex(sections[I]).d(vbasis(key)).items():
                    (_, j) = to_level[(I, k)]
                    m[j][i] = c
            if not linalg.is_zero(m):
                blocks[d] = m
        cx = Complex(space, GradedLinearMap(space, space, 1, blocks))
        if is_dgla:
            table = {}
            for (I1, k1), lk1 in to_level.items():
                if len(I1) != n + 1:
                    continue
                for (I2, k2), lk2 in to_level.items():
                    if I2 != I1:
                        continue
                    v = sections[I1].bracket_basis(k1, k2)
                    if v:
                        table[(lk1, lk2)] = {to_level[(I1, k)]: c
                                             for k, c in v.items()}
            levels.append(DGLA(cx, table))
        else:
            levels.append(cx)
    cofaces: list[list[GradedLinearMap]] = [[]]
    for n in range(1, N + 1):
        maps = []
        src, tgt = _as_complex(levels[n - 1]).space, _as_complex(levels[n]).space
        for h in range(n + 1):
            mat = {d: linalg.zeros(tgt.dim(d), src.dim(d))
                   for d in src.degrees() if tgt.dim(d) and src.dim(d)}
            for I in by_size[n]:
                J = I[:h] + I[h + 1:]
                if J not in sections:
                    raise ValueError(f"nerve is missing face {J} of {I}")
                r = restriction(J, I)
                sp = _as_complex(sections[J]).space
                for key in sp.basis():
                    (d, col) = to_level[(J, key)]
                    for k, c in r.apply(vbasis(key)).items():
                        (_, row) = to_level[(I, k)]
                        if d in mat:
                            mat[d][row][col] = mat[d][row][col] + c
            maps.append(GradedLinearMap(src, tgt, 0, mat))
        cofaces.append(maps)
    return CechDiagram(SemicosimplicialObject(levels, cofaces),
                       to_level, from_level)
