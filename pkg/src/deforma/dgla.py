"""Differential graded Lie algebras, Maurer-Cartan elements, gauge action.

Brackets are stored as a full table of structure constants over ordered
pairs of basis keys, so that the axioms (skew-symmetry included) are
genuinely checkable rather than built into the representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .artinian import ArtinianAlgebra, Tensor, tadd, tbilinear, tclean, tmap, tscale, tzero
from .graded import (
    Complex,
    GradedLinearMap,
    GradedVectorSpace,
    Vector,
    rat,
    rat_str,
    sign,
    vadd,
    vscale,
)

Key = tuple  # (degree, index)


@dataclass
class DGLA:
    complex: Complex
    # ordered structure constants: (key_a, key_b) -> Vector, zero pairs omitted
    bracket_table: dict[tuple[Key, Key], Vector] = field(default_factory=dict)

    @property
    def space(self) -> GradedVectorSpace:
        return self.complex.space

    def bracket_basis(self, a: Key, b: Key) -> Vector:
        return self.bracket_table.get((a, b), {})

    def bracket(self, u: Vector, v: Vector) -> Vector:
        out: Vector = {}
        for ka, ca in u.items():
            for kb, cb in v.items():
                w = self.bracket_table.get((ka, kb))
                if w:
                    out = vadd(out, vscale(ca * cb, w))
        return out

    def d(self, v: Vector) -> Vector:
        return self.complex.d(v)

    def to_json(self) -> dict:
        sp = self.space
        return {
            "space": sp.to_json(),
            "differential": self.complex.differential.to_json(),
            "bracket": [
                {
                    "i": f"{a[0]}:{sp.label(a)}",
                    "j": f"{b[0]}:{sp.label(b)}",
                    "out": {f"{k[0]}:{sp.label(k)}": rat_str(c) for k, c in sorted(v.items())},
                }
                for (a, b), v in sorted(self.bracket_table.items())
                if v
            ],
        }

    @staticmethod
    def from_json(obj: dict) -> "DGLA":
        sp = GradedVectorSpace.from_json(obj["space"])
        diff = GradedLinearMap.from_json(obj["differential"], sp, sp)
        cx = Complex(sp, diff)
        lookup = {}
        for d in sp.degrees():
            for i, lab in enumerate(sp.components[d]):
                lookup[f"{d}:{lab}"] = (d, i)
        table = {}
        for ent in obj.get("bracket", []):
            a, b = lookup[ent["i"]], lookup[ent["j"]]
            table[(a, b)] = {lookup[k]: rat(c) for k, c in ent["out"].items()}
        return DGLA(cx, table)


def dgla_from_bracket_fn(cx: Complex, fn) -> DGLA:
    """Tabulate a bilinear bracket callable over all basis pairs."""
    table = {}
    keys = list(cx.space.basis())
    for a in keys:
        for b in keys:
            v = fn(a, b)
            if v:
                table[(a, b)] = v
    return DGLA(cx, table)


@dataclass
class ValidityReport:
    valid: bool
    violations: list[str]

    def __bool__(self) -> bool:
        return self.valid


def check_dgla(L: DGLA, max_violations: int = 10) -> ValidityReport:
    """Verify graded skew-symmetry, Jacobi and Leibniz on all basis tuples."""
    sp = L.space
    keys = list(sp.basis())
    bad: list[str] = []

    def name(k):
        return f"{sp.label(k)}(deg {k[0]})"

    for a in keys:
        for b in keys:
            lhs = L.bracket_basis(a, b)
            rhs = vscale(-sign(a[0] * b[0]), L.bracket_basis(b, a))
            if lhs != rhs:
                bad.append(f"skew-symmetry fails on ({name(a)}, {name(b)})")
            # Leibniz: d[a,b] = [da,b] + (-1)^deg(a) [a,db]
            da = L.d({a: Fraction(1)})
            db = L.d({b: Fraction(1)})
            left = L.d(lhs)
            right = vadd(L.bracket(da, {b: Fraction(1)}),
                         vscale(sign(a[0]), L.bracket({a: Fraction(1)}, db)))
            if left != right:
                bad.append(f"Leibniz fails on ({name(a)}, {name(b)})")
            if len(bad) >= max_violations:
                return ValidityReport(False, bad)
    for a in keys:
        for b in keys:
            for c in keys:
                lhs = L.bracket({a: Fraction(1)}, L.bracket_basis(b, c))
                rhs = vadd(
                    L.bracket(L.bracket_basis(a, b), {c: Fraction(1)}),
                    vscale(sign(a[0] * b[0]),
                           L.bracket({b: Fraction(1)}, L.bracket_basis(a, c))),
                )
                if lhs != rhs:
                    bad.append(
                        f"Jacobi fails on ({name(a)}, {name(b)}, {name(c)})"
                    )
                    if len(bad) >= max_violations:
                        return ValidityReport(False, bad)
    return ValidityReport(not bad, bad)


@dataclass
class DGLAMorphism:
    source: DGLA
    target: DGLA
    map: GradedLinearMap  # degree 0

    def apply(self, v: Vector) -> Vector:
        return self.map.apply(v)


def check_dgla_morphism(f: DGLAMorphism) -> ValidityReport:
    bad = []
    d_then_f = f.map.compose(f.source.complex.differential)
    f_then_d = f.target.complex.differential.compose(f.map)
    if not (d_then_f == f_then_d):
        bad.append("does not commute with differentials")
    for a in f.source.space.basis():
        for b in f.source.space.basis():
            lhs = f.apply(f.source.bracket_basis(a, b))
            rhs = f.target.bracket(f.apply({a: Fraction(1)}), f.apply({b: Fraction(1)}))
            if lhs != rhs:
                bad.append(f"bracket not preserved on ({a}, {b})")
                if len(bad) >= 10:
                    return ValidityReport(False, bad)
    return ValidityReport(not bad, bad)


def hom_complex(V: Complex) -> tuple[GradedVectorSpace, dict]:
    """The space Hom*(V,V) with basis 'elementary matrices' e_{target<-source};
    returns (space, key_table) where key_table maps hom-basis keys to
    (target_key, source_key) pairs."""
    sp = V.space
    vkeys = list(sp.basis())
    by_deg: dict[int, list] = {}
    for src in vkeys:
        for tgt in vkeys:
            hdeg = tgt[0] - src[0]
            by_deg.setdefault(hdeg, []).append((tgt, src))
    comps = {}
    table = {}
    for hdeg in sorted(by_deg):
        pairs = sorted(by_deg[hdeg])
        comps[hdeg] = [
            f"E[{sp.label(t)}@{t[0]}<-{sp.label(s)}@{s[0]}]" for t, s in pairs
        ]
        for i, pair in enumerate(pairs):
            table[(hdeg, i)] = pair
    return GradedVectorSpace(comps), table


def hom_dgla(V: Complex) -> tuple[DGLA, dict]:
    """The DGLA Hom*(V,V) with [f,g] = fg - (-1)^{|f||g|} gf and
    d(f) = [d_V, f].  Returns the DGLA and the elementary-matrix table."""
    hsp, table = hom_complex(V)
    inv = {pair: key for key, pair in table.items()}

    def compose_keys(k1, k2) -> Vector:
        # e_{t1<-s1} o e_{t2<-s2} = delta_{s1,t2} e_{t1<-s2}
        t1, s1 = table[k1]
        t2, s2 = table[k2]
        if s1 != t2:
            return {}
        return {inv[(t1, s2)]: Fraction(1)}

    def compose_vec(u: Vector, v: Vector) -> Vector:
        out: Vector = {}
        for k1, c1 in u.items():
            for k2, c2 in v.items():
                w = compose_keys(k1, k2)
                if w:
                    out = vadd(out, vscale(c1 * c2, w))
        return out

    def hom_of_map(m: GradedLinearMap) -> Vector:
        """Express a graded linear map V -> V as a hom-space element."""
        out: Vector = {}
        for s in V.space.basis():
            img = m.apply({s: Fraction(1)})
            for t, c in img.items():
                out[inv[(t, s)]] = c
        return out

    dV = hom_of_map(V.differential)

    def bracket_fn(a: Key, b: Key) -> Vector:
        u, v = {a: Fraction(1)}, {b: Fraction(1)}
        return vadd(compose_vec(u, v),
                    vscale(-sign(a[0] * b[0]), compose_vec(v, u)))

    # d(f) = [d_V, f] = d_V f - (-1)^{deg f} f d_V
    dblocks = {}
    for hd in hsp.degrees():
        cols = []
        for i in range(hsp.dim(hd)):
            f = {(hd, i): Fraction(1)}
            df = vadd(compose_vec(dV, f), vscale(-sign(hd), compose_vec(f, dV)))
            col = [Fraction(0)] * hsp.dim(hd + 1)
            for (dd, j), c in df.items():
                assert dd == hd + 1
                col[j] = c
            cols.append(col)
        if cols and hsp.dim(hd + 1):
            dblocks[hd] = linalg.transpose(cols)
    hcx = Complex(hsp, GradedLinearMap(hsp, hsp, 1, dblocks))
    return dgla_from_bracket_fn(hcx, bracket_fn), table


def sub_dgla_from_keys(L: DGLA, keys: list) -> tuple["DGLA", DGLAMorphism]:
    """The coordinate sub-DGLA spanned by a subset of basis keys, with its
    inclusion morphism.  Raises if the span is not closed under d and the
    bracket."""
    keyset = set(keys)
    sp = L.space
    sub_index = {}
    comps: dict[int, list[str]] = {}
    for key in sp.basis():
        if key in keyset:
            d = key[0]
            comps.setdefault(d, [])
            sub_index[key] = (d, len(comps[d]))
            comps[d].append(sp.label(key))
    subsp = GradedVectorSpace(comps)

    def restrict(vec: Vector) -> Vector:
        out = {}
        for k, c in vec.items():
            if k not in keyset:
                raise ValueError(f"span not closed: escapes through {sp.label(k)}")
            out[sub_index[k]] = c
        return out

    dblocks: dict[int, list] = {}
    for key in keys:
        img = restrict(L.d({key: Fraction(1)}))
        d = key[0]
        if not subsp.dim(d + 1):
            continue
        m = dblocks.setdefault(d, linalg.zeros(subsp.dim(d + 1), subsp.dim(d)))
        for (dd, j), c in img.items():
            m[j][sub_index[key][1]] = c
    subcx = Complex(subsp, GradedLinearMap(subsp, subsp, 1, dblocks))
    table = {}
    for a in keys:
        for b in keys:
            v = L.bracket_basis(a, b)
            if v:
                table[(sub_index[a], sub_index[b])] = restrict(v)
    sub = DGLA(subcx, table)
    iblocks: dict[int, list] = {}
    for key in keys:
        d, j = sub_index[key]
        m = iblocks.setdefault(d, linalg.zeros(sp.dim(d), subsp.dim(d)))
        m[key[1]][j] = Fraction(1)
    incl = DGLAMorphism(sub, L, GradedLinearMap(subsp, sp, 0, iblocks))
    return sub, incl


def preserving_endomorphisms(V: Complex, u_keys: list) -> tuple["DGLA", DGLAMorphism]:
    """The sub-DGLA {f in Hom*(V,V) | f(U) in U} for the coordinate
    subcomplex U spanned by ``u_keys``, with its inclusion into Hom*(V,V)."""
    uset = set(u_keys)
    for k in u_keys:
        img = V.differential.apply({k: Fraction(1)})
        if any(t not in uset for t in img):
            raise ValueError("u_keys do not span a subcomplex")
    H, table = hom_dgla(V)
    keys = [k for k in H.space.basis()
            if not (table[k][1] in uset and table[k][0] not in uset)]
    return sub_dgla_from_keys(H, keys)


# ---------------------------------------------------------------------------
# Maurer-Cartan and gauge over Artinian coefficients


def check_mc_dgla(L: DGLA, A: ArtinianAlgebra, x: Tensor) -> bool:
    """dx + 1/2 [x,x] = 0 in L^1 (x) m_A, exactly."""
    for mo, v in x.items():
        if sum(mo) == 0:
            raise ValueError("element not in L (x) m_A")
        for k in v:
            if k[0] != 1:
                raise ValueError("element not concentrated in degree 1")
    mc = tadd(tmap(L.d, x), tscale(Fraction(1, 2), tbilinear(A, L.bracket, x, x)))
    return not tclean(mc)


def gauge_act(L: DGLA, A: ArtinianAlgebra, a: Tensor, x: Tensor) -> Tensor:
    """e^a * x = x + sum_{n>=0} ad_a^n/(n+1)! ([a,x] - da), for a in L^0 (x) m_A."""
    for mo, v in a.items():
        for k in v:
            if k[0] != 0:
                raise ValueError("gauge element not concentrated in degree 0")
    if not check_mc_dgla(L, A, x):
        raise ValueError("gauge action applied to a non-Maurer-Cartan element")
    seed = tadd(tbilinear(A, L.bracket, a, x), tscale(-1, tmap(L.d, a)))
    out = dict(x)
    term = seed
    n = 0
    while term:
        out = tadd(out, tscale(Fraction(1, math.factorial(n + 1)), term))
        term = tbilinear(A, L.bracket, a, term)
        n += 1
        if n > A.nilpotency_order + 2:
            break
    return tclean(out)
