"""Cartan homotopies, contractions, and the induced morphism into a cone.

A Cartan homotopy for DGLAs L, M is a degree -1 linear map i: L -> M with

    i_{[a,b]} = [i_a, l_b]   and   [i_a, i_b] = 0,

where l_a = d_M(i_a) + i_{d_L a}.  Both identities are checked exactly on
all basis pairs; l is then automatically a DGLA morphism (also asserted).

A contraction of a complex V along L is a degree -1 pairing L x V -> V
whose induced map into the endomorphism DGLA Hom*(V,V) is a Cartan
homotopy.  Contractions extend to tensor products with a commutative
differential graded algebra and, levelwise, to Thom-Whitney totalizations.

The pair (l, i) assembles into a linear L-infinity morphism from L to the
mapping cone of any sub-DGLA inclusion chi: N -> M whose image contains
l(L): x maps to (phi(x), i(x)) with chi phi = l.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from . import linalg
from .apl import fd as apl_d, fscale
from .artinian import (
    ArtinianAlgebra,
    Tensor,
    tadd,
    tclean,
    tmap,
    tmultilinear,
    tscale,
    tzero,
)
from .cone import ConeData, build_cone
from .dgla import (
    DGLA,
    DGLAMorphism,
    ValidityReport,
    check_dgla,
    check_dgla_morphism,
    hom_dgla,
)
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
from .linfty import (
    Certificate,
    LInftyMorphism,
    LInftyStructure,
    check_linfty_morphism,
    check_mc_linfty,
    dgla_to_linfty,
)
from .simplicial import (
    SemicosimplicialObject,
    TWElement,
    tw_add,
    tw_bilinear,
    tw_compatibility_violations,
    tw_d,
    tw_scale,
    tw_zero,
)

Key = tuple


@dataclass
class CartanHomotopyData:
    source: DGLA
    target: DGLA
    i: GradedLinearMap  # degree -1, source space -> target space

    def l_map(self) -> GradedLinearMap:
        """l = d_M o i + i o d_L, the induced degree-0 map."""
        di = self.target.complex.differential.compose(self.i)
        id_ = self.i.compose(self.source.complex.differential)
        return di.add(id_)


def check_cartan(data: CartanHomotopyData,
                 max_violations: int = 10) -> ValidityReport:
    """Both Cartan identities on all basis pairs, plus the consequence that
    l is a DGLA morphism."""
    bad: list[str] = []
    if data.i.degree != -1:
        return ValidityReport(False, [f"i has degree {data.i.degree}, want -1"])
    L, M = data.source, data.target
    lmap = data.l_map()

    def name(k):
        return f"{L.space.label(k)}(deg {k[0]})"

    for a in L.space.basis():
        ia = data.i.apply(vbasis(a))
        for b in L.space.basis():
            lhs = data.i.apply(L.bracket_basis(a, b))
            rhs = M.bracket(ia, lmap.apply(vbasis(b)))
            if lhs != rhs:
                bad.append(f"i[a,b] != [i_a, l_b] on ({name(a)}, {name(b)})")
            ib = data.i.apply(vbasis(b))
            if M.bracket(ia, ib):
                bad.append(f"[i_a, i_b] != 0 on ({name(a)}, {name(b)})")
            if len(bad) >= max_violations:
                return ValidityReport(False, bad)
    if not bad:
        rep = check_dgla_morphism(DGLAMorphism(L, M, lmap))
        if not rep:
            bad.extend("induced l: " + v for v in rep.violations)
    return ValidityReport(not bad, bad)


# commutative differential graded algebras -----------------------------------


@dataclass
class CDGA:
    """Finite-dimensional graded commutative algebra with differential;
    multiplication tabulated on basis keys."""

    complex: Complex
    unit: Key
    mult: dict[tuple[Key, Key], Vector]

    @property
    def space(self) -> GradedVectorSpace:
        return self.complex.space

    def product(self, u: Vector, v: Vector) -> Vector:
        out: Vector = {}
        for ka, ca in u.items():
            for kb, cb in v.items():
                w = self.mult.get((ka, kb))
                if w:
                    out = vadd(out, vscale(ca * cb, w))
        return out


def check_cdga(A: CDGA, max_violations: int = 10) -> ValidityReport:
    """Unital, graded commutative, associative, Leibniz; exact on basis."""
    bad = []
    sp = A.space
    keys = list(sp.basis())
    one = vbasis(A.unit)
    for a in keys:
        if A.product(one, vbasis(a)) != vbasis(a):
            bad.append(f"unit fails on {sp.label(a)}")
        for b in keys:
            ab = A.product(vbasis(a), vbasis(b))
            ba = A.product(vbasis(b), vbasis(a))
            if ab != vscale(sign(a[0] * b[0]), ba):
                bad.append(f"commutativity fails on ({sp.label(a)}, {sp.label(b)})")
            da, db = A.complex.d(vbasis(a)), A.complex.d(vbasis(b))
            left = A.complex.d(ab)
            right = vadd(A.product(da, vbasis(b)),
                         vscale(sign(a[0]), A.product(vbasis(a), db)))
            if left != right:
                bad.append(f"Leibniz fails on ({sp.label(a)}, {sp.label(b)})")
            for c in keys:
                l3 = A.product(ab, vbasis(c))
                r3 = A.product(vbasis(a), A.product(vbasis(b), vbasis(c)))
                if l3 != r3:
                    bad.append(
                        f"associativity fails on ({sp.label(a)}, "
                        f"{sp.label(b)}, {sp.label(c)})")
            if len(bad) >= max_violations:
                return ValidityReport(False, bad)
    return ValidityReport(not bad, bad)


def trivial_cdga() -> CDGA:
    sp = GradedVectorSpace({0: ["1"]})
    cx = Complex(sp, GradedLinearMap.zero(sp, sp, 1))
    one = (0, 0)
    return CDGA(cx, one, {(one, one): vbasis(one)})


def interval_cdga(p: int) -> CDGA:
    """K[s, ds] truncated by the differential ideal (s^{p+1}): basis
    1, s, .., s^p in degree 0 and ds, s ds, .., s^{p-1} ds in degree 1."""
    if p < 1:
        raise ValueError("need polynomial degree bound >= 1")
    sp = GradedVectorSpace({
        0: ["1"] + [f"s^{k}" if k > 1 else "s" for k in range(1, p + 1)],
        1: ["ds"] + [f"s^{k}*ds" if k > 1 else "s*ds" for k in range(1, p)],
    })
    dblocks = {0: linalg.zeros(p, p + 1)}
    for k in range(1, p + 1):
        if k - 1 < p:
            dblocks[0][k - 1][k] = Fraction(k)
    cx = Complex(sp, GradedLinearMap(sp, sp, 1, dblocks))
    mult: dict[tuple[Key, Key], Vector] = {}
    for j in range(p + 1):
        for k in range(p + 1):
            if j + k <= p:
                mult[((0, j), (0, k))] = vbasis((0, j + k))
            if k < p and j + k < p:
                mult[((0, j), (1, k))] = vbasis((1, j + k))
                mult[((1, k), (0, j))] = vbasis((1, j + k))
    return CDGA(cx, (0, 0), mult)


def tensor_dgla(L: DGLA, A: CDGA) -> tuple[DGLA, dict]:
    """The DGLA L (x) A with d(x a) = dx a + (-1)^{|x|} x da and
    [x a, y b] = (-1)^{|a||y|} [x,y] ab.  Returns (DGLA, key map) where the
    key map sends (L key, A key) to the tensor key."""
    comps: dict[int, list[str]] = {}
    to_key: dict = {}
    pairs: dict = {}
    for lk in L.space.basis():
        for ak in A.space.basis():
            d = lk[0] + ak[0]
            labels = comps.setdefault(d, [])
            to_key[(lk, ak)] = (d, len(labels))
            pairs[(d, len(labels))] = (lk, ak)
            labels.append(f"{L.space.label(lk)}*{A.space.label(ak)}")
    space = GradedVectorSpace(comps)

    def from_pair(lvec: Vector, avec: Vector) -> Vector:
        out: Vector = {}
        for lk, cl in lvec.items():
            for ak, ca in avec.items():
                out = vadd(out, {to_key[(lk, ak)]: cl * ca})
        return out

    dblocks: dict[int, list] = {}
    for key, (lk, ak) in pairs.items():
        img = vadd(from_pair(L.d(vbasis(lk)), vbasis(ak)),
                   vscale(sign(lk[0]), from_pair(vbasis(lk),
                                                 A.complex.d(vbasis(ak)))))
        d = key[0]
        if not space.dim(d + 1):
            continue
        m = dblocks.setdefault(d, linalg.zeros(space.dim(d + 1), space.dim(d)))
        for (dd, j), c in img.items():
            m[j][key[1]] = c
    cx = Complex(space, GradedLinearMap(space, space, 1, dblocks))

    table = {}
    for k1, (l1, a1) in pairs.items():
        for k2, (l2, a2) in pairs.items():
            br = L.bracket_basis(l1, l2)
            if not br:
                continue
            ab = A.product(vbasis(a1), vbasis(a2))
            if not ab:
                continue
            v = vscale(sign(a1[0] * l2[0]), from_pair(br, ab))
            if v:
                table[(k1, k2)] = v
    return DGLA(cx, table), to_key


def tensor_extend_cartan(data: CartanHomotopyData, A: CDGA) -> CartanHomotopyData:
    """Extension of a Cartan homotopy to L (x) A -> M (x) A by
    i(x a) = i(x) a; the induced l satisfies l(x a) = l(x) a on the nose
    (the two cross terms (i x) da cancel, so no Koszul twist appears)."""
    rep = check_cartan(data)
    if not rep:
        raise ValueError("invalid Cartan homotopy: " + "; ".join(rep.violations))
    rep = check_cdga(A)
    if not rep:
        raise ValueError("invalid CDGA: " + "; ".join(rep.violations))
    LA, lkeys = tensor_dgla(data.source, A)
    MA, mkeys = tensor_dgla(data.target, A)
    blocks: dict[int, list] = {}
    for (lk, ak), key in lkeys.items():
        img = data.i.apply(vbasis(lk))
        d = key[0]
        if not MA.space.dim(d - 1):
            continue
        m = blocks.setdefault(d, linalg.zeros(MA.space.dim(d - 1),
                                              LA.space.dim(d)))
        for mk, c in img.items():
            (_, j) = mkeys[(mk, ak)]
            m[j][key[1]] = c
    ext = GradedLinearMap(LA.space, MA.space, -1, blocks)
    return CartanHomotopyData(LA, MA, ext)


# contractions ----------------------------------------------------------------


@dataclass
class ContractionData:
    """A degree -1 pairing L x V -> V; ``pairing(l_key, v_key)`` returns the
    Vector l contracted into v."""

    L: DGLA
    V: Complex
    pairing: object

    def contract(self, lvec: Vector, vvec: Vector) -> Vector:
        out: Vector = {}
        for lk, cl in lvec.items():
            for vk, cv in vvec.items():
                w = self.pairing(lk, vk)
                if w:
                    out = vadd(out, vscale(cl * cv, w))
        return out


def contraction_to_cartan(C: ContractionData) -> tuple[CartanHomotopyData, dict]:
    """The induced map i: L -> Hom*(V,V); returns the Cartan data together
    with the elementary-matrix table of the Hom DGLA."""
    H, table = hom_dgla(C.V)
    inv = {pair: key for key, pair in table.items()}
    blocks: dict[int, list] = {}
    for lk in C.L.space.basis():
        d = lk[0]
        if not H.space.dim(d - 1):
            continue
        m = blocks.setdefault(d, linalg.zeros(H.space.dim(d - 1),
                                              C.L.space.dim(d)))
        for s in C.V.space.basis():
            for t, c in C.pairing(lk, s).items():
                (_, j) = inv[(t, s)]
                m[j][lk[1]] = c
    i = GradedLinearMap(C.L.space, H.space, -1, blocks)
    return CartanHomotopyData(C.L, H, i), table


def check_contraction(C: ContractionData) -> ValidityReport:
    data, _ = contraction_to_cartan(C)
    return check_cartan(data)


# the induced linear morphism into a cone -------------------------------------


def build_phi_morphism(data: CartanHomotopyData, chi: DGLAMorphism,
                       cone: ConeData | None = None) -> LInftyMorphism:
    """The linear L-infinity morphism x -> (phi(x), i_x) from L to the cone
    of chi: N -> M, where chi phi = l.  Requires l(L) contained in the image
    of chi (solved exactly; raises otherwise)."""
    rep = check_cartan(data)
    if not rep:
        raise ValueError("invalid Cartan homotopy: " + "; ".join(rep.violations))
    if chi.target is not data.target:
        raise ValueError("chi must land in the Cartan homotopy's target")
    if cone is None:
        cone = build_cone(chi)
    lmap = data.l_map()
    # solve chi o phi = l degreewise
    phi_blocks: dict[int, list] = {}
    for d in data.source.space.degrees():
        cols = data.source.space.dim(d)
        rows = chi.source.space.dim(d)
        a = chi.map.block(d)
        b = lmap.block(d)
        if not len(b) or not cols:
            if rows and cols:
                phi_blocks[d] = linalg.zeros(rows, cols)
            continue
        x = linalg.solve_matrix(a, b)
        if x is None:
            raise ValueError(f"l(L) not contained in chi's image in degree {d}")
        if rows:
            phi_blocks[d] = x
    phi = GradedLinearMap(data.source.space, chi.source.space, 0, phi_blocks)

    source = dgla_to_linfty(data.source, cone.structure.arity_cutoff)
    taylor: dict[int, dict] = {1: {}}
    for key in source.space.basis():
        # source key (d, j) is x in L^{d+1}
        x = vbasis((key[0] + 1, key[1]))
        val = vadd(cone.from_l(phi.apply(x)), cone.from_m(data.i.apply(x)))
        if val:
            taylor[1][(key,)] = val
    f = LInftyMorphism(source, cone.structure, taylor, cone.structure.arity_cutoff)
    rep = check_linfty_morphism(f)
    if not rep:
        raise ValueError("induced morphism fails L-infinity identities: "
                         + "; ".join(rep.violations))
    return f


# obstruction classes over small extensions -----------------------------------


@dataclass
class SmallExtension:
    """0 -> K.eps -> A -> B -> 0 with eps a socle monomial of A: B is A with
    the basis monomial eps removed, and m_A . eps = 0."""

    A: ArtinianAlgebra
    eps: tuple

    def __post_init__(self):
        if self.eps not in self.A.basis or sum(self.eps) == 0:
            raise ValueError("eps must be a maximal-ideal basis monomial")
        for mo in self.A.maximal_ideal_basis:
            if self.A.mul_monomials(mo, self.eps) is not None:
                raise ValueError("eps is not annihilated by the maximal ideal")

    @property
    def B(self) -> ArtinianAlgebra:
        return ArtinianAlgebra(self.A.generators,
                               self.A.ideal + (self.eps,))

    def project(self, x: Tensor) -> Tensor:
        return {mo: v for mo, v in x.items() if mo != self.eps}


def mc_defect(V: LInftyStructure, A: ArtinianAlgebra, gamma: Tensor) -> Tensor:
    """sum_j q_j(gamma^{(x)j}) / j!, the failure of the MC equation."""
    import math

    jmax = min(max(V.brackets, default=0), A.nilpotency_order - 1)
    total = tzero()
    for j in range(1, jmax + 1):
        if j not in V.brackets:
            continue
        term = tmultilinear(A, V.q, [gamma] * j)
        total = tadd(total, tscale(Fraction(1, math.factorial(j)), term))
    return tclean(total)


def obstruction_class(V: LInftyStructure, ext: SmallExtension,
                      x: Tensor) -> Vector:
    """The obstruction to lifting the MC element x from B to A: the defect
    of any set-theoretic lift lands in W^1 (x) K.eps and is a q_1-cocycle
    whose class is independent of the lift.  Returns the defect coefficient
    of eps (a cocycle representative in W^1)."""
    if not check_mc_linfty(V, ext.B, ext.project(x)):
        raise ValueError("input is not Maurer-Cartan over the quotient")
    lift = ext.project(x)  # the canonical set-theoretic lift
    defect = mc_defect(V, ext.A, lift)
    for mo in defect:
        if mo != ext.eps:
            raise ValueError("defect does not land in the kernel")
    coc = defect.get(ext.eps, {})
    if V.q1_map().apply(coc):
        raise ValueError("defect is not a cocycle")
    return coc


def obstruction_kernel_check(g: LInftyMorphism, target_cert: Certificate,
                             ext: SmallExtension, x: Tensor) -> dict:
    """Compute the obstruction of lifting x across the small extension,
    push it along H(g_1), and report.  With a YES quasi-abelian certificate
    for the target, a nonzero pushed class is impossible for elements in
    the image of an MC element (Theorem-style kernel containment); the
    report flags any such contradiction."""
    from .graded import cohomology_splitting

    coc = obstruction_class(g.source, ext, x)
    src_cx = Complex(g.source.space, g.source.q1_map())
    split = cohomology_splitting(src_cx)
    cls = split.projection.apply(coc)
    pushed_coc = g.f1_map().apply(coc)
    tgt_cx = Complex(g.target.space, g.target.q1_map())
    tsplit = cohomology_splitting(tgt_cx)
    pushed_cls = tsplit.projection.apply(pushed_coc)
    report = {
        "obstruction_class": cls,
        "pushed_class": pushed_cls,
        "pushed_vanishes": not pushed_cls,
        "target_certificate": target_cert.verdict,
    }
    if target_cert.verdict == "YES" and pushed_cls:
        report["contradiction"] = (
            "nonzero obstruction pushed into a quasi-abelian target: "
            "the morphism cannot be injective on cohomology for an MC input"
        )
    return report


# semicosimplicial contractions and their Thom-Whitney extension --------------


@dataclass
class SemicosimplicialContraction:
    """Levelwise contractions L_n x V_n -> V_n commuting with the cofaces of
    both diagrams; L has DGLA levels, V has complex levels, same truncation."""

    L: SemicosimplicialObject
    V: SemicosimplicialObject
    pairings: list  # pairings[n](l_key, v_key) -> Vector in level n of V

    def level(self, n: int) -> ContractionData:
        return ContractionData(self.L.levels[n], self.V.complex(n),
                               self.pairings[n])


def check_semicosimplicial_contraction(
        C: SemicosimplicialContraction) -> ValidityReport:
    bad: list[str] = []
    if C.L.truncation != C.V.truncation:
        return ValidityReport(False, ["truncation mismatch"])
    for n in range(C.L.truncation + 1):
        rep = check_contraction(C.level(n))
        if not rep:
            bad.extend(f"level {n}: {v}" for v in rep.violations)
    for n in range(1, C.L.truncation + 1):
        lvl = C.level(n)
        prev = C.level(n - 1)
        for k in range(n + 1):
            dL, dV = C.L.coface(n, k), C.V.coface(n, k)
            for lk in C.L.complex(n - 1).space.basis():
                for vk in C.V.complex(n - 1).space.basis():
                    lhs = dV.apply(prev.contract(vbasis(lk), vbasis(vk)))
                    rhs = lvl.contract(dL.apply(vbasis(lk)),
                                       dV.apply(vbasis(vk)))
                    if lhs != rhs:
                        bad.append(
                            f"coface ({n},{k}) does not commute with the "
                            f"contraction on ({lk}, {vk})")
    return ValidityReport(not bad, bad)


def tw_contract(C: SemicosimplicialContraction, x: TWElement,
                y: TWElement) -> TWElement:
    """The extended contraction on Thom-Whitney elements:
    (l (x) a) -| (v (x) b) = (-1)^{|a||v|} (l -| v) (x) (a ^ b).
    Maps compatible pairs to compatible elements."""

    def phi(n, lk, vk):
        return C.pairings[n](lk, vk)

    return tw_bilinear(C.V, phi, x, y)


def tw_lie(C: SemicosimplicialContraction, x: TWElement,
           y: TWElement) -> TWElement:
    """The induced Lie action l_x = [d, i_x] + i_{dx} as an operator on the
    Thom-Whitney totalization of V."""
    from .simplicial import tw_degree

    degx = tw_degree(x)
    if degx is None:
        return tw_zero(C.V)
    iy = tw_contract(C, x, tw_d(C.V, y))
    out = tw_add(tw_d(C.V, tw_contract(C, x, y)),
                 tw_scale(-sign(degx - 1), iy))
    return tw_add(out, tw_contract(C, tw_d(C.L, x), y))
