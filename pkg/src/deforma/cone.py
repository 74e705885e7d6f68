"""Mapping-cone L-infinity brackets for a morphism of DGLAs.

For chi: L -> M the cone complex is C^i = L^i (+) M^{i-1} with differential
mu_1(l, m) = (dl, chi(l) - dm).  The higher brackets involve the Bernoulli
numbers: mu_n is supported on words with exactly one L-component and is a
symmetrized nested M-bracket into chi(l), with coefficient B_{n-1}/(n-1)!.

We realize the structure directly in the shifted symmetric convention on
W = C[1] = L[1] (+) M.  The literature leaves the overall sign of mu_n
(n >= 3) open; we calibrate each sign computationally by requiring the
arity-n generalized Jacobi identity against the fixed lower brackets, which
pins it uniquely, and record the outcome (see SIGNS.md).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations

from . import linalg
from .dgla import DGLA, DGLAMorphism, ValidityReport, check_dgla, check_dgla_morphism
from .graded import (
    Complex,
    GradedLinearMap,
    GradedVectorSpace,
    Vector,
    bernoulli,
    cohomology_splitting,
    koszul_sign,
    sign,
    vadd,
    vbasis,
    vscale,
)
from .linfty import (
    Certificate,
    LInftyMorphism,
    LInftyStructure,
    arity_violations,
    basis_words,
    check_linfty_morphism,
)


@dataclass
class ConeData:
    chi: DGLAMorphism
    cone_complex: Complex          # unshifted: C^i = L^i (+) M^{i-1}
    structure: LInftyStructure     # on W = C[1]
    signs: dict[int, int]          # calibrated overall sign per arity >= 3
    # key translations into W = L[1] (+) M
    l_to_w: dict = field(default_factory=dict)   # L key (d,i) -> W key
    m_to_w: dict = field(default_factory=dict)   # M key (d,i) -> W key

    def from_l(self, vec: Vector) -> Vector:
        return {self.l_to_w[k]: c for k, c in vec.items()}

    def from_m(self, vec: Vector) -> Vector:
        return {self.m_to_w[k]: c for k, c in vec.items()}


def _cone_spaces(L: GradedVectorSpace, M: GradedVectorSpace):
    """W components, key maps, and the component split per W degree."""
    degs = sorted(set(d - 1 for d in L.degrees()) | set(M.degrees()))
    comps = {}
    l_to_w = {}
    m_to_w = {}
    w_is_l = {}
    for w in degs:
        labels = []
        for i, lab in enumerate(L.components.get(w + 1, [])):
            l_to_w[(w + 1, i)] = (w, len(labels))
            w_is_l[(w, len(labels))] = ("L", (w + 1, i))
            labels.append(f"L:{lab}")
        for i, lab in enumerate(M.components.get(w, [])):
            m_to_w[(w, i)] = (w, len(labels))
            w_is_l[(w, len(labels))] = ("M", (w, i))
            labels.append(f"M:{lab}")
        if labels:
            comps[w] = labels
    return GradedVectorSpace(comps), l_to_w, m_to_w, w_is_l


def _nested_bracket(M: DGLA, ms: list[Vector], tail: Vector) -> Vector:
    """[ms[0], [ms[1], [..., [ms[-1], tail]...]]] in M."""
    acc = tail
    for m in reversed(ms):
        acc = M.bracket(m, acc)
        if not acc:
            return acc
    return acc


def _higher_bracket_table(chi: DGLAMorphism, W, w_is_l, m_to_w, l_to_w,
                          n: int, overall: int):
    """Arity-n table (n >= 3): supported on words with exactly one
    L-component; value = overall * B_{n-1}/(n-1)! * symmetrized nested
    bracket of the M-components into chi(l)."""
    Mdgla = chi.target
    coeff = Fraction(bernoulli(n - 1), math.factorial(n - 1))
    if coeff == 0:
        return {}
    table = {}
    for word in basis_words(W, n):
        lpos = [i for i, k in enumerate(word) if w_is_l[k][0] == "L"]
        if len(lpos) != 1:
            continue
        j = lpos[0]
        degs = [k[0] for k in word]
        # Koszul sign for moving the L-entry past the later entries to the end
        move = 1
        for i in range(j + 1, n):
            if degs[j] % 2 and degs[i] % 2:
                move = -move
        # degree-dependent sign, pinned by the generalized Jacobi identities
        # on instances with entries of both parities (see SIGNS.md)
        par = sign(sum(degs[i] for i in range(n) if i != j))
        lkey = w_is_l[word[j]][1]
        chil = chi.apply(vbasis(lkey))
        if not chil:
            continue
        mpos = [i for i in range(n) if i != j]
        mdegs = [word[i][0] for i in mpos]
        total: Vector = {}
        for tau in permutations(range(n - 1)):
            eps = koszul_sign(tau, mdegs)
            ms = [vbasis(w_is_l[word[mpos[t]]][1]) for t in tau]
            val = _nested_bracket(Mdgla, ms, chil)
            if val:
                total = vadd(total, vscale(eps, val))
        if total:
            wvec = {m_to_w[k]: c for k, c in
                    vscale(overall * move * par * coeff, total).items()}
            table[word] = wvec
    return table


def build_cone(chi: DGLAMorphism, arity_cutoff: int = 4) -> ConeData:
    """Cone L-infinity structure for a DGLA morphism, with QQ = 0 verified
    up to the arity cutoff and overall higher-bracket signs calibrated."""
    for side, dg in (("source", chi.source), ("target", chi.target)):
        rep = check_dgla(dg)
        if not rep:
            raise ValueError(f"invalid {side} DGLA: " + "; ".join(rep.violations))
    rep = check_dgla_morphism(chi)
    if not rep:
        raise ValueError("invalid DGLA morphism: " + "; ".join(rep.violations))

    Lsp, Msp = chi.source.space, chi.target.space
    W, l_to_w, m_to_w, w_is_l = _cone_spaces(Lsp, Msp)

    def from_l(vec):
        return {l_to_w[k]: c for k, c in vec.items()}

    def from_m(vec):
        return {m_to_w[k]: c for k, c in vec.items()}

    # q1 = -(shifted cone differential): q1(l) = (-dl, -chi(l)), q1(m) = dm
    q1 = {}
    for key in W.basis():
        side, orig = w_is_l[key]
        if side == "L":
            val = vadd(from_l(vscale(-1, chi.source.d(vbasis(orig)))),
                       from_m(vscale(-1, chi.apply(vbasis(orig)))))
        else:
            val = from_m(chi.target.d(vbasis(orig)))
        if val:
            q1[(key,)] = val

    # q2: on L o L the shifted DGLA bracket of L; on L o M half-brackets
    # through chi; zero on M o M
    q2 = {}
    for word in basis_words(W, 2):
        a, b = word
        sa, oa = w_is_l[a]
        sb, ob = w_is_l[b]
        if sa == "L" and sb == "L":
            br = chi.source.bracket_basis(oa, ob)
            val = from_l(vscale(sign(a[0] + 1), br))
        elif sa == "L" and sb == "M":
            # q2(l o m) = (0, 1/2 [chi(l), m])
            val = from_m(vscale(Fraction(1, 2),
                                chi.target.bracket(chi.apply(vbasis(oa)),
                                                   vbasis(ob))))
        elif sa == "M" and sb == "L":
            # q2(m o l) = (-1)^{deg_C m} (0, 1/2 [m, chi(l)])
            val = from_m(vscale(Fraction(sign(a[0] + 1), 2),
                                chi.target.bracket(vbasis(oa),
                                                   chi.apply(vbasis(ob)))))
        else:
            val = {}
        if val:
            q2[word] = val

    brackets = {}
    if q1:
        brackets[1] = q1
    if q2:
        brackets[2] = q2
    signs: dict[int, int] = {}
    structure = LInftyStructure(W, dict(brackets), arity_cutoff)
    for rep_n in (1, 2):
        bad = arity_violations(structure, rep_n)
        if bad:
            raise ValueError("cone mu_1/mu_2 inconsistent: " + "; ".join(bad))
    for n in range(3, arity_cutoff + 1):
        for overall in (1, -1):
            table = _higher_bracket_table(chi, W, w_is_l, m_to_w, l_to_w, n, overall)
            trial = dict(brackets)
            if table:
                trial[n] = table
            cand = LInftyStructure(W, {k: dict(t) for k, t in trial.items()},
                                   arity_cutoff)
            if not arity_violations(cand, n):
                brackets = trial
                if table:
                    signs[n] = overall
                break
        else:
            raise ValueError(f"no overall sign makes the arity-{n} identity hold")
    structure = LInftyStructure(W, brackets, arity_cutoff)

    # unshifted cone complex, for rank bookkeeping and reports
    cone_space = W.shifted(-1)
    dblocks = {}
    for d in cone_space.degrees():
        rows, cols = cone_space.dim(d + 1), cone_space.dim(d)
        if not rows or not cols:
            continue
        m = linalg.zeros(rows, cols)
        for i in range(cols):
            img = structure.q([vbasis((d - 1, i))])
            for (wd, j), c in img.items():
                m[j][i] = -c
        if not linalg.is_zero(m):
            dblocks[d] = m
    cone_complex = Complex(cone_space, GradedLinearMap(cone_space, cone_space,
                                                       1, dblocks))
    return ConeData(chi, cone_complex, structure, signs, l_to_w, m_to_w)


def sl2_failure_witness() -> dict:
    """Cone of the identity on the span of A = [[0,1],[0,0]] and
    B = [[1,0],[0,-1]], where [B,A] = 2A: the binary cone bracket alone
    violates Jacobi, and the ternary bracket repairs it."""
    V = GradedVectorSpace({0: ["A", "B"]})
    cx = Complex(V, GradedLinearMap.zero(V, V, 1))
    a, b = (0, 0), (0, 1)

    def fn(k1, k2):
        if k1 == b and k2 == a:
            return {a: Fraction(2)}
        if k1 == a and k2 == b:
            return {a: Fraction(-2)}
        return {}

    from .dgla import dgla_from_bracket_fn

    Ldgla = dgla_from_bracket_fn(cx, fn)
    chi = DGLAMorphism(Ldgla, Ldgla, GradedLinearMap.identity(V))
    cone = build_cone(chi, 4)
    # Jacobiator of mu_2 alone: drop the ternary bracket and re-check
    truncated = LInftyStructure(
        cone.structure.space,
        {k: dict(t) for k, t in cone.structure.brackets.items() if k <= 2},
        3,
    )
    jac = arity_violations(truncated, 3)
    full = arity_violations(cone.structure, 3)
    return {
        "cone": cone,
        "dimensions": {d: cone.cone_complex.space.dim(d)
                       for d in cone.cone_complex.space.degrees()},
        "jacobiator_witnesses": jac,
        "mu2_alone_is_dgla": not jac,
        "full_structure_valid": not full,
    }


def _solve_section(chi: DGLAMorphism) -> GradedLinearMap:
    """A chain map pi: M -> L with pi chi = Id, solved as one exact linear
    system over all degrees; deterministic (free variables set to zero)."""
    Lsp, Msp = chi.source.space, chi.target.space
    var_index = {}
    for d in Msp.degrees():
        for r in range(Lsp.dim(d)):
            for c in range(Msp.dim(d)):
                var_index[(d, r, c)] = len(var_index)
    nvars = len(var_index)
    rows = []
    rhs = []

    def add_eq(coeffs: dict, val):
        row = [Fraction(0)] * nvars
        for k, cf in coeffs.items():
            row[var_index[k]] += cf
        rows.append(row)
        rhs.append(Fraction(val))

    # section: (P chi)_d = Id on L^d
    for d in Lsp.degrees():
        X = chi.map.block(d)
        for r in range(Lsp.dim(d)):
            for j in range(Lsp.dim(d)):
                coeffs = {}
                for c in range(Msp.dim(d)):
                    if X[c][j]:
                        coeffs[(d, r, c)] = X[c][j]
                add_eq(coeffs, 1 if r == j else 0)
    # chain map: d_L P_d = P_{d+1} d_M on M^d
    for d in Msp.degrees():
        dM = chi.target.complex.differential.block(d)
        dL = chi.source.complex.differential.block(d)
        for r in range(Lsp.dim(d + 1)):
            for c in range(Msp.dim(d)):
                coeffs = {}
                for k in range(Lsp.dim(d)):
                    if dL[r][k]:
                        coeffs[(d, k, c)] = coeffs.get((d, k, c), Fraction(0)) + dL[r][k]
                for k in range(Msp.dim(d + 1)):
                    if dM[k][c]:
                        key = (d + 1, r, k)
                        coeffs[key] = coeffs.get(key, Fraction(0)) - dM[k][c]
                if coeffs:
                    add_eq(coeffs, 0)
    sol = linalg.solve(rows, rhs) if rows else [Fraction(0)] * nvars
    if sol is None:
        raise ValueError("no chain-map section of chi exists")
    blocks = {}
    for d in Msp.degrees():
        if Lsp.dim(d) and Msp.dim(d):
            blocks[d] = [
                [sol[var_index[(d, r, c)]] for c in range(Msp.dim(d))]
                for r in range(Lsp.dim(d))
            ]
    return GradedLinearMap(Msp, Lsp, 0, blocks)


def _h_injective(f: GradedLinearMap, src: Complex, tgt: Complex) -> bool:
    Ss, St = cohomology_splitting(src), cohomology_splitting(tgt)
    induced = St.projection.compose(f).compose(Ss.inclusion)
    return all(linalg.rank(induced.block(d)) == Ss.H.dim(d)
               for d in Ss.H.degrees())


@dataclass
class ConeAbelianization:
    cone: ConeData
    pi: GradedLinearMap            # section M -> L
    complement_basis: dict         # degree -> list of kernel vectors in M coords
    morphism: LInftyMorphism       # abelian H -> cone structure
    certificate: Certificate


def prop34_construct(chi: DGLAMorphism, arity_cutoff: int = 4) -> ConeAbelianization:
    """Quasi-abelianity of the cone of an injective, H-injective morphism.

    Constructs a chain-map section pi of chi, the complement subcomplex
    V = ker(pi), and the injective quasi-isomorphism from the abelian
    cohomology of V[-1] into the cone, annihilated by every cone bracket.
    """
    Lsp, Msp = chi.source.space, chi.target.space
    for d in Lsp.degrees():
        if linalg.rank(chi.map.block(d)) < Lsp.dim(d):
            raise ValueError(f"chi not injective in degree {d}")
    if not _h_injective(chi.map, chi.source.complex, chi.target.complex):
        raise ValueError("chi not injective on cohomology")
    pi = _solve_section(chi)
    # complement V = ker(pi), automatically a subcomplex
    vbasis_by_deg = {}
    for d in Msp.degrees():
        if Lsp.dim(d):
            vecs = linalg.kernel_basis(pi.block(d))
        else:
            vecs = [[Fraction(1) if i == j else Fraction(0)
                     for i in range(Msp.dim(d))] for j in range(Msp.dim(d))]
        if vecs:
            vbasis_by_deg[d] = vecs
    # V as an abstract complex in its kernel basis
    Vsp = GradedVectorSpace({d: [f"v{d}_{i}" for i in range(len(vs))]
                             for d, vs in vbasis_by_deg.items()})
    dM = chi.target.complex.differential
    vblocks = {}
    for d in Vsp.degrees():
        if not Vsp.dim(d + 1):
            continue
        # express d_M(v) in the degree d+1 kernel basis
        span = linalg.transpose(vbasis_by_deg[d + 1])
        cols = []
        for v in vbasis_by_deg[d]:
            img = dM.apply({(d, i): c for i, c in enumerate(v) if c})
            target = [img.get((d + 1, i), Fraction(0)) for i in range(Msp.dim(d + 1))]
            coords = linalg.solve(span, target)
            if coords is None:
                raise ValueError("complement is not a subcomplex")
            cols.append(coords)
        mat = linalg.transpose(cols)
        if not linalg.is_zero(mat):
            vblocks[d] = mat
    Vcx = Complex(Vsp, GradedLinearMap(Vsp, Vsp, 1, vblocks))
    SV = cohomology_splitting(Vcx)

    cone = build_cone(chi, arity_cutoff)
    # abelian source on H*(V), mapped into the cone's M-part
    H = SV.H
    abelian = LInftyStructure(H, {}, arity_cutoff)
    taylor1 = {}
    for key in H.basis():
        d = key[0]
        vcoords = SV.inclusion.apply(vbasis(key))
        mvec: Vector = {}
        for (vd, i), c in vcoords.items():
            for j, x in enumerate(vbasis_by_deg[vd][i]):
                if x:
                    mk = (vd, j)
                    mvec = vadd(mvec, {cone.m_to_w[mk]: c * x})
        taylor1[(key,)] = mvec
    f = LInftyMorphism(abelian, cone.structure, {1: taylor1}, arity_cutoff)
    rep = check_linfty_morphism(f, min(arity_cutoff, 3))
    if not rep:
        raise ValueError("cone inclusion not an L-infinity morphism: "
                         + "; ".join(rep.violations))
    cone_cx = Complex(cone.structure.space, cone.structure.q1_map())
    Sc = cohomology_splitting(cone_cx)
    if any(Sc.H.dim(d) != H.dim(d) for d in set(Sc.H.degrees()) | set(H.degrees())):
        raise ValueError("cone cohomology does not match the complement")
    Habs = Complex(H, GradedLinearMap.zero(H, H, 1))
    if not _h_injective(f.f1_map(), Habs, cone_cx):
        raise ValueError("inclusion of H not injective on cone cohomology")
    cert = Certificate(
        "YES",
        "injective quasi-isomorphism from an abelian structure into the cone, "
        "annihilated by every bracket",
    )
    return ConeAbelianization(cone, pi, vbasis_by_deg, f, cert)


def example35_complement(Wcx: Complex, U_incl: GradedLinearMap) -> dict:
    """For a subcomplex U of W with H-injective inclusion: the complement
    K = {f | f(W) in V, f(V) = 0} of {f | f(U) in U} inside Hom*(W,W)."""
    from .dgla import DGLA as _DGLA, hom_dgla

    Usp = U_incl.source
    # recover the differential of U from the inclusion: d_U = incl^{-1} d_W incl
    dblocks = {}
    for d in Usp.degrees():
        if not Usp.dim(d + 1):
            continue
        span = linalg.transpose(
            [[U_incl.block(d + 1)[r][j] for r in range(Wcx.space.dim(d + 1))]
             for j in range(Usp.dim(d + 1))]
        )
        cols = []
        for j in range(Usp.dim(d)):
            img = Wcx.differential.apply(U_incl.apply(vbasis((d, j))))
            tgt = [img.get((d + 1, i), Fraction(0)) for i in range(Wcx.space.dim(d + 1))]
            coords = linalg.solve(span, tgt)
            if coords is None:
                raise ValueError("U is not a subcomplex of W")
            cols.append(coords)
        m = linalg.transpose(cols)
        if not linalg.is_zero(m):
            dblocks[d] = m
    Ucx = Complex(Usp, GradedLinearMap(Usp, Usp, 1, dblocks))
    if not _h_injective(U_incl, Ucx, Wcx):
        raise ValueError("H*(U) -> H*(W) not injective")
    # complement V of U inside W via a chain-map retraction of the inclusion
    inc_mor = DGLAMorphism(_DGLA(Ucx, {}), _DGLA(Wcx, {}), U_incl)
    r = _solve_section(inc_mor)
    vvecs = {d: linalg.kernel_basis(r.block(d)) if Usp.dim(d) else
             [[Fraction(1) if i == j else Fraction(0)
               for i in range(Wcx.space.dim(d))] for j in range(Wcx.space.dim(d))]
             for d in Wcx.space.degrees()}
    # K = maps sending U into V and V to zero, in the elementary-matrix basis
    Hom, table = hom_dgla(Wcx)
    # adapted projectors: P_U projects onto U along V, P_V = Id - P_U
    PU_blocks = {}
    for d in Wcx.space.degrees():
        n = Wcx.space.dim(d)
        if not n:
            continue
        ucols = [
            [U_incl.block(d)[rr][j] for rr in range(n)] for j in range(Usp.dim(d))
        ]
        vcols = [v for v in vvecs.get(d, []) if any(v)]
        T = linalg.transpose(ucols + vcols)
        Tinv = linalg.inverse(T)
        nu = len(ucols)
        PU = linalg.matmul(
            linalg.transpose(ucols) if ucols else linalg.zeros(n, 0),
            [Tinv[i] for i in range(nu)] if nu else linalg.zeros(0, n),
        ) if nu else linalg.zeros(n, n)
        PU_blocks[d] = PU
    inv_table = {pair: key for key, pair in table.items()}
    kbasis = {}
    hsp = Hom.space
    # build K as the image of f -> P_V f P_U on the elementary basis
    for hd in hsp.degrees():
        vecs = []
        for i in range(hsp.dim(hd)):
            t, s = table[(hd, i)]
            # compose matrices: P_V at target degree, P_U at source degree
            sd, td = s[0], t[0]
            PUs = PU_blocks.get(sd)
            PUt = PU_blocks.get(td)
            if PUs is None or PUt is None:
                continue
            n_t = Wcx.space.dim(td)
            # e_{t<-s} as matrix unit; P_V e P_U = (I - PUt) e PUs
            out: Vector = {}
            for rr in range(n_t):
                pv = (Fraction(1) if rr == t[1] else Fraction(0)) - PUt[rr][t[1]]
                if not pv:
                    continue
                for cc in range(Wcx.space.dim(sd)):
                    x = pv * PUs[s[1]][cc]
                    if x:
                        out = vadd(out, {inv_table[((td, rr), (sd, cc))]: x})
            if out:
                vecs.append(out)
        # reduce to an independent spanning set, deterministically
        if vecs:
            keys = sorted({k for v in vecs for k in v})
            mat = [[v.get(k, Fraction(0)) for v in vecs] for k in keys]
            piv = linalg.column_space_pivots(mat)
            kbasis[hd] = [vecs[j] for j in piv]
        else:
            kbasis[hd] = []
    kbasis = {d: v for d, v in kbasis.items() if v}
    # verify Hom = {f | f(U) in U} (+) K by exact dimension count:
    # the subalgebra allows the blocks U->U, V->U, V->V and K is the V<-U block
    report = {}
    for hd in hsp.degrees():
        du = sum(
            Usp.dim(d + hd) * Usp.dim(d)
            + Wcx.space.dim(d + hd) * (Wcx.space.dim(d) - Usp.dim(d))
            for d in Wcx.space.degrees()
        )
        report[hd] = {"hom": hsp.dim(hd), "K": len(kbasis.get(hd, [])),
                      "subalgebra": du}
        if du + report[hd]["K"] != report[hd]["hom"]:
            raise ValueError(f"K is not a complement in degree {hd}")
    return {"K_basis": kbasis, "dimensions": report}
