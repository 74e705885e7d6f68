"""Semicosimplicial objects, Tot, and the Thom-Whitney contraction."""

from fractions import Fraction
from itertools import product

import pytest

from deforma import linalg
from deforma.apl import dt, evaluate_at_vertex, face, t
from deforma.cone import build_cone
from deforma.dgla import DGLA, DGLAMorphism, dgla_from_bracket_fn
from deforma.graded import (
    Complex,
    GradedLinearMap,
    GradedVectorSpace,
    vbasis,
)
from deforma.simplicial import (
    SemicosimplicialObject,
    TWElement,
    cech_diagram,
    check_semicosimplicial,
    tot,
    tw_add,
    tw_bracket,
    tw_compatibility_violations,
    tw_d,
    tw_dupont_h,
    tw_scale,
    tw_tensor_phi,
    tw_zero,
    whitney_E,
    whitney_I,
)

F = Fraction


def constant_diagram(cx, N):
    ident = GradedLinearMap.identity(cx.space if isinstance(cx, Complex) else cx.space)
    levels = [cx] * (N + 1)
    return SemicosimplicialObject(levels, [[]] + [[ident] * (n + 1) for n in range(1, N + 1)])


def point_complex():
    V = GradedVectorSpace({0: ["c"]})
    return Complex(V, GradedLinearMap.zero(V, V, 1))


def sl2():
    sp = GradedVectorSpace({0: ["e", "f", "h"]})
    cx = Complex(sp, GradedLinearMap.zero(sp, sp, 1))
    e, f, h = (0, 0), (0, 1), (0, 2)
    tab = {
        (e, f): {h: F(1)}, (f, e): {h: F(-1)},
        (h, e): {e: F(2)}, (e, h): {e: F(-2)},
        (h, f): {f: F(-2)}, (f, h): {f: F(2)},
    }
    return dgla_from_bracket_fn(cx, lambda a, b: dict(tab.get((a, b), {})))


def chi_delta_diagram():
    """The two-level diagram L ==> M with cofaces chi and 0, for a chain map
    with mixed degrees."""
    Lsp = GradedVectorSpace({0: ["x"], 1: ["y"]})
    Lcx = Complex(Lsp, GradedLinearMap(Lsp, Lsp, 1, {0: [[F(1)]]}))
    Msp = GradedVectorSpace({0: ["u"], 1: ["v"]})
    Mcx = Complex(Msp, GradedLinearMap.zero(Msp, Msp, 1))
    L, M = DGLA(Lcx, {}), DGLA(Mcx, {})
    chi = GradedLinearMap(Lsp, Msp, 0, {0: [[F(2)]]})
    zero = GradedLinearMap.zero(Lsp, Msp, 0)
    S = SemicosimplicialObject([L, M], [[], [chi, zero]])
    return S, DGLAMorphism(L, M, chi)


def two_cover_sl2():
    g = sl2()
    return cech_diagram([(0,), (1,), (0, 1)], {(0,): g, (1,): g, (0, 1): g})


def tot_basis(T):
    sp = T.complex.space
    return [(d, i) for d in sp.degrees() for i in range(sp.dim(d))]


def compatible_elements(S, T):
    """E-images, their Dupont images, and (for DGLA levels) brackets of
    E-images: a pool of face-compatible elements that is not contained in
    the image of E."""
    es = [whitney_E(S, T, {bk: F(1)}) for bk in tot_basis(T)]
    out = list(es)
    for x in es:
        hx = tw_dupont_h(S, x)
        if not hx.is_zero():
            out.append(hx)
    if S.is_dgla():
        for a, b in list(product(es, repeat=2))[:40]:
            br = tw_bracket(S, a, b)
            if not br.is_zero():
                out.append(br)
    return out


class TestCheckSemicosimplicial:
    def test_single_level_valid(self):
        S = SemicosimplicialObject([point_complex()], [[]])
        assert check_semicosimplicial(S)

    def test_chi_delta_valid(self):
        S, _ = chi_delta_diagram()
        assert check_semicosimplicial(S)

    def test_corrupted_coface_witnessed(self):
        cx = point_complex()
        ident = GradedLinearMap.identity(cx.space)
        two = ident.scale(2)
        # del_1 del_0 != del_1 del_1 breaks del_l del_k = del_{k+1} del_l
        S = SemicosimplicialObject(
            [cx, cx, cx], [[], [ident, two], [ident, ident, ident]])
        rep = check_semicosimplicial(S)
        assert not rep
        assert any("del_" in v for v in rep.violations)


class TestTot:
    def test_single_level_is_level_zero(self):
        cx = point_complex()
        T = tot(SemicosimplicialObject([cx], [[]]))
        # same spaces up to the level-prefix relabeling, same differential
        assert T.complex.space.components == {0: ["0:c"]}
        assert T.complex.differential.is_zero()

    def test_chi_delta_equals_cone_complex(self):
        # cross-module check: same spaces, same differential matrices
        S, chi = chi_delta_diagram()
        T = tot(S)
        cone = build_cone(chi)
        degs = set(T.complex.space.degrees()) | set(cone.cone_complex.space.degrees())
        for d in degs:
            assert T.complex.space.dim(d) == cone.cone_complex.space.dim(d)
            assert linalg.eq(T.complex.differential.block(d),
                             cone.cone_complex.differential.block(d))

    def test_two_cover_cohomology(self):
        # constant sl2 on a two-set cover: H^0 = sl2, H^1 = 0
        T = tot(two_cover_sl2().S)
        d0 = T.complex.differential.block(0)
        assert T.complex.space.dim(0) == 6
        assert T.complex.space.dim(1) == 3
        assert linalg.rank(d0) == 3

    def test_differential_squares_to_zero(self):
        # Complex construction itself asserts (d + del)^2 = 0
        for S in (constant_diagram(point_complex(), 2),
                  chi_delta_diagram()[0], two_cover_sl2().S):
            tot(S)


class TestAplFaceExamples:
    def test_face_maps_on_the_interval(self):
        # delta^0 sends t_1 to the constant 1 on the point; delta^1 to 0
        assert evaluate_at_vertex(t(1, 1), 0) == F(0)
        assert face(0, t(1, 1)).terms == {((), ()): F(1)}
        assert face(1, t(1, 1)).terms == {}


class TestTWElements:
    def test_constant_diagram_compatibility(self):
        # N=1 over the point: compatible pairs (c, x_1) have the boundary
        # values of x_1 equal to c
        from deforma.apl import const_form

        S = constant_diagram(point_complex(), 1)
        c = (0, 0)
        x = TWElement([{c: const_form(0, F(1))}, {c: const_form(1, F(1))}])
        assert not tw_compatibility_violations(S, x)
        bad = TWElement([{c: const_form(0, F(1))}, {c: t(1, 1)}])
        assert tw_compatibility_violations(S, bad)

    def test_tw_d_squares_to_zero(self):
        for S, T in diagrams():
            for x in compatible_elements(S, T):
                assert tw_d(S, tw_d(S, x)).is_zero()

    def test_bracket_of_compatible_is_compatible(self):
        cd = two_cover_sl2()
        S = cd.S
        T = tot(S)
        es = [whitney_E(S, T, {bk: F(1)}) for bk in tot_basis(T)]
        for a, b in list(product(es, repeat=2))[:30]:
            br = tw_bracket(S, a, b)
            assert not tw_compatibility_violations(S, br)

    def test_tensor_with_unit_is_identity(self):
        S = constant_diagram(point_complex(), 1)
        T = tot(S)
        one = whitney_E(S, T, {T.to_tot[(0, (0, 0))]: F(1)})

        def phi(n, vk, wk):
            return {(0, 0): F(1)}

        for x in compatible_elements(S, T):
            assert tw_tensor_phi(S, phi, one, x) == x


def two_term_complex():
    # v -> w with d(v) = w: odd-degree elements that survive the identity
    # cofaces of a constant diagram, which exercises the degree twist in
    # whitney_I and whitney_E away from the image of E
    V = GradedVectorSpace({0: ["v"], 1: ["w"]})
    return Complex(V, GradedLinearMap(V, V, 1, {0: [[F(1)]]}))


def diagrams():
    S1 = constant_diagram(point_complex(), 2)
    S2, _ = chi_delta_diagram()
    S3 = two_cover_sl2().S
    S4 = constant_diagram(two_term_complex(), 2)
    return [(S1, tot(S1)), (S2, tot(S2)), (S3, tot(S3)), (S4, tot(S4))]


class TestWhitneyContraction:
    def test_IE_is_identity(self):
        for S, T in diagrams():
            for bk in tot_basis(T):
                x = {bk: F(1)}
                assert whitney_I(S, T, whitney_E(S, T, x)) == x

    def test_E_output_is_compatible(self):
        for S, T in diagrams():
            for bk in tot_basis(T):
                assert not tw_compatibility_violations(
                    S, whitney_E(S, T, {bk: F(1)}))

    def test_E_is_a_chain_map(self):
        for S, T in diagrams():
            for bk in tot_basis(T):
                x = {bk: F(1)}
                assert whitney_E(S, T, T.complex.d(x)) == tw_d(S, whitney_E(S, T, x))

    def test_I_is_a_chain_map_on_compatible_elements(self):
        for S, T in diagrams():
            for x in compatible_elements(S, T):
                assert whitney_I(S, T, tw_d(S, x)) == T.complex.d(whitney_I(S, T, x))

    def test_homotopy_identity(self):
        # E I - Id = h d + d h, exactly, on compatible elements beyond im E
        for S, T in diagrams():
            for x in compatible_elements(S, T):
                EIx = whitney_E(S, T, whitney_I(S, T, x))
                lhs = tw_add(EIx, tw_scale(-1, x))
                rhs = tw_add(tw_dupont_h(S, tw_d(S, x)),
                             tw_d(S, tw_dupont_h(S, x)))
                assert lhs == rhs

    def test_h_kills_image_of_E(self):
        for S, T in diagrams():
            for bk in tot_basis(T):
                assert tw_dupont_h(S, whitney_E(S, T, {bk: F(1)})).is_zero()


class TestNaturality:
    def make_morphism(self):
        """Constant K diagram (N=1) into the two-cover sl2 diagram, by the
        diagonal on the Cartan element h."""
        S_src = constant_diagram(point_complex(), 1)
        cd = two_cover_sl2()
        S_tgt = cd.S
        h = (0, 2)

        def level_map(n):
            src = S_src.complex(n).space
            tgt = S_tgt.complex(n).space
            col = [[F(0)] for _ in range(tgt.dim(0))]
            if n == 0:
                for I in ((0,), (1,)):
                    (_, row) = cd.to_level[(I, h)]
                    col[row] = [F(1)]
            else:
                (_, row) = cd.to_level[((0, 1), h)]
                col[row] = [F(1)]
            return GradedLinearMap(src, tgt, 0, {0: col})

        return S_src, S_tgt, cd, [level_map(0), level_map(1)]

    def push_tw(self, maps, x):
        parts = []
        for n, p in enumerate(x.parts):
            out = {}
            for key, a in p.items():
                for k, c in maps[n].apply(vbasis(key)).items():
                    from deforma.apl import fadd, fscale
                    cur = out.get(k)
                    val = fscale(c, a)
                    out[k] = fadd(cur, val) if cur is not None else val
            parts.append({k: a for k, a in out.items() if a.terms})
        return TWElement(parts)

    def push_tot(self, T_src, T_tgt, maps, x):
        out = {}
        for tk, c in x.items():
            n, key = T_src.from_tot[tk]
            for k, cc in maps[n].apply(vbasis(key)).items():
                kk = T_tgt.to_tot[(n, k)]
                out[kk] = out.get(kk, F(0)) + c * cc
        return {k: c for k, c in out.items() if c}

    def test_levelwise_maps_commute_with_cofaces(self):
        S_src, S_tgt, cd, maps = self.make_morphism()
        for k in range(2):
            lhs = maps[1].compose(S_src.coface(1, k))
            rhs = S_tgt.coface(1, k).compose(maps[0])
            assert lhs == rhs

    def test_I_E_h_natural(self):
        S_src, S_tgt, cd, maps = self.make_morphism()
        T_src, T_tgt = tot(S_src), tot(S_tgt)
        for x in compatible_elements(S_src, T_src):
            fx = self.push_tw(maps, x)
            assert whitney_I(S_tgt, T_tgt, fx) == self.push_tot(
                T_src, T_tgt, maps, whitney_I(S_src, T_src, x))
            assert tw_dupont_h(S_tgt, fx) == self.push_tw(
                maps, tw_dupont_h(S_src, x))
        for bk in tot_basis(T_src):
            x = {bk: F(1)}
            assert whitney_E(S_tgt, T_tgt, self.push_tot(T_src, T_tgt, maps, x)) \
                == self.push_tw(maps, whitney_E(S_src, T_src, x))


class TestCechDiagram:
    def test_single_open(self):
        cd = cech_diagram([(0,)], {(0,): point_complex()})
        assert cd.S.truncation == 0

    def test_two_cover_of_a_point(self):
        K = point_complex()
        cd = cech_diagram([(0,), (1,), (0, 1)], {(0,): K, (1,): K, (0, 1): K})
        T = tot(cd.S)
        d0 = T.complex.differential.block(0)
        assert T.complex.space.dim(0) == 2 and T.complex.space.dim(1) == 1
        assert linalg.rank(d0) == 1  # H^0 = K, H^1 = 0

    def test_missing_restriction_raises(self):
        K = point_complex()
        V = GradedVectorSpace({0: ["a", "b"]})
        big = Complex(V, GradedLinearMap.zero(V, V, 1))
        with pytest.raises(ValueError, match="missing restriction"):
            cech_diagram([(0,), (1,), (0, 1)],
                         {(0,): big, (1,): K, (0, 1): K})

    def test_missing_face_raises(self):
        K = point_complex()
        with pytest.raises(ValueError, match="closed under faces"):
            cech_diagram([(0, 1)], {(0, 1): K})
