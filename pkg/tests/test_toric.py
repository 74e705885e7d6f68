import functools
import json
from fractions import Fraction

import pytest

from deforma.artinian import ArtinianAlgebra, bch_list, tscale
from deforma.deform import coface_tensor, h1sc_equiv, z1sc_check
from deforma.graded import vbasis
from deforma.linalg import rank
from deforma.simplicial import check_semicosimplicial, whitney_E, whitney_I
from deforma.toric import (
    BoxEscapeError,
    LaurentChart,
    MonomialCover,
    affine_line_cover,
    amb_bracket,
    amb_contract,
    amb_d,
    amb_lie,
    box_stability,
    btt_pipeline,
    cech_omega,
    cech_theta,
    chartwise_contraction_injective,
    check_toric_cartan,
    cohomology_dims,
    contraction_pairing,
    de_rham_sections,
    hodge_injectivity_check,
    o_sections,
    omega_sections,
    p1_cover,
    p2_cover,
    theta_sections,
    torus_cover,
)


@functools.lru_cache(maxsize=None)
def p1_theta(B=5):
    return cech_theta(p1_cover(), B)


@functools.lru_cache(maxsize=None)
def p2_theta(B=2):
    return cech_theta(p2_cover(), B)


def F(x):
    return Fraction(x)


class TestCharts:
    def test_unimodularity_enforced(self):
        with pytest.raises(ValueError):
            LaurentChart(((2,),), (False,))
        with pytest.raises(ValueError):
            LaurentChart(((1, 0), (1, 0)), (False, False))

    def test_p1_regular_monomials(self):
        u0, u1, u01 = (p1_cover().charts[s] for s in ((0,), (1,), (0, 1)))
        # U0 = Spec K[x], U1 = Spec K[x^{-1}], overlap = torus
        assert u0.regular_monomial((3,)) and not u0.regular_monomial((-1,))
        assert u1.regular_monomial((-3,)) and not u1.regular_monomial((1,))
        assert u01.regular_monomial((5,)) and u01.regular_monomial((-5,))

    def test_z_exponents_invert_the_matrix(self):
        chart = p2_cover().charts[(1,)]  # rows (-1,0), (-1,1)
        for a in [(0, 0), (2, -1), (-3, 1)]:
            m = chart.z_exponents(a)
            back = tuple(sum(chart.rows[j][k] * m[j] for j in range(2))
                         for k in range(2))
            assert back == a

    def test_cover_json_roundtrip(self):
        cov = p2_cover()
        again = MonomialCover.from_json(json.loads(json.dumps(cov.to_json())))
        assert again == cov


class TestAmbientCalculus:
    # Oracle: the classical operations on P^1 written in the d/dx basis.
    # x^m d/dx = x^{m-1} eta and x^m dx = x^{m+1} dlog x.

    def test_bracket_matches_witt_algebra(self):
        # [x^a d/dx, x^b d/dx] = (b - a) x^{a+b-1} d/dx
        for a in range(-2, 3):
            for b in range(-2, 3):
                u = {((a - 1,), 0): F(1)}
                v = {((b - 1,), 0): F(1)}
                expect = {((a + b - 2,), 0): F(b - a)} if a != b else {}
                assert amb_bracket(u, v) == expect

    def test_contract_dx_with_ddx(self):
        # i_{d/dx}(dx) = 1
        u = {((-1,), 0): F(1)}
        w = {((1,), (0,)): F(1)}
        assert amb_contract(u, w) == {((0,), ()): F(1)}

    def test_contract_is_module_linear(self):
        # i_{x d/dx}(x^2 dx) = x * x^2 = x^3
        u = {((0,), 0): F(1)}
        w = {((3,), (0,)): F(1)}
        assert amb_contract(u, w) == {((3,), ()): F(1)}

    def test_d_squared_zero(self):
        w = {((2, -3), ()): F(1), ((1, 1), (0,)): F(2)}
        assert amb_d(amb_d(w)) == {}

    def test_d_matches_monomial_derivative(self):
        # d(x^2 y^{-1}) = 2 x^2 y^{-1} dlog x - x^2 y^{-1} dlog y
        w = {((2, -1), ()): F(1)}
        assert amb_d(w) == {((2, -1), (0,)): F(2), ((2, -1), (1,)): F(-1)}

    def test_lie_derivative_leibniz(self):
        # l_{x d/dx} x^m = m x^m on functions
        u = {((0,), 0): F(1)}
        for m in range(-3, 4):
            w = {((m,), ()): F(1)}
            expect = {((m,), ()): F(m)} if m else {}
            assert amb_lie(u, w) == expect


class TestSectionSpaces:
    def test_p1_theta_bases(self):
        cov = p1_cover()
        # Theta(U0) = span{x^m d/dx : 0 <= m <= B+1}, characters -1..B
        t0 = theta_sections(cov.charts[(0,)], 5)
        assert t0.space.total_dim() == 7
        assert sorted(t0.by_char) == [(a,) for a in range(-1, 6)]
        t01 = theta_sections(cov.charts[(0, 1)], 5)
        assert t01.space.total_dim() == 11

    def test_p1_omega_bases(self):
        cov = p1_cover()
        # Omega^1(U1) = span{x^m dx : m <= -2}, characters <= -1
        w1 = omega_sections(cov.charts[(1,)], 1, 5)
        assert sorted(w1.by_char) == [(a,) for a in range(-5, 0)]
        o0 = o_sections(cov.charts[(0,)], 5)
        assert sorted(o0.by_char) == [(a,) for a in range(0, 6)]

    def test_solve_inverts_reps(self):
        ss = theta_sections(p1_cover().charts[(0, 1)], 3)
        for key in ss.space.basis():
            assert ss.solve(ss.reps[key]) == {key: F(1)}

    def test_solve_flags_box_escape(self):
        ss = o_sections(p1_cover().charts[(0,)], 2)
        assert ss.solve({((3,), ()): F(1)}) is None
        assert ss.solve({((-1,), ()): F(1)}) is None  # not regular on U0

    def test_de_rham_complex_squares_to_zero(self):
        for s, chart in p2_cover().charts.items():
            ss, cx = de_rham_sections(chart, 2)
            d2 = cx.differential.compose(cx.differential)
            assert d2.is_zero()


class TestCechDiagrams:
    def test_p1_theta_is_semicosimplicial(self):
        tc = p1_theta()
        assert check_semicosimplicial(tc.S)
        dims = [tc.S.complex(n).space.dim(0) for n in range(2)]
        assert dims == [14, 11]

    def test_level_bracket_matches_witt(self):
        # solved level bracket vs the classical formula on the overlap
        tc = p1_theta()
        s = (0, 1)
        ss = tc.spaces[s]

        def field(m):  # x^m d/dx as a level-1 vector
            return tc.cech.include(s, ss.solve({((m - 1,), 0): F(1)}))

        lvl = tc.S.levels[1]
        got = lvl.bracket(field(0), field(2))
        assert got == {k: 2 * c for k, c in field(1).items()}

    def test_guarded_bracket_raises_on_escape(self):
        tc = p1_theta()
        g = tc.guarded()
        ss = tc.spaces[(0, 1)]
        top = tc.cech.include((0, 1), ss.solve({((5,), 0): F(1)}))
        low = tc.cech.include((0, 1), ss.solve({((4,), 0): F(1)}))
        with pytest.raises(BoxEscapeError):
            g.levels[1].bracket(top, low)
        assert tc.escaped  # some pairs do escape at this box

    def test_tot_degree_zero_rank(self):
        # Cech complex of O on P^1 at B=1: kernel of the restriction
        # difference is the constants, and the map onto level 1 is onto.
        tc = cech_omega(p1_cover(), 0, 1)
        T = tc.totalization()
        block = T.complex.differential.block(0)
        assert len(block) == 3 and len(block[0]) == 4
        assert rank(block) == 3


class TestCohomology:
    def test_p1_theta_dims_stable(self):
        dims, stable = box_stability(p1_cover(), "theta", 5)
        assert dims == {0: 3} and stable

    def test_p1_sheaf_cohomology(self):
        cov = p1_cover()
        assert cohomology_dims(cech_omega(cov, 0, 5)) == {0: 1}
        assert cohomology_dims(cech_omega(cov, 1, 5)) == {1: 1}
        assert cohomology_dims(cech_omega(cov, "all", 5)) == {0: 1, 2: 1}

    def test_affine_line_single_level(self):
        tc = cech_theta(affine_line_cover(), 3)
        assert tc.S.truncation == 0
        assert cohomology_dims(tc) == {0: 5}

    def test_torus_sections_are_their_own_cohomology(self):
        tc = cech_theta(torus_cover(1), 2)
        assert cohomology_dims(tc) == {0: 5}

    def test_p2_cohomology_stable(self):
        cov = p2_cover()
        dims, stable = box_stability(cov, "theta", 2)
        assert dims == {0: 8} and stable
        dims, stable = box_stability(cov, "de_rham", 2)
        assert dims == {0: 1, 2: 1, 4: 1} and stable
        assert cohomology_dims(cech_omega(cov, 1, 2)) == {1: 1}
        assert cohomology_dims(cech_omega(cov, 2, 2)) == {2: 1}


class TestHodgeShadow:
    def test_p1_injectivity(self):
        rep = hodge_injectivity_check(p1_cover(), 5)
        assert rep.sub_injective and rep.quotient_injective
        assert rep.top_form_dims == {1: 1}
        assert rep.below_top_dims == {0: 1}
        assert rep.de_rham_dims == {0: 1, 2: 1}

    def test_affine_line_higher_cohomology_vanishes(self):
        # single chart: no positive-degree Cech cohomology; the degree-0
        # edge map fails injectivity because the chart is not proper
        rep = hodge_injectivity_check(affine_line_cover(), 3)
        assert set(rep.top_form_dims) == {0}
        assert not rep.sub_injective
        assert rep.quotient_injective


class TestContraction:
    def test_cartan_identities_on_p1(self):
        rep = check_toric_cartan(p1_cover(), 3)
        assert rep
        assert rep.pairs_checked > 0 and rep.coface_checked > 0

    def test_cartan_identities_on_p2(self):
        rep = check_toric_cartan(p2_cover(), 1)
        assert rep
        assert rep.pairs_checked > 0

    def test_levelwise_contraction_value(self):
        # i_{d/dx}(dx) = 1 carried through the solved level pairing on U0
        C = contraction_pairing(p1_cover(), 3)
        theta = cech_theta(p1_cover(), 3)
        forms = cech_omega(p1_cover(), "all", 3)
        xi = theta.cech.include(
            (0,), theta.spaces[(0,)].solve({((-1,), 0): F(1)}))
        om = forms.cech.include(
            (0,), forms.spaces[(0,)].solve({((1,), (0,)): F(1)}))
        one = forms.cech.include(
            (0,), forms.spaces[(0,)].solve({((0,), ()): F(1)}))
        assert C.level(0).contract(xi, om) == one

    def test_pairing_raises_on_escape(self):
        C = contraction_pairing(p1_cover(), 2)
        theta = cech_theta(p1_cover(), 2)
        forms = cech_omega(p1_cover(), "all", 2)
        xi = theta.cech.include(
            (0,), theta.spaces[(0,)].solve({((2,), 0): F(1)}))
        om = forms.cech.include(
            (0,), forms.spaces[(0,)].solve({((2,), (0,)): F(1)}))
        with pytest.raises(BoxEscapeError):
            C.level(0).contract(xi, om)

    def test_chartwise_injectivity(self):
        for cov in (p1_cover(), p2_cover(), torus_cover(1)):
            for s in cov.nerve:
                if len(s) == 1:
                    assert chartwise_contraction_injective(cov.charts[s], 2)


class TestWhitneyConsistency:
    def test_integration_splits_inclusion_on_theta(self):
        tc = cech_theta(p1_cover(), 3)
        T = tc.totalization()
        for k in T.complex.space.basis():
            x = whitney_E(tc.S, T, vbasis(k))
            assert whitney_I(tc.S, T, x) == vbasis(k)


class TestDeformationsOverToric:
    def test_p1_first_order_deformations_trivial(self):
        # H^1(Theta) = 0: every first-order cocycle is gauge-trivial
        tc = p1_theta()
        S = tc.guarded()
        A = ArtinianAlgebra.parse("t^2")
        t = A.maximal_ideal_basis[0]
        x = {t: tc.cech.include(
            (0, 1), tc.spaces[(0, 1)].solve({((0,), 0): F(1)}))}
        res = h1sc_equiv(S, A, x, {})
        assert res and res.witness

    def test_p2_coboundaries_are_cocycles(self):
        # e^{del_0 a} e^{-del_1 a}-style coboundaries built from fields of
        # small character, so every BCH bracket stays inside the box
        tc = p2_theta()
        S = tc.guarded()
        A = ArtinianAlgebra.parse("t^3")
        t = A.maximal_ideal_basis[0]
        br = S.levels[1].bracket
        for s, amb in [((0,), {((0, 0), 0): F(1)}),
                       ((1,), {((0, 0), 1): F(2), ((0, 0), 0): F(-1)})]:
            a = {t: tc.cech.include(s, tc.spaces[s].solve(amb))}
            x = bch_list(A, br, [
                tscale(-1, coface_tensor(S, 1, 1, a)),
                coface_tensor(S, 1, 0, a),
            ])
            assert x and z1sc_check(S, A, x)

    def test_p2_non_cocycle_detected(self):
        tc = p2_theta()
        S = tc.guarded()
        A = ArtinianAlgebra.parse("t^2")
        t = A.maximal_ideal_basis[0]
        # supported on one overlap only: the triple product does not cancel
        x = {t: tc.cech.include(
            (0, 1), tc.spaces[(0, 1)].solve({((0, 0), 0): F(1)}))}
        assert not z1sc_check(S, A, x)


class TestPipeline:
    def test_p1_full_run(self):
        rep = btt_pipeline(p1_cover(), 5)
        assert rep.box_stable and rep.cartan and rep.tw_roundtrip_ok
        assert rep.chartwise_injective and bool(rep.hodge)
        assert not rep.hypothesis_injective
        assert len(rep.hypothesis_kernel) == 3  # all of H^0(Theta) = sl2
        assert not rep.hypothesis_indeterminate
        assert rep.cone_certificate.verdict == "YES"
        assert rep.morphism_ok
        assert rep.lemma_certificate is None
        assert "not injective" in rep.lemma_obstruction
        assert rep.unobstructed and "unobstructed" in rep.verdict
        json.dumps(rep.to_json())  # serializable report

    def test_p2_full_run(self):
        rep = btt_pipeline(p2_cover(), 2, check_stability=False)
        assert rep.cartan and rep.tw_roundtrip_ok and rep.chartwise_injective
        assert bool(rep.hodge)
        assert rep.dims["theta"] == {0: 8}
        assert rep.dims["de_rham"] == {0: 1, 2: 1, 4: 1}
        assert len(rep.hypothesis_kernel) == 8
        assert rep.cone_certificate.verdict == "YES"
        assert rep.morphism_ok and rep.unobstructed

    def test_torus_machinery_demo(self):
        rep = btt_pipeline(torus_cover(1), 2)
        # non-proper: truncated cohomology grows with the box
        assert not rep.box_stable
        assert rep.cartan and rep.chartwise_injective
        assert rep.hypothesis_indeterminate  # contraction escapes the box
        assert not rep.morphism_ok
        assert "cone stage unavailable" in rep.lemma_obstruction

    def test_escape_reported_not_fatal(self):
        rep = btt_pipeline(p2_cover(), 1, check_stability=False)
        assert not rep.morphism_ok
        assert "leaves the degree box" in rep.lemma_obstruction
        assert any("cone stage" in note for note in rep.notes)
