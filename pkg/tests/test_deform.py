"""Deformation functors: nonabelian cocycles, gauge equivalence, and the
Maurer-Cartan comparison against the transferred total structure.

Oracles: exact matrix exponentials in faithful representations, the linear
Cech cocycle condition in abelian or square-zero cases, and the
independently calibrated mapping-cone brackets.
"""

import random
from fractions import Fraction

import pytest

from deforma.artinian import (
    ArtinianAlgebra,
    bch_list,
    tadd,
    tbilinear,
    tclean,
    tmap,
    tscale,
    tzero,
)
from deforma.cone import build_cone
from deforma.deform import (
    CocycleElement,
    GaugeResult,
    Representation,
    check_mc_tw,
    cochain_to_mc,
    coface_tensor,
    compare_mc_cocycles,
    evaluate_taylor,
    gluing_to_cocycle,
    h1sc_equiv,
    log_in_representation,
    matdict_mul,
    random_coboundary,
    random_degree_one,
    transferred_tot_structure,
    z1sc_check,
    z1sc_defect,
)
from deforma.dgla import DGLA, DGLAMorphism, dgla_from_bracket_fn
from deforma.graded import Complex, GradedLinearMap, GradedVectorSpace
from deforma.linfty import check_linfty, check_mc_linfty
from deforma.simplicial import SemicosimplicialObject, cech_diagram, tot

F = Fraction


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


# 2x2 trace-zero matrices as {(row, col): coeff}, a faithful representation
SL2_MATS = [
    {(0, 1): F(1)},                      # e
    {(1, 0): F(1)},                      # f
    {(0, 0): F(1), (1, 1): F(-1)},       # h
]


def abelian_line():
    sp = GradedVectorSpace({0: ["c"]})
    cx = Complex(sp, GradedLinearMap.zero(sp, sp, 1))
    return DGLA(cx, {})


FULL_TRIANGLE = [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]
HOLLOW_TRIANGLE = [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]


def triangle_cover(section, nerve=FULL_TRIANGLE):
    return cech_diagram(nerve, {s: section() for s in nerve})


def random_tensors(S, A, seed, count):
    rng = random.Random(seed)
    return [random_degree_one(S, A, rng) for _ in range(count)]


class TestZ1sc:
    def test_zero_is_a_cocycle(self):
        C = triangle_cover(sl2)
        A = ArtinianAlgebra.parse("t^3")
        assert z1sc_check(C.S, A, tzero())

    def test_abelian_reduces_to_cech_cocycle(self):
        # BCH collapses to sums: the condition is del_0 - del_1 + del_2 = 0
        C = triangle_cover(abelian_line)
        A = ArtinianAlgebra.parse("t^3")
        for x in random_tensors(C.S, A, seed=3, count=10):
            linear = tclean(tadd(
                coface_tensor(C.S, 2, 0, x),
                tscale(-1, coface_tensor(C.S, 2, 1, x)),
                coface_tensor(C.S, 2, 2, x),
            ))
            assert z1sc_check(C.S, A, x) == (not linear)

    def test_square_zero_ideal_reduces_to_linear_condition(self):
        C = triangle_cover(sl2)
        A = ArtinianAlgebra.parse("t^2")
        for x in random_tensors(C.S, A, seed=5, count=10):
            linear = tclean(tadd(
                coface_tensor(C.S, 2, 0, x),
                tscale(-1, coface_tensor(C.S, 2, 1, x)),
                coface_tensor(C.S, 2, 2, x),
            ))
            assert z1sc_check(C.S, A, x) == (not linear)

    def test_matrix_representation_oracle(self):
        # e^{del_0 x} e^{-del_1 x} e^{del_2 x} evaluated with exact matrix
        # exponentials in the faithful 2x2 representation of the level-2
        # Lie algebra must be the identity exactly when z1sc_check says so
        C = triangle_cover(sl2)
        A = ArtinianAlgebra.parse("t^3")
        level2 = C.S.complex(2).space
        rep = Representation(level2, SL2_MATS)

        def mat_exp_product(parts):
            # product of (Id + expm1(rep(p))) minus Id, all exact
            total = tzero()
            for p in parts:
                e = _expm1(A, tmap(rep.act, p))
                total = tadd(total, e, tbilinear(A, matdict_mul, total, e))
            return tclean(total)

        def _expm1(A, m):
            from deforma.artinian import exp_in_representation

            return exp_in_representation(A, matdict_mul, m)

        samples = random_tensors(C.S, A, seed=11, count=8)
        rng = random.Random(12)
        samples += [random_coboundary(C.S, A, rng) for _ in range(4)]
        for x in samples:
            parts = [
                coface_tensor(C.S, 2, 0, x),
                tscale(-1, coface_tensor(C.S, 2, 1, x)),
                coface_tensor(C.S, 2, 2, x),
            ]
            assert z1sc_check(C.S, A, x) == (not mat_exp_product(parts))

    def test_coboundaries_are_cocycles(self):
        C = triangle_cover(sl2)
        A = ArtinianAlgebra.parse("t^4")
        rng = random.Random(17)
        for _ in range(6):
            x = random_coboundary(C.S, A, rng)
            assert z1sc_check(C.S, A, x)

    def test_cocycle_element_validates(self):
        C = triangle_cover(sl2)
        A = ArtinianAlgebra.parse("t^3")
        rng = random.Random(2)
        x = random_coboundary(C.S, A, rng)
        CocycleElement(C.S, A, x)
        bad = random_degree_one(C.S, A, rng)
        while z1sc_check(C.S, A, bad):
            bad = random_degree_one(C.S, A, rng)
        with pytest.raises(ValueError, match="cocycle condition"):
            CocycleElement(C.S, A, bad)


class TestH1sc:
    def test_identical_elements_have_zero_witness(self):
        C = triangle_cover(sl2)
        A = ArtinianAlgebra.parse("t^3")
        rng = random.Random(4)
        x = random_coboundary(C.S, A, rng)
        res = h1sc_equiv(C.S, A, x, x)
        assert res and not tclean(dict(res.witness))

    def test_coboundary_equivalent_to_zero(self):
        C = triangle_cover(sl2)
        A = ArtinianAlgebra.parse("t^4")
        rng = random.Random(8)
        for _ in range(4):
            x = random_coboundary(C.S, A, rng)
            res = h1sc_equiv(C.S, A, tzero(), x)
            assert res
            # the witness actually transforms 0 to x
            br = C.S.levels[1].bracket
            moved = bch_list(A, br, [
                tscale(-1, coface_tensor(C.S, 1, 1, res.witness)),
                tzero(),
                coface_tensor(C.S, 1, 0, res.witness),
            ])
            assert tclean(tadd(moved, tscale(-1, x))) == {}

    def test_gauge_preserves_cocycles(self):
        C = triangle_cover(sl2)
        A = ArtinianAlgebra.parse("t^3")
        rng = random.Random(9)
        br = C.S.levels[1].bracket
        for _ in range(4):
            x = random_coboundary(C.S, A, rng)
            a = {mo: {(0, rng.randrange(C.S.complex(0).space.dim(0))): F(1)}
                 for mo in A.maximal_ideal_basis}
            moved = bch_list(A, br, [
                tscale(-1, coface_tensor(C.S, 1, 1, a)), x,
                coface_tensor(C.S, 1, 0, a),
            ])
            assert z1sc_check(C.S, A, moved)

    def test_obstructed_equivalence_reports_order(self):
        # hollow triangle: no level 2, so every element is a cocycle, but
        # first Cech cohomology is one-dimensional and blocks the solve
        C = triangle_cover(abelian_line, nerve=HOLLOW_TRIANGLE)
        A = ArtinianAlgebra.parse("t^2")
        # the class generator: 1 on overlap (0,1), 0 elsewhere
        x = {(1,): C.include((0, 1), {(0, 0): F(1)})}
        res = h1sc_equiv(C.S, A, x, tzero())
        assert not res
        assert res.failed_order == 1

    def test_abelian_equivalence_is_cech_coboundary(self):
        C = triangle_cover(abelian_line, nerve=HOLLOW_TRIANGLE)
        A = ArtinianAlgebra.parse("t^2")
        # a genuine coboundary is solvable
        a = {(1,): C.include((0,), {(0, 0): F(1)})}
        x = tclean(tadd(coface_tensor(C.S, 1, 0, a),
                        tscale(-1, coface_tensor(C.S, 1, 1, a))))
        res = h1sc_equiv(C.S, A, tzero(), x)
        assert res


class TestTransferredStructure:
    def test_reproduces_cone_brackets(self):
        # the two-level diagram of a DGLA morphism: the structure
        # transferred from the Thom-Whitney totalization must coincide,
        # bracket table for bracket table, with the independently
        # calibrated mapping-cone structure
        g = sl2()
        chi = DGLAMorphism(g, g, GradedLinearMap.identity(g.space))
        cone = build_cone(chi, arity_cutoff=4)
        S = SemicosimplicialObject(
            [g, g],
            [[], [GradedLinearMap.identity(g.space),
                  GradedLinearMap.zero(g.space, g.space, 0)]])
        struct, taylor, _ = transferred_tot_structure(S, 4)
        assert struct.brackets == cone.structure.brackets
        assert check_linfty(struct)

    def test_restricted_transfer_agrees(self):
        g = sl2()
        S = SemicosimplicialObject(
            [g, g],
            [[], [GradedLinearMap.identity(g.space),
                  GradedLinearMap.zero(g.space, g.space, 0)]])
        full, _, _ = transferred_tot_structure(S, 3)
        restricted, _, _ = transferred_tot_structure(S, 3, degrees=[0])
        for k, table in restricted.brackets.items():
            for word, val in table.items():
                assert full.brackets[k][word] == val


class TestComparison:
    def test_flagship_agreement(self):
        # nonabelian cover diagram over k[t]/(t^4): the arity-3 bracket of
        # the transferred structure (Bernoulli coefficient 1/6) must cancel
        # against the weight-3 BCH terms elementwise
        C = triangle_cover(sl2)
        A = ArtinianAlgebra.parse("t^4")
        rep = compare_mc_cocycles(C.S, A, samples=60, seed=7,
                                  ring_label="t^4")
        assert rep.ok
        assert rep.samples == 60
        assert rep.agreements == 60
        assert rep.cocycles > 1  # nontrivial cocycles were exercised

    def test_square_zero_case(self):
        C = triangle_cover(sl2)
        A = ArtinianAlgebra.parse("t^2")
        rep = compare_mc_cocycles(C.S, A, samples=20, seed=1)
        assert rep.ok

    def test_determinism(self):
        C = triangle_cover(sl2)
        A = ArtinianAlgebra.parse("t^3")
        r1 = compare_mc_cocycles(C.S, A, samples=10, seed=42)
        r2 = compare_mc_cocycles(C.S, A, samples=10, seed=42)
        assert (r1.samples, r1.cocycles, r1.agreements) == \
               (r2.samples, r2.cocycles, r2.agreements)


class TestPushforward:
    def test_mc_pushes_into_thom_whitney(self):
        # Maurer-Cartan elements of the transferred structure map to
        # Maurer-Cartan elements of the Thom-Whitney DGLA under the
        # transferred inclusion
        C = triangle_cover(sl2)
        A = ArtinianAlgebra.parse("t^3")
        T = tot(C.S)
        struct, taylor, _ = transferred_tot_structure(
            C.S, A.nilpotency_order - 1, T=T, degrees=[0])
        rng = random.Random(21)
        for _ in range(3):
            x = random_coboundary(C.S, A, rng)
            gamma = cochain_to_mc(T, x)
            assert check_mc_linfty(struct, A, gamma)
            big = evaluate_taylor(taylor, A, gamma)
            assert check_mc_tw(C.S, A, big)


class TestGluing:
    def setup_method(self):
        self.C = triangle_cover(sl2)
        self.A = ArtinianAlgebra.parse("t^3")
        self.reps = {s: Representation(self.C.S.complex(1).space, SL2_MATS)
                     for s in [(0, 1), (0, 2), (1, 2)]}

    def test_identity_gluing_is_zero_cocycle(self):
        out = gluing_to_cocycle(self.C, self.A, self.reps, {})
        assert out.x == {}

    def test_first_order_gluing_is_its_derivation(self):
        # theta = Id + t e: log truncates to t e at first order over t^2
        A2 = ArtinianAlgebra.parse("t^2")
        thetas = {(0, 1): {(1,): dict(SL2_MATS[0])},
                  (0, 2): {(1,): dict(SL2_MATS[0])}}
        out = gluing_to_cocycle(self.C, A2, self.reps, thetas)
        want = tadd(
            {(1,): self.C.include((0, 1), {(0, 0): F(1)})},
            {(1,): self.C.include((0, 2), {(0, 0): F(1)})},
        )
        assert tclean(tadd(out.x, tscale(-1, want))) == {}

    def test_exponential_gluing_recovers_generator(self):
        # theta = exp(t h) given as Id + expm1: log returns t h exactly
        from deforma.artinian import exp_in_representation

        delta = exp_in_representation(
            self.A, matdict_mul, {(1,): dict(SL2_MATS[2])})
        logm = log_in_representation(self.A, matdict_mul, delta)
        assert tclean(tadd(logm, tscale(-1, {(1,): dict(SL2_MATS[2])}))) == {}
        # coboundary-style assignment: the same exp(t h) on (0,1) and (0,2)
        # and the identity on (1,2) satisfies the cocycle condition
        thetas = {(0, 1): delta, (0, 2): delta}
        out = gluing_to_cocycle(self.C, self.A, self.reps, thetas)
        assert z1sc_check(self.C.S, self.A, out.x)

    def test_non_derivation_log_raises(self):
        # Id + t E_00 has log t E_00, not in the trace-zero representation
        thetas = {(0, 1): {(1,): {(0, 0): F(1)}}}
        with pytest.raises(ValueError, match="not a derivation"):
            gluing_to_cocycle(self.C, self.A, self.reps, thetas)

    def test_non_cocycle_gluing_raises(self):
        # incompatible automorphisms on the three overlaps of a full
        # triangle violate the cocycle condition
        thetas = {(1, 2): {(1,): dict(SL2_MATS[0])}}
        with pytest.raises(ValueError, match="cocycle condition"):
            gluing_to_cocycle(self.C, self.A, self.reps, thetas)
