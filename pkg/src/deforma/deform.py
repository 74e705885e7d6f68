"""Deformation functors over local Artinian rings.

Three interlocking pieces:

- the nonabelian Cech cocycle set of a semicosimplicial Lie algebra
  (``z1sc_check``) and its gauge equivalence (``h1sc_equiv``), both computed
  with the exact Dynkin BCH formula;
- the L-infinity structure transferred from the Thom-Whitney totalization
  onto the total complex via the Dupont contraction
  (``transferred_tot_structure``), whose Maurer-Cartan set is compared
  elementwise against the cocycle set (``compare_mc_cocycles``);
- translation of geometric gluing data (chart automorphisms over an
  Artinian base) into cocycle elements by taking matrix logarithms
  (``gluing_to_cocycle``).

All computations are exact rational arithmetic; BCH and exponential series
terminate because the maximal ideal is nilpotent.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .artinian import (
    ArtinianAlgebra,
    Tensor,
    bch_list,
    tadd,
    tclean,
    tmap,
    tmultilinear,
    tscale,
    tzero,
    truncate_order,
)
from .graded import (
    GradedVectorSpace,
    Vector,
    koszul_sign,
    sign,
    vadd,
    vbasis,
    vscale,
)
from .linfty import LInftyStructure, check_mc_linfty, normalize_word, transfer_lazy
from .simplicial import (
    SemicosimplicialObject,
    TotComplex,
    TWElement,
    _put,
    tot,
    tw_bracket,
    tw_d,
    tw_scale,
    tw_zero,
    whitney_E,
    whitney_I,
    tw_dupont_h,
)


# ---------------------------------------------------------------------------
# nonabelian Cech cocycles


def coface_tensor(S: SemicosimplicialObject, n: int, k: int, x: Tensor) -> Tensor:
    """Apply the coface del_k : level n-1 -> level n monomialwise."""
    return tmap(S.coface(n, k).apply, x)


def z1sc_defect(S: SemicosimplicialObject, A: ArtinianAlgebra,
                x: Tensor) -> Tensor:
    """log(e^{del_0 x} e^{-del_1 x} e^{del_2 x}) in level 2 (x) m_A."""
    if not S.is_dgla():
        raise ValueError("levels must be Lie algebras")
    if S.truncation < 2:
        return tzero()
    br = S.levels[2].bracket
    parts = [
        coface_tensor(S, 2, 0, x),
        tscale(-1, coface_tensor(S, 2, 1, x)),
        coface_tensor(S, 2, 2, x),
    ]
    return tclean(bch_list(A, br, parts))


def z1sc_check(S: SemicosimplicialObject, A: ArtinianAlgebra,
               x: Tensor) -> bool:
    """x in level-1 (x) m_A is a cocycle iff the triple product of
    exponentials is the identity, i.e. its logarithm vanishes."""
    return not z1sc_defect(S, A, x)


@dataclass
class CocycleElement:
    """A degree-one element of a semicosimplicial Lie algebra tensored with
    the maximal ideal, satisfying the nonabelian cocycle condition."""

    S: SemicosimplicialObject
    A: ArtinianAlgebra
    x: Tensor

    def __post_init__(self):
        self.x = tclean(self.x)
        if not z1sc_check(self.S, self.A, self.x):
            raise ValueError("cocycle condition fails")


@dataclass
class GaugeResult:
    """Outcome of the order-by-order search for a gauge equivalence: either
    a witness a with e^{-del_1 a} e^x e^{del_0 a} = e^y, or the m_A-adic
    order at which the linearized equation has no solution."""

    witness: Tensor | None
    failed_order: int | None = None

    def __bool__(self) -> bool:
        return self.witness is not None


def h1sc_equiv(S: SemicosimplicialObject, A: ArtinianAlgebra,
               x: Tensor, y: Tensor) -> GaugeResult:
    """Solve e^{-del_1 a} e^x e^{del_0 a} = e^y for a in level-0 (x) m_A.

    Changing a in m_A-order k moves the left side by (del_0 - del_1)(a_k)
    in order k and only touches higher orders otherwise, so the equation
    splits into one linear system per order and per monomial.
    """
    if not S.is_dgla():
        raise ValueError("levels must be Lie algebras")
    br = S.levels[1].bracket
    d0, d1 = S.coface(1, 0), S.coface(1, 1)
    g0, g1 = S.complex(0).space, S.complex(1).space
    rows, cols = g1.dim(0), g0.dim(0)
    m = linalg.zeros(rows, cols)
    for j in range(cols):
        img = vadd(d0.apply(vbasis((0, j))),
                   vscale(-1, d1.apply(vbasis((0, j)))))
        for (_, i), c in img.items():
            m[i][j] = c

    def left_side(a: Tensor) -> Tensor:
        return bch_list(A, br, [tscale(-1, tmap(d1.apply, a)), x,
                                tmap(d0.apply, a)])

    a = tzero()
    for order in range(1, A.nilpotency_order):
        residual = truncate_order(tclean(tadd(y, tscale(-1, left_side(a)))),
                                  order)
        if not residual:
            continue
        step = tzero()
        for mono, vec in residual.items():
            b = [Fraction(0)] * rows
            for (_, i), c in vec.items():
                b[i] = c
            sol = linalg.solve(m, b)
            if sol is None:
                return GaugeResult(None, failed_order=order)
            step[mono] = {(0, j): c for j, c in enumerate(sol) if c}
        a = tclean(tadd(a, step))
    if tclean(tadd(y, tscale(-1, left_side(a)))):
        raise AssertionError("order-by-order solve left a nonzero residual")
    return GaugeResult(a)


# ---------------------------------------------------------------------------
# the L-infinity structure on the total complex, transferred from
# Thom-Whitney through the Dupont contraction

# A Thom-Whitney element is flattened to a plain dict
# {(level, level key, form term): coefficient} so the generic transfer code
# can treat it as a Vector.


def tw_flatten(x: TWElement) -> dict:
    out = {}
    for n, p in enumerate(x.parts):
        for key, a in p.items():
            for term, c in a.terms.items():
                out[(n, key, term)] = c
    return out


def tw_unflatten(S: SemicosimplicialObject, flat: dict) -> TWElement:
    from .apl import APLForm

    out = tw_zero(S)
    for (n, key, term), c in flat.items():
        if c:
            _put(out.parts[n], key, APLForm(n, {term: Fraction(c)}))
    return out


def _tw_split_by_degree(x: TWElement) -> dict[int, TWElement]:
    """Homogeneous pieces by total (internal + form) degree."""
    from .apl import APLForm

    pieces: dict[int, TWElement] = {}
    for n, p in enumerate(x.parts):
        for key, a in p.items():
            for term, c in a.terms.items():
                deg = key[0] + len(term[1])
                piece = pieces.setdefault(
                    deg, TWElement([{} for _ in x.parts]))
                _put(piece.parts[n], key, APLForm(n, {term: c}))
    return pieces


def tw_linfty_ops(S: SemicosimplicialObject):
    """The shifted-convention L-infinity brackets of the Thom-Whitney DGLA,
    as a callable q(k, args) on flattened elements: q_1 = -d and
    q_2(x o y) = (-1)^{deg x} [x, y], higher arities zero."""
    if not S.is_dgla():
        raise ValueError("levels must be DGLAs")

    def q(k: int, args: list) -> dict:
        if k == 1:
            return tw_flatten(tw_scale(-1, tw_d(S, tw_unflatten(S, args[0]))))
        if k == 2:
            from .simplicial import tw_add

            x, y = tw_unflatten(S, args[0]), tw_unflatten(S, args[1])
            out = tw_zero(S)
            for deg, piece in _tw_split_by_degree(x).items():
                term = tw_bracket(S, piece, y)
                if deg % 2:
                    term = tw_scale(-1, term)
                out = tw_add(out, term)
            return tw_flatten(out)
        return {}

    return q


def transferred_tot_structure(S: SemicosimplicialObject,
                              cutoff: int,
                              T: TotComplex | None = None,
                              degrees: list[int] | None = None):
    """Homotopy-transfer the Thom-Whitney DGLA onto the total complex along
    the Dupont contraction (integration I, elementary-form inclusion E,
    levelwise Dupont homotopy h).

    Returns (structure, taylor, T): the transferred L-infinity structure on
    the shifted total complex, the Taylor coefficients of the transferred
    inclusion into Thom-Whitney (values are flattened TW elements), and the
    total complex.  ``degrees`` optionally restricts the generating basis to
    the given shifted degrees; brackets on words outside the restriction are
    not computed, which is sound because transfer of a word only consumes
    its subwords.
    """
    if T is None:
        T = tot(S)
    tsp = T.complex.space
    comps = {d - 1: list(tsp.components[d]) for d in tsp.degrees()
             if degrees is None or d - 1 in degrees}
    H = GradedVectorSpace(comps)

    def iota(v: Vector) -> dict:
        up = {(d + 1, i): c for (d, i), c in v.items()}
        return tw_flatten(whitney_E(S, T, up))

    def pi(flat: dict) -> Vector:
        down = whitney_I(S, T, tw_unflatten(S, flat))
        return {(d - 1, i): c for (d, i), c in down.items()}

    def h(flat: dict) -> dict:
        # the Dupont homotopy satisfies h d + d h = E I - Id against the
        # unshifted differential; against q_1 = -d the transfer convention
        # (h q_1 + q_1 h = iota pi - Id) needs the opposite sign
        return tw_flatten(tw_scale(-1, tw_dupont_h(S, tw_unflatten(S, flat))))

    brackets, taylor = transfer_lazy(H, pi, iota, h, tw_linfty_ops(S), cutoff)
    return LInftyStructure(H, brackets, cutoff), taylor, T


def cochain_to_mc(T: TotComplex, x: Tensor) -> Tensor:
    """A level-1 degree-0 element becomes a shifted-degree-0 element of the
    total complex, the candidate Maurer-Cartan element."""

    def up(vec: Vector) -> Vector:
        out = {}
        for key, c in vec.items():
            t, i = T.to_tot[(1, key)]
            out[(t - 1, i)] = c
        return out

    return tmap(up, x)


@dataclass
class ComparisonReport:
    """Elementwise agreement between the Maurer-Cartan condition of the
    transferred total structure and the nonabelian cocycle condition."""

    ring: str
    samples: int
    cocycles: int
    agreements: int
    disagreements: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements


def random_degree_one(S: SemicosimplicialObject, A: ArtinianAlgebra,
                      rng: random.Random, coeff_range: int = 2) -> Tensor:
    g1 = S.complex(1).space
    out: Tensor = {}
    for mono in A.maximal_ideal_basis:
        vec = {}
        for i in range(g1.dim(0)):
            c = rng.randint(-coeff_range, coeff_range)
            if c:
                vec[(0, i)] = Fraction(c)
        if vec:
            out[mono] = vec
    return out


def random_coboundary(S: SemicosimplicialObject, A: ArtinianAlgebra,
                      rng: random.Random, coeff_range: int = 2) -> Tensor:
    """The gauge image of 0 under a random a in level-0 (x) m_A:
    x = log(e^{-del_1 a} e^{del_0 a}), always a cocycle."""
    g0 = S.complex(0).space
    a: Tensor = {}
    for mono in A.maximal_ideal_basis:
        vec = {}
        for i in range(g0.dim(0)):
            c = rng.randint(-coeff_range, coeff_range)
            if c:
                vec[(0, i)] = Fraction(c)
        if vec:
            a[mono] = vec
    br = S.levels[1].bracket
    return tclean(bch_list(A, br, [
        tscale(-1, coface_tensor(S, 1, 1, a)),
        coface_tensor(S, 1, 0, a),
    ]))


def compare_mc_cocycles(S: SemicosimplicialObject, A: ArtinianAlgebra,
                        samples: int = 200, seed: int = 0,
                        ring_label: str | None = None) -> ComparisonReport:
    """For random degree-one elements, check that Maurer-Cartan in the
    transferred total structure holds exactly when the nonabelian cocycle
    condition does.  Any disagreement is a release-blocking defect: it
    would indicate a sign error in the transferred brackets or in BCH.

    Every fourth sample is an engineered coboundary so that both truth
    values of the cocycle condition are exercised."""
    T = tot(S)
    cutoff = max(1, A.nilpotency_order - 1)
    structure, _taylor, _ = transferred_tot_structure(
        S, cutoff, T=T, degrees=[0])
    rng = random.Random(seed)
    elements = [tzero()]
    while len(elements) < samples:
        if len(elements) % 4 == 0:
            elements.append(random_coboundary(S, A, rng))
        else:
            elements.append(random_degree_one(S, A, rng))
    report = ComparisonReport(
        ring=ring_label or "", samples=len(elements), cocycles=0,
        agreements=0)
    for idx, x in enumerate(elements):
        is_cocycle = z1sc_check(S, A, x)
        is_mc = check_mc_linfty(structure, A, cochain_to_mc(T, x))
        if is_cocycle:
            report.cocycles += 1
        if is_cocycle == is_mc:
            report.agreements += 1
        else:
            report.disagreements.append(
                {"index": idx, "element": x, "cocycle": is_cocycle,
                 "maurer_cartan": is_mc})
    return report


# ---------------------------------------------------------------------------
# Maurer-Cartan pushforward into the Thom-Whitney DGLA


def evaluate_taylor(taylor: dict, A: ArtinianAlgebra, gamma: Tensor) -> Tensor:
    """sum_n f_n(gamma^{o n}) / n! for a Taylor-coefficient table whose
    values may live in any dict-valued target (here: flattened TW)."""

    def f(vectors: list[Vector]) -> dict:
        k = len(vectors)
        table = taylor.get(k)
        if not table:
            return {}
        out: dict = {}
        from itertools import product as iproduct

        for combo in iproduct(*(v.items() for v in vectors)):
            keys = tuple(c[0] for c in combo)
            coeff = Fraction(1)
            for _, c in combo:
                coeff *= c
            word, s = normalize_word(keys)
            if word is None:
                continue
            val = table.get(word)
            if val:
                out = vadd(out, vscale(s * coeff, val))
        return out

    nmax = min(max(taylor, default=0), A.nilpotency_order - 1)
    out = tzero()
    for n in range(1, nmax + 1):
        if n not in taylor:
            continue
        term = tmultilinear(A, f, [gamma] * n)
        out = tadd(out, tscale(Fraction(1, math.factorial(n)), term))
    return tclean(out)


def check_mc_tw(S: SemicosimplicialObject, A: ArtinianAlgebra,
                gamma: Tensor) -> bool:
    """Maurer-Cartan in the Thom-Whitney DGLA (shifted convention) for a
    tensor of flattened TW elements: q_1(g) + q_2(g o g)/2 = 0."""
    q = tw_linfty_ops(S)
    total = tadd(
        tmultilinear(A, lambda vs: q(1, vs), [gamma]),
        tscale(Fraction(1, 2), tmultilinear(A, lambda vs: q(2, vs),
                                            [gamma, gamma])),
    )
    return not tclean(total)


# ---------------------------------------------------------------------------
# gluing data -> cocycles via matrix logarithms

# Matrices over the Artinian ring are tensors whose values are dicts
# {(row, col): coefficient}.


def matdict_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for (i, j), c in a.items():
        for (jj, k), cc in b.items():
            if j != jj:
                continue
            key = (i, k)
            val = out.get(key, Fraction(0)) + c * cc
            if val:
                out[key] = val
            else:
                out.pop(key, None)
    return out


def log_in_representation(A: ArtinianAlgebra, mat_mul, delta: Tensor) -> Tensor:
    """log(Id + delta) for delta a tensor of matrix values supported in
    m_A; the series terminates by nilpotency."""
    from .artinian import tbilinear

    acc = tzero()
    cur = None
    for k in range(1, A.nilpotency_order):
        cur = delta if k == 1 else tbilinear(A, mat_mul, cur, delta)
        if not cur:
            break
        acc = tadd(acc, tscale(Fraction((-1) ** (k + 1), k), cur))
    return tclean(acc)


@dataclass
class Representation:
    """A faithful matrix action of a graded space's degree-0 part: matrices
    are dicts {(row, col): coefficient} over a fixed finite basis of the
    represented function space."""

    space: GradedVectorSpace
    matrices: list  # matrices[i] represents basis vector (0, i)

    def act(self, vec: Vector) -> dict:
        out: dict = {}
        for (d, i), c in vec.items():
            if d != 0:
                raise ValueError("representation only covers degree 0")
            out = vadd(out, vscale(c, self.matrices[i]))
        return out

    def solve(self, mat: dict) -> Vector | None:
        """Express a matrix in the image of the representation."""
        entries = sorted({k for m in self.matrices for k in m}
                         | set(mat))
        rows = len(entries)
        cols = len(self.matrices)
        m = linalg.zeros(rows, cols)
        b = [Fraction(0)] * rows
        for r, e in enumerate(entries):
            b[r] = Fraction(mat.get(e, 0))
            for j in range(cols):
                m[r][j] = Fraction(self.matrices[j].get(e, 0))
        sol = linalg.solve(m, b)
        if sol is None:
            return None
        return {(0, j): c for j, c in enumerate(sol) if c}


def gluing_to_cocycle(C, A: ArtinianAlgebra, reps: dict,
                      thetas: dict) -> CocycleElement:
    """Translate gluing automorphisms into a nonabelian cocycle.

    ``C`` is a CechDiagram whose level-1 sections carry representations
    ``reps[simplex]``; ``thetas[simplex]`` gives the automorphism of the
    represented function space over A as theta = Id + delta with delta a
    tensor of matrices supported in m_A.  The matrix logarithm of each
    theta must land in the represented Lie algebra (a derivation); the
    assembled element must satisfy the cocycle condition.
    """
    S = C.S
    x: Tensor = tzero()
    for simplex, delta in thetas.items():
        rep = reps[simplex]
        logm = log_in_representation(A, matdict_mul, delta)
        local: Tensor = {}
        for mono, mat in logm.items():
            vec = rep.solve(mat)
            if vec is None:
                raise ValueError(
                    f"log of gluing over {simplex} is not a derivation")
            if vec:
                local[mono] = vec
        x = tadd(x, tmap(lambda v: C.include(simplex, v), local))
    return CocycleElement(S, A, tclean(x))
