"""L-infinity structures, morphisms, homotopy transfer and minimal models.

Conventions.  An L-infinity structure lives on the *shifted* space W = V[1];
every bracket q_k is a degree +1 graded-symmetric map from the k-th symmetric
power of W to W.  In this convention the generalized Jacobi identities carry
no signs beyond the Koszul sign of the unshuffle, which is the least
error-prone formulation for exact computation.

Brackets are stored as tables over canonically sorted basis words (tuples of
(degree, index) keys of W); a word with a repeated odd-degree key is zero in
the symmetric power and never stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product
from fractions import Fraction

from . import linalg
from .artinian import ArtinianAlgebra, Tensor, tadd, tclean, tmultilinear, tscale, tzero
from .graded import (
    Complex,
    GradedLinearMap,
    GradedVectorSpace,
    Vector,
    cohomology_splitting,
    koszul_sign,
    rat,
    rat_str,
    set_partitions,
    sign,
    splitting_identities_hold,
    unshuffles,
    vadd,
    vbasis,
    vscale,
)
from .dgla import DGLA, ValidityReport, check_dgla

Key = tuple  # (degree, index) in W = V[1]
Word = tuple  # sorted tuple of Keys


def normalize_word(keys: tuple) -> tuple[Word | None, int]:
    """Sort a word of basis keys, returning (sorted word, Koszul sign).

    Returns (None, 0) when the word contains a repeated odd-degree key,
    which is zero in the symmetric power.
    """
    degs = [k[0] for k in keys]
    order = sorted(range(len(keys)), key=lambda i: (keys[i], i))
    word = tuple(keys[i] for i in order)
    for a, b in zip(word, word[1:]):
        if a == b and a[0] % 2:
            return None, 0
    return word, koszul_sign(tuple(order), degs)


def basis_words(space: GradedVectorSpace, n: int):
    """Sorted basis of the n-th symmetric power of the space."""
    keys = list(space.basis())
    for combo in combinations_with_replacement(keys, n):
        if any(a == b and a[0] % 2 for a, b in zip(combo, combo[1:])):
            continue
        yield combo


@dataclass
class LInftyStructure:
    """Shifted-convention L-infinity algebra on W = V[1].

    ``brackets[k]`` maps sorted basis words of length k to their image
    Vector; brackets of arity > arity_cutoff are declared zero.
    """

    space: GradedVectorSpace
    brackets: dict[int, dict[Word, Vector]] = field(default_factory=dict)
    arity_cutoff: int = 5

    def __post_init__(self):
        cleaned: dict[int, dict[Word, Vector]] = {}
        for k, table in self.brackets.items():
            tab = {}
            for word, vec in table.items():
                if len(word) != k:
                    raise ValueError(f"word {word} in arity-{k} table")
                norm, sign = normalize_word(word)
                if norm != word or sign != 1:
                    raise ValueError(f"bracket word {word} not in canonical order")
                vec = {kk: Fraction(c) for kk, c in vec.items() if c}
                if not vec:
                    continue
                want = sum(kk[0] for kk in word) + 1
                for kk in vec:
                    if kk[0] != want:
                        raise ValueError(
                            f"arity-{k} bracket on {word} not homogeneous of degree +1"
                        )
                tab[word] = vec
            if tab:
                cleaned[k] = tab
        self.brackets = cleaned

    def q(self, vectors: list[Vector]) -> Vector:
        """Multilinear symmetric evaluation of the arity-len(vectors) bracket."""
        k = len(vectors)
        table = self.brackets.get(k)
        if not table:
            return {}
        out: Vector = {}
        for combo in product(*(v.items() for v in vectors)):
            keys = tuple(c[0] for c in combo)
            coeff = Fraction(1)
            for _, c in combo:
                coeff *= c
            word, sign = normalize_word(keys)
            if word is None:
                continue
            val = table.get(word)
            if val:
                out = vadd(out, vscale(sign * coeff, val))
        return out

    def q1_map(self) -> GradedLinearMap:
        sp = self.space
        blocks: dict[int, list] = {}
        for (key,), vec in self.brackets.get(1, {}).items():
            d, i = key
            m = blocks.setdefault(
                d, linalg.zeros(sp.dim(d + 1), sp.dim(d))
            )
            for (dd, j), c in vec.items():
                m[j][i] = c
        return GradedLinearMap(sp, sp, 1, blocks)

    def is_abelian(self) -> bool:
        return all(k <= 1 for k in self.brackets)

    def to_json(self) -> dict:
        sp = self.space

        def lab(k):
            return f"{k[0]}:{sp.label(k)}"

        return {
            "space": sp.to_json(),
            "arity_cutoff": self.arity_cutoff,
            "brackets": [
                {
                    "arity": k,
                    "terms": [
                        {
                            "in": [lab(kk) for kk in word],
                            "out": {lab(kk): rat_str(c) for kk, c in sorted(vec.items())},
                        }
                        for word, vec in sorted(table.items())
                    ],
                }
                for k, table in sorted(self.brackets.items())
            ],
        }

    @staticmethod
    def from_json(obj: dict) -> "LInftyStructure":
        sp = GradedVectorSpace.from_json(obj["space"])
        lookup = {}
        for d in sp.degrees():
            for i, l in enumerate(sp.components[d]):
                lookup[f"{d}:{l}"] = (d, i)
        brackets: dict[int, dict[Word, Vector]] = {}
        for ent in obj.get("brackets", []):
            k = int(ent["arity"])
            tab = brackets.setdefault(k, {})
            for term in ent["terms"]:
                word = tuple(lookup[x] for x in term["in"])
                tab[word] = {lookup[x]: rat(c) for x, c in term["out"].items()}
        return LInftyStructure(sp, brackets, int(obj.get("arity_cutoff", 5)))


def codifferential_coefficients(L: LInftyStructure, n: int) -> dict:
    """The component of the codifferential from the n-th symmetric power.

    Maps each basis word w_1 o...o w_n to a dict {output word: coefficient}
    where output words live in the (n-k+1)-st symmetric power:
    Q(w) = sum_k sum_{(k,n-k)-unshuffles s} eps(s) q_k(w_s(1..k)) o rest.
    """
    result = {}
    for word in basis_words(L.space, n):
        degs = [k[0] for k in word]
        out: dict[Word, Fraction] = {}
        for k in range(1, n + 1):
            for sh in unshuffles(k, n - k):
                eps = koszul_sign(sh, degs)
                inner = L.q([vbasis(word[sh[i]]) for i in range(k)])
                rest = tuple(word[sh[i]] for i in range(k, n))
                for key, c in inner.items():
                    norm, s = normalize_word((key,) + rest)
                    if norm is None:
                        continue
                    val = out.get(norm, Fraction(0)) + eps * s * c
                    if val:
                        out[norm] = val
                    else:
                        out.pop(norm, None)
        result[word] = out
    return result


def arity_violations(L: LInftyStructure, n: int,
                     max_violations: int = 10) -> list[str]:
    """Basis words where the arity-n coefficient of QQ = 0 fails."""
    sp = L.space
    bad: list[str] = []
    for word in basis_words(sp, n):
        degs = [k[0] for k in word]
        total: Vector = {}
        for k in range(1, n + 1):
            if k not in L.brackets or (n - k + 1) not in L.brackets:
                continue
            for sh in unshuffles(k, n - k):
                eps = koszul_sign(sh, degs)
                inner = L.q([vbasis(word[sh[i]]) for i in range(k)])
                if not inner:
                    continue
                rest = [vbasis(word[sh[i]]) for i in range(k, n)]
                total = vadd(total, vscale(eps, L.q([inner] + rest)))
        if total:
            labels = " o ".join(f"{sp.label(k)}@{k[0]}" for k in word)
            bad.append(f"arity-{n} identity fails on {labels}")
            if len(bad) >= max_violations:
                break
    return bad


def check_linfty(L: LInftyStructure, cutoff: int | None = None,
                 max_violations: int = 10) -> ValidityReport:
    """Verify the generalized Jacobi identities (QQ = 0 projected to W) for
    every arity up to the cutoff, on every basis word."""
    if cutoff is None:
        cutoff = L.arity_cutoff
    bad: list[str] = []
    for n in range(1, cutoff + 1):
        bad.extend(arity_violations(L, n, max_violations - len(bad)))
        if len(bad) >= max_violations:
            return ValidityReport(False, bad)
    return ValidityReport(not bad, bad)


def dgla_to_linfty(L: DGLA, arity_cutoff: int = 5) -> LInftyStructure:
    """q_1 = -d and q_2(v o w) = (-1)^{deg v} [v, w] on the shifted space."""
    rep = check_dgla(L)
    if not rep:
        raise ValueError("invalid DGLA: " + "; ".join(rep.violations))
    W = L.space.shifted(1)

    def down(vec: Vector) -> Vector:
        return {(d - 1, i): c for (d, i), c in vec.items()}

    q1 = {}
    for key in W.basis():
        vkey = (key[0] + 1, key[1])
        dv = L.d(vbasis(vkey))
        if dv:
            q1[(key,)] = down(vscale(-1, dv))
    q2 = {}
    for word in basis_words(W, 2):
        a, b = word
        va, vb = (a[0] + 1, a[1]), (b[0] + 1, b[1])
        br = L.bracket_basis(va, vb)
        if br:
            q2[word] = down(vscale(sign(va[0]), br))
    brackets = {}
    if q1:
        brackets[1] = q1
    if q2:
        brackets[2] = q2
    return LInftyStructure(W, brackets, arity_cutoff)


@dataclass
class LInftyMorphism:
    """Morphism given by its Taylor coefficients f_n: degree-0 symmetric maps
    from the n-th symmetric power of the source space to the target space."""

    source: LInftyStructure
    target: LInftyStructure
    taylor: dict[int, dict[Word, Vector]] = field(default_factory=dict)
    arity_cutoff: int = 5

    def __post_init__(self):
        cleaned = {}
        for n, table in self.taylor.items():
            tab = {}
            for word, vec in table.items():
                norm, sign = normalize_word(word)
                if norm != word or sign != 1:
                    raise ValueError(f"Taylor word {word} not canonical")
                vec = {k: Fraction(c) for k, c in vec.items() if c}
                if not vec:
                    continue
                want = sum(k[0] for k in word)
                for k in vec:
                    if k[0] != want:
                        raise ValueError(f"f_{n} on {word} not degree 0")
                tab[word] = vec
            if tab:
                cleaned[n] = tab
        self.taylor = cleaned

    def f(self, vectors: list[Vector]) -> Vector:
        n = len(vectors)
        table = self.taylor.get(n)
        if not table:
            return {}
        out: Vector = {}
        for combo in product(*(v.items() for v in vectors)):
            keys = tuple(c[0] for c in combo)
            coeff = Fraction(1)
            for _, c in combo:
                coeff *= c
            word, sign = normalize_word(keys)
            if word is None:
                continue
            val = table.get(word)
            if val:
                out = vadd(out, vscale(sign * coeff, val))
        return out

    def f1_map(self) -> GradedLinearMap:
        src, tgt = self.source.space, self.target.space
        blocks: dict[int, list] = {}
        for (key,), vec in self.taylor.get(1, {}).items():
            d, i = key
            m = blocks.setdefault(d, linalg.zeros(tgt.dim(d), src.dim(d)))
            for (dd, j), c in vec.items():
                m[j][i] = c
        return GradedLinearMap(src, tgt, 0, blocks)

    @staticmethod
    def identity(L: LInftyStructure) -> "LInftyMorphism":
        tab = {(key,): vbasis(key) for key in L.space.basis()}
        return LInftyMorphism(L, L, {1: tab}, L.arity_cutoff)


def check_linfty_morphism(f: LInftyMorphism, cutoff: int | None = None,
                          max_violations: int = 10) -> ValidityReport:
    """Verify that the induced coalgebra morphism commutes with the
    codifferentials, projected to cogenerators at each arity <= cutoff."""
    if cutoff is None:
        cutoff = f.arity_cutoff
    src, tgt = f.source, f.target
    bad: list[str] = []
    for n in range(1, cutoff + 1):
        for word in basis_words(src.space, n):
            degs = [k[0] for k in word]
            # F(Q(w)) projected: f_{n-k+1}(q_k(first) o rest)
            lhs: Vector = {}
            for k in range(1, n + 1):
                for sh in unshuffles(k, n - k):
                    eps = koszul_sign(sh, degs)
                    inner = src.q([vbasis(word[sh[i]]) for i in range(k)])
                    if not inner:
                        continue
                    rest = [vbasis(word[sh[i]]) for i in range(k, n)]
                    lhs = vadd(lhs, vscale(eps, f.f([inner] + rest)))
            # Q(F(w)) projected: p_j(f_{B_1}(w) o ... o f_{B_j}(w))
            rhs: Vector = {}
            for j in range(1, n + 1):
                for part in set_partitions(tuple(range(n)), j):
                    perm = tuple(i for blk in part for i in blk)
                    eps = koszul_sign(perm, degs)
                    args = [
                        f.f([vbasis(word[i]) for i in blk]) for blk in part
                    ]
                    if any(not a for a in args):
                        continue
                    rhs = vadd(rhs, vscale(eps, tgt.q(args)))
            if lhs != rhs:
                labels = " o ".join(src.space.label(k) for k in word)
                bad.append(f"codifferential commutation fails at arity {n} on {labels}")
                if len(bad) >= max_violations:
                    return ValidityReport(False, bad)
    return ValidityReport(not bad, bad)


# ---------------------------------------------------------------------------
# homotopy transfer


def transfer_lazy(H: GradedVectorSpace, pi, iota, h, q, cutoff: int):
    """Merkulov-style transfer through opaque callables.

    ``pi``, ``iota``, ``h`` are linear callables (Vector -> Vector) forming a
    contraction of the big structure onto H with side conditions; ``q(k,
    args)`` evaluates the arity-k bracket of the big structure on a list of
    its elements.  The big structure never needs a finite basis, so the same
    code transfers from infinite-dimensional totalizations.

    Returns (brackets, taylor): tables over sorted basis words of H for the
    transferred structure and for the Taylor coefficients of the inclusion.
    """
    psi_cache: dict[Word, Vector] = {}

    def theta(word: Word) -> Vector:
        n = len(word)
        degs = [k[0] for k in word]
        out: Vector = {}
        for k in range(2, n + 1):
            for part in set_partitions(tuple(range(n)), k):
                perm = tuple(i for blk in part for i in blk)
                sign = koszul_sign(perm, degs)
                args = [psi(tuple(word[i] for i in blk)) for blk in part]
                if any(not a for a in args):
                    continue
                val = q(k, args)
                if val:
                    out = vadd(out, vscale(sign, val))
        return out

    def psi(word: Word) -> Vector:
        cached = psi_cache.get(word)
        if cached is None:
            if len(word) == 1:
                cached = iota(vbasis(word[0]))
            else:
                cached = h(theta(word))
            psi_cache[word] = cached
        return cached

    brackets: dict[int, dict[Word, Vector]] = {}
    taylor: dict[int, dict[Word, Vector]] = {}
    for key in H.basis():
        word = (key,)
        b1 = pi(q(1, [iota(vbasis(key))]))
        if b1:
            brackets.setdefault(1, {})[word] = b1
        taylor.setdefault(1, {})[word] = iota(vbasis(key))
    for n in range(2, cutoff + 1):
        for word in basis_words(H, n):
            th = theta(word)
            bn = pi(th)
            if bn:
                brackets.setdefault(n, {})[word] = bn
            fn = h(th)
            if fn:
                taylor.setdefault(n, {})[word] = fn
    return brackets, taylor


def homotopy_transfer(L: LInftyStructure, S) -> tuple[LInftyStructure, LInftyMorphism]:
    """Transfer L along a contraction S of the complex (W, q_1).

    S is a CohomologySplitting-style object whose complex differential must
    equal q_1 and whose identities (including side conditions) must hold
    exactly; violated hypotheses are rejected with a witness.
    """
    q1 = L.q1_map()
    if not (S.complex.differential == q1):
        raise ValueError("contraction differential disagrees with q_1")
    if not splitting_identities_hold(S):
        raise ValueError("contraction identities violated (h q1 + q1 h != iota pi - Id)")

    def q(k, args):
        return L.q(args)

    brackets, taylor = transfer_lazy(
        S.H, S.projection.apply, S.inclusion.apply, S.homotopy.apply, q,
        L.arity_cutoff,
    )
    transferred = LInftyStructure(S.H, brackets, L.arity_cutoff)
    inclusion = LInftyMorphism(transferred, L, taylor, L.arity_cutoff)
    return transferred, inclusion


def minimal_model(L: LInftyStructure) -> tuple[LInftyStructure, LInftyMorphism]:
    """Transferred structure on the cohomology of (W, q_1); its q_1 is zero."""
    cx = Complex(L.space, L.q1_map())
    S = cohomology_splitting(cx)
    return homotopy_transfer(L, S)


# ---------------------------------------------------------------------------
# quasi-abelianity certification


@dataclass
class Certificate:
    verdict: str  # "YES" | "NO" | "UNKNOWN"
    reason: str
    chain: list = field(default_factory=list)


def _vanishing_bound(H: GradedVectorSpace) -> int | None:
    """Smallest bound b such that every degree +1 symmetric bracket on H of
    arity > b vanishes for degree reasons, or None when no finite bound
    exists (degrees of mixed sign or degree 0 present allow all arities)."""
    degs = H.degrees()
    if not degs:
        return 0
    lo, hi = degs[0], degs[-1]
    if lo >= 1:
        # image degree >= k*lo + 1 must be <= hi
        return max(1, hi - 1)
    if hi <= -1:
        # image degree <= k*hi + 1 must be >= lo
        return max(1, 1 - lo)
    return None


def certify_quasi_abelian(L: LInftyStructure) -> Certificate:
    """YES / NO / UNKNOWN quasi-abelianity verdict.

    NO only ever comes from a nonzero binary bracket on cohomology, which is
    a quasi-isomorphism invariant; YES requires the minimal-model brackets to
    vanish up to the cutoff *and* the cutoff to reach a degree-theoretic
    vanishing bound for all higher arities.
    """
    if L.is_abelian():
        return Certificate("YES", "structure is abelian on the nose")
    mm, _ = minimal_model(L)
    if mm.space.total_dim() == 0:
        return Certificate("YES", "acyclic: minimal model is zero")
    if mm.brackets.get(2):
        word = sorted(mm.brackets[2])[0]
        labels = " o ".join(mm.space.label(k) for k in word)
        return Certificate(
            "NO", f"nonzero binary cohomology bracket on {labels}"
        )
    nonzero = sorted(k for k in mm.brackets if k >= 2)
    if nonzero:
        return Certificate(
            "UNKNOWN",
            f"minimal-model brackets of arity {nonzero} are nonzero but binary "
            "bracket vanishes; higher brackets are not quasi-isomorphism invariants",
        )
    bound = _vanishing_bound(mm.space)
    if bound is not None and L.arity_cutoff >= bound:
        return Certificate(
            "YES",
            f"minimal-model brackets vanish up to arity {L.arity_cutoff} and "
            f"every arity > {bound} vanishes for degree reasons",
        )
    return Certificate(
        "UNKNOWN",
        "minimal-model brackets vanish up to the cutoff but no degree bound "
        "excludes higher arities",
    )


def lemma_injectivity_certify(f: LInftyMorphism, target_cert: Certificate) -> Certificate:
    """Pull a YES certificate back along a morphism whose linear part is
    injective on cohomology."""
    if target_cert.verdict != "YES":
        raise ValueError("target certificate must be YES")
    rep = check_linfty_morphism(f)
    if not rep:
        raise ValueError("not an L-infinity morphism: " + "; ".join(rep.violations))
    src_cx = Complex(f.source.space, f.source.q1_map())
    tgt_cx = Complex(f.target.space, f.target.q1_map())
    Ss, St = cohomology_splitting(src_cx), cohomology_splitting(tgt_cx)
    induced = St.projection.compose(f.f1_map()).compose(Ss.inclusion)
    for d in Ss.H.degrees():
        m = induced.block(d)
        if linalg.rank(m) < Ss.H.dim(d):
            raise ValueError(
                f"linear part not injective on cohomology in degree {d}"
            )
    return Certificate(
        "YES",
        "pulled back along a morphism injective on cohomology",
        chain=[target_cert],
    )


# ---------------------------------------------------------------------------
# Maurer-Cartan for L-infinity structures


def check_mc_linfty(L: LInftyStructure, A: ArtinianAlgebra, gamma: Tensor) -> bool:
    """sum_j q_j(gamma^{o j}) / j! = 0, for gamma in W^0 (x) m_A."""
    for mo, v in gamma.items():
        if sum(mo) == 0:
            raise ValueError("element not in W (x) m_A")
        for k in v:
            if k[0] != 0:
                raise ValueError("element not concentrated in shifted degree 0")
    jmax = min(max(L.brackets, default=0), A.nilpotency_order - 1)
    total = tzero()
    for j in range(1, jmax + 1):
        if j not in L.brackets:
            continue
        term = tmultilinear(A, L.q, [gamma] * j)
        total = tadd(total, tscale(Fraction(1, math.factorial(j)), term))
    return not tclean(total)


def pushforward_mc(f: LInftyMorphism, A: ArtinianAlgebra, gamma: Tensor) -> Tensor:
    """sum_n f_n(gamma^{o n}) / n!, the image MC element under a morphism."""
    nmax = min(max(f.taylor, default=0), A.nilpotency_order - 1)
    out = tzero()
    for n in range(1, nmax + 1):
        if n not in f.taylor:
            continue
        term = tmultilinear(A, f.f, [gamma] * n)
        out = tadd(out, tscale(Fraction(1, math.factorial(n)), term))
    return out
