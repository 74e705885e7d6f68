"""Graded vector spaces, graded linear maps, complexes and splittings.

Everything is finite dimensional over the rationals.  An *element* of a
graded space is a dict mapping basis keys ``(degree, index)`` to nonzero
Fractions; helpers below keep that representation canonical (no zero
entries).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations

from . import linalg
from .linalg import Matrix, ZERO, ONE


# ---------------------------------------------------------------------------
# scalars


def rat(s) -> Fraction:
    """Parse a rational from the wire format "p/q" (or int/str)."""
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    return Fraction(str(s))


def rat_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


# ---------------------------------------------------------------------------
# combinatorics


def sign(e: int) -> int:
    """(-1)**e, safe for negative exponents (integer ** negative is a float)."""
    return -1 if e % 2 else 1


def koszul_sign(perm: tuple[int, ...], degrees: list[int]) -> int:
    """Sign relating v_1 o...o v_n to v_{perm(1)} o...o v_{perm(n)}.

    ``perm`` is 0-indexed: position i of the rearranged word holds the
    original factor perm[i].  ``degrees[j]`` is the degree of v_{j+1}.
    Computed by bubble-sorting the rearranged word back to the identity;
    each adjacent swap of factors of degrees a, b contributes (-1)^(a*b).
    """
    if len(perm) != len(degrees):
        raise ValueError("permutation/degree length mismatch")
    word = list(perm)
    sign = 1
    for i in range(len(word)):
        for j in range(len(word) - 1 - i):
            if word[j] > word[j + 1]:
                if degrees[word[j]] % 2 and degrees[word[j + 1]] % 2:
                    sign = -sign
                word[j], word[j + 1] = word[j + 1], word[j]
    return sign


def unshuffles(p: int, q: int) -> list[tuple[int, ...]]:
    """All (p,q)-unshuffles in Sigma_{p+q}, 0-indexed one-line notation.

    sigma is increasing on the first p and on the last q positions; there
    are binomial(p+q, p) of them.
    """
    if p < 0 or q < 0:
        raise ValueError("negative unshuffle type")
    n = p + q
    out = []
    from itertools import combinations

    for first in combinations(range(n), p):
        rest = tuple(i for i in range(n) if i not in first)
        out.append(first + rest)
    return out


def set_partitions(items: tuple[int, ...], blocks: int):
    """Partitions of ``items`` into exactly ``blocks`` nonempty blocks.

    Blocks come out sorted by least element, elements sorted inside.
    """
    items = tuple(items)
    if blocks <= 0 or blocks > len(items):
        return
    if blocks == 1:
        yield (items,)
        return
    first, rest = items[0], items[1:]
    # first joins an existing block of a partition of rest into `blocks`
    for part in set_partitions(rest, blocks):
        for i in range(len(part)):
            new = part[:i] + ((first,) + part[i],) + part[i + 1 :]
            yield tuple(sorted(new, key=lambda b: b[0]))
    # or forms its own block
    for part in set_partitions(rest, blocks - 1):
        yield tuple(sorted(((first,),) + part, key=lambda b: b[0]))


_BERNOULLI: list[Fraction] = [Fraction(1)]


def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n, convention B_1 = -1/2, via the defining
    recurrence sum_{k=0}^{n} C(n+1,k) B_k = 0."""
    if n < 0:
        raise ValueError("negative index")
    while len(_BERNOULLI) <= n:
        m = len(_BERNOULLI)
        acc = sum(
            (Fraction(math.comb(m + 1, k)) * _BERNOULLI[k] for k in range(m)),
            Fraction(0),
        )
        _BERNOULLI.append(-acc / (m + 1))
    return _BERNOULLI[n]


# ---------------------------------------------------------------------------
# graded spaces


@dataclass(frozen=True)
class GradedVectorSpace:
    """Finite-support family of based rational vector spaces indexed by
    integer degrees.  ``components[d]`` is the ordered list of basis labels."""

    components: dict[int, list[str]]

    def __post_init__(self):
        comps = {d: list(ls) for d, ls in self.components.items() if ls}
        for d, labels in comps.items():
            if len(set(labels)) != len(labels):
                raise ValueError(f"duplicate basis labels in degree {d}")
        object.__setattr__(self, "components", comps)

    def dim(self, d: int) -> int:
        return len(self.components.get(d, ()))

    def degrees(self) -> list[int]:
        return sorted(self.components)

    def total_dim(self) -> int:
        return sum(len(v) for v in self.components.values())

    def basis(self):
        for d in self.degrees():
            for i in range(self.dim(d)):
                yield (d, i)

    def label(self, key) -> str:
        d, i = key
        return self.components[d][i]

    def shifted(self, n: int) -> "GradedVectorSpace":
        return GradedVectorSpace({d - n: ls for d, ls in self.components.items()})

    def to_json(self) -> dict:
        return {"components": {str(d): list(ls) for d, ls in sorted(self.components.items())}}

    @staticmethod
    def from_json(obj: dict) -> "GradedVectorSpace":
        return GradedVectorSpace({int(d): list(ls) for d, ls in obj["components"].items()})


# elements -------------------------------------------------------------------

Vector = dict  # {(degree, index): Fraction}


def vzero() -> Vector:
    return {}


def vadd(*vs: Vector) -> Vector:
    out: Vector = {}
    for v in vs:
        for k, c in v.items():
            s = out.get(k, ZERO) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return out


def vscale(c, v: Vector) -> Vector:
    c = Fraction(c)
    if not c:
        return {}
    return {k: c * x for k, x in v.items()}


def vbasis(key) -> Vector:
    return {key: ONE}


def vdegree(v: Vector) -> int | None:
    degs = {k[0] for k in v}
    if not degs:
        return None
    if len(degs) > 1:
        raise ValueError(f"inhomogeneous element: degrees {sorted(degs)}")
    return degs.pop()


# graded maps ----------------------------------------------------------------


@dataclass
class GradedLinearMap:
    """Degree-homogeneous linear map; ``blocks[d]`` sends the degree-d
    component of the source to degree d+degree of the target."""

    source: GradedVectorSpace
    target: GradedVectorSpace
    degree: int
    blocks: dict[int, Matrix] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for d, m in self.blocks.items():
            rows = self.target.dim(d + self.degree)
            cols = self.source.dim(d)
            if m is None:
                continue
            if (len(m), len(m[0]) if m else 0) != (rows, cols):
                raise ValueError(
                    f"block at degree {d} has shape {linalg.shape(m)}, "
                    f"expected {(rows, cols)}"
                )
            if rows and cols and not linalg.is_zero(m):
                cleaned[d] = m
        self.blocks = cleaned

    def block(self, d: int) -> Matrix:
        rows = self.target.dim(d + self.degree)
        cols = self.source.dim(d)
        return self.blocks.get(d, linalg.zeros(rows, cols))

    def apply(self, v: Vector) -> Vector:
        out: Vector = {}
        for (d, i), c in v.items():
            m = self.blocks.get(d)
            if m is None:
                continue
            td = d + self.degree
            for r in range(len(m)):
                x = m[r][i]
                if x:
                    k = (td, r)
                    s = out.get(k, ZERO) + c * x
                    if s:
                        out[k] = s
                    else:
                        out.pop(k, None)
        return out

    def compose(self, other: "GradedLinearMap") -> "GradedLinearMap":
        """self o other."""
        if other.target.components != self.source.components:
            raise ValueError("composition space mismatch")
        blocks = {}
        for d in other.source.degrees():
            mid = d + other.degree
            a = self.blocks.get(mid)
            b = other.blocks.get(d)
            if a is not None and b is not None:
                blocks[d] = linalg.matmul(a, b)
        return GradedLinearMap(other.source, self.target, self.degree + other.degree, blocks)

    def add(self, other: "GradedLinearMap") -> "GradedLinearMap":
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        blocks = {}
        for d in set(self.blocks) | set(other.blocks):
            blocks[d] = linalg.add(self.block(d), other.block(d))
        return GradedLinearMap(self.source, self.target, self.degree, blocks)

    def scale(self, c) -> "GradedLinearMap":
        return GradedLinearMap(
            self.source, self.target, self.degree,
            {d: linalg.scale(m, c) for d, m in self.blocks.items()},
        )

    def is_zero(self) -> bool:
        return all(linalg.is_zero(m) for m in self.blocks.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedLinearMap):
            return NotImplemented
        if self.degree != other.degree:
            return False
        for d in set(self.blocks) | set(other.blocks):
            if not linalg.eq(self.block(d), other.block(d)):
                return False
        return True

    @staticmethod
    def zero(source, target, degree) -> "GradedLinearMap":
        return GradedLinearMap(source, target, degree, {})

    @staticmethod
    def identity(space) -> "GradedLinearMap":
        return GradedLinearMap(
            space, space, 0,
            {d: linalg.identity(space.dim(d)) for d in space.degrees()},
        )

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "blocks": {
                str(d): [[rat_str(x) for x in row] for row in m]
                for d, m in sorted(self.blocks.items())
            },
        }

    @staticmethod
    def from_json(obj: dict, source, target) -> "GradedLinearMap":
        return GradedLinearMap(
            source, target, int(obj["degree"]),
            {int(d): [[rat(x) for x in row] for row in m] for d, m in obj["blocks"].items()},
        )


# complexes ------------------------------------------------------------------


@dataclass
class Complex:
    space: GradedVectorSpace
    differential: GradedLinearMap

    def __post_init__(self):
        if self.differential.degree != 1:
            raise ValueError("differential must have degree +1")
        dd = self.differential.compose(self.differential)
        if not dd.is_zero():
            raise ValueError("differential does not square to zero")

    def d(self, v: Vector) -> Vector:
        return self.differential.apply(v)


def shift(c: Complex, n: int) -> Complex:
    """Shifted complex: V[n]^i = V^{n+i}, differential (-1)^n d."""
    space = c.space.shifted(n)
    sign = -1 if n % 2 else 1
    blocks = {d - n: (linalg.scale(m, sign) if sign < 0 else linalg.copy(m))
              for d, m in c.differential.blocks.items()}
    diff = GradedLinearMap(space, space, 1, blocks)
    return Complex(space, diff)


# splittings -----------------------------------------------------------------


@dataclass
class CohomologySplitting:
    """Deterministic strong deformation retract of a complex onto its
    cohomology: pi iota = Id, iota pi - Id = h d + d h, d iota = 0, with the
    side conditions h h = 0, h iota = 0, pi h = 0."""

    complex: Complex
    H: GradedVectorSpace
    projection: GradedLinearMap   # complex -> H
    inclusion: GradedLinearMap    # H -> complex
    homotopy: GradedLinearMap     # degree -1


def cohomology_splitting(c: Complex) -> CohomologySplitting:
    """Split a complex via exact Gaussian elimination.

    Per degree i the space decomposes as B + H + C' where C' is spanned by
    the pivot columns of d_i (mapped isomorphically onto B^{i+1}) and H is a
    lowest-index completion of B inside the kernel.  h inverts d on B with a
    minus sign so that iota pi - Id = h d + d h holds on the nose.
    """
    space = c.space
    degs = space.degrees()
    # pivot columns of d_i give C'^i; their images give the boundary basis of i+1
    pivcols: dict[int, list[int]] = {}
    for d in degs:
        m = c.differential.block(d)
        pivcols[d] = linalg.column_space_pivots(m) if space.dim(d) else []

    H_labels: dict[int, list[str]] = {}
    proj_blocks: dict[int, Matrix] = {}
    incl_blocks: dict[int, Matrix] = {}
    hom_blocks: dict[int, Matrix] = {}
    incl_cols: dict[int, list[list[Fraction]]] = {}

    for d in degs:
        n = space.dim(d)
        dmat = c.differential.block(d)
        # boundary basis: images of the pivot columns of the incoming differential
        prev = d - 1
        prev_piv = pivcols.get(prev, [])
        dprev = c.differential.block(prev) if space.dim(prev) else None
        bvecs = [[dprev[r][j] for r in range(n)] for j in prev_piv] if dprev else []
        # kernel basis of d_d
        if space.dim(d + 1):
            kvecs = linalg.kernel_basis(dmat)
        else:
            kvecs = [[ONE if i == j else ZERO for i in range(n)] for j in range(n)]
        # complete boundaries to the kernel, lowest candidate index first
        hvecs = []
        cur = [v[:] for v in bvecs]
        r0 = linalg.rank(linalg.transpose(cur)) if cur else 0
        for v in kvecs:
            test = cur + [v]
            if linalg.rank(linalg.transpose(test)) > r0:
                cur.append(v)
                hvecs.append(v)
                r0 += 1
        # C' spanned by pivot columns of the outgoing differential
        cvecs = [[ONE if i == j else ZERO for i in range(n)] for j in pivcols.get(d, [])]
        T = linalg.transpose(bvecs + hvecs + cvecs)  # columns = adapted basis
        if n:
            Tinv = linalg.inverse(T)
        else:
            Tinv = []
        nb, nh = len(bvecs), len(hvecs)
        H_labels[d] = [f"h{d}_{i}" for i in range(nh)]
        # projection: H-coordinates in the adapted basis
        proj_blocks[d] = [Tinv[nb + i] for i in range(nh)] if n else []
        incl_cols[d] = hvecs
        # homotopy: -(preimage in C'^{d-1}) of the B-part
        if nb and n:
            pre = linalg.zeros(space.dim(prev), nb)
            for col, j in enumerate(prev_piv):
                pre[j][col] = -ONE
            bcoords = [Tinv[i] for i in range(nb)]
            hom_blocks[d] = linalg.matmul(pre, bcoords)

    H = GradedVectorSpace({d: ls for d, ls in H_labels.items() if ls})
    projection = GradedLinearMap(space, H, 0, {d: m for d, m in proj_blocks.items() if m})
    incl_blocks = {
        d: linalg.transpose(incl_cols[d]) for d in degs if incl_cols.get(d)
    }
    inclusion = GradedLinearMap(H, space, 0, incl_blocks)
    homotopy = GradedLinearMap(space, space, -1, hom_blocks)
    return CohomologySplitting(c, H, projection, inclusion, homotopy)


def splitting_identities_hold(s: CohomologySplitting) -> bool:
    """Exact check of all retract identities and side conditions."""
    c = s.complex
    d = c.differential
    ident_H = GradedLinearMap.identity(s.H)
    ident_V = GradedLinearMap.identity(c.space)
    if not (s.projection.compose(s.inclusion) == ident_H):
        return False
    lhs = s.inclusion.compose(s.projection).add(ident_V.scale(-1))
    rhs = s.homotopy.compose(d).add(d.compose(s.homotopy))
    if not (lhs == rhs):
        return False
    if not d.compose(s.inclusion).is_zero():
        return False
    if not s.homotopy.compose(s.homotopy).is_zero():
        return False
    if not s.homotopy.compose(s.inclusion).is_zero():
        return False
    if not s.projection.compose(s.homotopy).is_zero():
        return False
    return True
