"""Local Artinian coefficient rings and exact nilpotent exp/log calculus.

An ArtinianAlgebra is a monomial-ideal presentation K[t_1..t_m]/I with
nilpotent maximal ideal.  Coefficients of deformation theory live in
``V (x) m_A``; such tensors are dicts mapping exponent tuples (monomials of
m_A) to elements of V (graded ``Vector`` dicts, see graded.py).

The Baker-Campbell-Hausdorff logarithm is computed by the Dynkin series,
which is a finite exact sum here because every bracket word of length
exceeding the nilpotency order dies in m_A.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .graded import Vector, vadd, vscale

Monomial = tuple  # exponent tuple
Tensor = dict     # {Monomial: Vector}


@dataclass(frozen=True)
class ArtinianAlgebra:
    """K[t_1..t_m]/I for a monomial ideal I with m_A nilpotent."""

    generators: tuple[str, ...]
    ideal: tuple[Monomial, ...]

    def __post_init__(self):
        m = len(self.generators)
        for g in self.ideal:
            if len(g) != m:
                raise ValueError("ideal generator arity mismatch")
        for i in range(m):
            if not any(all(g[j] == 0 for j in range(m) if j != i) and g[i] > 0
                       for g in self.ideal):
                raise ValueError(
                    f"no pure power of {self.generators[i]} in the ideal: "
                    "maximal ideal is not nilpotent"
                )

    def in_ideal(self, mono: Monomial) -> bool:
        return any(all(mono[i] >= g[i] for i in range(len(g))) for g in self.ideal)

    @property
    def basis(self) -> list[Monomial]:
        """Monomials outside I, sorted by (total degree, exponents)."""
        bounds = []
        m = len(self.generators)
        for i in range(m):
            bounds.append(min(g[i] for g in self.ideal
                              if g[i] > 0 and all(g[j] == 0 for j in range(m) if j != i)))
        out = [mono for mono in product(*(range(b) for b in bounds))
               if not self.in_ideal(mono)]
        out.sort(key=lambda mo: (sum(mo), mo))
        return out

    @property
    def maximal_ideal_basis(self) -> list[Monomial]:
        return [mo for mo in self.basis if sum(mo) > 0]

    @property
    def nilpotency_order(self) -> int:
        """Smallest N with m_A^N = 0."""
        degs = [sum(mo) for mo in self.maximal_ideal_basis]
        return (max(degs) + 1) if degs else 1

    def mul_monomials(self, a: Monomial, b: Monomial) -> Monomial | None:
        c = tuple(x + y for x, y in zip(a, b))
        return None if self.in_ideal(c) else c

    @staticmethod
    def parse(spec: str) -> "ArtinianAlgebra":
        """Parse e.g. "k[t1,t2]/(t1^2, t1*t2, t2^3)" or shorthand "t^4"
        (meaning k[t]/(t^4))."""
        spec = spec.strip()
        m = re.fullmatch(r"(\w+)\^(\d+)", spec)
        if m:
            return ArtinianAlgebra((m.group(1),), ((int(m.group(2)),),))
        m = re.fullmatch(r"[kK]\[([^\]]*)\]/\(([^)]*)\)", spec)
        if not m:
            raise ValueError(f"cannot parse Artinian ring spec: {spec!r}")
        gens = tuple(g.strip() for g in m.group(1).split(","))
        idx = {g: i for i, g in enumerate(gens)}
        ideal = []
        for term in m.group(2).split(","):
            expo = [0] * len(gens)
            for factor in term.split("*"):
                factor = factor.strip()
                fm = re.fullmatch(r"(\w+)(?:\^(\d+))?", factor)
                if not fm or fm.group(1) not in idx:
                    raise ValueError(f"bad monomial factor {factor!r} in {spec!r}")
                expo[idx[fm.group(1)]] += int(fm.group(2) or 1)
            ideal.append(tuple(expo))
        return ArtinianAlgebra(gens, tuple(ideal))


# ---------------------------------------------------------------------------
# tensors in V (x) m_A


def tzero() -> Tensor:
    return {}


def tclean(x: Tensor) -> Tensor:
    return {mo: v for mo, v in x.items() if v}


def tadd(*xs: Tensor) -> Tensor:
    out: Tensor = {}
    for x in xs:
        for mo, v in x.items():
            out[mo] = vadd(out.get(mo, {}), v)
    return tclean(out)


def tscale(c, x: Tensor) -> Tensor:
    c = Fraction(c)
    if not c:
        return {}
    return {mo: vscale(c, v) for mo, v in x.items()}


def tmap(f, x: Tensor) -> Tensor:
    """Apply a linear map (Vector -> Vector) to every monomial coefficient."""
    return tclean({mo: f(v) for mo, v in x.items()})


def tbilinear(A: ArtinianAlgebra, op, x: Tensor, y: Tensor) -> Tensor:
    """Extend a bilinear Vector operation A-bilinearly to tensors."""
    out: Tensor = {}
    for mx, vx in sorted(x.items()):
        for my, vy in sorted(y.items()):
            mo = A.mul_monomials(mx, my)
            if mo is None:
                continue
            w = op(vx, vy)
            if w:
                out[mo] = vadd(out.get(mo, {}), w)
    return tclean(out)


def tmultilinear(A: ArtinianAlgebra, op, tensors: list) -> Tensor:
    """Extend a multilinear operation (list of Vectors -> Vector)
    A-multilinearly to tensors in V (x) m_A."""
    from itertools import product

    out: Tensor = {}
    for combo in product(*(sorted(t.items()) for t in tensors)):
        mo = combo[0][0]
        ok = True
        for m, _ in combo[1:]:
            mo = A.mul_monomials(mo, m)
            if mo is None:
                ok = False
                break
        if not ok:
            continue
        w = op([v for _, v in combo])
        if w:
            out[mo] = vadd(out.get(mo, {}), w)
    return tclean(out)


def teq(x: Tensor, y: Tensor) -> bool:
    return tclean(x) == tclean(y)


def truncate_order(x: Tensor, k: int) -> Tensor:
    """Part of total m_A-degree exactly k."""
    return {mo: v for mo, v in x.items() if sum(mo) == k}


# ---------------------------------------------------------------------------
# BCH via the Dynkin expansion


def bch(A: ArtinianAlgebra, bracket, x: Tensor, y: Tensor,
        weight_bound: int | None = None) -> Tensor:
    """log(e^x e^y) for x, y in g (x) m_A, ``bracket`` a bilinear Vector op.

    Dynkin's formula: sum over n >= 1 and exponent pairs (r_i, s_i) with
    r_i + s_i > 0 of

        (-1)^(n-1)/n * 1/(W * prod r_i! s_i!) * [x^r_1 y^s_1 ... x^r_n y^s_n]

    where W is the total word weight and the bracket word is right-nested.
    Truncated at the nilpotency order of m_A, which makes it exact.
    """
    if weight_bound is None:
        weight_bound = A.nilpotency_order - 1
    if weight_bound < 1:
        return tzero()

    def nested(word: list[Tensor]) -> Tensor:
        # [w_1, [w_2, [... [w_{m-1}, w_m]]]]
        acc = word[-1]
        for w in reversed(word[:-1]):
            acc = tbilinear(A, bracket, w, acc)
            if not acc:
                return acc
        return acc

    import math

    total = tzero()
    # enumerate sequences ((r_1,s_1),...,(r_n,s_n)) with total weight <= bound
    def seqs(remaining: int):
        # yields lists of (r, s) with r+s >= 1 and sum <= remaining
        for r in range(remaining + 1):
            for s in range(remaining - r + 1):
                if r + s == 0:
                    continue
                head = (r, s)
                yield [head]
                for tail in seqs(remaining - r - s):
                    yield [head] + tail

    terms: dict[int, list] = {}
    for seq in seqs(weight_bound):
        terms.setdefault(len(seq), []).append(seq)
    for n, seq_list in sorted(terms.items()):
        outer = Fraction((-1) ** (n - 1), n)
        for seq in seq_list:
            weight = sum(r + s for r, s in seq)
            word: list[Tensor] = []
            for r, s in seq:
                word.extend([x] * r)
                word.extend([y] * s)
            # right-nested bracket words ending in a repeated letter vanish
            if len(word) >= 2 and word[-1] is word[-2]:
                continue
            denom = weight
            for r, s in seq:
                denom *= math.factorial(r) * math.factorial(s)
            val = nested(word)
            if val:
                total = tadd(total, tscale(outer / denom, val))
    return total


def bch_list(A: ArtinianAlgebra, bracket, elts: list[Tensor]) -> Tensor:
    """log of the ordered product of exponentials e^{z_1} ... e^{z_k}."""
    if not elts:
        return tzero()
    acc = elts[-1]
    for z in reversed(elts[:-1]):
        acc = bch(A, bracket, z, acc)
    return acc


def exp_in_representation(A: ArtinianAlgebra, mat_mul, x: Tensor) -> Tensor:
    """exp(x) for x a tensor of square-matrix values; exact by nilpotency of
    m_A.  ``mat_mul`` multiplies two Vector values (matrix composition)."""
    import math

    N = A.nilpotency_order
    acc = tzero()
    cur = None
    for k in range(1, N):
        cur = x if k == 1 else tbilinear(A, mat_mul, cur, x)
        if not cur:
            break
        acc = tadd(acc, tscale(Fraction(1, math.factorial(k)), cur))
    return acc
