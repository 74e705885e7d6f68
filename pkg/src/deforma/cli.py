"""Batch command-line front end.

Every subcommand reads JSON inputs, runs one pipeline, and emits a single
JSON report (stdout or --out) plus a short prose summary on stderr.  The
report embeds a manifest (command line, input hashes, parameters, tool
version, verdicts) and is byte-identical across re-runs with identical
inputs; wall-clock time is therefore reported only in the prose stream.

Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from fractions import Fraction

from . import __version__
from . import linalg
from .artinian import ArtinianAlgebra, tclean, tscale, tzero
from .cartan import SmallExtension, obstruction_kernel_check
from .cone import build_cone
from .deform import (
    coface_tensor,
    compare_mc_cocycles,
    h1sc_equiv,
    z1sc_check,
)
from .dgla import (
    DGLA,
    DGLAMorphism,
    check_dgla,
    check_mc_dgla,
    dgla_from_bracket_fn,
    hom_dgla,
    preserving_endomorphisms,
)
from .graded import (
    Complex,
    GradedLinearMap,
    GradedVectorSpace,
    cohomology_splitting,
    rat,
    vbasis,
)
from .linfty import (
    LInftyMorphism,
    LInftyStructure,
    arity_violations,
    certify_quasi_abelian,
    check_linfty,
    check_linfty_morphism,
    dgla_to_linfty,
    minimal_model,
)
from .simplicial import (
    SemicosimplicialObject,
    cech_diagram,
    tot,
    tw_add,
    tw_bracket,
    tw_d,
    tw_dupont_h,
    tw_scale,
    whitney_E,
    whitney_I,
)
from .toric import (
    BoxEscapeError,
    MonomialCover,
    affine_line_cover,
    box_stability,
    btt_pipeline,
    cech_sheaf,
    check_toric_cartan,
    cohomology_dims,
    p1_cover,
    p2_cover,
    torus_cover,
)
from .artinian import bch_list


class InputError(Exception):
    """Bad input file or argument value: exit code 2."""


# --------------------------------------------------------------------- input

def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file")
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: malformed JSON at line {e.lineno} "
                         f"column {e.colno}: {e.msg}")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


_BUILTIN_COVERS = {
    "p1": p1_cover,
    "p2": p2_cover,
    "torus": torus_cover,
    "affine": affine_line_cover,
}


def _resolve_cover(spec: str) -> MonomialCover:
    if os.path.exists(spec):
        try:
            return MonomialCover.from_json(_load_json(spec))
        except (KeyError, ValueError, TypeError) as e:
            raise InputError(f"{spec}: invalid cover: {e}")
    if spec in _BUILTIN_COVERS:
        return _BUILTIN_COVERS[spec]()
    raise InputError(f"unknown cover {spec!r} (not a file; builtins: "
                     + ", ".join(sorted(_BUILTIN_COVERS)) + ")")


def _resolve_sheaf(spec: str):
    s = spec.lower().replace("-", "_")
    if s == "theta":
        return "theta"
    if s in ("de_rham", "all"):
        return "de_rham"
    if s in ("o", "structure"):
        return ("omega", 0)
    if s.startswith("omega"):
        try:
            return ("omega", int(s[len("omega"):].lstrip("^_")))
        except ValueError:
            pass
    raise InputError(f"unknown sheaf {spec!r} (theta, o, omega<p>, de-rham)")


def _load_structure(path: str) -> LInftyStructure:
    try:
        return LInftyStructure.from_json(_load_json(path))
    except (KeyError, ValueError, TypeError) as e:
        raise InputError(f"{path}: invalid L-infinity structure: {e}")


def _load_dgla(path: str) -> DGLA:
    try:
        return DGLA.from_json(_load_json(path))
    except (KeyError, ValueError, TypeError) as e:
        raise InputError(f"{path}: invalid differential graded Lie algebra: {e}")


def _load_morphism(path: str) -> DGLAMorphism:
    """A DGLA morphism file: {"source": dgla, "target": dgla, "map": glm}."""
    obj = _load_json(path)
    try:
        src = DGLA.from_json(obj["source"])
        tgt = DGLA.from_json(obj["target"])
        f = GradedLinearMap.from_json(obj["map"], src.space, tgt.space)
        return DGLAMorphism(src, tgt, f)
    except (KeyError, ValueError, TypeError) as e:
        raise InputError(f"{path}: invalid morphism: {e}")


def _parse_ring(spec: str) -> ArtinianAlgebra:
    try:
        return ArtinianAlgebra.parse(spec)
    except (ValueError, TypeError) as e:
        raise InputError(f"invalid ring spec {spec!r}: {e}")


def _parse_tensor(obj: dict, A: ArtinianAlgebra, sp: GradedVectorSpace) -> dict:
    """{"1,0": {"0:label": "p/q"}} -> {(1,0): {key: Fraction}}."""
    lookup = {}
    for d in sp.degrees():
        for i, lab in enumerate(sp.components[d]):
            lookup[f"{d}:{lab}"] = (d, i)
    out = {}
    for mono_s, vec_s in obj.items():
        mono = tuple(int(v) for v in str(mono_s).split(","))
        if len(mono) != len(A.variables):
            raise InputError(f"monomial {mono_s!r} has the wrong arity for "
                             f"ring variables {A.variables}")
        out[mono] = {lookup[k]: rat(c) for k, c in vec_s.items()}
    return out


# -------------------------------------------------------------------- output

def _validity(rep) -> dict:
    return {"valid": bool(rep), "violations": [str(v) for v in rep.violations]}


def _emit(args, manifest: dict, report: dict, prose: list[str],
          started: float) -> None:
    doc = json.dumps({"manifest": manifest, "report": report},
                     indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(doc)
    else:
        sys.stdout.write(doc)
    elapsed = time.monotonic() - started
    for line in prose:
        print(line, file=sys.stderr)
    print(f"elapsed: {elapsed:.2f}s", file=sys.stderr)


def _manifest(args, inputs: list[str], verdicts: dict) -> dict:
    params = {}
    for name in ("cutoff", "box", "ring", "seed", "trials", "sheaf", "cover"):
        v = getattr(args, name, None)
        if v is not None:
            params[name] = v
    return {
        "command": ["deforma", args.command] + list(args._tail),
        "tool_version": __version__,
        "inputs": {p: f"sha256:{_sha256(p)}" for p in inputs
                   if os.path.exists(p)},
        "parameters": params,
        "verdicts": verdicts,
    }


# --------------------------------------------------------------- subcommands

def cmd_check_linfty(args) -> tuple[int, dict, dict, list]:
    L = _load_structure(args.input)
    rep = check_linfty(L, args.cutoff)
    verdicts = {"linfty_valid": rep.valid}
    report = {"arity_cutoff": args.cutoff or L.arity_cutoff,
              "check": _validity(rep)}
    prose = [f"check-linfty {args.input}: "
             + ("valid" if rep.valid else "INVALID")]
    return (0 if rep.valid else 1), verdicts, report, prose


def cmd_check_dgla(args):
    L = _load_dgla(args.input)
    rep = check_dgla(L)
    verdicts = {"dgla_valid": rep.valid}
    report = {"check": _validity(rep)}
    prose = [f"check-dgla {args.input}: "
             + ("valid" if rep.valid else "INVALID")]
    return (0 if rep.valid else 1), verdicts, report, prose


def cmd_check_cartan(args):
    cover = _resolve_cover(args.cover)
    rep = check_toric_cartan(cover, args.box)
    verdicts = {"cartan_valid": rep.valid}
    report = {
        "cover": cover.name, "box": args.box,
        "pairs_checked": rep.pairs_checked,
        "coface_checked": rep.coface_checked,
        "coface_skipped": rep.coface_skipped,
        "violations": [str(v) for v in rep.violations],
    }
    prose = [f"check-cartan {cover.name} box={args.box}: "
             + ("both identities exact on all "
                f"{rep.pairs_checked} basis pairs" if rep.valid
                else f"INVALID ({len(rep.violations)} violations)")]
    return (0 if rep.valid else 1), verdicts, report, prose


def cmd_transfer(args):
    L = _load_structure(args.input)
    mm, iota = minimal_model(L)
    cutoff = args.cutoff or mm.arity_cutoff
    srep = check_linfty(mm, min(cutoff, 4))
    mrep = check_linfty_morphism(iota, min(cutoff, 3))
    ok = srep.valid and mrep.valid
    verdicts = {"transferred_valid": srep.valid, "morphism_valid": mrep.valid}
    report = {
        "transferred": mm.to_json(),
        "structure_check": _validity(srep),
        "morphism_check": _validity(mrep),
    }
    prose = [f"transfer {args.input}: structure "
             + ("valid" if srep.valid else "INVALID")
             + ", inclusion morphism "
             + ("valid" if mrep.valid else "INVALID")]
    return (0 if ok else 1), verdicts, report, prose


def cmd_minimal_model(args):
    L = _load_structure(args.input)
    mm, _ = minimal_model(L)
    dims = {str(d): mm.space.dim(d) for d in mm.space.degrees()}
    verdicts = {"built": True}
    report = {"cohomology_dims": dims, "minimal_model": mm.to_json()}
    prose = [f"minimal-model {args.input}: cohomology dims {dims}"]
    return 0, verdicts, report, prose


def cmd_certify_qa(args):
    L = _load_structure(args.input)
    cert = certify_quasi_abelian(L)
    verdicts = {"quasi_abelian": cert.verdict}
    report = {"verdict": cert.verdict, "reason": cert.reason,
              "chain": [{"verdict": c.verdict, "reason": c.reason}
                        for c in cert.chain]}
    prose = [f"certify-qa {args.input}: {cert.verdict} ({cert.reason})"]
    return (0 if cert.verdict == "YES" else 1), verdicts, report, prose


def cmd_cone(args):
    chi = _load_morphism(args.chi)
    cutoff = args.cutoff or 4
    cone = build_cone(chi, cutoff)
    rep = check_linfty(cone.structure, cutoff)
    # Jacobiator of the binary bracket alone: re-check arity 3 with the
    # ternary (and higher) corrections dropped
    truncated = LInftyStructure(
        cone.structure.space,
        {k: dict(t) for k, t in cone.structure.brackets.items() if k <= 2},
        3)
    jac = arity_violations(truncated, 3)
    verdicts = {"structure_valid": rep.valid,
                "jacobiator_nonzero": bool(jac)}
    report = {
        "dimensions": {str(d): cone.cone_complex.space.dim(d)
                       for d in cone.cone_complex.space.degrees()},
        "jacobiator_witnesses": [str(v) for v in jac],
        "structure_check": _validity(rep),
        "calibrated_signs": {str(k): v for k, v in sorted(cone.signs.items())},
    }
    prose = [f"cone {args.chi}: structure "
             + ("valid" if rep.valid else "INVALID")
             + f" at arities 1..{cutoff}; binary-only Jacobiator "
             + ("nonzero (corrected by the ternary bracket)" if jac
                else "zero")]
    return (0 if rep.valid else 1), verdicts, report, prose


def cmd_tot(args):
    cover = _resolve_cover(args.cover)
    tc = cech_sheaf(cover, _resolve_sheaf(args.sheaf), args.box)
    T = tc.totalization()
    split = tc.splitting()
    dims = {str(d): T.complex.space.dim(d) for d in T.complex.space.degrees()}
    hdims = {str(d): split.H.dim(d) for d in split.H.degrees()
             if split.H.dim(d)}
    verdicts = {"built": True}
    report = {"cover": cover.name, "sheaf": args.sheaf, "box": args.box,
              "total_dims": dims, "cohomology_dims": hdims}
    prose = [f"tot {cover.name} sheaf={args.sheaf} box={args.box}: "
             f"total dims {dims}, cohomology {hdims}"]
    return 0, verdicts, report, prose


def cmd_tot_tw(args):
    # Whitney consistency on the totalization of the chosen diagram:
    # I(E(x)) = x for every basis element of Tot
    cover = _resolve_cover(args.cover)
    tc = cech_sheaf(cover, _resolve_sheaf(args.sheaf), args.box)
    S, T = tc.S, tc.totalization()
    checked, bad = 0, 0
    sp = T.complex.space
    for d in sp.degrees():
        for i in range(sp.dim(d)):
            x = {(d, i): Fraction(1)}
            if whitney_I(S, T, whitney_E(S, T, x)) != x:
                bad += 1
            checked += 1
    verdicts = {"roundtrip_identity": bad == 0}
    report = {"cover": cover.name, "sheaf": args.sheaf, "box": args.box,
              "basis_checked": checked, "failures": bad}
    prose = [f"tot-tw {cover.name} sheaf={args.sheaf} box={args.box}: "
             f"I(E(x)) = x on {checked} basis elements"
             + ("" if bad == 0 else f", {bad} FAILURES")]
    return (0 if bad == 0 else 1), verdicts, report, prose


def _sl2() -> DGLA:
    sp = GradedVectorSpace({0: ["e", "f", "h"]})
    cx = Complex(sp, GradedLinearMap.zero(sp, sp, 1))
    e, f, h = (0, 0), (0, 1), (0, 2)
    F = Fraction
    tab = {
        (e, f): {h: F(1)}, (f, e): {h: F(-1)},
        (h, e): {e: F(2)}, (e, h): {e: F(-2)},
        (h, f): {f: F(-2)}, (f, h): {f: F(2)},
    }
    return dgla_from_bracket_fn(cx, lambda a, b: dict(tab.get((a, b), {})))


def _whitney_diagrams():
    F = Fraction

    def constant(cx, N):
        ident = GradedLinearMap.identity(cx.space)
        return SemicosimplicialObject(
            [cx] * (N + 1),
            [[]] + [[ident] * (n + 1) for n in range(1, N + 1)])

    pt = GradedVectorSpace({0: ["c"]})
    point = Complex(pt, GradedLinearMap.zero(pt, pt, 1))
    two = GradedVectorSpace({0: ["v"], 1: ["w"]})
    two_term = Complex(two, GradedLinearMap(two, two, 1, {0: [[F(1)]]}))
    g = _sl2()
    cover = cech_diagram([(0,), (1,), (0, 1)],
                         {(0,): g, (1,): g, (0, 1): g}).S
    return [("constant point, 3 levels", constant(point, 3)),
            ("constant two-term complex, 3 levels", constant(two_term, 3)),
            ("two-chart cover of a Lie algebra", cover)]


def cmd_whitney_check(args):
    # exact identity sweep: I E = Id, E and I chain maps, E I - Id = h d + d h,
    # h E = 0, on the E-images of all Tot basis elements together with their
    # Dupont images and pairwise brackets (face-compatible pool beyond im E)
    counts, bad = {}, []
    for name, S in _whitney_diagrams():
        T = tot(S)
        sp = T.complex.space
        basis = [{(d, i): Fraction(1)} for d in sp.degrees()
                 for i in range(sp.dim(d))]
        pool = []
        for x in basis:
            ex = whitney_E(S, T, x)
            pool.append(ex)
            if whitney_I(S, T, ex) != x:
                bad.append(f"{name}: I E != Id")
            if whitney_E(S, T, T.complex.d(x)) != tw_d(S, ex):
                bad.append(f"{name}: E is not a chain map")
            if not tw_dupont_h(S, ex).is_zero():
                bad.append(f"{name}: h does not kill im E")
            hx = tw_dupont_h(S, ex)
            if not hx.is_zero():
                pool.append(hx)
        if S.is_dgla():
            for a in pool[:8]:
                for b in pool[:8]:
                    br = tw_bracket(S, a, b)
                    if not br.is_zero():
                        pool.append(br)
        for x in pool:
            lhs = tw_add(whitney_E(S, T, whitney_I(S, T, x)),
                         tw_scale(-1, x))
            rhs = tw_add(tw_dupont_h(S, tw_d(S, x)),
                         tw_d(S, tw_dupont_h(S, x)))
            if lhs != rhs:
                bad.append(f"{name}: homotopy identity fails")
            if whitney_I(S, T, tw_d(S, x)) != T.complex.d(whitney_I(S, T, x)):
                bad.append(f"{name}: I is not a chain map")
        counts[name] = len(pool)
    verdicts = {"identities_exact": not bad}
    report = {"elements_checked": counts, "failures": bad}
    prose = ["whitney-check: "
             + ("all integration/extension/homotopy identities exact "
                f"({sum(counts.values())} elements)" if not bad
                else f"{len(bad)} FAILURES")]
    return (0 if not bad else 1), verdicts, report, prose


def cmd_mc_check(args):
    obj = _load_json(args.input)
    try:
        L = DGLA.from_json(obj["dgla"])
        A = _parse_ring(args.ring)
        x = _parse_tensor(obj["element"], A, L.space)
    except (KeyError, ValueError, TypeError) as e:
        if isinstance(e, InputError):
            raise
        raise InputError(f"{args.input}: {e}")
    ok = check_mc_dgla(L, A, x)
    verdicts = {"maurer_cartan": ok}
    report = {"ring": args.ring, "maurer_cartan": ok}
    prose = [f"mc-check {args.input} over {args.ring}: "
             + ("Maurer-Cartan holds" if ok else "Maurer-Cartan FAILS")]
    return (0 if ok else 1), verdicts, report, prose


# -- nonabelian cocycles over a toric cover ---------------------------------

def _small_keys(tc, n: int, bound: int) -> list:
    """Level-n basis keys whose ambient character is small enough that
    iterated brackets stay inside the degree box."""
    out = []
    for key in tc.S.complex(n).space.basis():
        _, rep = tc.ambient_of(n, key)
        a = next(iter(rep))[0]
        if max(abs(c) for c in a) <= bound and sum(abs(c) for c in a) <= bound:
            out.append(key)
    return out


def _small_tensor(keys, A, rng) -> dict:
    out = {}
    for mono in A.maximal_ideal_basis:
        vec = {}
        for k in keys:
            c = rng.randint(-1, 1)
            if c:
                vec[k] = Fraction(c)
        if vec:
            out[mono] = vec
    return out


def _toric_cocycle_setup(args):
    cover = _resolve_cover(args.cover)
    tc = cech_sheaf(cover, "theta", args.box)
    S = tc.guarded()
    A = _parse_ring(args.ring)
    bound = max(1, args.box // 2)
    return cover, tc, S, A, bound


def cmd_z1sc(args):
    cover, tc, S, A, bound = _toric_cocycle_setup(args)
    rng = random.Random(args.seed)
    k0 = _small_keys(tc, 0, bound)
    k1 = _small_keys(tc, 1, bound)
    br = S.levels[1].bracket
    cocycles = coboundaries = escapes = failures = 0
    for i in range(args.trials):
        try:
            if i % 2 == 0:
                a = _small_tensor(k0, A, rng)
                x = tclean(bch_list(A, br, [
                    tscale(-1, coface_tensor(S, 1, 1, a)),
                    coface_tensor(S, 1, 0, a)]))
                coboundaries += 1
                if not z1sc_check(S, A, x):
                    failures += 1
            else:
                x = _small_tensor(k1, A, rng)
                if z1sc_check(S, A, x):
                    cocycles += 1
        except BoxEscapeError:
            escapes += 1
    ok = failures == 0
    verdicts = {"coboundaries_are_cocycles": ok}
    report = {"cover": cover.name, "box": args.box, "ring": args.ring,
              "trials": args.trials, "coboundaries": coboundaries,
              "random_cocycles": cocycles, "escapes": escapes,
              "failures": failures}
    prose = [f"z1sc {cover.name} box={args.box} ring={args.ring}: "
             f"{coboundaries} coboundaries all cocycles"
             if ok else
             f"z1sc {cover.name}: {failures} coboundaries FAILED the "
             "cocycle condition"]
    return (0 if ok else 1), verdicts, report, prose


def cmd_h1sc(args):
    cover, tc, S, A, bound = _toric_cocycle_setup(args)
    rng = random.Random(args.seed)
    k0 = _small_keys(tc, 0, bound)
    k1 = _small_keys(tc, 1, bound)
    br = S.levels[1].bracket
    trivialized = escapes = stuck = 0
    for _ in range(args.trials):
        try:
            if S.truncation < 2:
                # no double overlaps: the cocycle condition is vacuous and
                # every degree-one element qualifies
                x = _small_tensor(k1, A, rng)
            else:
                a = _small_tensor(k0, A, rng)
                x = tclean(bch_list(A, br, [
                    tscale(-1, coface_tensor(S, 1, 1, a)),
                    coface_tensor(S, 1, 0, a)]))
            if not z1sc_check(S, A, x):
                raise AssertionError("sampled element is not a cocycle")
            res = h1sc_equiv(S, A, x, tzero())
            if res:
                trivialized += 1
            else:
                stuck += 1
        except BoxEscapeError:
            escapes += 1
    ok = stuck == 0
    verdicts = {"all_gauge_trivial": ok}
    report = {"cover": cover.name, "box": args.box, "ring": args.ring,
              "trials": args.trials, "trivialized": trivialized,
              "escapes": escapes, "not_trivialized": stuck}
    prose = [f"h1sc {cover.name} box={args.box} ring={args.ring}: "
             f"{trivialized} sampled cocycles gauge-trivialized"
             + ("" if ok else f", {stuck} STUCK")]
    return (0 if ok else 1), verdicts, report, prose


def cmd_compare_52(args):
    # cross-validation on the full triangle cover of a nonabelian Lie
    # algebra: Maurer-Cartan in the transferred total structure against the
    # nonabelian cocycle condition via the Dynkin series
    nerve = [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]
    C = cech_diagram(nerve, {s: _sl2() for s in nerve})
    A = _parse_ring(args.ring)
    rep = compare_mc_cocycles(C.S, A, samples=args.trials, seed=args.seed,
                              ring_label=args.ring)
    verdicts = {"agreement": rep.ok}
    report = {"ring": args.ring, "samples": rep.samples,
              "cocycles": rep.cocycles, "agreements": rep.agreements,
              "disagreements": len(rep.disagreements)}
    prose = [f"compare-52 ring={args.ring} seed={args.seed}: "
             f"{rep.agreements}/{rep.samples} agree "
             f"({rep.cocycles} cocycles exercised)"
             + ("" if rep.ok else " -- DISAGREEMENTS FOUND")]
    return (0 if rep.ok else 1), verdicts, report, prose


def cmd_cech(args):
    cover = _resolve_cover(args.cover)
    sheaf = _resolve_sheaf(args.sheaf)
    dims, stable = box_stability(cover, sheaf, args.box)
    verdicts = {"box_stable": stable}
    report = {"cover": cover.name, "sheaf": args.sheaf, "box": args.box,
              "cohomology_dims": {str(d): v for d, v in sorted(dims.items())},
              "box_stable": stable}
    prose = [f"cech {cover.name} sheaf={args.sheaf} box={args.box}: dims "
             + " ".join(f"h^{d}={v}" for d, v in sorted(dims.items()))
             + (" (stable under box+1)" if stable
                else " (NOT stable under box+1)")]
    return (0 if stable else 1), verdicts, report, prose


def cmd_btt(args):
    cover = _resolve_cover(args.cover)
    rep = btt_pipeline(cover, args.box)
    ok = rep.unobstructed or rep.verdict.startswith("machinery")
    verdicts = {"verdict": rep.verdict, "unobstructed": rep.unobstructed}
    report = rep.to_json()
    prose = [f"btt {cover.name} box={args.box}: {rep.verdict}"]
    for note in rep.notes:
        prose.append(f"  note: {note}")
    return (0 if ok else 1), verdicts, report, prose


# -- randomized obstruction-kernel search -----------------------------------

def _random_acyclic_complex(rng) -> Complex:
    n = rng.randint(1, 2)
    while True:
        mat = [[Fraction(rng.randint(-2, 2)) for _ in range(n)]
               for _ in range(n)]
        if linalg.rank(mat) == n:
            break
    sp = GradedVectorSpace({0: [f"v{i}" for i in range(n)],
                            1: [f"w{i}" for i in range(n)]})
    return Complex(sp, GradedLinearMap(sp, sp, 1, {0: mat}))


def _h_injective_linear(f: GradedLinearMap, src: Complex,
                        tgt: Complex) -> bool:
    ssplit = cohomology_splitting(src)
    tsplit = cohomology_splitting(tgt)
    for d in ssplit.H.degrees():
        cols = []
        for i in range(ssplit.H.dim(d)):
            img = tsplit.projection.apply(
                f.apply(ssplit.inclusion.apply(vbasis((d, i)))))
            col = [Fraction(0)] * tsplit.H.dim(d)
            for (_, j), c in img.items():
                col[j] = c
            cols.append(col)
        if cols and linalg.rank(linalg.transpose(cols)) < len(cols):
            return False
    return True


def cmd_obstruction(args):
    # engineered instances: an endomorphism algebra of a random acyclic
    # complex (quasi-abelian), a differential-preserving subalgebra, and the
    # inclusion; every small-extension obstruction of a first-order
    # deformation must push to zero through the cohomology-injective map
    rng = random.Random(args.seed)
    ext = SmallExtension(_parse_ring("t^3"), (2,))
    checked = skipped = contradictions = nonzero_push = 0
    while checked < args.trials:
        cx = _random_acyclic_complex(rng)
        M, _ = hom_dgla(cx)
        n = cx.space.dim(0)
        u_keys = [(0, rng.randrange(n))] + [(1, i) for i in range(n)]
        L, incl = preserving_endomorphisms(cx, u_keys)
        cert = certify_quasi_abelian(dgla_to_linfty(M, 4))
        if cert.verdict != "YES" or not _h_injective_linear(
                incl.map, L.complex, M.complex):
            skipped += 1
            continue
        Ls = dgla_to_linfty(L, 4)
        Ms = dgla_to_linfty(M, 4)

        # the structures live on the shifted spaces: key (d, i) -> (d-1, i)
        def down(vec):
            return {(d - 1, i): c for (d, i), c in vec.items()}

        g = LInftyMorphism(Ls, Ms,
                           {1: {((k[0] - 1, k[1]),):
                                down(incl.apply(vbasis(k)))
                                for k in L.space.basis()}}, 4)
        # first-order deformations: degree-1 cocycles of L
        block = L.complex.differential.block(1)
        ker = linalg.kernel_basis(block) if L.space.dim(1) else []
        vec = {}
        for v in ker:
            c = rng.randint(-2, 2)
            for j, cj in enumerate(v):
                if c and cj:
                    vec[(0, j)] = vec.get((0, j), Fraction(0)) + c * cj
        x = {(1,): {k: c for k, c in vec.items() if c}}
        rep = obstruction_kernel_check(g, cert, ext, x)
        if not rep["pushed_vanishes"]:
            nonzero_push += 1
        if "contradiction" in rep:
            contradictions += 1
        checked += 1
    ok = contradictions == 0 and nonzero_push == 0
    verdicts = {"no_counterexample": ok}
    report = {"instances_checked": checked, "instances_skipped": skipped,
              "nonzero_pushforwards": nonzero_push,
              "contradictions": contradictions}
    prose = [f"obstruction seed={args.seed}: {checked} instances, "
             + ("every obstruction pushes to zero" if ok
                else f"{nonzero_push} nonzero pushforwards, "
                     f"{contradictions} contradictions")]
    return (0 if ok else 1), verdicts, report, prose


# ----------------------------------------------------------------- dispatch

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="deforma",
        description="Exact-arithmetic checks for homotopy Lie algebras, "
                    "Thom-Whitney totalizations and deformation functors.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, **kw)
        sp.set_defaults(fn=fn)
        sp.add_argument("--out", help="write the JSON report to this path")
        return sp

    s = add("check-linfty", cmd_check_linfty,
            help="validate the generalized Jacobi identities")
    s.add_argument("input")
    s.add_argument("--cutoff", type=int)

    s = add("check-dgla", cmd_check_dgla,
            help="validate a differential graded Lie algebra")
    s.add_argument("input")

    s = add("check-cartan", cmd_check_cartan,
            help="verify the contraction identities on a toric cover")
    s.add_argument("--cover", required=True)
    s.add_argument("--box", type=int, default=2)

    s = add("transfer", cmd_transfer,
            help="transfer to cohomology and validate the result")
    s.add_argument("input")
    s.add_argument("--cutoff", type=int)

    s = add("minimal-model", cmd_minimal_model,
            help="emit the minimal model of a structure")
    s.add_argument("input")

    s = add("certify-qa", cmd_certify_qa,
            help="quasi-abelianity certificate (YES/NO/UNKNOWN)")
    s.add_argument("input")

    s = add("cone", cmd_cone,
            help="build the mapping-cone structure of a morphism")
    s.add_argument("--chi", required=True)
    s.add_argument("--cutoff", type=int)

    s = add("tot", cmd_tot, help="total complex of a truncated cover diagram")
    s.add_argument("--cover", required=True)
    s.add_argument("--sheaf", default="theta")
    s.add_argument("--box", type=int, default=3)

    s = add("tot-tw", cmd_tot_tw,
            help="Whitney roundtrip identity on a cover totalization")
    s.add_argument("--cover", required=True)
    s.add_argument("--sheaf", default="theta")
    s.add_argument("--box", type=int, default=3)

    add("whitney-check", cmd_whitney_check,
        help="integration/extension/homotopy identity sweep")

    s = add("mc-check", cmd_mc_check,
            help="Maurer-Cartan check for an element over an Artinian ring")
    s.add_argument("input")
    s.add_argument("--ring", default="t^2")

    s = add("z1sc", cmd_z1sc, help="nonabelian cocycle condition sampling")
    s.add_argument("--cover", required=True)
    s.add_argument("--box", type=int, default=3)
    s.add_argument("--ring", default="t^3")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=20)

    s = add("h1sc", cmd_h1sc, help="gauge-trivialize sampled cocycles")
    s.add_argument("--cover", required=True)
    s.add_argument("--box", type=int, default=3)
    s.add_argument("--ring", default="t^3")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=20)

    s = add("compare-52", cmd_compare_52,
            help="Maurer-Cartan vs nonabelian-cocycle cross-validation")
    s.add_argument("--ring", default="t^4")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=200)

    s = add("cech", cmd_cech, help="truncated cohomology with box stability")
    s.add_argument("--cover", required=True)
    s.add_argument("--sheaf", default="theta")
    s.add_argument("--box", type=int, default=3)

    s = add("btt", cmd_btt, help="full unobstructedness pipeline on a cover")
    s.add_argument("--cover", required=True)
    s.add_argument("--box", type=int, default=5)

    s = add("obstruction", cmd_obstruction,
            help="randomized obstruction-kernel search")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=100)

    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    args._tail = argv[1:]
    started = time.monotonic()
    try:
        code, verdicts, report, prose = args.fn(args)
        inputs = [v for v in (getattr(args, "input", None),
                              getattr(args, "chi", None),
                              getattr(args, "cover", None)) if v]
        _emit(args, _manifest(args, inputs, verdicts), report, prose, started)
        return code
    except InputError as e:
        print(f"input error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
