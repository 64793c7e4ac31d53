"""Command line surface: validation, cohomology, duality checks, identity suites.

Every command prints a deterministic text report to stdout and optionally
writes line-oriented key=value records with --report.  Exit codes: 0 when all
requested checks pass, 1 when a check fails, 2 for usage or model errors.
"""

from __future__ import annotations

import argparse
import random
import sys
from typing import List, Optional

from .cohomology import (
    betti,
    degree_cap,
    periodicity_check,
    twisted_betti,
)
from .derivations import (
    Derivation,
    DgBundle,
    commutator,
    maurer_cartan_check,
)
from .graded import format_element
from .parser import ModelFileError, load_path
from .sampling import random_contraction, random_derivation, random_element
from .symmetries import (
    SymmetryError,
    bn_bracket,
    bn_element,
    bn_one_form_action,
    bn_pairing,
    bn_two_form_action,
    derived_bracket,
    derived_jacobi_residue,
    derived_leibniz_residue,
    e6_element,
    e6_pairing,
    e6_six_form_action,
    e6_three_form_action,
    is_selfdual_fixed,
    is_symmetry,
    selfdual_fixed_part,
    selfdual_phi,
    sym0_action_residue,
    sym0_dimensions,
    symmetry,
)
from .tduality import (
    TDualityError,
    dualize,
    les_check,
    ses_verify,
    tduality_chain_map,
    tduality_iso_check,
)

FROZEN_CHAIN_SIGN = 1


class Report:
    """Ordered key=value records mirrored next to the human-readable text."""

    def __init__(self):
        self.records: List[str] = []

    def add(self, key, value):
        if isinstance(value, bool):
            value = "pass" if value else "fail"
        self.records.append(f"{key}={value}")

    def write(self, path: Optional[str]):
        if path:
            with open(path, "w", encoding="utf-8") as handle:
                handle.write("\n".join(self.records) + "\n")


def _load(args, validate=True):
    return load_path(args.file, validate=validate)


def _need_two_step(mf):
    if not isinstance(mf.bundle, DgBundle) or mf.bundle.shape != "two_step":
        raise ModelFileError("shape", 0, 1, "this command needs a two-step bundle (fibers q:1, t:2)")
    return mf.bundle


def _need_flux(mf):
    if not isinstance(mf.bundle, DgBundle) or mf.bundle.shape != "flux":
        raise ModelFileError("shape", 0, 1, "this command needs a flux bundle (fibers q:3, t:6)")
    return mf.bundle


def cmd_validate(args, report):
    mf = _load(args)
    model = mf.model
    report.add("command", "validate")
    report.add("model", mf.name or "?")
    report.add("generators", len(model.generators))
    report.add("formal_dimension", model.formal_dimension)
    print(f"model {mf.name or '?'}: {len(model.generators)} generators, "
          f"formal dimension {model.formal_dimension}")
    for g in model.generators:
        d_val = model.differential.get(g.name, model.zero())
        print(f"  gen {g.name} : {g.degree}   d -> {format_element(d_val)}")
    if isinstance(mf.bundle, DgBundle):
        report.add("shape", mf.bundle.shape)
        report.add("maurer_cartan", True)
        forms = ", ".join(f"{k} = {format_element(v)}" for k, v in sorted(mf.bundle.structural.items()))
        print(f"bundle {mf.bundle.shape}: {forms}")
        print("maurer-cartan: pass")
    print("validation: ok")
    report.add("status", True)
    return 0


def cmd_betti(args, report):
    mf = _load(args)
    space = mf.space
    lo, hi = args.lo, args.hi if args.hi is not None else degree_cap(space)
    table = betti(space, lo, hi)
    report.add("command", "betti")
    report.add("model", mf.name or "?")
    print(f"betti numbers of {mf.name or '?'} for degrees {lo}..{hi}")
    for k, dim in table.as_pairs():
        print(f"  H^{k} = {dim}")
        report.add(f"betti.{k}", dim)
    report.add("status", True)
    return 0


def cmd_twisted(args, report):
    mf = _load(args)
    model = mf.model
    if args.form:
        if args.form not in mf.elements:
            raise ModelFileError("shape", 0, 1, f"no let-bound element named {args.form!r}")
        twist = mf.elements[args.form]
    elif isinstance(mf.bundle, DgBundle) and "H" in mf.bundle.structural:
        twist = mf.bundle.structural["H"]
    elif isinstance(mf.bundle, DgBundle) and "Theta" in mf.bundle.structural:
        twist = mf.bundle.structural["Theta"]
    else:
        twist = model.zero()
    ev, od = twisted_betti(model, twist, cap=args.cap)
    report.add("command", "twisted")
    report.add("model", mf.name or "?")
    report.add("twisted.ev", ev)
    report.add("twisted.od", od)
    print(f"twisted cohomology of {mf.name or '?'} by {format_element(twist)}")
    print(f"  even: {ev}")
    print(f"  odd:  {od}")
    report.add("status", True)
    return 0


def cmd_mc_check(args, report):
    mf = _load(args, validate=False)
    report.add("command", "mc-check")
    report.add("model", mf.name or "?")
    if mf.bundle is None:
        print("no bundle declared; base differential already validated")
        report.add("status", True)
        return 0
    if isinstance(mf.bundle, DgBundle):
        result = maurer_cartan_check(mf.bundle.q)
    else:
        result = maurer_cartan_check(mf.bundle.field)
    if result:
        print("maurer-cartan: pass")
        report.add("status", True)
        return 0
    print(f"maurer-cartan: fail on generator {result.witness}")
    print(f"  residue = {format_element(result.residue)}")
    report.add("witness", result.witness)
    report.add("residue", format_element(result.residue))
    report.add("status", False)
    return 1


def cmd_tdualize(args, report):
    mf = _load(args)
    bundle = _need_two_step(mf)
    pair = dualize(bundle)
    report.add("command", "tdualize")
    report.add("model", mf.name or "?")
    print(f"dual of {mf.name or '?'}:")
    for key in ("F", "Fbar", "H"):
        text = format_element(pair.pbar.structural[key])
        print(f"  {key} = {text}")
        report.add(f"dual.{key}", text)
    print("correspondence gauge equivalence: pass")
    report.add("status", True)
    return 0


def cmd_tmap_verify(args, report):
    mf = _load(args)
    bundle = _need_two_step(mf)
    pair = dualize(bundle)
    cap = args.cap if args.cap is not None else degree_cap(bundle)
    sign = tduality_chain_map(pair).verify(cap)
    ok = sign == FROZEN_CHAIN_SIGN
    report.add("command", "tmap-verify")
    report.add("model", mf.name or "?")
    report.add("cap", cap)
    report.add("sign", sign)
    print(f"comparison map intertwines through degree {cap}: sign {sign:+d}")
    report.add("status", ok)
    return 0 if ok else 1


def cmd_ses_verify(args, report):
    mf = _load(args)
    bundle = _need_two_step(mf)
    pair = dualize(bundle)
    cap = args.cap if args.cap is not None else degree_cap(bundle)
    ok, rows = ses_verify(pair, cap)
    source_betti = betti(pair.p, 0, cap)
    target_betti = betti(pair.pbar, 0, cap)
    report.add("command", "ses-verify")
    report.add("model", mf.name or "?")
    print(f"short exact sequence check through degree {cap}")
    print("  k   dim C^k(P)  ker T  base  im T  dim C^(k-1)(dual)  H^k(P)  H^(k-1)(dual)  ok")
    for row in rows:
        k = row.degree
        h_target = target_betti[k - 1] if k >= 1 else 0
        print(
            f"  {k:<3} {row.dim_p:<11} {row.dim_kernel:<6} {row.dim_base:<5} "
            f"{row.rank_t:<5} {row.dim_target:<18} {source_betti[k]:<7} {h_target:<14} "
            f"{'pass' if row.ok else 'fail'}"
        )
        report.add(f"ses.{k}", row.ok)
        report.add(f"betti.source.{k}", source_betti[k])
        report.add(f"betti.target.{k}", h_target)
    les_ok, _ = les_check(pair, 0, max(2, bundle.formal_dimension))
    print(f"long exact sequence ranks: {'pass' if les_ok else 'fail'}")
    report.add("les", les_ok)
    report.add("status", ok and les_ok)
    return 0 if ok and les_ok else 1


def cmd_iso_check(args, report):
    mf = _load(args)
    bundle = _need_two_step(mf)
    pair = dualize(bundle)
    k = args.k if args.k is not None else bundle.formal_dimension
    ok, info = tduality_iso_check(pair, k)
    report.add("command", "iso-check")
    report.add("model", mf.name or "?")
    report.add("k", k)
    for key, value in sorted(info.items()):
        report.add(key, value)
    print(
        f"H^{k + 1}(P) vs H^{k}(dual): dims {info['dim_source']}/{info['dim_target']}, "
        f"induced rank {info['induced_rank']}: {'pass' if ok else 'fail'}"
    )
    periodic = periodicity_check(bundle, k + 1, 1) if k + 1 > bundle.formal_dimension else True
    report.add("periodicity", periodic)
    report.add("status", ok)
    return 0 if ok else 1


def cmd_sym(args, report):
    mf = _load(args)
    if not isinstance(mf.bundle, DgBundle):
        raise ModelFileError("shape", 0, 1, "sym needs a bundle")
    structured, kernel = sym0_dimensions(mf.bundle)
    report.add("command", "sym")
    report.add("model", mf.name or "?")
    report.add("sym0.structured", structured)
    report.add("sym0.kernel", kernel)
    print(f"degree-0 symmetries of {mf.name or '?'}:")
    print(f"  structured family solutions: {structured}")
    print(f"  full kernel of [Q, .]:       {kernel}")
    if structured != kernel:
        print("  note: extra degree-0 fields outside the structured family")
    for name, el in sorted(mf.symmetries.items()):
        if el.degree == 0:
            member = is_symmetry(el)
            print(f"  sym {name}: degree 0 membership {'pass' if member else 'fail'}")
            report.add(f"member.{name}", member)
    report.add("status", True)
    return 0


def cmd_derived_bracket(args, report):
    mf = _load(args)
    for name in (args.a, args.b):
        if name not in mf.symmetries:
            raise ModelFileError("shape", 0, 1, f"no sym element named {name!r}")
    a, b = mf.symmetries[args.a], mf.symmetries[args.b]
    out = derived_bracket(a, b)
    report.add("command", "derived-bracket")
    report.add("model", mf.name or "?")
    report.add("a", args.a)
    report.add("b", args.b)
    report.add("degree", out.degree)
    print(f"derived bracket |{args.a}, {args.b}| (degree {out.degree}):")
    for key in sorted(out.parts):
        value = out.parts[key]
        if isinstance(value, Derivation):
            body = ", ".join(
                f"{g} -> {format_element(v)}" for g, v in sorted(value.values.items())
            )
            text = body or "0"
        else:
            text = format_element(value)
        print(f"  {key} = {text}")
        report.add(f"part.{key}", text)
    report.add("status", True)
    return 0


def _closed_basis_forms(model, degree, limit=4):
    out = []
    for mono in model.basis(degree):
        el = model.monomial_element(mono)
        if model.d(el).is_zero():
            out.append(el)
        if len(out) == limit:
            break
    return out


def cmd_bn_check(args, report):
    mf = _load(args)
    bundle = _need_two_step(mf)
    if bundle.structural["F"] != bundle.structural["Fbar"]:
        raise ModelFileError("shape", 0, 1, "bn-check needs a self-dual bundle (F = Fbar)")
    rng = random.Random(args.seed)
    base = bundle.base
    laws = {}

    def triple():
        return bn_element(
            bundle,
            iota=random_contraction(base, rng),
            f=rng.randint(-2, 2),
            c=random_element(base, 1, rng),
        )

    ok = True
    try:
        for _ in range(args.trials):
            a, b = triple(), triple()
            out = bn_bracket(a, b)
            if not is_selfdual_fixed(out):
                raise SymmetryError("bracket left the fixed family")
            bn_pairing(a, b)
        laws["bracket-display"] = True
        laws["pairing-display"] = True
    except SymmetryError:
        laws["bracket-display"] = False
        ok = False
    try:
        for _ in range(args.trials):
            x = symmetry(
                bundle,
                -1,
                iota=random_contraction(base, rng),
                f=rng.randint(-2, 2),
                c=random_element(base, 1, rng),
                fbar=rng.randint(-2, 2),
            )
            if selfdual_phi(selfdual_phi(x)) != x:
                raise SymmetryError("automorphism is not an involution")
            if not is_selfdual_fixed(selfdual_fixed_part(x)):
                raise SymmetryError("projection failed")
        laws["involution"] = True
    except SymmetryError:
        laws["involution"] = False
        ok = False
    try:
        ones = _closed_basis_forms(base, 1)
        twos = _closed_basis_forms(base, 2)
        for _ in range(max(1, args.trials // 4)):
            t = triple()
            for one in ones:
                bn_one_form_action(bundle, one, t)
            for two in twos:
                bn_two_form_action(bundle, two, t)
        laws["action-displays"] = True
    except SymmetryError:
        laws["action-displays"] = False
        ok = False
    report.add("command", "bn-check")
    report.add("model", mf.name or "?")
    report.add("seed", args.seed)
    print(f"B-structure checks on {mf.name or '?'} ({args.trials} trials, seed {args.seed})")
    for law, passed in laws.items():
        print(f"  {law}: {'pass' if passed else 'fail'}")
        report.add(f"law.{law}", passed)
    report.add("status", ok)
    return 0 if ok else 1


def cmd_e6_check(args, report):
    mf = _load(args)
    bundle = _need_flux(mf)
    rng = random.Random(args.seed)
    base = bundle.base
    laws = {}

    def triple():
        return e6_element(
            bundle,
            iota=random_contraction(base, rng),
            s2=random_element(base, 2, rng),
            s5=random_element(base, 5, rng),
        )

    ok = True
    try:
        for _ in range(args.trials):
            a, b = triple(), triple()
            derived_bracket(a, b)
            e6_pairing(a, b)
        laws["bracket-display"] = True
        laws["pairing-display"] = True
    except SymmetryError:
        laws["bracket-display"] = False
        ok = False
    try:
        threes = _closed_basis_forms(base, 3)
        sixes = _closed_basis_forms(base, 6)
        for _ in range(max(1, args.trials // 4)):
            t = triple()
            for el in threes:
                e6_three_form_action(bundle, el, t)
            for el in sixes:
                e6_six_form_action(bundle, el, t)
        laws["action-displays"] = True
    except SymmetryError:
        laws["action-displays"] = False
        ok = False
    report.add("command", "e6-check")
    report.add("model", mf.name or "?")
    report.add("seed", args.seed)
    print(f"flux-structure checks on {mf.name or '?'} ({args.trials} trials, seed {args.seed})")
    for law, passed in laws.items():
        print(f"  {law}: {'pass' if passed else 'fail'}")
        report.add(f"law.{law}", passed)
    report.add("status", ok)
    return 0 if ok else 1


def _structured_samples(bundle, rng):
    base = bundle.base
    if bundle.shape == "two_step":
        return [
            symmetry(
                bundle,
                -1,
                iota=random_contraction(base, rng),
                f=rng.randint(-2, 2),
                c=random_element(base, 1, rng),
                fbar=rng.randint(-2, 2),
            ),
            symmetry(bundle, -2, h=rng.randint(-2, 2)),
        ]
    if bundle.shape == "flux":
        return [
            e6_element(
                bundle,
                iota=random_contraction(base, rng),
                s2=random_element(base, 2, rng),
                s5=random_element(base, 5, rng),
            ),
            symmetry(
                bundle,
                -2,
                eta1=random_element(base, 1, rng),
                c4=random_element(base, 4, rng),
            ),
        ]
    n = bundle.total.generator_named(bundle.fiber_names[0]).degree
    out = [
        symmetry(
            bundle, -1, iota=random_contraction(base, rng), a=random_element(base, n - 1, rng)
        )
    ]
    for k in range(2, n + 1):
        out.append(symmetry(bundle, -k, eta=random_element(base, n - k, rng)))
    return out


def _symmetry_actors(bundle, limit=3):
    """Degree-0 structured members found among closed basis forms."""
    base = bundle.base
    actors = []
    keys = {
        "two_step": (("a", 1), ("b", 2), ("abar", 1)),
        "line": (("b", bundle.total.generator_named(bundle.fiber_names[0]).degree),),
        "flux": (("a3", 3), ("b6", 6)),
    }[bundle.shape]
    for key, degree in keys:
        for el in _closed_basis_forms(base, degree, limit=6):
            candidate = symmetry(bundle, 0, **{key: el})
            if is_symmetry(candidate):
                actors.append(candidate)
            if len(actors) >= limit:
                return actors
    return actors


def cmd_identities(args, report):
    mf = _load(args)
    if not isinstance(mf.bundle, DgBundle):
        raise ModelFileError("shape", 0, 1, "identities needs a bundle")
    bundle = mf.bundle
    rng = random.Random(args.seed)
    total = bundle.total
    laws = {}

    jac_ok = True
    for _ in range(args.trials):
        degs = [rng.choice([-2, -1, 0, 1]) for _ in range(3)]
        a, b, c = (random_derivation(total, dg, rng) for dg in degs)
        sign = -1 if (degs[0] % 2 and degs[1] % 2) else 1
        lhs = commutator(a, commutator(b, c))
        rhs = commutator(commutator(a, b), c) + sign * commutator(b, commutator(a, c))
        jac_ok = jac_ok and lhs == rhs
    laws["jacobi"] = jac_ok

    leib_ok = True
    for _ in range(args.trials):
        deg = rng.choice([-1, 0, 1])
        d = random_derivation(total, deg, rng)
        da, db = rng.randint(1, 3), rng.randint(1, 3)
        x = random_element(total, da, rng)
        y = random_element(total, db, rng)
        sign = -1 if (deg % 2 and da % 2) else 1
        leib_ok = leib_ok and d(x * y) == d(x) * y + sign * (x * d(y))
    laws["leibniz"] = leib_ok

    dl_ok = True
    dj_ok = True
    for _ in range(args.trials):
        picks = _structured_samples(bundle, rng)
        a, b, c = (rng.choice(picks) for _ in range(3))
        dl_ok = dl_ok and derived_leibniz_residue(bundle, a.realized, b.realized).is_zero()
        dj_ok = dj_ok and derived_jacobi_residue(
            bundle, a.realized, b.realized, c.realized
        ).is_zero()
    laws["derived-leibniz"] = dl_ok
    laws["derived-jacobi"] = dj_ok

    actors = _symmetry_actors(bundle)
    act_ok = True
    for actor in actors:
        for _ in range(max(1, args.trials // 4)):
            picks = _structured_samples(bundle, rng)
            b, c = (rng.choice(picks) for _ in range(2))
            act_ok = act_ok and sym0_action_residue(
                bundle, actor.realized, b.realized, c.realized
            ).is_zero()
    laws["sym0-action"] = act_ok
    report.add("command", "identities")
    report.add("model", mf.name or "?")
    report.add("seed", args.seed)
    report.add("trials", args.trials)
    print(f"identity suite on {mf.name or '?'} ({args.trials} trials, seed {args.seed})")
    ok = True
    for law, passed in laws.items():
        print(f"  {law}: {'pass' if passed else 'fail'}")
        report.add(f"law.{law}", passed)
        ok = ok and passed
    report.add("status", ok)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dgcalc",
        description="exact calculus on shifted-line bundles over CDGA models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **extra):
        p = sub.add_parser(name)
        p.add_argument("file", help="path to a .dgm model file")
        p.add_argument("--report", help="write key=value records to this path")
        for flag, kwargs in extra.items():
            p.add_argument(flag, **kwargs)
        p.set_defaults(fn=fn)
        return p

    add("validate", cmd_validate)
    add(
        "betti",
        cmd_betti,
        **{"--lo": dict(type=int, default=0), "--hi": dict(type=int, default=None)},
    )
    add(
        "twisted",
        cmd_twisted,
        **{"--form": dict(default=None), "--cap": dict(type=int, default=None)},
    )
    add("mc-check", cmd_mc_check)
    add("tdualize", cmd_tdualize)
    add("tmap-verify", cmd_tmap_verify, **{"--cap": dict(type=int, default=None)})
    add("ses-verify", cmd_ses_verify, **{"--cap": dict(type=int, default=None)})
    add("iso-check", cmd_iso_check, **{"--k": dict(type=int, default=None)})
    add("sym", cmd_sym)
    add(
        "derived-bracket",
        cmd_derived_bracket,
        **{"--a": dict(required=True), "--b": dict(required=True)},
    )
    add(
        "bn-check",
        cmd_bn_check,
        **{"--seed": dict(type=int, default=0), "--trials": dict(type=int, default=25)},
    )
    add(
        "e6-check",
        cmd_e6_check,
        **{"--seed": dict(type=int, default=0), "--trials": dict(type=int, default=10)},
    )
    add(
        "identities",
        cmd_identities,
        **{"--seed": dict(type=int, default=0), "--trials": dict(type=int, default=25)},
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    from .cohomology import CohomologyError
    from .derivations import BundleError, DerivationError
    from .graded import GradedError

    parser = build_parser()
    args = parser.parse_args(argv)
    report = Report()
    try:
        code = args.fn(args, report)
    except (
        ModelFileError,
        TDualityError,
        SymmetryError,
        CohomologyError,
        BundleError,
        DerivationError,
        GradedError,
        OSError,
    ) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    report.write(args.report)
    return code


if __name__ == "__main__":
    sys.exit(main())
