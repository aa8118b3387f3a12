"""Command-line front end.

Exit codes: 0 pass, 1 property violated, 2 indeterminate, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from . import linalg as la
from .errors import (AlgebraMismatch, CPCheckFailed, FDQuantError, NotHermitian, NotPositiveFunctional,
                     RuleSignatureMismatch, SignatureMismatch, UnsupportedFunctionalShape)
from .modrep import cp_check, gns, metric_verdict, verify_representation
from .morita import SMESampleSpec, dual_bases, roundtrip_equivalence_test, verify_sme_axioms
from .positivity import (formal_psd_check, functional_gram, is_positive_functional,
                         trace_functional, witness_element)
from .report import FAIL, INDETERMINATE, PASS, Report
from .rieffel import gns_via_induction, rieffel_induce, verify_unitary_intertwiner
from .scalars import DEFAULT_ORDER
from .serialize import (InputError, algebra_in, bimodule_in, custom_rule_in, dump, element_in,
                        element_out, equivalence_in, functional_in, load_json, matrix_in, module_in,
                        representation_in, representation_out, rule_in, signature_in)
from .staralg import (FiniteStarAlgebra, FunctionAlgebra, Kind, PhaseSpaceSignature, SampleSpec,
                      verify_algebra, verify_star_axioms)

EXIT = {PASS: 0, FAIL: 1, INDETERMINATE: 2}
INPUT_ERROR = 3
INPUT_ERRORS = (InputError, AlgebraMismatch, RuleSignatureMismatch, SignatureMismatch,
                UnsupportedFunctionalShape, NotHermitian, ValueError, TypeError, KeyError, IndexError)


@dataclass(frozen=True)
class RunConfig:
    order: int = DEFAULT_ORDER
    degree_cap: int = 4
    seed: int = 0
    samples: int = 25
    fmt: str = "text"
    out: str | None = None
    timing: bool = False

    def __post_init__(self):
        if self.order < 0 or self.degree_cap < 0 or self.samples < 1:
            raise InputError("need --order >= 0, --degree-cap >= 0 and --samples >= 1")


def _load_algebra(path, cfg):
    A = algebra_in(load_json(path), cfg.order)
    if isinstance(A, FiniteStarAlgebra) and A.name not in ("C",) and A.base is None:
        # user-supplied structure constants: refuse anything that is not a unital *-algebra
        check = verify_algebra(A, max_triples=200, seed=cfg.seed)
        if not check.ok:
            bad = ", ".join(e.name for e in check.failures())
            raise InputError(f"algebra data violates the *-algebra axioms ({bad})")
    return A


# -- commands ----------------------------------------------------------------------------

def cmd_star_verify(args, cfg: RunConfig) -> tuple[Report, object]:
    if args.table:
        rule = custom_rule_in(load_json(args.table))
    else:
        rule = rule_in(args.rule)
    kind = args.signature or ("conjugate" if args.rule == "wick" else "canonical")
    sig = PhaseSpaceSignature(Kind(kind), args.dof)
    spec = SampleSpec(degree=cfg.degree_cap, count=cfg.samples, seed=cfg.seed)
    report = verify_star_axioms(rule, sig, cfg.order, spec)
    report.data.update({"rule": rule.variant.value, "signature": kind, "dof": args.dof})
    return report, None


def cmd_gns(args, cfg: RunConfig):
    A = _load_algebra(args.algebra, cfg)
    omega = functional_in(load_json(args.functional), A, cfg.order)
    report = Report("gns")
    cap = cfg.degree_cap if isinstance(A, FunctionAlgebra) else None
    verdict = is_positive_functional(omega, A, cap)
    entry = report.add("functional_positive", verdict.report_verdict, detail=verdict.reason)
    if verdict.is_not_positive:
        basis = _gram_basis(A, cap)
        a = witness_element(A, basis, verdict.witness)
        entry.witness = {"element": _element_text(a, A), "value": str(verdict.value)}
        return report, {"witness_element": element_out(a, A), "value": str(verdict.value)}
    if not verdict.is_positive:
        return report, None
    pi = gns(A, omega, cap=cap)
    report.extend(verify_representation(pi, seed=cfg.seed), prefix="rep_")
    report.data["rank"] = pi.rank
    if isinstance(A, FunctionAlgebra):
        report.data["fock_norms"] = _fock_table(A, omega, cap)
    return report, representation_out(pi)


def _element_text(a, A) -> str:
    if isinstance(A, FunctionAlgebra):
        return str(a)
    terms = [f"({c})*{label}" for c, label in zip(a, A.labels) if not c.is_zero()]
    return " + ".join(terms) or "0"


def _gram_basis(A, cap):
    if isinstance(A, FunctionAlgebra):
        return [A.monomial(e) for e in A.monomial_basis(cap)]
    return A.basis()


def _fock_table(A, omega, cap):
    exps = A.monomial_basis(cap)
    G = functional_gram(omega, [A.monomial(e) for e in exps])
    names = A.signature.names
    rows = []
    for k, e in enumerate(exps):
        label = "*".join(f"{n}^{m}" if m > 1 else n for n, m in zip(names, e) if m) or "1"
        rows.append({"monomial": label, "norm": str(G[k][k])})
    return rows


CHECK_NAMES = ("cp", "rep", "induced_positive")
CHECK_ALIASES = {"theorem34": "induced_positive"}


def cmd_induce(args, cfg: RunConfig):
    report = Report("induce")
    if args.gns:
        A = _load_algebra(args.gns[0], cfg)
        omega = functional_in(load_json(args.gns[1]), A, cfg.order)
        cap = cfg.degree_cap if isinstance(A, FunctionAlgebra) else None
        try:
            induced, direct, U = gns_via_induction(A, omega, cap)
        except NotPositiveFunctional as exc:
            report.add("functional_positive", FAIL, detail=str(exc))
            return report, None
        report.extend(induced.report)
        report.extend(verify_unitary_intertwiner(U, induced, direct), prefix="gns_unitary_")
        report.data.update({"rank_induced": induced.rank, "rank_gns": direct.rank})
        return report, representation_out(induced.representation)

    data = load_json(args.bimodule)
    checks = None
    if args.representation is None:
        # a single induction request file
        bim_data = data.get("bimodule") if isinstance(data, dict) else None
        rep_data = data.get("representation") if isinstance(data, dict) else None
        if bim_data is None or rep_data is None:
            raise InputError("an induction request needs 'bimodule' and 'representation'")
        checks = data.get("checks")
    else:
        bim_data, rep_data = data, load_json(args.representation)
    E = bimodule_in(bim_data, cfg.order)
    H = representation_in(rep_data, cfg.order)
    if H.algebra != E.algebra:
        raise AlgebraMismatch("the representation is not of the module's coefficient algebra")
    checks = {CHECK_ALIASES.get(c, c) for c in (checks or CHECK_NAMES)}
    unknown = checks - set(CHECK_NAMES)
    if unknown:
        raise InputError(f"unknown induction checks {sorted(unknown)}")
    try:
        ind = rieffel_induce(E, H, check_cp="cp" in checks, verify=bool(checks & {"rep", "induced_positive"}))
    except CPCheckFailed as exc:
        v = exc.verdict
        report.add("cp", FAIL, witness=[str(x) for x in v.witness] if v and v.witness else None,
                   detail=str(exc))
        return report, None
    for e in ind.report.entries:
        keep = (e.name.startswith("rep_") and "rep" in checks) or \
               (e.name == "induced_gram_positive" and "induced_positive" in checks) or \
               (e.name.endswith("_cp") and "cp" in checks)
        if keep:
            report.entries.append(e)
    report.data["rank"] = ind.rank
    if _is_identity_bimodule(E):
        U = ind.quotient.lift if ind.rank else la.zeros(H.rank, 0, cfg.order)
        report.extend(verify_unitary_intertwiner(U, ind.representation, H), prefix="identity_")
    return report, representation_out(ind.representation)


def _is_identity_bimodule(E) -> bool:
    A, B = E.algebra, E.left_algebra
    if E.module.p != 1 or not isinstance(A, FiniteStarAlgebra) or A != B:
        return False
    one = A.one()
    if not (A.equal(E.module.P[0][0], one) and A.equal(E.module.Q[0][0], one)):
        return False
    return all(A.equal(E.act(b, [one])[0], b) for b in A.basis())


def cmd_psd(args, cfg: RunConfig):
    data = load_json(args.matrix)
    H = matrix_in(data["matrix"] if isinstance(data, dict) else data, cfg.order)
    v = formal_psd_check(H)
    report = Report("psd")
    entry = report.add("psd", v.report_verdict, detail=v.reason)
    if v.is_positive:
        entry.certificate = v.certificate.to_json()
        entry.detail = f"{len(v.certificate)} weighted squares, re-expanded exactly"
    elif v.is_not_positive:
        entry.witness = {"vector": [str(x) for x in v.witness], "value": str(v.value)}
    return report, v.to_json()


def cmd_cp(args, cfg: RunConfig):
    data = load_json(args.module)
    E = module_in(data, cfg.order)
    report = Report("cp")
    problems = E.structure_problems()
    report.add("module_structure", not problems, detail="; ".join(problems))
    if "elements" in data:
        xs = [[element_in(c, E.algebra, cfg.order) for c in x] for x in data["elements"]]
        for x in xs:
            E.check_element(x)
    else:
        xs = E.generators()
    mv = metric_verdict(E)
    report.add("metric_positive", mv.report_verdict, detail=mv.reason)
    v = cp_check(E, xs)
    entry = report.add("cp", v.report_verdict, detail=v.info.get("via", "") if v.is_positive else v.reason)
    if v.is_not_positive:
        entry.witness = {"vector": [str(x) for x in v.witness], "value": str(v.value)}
    report.data["elements"] = len(xs)
    return report, v.to_json()


def cmd_morita(args, cfg: RunConfig):
    data = load_json(args.spec)
    spec = equivalence_in(data, cfg.order)
    report = Report("morita")
    report.extend(verify_sme_axioms(spec, SMESampleSpec(count=cfg.samples, seed=cfg.seed)))
    try:
        db = dual_bases(spec)
    except FDQuantError as exc:
        report.add("dual_bases", FAIL, detail=str(exc))
        return report, None
    report.extend(db.verify(spec, spec.spanning_set()), prefix="dual_bases_")
    A = spec.A
    states = [functional_in(s, A, cfg.order) for s in data.get("states", [])] or [trace_functional(A)]
    reps = [gns(A, w) for w in states]
    reps += [representation_in(r, cfg.order) for r in data.get("representations", [])]
    for k, H in enumerate(reps):
        rt = roundtrip_equivalence_test(spec, H)
        report.extend(rt, prefix=f"roundtrip{k}_")
    report.data.update({"A_dim": A.dim, "B_dim": spec.B.dim, "frame_size": len(db.x),
                        "roundtrips": len(reps)})
    return report, None


COMMANDS = {"star-verify": cmd_star_verify, "gns": cmd_gns, "induce": cmd_induce,
            "psd": cmd_psd, "cp": cmd_cp, "morita": cmd_morita}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, default=DEFAULT_ORDER, help="truncation order N")
    common.add_argument("--degree-cap", type=int, default=4, help="degree cap D for function algebras")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=25, help="random sample count")
    common.add_argument("--format", choices=["json", "text"], default="text")
    common.add_argument("--out", help="write the constructed artifact (JSON) to this file")
    common.add_argument("--timing", action="store_true", help="include per-check timings in JSON")

    parser = argparse.ArgumentParser(prog="fdquant", description="Exact checks for formal deformation quantization")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("star-verify", parents=[common], help="check the star-product axioms")
    p.add_argument("--rule", choices=["moyal", "wick", "pointwise"], default="moyal")
    p.add_argument("--table", help="JSON file with a custom bidifferential table")
    p.add_argument("--signature", choices=["canonical", "conjugate"])
    p.add_argument("--dof", type=int, default=1)

    p = sub.add_parser("gns", parents=[common], help="GNS representation of a positive functional")
    p.add_argument("algebra")
    p.add_argument("functional")

    p = sub.add_parser("induce", parents=[common], help="Rieffel induction")
    p.add_argument("bimodule", nargs="?", help="bimodule file or induction request file")
    p.add_argument("representation", nargs="?")
    p.add_argument("--gns", nargs=2, metavar=("ALGEBRA", "FUNCTIONAL"),
                   help="cross-check GNS against induction from the scalars")

    p = sub.add_parser("psd", parents=[common], help="positivity of a Hermitian matrix")
    p.add_argument("matrix")

    p = sub.add_parser("cp", parents=[common], help="complete positivity of a module inner product")
    p.add_argument("module")

    p = sub.add_parser("morita", parents=[common], help="strong Morita equivalence checks")
    p.add_argument("spec")
    return parser


def _render(report: Report, cfg: RunConfig) -> str:
    if cfg.fmt == "json":
        out = report.to_json(include_timing=cfg.timing)
        out["seed"] = cfg.seed
        out["order"] = cfg.order
        return json.dumps(out, indent=2, sort_keys=True, default=str)
    lines = [report.to_text(), f"seed: {cfg.seed}", f"order: {cfg.order}"]
    for key in sorted(k for k in report.data if k not in ("seed", "order")):
        value = report.data[key]
        if isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{key}:")
            lines.extend("  " + "  ".join(f"{k}={v}" for k, v in row.items()) for row in value)
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else 0
    try:
        cfg = RunConfig(args.order, args.degree_cap, args.seed, args.samples, args.format,
                        args.out, args.timing)
        if args.command == "induce" and not args.gns and not args.bimodule:
            raise InputError("induce needs a bimodule file, a request file or --gns")
        report, artifact = COMMANDS[args.command](args, cfg)
    except INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except FDQuantError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INPUT_ERROR
    print(_render(report, cfg))
    if cfg.out:
        dump(artifact if artifact is not None else report.to_json(include_timing=cfg.timing), cfg.out)
    return EXIT[report.status]


if __name__ == "__main__":
    sys.exit(main())
