"""Command line front end: ``uone <command> ...``.

Exit codes: 0 ok, 1 usage, 2 parse error, 3 formula outside the fragment, 4 bad budget
settings, 5 certificate or reconstruction failure, 10 a model was found, 20 no model
within the budgets.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .admissibility import TupleFormatError, parse_tuple
from .axioms import generate_pseudo_ordering_axioms
from .formula import FragmentProfile, ParseError, check_fragment, parse_formula, render_formula
from .normal_form import NormalFormError, to_normal_form
from .reconstruction import (
    ReconstructionError,
    IntervalModelDescription,
    format_address,
    parse_address,
    random_address,
    reconstruct_finite,
    universals_hold,
    witness_holds,
)
from .reductions import DominoFormatError, DominoSystem, render_reduction
from .solver import (
    BudgetError,
    CertificateFormatError,
    FragmentViolation,
    brute_force_ordered_sat,
    default_budgets,
    read_certificate,
    solve_ordered_sat,
    verify_certificate,
)
from .structures import StructureError, write_structure

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_FRAGMENT, EXIT_BUDGET, EXIT_INVALID = 0, 1, 2, 3, 4, 5
EXIT_SAT, EXIT_NO_MODEL = 10, 20
CLASSES = {"o": "O", "wo": "WO", "ofin": "Ofin"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _class(text: str) -> str:
    try:
        return CLASSES[text.lower()]
    except KeyError:
        raise argparse.ArgumentTypeError(f"class must be one of O, WO, Ofin, not {text!r}") from None


def _read_formula(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_formula(text)


def _budgets(args):
    b = default_budgets(args.profile)
    changes = {}
    if getattr(args, "max_domain", None) is not None:
        key = "max_oracle_domain" if args.command == "oracle" else "max_ax_model_domain"
        changes[key] = args.max_domain
    for name in ("max_gamma_index", "max_court_size", "wall_clock"):
        value = getattr(args, name, None)
        if value is not None:
            changes[name] = value
    return replace(b, **changes) if changes else b


def _emit(args, text: str, doc: dict) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True) if args.json else text)


# -- commands -----------------------------------------------------------------


def cmd_check(args) -> int:
    f = _read_formula(args.formula)
    report = check_fragment(f, FragmentProfile.from_name(args.profile_fragment))
    doc = {
        "schema": "uone-check/1",
        "accepted": report.accepted,
        "violations": [{"location": v.location, "kind": v.kind, "message": v.message} for v in report.violations],
    }
    lines = ["accepted" if report.accepted else "rejected"]
    lines += [f"{v.kind} at {v.location}: {v.message}" for v in report.violations]
    _emit(args, "\n".join(lines), doc)
    return EXIT_OK if report.accepted else EXIT_FRAGMENT


def cmd_normalize(args) -> int:
    f = _read_formula(args.formula)
    profile = FragmentProfile.from_name(args.profile_fragment)
    report = check_fragment(f, profile)
    if not report.accepted:
        raise FragmentViolation(report)
    nf = to_normal_form(f, profile)
    doc = {
        "schema": "uone-normal-form/1",
        "formula": nf.render(),
        "width": nf.width,
        "existentials": nf.m_exists,
        "universals": nf.m_forall,
        "vocabulary": nf.vocab.render(),
    }
    _emit(args, nf.render(), doc)
    return EXIT_OK


def _verdict_exit(verdict) -> int:
    if verdict.sat:
        return EXIT_SAT
    return EXIT_INVALID if verdict.status == "error" else EXIT_NO_MODEL


def cmd_solve(args) -> int:
    f = _read_formula(args.formula)
    verdict = solve_ordered_sat(
        f,
        args.klass,
        _budgets(args),
        fast_path=not args.no_fast_path,
        strategy=args.strategy,
        complete=args.complete,
        monotone_delta=not args.no_monotone_delta,
    )
    if verdict.certificate is not None and args.out:
        verdict.certificate.write(args.out)
    doc = verdict.as_dict()
    if args.out and verdict.certificate is not None:
        doc["certificate_dir"] = str(args.out)
    _emit(args, verdict.render(), doc)
    return _verdict_exit(verdict)


def cmd_oracle(args) -> int:
    f = _read_formula(args.formula)
    verdict = brute_force_ordered_sat(f, args.klass, _budgets(args))
    text = verdict.render()
    doc = verdict.as_dict()
    if verdict.sat:
        text += "\n" + write_structure(verdict.certificate.structure).rstrip("\n")
        doc["structure"] = write_structure(verdict.certificate.structure)
        if args.out:
            verdict.certificate.write(args.out)
    _emit(args, text, doc)
    return _verdict_exit(verdict)


def cmd_verify(args) -> int:
    cert = read_certificate(args.certificate)
    report = verify_certificate(cert)
    doc = {"schema": "uone-verify/1", **asdict(report)}
    _emit(args, report.render(), doc)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_reconstruct(args) -> int:
    cert = read_certificate(args.certificate)
    if cert.gamma is None:
        raise ReconstructionError("the certificate already is an ordered model; nothing to rebuild")
    report = verify_certificate(cert)
    if not report.ok:
        raise ReconstructionError("certificate does not verify: " + "; ".join(report.problems))
    nf = to_normal_form(parse_formula(cert.formula))
    K = args.klass or cert.K
    if K == "Ofin" and not args.sample and not args.random:
        A, _ = reconstruct_finite(cert.structure, cert.gamma, nf)
        text = write_structure(A)
        if args.output:
            Path(args.output).write_text(text)
        doc = {"schema": "uone-reconstruct/1", "class": K, "domain": A.size, "structure": text}
        _emit(args, text.rstrip("\n"), doc)
        return EXIT_OK
    desc = IntervalModelDescription(cert.structure, cert.gamma, nf, K)
    layout = desc.render()
    if args.output:
        Path(args.output).write_text(layout)
    doc = {"schema": "uone-reconstruct/1", "class": K, "layout": layout}
    lines = [layout.rstrip("\n")]
    if args.sample:
        addrs = [parse_address(a) for a in args.sample]
        S = desc.sample(addrs)
        doc["sample"] = write_structure(S)
        lines.append("sample: " + " ".join(map(format_address, addrs)))
        lines.append(write_structure(S).rstrip("\n"))
    if args.random:
        rng = random.Random(args.seed)
        bad_u = bad_w = 0
        for _ in range(args.random):
            addrs = sorted({random_address(desc, rng) for _ in range(rng.randint(1, nf.width))})
            bad_u += not universals_hold(desc, addrs)
            a = random_address(desc, rng)
            bad_w += sum(not witness_holds(desc, a, i) for i in range(nf.m_exists))
        doc["random"] = {"samples": args.random, "seed": args.seed, "universal_failures": bad_u, "witness_failures": bad_w}
        lines.append(f"random samples: {args.random} (seed {args.seed}); universal failures {bad_u}; witness failures {bad_w}")
        if bad_u or bad_w:
            _emit(args, "\n".join(lines), doc)
            return EXIT_INVALID
    _emit(args, "\n".join(lines), doc)
    return EXIT_OK


def cmd_reduce_tiling(args) -> int:
    text = sys.stdin.read() if args.system == "-" else Path(args.system).read_text()
    D = DominoSystem.parse(text)
    out = render_reduction(D)
    _emit(args, out.rstrip("\n"), {"schema": "uone-tiling/1", "formula": out.rstrip("\n")})
    return EXIT_OK


def cmd_axioms(args) -> int:
    src = Path(args.gamma)
    if src.is_dir():
        cert = read_certificate(src)
        gamma, formula = cert.gamma, parse_formula(cert.formula)
        if gamma is None:
            raise CertificateFormatError("certificate carries no tuple")
    else:
        if not args.formula:
            raise UsageError("axioms needs --formula when given a tuple file")
        gamma, formula = parse_tuple(src.read_text()), _read_formula(args.formula)
    nf = to_normal_form(formula)
    errs = gamma.structural_errors(nf)
    if errs:
        raise TupleFormatError("; ".join(errs))
    ax = generate_pseudo_ordering_axioms(gamma, nf, axiom3=args.axiom3)
    _emit(args, ax.render().rstrip("\n"), {"schema": "uone-axioms/1", "axioms": ax.render(), "sentence": render_formula(ax.sentence.formula())})
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="uone", description="Satisfiability of uniform one-dimensional formulas over linear orders.")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, budgets=False):
        sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        if budgets:
            sp.add_argument("--profile", dest="profile", default=None, help="budget profile: quick, desk or sufficient")
            sp.add_argument("--max-domain", type=int)
            sp.add_argument("--max-gamma-index", type=int)
            sp.add_argument("--max-court-size", type=int)
            sp.add_argument("--wall-clock", type=float)
            sp.add_argument("--jobs", type=int, default=1, help="worker cap; the search runs in one worker")

    def fragment(sp):
        sp.add_argument("--profile", dest="profile_fragment", default="u1", help="u1, u1_no_eq, fu1 or u1_free")

    sp = sub.add_parser("check", help="report fragment membership")
    sp.add_argument("formula")
    fragment(sp)
    common(sp)
    sp.set_defaults(run=cmd_check)

    sp = sub.add_parser("normalize", help="print the normal form")
    sp.add_argument("formula")
    fragment(sp)
    common(sp)
    sp.set_defaults(run=cmd_normalize)

    sp = sub.add_parser("solve", help="run the decision pipeline")
    sp.add_argument("formula")
    sp.add_argument("--class", dest="klass", type=_class, required=True)
    sp.add_argument("--out", help="directory for the certificate")
    sp.add_argument("--complete", action="store_true")
    sp.add_argument("--no-fast-path", action="store_true")
    sp.add_argument("--no-monotone-delta", action="store_true")
    sp.add_argument("--strategy", choices=("joint", "enumerate"), default="joint")
    sp.add_argument("--seed", type=int, default=0, help="accepted for symmetry; the search is deterministic")
    common(sp, budgets=True)
    sp.set_defaults(run=cmd_solve)

    sp = sub.add_parser("oracle", help="brute-force search for a small ordered model")
    sp.add_argument("formula")
    sp.add_argument("--class", dest="klass", type=_class, required=True)
    sp.add_argument("--out")
    common(sp, budgets=True)
    sp.set_defaults(run=cmd_oracle)

    sp = sub.add_parser("verify", help="check a certificate directory")
    sp.add_argument("certificate")
    common(sp)
    sp.set_defaults(run=cmd_verify)

    sp = sub.add_parser("reconstruct", help="rebuild an ordered model from a certificate")
    sp.add_argument("certificate")
    sp.add_argument("--class", dest="klass", type=_class)
    sp.add_argument("--sample", nargs="+", metavar="I:R:B:P")
    sp.add_argument("--random", type=int, default=0, metavar="COUNT", help="random sample and witness checks")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output")
    common(sp)
    sp.set_defaults(run=cmd_reconstruct)

    sp = sub.add_parser("reduce-tiling", help="encode a domino system")
    sp.add_argument("system")
    common(sp)
    sp.set_defaults(run=cmd_reduce_tiling)

    sp = sub.add_parser("axioms", help="print the pseudo-ordering axioms of a tuple")
    sp.add_argument("gamma", help="tuple file or certificate directory")
    sp.add_argument("--formula")
    sp.add_argument("--axiom3", choices=("exact", "biconditional"), default="exact")
    common(sp)
    sp.set_defaults(run=cmd_axioms)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            raise BudgetError("--jobs must be at least 1")
        return args.run(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, NormalFormError, CertificateFormatError, TupleFormatError, DominoFormatError, StructureError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except FragmentViolation as e:
        print(f"fragment violation: {e}", file=sys.stderr)
        return EXIT_FRAGMENT
    except BudgetError as e:
        print(f"budget error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except ReconstructionError as e:
        print(f"reconstruction failed: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"cannot read input: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
