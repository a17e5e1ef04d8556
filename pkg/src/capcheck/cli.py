"""Command-line front end: check, infer, sub, adapt, normalize, erase, fuzz.

Every knob (fuel, seeds, generator limits) is a flag with a printed
default, so any run can be reproduced from its command line alone.

Exit codes: 0 success; 1 type or adaptation failure (including a refuted
subtype query and fuzz failures); 2 unparsable or ill-formed input;
3 fuel exhausted.
"""

import argparse
import json
import sys
from collections import Counter
from pathlib import Path

from .adapt_term import box_adapt, infer
from .adapt_type import box_adapt_t, infer_t
from .checker import typecheck
from .errors import (
    CheckError,
    FuelExhausted,
    IllFormedType,
    ParseError,
    UnboundVariable,
)
from .fsub import erase, erase_env, fsub_typecheck, show_fterm, show_ftype
from .harness import PROPERTIES, GenConfig, run_differential
from .normalize import normalize
from .subcapture import subcapture
from .subtyping import DEFAULT_FUEL, Fuel, subtype
from .syntax import (
    TermBind,
    alpha_eq,
    cv,
    parse_capture_set,
    parse_env,
    parse_term,
    parse_type,
    show,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_BAD_INPUT = 2
EXIT_FUEL = 3


def _exit_for(e: CheckError) -> int:
    if isinstance(e, FuelExhausted):
        return EXIT_FUEL
    if isinstance(e, (ParseError, IllFormedType, UnboundVariable)):
        return EXIT_BAD_INPUT
    return EXIT_FAIL


def _load_env(path: str | None):
    return parse_env(Path(path).read_text() if path else "")


def _read_term(path: str):
    return parse_term(Path(path).read_text())


def _find_var(env, name: str):
    for b in env.bindings:
        if isinstance(b, TermBind) and show(b.var) == name:
            return b.var
    for b in env.bindings:
        if isinstance(b, TermBind) and b.var.name == name:
            return b.var
    raise UnboundVariable(f"no term variable named {name!r} in the environment")


# --- commands ----------------------------------------------------------------


def _cmd_check(args) -> int:
    env = _load_env(args.env)
    t = _read_term(args.file)
    print(show(typecheck(env, t, Fuel(args.fuel))))
    return EXIT_OK


def _attempt(thunk):
    try:
        return "accept", thunk(), None
    except CheckError as e:
        return "reject", None, e


def _cmd_infer(args) -> int:
    env = _load_env(args.env)
    t = _read_term(args.file)

    if args.system == "term":
        term2, ty = infer(env, t, Fuel(args.fuel))
        if args.emit in ("term", "both"):
            print(f"term: {show(term2)}")
        if args.emit in ("type", "both"):
            print(f"type: {show(ty)}")
        return EXIT_OK

    if args.system == "type":
        ty, cs = infer_t(env, t, Fuel(args.fuel))
        print(f"type: {show(ty)}")
        print(f"capture: {show(cs)}")
        return EXIT_OK

    # both engines, separate but equal budgets; their agreement is the claim
    a_status, a_val, a_err = _attempt(lambda: infer(env, t, Fuel(args.fuel)))
    b_status, b_val, b_err = _attempt(lambda: infer_t(env, t, Fuel(args.fuel)))

    if a_status == "accept" and b_status == "accept":
        term2, ty = a_val
        ty_b, cs_b = b_val
        if alpha_eq(ty, ty_b) and cs_b == cv(term2):
            print(f"term: {show(term2)}")
            print(f"type: {show(ty)}")
            print(f"capture: {show(cs_b)}")
            return EXIT_OK
        print("divergence")
        print(f"  term engine: accept, type {show(ty)}, cv {show(cv(term2))}")
        print(f"  type engine: accept, type {show(ty_b)}, capture {show(cs_b)}")
        return EXIT_FAIL

    if a_status == "reject" and b_status == "reject":
        if type(a_err) is type(b_err):
            print(f"reject: {type(a_err).__name__}: {a_err}", file=sys.stderr)
            return _exit_for(a_err)
        print("divergence")
        print(f"  term engine: reject {type(a_err).__name__}: {a_err}")
        print(f"  type engine: reject {type(b_err).__name__}: {b_err}")
        return EXIT_FAIL

    print("divergence")
    if a_status == "accept":
        term2, ty = a_val
        print(f"  term engine: accept, type {show(ty)}")
        print(f"  type engine: reject {type(b_err).__name__}: {b_err}")
    else:
        ty_b, cs_b = b_val
        print(f"  term engine: reject {type(a_err).__name__}: {a_err}")
        print(f"  type engine: accept, type {show(ty_b)}, capture {show(cs_b)}")
    return EXIT_FAIL


def _cmd_sub(args) -> int:
    env = _load_env(args.env)
    if args.capsets:
        ok = subcapture(env, parse_capture_set(args.left),
                        parse_capture_set(args.right))
        rel = "subcapture"
    else:
        ok = subtype(env, parse_type(args.left), parse_type(args.right),
                     Fuel(args.fuel))
        rel = "subtype"
    print(f"{rel} holds" if ok else f"{rel} does not hold")
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_adapt(args) -> int:
    env = _load_env(args.env)
    x = _find_var(env, args.var)
    u = parse_type(args.to)
    if args.system == "term":
        term = box_adapt(env, x, u, Fuel(args.fuel))
        print(f"term: {show(term)}")
        print(f"type: {show(typecheck(env, term, Fuel(args.fuel)))}")
    else:
        kind, cs = box_adapt_t(env, x, u, Fuel(args.fuel))
        print(f"kind: {kind.value}")
        print(f"capture: {show(cs)}")
    return EXIT_OK


def _cmd_normalize(args) -> int:
    print(show(normalize(_read_term(args.file))))
    return EXIT_OK


def _cmd_erase(args) -> int:
    t = _read_term(args.file)
    ft = erase(t)
    print(show_fterm(ft))
    if args.check_fsub:
        fty = fsub_typecheck(erase_env(_load_env(args.env)), ft,
                             Fuel(args.fuel))
        print(f"f-type: {show_ftype(fty)}")
    return EXIT_OK


def _indent(text: str, pad: str = "    ") -> str:
    return "\n".join(pad + line for line in text.splitlines())


def _cmd_fuzz(args) -> int:
    props = sorted(PROPERTIES) if args.check == "all" else [args.check]
    cfg = GenConfig(seed=args.seed, max_env=args.max_env,
                    max_depth=args.max_depth, box_bias=args.box_bias)
    report = run_differential(cfg, props, count=args.count,
                              mutate_cv=args.mutate_cv, hostile=args.hostile,
                              fuel_ratio=args.fuel_ratio)

    by_prop = Counter(f.prop for f in report.failures)
    for p in props:
        print(f"{p}: {args.count} cases, {by_prop.get(p, 0)} failures")
    print(f"total: {report.cases_run} cases, {len(report.failures)} failures, "
          f"{len(report.findings)} findings")

    for f in report.failures:
        print(f"\nFAIL {f.prop} seed={f.seed}")
        for key, value in f.case.items():
            rendered = "\n".join(value) if isinstance(value, list) else str(value)
            print(f"  {key}:")
            print(_indent(rendered))
        for key, value in f.outputs.items():
            print(f"  {key}: {value}")
    for nd in report.findings:
        print(f"finding: {json.dumps(nd, default=str)}")

    if args.report_dir:
        _write_report(args.report_dir, args, props, report, by_prop)

    return EXIT_FAIL if report.failures else EXIT_OK


def _write_report(dirpath: str, args, props, report, by_prop) -> None:
    out = Path(dirpath)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.jsonl", "w") as fh:
        fh.write(json.dumps({
            "kind": "run", "seed": args.seed, "count": args.count,
            "properties": props, "max_env": args.max_env,
            "max_depth": args.max_depth, "box_bias": args.box_bias,
            "mutate_cv": args.mutate_cv, "hostile": args.hostile,
            "fuel_ratio": args.fuel_ratio,
        }) + "\n")
        for p in props:
            fh.write(json.dumps({"kind": "summary", "prop": p,
                                 "cases": args.count,
                                 "failures": by_prop.get(p, 0)}) + "\n")
        for f in report.failures:
            fh.write(json.dumps({"kind": "failure", "prop": f.prop,
                                 "seed": f.seed, "case": f.case,
                                 "outputs": f.outputs}, default=str) + "\n")
        for nd in report.findings:
            fh.write(json.dumps({"kind": "finding", **nd}, default=str) + "\n")
    _render_summary(out / "summary.png", props, args, by_prop)


def _render_summary(path: Path, props, args, by_prop) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fails = [by_prop.get(p, 0) for p in props]
    passes = [args.count - n for n in fails]
    xs = range(len(props))
    fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(props)), 4.0))
    ax.bar(xs, passes, color="#4a7d59", label="pass")
    ax.bar(xs, fails, bottom=passes, color="#b0413e", label="fail")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(props, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("cases")
    ax.set_title(f"differential run: seed={args.seed}, "
                 f"{args.count} cases per property")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# --- parser ------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = argparse.ArgumentParser(
        prog="capcheck",
        description="Typecheck, elaborate, and cross-validate capture-calculus "
                    "programs.")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, help_text, fn):
        sp = sub.add_parser(name, help=help_text, formatter_class=fmt)
        sp.set_defaults(fn=fn)
        return sp

    def env_and_fuel(sp):
        sp.add_argument("--env", default=None, metavar="ENVFILE",
                        help="environment file: one `x : T` or `X <: S` per line")
        sp.add_argument("--fuel", type=int, default=DEFAULT_FUEL,
                        help="recursion budget shared by subtyping and adaptation")

    sp = cmd("check", "typecheck a term and print its type", _cmd_check)
    sp.add_argument("file", help="term file in the surface grammar")
    env_and_fuel(sp)

    sp = cmd("infer", "elaborate a box-incomplete term", _cmd_infer)
    sp.add_argument("file", help="term file in the surface grammar")
    env_and_fuel(sp)
    sp.add_argument("--system", choices=("term", "type", "both"),
                    default="term",
                    help="term rewrites the program; type predicts on types "
                         "alone; both runs the two and diffs")
    sp.add_argument("--emit", choices=("term", "type", "both"), default="both",
                    help="what the term system prints")

    sp = cmd("sub", "decide a subtype (or subcapture) query", _cmd_sub)
    sp.add_argument("left", help="left-hand type, or capture set with --capsets")
    sp.add_argument("right", help="right-hand type, or capture set with --capsets")
    env_and_fuel(sp)
    sp.add_argument("--capsets", action="store_true",
                    help="compare capture sets instead of types")

    sp = cmd("adapt", "adapt an in-scope variable to an expected type",
             _cmd_adapt)
    sp.add_argument("--env", required=True, metavar="ENVFILE",
                    help="environment file: one `x : T` or `X <: S` per line")
    sp.add_argument("--var", required=True, help="variable name to adapt")
    sp.add_argument("--to", required=True, metavar="TYPE",
                    help="expected type in the surface grammar")
    sp.add_argument("--fuel", type=int, default=DEFAULT_FUEL,
                    help="recursion budget shared by subtyping and adaptation")
    sp.add_argument("--system", choices=("term", "type"), default="term",
                    help="term prints the coercion; type prints kind + capture")

    sp = cmd("normalize", "apply the let-reassociation normal form",
             _cmd_normalize)
    sp.add_argument("file", help="term file in the surface grammar")

    sp = cmd("erase", "erase boxes and capture sets", _cmd_erase)
    sp.add_argument("file", help="term file in the surface grammar")
    env_and_fuel(sp)
    sp.add_argument("--check-fsub", action="store_true",
                    help="also typecheck the erased term and print its type")

    sp = cmd("fuzz", "run the differential property battery", _cmd_fuzz)
    sp.add_argument("--seed", type=int, default=0, help="base RNG seed")
    sp.add_argument("--count", type=int, default=100,
                    help="cases per property")
    sp.add_argument("--check", default="all",
                    choices=sorted(PROPERTIES) + ["all"],
                    help="which property to run")
    sp.add_argument("--max-env", type=int, default=5,
                    help="generated environment size cap")
    sp.add_argument("--max-depth", type=int, default=4,
                    help="generated term depth cap")
    sp.add_argument("--box-bias", type=float, default=0.5,
                    help="box density of generated programs, 0..1")
    sp.add_argument("--mutate-cv", action="store_true",
                    help="plant a wrong capture computation; the battery "
                         "must then report failures")
    sp.add_argument("--hostile", action="store_true",
                    help="include subtype queries built to exhaust fuel")
    sp.add_argument("--fuel-ratio", type=int, default=8,
                    help="report terms whose inference burns more than this "
                         "multiple of the erased image's fuel")
    sp.add_argument("--report-dir", default=None, metavar="DIR",
                    help="write report.jsonl and summary.png here")

    return p


def dispatch(argv: list[str]) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CheckError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return _exit_for(e)
    except RecursionError:
        # a fuel budget raised past the interpreter's stack loses the race
        print("RecursionError: the interpreter stack bound was hit before the "
              "fuel budget ran out; re-run with a smaller --fuel",
              file=sys.stderr)
        return EXIT_FUEL
    except OSError as e:
        print(e, file=sys.stderr)
        return EXIT_BAD_INPUT


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
