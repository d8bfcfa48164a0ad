"""Command-line front end: ``privlens analyze|compare|query``.

Exit codes: 0 when everything asked for holds, 1 when a requirement fails (or
a queried term is not derivable), 2 on any error.
"""
import argparse
import sys

from .deduction import derivable
from .dsl import ParseError, ModelInvalid, parse_scenario, parse_term
from .model import UnknownItem
from .pipeline import (
    RunConfig, SuiteMismatch, TraceInvalid, analyze_bundle, check_suites, describe_steps, state_after,
)
from .report import FORMATS, render_report
from .requirements import UnknownName
from .terms import format_item, format_term, items_of
from .traces import determinable, shared_profiles
from .views import UnknownActor, coalition_kb, view_of

QUERIES = ("derive", "view", "assoc", "determinable")


def build_parser():
    p = argparse.ArgumentParser(prog="privlens", description="Check privacy requirements of message traces.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--no-validate", dest="validate", action="store_false",
                        help="report invalid trace steps instead of stopping")
        sp.add_argument("-v", "--verbose", action="count", default=0, help="print trace validity per step")
        sp.add_argument("--profile-scope", choices=("domain", "global"), default="domain",
                        help="how fresh items are related to items already used")

    a = sub.add_parser("analyze", help="check one scenario")
    a.add_argument("scenario")
    a.add_argument("--format", dest="fmt", choices=FORMATS, default="table")
    a.add_argument("--witnesses", action="store_true", help="explain every verdict")
    common(a)

    c = sub.add_parser("compare", help="check several scenarios side by side")
    c.add_argument("scenarios", nargs="+")
    c.add_argument("--format", dest="fmt", choices=FORMATS, default="table")
    c.add_argument("--witnesses", action="store_true")
    common(c)

    q = sub.add_parser("query", help="inspect knowledge in a scenario state")
    q.add_argument("scenario")
    q.add_argument("query", choices=QUERIES)
    q.add_argument("actor", help="actor, or coalition as a,b")
    q.add_argument("term", nargs="?", help="term for derive and determinable")
    q.add_argument("--step", type=int, default=None,
                   help="use the state after this many transmissions (default: whole trace)")
    q.add_argument("--profile-scope", choices=("domain", "global"), default="domain")
    return p


def _err(msg):
    print(f"privlens: error: {msg}", file=sys.stderr)
    return 2


def _run_checks(cfg, out):
    analyses = []
    for path in cfg.paths:
        bundle = parse_scenario(path)
        a = analyze_bundle(bundle, cfg.validate, cfg.profile_scope)
        if cfg.verbose:
            for label, doms in shared_profiles(bundle.model).items():
                print(f"{a.name}: note: profile {label} is used in domains {', '.join(doms)}", file=sys.stderr)
            for line in describe_steps(a.steps):
                print(f"{a.name}: {line}", file=sys.stderr)
        if not cfg.validate:
            for r in a.steps:
                if not r.ok:
                    print(f"privlens: warning: {a.name}: {TraceInvalid(r)}", file=sys.stderr)
        analyses.append(a)
    if cfg.command == "compare":
        check_suites(analyses)
    out.write(render_report(analyses, cfg.fmt, cfg.witnesses))
    return 0 if all(a.passed for a in analyses) else 1


def _query(args, out):
    bundle = parse_scenario(args.scenario)
    model = bundle.model
    state = state_after(bundle, args.step)
    actors = [s.strip() for s in args.actor.split(",") if s.strip()]
    kb = coalition_kb(state, actors)
    if args.query in ("derive", "determinable"):
        if not args.term:
            raise ValueError(f"query {args.query} needs a term")
        t = parse_term(args.term)
        unknown = [x for x in items_of(t) if x not in model.sigma]
        if unknown:
            raise UnknownItem("unknown item " + ", ".join(format_item(x) for x in sorted(unknown)))
        if args.query == "derive":
            d = derivable(kb, t)
            if d is None:
                out.write(f"{kb.owner} cannot derive {format_term(t)}\n")
                return 1
            out.write(d.render() + "\n")
            return 0
        if len(actors) != 1:
            raise ValueError("determinable takes a single actor")
        w = determinable(state, actors[0], t, args.profile_scope)
        if w is None:
            out.write(f"{actors[0]} cannot determine {format_term(t)}\n")
            return 1
        out.write(format_term(w) + "\n")
        return 0
    v = view_of(kb)
    if args.query == "view":
        out.write("detectable:\n")
        for x in sorted(v.detectable):
            out.write(f"  {format_item(x)}\n")
    out.write("associated:\n")
    for cls in v.classes:
        known = [x for x in cls if x in v.detectable]
        if args.query == "view" and not known:
            continue
        shown = known if args.query == "view" else cls
        out.write("  {" + ", ".join(format_item(x) for x in shown) + "}\n")
    return 0


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        if args.command == "query":
            return _query(args, out)
        paths = (args.scenario,) if args.command == "analyze" else tuple(args.scenarios)
        cfg = RunConfig(paths, args.command, args.fmt, args.validate, args.witnesses,
                        args.verbose, args.profile_scope)
        return _run_checks(cfg, out)
    except ParseError as e:
        return _err(str(e))
    except ModelInvalid as e:
        return _err(str(e))
    except TraceInvalid as e:
        return _err(f"{e} (use --no-validate to continue anyway)")
    except (SuiteMismatch, UnknownName, UnknownActor, UnknownItem) as e:
        return _err(str(e).strip("'\""))
    except (OSError, ValueError) as e:
        return _err(str(e))


if __name__ == "__main__":
    sys.exit(main())
