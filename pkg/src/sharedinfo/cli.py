"""Command-line front end.

Exit codes: 0 success, 1 violation found (or confirmed under --expect-fail),
2 usage error, 3 bad input data or an expected violation that did not show
up, 4 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import axioms as ax
from . import datafiles, geometric, knowledge, lattice
from .distribution import load, mutual_information
from .errors import SharedInfoError
from .measures import MEASURES, bivariate_decomposition, get_measure

log = logging.getLogger("sharedinfo")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _common(parser):
    parser.add_argument("--measure", default="imin", choices=sorted(MEASURES))
    parser.add_argument("--target", nargs="+", help="target variables")
    parser.add_argument("--sources", nargs="+", help="source variables (default: all non-target)")
    parser.add_argument("--self", dest="self_mode", action="store_true",
                        help="decompose the information the whole system has about itself")
    parser.add_argument("--format", default="table", choices=["table", "dot", "json"])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--budget", type=int, default=100_000)
    parser.add_argument("--tolerance", type=float, default=ax.AXIOM_TOL)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--expect-fail", default=None,
                        help="comma-separated axiom ids expected to fail")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sharedinfo", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="redundancy and local terms on the antichain lattice")
    p.add_argument("input")
    _common(p)

    p = sub.add_parser("axioms", help="audit a measure against the axioms")
    p.add_argument("input", nargs="?")
    p.add_argument("--builtin", choices=[k for k in datafiles.BUILTINS if k != "sec8"])
    p.add_argument("--axiom", action="append", help="axiom id to check (repeatable; default all)")
    p.add_argument("--theorem1", action="store_true",
                   help="strong-symmetry certificate on the input (default: XOR)")
    p.add_argument("--replay", metavar="FILE", help="re-run the audit recorded in a witness file")
    _common(p)

    p = sub.add_parser("geometry", help="shared posteriors, SI_KL and SI_lr")
    p.add_argument("input")
    p.add_argument("--emit-json", action="store_true")
    _common(p)

    p = sub.add_parser("knowledge", help="K_i, shared and common knowledge for a scenario")
    p.add_argument("scenario")
    p.add_argument("--event", action="append", help="event name (repeatable; default all)")
    p.add_argument("--agents", nargs="+", help="agents to combine (default all)")

    p = sub.add_parser("lattice", help="antichain lattice structure")
    p.add_argument("--n", type=int, default=3)
    _common(p)

    p = sub.add_parser("search", help="seeded random search for an axiom violation")
    p.add_argument("--axiom", required=True)
    p.add_argument("--n-sources", type=int, default=2)
    p.add_argument("--output", help="write the shrunk witness here")
    _common(p)
    return parser


def _load_input(path):
    return load(datafiles.resolve(path))


def _targets(args, directives, dist):
    if args.self_mode or directives.get("mode") == "self":
        return None, None, True
    target = args.target or directives.get("target", "").split()
    if not target:
        raise UsageError("no target: pass --target or add a '#! target:' line to the file")
    sources = args.sources or (directives["sources"].split() if "sources" in directives else None)
    return dist.subset(target), sources, False


def _expect(args, failed: set[str]) -> int:
    if args.expect_fail:
        expected = {ax.normalize_axiom(a) for a in args.expect_fail.split(",")}
        if expected <= failed:
            print(f"expected violation confirmed: {', '.join(sorted(expected))}")
            return EXIT_VIOLATION
        print(f"expected violation not observed: {', '.join(sorted(expected - failed))}")
        return EXIT_DATA
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_decompose(args) -> int:
    dist, directives = _load_input(args.input)
    target, sources, self_mode = _targets(args, directives, dist)
    measure = get_measure(args.measure)
    table = lattice.evaluate_lattice(dist, target, measure, sources=sources,
                                     self_mode=self_mode, jobs=args.jobs)
    table = lattice.mobius_invert(table)
    if args.format == "json":
        print(table.to_json())
    elif args.format == "dot":
        print(table.to_dot(), end="")
    else:
        print(table.to_text(), end="")
    return EXIT_OK


def cmd_axioms(args) -> int:
    if args.theorem1:
        dist = _load_input(args.input)[0] if args.input else datafiles.load_dist(args.builtin or "xor")
        report = ax.theorem1_certificate(dist)
        print("\n".join(report.lines()))
        return EXIT_OK
    if args.replay:
        with open(args.replay) as fh:
            text = fh.read()
        case, verdicts, directives = ax.replay(text, args.tolerance)
        for v in verdicts:
            print(v.line())
        if "gap" in directives:
            recorded = float(directives["gap"])
            replayed = ax.worst_gap(verdicts, ax.normalize_axiom(directives["axiom"]))
            print(f"recorded gap {recorded!r}, replayed gap {replayed!r}, "
                  f"{'identical' if recorded == replayed else 'DIFFERENT'}")
        return _expect(args, ax.failed(verdicts))

    if args.builtin:
        case = ax.builtin_cases()[args.builtin]
        dist, target, sources, self_mode = case.dist, case.target, case.sources, case.self_mode
        if args.target:
            target = tuple(args.target)
        if args.self_mode:
            self_mode = True
    elif args.input:
        dist, directives = _load_input(args.input)
        target, sources, self_mode = _targets(args, directives, dist)
    else:
        raise UsageError("axioms needs an input file, --builtin, --replay or --theorem1")
    axiom_ids = [ax.normalize_axiom(a) for a in args.axiom] if args.axiom else None
    verdicts = ax.audit(args.measure, dist, axiom_ids, target=target, sources=sources,
                        self_mode=self_mode, tol=args.tolerance)
    print(f"# measure {args.measure}")
    for v in verdicts:
        print(v.line())
    return _expect(args, ax.failed(verdicts))


def cmd_geometry(args) -> int:
    dist, directives = _load_input(args.input)
    target, sources, self_mode = _targets(args, directives, dist)
    if self_mode:
        target = sources = dist.names
    if sources is None:
        sources = [n for n in dist.names if n not in target]
    blocks = [[s] for s in sources]
    config = geometric.build_configuration(dist, target, blocks)
    kl = geometric.si_kl(dist, target, blocks)
    lr = geometric.si_lr_detail(dist, target, blocks)
    summary = {"si_kl": kl, "si_lr": lr.value}
    if lr.infinite_at:
        summary["si_lr_infinite_at"] = [list(map(list, t)) for t in lr.infinite_at]
    if len(sources) == 2 and not self_mode:
        x1, x2 = sources
        dec = bivariate_decomposition(MEASURES["si_kl"], dist, target, x1, x2)
        summary.update({
            "mi_s_x1": mutual_information(dist, target, x1),
            "ci_si_kl": dec.ci,
            "negative_synergy": dec.ci < -1e-9,
        })
    if args.emit_json or args.format == "json":
        print(json.dumps({"summary": summary, "geometry": config.report()}, indent=2))
        return EXIT_OK
    line = f"SI_KL={lattice.format_bits(kl)} SI_lr={lattice.format_bits(lr.value)}"
    if "ci_si_kl" in summary:
        line += (f" I({''.join(target)}:{sources[0]})={lattice.format_bits(summary['mi_s_x1'])}"
                 f" CI(SI_KL)={lattice.format_bits(summary['ci_si_kl'])}")
        if summary["negative_synergy"]:
            line += " NEGATIVE"
    print(line)
    for t in config.tuples:
        shared = ", ".join(f"{v:.6f}" for v in t.shared.distribution)
        lam = ", ".join(f"{v:.6f}" for v in t.shared.weights)
        note = "" if t.shared.canonical else " (weights not unique)"
        print(f"  x={t.outcome} p={t.weight:.6f} shared=({shared}) lambda=({lam}){note} "
              f"KL={lattice.format_bits(t.shared.kl)}")
    return EXIT_OK


def cmd_knowledge(args) -> int:
    scenario = knowledge.load_scenario(datafiles.resolve(args.scenario))
    model = scenario.model
    agents = args.agents or list(model.agents)
    names = args.event or list(scenario.events)
    for name in names:
        if name not in scenario.events:
            raise UsageError(f"unknown event {name!r}")
        e = scenario.events[name]
        print(f"event {name} = {knowledge.format_event(model, e)}")
        for a in agents:
            print(f"  K_{a} = {knowledge.format_event(model, knowledge.knows(model, a, e))}")
        sk = knowledge.shared_knowledge(model, agents, e)
        ck = knowledge.common_knowledge(model, agents, e)
        print(f"  SK = {knowledge.format_event(model, sk)}; CK = {knowledge.format_event(model, ck)}")
    return EXIT_OK


def cmd_lattice(args) -> int:
    lat = lattice.PILattice(args.n)
    if args.format == "dot":
        print(lattice.lattice_dot(lat), end="")
    elif args.format == "json":
        print(json.dumps({
            "n": lat.n,
            "layers": [[a.label for a in layer] for layer in lat.layers],
            "covers": [[lo.label, hi.label] for lo, hi in lat.covers],
        }, indent=2))
    else:
        print(f"# {len(lat)} antichains over {lat.n} sources, top layer first")
        for layer in reversed(lat.layers):
            print("  ".join(a.label for a in layer))
    return EXIT_OK


def cmd_search(args) -> int:
    config = ax.SearchConfig(
        measure=args.measure,
        axiom=ax.normalize_axiom(args.axiom),
        n_sources=args.n_sources,
        seed=args.seed,
        budget=args.budget,
    )
    result = ax.search_violations(config, jobs=args.jobs)
    if not result.found:
        print(f"no violation of {config.axiom} by {config.measure} in {result.trials} trials")
        return EXIT_DATA if args.expect_fail else EXIT_OK
    text = result.witness_text(config)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    print(f"violation of {config.axiom} by {config.measure} at trial {result.trial}, "
          f"gap {result.gap!r}")
    print(text, end="")
    return EXIT_VIOLATION if args.expect_fail else EXIT_OK


COMMANDS = {
    "decompose": cmd_decompose,
    "axioms": cmd_axioms,
    "geometry": cmd_geometry,
    "knowledge": cmd_knowledge,
    "lattice": cmd_lattice,
    "search": cmd_search,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename or exc}", file=sys.stderr)
        return EXIT_DATA
    except SharedInfoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
