"""Command-line front end: generate graphs, run protocols, benchmark, verify.

Non-interactive by design: output is JSON or CSV on stdout, human-oriented
status lines on stderr. All commands are deterministic in their flags; the
seed defaults to 0 and is echoed in every output.

Exit codes: 0 ok, 2 invalid parameters, 3 gnp sampling exhausted,
4 a check or coverage failure, 5 round cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from d2sim import broadcast as bc
from d2sim import oracle
from d2sim.election import (
    ElectConfig,
    ElectionOutcome,
    ProtocolInvariantViolation,
    elect,
)
from d2sim.graph import (
    DiameterViolation,
    DisconnectedGraph,
    GnpRejectionExhausted,
    InvalidParams,
    InvariantViolation,
    ParseError,
    builtin_corpus,
    generate,
    load,
    save,
    structure_check,
)
from d2sim.simcore import RoundCapExceeded, log2_ceil

SCHEMA = 1

EXIT_OK = 0
EXIT_PARAMS = 2
EXIT_GNP = 3
EXIT_CHECK = 4
EXIT_ROUNDCAP = 5


def _overlay(name: str) -> bc.OverlayChoice:
    return bc.OverlayChoice(name)


def cmd_gen(args) -> int:
    params = {}
    for key in ("n", "a", "b", "k"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    if args.p is not None:
        params["p"] = args.p
    g = generate(args.family, seed=args.seed, **params)
    save(g, args.out)
    print(f"family={args.family} seed={args.seed} n={g.n} "
          f"delta={g.max_degree} diameter={g.diameter()} out={args.out}")
    return EXIT_OK


def _election_checks(outcome: ElectionOutcome) -> dict:
    g = outcome.graph
    trace = outcome.trace
    ig = oracle.info_graph(outcome)
    checks = {
        "round_bound": oracle.check_round_bound(trace, g).to_dict(),
        "message_bound": oracle.check_message_bound(trace, g).to_dict(),
        "loop_message_bound": oracle.check_loop_message_bound(trace, g).to_dict(),
        "kingdoms": oracle.check_kingdoms(trace, g).to_dict(),
        "info_graph": {**ig.to_dict(), "pass": ig.connected},
    }
    return checks


def _broadcast_checks(g, outcome: ElectionOutcome, tree: bc.BroadcastTree,
                      delivery: bc.DeliveryTrace) -> dict:
    ell = log2_ceil(g.max_degree + 1)
    report = bc.validate_tree(tree, g)
    height_limit = 2 * ell + 2
    combined = (tree.trace.totals["invite"]
                + outcome.trace.totals["announce"])
    msg_limit = 12 * g.n * ell + 12 * g.n
    return {
        "tree_valid": report.to_dict(),
        "height_bound": {
            "measured": tree.height,
            "limit": height_limit,
            "pass": tree.height <= height_limit,
        },
        "broadcast_message_bound": {
            "measured": combined,
            "limit": msg_limit,
            "pass": combined <= msg_limit,
        },
        "payload": {
            "messages": delivery.messages,
            "rounds": delivery.rounds,
            "pass": (delivery.messages == g.n - 1
                     and delivery.rounds == tree.height),
        },
    }


def _all_pass(checks: dict) -> bool:
    for value in checks.values():
        if isinstance(value, dict) and not value.get("pass", True):
            return False
    return True


def cmd_run(args) -> int:
    g = load(args.graph)
    config = ElectConfig(slack=args.slack, max_rounds=args.max_rounds)
    outcome = elect(g, args.seed, config)
    doc = {
        "schema": SCHEMA,
        "mode": args.mode,
        "seed": args.seed,
        "slack": args.slack,
        "graph": {"n": g.n, "delta": g.max_degree, "diameter": g.diameter()},
        **outcome.trace.export(),
        "election": {
            "leader": outcome.leader,
            "rounds": outcome.rounds,
            "messages": outcome.trace.total_messages,
            "unique": True,
            "agreement": True,
        },
        "checks": _election_checks(outcome),
    }
    if args.mode == "broadcast":
        doc["overlay"] = args.overlay
        tree = bc.build_tree(g, outcome, _overlay(args.overlay),
                             max_rounds=args.max_rounds)
        delivery = bc.broadcast_payload(tree, "payload", g)
        doc["tree"] = tree.to_dict()
        doc["broadcast"] = {
            "rounds": tree.trace.rounds,
            "totals": dict(tree.trace.totals),
            "digest": tree.trace.digest,
        }
        doc["checks"].update(_broadcast_checks(g, outcome, tree, delivery))
        if args.edges_out:
            with open(args.edges_out, "w", encoding="ascii") as fh:
                fh.write(tree.edge_list())
    ok = _all_pass(doc["checks"])
    doc["pass"] = ok
    print(json.dumps(doc, sort_keys=True, separators=(",", ":")))
    return EXIT_OK if ok else EXIT_CHECK


def _parse_sizes(spec: str) -> list[int]:
    spec = spec.strip()
    if not spec:
        raise InvalidParams("empty size range")
    if ".." in spec:
        lo_s, hi_s = spec.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
        if lo < 1 or hi < lo:
            raise InvalidParams(f"bad size range {spec!r}")
        sizes = []
        n = lo
        while n <= hi:
            sizes.append(n)
            n *= 2
        return sizes
    sizes = [int(tok) for tok in spec.split(",") if tok]
    if not sizes or any(n < 1 for n in sizes):
        raise InvalidParams(f"bad size list {spec!r}")
    return sizes


def _bench_cell(family: str, n: int, seed: int, args):
    if family == "gnp":
        g = generate("gnp", seed=seed, n=n)
    else:
        g = generate(family, n=n)
    config = ElectConfig(slack=args.slack, max_rounds=args.max_rounds)
    outcome = elect(g, seed, config)
    checks = _election_checks(outcome)
    rounds = outcome.rounds
    msgs = outcome.trace.total_messages
    height = ""
    if args.mode == "broadcast":
        tree = bc.build_tree(g, outcome, _overlay(args.overlay))
        delivery = bc.broadcast_payload(tree, "payload", g)
        checks.update(_broadcast_checks(g, outcome, tree, delivery))
        rounds += tree.trace.rounds
        msgs += tree.trace.total_messages
        height = tree.height
    ell = log2_ceil(g.max_degree + 1)
    norm = msgs / max(1, g.n * ell)
    return (family, g.n, g.max_degree, seed, rounds, msgs,
            f"{norm:.4f}", height, 1 if _all_pass(checks) else 0)


def cmd_bench(args) -> int:
    sizes = _parse_sizes(args.n)
    families = args.family.split(",")
    print("family,n,delta,seed,rounds,msgs,msgs_norm,height,pass")
    failures = 0
    for family in families:
        fam_sizes = [5] if family == "cycle5" else sizes
        for n in fam_sizes:
            for seed in range(args.trials):
                try:
                    row = _bench_cell(family, n, seed, args)
                except (ProtocolInvariantViolation, bc.CoverageFailure):
                    row = (family, n, "", seed, "", "", "", "", 0)
                print(",".join(str(x) for x in row))
                if row[-1] == 0:
                    failures += 1
    return EXIT_OK if failures == 0 else EXIT_CHECK


def cmd_verify(args) -> int:
    rows = []

    def record(kind, label, seed, ok, note=""):
        rows.append((kind, label, seed, ok, note))

    if args.corpus:
        import os

        graphs = []
        for name in sorted(os.listdir(args.corpus)):
            if name.endswith(".txt"):
                graphs.append((name, load(os.path.join(args.corpus, name)), 0))
    else:
        graphs = [
            (f"{family}/{n}", g, seed)
            for family, n, seed, g in builtin_corpus(
                sizes=tuple(s for s in (1, 2, 3, 4, 5, 6, 7, 8, 9, 16, 32, 64)
                            if s <= args.max_n),
                seeds=range(args.seeds),
            )
        ]

    for label, g, seed in graphs:
        try:
            rep = structure_check(g)
            note = f"delta={rep.max_degree}"
            if rep.degree_bound_tight:
                note += " tight:delta^2=n-1"
            record("structure", label, seed, rep.passed, note)
        except DiameterViolation as exc:
            record("structure", label, seed, False, str(exc))
            continue
        if g.n <= 64:
            try:
                out = elect(g, seed)
                ref = oracle.reference_replay(g, seed)
                same = (out.leader == ref.leader
                        and out.views == ref.views
                        and out.trace.totals == ref.totals
                        and out.trace.digest == ref.digest)
                record("oracle", label, seed, same,
                       f"leader={out.leader}")
            except (ProtocolInvariantViolation, RoundCapExceeded) as exc:
                record("oracle", label, seed, False, str(exc))

    failed = [r for r in rows if not r[3]]
    width = max(len(r[1]) for r in rows) if rows else 10
    for kind, label, seed, ok, note in rows:
        status = "PASS" if ok else "FAIL"
        print(f"{status} {kind:9s} {label:<{width}} seed={seed} {note}")
    print(f"# {len(rows) - len(failed)}/{len(rows)} checks passed")
    return EXIT_OK if not failed else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="d2sim",
        description="Leader election and broadcast trees on diameter-two "
                    "networks, simulated deterministically.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a graph file")
    gen.add_argument("--family", required=True,
                     choices=["star", "cycle5", "complete",
                              "complete_bipartite", "windmill", "gnp"])
    gen.add_argument("--n", type=int)
    gen.add_argument("--a", type=int)
    gen.add_argument("--b", type=int)
    gen.add_argument("--k", type=int)
    gen.add_argument("--p", type=float)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    run = sub.add_parser("run", help="run a protocol, print run JSON")
    run.add_argument("--graph", required=True)
    run.add_argument("--mode", choices=["elect", "broadcast"], default="elect")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--slack", type=int, default=2)
    run.add_argument("--overlay", choices=["psi", "psi-union-phi"],
                     default="psi-union-phi")
    run.add_argument("--max-rounds", type=int, default=None)
    run.add_argument("--edges-out", default=None,
                     help="also write the tree as 'parent child' lines")
    run.set_defaults(func=cmd_run)

    bench = sub.add_parser("bench", help="complexity scaling CSV")
    bench.add_argument("--family", required=True,
                       help="one family or a comma list")
    bench.add_argument("--n", required=True,
                       help="size range a..b (doubling) or comma list")
    bench.add_argument("--trials", type=int, default=3)
    bench.add_argument("--mode", choices=["elect", "broadcast"],
                       default="elect")
    bench.add_argument("--slack", type=int, default=2)
    bench.add_argument("--overlay", choices=["psi", "psi-union-phi"],
                       default="psi-union-phi")
    bench.add_argument("--max-rounds", type=int, default=None)
    bench.set_defaults(func=cmd_bench)

    verify = sub.add_parser("verify", help="structure + oracle equivalence")
    verify.add_argument("--corpus", default=None,
                        help="directory of graph .txt files")
    verify.add_argument("--built-in", action="store_true",
                        help="use the generated corpus (default)")
    verify.add_argument("--max-n", type=int, default=64)
    verify.add_argument("--seeds", type=int, default=3)
    verify.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except InvalidParams as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except GnpRejectionExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GNP
    except (ParseError, InvariantViolation, DisconnectedGraph) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except (DiameterViolation, ProtocolInvariantViolation,
            bc.CoverageFailure, bc.NonSpanningTree) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except RoundCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ROUNDCAP


if __name__ == "__main__":
    sys.exit(main())
