"""Command-line front end.

Exit codes: 0 on success, 1 when an invariant check or attack-backed
assertion fails, 2 on usage errors. Every randomized verb echoes its
resolved configuration (seed included) to stderr so runs can be replayed.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional

from . import adversary as adv
from .experiments import (
    ExperimentConfig,
    records_to_csv,
    run_sweep,
    summarize,
    summary_to_csv,
)
from .routing import AllToAll, Scheme, SingleDest, Status, evaluate, route_flow
from .schemes import (
    FailoverMatrix,
    Flow,
    HopRule,
    VerificationExhaustedError,
    gen_dfs,
    gen_rfs,
    gen_rfs_allpairs,
    gen_rfs_verified,
)
from .topology import FailureScenario, Topology

DEFAULT_SEED = 271828


def _echo(args: argparse.Namespace, **extra) -> None:
    resolved = {**vars(args), **extra}
    resolved.pop("func", None)
    line = " ".join(f"{k}={v}" for k, v in sorted(resolved.items()) if v is not None)
    print(f"# resolved: {line}", file=sys.stderr)


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_scheme(args: argparse.Namespace) -> Scheme:
    if getattr(args, "matrix", None):
        return FailoverMatrix.from_text(Path(args.matrix).read_text())
    if getattr(args, "rule", None):
        return HopRule(args.rule)
    raise SystemExit("either --matrix or --rule is required")


def _scheme_n_dst(args: argparse.Namespace, scheme: Scheme) -> tuple[int, int]:
    if isinstance(scheme, FailoverMatrix):
        n = scheme.n
        dst = scheme.dst if scheme.is_single_dest else args.dst
    else:
        n, dst = args.n, args.dst
    if n is None:
        raise SystemExit("--n is required with --rule")
    if dst is None:
        dst = n - 1
    return n, dst


def cmd_gen_scheme(args: argparse.Namespace) -> int:
    dst = args.dst if args.dst is not None else args.n - 1
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    if args.scheme == "dfs":
        matrix = gen_dfs(args.n, dst)
    elif args.scheme == "rfs-allpairs":
        matrix = gen_rfs_allpairs(args.n, seed)
    elif args.verify_threshold is not None:
        draw = gen_rfs_verified(
            args.n, dst, seed, args.verify_threshold, budget=args.verify_budget
        )
        print(f"# redraws={draw.redraws} accepted_seed={draw.seed}", file=sys.stderr)
        matrix = draw.matrix
    else:
        matrix = gen_rfs(args.n, dst, seed)
    _echo(args, dst=dst, seed=None if args.scheme == "dfs" else seed)
    _write(args.out, matrix.to_text())
    return 0


def cmd_attack(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    report_text = None
    if args.plan == "ran":
        if args.n is None or args.phi is None:
            raise SystemExit("ran needs --n and --phi")
        scenario = adv.adv_ran(args.n, args.phi, seed)
    elif args.plan == "ecl":
        if args.n is None or args.phi is None:
            raise SystemExit("ecl needs --n and --phi")
        dst = args.dst if args.dst is not None else args.n - 1
        scenario = adv.adv_ecl(args.n, args.phi, dst, seed)
    elif args.plan == "loop-forcer":
        scheme = _load_scheme(args)
        n, dst = _scheme_n_dst(args, scheme)
        scenario = adv.loop_forcer(scheme, n, dst)
    elif args.plan == "chain":
        if args.phi is None:
            raise SystemExit("chain needs --phi")
        scheme = _load_scheme(args)
        n, dst = _scheme_n_dst(args, scheme)
        result = adv.chain_attack(scheme, n, dst, args.phi)
        scenario = result.scenario
        if not result.completed:
            print(
                f"# scheme broke after {result.rounds_completed} rounds "
                f"({result.final_status.value})",
                file=sys.stderr,
            )
    elif args.plan == "prefix":
        if args.target_load is None:
            raise SystemExit("prefix needs --target-load")
        scheme = _load_scheme(args)
        if not isinstance(scheme, FailoverMatrix):
            raise SystemExit("prefix needs a matrix scheme")
        n, dst = _scheme_n_dst(args, scheme)
        plan = adv.prefix_attack(scheme, dst, args.target_load)
        scenario, report_text = plan.scenario, plan.to_text()
    else:  # pigeonhole
        if args.phi is None:
            raise SystemExit("pigeonhole needs --phi")
        scheme = _load_scheme(args)
        if not isinstance(scheme, FailoverMatrix) or scheme.is_single_dest:
            raise SystemExit("pigeonhole needs an all-pairs matrix")
        plan = adv.pigeonhole_attack(scheme, args.phi)
        scenario, report_text = plan.scenario, plan.to_text()
    _echo(args, seed=seed if args.plan in ("ran", "ecl") else None)
    _write(args.out, scenario.to_text())
    if report_text is not None and args.report:
        Path(args.report).write_text(report_text)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    scheme = _load_scheme(args)
    scenario = FailureScenario.from_text(Path(args.failures).read_text())
    n, dst = (
        (scheme.n, scheme.dst if scheme.is_single_dest else args.dst)
        if isinstance(scheme, FailoverMatrix)
        else (scenario.n, args.dst)
    )
    if dst is None:
        dst = n - 1
    topo = Topology.clique(n).with_failures(scenario)
    pattern = SingleDest(dst) if args.pattern == "single" else AllToAll()
    report = evaluate(scheme, topo, pattern)
    _echo(args, n=n, dst=dst)
    _write(args.out, report.to_csv())
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    print(f"# resolved config:\n{cfg.to_text()}", file=sys.stderr, end="")
    records = run_sweep(cfg, jobs=args.jobs)
    _write(args.out, records_to_csv(records))
    if args.summary:
        Path(args.summary).write_text(summary_to_csv(summarize(records)))
    return 0


def cmd_mincut(args: argparse.Namespace) -> int:
    topo = Topology.clique(args.n)
    if args.failures:
        scenario = FailureScenario.from_text(Path(args.failures).read_text())
        topo = topo.with_failures(scenario)
    print(topo.mincut())
    return 0


def _verify_dfs_structure(n: int) -> list[str]:
    problems = []
    matrix = gen_dfs(n, n - 1)
    length = int(math.log2(n))
    rows = [matrix.rows[Flow(m, n - 1)] for m in range(n - 1)]
    for k in range(length):
        column = [row[k] for row in rows]
        if len(set(column)) != n - 1:
            problems.append(f"n={n}: column {k} has repeated entries")
    appearances: dict[int, int] = {}
    for row in rows:
        for e in row:
            appearances[e] = appearances.get(e, 0) + 1
    worst = max(appearances.values())
    if worst > length:
        problems.append(f"n={n}: some index appears in {worst} > {length} rows")
    for node in range(n):
        prefixes = [set(row[: row.index(node)]) for row in rows if node in row]
        for i in range(len(prefixes)):
            for j in range(i + 1, len(prefixes)):
                shared = prefixes[i] & prefixes[j]
                if shared:
                    problems.append(
                        f"n={n}: prefixes of {node} share {sorted(shared)}"
                    )
    return problems


def _verify_rfs_loopfree(n: int, seed: int, trials: int) -> list[str]:
    import random as _random

    problems = []
    rng = _random.Random(seed)
    from .topology import all_links

    links = all_links(n)
    max_phi = min(len(links), 200)
    for t in range(trials):
        matrix = gen_rfs(n, n - 1, rng.randrange(1 << 48))
        phi = rng.randint(0, max_phi)
        failed = frozenset(rng.sample(links, phi))
        topo = Topology(n, failed)
        for src in range(n - 1):
            verdict = route_flow(matrix, topo, Flow(src, n - 1))
            if verdict.status is Status.LOOP:
                problems.append(
                    f"trial {t}: flow {src}->{n - 1} looped: {verdict.path}"
                )
    return problems


def _verify_theorems(n: int, seed: int) -> list[str]:
    problems = []
    dst = n - 1
    schemes: list[tuple[str, Scheme]] = [
        ("rfs", gen_rfs(n, dst, seed)),
        ("dfs", gen_dfs(n, dst)),
        ("rob", HopRule.ROB),
        ("bal", HopRule.BAL),
    ]
    for name, scheme in schemes:
        scenario = adv.loop_forcer(scheme, n, dst)
        if len(scenario.links) > n - 1:
            problems.append(f"loop-forcer vs {name}: used {len(scenario.links)} links")
        topo = Topology.clique(n).with_failures(scenario)
        verdict = route_flow(scheme, topo, Flow(0, dst))
        if verdict.status is Status.DELIVERED:
            problems.append(f"loop-forcer vs {name}: flow still delivered")
        if topo.mincut() < n // 2 - 1:
            problems.append(f"loop-forcer vs {name}: mincut {topo.mincut()}")
    phi = max(1, n // 4)
    result = adv.chain_attack(HopRule.ROB, n, dst, phi)
    if result.completed:
        topo = Topology.clique(n).with_failures(result.scenario)
        report = evaluate(HopRule.ROB, topo, SingleDest(dst))
        verdict = route_flow(HopRule.ROB, topo, Flow(0, dst))
        if verdict.status is Status.DELIVERED:
            last_load = report.link_load(verdict.path[-2], dst)
            if last_load < phi:
                problems.append(f"chain vs rob: last-link load {last_load} < {phi}")
        if topo.mincut() != n - phi - 1:
            problems.append(f"chain vs rob: mincut {topo.mincut()} != {n - phi - 1}")
    import random as _random

    rng = _random.Random(seed)
    for _ in range(10):
        phi = rng.randint(1, n - 2)
        scenario = adv.adv_ran(n, phi, rng.randrange(1 << 48))
        topo = Topology.clique(n).with_failures(scenario)
        if topo.mincut() < n - phi - 1:
            problems.append(f"random phi={phi}: mincut {topo.mincut()} < {n - phi - 1}")
    return problems


def cmd_verify(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    _echo(args, seed=seed)
    if args.suite == "dfs-structure":
        problems = _verify_dfs_structure(args.n)
    elif args.suite == "rfs-loopfree":
        problems = _verify_rfs_loopfree(args.n, seed, args.trials)
    else:
        problems = _verify_theorems(args.n, seed)
    for p in problems:
        print(f"VIOLATION: {p}", file=sys.stderr)
    print(f"{args.suite}: {'ok' if not problems else f'{len(problems)} violations'}")
    return 1 if problems else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="failoverlab",
        description="Generate, attack, and evaluate local failover schemes "
        "on fully meshed networks.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen-scheme", help="write a failover matrix file")
    p.add_argument("--scheme", required=True, choices=("rfs", "dfs", "rfs-allpairs"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dst", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--verify-threshold", type=int)
    p.add_argument(
        "--verify-budget",
        type=int,
        help="attack budget for --verify-threshold (default: threshold^2)",
    )
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gen_scheme)

    p = sub.add_parser("attack", help="produce a failure scenario")
    p.add_argument(
        "--plan",
        required=True,
        choices=("ran", "ecl", "loop-forcer", "prefix", "chain", "pigeonhole"),
    )
    p.add_argument("--n", type=int)
    p.add_argument("--phi", type=int)
    p.add_argument("--dst", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--matrix")
    p.add_argument("--rule", choices=("bal", "rob"))
    p.add_argument("--target-load", type=int)
    p.add_argument("--out", default="-")
    p.add_argument("--report", help="also write the attack plan report")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("evaluate", help="route a pattern and write the load CSV")
    p.add_argument("--matrix")
    p.add_argument("--rule", choices=("bal", "rob"))
    p.add_argument("--failures", required=True)
    p.add_argument("--pattern", default="single", choices=("single", "all"))
    p.add_argument("--dst", type=int)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--summary")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run an invariant suite")
    p.add_argument(
        "--suite",
        required=True,
        choices=("dfs-structure", "rfs-loopfree", "theorems"),
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mincut", help="print the exact mincut")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--failures")
    p.set_defaults(func=cmd_mincut)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VerificationExhaustedError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except adv.ConstructionFailedError as exc:
        print(f"construction falsified: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
