"""Command-line harness: seeded experiment runs and the brute-force checks.

Two subcommands:

* ``run`` plays one policy against one instance for a horizon, over one or
  more seeds, and writes a checkpointed CSV trace;
* ``verify --lemmas`` machine-checks the structural facts the policies rely
  on over randomized instances and exits non-zero on any counterexample.
"""

from __future__ import annotations

import argparse
import random
import sys

from .environment import (
    Instance,
    make_exp1_instance,
    make_exp2_instance,
    random_assumption1_instance,
)
from .indices import IndexKind
from .oracle import exhaustive_best, verify_leader_uniqueness, verify_unimodality
from .runner import ALGOS, ExperimentConfig, emit_csv, final_regrets, run_many

INDEX_CHOICES = {"klucb": IndexKind.KL_UCB, "simple-ucb": IndexKind.SIMPLE_UCB}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monomatch",
        description="Online mono-partite matching bandit experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a policy and write a CSV trace")
    run.add_argument("--algo", required=True, choices=ALGOS)
    run.add_argument("--instance", required=True, choices=["exp1", "exp2", "custom"])
    run.add_argument("--L", type=int, default=None, help="number of couples")
    run.add_argument("--delta", type=float, default=None, help="per-player gap between consecutive couples")
    run.add_argument("--mu", type=float, default=None, help="mean success rate (exp2)")
    run.add_argument("--theta", default=None, help="comma-separated success rates (custom)")
    run.add_argument("--horizon", type=int, required=True)
    run.add_argument("--seeds", type=int, default=1, help="number of replications")
    run.add_argument("--base-seed", type=int, default=0)
    run.add_argument("--index", choices=sorted(INDEX_CHOICES), default="simple-ucb")
    run.add_argument("--out", required=True, help="CSV output path")
    run.add_argument("--trace-every", type=int, default=None,
                     help="additionally log every N rounds")
    run.add_argument("--relax-exp2-constraint", action="store_true",
                     help="only require exp2 rates to land in [0, 1]")
    run.add_argument("--workers", type=int, default=1, help="parallel seed processes")
    run.add_argument("--timing", action="store_true",
                     help="write measured wall-clock times (breaks byte reproducibility)")

    verify = sub.add_parser("verify", help="brute-force structural checks")
    verify.add_argument("--lemmas", action="store_true",
                        help="check best-matching, leader-uniqueness and improving-swap facts")
    verify.add_argument("--L-max", dest="l_max", type=int, default=4)
    verify.add_argument("--instances", type=int, default=20, help="random instances per L")
    verify.add_argument("--seed", type=int, default=0)
    return parser


def _instance_from_args(args) -> Instance:
    if args.instance == "exp1":
        if args.L is None or args.delta is None:
            raise SystemExit("exp1 needs --L and --delta")
        return make_exp1_instance(args.L, args.delta)
    if args.instance == "exp2":
        if args.L is None or args.delta is None or args.mu is None:
            raise SystemExit("exp2 needs --L, --mu and --delta")
        return make_exp2_instance(args.L, args.mu, args.delta,
                                  relax_constraint=args.relax_exp2_constraint)
    if args.theta is None:
        raise SystemExit("custom needs --theta")
    theta = tuple(float(v) for v in args.theta.split(","))
    if len(theta) % 2:
        raise SystemExit("custom --theta needs an even number of rates")
    L = len(theta) // 2
    if args.L is not None and args.L != L:
        raise SystemExit(f"--L {args.L} contradicts --theta of length {len(theta)}")
    return Instance(L, theta, label=f"custom-L{L}")


def _cmd_run(args) -> int:
    try:
        inst = _instance_from_args(args)
        config = ExperimentConfig(
            algo=args.algo,
            instance=inst,
            horizon=args.horizon,
            seeds=tuple(range(args.base_seed, args.base_seed + args.seeds)),
            index_kind=INDEX_CHOICES[args.index],
            trace_every=args.trace_every,
            out=args.out,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    records = run_many(config, workers=args.workers)
    comments = [
        f"algo={config.algo}",
        f"instance={inst.label}",
        f"theta={','.join(repr(v) for v in inst.theta)}",
        f"horizon={config.horizon}",
        f"seeds={config.seeds[0]}..{config.seeds[-1]}",
        f"index={args.index}",
        f"trace_every={config.trace_every}",
    ]
    emit_csv(records, args.out, header_comments=comments, include_timing=args.timing)
    for seed, final in final_regrets(records).items():
        print(f"{config.algo} {inst.label} seed={seed} final_regret={final:.6g}")
    return 0


def _cmd_verify(args) -> int:
    if not args.lemmas:
        print("nothing to verify (pass --lemmas)", file=sys.stderr)
        return 2
    if args.l_max < 2:
        print("--L-max must be at least 2", file=sys.stderr)
        return 2
    rng = random.Random(args.seed)
    failures = 0
    for L in range(2, args.l_max + 1):
        bad_best = bad_unique = bad_swap = 0
        for _ in range(args.instances):
            inst = random_assumption1_instance(L, rng)
            best, _value = exhaustive_best(inst)
            if best != inst.optimal_matching:
                bad_best += 1
            if not verify_leader_uniqueness(inst, max_L=args.l_max):
                bad_unique += 1
            report = verify_unimodality(inst, max_L=args.l_max)
            if not report.ok:
                bad_swap += 1
        failures += bad_best + bad_unique + bad_swap
        status = "ok" if not (bad_best or bad_unique or bad_swap) else "FAIL"
        print(f"L={L}: {args.instances} instances, "
              f"best-matching {bad_best} bad, leader-uniqueness {bad_unique} bad, "
              f"improving-swap {bad_swap} bad [{status}]")
    if failures:
        print(f"{failures} counterexample(s) found", file=sys.stderr)
        return 1
    print("all checks passed")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_verify(args)


if __name__ == "__main__":
    sys.exit(main())
