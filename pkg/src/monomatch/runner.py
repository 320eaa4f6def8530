"""Experiment harness: seeded runs, checkpointed logging, CSV export, and
the two ladder-instance sweeps.

A run is deterministic given (config, seed): the per-run random stream
drives both the policy (for the uniform baseline) and the environment, and
all policy tie-breaking is deterministic. Replications execute in parallel
as independent processes; aggregation is a single reduce over the collected
records, so output is identical whatever the worker count.
"""

from __future__ import annotations

import csv
import math
import random
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

from joblib import Parallel, delayed

from .environment import (Instance, make_exp1_instance, make_exp2_instance,
                          pseudo_regret, sample_feedback)
from .indices import IndexKind
from .matchings import optimum_leader
from .oracle import gap_constants
from .policies import (
    GRAB_VARIANTS,
    PolicyState,
    grab_recommend,
    klcombucb_recommend,
    policy_update,
    random_recommend,
)

ALGOS = ("grab", "grab-plus", "klcombucb", "random")

CSV_HEADER = ["algo", "instance", "seed", "t", "cum_regret",
              "frac_opt_play", "frac_opt_leader", "elapsed_s"]


@dataclass(frozen=True)
class RunRecord:
    """One checkpoint of one run.

    The two fractions cover the rounds since the previous checkpoint:
    how often the played matching was the best one, and how often the
    elected leader was the optimum leader (0 for leaderless policies).
    """

    algo: str
    instance: str
    seed: int
    t: int
    cum_regret: float
    frac_opt_play: float
    frac_opt_leader: float
    elapsed_s: float


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs besides its seed."""

    algo: str
    instance: Instance
    horizon: int
    seeds: tuple[int, ...]
    index_kind: IndexKind = IndexKind.SIMPLE_UCB
    trace_every: int | None = None
    out: str | None = None

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ValueError(f"unknown algo {self.algo!r}, expected one of {ALGOS}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if not self.seeds:
            raise ValueError("need at least one seed")
        if self.trace_every is not None and self.trace_every < 1:
            raise ValueError(f"trace_every must be >= 1, got {self.trace_every}")
        if self.algo == "klcombucb" and self.instance.L > 6:
            raise ValueError("klcombucb enumerates all matchings and is capped at L <= 6")


def checkpoint_rounds(horizon: int, trace_every: int | None = None) -> list[int]:
    """Logging schedule: powers of ten plus 30 log-spaced rounds, plus the
    final round; ``trace_every`` adds every multiple of that stride."""
    points = {horizon}
    p = 10
    while p <= horizon:
        points.add(p)
        p *= 10
    if horizon > 1:
        log_h = math.log(horizon)
        for i in range(30):
            points.add(max(1, round(math.exp(log_h * (i + 1) / 30))))
    if trace_every is not None:
        points.update(range(trace_every, horizon + 1, trace_every))
    return sorted(pt for pt in points if pt <= horizon)


def run_single(config: ExperimentConfig, seed: int) -> list[RunRecord]:
    """Play ``horizon`` rounds of the configured policy against the instance.

    The loop is recommend, observe per-couple feedback, update statistics;
    pseudo-regret (the expected reward gap of the played matching) and the
    optimal-play / optimal-leader fractions are logged at each checkpoint.
    """
    inst = config.instance
    algo = config.algo
    horizon = config.horizon
    rng = random.Random(seed)
    a_star = inst.optimal_matching
    try:
        opt_leader = optimum_leader(inst.theta)
    except ValueError:
        opt_leader = None

    state = None
    if algo in GRAB_VARIANTS:
        state = PolicyState.fresh(inst.L, GRAB_VARIANTS[algo], config.index_kind)
    elif algo == "klcombucb":
        state = PolicyState.fresh(inst.L, "v1", IndexKind.KL_UCB)

    checkpoints = checkpoint_rounds(horizon, config.trace_every)
    cp_pos = 0
    records: list[RunRecord] = []
    regret_of: dict = {}
    cum_regret = 0.0
    window_rounds = 0
    window_opt_plays = 0
    window_opt_leads = 0
    start = time.perf_counter()

    for t in range(1, horizon + 1):
        leader = None
        if state is not None and algo != "klcombucb":
            played, decision = grab_recommend(state, t)
            leader = decision.leader
        elif algo == "klcombucb":
            played = klcombucb_recommend(state, t)
        else:
            played = random_recommend(rng, inst.L)

        r = regret_of.get(played)
        if r is None:
            r = regret_of[played] = pseudo_regret(inst, played)
        cum_regret += r

        feedback = sample_feedback(inst, played, rng)
        if state is not None:
            policy_update(state, played, feedback, leader)

        window_rounds += 1
        if played == a_star:
            window_opt_plays += 1
        if leader is not None and leader == opt_leader:
            window_opt_leads += 1

        if t == checkpoints[cp_pos]:
            records.append(RunRecord(
                algo=algo,
                instance=inst.label,
                seed=seed,
                t=t,
                cum_regret=cum_regret,
                frac_opt_play=window_opt_plays / window_rounds,
                frac_opt_leader=window_opt_leads / window_rounds,
                elapsed_s=time.perf_counter() - start,
            ))
            window_rounds = window_opt_plays = window_opt_leads = 0
            cp_pos += 1
    return records


def run_many(config: ExperimentConfig, workers: int = 1) -> list[RunRecord]:
    """All seeds of a config, optionally in parallel; records in seed order."""
    if workers > 1 and len(config.seeds) > 1:
        per_seed = Parallel(n_jobs=workers)(
            delayed(run_single)(config, seed) for seed in config.seeds
        )
    else:
        per_seed = [run_single(config, seed) for seed in config.seeds]
    return [rec for records in per_seed for rec in records]


def emit_csv(records: Sequence[RunRecord], path, header_comments: Iterable[str] = (),
             include_timing: bool = False) -> None:
    """Write checkpoint records as CSV (UTF-8, LF, full float precision).

    ``header_comments`` become '#'-prefixed lines above the header. Timing
    is zeroed unless ``include_timing`` is set, keeping the default output
    byte-identical across repeated invocations.
    """
    if not records:
        raise ValueError("no records to write")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([
                r.algo, r.instance, r.seed, r.t,
                repr(r.cum_regret), repr(r.frac_opt_play), repr(r.frac_opt_leader),
                repr(r.elapsed_s) if include_timing else "0.0",
            ])


def read_records(path) -> list[RunRecord]:
    """Parse a CSV written by :func:`emit_csv` back into records."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        rows = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(rows)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        for row in rows:
            out.append(RunRecord(
                algo=row[0], instance=row[1], seed=int(row[2]), t=int(row[3]),
                cum_regret=float(row[4]), frac_opt_play=float(row[5]),
                frac_opt_leader=float(row[6]), elapsed_s=float(row[7]),
            ))
    return out


def final_regrets(records: Sequence[RunRecord]) -> dict[int, float]:
    """Cumulative regret at the last checkpoint of each seed."""
    last: dict[int, RunRecord] = {}
    for r in records:
        if r.seed not in last or r.t > last[r.seed].t:
            last[r.seed] = r
    return {seed: rec.cum_regret for seed, rec in sorted(last.items())}


def mean_stderr(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and standard error (0 stderr for a single value)."""
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def _sweep(configs: list[ExperimentConfig], sweep_key: str, sweep_values,
           workers: int, csv_dir) -> list[dict]:
    rows = []
    for config, value in zip(configs, sweep_values):
        records = run_many(config, workers=workers)
        if csv_dir is not None:
            out = f"{csv_dir}/{config.algo}-{config.instance.label}.csv"
            emit_csv(records, out, include_timing=True)
        finals = final_regrets(records)
        mean, stderr = mean_stderr(list(finals.values()))
        gaps = gap_constants(config.instance)
        rows.append({
            "algo": config.algo,
            sweep_key: value,
            "instance": config.instance.label,
            "mean_final_regret": mean,
            "stderr_final_regret": stderr,
            "normalized_regret": mean * gaps.delta / config.instance.L,
            "per_seed_final_regret": finals,
            "records": records,
        })
    return rows


def run_experiment_1(L_values: Sequence[int], delta: float, horizon: int,
                     seeds: Sequence[int], algos: Sequence[str] = ("grab", "grab-plus"),
                     index_kind: IndexKind = IndexKind.SIMPLE_UCB,
                     workers: int = 1, csv_dir=None) -> list[dict]:
    """Ladder sweep over the couple count L at a fixed per-player gap.

    Returns one aggregated row per (algo, L): mean and standard error of the
    final cumulative pseudo-regret across seeds, plus the scale-free
    ``normalized_regret`` column (final regret x min-neighbor-gap / L).
    """
    configs, values = [], []
    for algo in algos:
        for L in L_values:
            inst = make_exp1_instance(L, delta)
            configs.append(ExperimentConfig(algo=algo, instance=inst, horizon=horizon,
                                            seeds=tuple(seeds), index_kind=index_kind))
            values.append(L)
    return _sweep(configs, "L", values, workers, csv_dir)


def run_experiment_2(mu_values: Sequence[float], L: int, delta: float, horizon: int,
                     seeds: Sequence[int], algos: Sequence[str] = ("grab", "grab-plus"),
                     index_kind: IndexKind = IndexKind.SIMPLE_UCB,
                     relax_constraint: bool = False, trace_every: int | None = None,
                     workers: int = 1, csv_dir=None) -> list[dict]:
    """Ladder sweep over the mean success rate mu at fixed L and gap."""
    configs, values = [], []
    for algo in algos:
        for mu in mu_values:
            inst = make_exp2_instance(L, mu, delta, relax_constraint=relax_constraint)
            configs.append(ExperimentConfig(algo=algo, instance=inst, horizon=horizon,
                                            seeds=tuple(seeds), index_kind=index_kind,
                                            trace_every=trace_every))
            values.append(mu)
    return _sweep(configs, "mu", values, workers, csv_dir)


def write_experiment_table(rows: Sequence[dict], path, sweep_key: str) -> None:
    """Aggregated sweep table as CSV with the normalization documented."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# normalized_regret = mean_final_regret * delta_gap / L\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["algo", sweep_key, "instance", "mean_final_regret",
                         "stderr_final_regret", "normalized_regret"])
        for row in rows:
            writer.writerow([
                row["algo"], row[sweep_key], row["instance"],
                repr(row["mean_final_regret"]), repr(row["stderr_final_regret"]),
                repr(row["normalized_regret"]),
            ])
