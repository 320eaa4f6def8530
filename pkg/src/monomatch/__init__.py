"""Unimodal bandit algorithms for online mono-partite matching.

The library simulates the problem of repeatedly pairing up 2L players so
that as many pairs as possible "succeed", when the success probability of a
pair factorizes into per-player rates that are unknown and must be learnt
from per-pair Bernoulli feedback. It provides:

* canonical matching / ordered-matching values and the adjacent-couple swap
  neighborhood (:mod:`monomatch.matchings`);
* KL-UCB and simplified UCB confidence indices (:mod:`monomatch.indices`);
* the GRAB and GRAB+ policies plus exhaustive and random baselines
  (:mod:`monomatch.policies`);
* rank-1 Bernoulli environments and ladder-instance generators
  (:mod:`monomatch.environment`);
* brute-force enumeration oracles and structural checks
  (:mod:`monomatch.oracle`);
* a seeded, checkpointed experiment harness with CSV export
  (:mod:`monomatch.runner`) and its CLI (:mod:`monomatch.cli`).
"""

from .environment import (
    FeedbackVector,
    Instance,
    make_exp1_instance,
    make_exp2_instance,
    pseudo_regret,
    random_assumption1_instance,
    sample_feedback,
)
from .indices import IndexKind, exploration_budget, kl, klucb_index, simple_ucb
from .matchings import (
    Matching,
    OrderedMatching,
    Pair,
    SwapDescriptor,
    assumption1_holds,
    make_matching,
    make_pair,
    neighborhood_set,
    optimum_leader,
    satisfies_pi,
    set_of,
    swap,
)
from .oracle import (
    AnalysisConstants,
    enumerate_matchings,
    enumerate_ordered_matchings,
    exhaustive_best,
    gap_constants,
    verify_leader_uniqueness,
    verify_unimodality,
)
from .policies import (
    GrabDecision,
    LeaderStats,
    PairStats,
    PolicyState,
    g_argmax,
    grab_recommend,
    klcombucb_recommend,
    policy_update,
    random_recommend,
    v1_score,
    v2_score,
)
from .runner import (
    ExperimentConfig,
    RunRecord,
    checkpoint_rounds,
    emit_csv,
    read_records,
    run_experiment_1,
    run_experiment_2,
    run_many,
    run_single,
    write_experiment_table,
)

__version__ = "0.1.0"
