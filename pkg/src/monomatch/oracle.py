"""Brute-force tools for small instances.

Everything here enumerates: all matchings of 2L players (there are
(2L - 1)!! of them), all ordered matchings, the exact reward maximizer, and
machine checks of the structural facts the online algorithms rely on
(unique best-with-best optimum, unique optimum leader, and the existence of
a strictly improving adjacent swap from every sorted non-optimal ordered
matching). Also computes the gap constants that drive the logarithmic
regret coefficients, for diagnostics and curve overlays.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

from .environment import Instance
from .matchings import (
    Matching,
    OrderedMatching,
    SwapDescriptor,
    neighborhood_set,
    optimum_leader,
    satisfies_pi,
    set_of,
    swap,
)

MAX_ENUMERABLE_L = 6


def double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2))


@lru_cache(maxsize=None)
def _matchings(players: tuple) -> tuple:
    if not players:
        return ((),)
    first, rest = players[0], players[1:]
    out = []
    for i, partner in enumerate(rest):
        pair = (first, partner)
        for sub in _matchings(rest[:i] + rest[i + 1:]):
            out.append((pair,) + sub)
    return tuple(out)


def enumerate_matchings(L: int) -> list[Matching]:
    """All perfect pairings of the players 0..2L-1, in a fixed order.

    The order is lexicographic: the lowest unmatched player is paired with
    each larger player in turn. Guarded at L <= 6 ((2L - 1)!! = 10395).
    """
    if not 1 <= L <= MAX_ENUMERABLE_L:
        raise ValueError(f"exhaustive enumeration supports 1 <= L <= {MAX_ENUMERABLE_L}, got {L}")
    return [tuple(sorted(m)) for m in _matchings(tuple(range(2 * L)))]


def enumerate_ordered_matchings(L: int) -> list[OrderedMatching]:
    """All ordered matchings: every couple permutation of every matching."""
    out = []
    for m in enumerate_matchings(L):
        out.extend(itertools.permutations(m))
    return out


def exhaustive_best(inst: Instance) -> tuple[Matching, float]:
    """Exact reward maximizer by full enumeration (ties: first in order)."""
    best = None
    best_value = -math.inf
    for m in enumerate_matchings(inst.L):
        v = inst.expected_reward(m)
        if v > best_value:
            best, best_value = m, v
    return best, best_value


def _require_assumption1(inst: Instance) -> None:
    if not inst.satisfies_assumption1():
        raise ValueError("instance violates the strict inter-couple order")


@dataclass
class UnimodalityReport:
    """Outcome of the improving-swap check over all ordered matchings."""

    checked: int
    counterexamples: list[OrderedMatching] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def verify_unimodality(inst: Instance, max_L: int = 4) -> UnimodalityReport:
    """Check every sorted non-optimal ordered matching has a better swap.

    For each ordered matching whose couple-wise success probabilities are
    non-increasing and which is not the optimum leader, confirms some
    adjacent-couple swap strictly increases the expected reward. Any
    violator is collected as a counterexample.
    """
    _require_assumption1(inst)
    if inst.L > max_L:
        raise ValueError(f"ordered-matching enumeration capped at L={max_L}")
    rho = inst.rho
    a_star_leader = optimum_leader(inst.theta)
    checked = 0
    counterexamples = []
    for om in enumerate_ordered_matchings(inst.L):
        if om == a_star_leader or not satisfies_pi(om, rho):
            continue
        checked += 1
        mu = inst.expected_reward(om)
        improved = False
        for k in range(inst.L - 1):
            for e1 in om[k]:
                for e2 in om[k + 1]:
                    if inst.expected_reward(swap(om, SwapDescriptor(k, e1, e2))) > mu:
                        improved = True
                        break
                if improved:
                    break
            if improved:
                break
        if not improved:
            counterexamples.append(om)
    return UnimodalityReport(checked=checked, counterexamples=counterexamples)


def verify_leader_uniqueness(inst: Instance, max_L: int = 4) -> bool:
    """True when exactly one couple order of the best matching is sorted.

    Couples are unordered, so orderings differing only in how a couple is
    written are already identified by the canonical pair representation.
    """
    _require_assumption1(inst)
    if inst.L > max_L:
        raise ValueError(f"ordered-matching enumeration capped at L={max_L}")
    a_star = inst.optimal_matching
    rho = inst.rho
    sorted_orders = [om for om in itertools.permutations(a_star) if satisfies_pi(om, rho)]
    return len(sorted_orders) == 1


@dataclass(frozen=True)
class AnalysisConstants:
    """Gap constants controlling the logarithmic regret coefficients.

    ``delta`` is the smallest reward gap among the optimum leader's swap
    neighbors, ``delta_tilde`` the smallest single-player improvement margin
    (worst case over the ways of writing two consecutive couples as ordered
    pairs), ``neighbor_gaps`` maps each neighbor matching to its reward gap,
    and ``k_a`` to the number of couples it changes (always 2 for swap
    neighbors). ``theorem_log_coefficient`` is the summed ``8 / gap``
    coefficient of the log-horizon regret bound, for curve overlays.
    """

    delta: float
    delta_tilde: float
    neighbor_gaps: dict
    k_a: dict
    theorem_log_coefficient: float


def gap_constants(inst: Instance) -> AnalysisConstants:
    """Compute the reward-gap diagnostics of an instance."""
    _require_assumption1(inst)
    leader = optimum_leader(inst.theta)
    a_star = set_of(leader)
    mu_star = inst.mu_star
    th = inst.theta

    neighbor_gaps = {}
    k_a = {}
    for m, _d in neighborhood_set(leader):
        neighbor_gaps[m] = mu_star - inst.expected_reward(m)
        k_a[m] = sum(1 for pair in m if pair not in a_star)

    delta = math.inf
    delta_tilde = math.inf
    for k in range(inst.L - 1):
        a, b = leader[k]
        c, d = leader[k + 1]
        # Worst case over the two distinct swaps between couples k and k+1.
        delta = min(
            delta,
            (th[a] - th[c]) * (th[b] - th[d]),
            (th[a] - th[d]) * (th[b] - th[c]),
        )
        for i, i2 in ((a, b), (b, a)):
            for j2 in (c, d):
                delta_tilde = min(delta_tilde, th[i] * (th[i2] - th[j2]))

    coeff = sum(8.0 / g for g in neighbor_gaps.values())
    return AnalysisConstants(
        delta=delta,
        delta_tilde=delta_tilde,
        neighbor_gaps=neighbor_gaps,
        k_a=k_a,
        theorem_log_coefficient=coeff,
    )
