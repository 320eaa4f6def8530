"""Online matching policies: GRAB (two candidate-scoring criteria), an
exhaustive KL-CombUCB baseline, and a uniform-random control.

GRAB elects a leader each round by greedily pairing the players with the
highest empirical success means, then either replays the leader's matching
(once every 2L - 1 elections of that leader) or plays the best of the
leader's adjacent-swap neighborhood under an optimistic criterion:

* criterion ``v1`` ranks candidates by their total optimistic value, which
  reduces to the four index values where a neighbor differs from the leader;
* criterion ``v2`` ranks a neighbor by the clamped optimistic improvement of
  its two new couples over the couple they replace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .indices import IndexKind, klucb_index
from .matchings import (
    Matching,
    OrderedMatching,
    Pair,
    SwapDescriptor,
    make_pair,
    neighborhood_set,
    set_of,
)
from .oracle import enumerate_matchings

INF = math.inf

# Algorithm name -> GRAB scoring criterion.
GRAB_VARIANTS = {"grab": "v1", "grab-plus": "v2"}


class PairStats:
    """Pull counts, success sums and empirical means per unordered pair.

    Storage is a flat row-major table indexed at ``lo * n + hi`` for the
    canonical writing of a pair; the accessors accept either member order.
    The mean of a never-pulled pair is 0.
    """

    __slots__ = ("n", "counts", "sums", "means")

    def __init__(self, n_players: int):
        if n_players < 2 or n_players % 2:
            raise ValueError(f"need an even number (>= 2) of players, got {n_players}")
        self.n = n_players
        size = n_players * n_players
        self.counts = [0] * size
        self.sums = [0] * size
        self.means = [0.0] * size

    def record(self, i: int, j: int, outcome: int) -> None:
        if outcome not in (0, 1):
            raise ValueError(f"outcome must be 0 or 1, got {outcome}")
        if i > j:
            i, j = j, i
        idx = i * self.n + j
        self.counts[idx] += 1
        self.sums[idx] += outcome
        self.means[idx] = self.sums[idx] / self.counts[idx]

    def count(self, i: int, j: int) -> int:
        return self.counts[(i * self.n + j) if i < j else (j * self.n + i)]

    def mean(self, i: int, j: int) -> float:
        return self.means[(i * self.n + j) if i < j else (j * self.n + i)]

    def total_pulls(self) -> int:
        return sum(self.counts)

    def mean_matrix(self) -> np.ndarray:
        """Symmetric means table (diagonal zero), for diagnostics and tests."""
        out = np.zeros((self.n, self.n))
        for i in range(self.n):
            for j in range(i + 1, self.n):
                out[i, j] = out[j, i] = self.means[i * self.n + j]
        return out

    @classmethod
    def from_means(cls, means, pulls: int = 1) -> "PairStats":
        """Stats whose empirical means match a given table (testing helper).

        ``means[i][j] * pulls`` must be integral for the means to be exact.
        """
        table = np.asarray(means, dtype=float)
        stats = cls(table.shape[0])
        for i in range(stats.n):
            for j in range(i + 1, stats.n):
                successes = round(table[i, j] * pulls)
                if not math.isclose(successes, table[i, j] * pulls, abs_tol=1e-9):
                    raise ValueError(f"mean {table[i, j]} not representable with {pulls} pulls")
                idx = i * stats.n + j
                stats.counts[idx] = pulls
                stats.sums[idx] = successes
                stats.means[idx] = successes / pulls
        return stats


class LeaderStats:
    """How many rounds each ordered matching has been elected leader."""

    __slots__ = ("counts", "total")

    def __init__(self):
        self.counts: dict[OrderedMatching, int] = {}
        self.total = 0

    def count(self, om: OrderedMatching) -> int:
        return self.counts.get(om, 0)

    def record(self, om: OrderedMatching) -> None:
        self.counts[om] = self.counts.get(om, 0) + 1
        self.total += 1


class GrabDecision(NamedTuple):
    """Diagnostics of one GRAB recommendation."""

    leader: OrderedMatching
    forced_leader_play: bool
    # Candidate scores in enumeration order (leader first), None on forced rounds.
    scores: tuple | None


@dataclass
class PolicyState:
    """Mutable per-run state shared by the stats-based policies."""

    L: int
    variant: str
    index_kind: IndexKind
    pair_stats: PairStats
    leader_stats: LeaderStats
    rounds: int = 0
    _neighbor_cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def fresh(cls, L: int, variant: str = "v1",
              index_kind: IndexKind = IndexKind.KL_UCB) -> "PolicyState":
        if variant not in ("v1", "v2"):
            raise ValueError(f"variant must be 'v1' or 'v2', got {variant!r}")
        return cls(L=L, variant=variant, index_kind=IndexKind(index_kind),
                   pair_stats=PairStats(2 * L), leader_stats=LeaderStats())

    def neighbor_records(self, leader: OrderedMatching) -> list:
        """Neighbors of ``leader`` with precomputed flat indices for scoring.

        Each record is ``(matching, add_lo, add_hi, old_k, rem_lo, rem_hi)``:
        flat table indices of the two couples the swap creates (in pair
        order), of the replaced couple at position k, and of both replaced
        couples (in pair order). The fixed orders keep scores bit-identical
        to the reference scoring functions, ties included.
        """
        recs = self._neighbor_cache.get(leader)
        if recs is None:
            n = 2 * self.L
            recs = []
            for m, (k, e1, e2) in neighborhood_set(leader):
                a, b = leader[k]
                c, d = leader[k + 1]
                new_k = make_pair(e2, b if e1 == a else a)
                new_k1 = make_pair(e1, d if e2 == c else c)
                add_lo, add_hi = sorted((new_k[0] * n + new_k[1], new_k1[0] * n + new_k1[1]))
                rem_lo, rem_hi = sorted((a * n + b, c * n + d))
                recs.append((m, add_lo, add_hi, a * n + b, rem_lo, rem_hi))
            if len(self._neighbor_cache) > 10000:
                self._neighbor_cache.clear()
            self._neighbor_cache[leader] = recs
        return recs


def g_argmax(stats: PairStats, players: Iterable[int]) -> OrderedMatching:
    """Greedy best matching: repeatedly take the pair with the highest mean.

    Couples are appended in pick order, so the result is an ordered matching.
    Ties go to the lexicographically smallest pair. This is an approximation
    of the exact reward argmax, not the argmax itself.
    """
    ps = sorted(players)
    if len(ps) % 2:
        raise ValueError(f"need an even number of players, got {len(ps)}")
    n = stats.n
    means = stats.means
    ranked = sorted(
        (-means[i * n + j], i, j)
        for ai, i in enumerate(ps)
        for j in ps[ai + 1:]
    )
    alive = [False] * n
    for p in ps:
        alive[p] = True
    couples = []
    need = len(ps) // 2
    for _neg, i, j in ranked:
        if alive[i] and alive[j]:
            alive[i] = alive[j] = False
            couples.append((i, j))
            if len(couples) == need:
                break
    return tuple(couples)


def v1_score(candidate: Matching, leader: OrderedMatching, q: Mapping[Pair, float]) -> float:
    """Total-optimistic-value advantage of ``candidate`` over the leader.

    Sums the index values of the pairs the candidate adds, minus those of
    the pairs it drops; common pairs cancel, so at most four values matter.
    The leader's own matching scores 0.
    """
    leader_pairs = set(set_of(leader))
    candidate_pairs = set(candidate)
    added = sorted(p for p in candidate_pairs if p not in leader_pairs)
    removed = sorted(p for p in leader_pairs if p not in candidate_pairs)
    gained = 0.0
    for p in added:
        gained += q[p]
    if gained == INF:
        return INF
    lost = 0.0
    for p in removed:
        lost += q[p]
    return gained - lost


def v2_score(d: SwapDescriptor, leader: OrderedMatching, q: Mapping[Pair, float]) -> float:
    """Clamped optimistic improvement of the swap ``d`` applied to the leader.

    With the swap replacing couple k = {e1, x} and couple k + 1 = {e2, y} by
    {e2, x} and {e1, y}, the score is the larger of the two new couples'
    index advantages over the replaced couple k, clamped at zero.
    """
    k, e1, e2 = d
    a, b = leader[k]
    c, e = leader[k + 1]
    new_k = make_pair(e2, b if e1 == a else a)
    new_k1 = make_pair(e1, e if e2 == c else c)
    old = q[leader[k]]
    return max(0.0, q[new_k] - old, q[new_k1] - old)


def _q_table_flat(state: PolicyState, t: int, leader_clock: int, indices_needed) -> dict:
    """Index values for the given flat pair indices, under the state's index kind."""
    counts = state.pair_stats.counts
    means = state.pair_stats.means
    out = {}
    if state.index_kind is IndexKind.SIMPLE_UCB:
        two_log_t = 2.0 * math.log(t) if t > 1 else 0.0
        for idx in indices_needed:
            s = counts[idx]
            out[idx] = INF if s == 0 else means[idx] + math.sqrt(two_log_t / s)
    else:
        for idx in indices_needed:
            out[idx] = klucb_index(means[idx], counts[idx], leader_clock)
    return out


def grab_recommend(state: PolicyState, t: int) -> tuple[Matching, GrabDecision]:
    """One GRAB round: elect the leader, then pick what to play.

    The leader's own matching is played whenever its election count (before
    this round) is a multiple of 2L - 1; otherwise the leader and its swap
    neighborhood compete under the state's scoring criterion. Ties favor the
    leader, then earlier neighbors in enumeration order.
    """
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    L = state.L
    leader = g_argmax(state.pair_stats, range(2 * L))
    elections = state.leader_stats.count(leader)
    leader_set = set_of(leader)
    if elections % (2 * L - 1) == 0:
        return leader_set, GrabDecision(leader, True, None)

    recs = state.neighbor_records(leader)
    needed = set()
    for _m, add_lo, add_hi, old_k, rem_lo, rem_hi in recs:
        needed.update((add_lo, add_hi, old_k, rem_lo, rem_hi))
    q = _q_table_flat(state, t, elections + 1, needed)

    best = leader_set
    best_score = 0.0
    scores = [0.0]
    if state.variant == "v1":
        for m, add_lo, add_hi, _old_k, rem_lo, rem_hi in recs:
            gained = q[add_lo] + q[add_hi]
            s = INF if gained == INF else gained - (q[rem_lo] + q[rem_hi])
            scores.append(s)
            if s > best_score:
                best, best_score = m, s
    else:
        for m, add_lo, add_hi, old_k, _rem_lo, _rem_hi in recs:
            old = q[old_k]
            s = max(0.0, q[add_lo] - old, q[add_hi] - old)
            scores.append(s)
            if s > best_score:
                best, best_score = m, s
    return best, GrabDecision(leader, False, tuple(scores))


def policy_update(state: PolicyState, played: Matching, feedback: Mapping[Pair, int],
                  leader: OrderedMatching | None = None) -> PolicyState:
    """Fold one round of semi-bandit feedback into the state.

    Every played couple's count and success sum advance; the elected
    leader's election count advances whether or not its matching was the one
    played. ``feedback`` must cover exactly the played couples.
    """
    if len(feedback) != len(played):
        raise ValueError(f"feedback covers {len(feedback)} couples, matching has {len(played)}")
    stats = state.pair_stats
    n = stats.n
    counts, sums, means = stats.counts, stats.sums, stats.means
    for pair in played:
        try:
            outcome = feedback[pair]
        except KeyError:
            raise ValueError(f"feedback missing played couple {pair}") from None
        if outcome not in (0, 1):
            raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
        i, j = pair
        idx = i * n + j
        counts[idx] += 1
        sums[idx] += outcome
        means[idx] = sums[idx] / counts[idx]
    if leader is not None:
        state.leader_stats.record(leader)
    state.rounds += 1
    return state


def klcombucb_recommend(state: PolicyState, t: int) -> Matching:
    """Exhaustive optimistic baseline: best total KL-UCB index over all arms.

    Scores every matching with the global round ``t`` as index clock; any
    matching containing a never-played pair scores +inf, so the first rounds
    sweep through unexplored supports. Desk scale only (L <= 6).
    """
    counts = state.pair_stats.counts
    means = state.pair_stats.means
    n = state.pair_stats.n
    best = None
    best_score = -INF
    for m in enumerate_matchings(state.L):
        score = 0.0
        for i, j in m:
            idx = i * n + j
            v = klucb_index(means[idx], counts[idx], t)
            if v == INF:
                score = INF
                break
            score += v
        if score > best_score:
            best, best_score = m, score
    return best


def random_recommend(rng, L: int) -> Matching:
    """Uniform matching: pair up a uniformly shuffled player list."""
    players = list(range(2 * L))
    rng.shuffle(players)
    return tuple(sorted(make_pair(players[2 * k], players[2 * k + 1]) for k in range(L)))
