import math
import random

import numpy as np
import pytest

from monomatch.environment import Instance, random_assumption1_instance, sample_feedback
from monomatch.indices import IndexKind, klucb_index
from monomatch.matchings import neighborhood_set, optimum_leader, set_of
from monomatch.oracle import enumerate_matchings
from monomatch.policies import (
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

INF = math.inf


def stats_from_rho(theta, pulls=10000):
    """Stats whose empirical means equal the true pair probabilities."""
    n = len(theta)
    table = np.outer(theta, theta)
    return PairStats.from_means(table, pulls=pulls)


def random_means_stats(rng, n, pulls=100):
    table = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            table[i, j] = table[j, i] = rng.randrange(pulls + 1) / pulls
    return PairStats.from_means(table, pulls=pulls)


class TestPairStats:
    def test_first_update(self):
        stats = PairStats(4)
        stats.record(0, 1, 1)
        stats.record(2, 3, 0)
        assert stats.count(0, 1) == 1 and stats.mean(0, 1) == 1.0
        assert stats.count(2, 3) == 1 and stats.mean(2, 3) == 0.0
        assert stats.count(0, 2) == 0 and stats.mean(0, 2) == 0.0

    def test_symmetric_accessors(self):
        stats = PairStats(4)
        stats.record(3, 1, 1)
        assert stats.count(1, 3) == stats.count(3, 1) == 1
        assert stats.mean(1, 3) == 1.0

    def test_rejects_bad_outcome(self):
        with pytest.raises(ValueError):
            PairStats(4).record(0, 1, 2)

    def test_mean_matrix_roundtrip(self):
        rng = random.Random(0)
        stats = random_means_stats(rng, 6)
        mat = stats.mean_matrix()
        assert mat[1, 4] == stats.mean(1, 4)
        assert np.allclose(mat, mat.T)


class TestGArgmax:
    def test_exact_stats_recover_best_pairing(self):
        theta = (0.4, 0.3, 0.2, 0.1)
        leader = g_argmax(stats_from_rho(theta), range(4))
        assert leader == optimum_leader(theta)

    def test_greedy_is_not_exhaustive(self):
        table = np.zeros((4, 4))
        table[0, 2] = table[2, 0] = 0.6
        table[0, 1] = table[1, 0] = 0.5
        table[2, 3] = table[3, 2] = 0.55
        table[1, 3] = table[3, 1] = 0.1
        stats = PairStats.from_means(table, pulls=20)
        leader = g_argmax(stats, range(4))
        assert leader == ((0, 2), (1, 3))
        greedy_total = 0.6 + 0.1
        best_total = max(sum(table[i, j] for i, j in m) for m in enumerate_matchings(2))
        assert best_total == pytest.approx(1.05)
        assert greedy_total < best_total

    def test_fresh_start_tie_break(self):
        assert g_argmax(PairStats(8), range(8)) == ((0, 1), (2, 3), (4, 5), (6, 7))

    def test_odd_player_count_rejected(self):
        with pytest.raises(ValueError):
            g_argmax(PairStats(4), {0, 1, 2})

    def test_subset_of_players(self):
        theta = (0.4, 0.3, 0.2, 0.1, 0.0, 0.0)
        leader = g_argmax(stats_from_rho(theta), {1, 2, 3, 4})
        assert leader == ((1, 2), (3, 4))

    def test_monotone_transform_invariance(self):
        rng = random.Random(3)
        for _ in range(50):
            L = rng.choice((2, 3, 4))
            stats = random_means_stats(rng, 2 * L)
            raised = PairStats(2 * L)
            raised.counts = list(stats.counts)
            raised.sums = list(stats.sums)
            # strictly increasing map of the means
            raised.means = [(m + 1.0) ** 2 for m in stats.means]
            assert g_argmax(stats, range(2 * L)) == g_argmax(raised, range(2 * L))


class TestV1Score:
    def q_table(self, values):
        return values

    def test_leader_scores_zero(self):
        leader = ((0, 1), (2, 3))
        q = {(0, 1): 0.5, (2, 3): 0.4}
        assert v1_score(set_of(leader), leader, q) == 0.0

    def test_four_term_difference(self):
        leader = ((0, 1), (2, 3))
        q = {(1, 2): 0.9, (0, 3): 0.2, (0, 1): 0.5, (2, 3): 0.4}
        assert v1_score(((0, 3), (1, 2)), leader, q) == pytest.approx(0.2)

    def test_equals_full_sum_argmax(self):
        rng = random.Random(4)
        for _ in range(50):
            L = rng.choice((2, 3, 4))
            om = tuple(
                tuple(sorted(c))
                for c in zip(*(iter(rng.sample(range(2 * L), 2 * L)),) * 2)
            )
            q = {}
            for i in range(2 * L):
                for j in range(i + 1, 2 * L):
                    q[(i, j)] = rng.random()
            candidates = [set_of(om)] + [m for m, _ in neighborhood_set(om)]
            by_score = max(candidates, key=lambda m: (round(v1_score(m, om, q), 12), -candidates.index(m)))
            by_total = max(candidates, key=lambda m: (round(sum(q[p] for p in m), 12), -candidates.index(m)))
            assert by_score == by_total

    def test_unplayed_pair_dominates(self):
        leader = ((0, 1), (2, 3))
        q = {(1, 2): INF, (0, 3): 0.2, (0, 1): 0.5, (2, 3): 0.4}
        assert v1_score(((0, 3), (1, 2)), leader, q) == INF


class TestV2Score:
    def test_clamped_at_zero(self):
        leader = ((0, 1), (2, 3))
        q = {(0, 1): 0.9, (2, 3): 0.1, (1, 2): 0.3, (0, 3): 0.2}
        from monomatch.matchings import SwapDescriptor
        assert v2_score(SwapDescriptor(0, 0, 2), leader, q) == 0.0

    def test_direct_value(self):
        # couple k = {i, i'} = (0, 1), couple k+1 = {j, j'} = (2, 3)
        leader = ((0, 1), (2, 3))
        from monomatch.matchings import SwapDescriptor
        q = {(0, 1): 0.5, (2, 3): 0.1, (0, 3): 0.8, (1, 2): 0.6}
        # swapping 0 and 2 creates couples (1, 2) and (0, 3)
        assert v2_score(SwapDescriptor(0, 0, 2), leader, q) == pytest.approx(0.3)

    def test_unplayed_new_pair_is_infinite(self):
        leader = ((0, 1), (2, 3))
        from monomatch.matchings import SwapDescriptor
        q = {(0, 1): 0.5, (2, 3): 0.1, (0, 3): INF, (1, 2): 0.6}
        assert v2_score(SwapDescriptor(0, 0, 2), leader, q) == INF

    def test_invariant_under_complementary_descriptor(self):
        # the two descriptors producing the same neighbor score identically
        rng = random.Random(5)
        from monomatch.matchings import SwapDescriptor, swap
        for _ in range(50):
            q = {}
            for i in range(4):
                for j in range(i + 1, 4):
                    q[(i, j)] = rng.random()
            leader = ((0, 1), (2, 3))
            d1 = SwapDescriptor(0, 0, 2)
            d2 = SwapDescriptor(0, 1, 3)
            assert set_of(swap(leader, d1)) == set_of(swap(leader, d2))
            assert v2_score(d1, leader, q) == pytest.approx(v2_score(d2, leader, q))


class TestGrabRecommend:
    def test_first_round_plays_tiebreak_leader(self):
        state = PolicyState.fresh(2, "v1", IndexKind.SIMPLE_UCB)
        played, decision = grab_recommend(state, 1)
        assert played == ((0, 1), (2, 3))
        assert decision.forced_leader_play
        assert decision.leader == ((0, 1), (2, 3))

    def test_candidate_set_of_three_when_not_forced(self):
        theta = (0.4, 0.3, 0.2, 0.1)
        state = PolicyState.fresh(2, "v1", IndexKind.SIMPLE_UCB)
        state.pair_stats = stats_from_rho(theta)
        leader = optimum_leader(theta)
        state.leader_stats.record(leader)  # one election: not a multiple of 3
        played, decision = grab_recommend(state, 2)
        candidates = {set_of(leader)} | {m for m, _ in neighborhood_set(leader)}
        assert played in candidates
        assert not decision.forced_leader_play
        assert len(decision.scores) == 1 + 2  # leader + 2L - 2 neighbors

    def test_unplayed_neighbor_pair_forces_exploration(self):
        theta = (0.4, 0.3, 0.2, 0.1)
        state = PolicyState.fresh(2, "v1", IndexKind.SIMPLE_UCB)
        state.pair_stats = stats_from_rho(theta)
        leader = optimum_leader(theta)
        state.leader_stats.record(leader)
        # erase one cross pair entirely
        idx = 0 * 4 + 3
        state.pair_stats.counts[idx] = 0
        state.pair_stats.sums[idx] = 0
        state.pair_stats.means[idx] = 0.0
        played, decision = grab_recommend(state, 2)
        assert (0, 3) in played
        assert INF in decision.scores

    def test_forced_play_every_2l_minus_1_elections(self):
        theta = (0.9, 0.8, 0.5, 0.4, 0.2, 0.1)
        inst = Instance(3, theta)
        state = PolicyState.fresh(3, "v2", IndexKind.SIMPLE_UCB)
        # heavy exact stats freeze the leader
        state.pair_stats = stats_from_rho(theta, pulls=10**6)
        leader = optimum_leader(theta)
        rng = random.Random(0)
        plays = []
        for t in range(1, 16):
            played, decision = grab_recommend(state, t)
            assert decision.leader == leader
            plays.append(played == set_of(leader) and decision.forced_leader_play)
            policy_update(state, played, sample_feedback(inst, played, rng), decision.leader)
        # elections 0, 5, 10 are forced (2L - 1 = 5)
        assert [i for i, forced in enumerate(plays) if forced] == [0, 5, 10]

    def test_recommendation_always_in_candidate_set(self):
        rng = random.Random(6)
        for _ in range(30):
            L = rng.choice((2, 3, 4))
            inst = random_assumption1_instance(L, rng)
            variant = rng.choice(("v1", "v2"))
            kind = rng.choice((IndexKind.SIMPLE_UCB, IndexKind.KL_UCB))
            state = PolicyState.fresh(L, variant, kind)
            feedback_rng = random.Random(rng.random())
            for t in range(1, 40):
                played, decision = grab_recommend(state, t)
                allowed = {set_of(decision.leader)}
                allowed.update(m for m, _ in neighborhood_set(decision.leader))
                assert played in allowed
                policy_update(state, played, sample_feedback(inst, played, feedback_rng),
                              decision.leader)

    def test_matches_reference_scores(self):
        # the inlined scoring agrees with the public scoring functions
        rng = random.Random(7)
        for variant in ("v1", "v2"):
            for _ in range(20):
                L = rng.choice((2, 3))
                state = PolicyState.fresh(L, variant, IndexKind.SIMPLE_UCB)
                state.pair_stats = random_means_stats(rng, 2 * L, pulls=50)
                leader = g_argmax(state.pair_stats, range(2 * L))
                state.leader_stats.counts[leader] = 1
                state.leader_stats.total = 1
                t = rng.randrange(2, 100)
                played, decision = grab_recommend(state, t)
                q = {}
                for i in range(2 * L):
                    for j in range(i + 1, 2 * L):
                        s = state.pair_stats.count(i, j)
                        q[(i, j)] = (
                            INF if s == 0
                            else state.pair_stats.mean(i, j) + math.sqrt(2 * math.log(t) / s)
                        )
                nbrs = neighborhood_set(leader)
                if variant == "v1":
                    ref = [0.0] + [v1_score(m, leader, q) for m, _ in nbrs]
                else:
                    ref = [0.0] + [v2_score(d, leader, q) for _, d in nbrs]
                assert decision.scores == pytest.approx(ref)
                best_idx = max(range(len(ref)), key=lambda i: (ref[i], -i))
                expected = set_of(leader) if best_idx == 0 else nbrs[best_idx - 1][0]
                assert played == expected


class TestPolicyUpdate:
    def test_counts_and_means(self):
        state = PolicyState.fresh(2, "v1")
        played = ((0, 1), (2, 3))
        policy_update(state, played, {(0, 1): 1, (2, 3): 0}, ((0, 1), (2, 3)))
        assert state.pair_stats.count(0, 1) == 1
        assert state.pair_stats.mean(0, 1) == 1.0
        assert state.pair_stats.mean(2, 3) == 0.0
        assert state.pair_stats.count(0, 2) == 0
        assert state.leader_stats.count(((0, 1), (2, 3))) == 1
        assert state.rounds == 1

    def test_mismatched_feedback_rejected(self):
        state = PolicyState.fresh(2, "v1")
        with pytest.raises(ValueError):
            policy_update(state, ((0, 1), (2, 3)), {(0, 1): 1}, None)
        with pytest.raises(ValueError):
            policy_update(state, ((0, 1), (2, 3)), {(0, 1): 1, (0, 2): 0}, None)

    def test_total_pulls_is_rounds_times_couples(self):
        rng = random.Random(8)
        inst = random_assumption1_instance(3, rng)
        state = PolicyState.fresh(3, "v2", IndexKind.SIMPLE_UCB)
        for t in range(1, 101):
            played, decision = grab_recommend(state, t)
            policy_update(state, played, sample_feedback(inst, played, rng), decision.leader)
        assert state.pair_stats.total_pulls() == 100 * 3
        assert state.leader_stats.total == 100
        assert state.rounds == 100


class TestKlCombUcb:
    def test_initial_rounds_sweep_supports(self):
        inst = Instance(2, (0.4, 0.3, 0.2, 0.1))
        state = PolicyState.fresh(2, "v1", IndexKind.KL_UCB)
        rng = random.Random(0)
        seen = []
        for t in range(1, 4):
            played = klcombucb_recommend(state, t)
            seen.append(played)
            policy_update(state, played, sample_feedback(inst, played, rng), None)
        assert seen == enumerate_matchings(2)

    def test_converged_stats_return_best_matching(self):
        theta = (0.4, 0.3, 0.2, 0.1)
        state = PolicyState.fresh(2, "v1", IndexKind.KL_UCB)
        state.pair_stats = stats_from_rho(theta, pulls=10**6)
        inst = Instance(2, theta)
        assert klcombucb_recommend(state, 100) == inst.optimal_matching

    def test_scoring_matches_index_sum(self):
        rng = random.Random(9)
        state = PolicyState.fresh(2, "v1", IndexKind.KL_UCB)
        state.pair_stats = random_means_stats(rng, 4, pulls=30)
        t = 50
        played = klcombucb_recommend(state, t)
        def total(m):
            return sum(klucb_index(state.pair_stats.mean(i, j),
                                   state.pair_stats.count(i, j), t) for i, j in m)
        best = max(enumerate_matchings(2), key=total)
        assert total(played) == pytest.approx(total(best))


class TestRandomRecommend:
    def test_uniform_over_small_arm_set(self):
        rng = random.Random(10)
        counts = {m: 0 for m in enumerate_matchings(2)}
        n = 10**5
        for _ in range(n):
            counts[random_recommend(rng, 2)] += 1
        sigma = math.sqrt((1 / 3) * (2 / 3) / n)
        for m, c in counts.items():
            assert abs(c / n - 1 / 3) < 3 * sigma + 1e-9, (m, c / n)

    def test_output_is_valid_matching(self):
        rng = random.Random(11)
        from monomatch.matchings import make_matching
        for L in (2, 3, 5):
            for _ in range(20):
                m = random_recommend(rng, L)
                assert make_matching(m, L) == m

    def test_seed_reproducibility(self):
        a = [random_recommend(random.Random(12), 3) for _ in range(5)]
        b = [random_recommend(random.Random(12), 3) for _ in range(5)]
        assert a == b
