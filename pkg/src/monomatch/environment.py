"""Rank-1 Bernoulli matching environment and instance generators.

An instance assigns each of the 2L players a success rate theta_i in [0, 1];
the probability that a couple {i, j} produces a success factorizes as
``rho[i, j] = theta_i * theta_j``. Playing a matching yields one independent
Bernoulli outcome per couple (semi-bandit feedback), stationary across
rounds.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .matchings import Matching, Pair, assumption1_holds, make_pair

# Outcome per played couple, keyed by canonical pair.
FeedbackVector = dict[Pair, int]


@dataclass(frozen=True)
class Instance:
    """Success rates of 2L players plus the induced rank-1 pair probabilities."""

    L: int
    theta: tuple[float, ...]
    label: str = "custom"

    def __post_init__(self):
        if len(self.theta) != 2 * self.L:
            raise ValueError(f"need {2 * self.L} rates for L={self.L}, got {len(self.theta)}")
        for v in self.theta:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"success rates must lie in [0, 1], got {v}")

    @cached_property
    def rho(self) -> np.ndarray:
        """Symmetric pair success probabilities (diagonal is meaningless)."""
        th = np.asarray(self.theta)
        return np.outer(th, th)

    def rho_of(self, i: int, j: int) -> float:
        return self.theta[i] * self.theta[j]

    def expected_reward(self, m: Matching) -> float:
        """Expected number of successes when playing matching ``m``."""
        th = self.theta
        return sum(th[i] * th[j] for i, j in m)

    @cached_property
    def optimal_matching(self) -> Matching:
        """Best-with-best pairing: ranks (1, 2) together, (3, 4) together, etc.

        This pairing maximizes the expected reward for any rank-1 instance,
        ties in theta notwithstanding (the exhaustive oracle cross-checks
        this at desk scale).
        """
        order = sorted(range(2 * self.L), key=lambda i: (-self.theta[i], i))
        return tuple(sorted(make_pair(order[2 * k], order[2 * k + 1]) for k in range(self.L)))

    @cached_property
    def mu_star(self) -> float:
        """Maximum expected reward over all matchings."""
        return self.expected_reward(self.optimal_matching)

    def satisfies_assumption1(self) -> bool:
        return assumption1_holds(self.theta)


def make_exp1_instance(L: int, delta: float) -> Instance:
    """Ladder instance: both members of couple i get rate ``(L - i) * delta``.

    Couple i (1-based) sits exactly ``delta`` above couple i + 1 per player,
    the last couple at rate 0. Requires ``0 < (L - 1) * delta <= 1``.
    """
    if L < 2:
        raise ValueError(f"need L >= 2, got {L}")
    if not 0.0 < (L - 1) * delta <= 1.0:
        raise ValueError(f"need 0 < (L - 1) * delta <= 1, got (L-1)*delta = {(L - 1) * delta}")
    theta = []
    for i in range(1, L + 1):
        theta += [(L - i) * delta] * 2
    return Instance(L, tuple(theta), label=f"exp1-L{L}-d{delta:g}")


def make_exp2_instance(L: int, mu: float, delta: float, relax_constraint: bool = False) -> Instance:
    """Ladder instance centred at ``mu``: couple i at ``mu + ((L+1)/2 - i) * delta``.

    The rates average exactly ``mu`` and consecutive couples are ``delta``
    apart. The documented validity window is ``0 <= mu - (L - 1) * delta``
    and ``mu + (L + 1) * delta <= 1``; pass ``relax_constraint=True`` to
    accept any parameters whose rates still land in [0, 1].
    """
    if L < 2:
        raise ValueError(f"need L >= 2, got {L}")
    if delta <= 0:
        raise ValueError(f"need delta > 0, got {delta}")
    if not relax_constraint:
        if mu - (L - 1) * delta < 0 or mu + (L + 1) * delta > 1:
            raise ValueError(
                f"need 0 <= mu - (L-1)*delta and mu + (L+1)*delta <= 1, got "
                f"{mu - (L - 1) * delta} and {mu + (L + 1) * delta}; "
                "pass relax_constraint=True to only enforce rates in [0, 1]"
            )
    theta = []
    for i in range(1, L + 1):
        theta += [mu + ((L + 1) / 2 - i) * delta] * 2
    return Instance(L, tuple(theta), label=f"exp2-L{L}-m{mu:g}-d{delta:g}")


def random_assumption1_instance(L: int, rng: random.Random,
                                low: float = 0.05, high: float = 0.95) -> Instance:
    """Random instance with strict inter-couple order (redraws on boundary ties)."""
    while True:
        theta = tuple(sorted((rng.uniform(low, high) for _ in range(2 * L)), reverse=True))
        if assumption1_holds(theta):
            return Instance(L, theta, label=f"random-L{L}")


def sample_feedback(inst: Instance, m: Matching, rng: random.Random) -> FeedbackVector:
    """One independent Bernoulli outcome per played couple.

    Couples are drawn in the canonical order of ``m``, so a fixed seed gives
    a reproducible feedback sequence.
    """
    th = inst.theta
    return {(i, j): 1 if rng.random() < th[i] * th[j] else 0 for i, j in m}


def pseudo_regret(inst: Instance, m: Matching) -> float:
    """Expected per-round reward gap of ``m`` against the best matching."""
    return max(0.0, inst.mu_star - inst.expected_reward(m))
