"""Scalar confidence indices for Bernoulli pair observations.

Two index families are supported: the KL-UCB upper index (largest mean
consistent with the observations at an exploration budget of
``log t + 3 log log t``) and a simplified UCB index
``mean + sqrt(2 log t / pulls)``.
"""

from __future__ import annotations

import math
from enum import Enum

INF = math.inf

# Absolute tolerance on the bisection interval, and iteration cap.
BISECTION_TOL = 1e-9
BISECTION_MAX_ITER = 100

_TOP = math.nextafter(1.0, 0.0)
# One-slot budget memo: within a round every index shares the same clock.
_budget_memo = (0, 0.0)


class IndexKind(str, Enum):
    """Which optimistic index a policy feeds into its candidate scores."""

    KL_UCB = "kl-ucb"
    SIMPLE_UCB = "simple-ucb"


def _check_unit(value: float, name: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def kl(p: float, q: float) -> float:
    """Kullback-Leibler divergence between Bernoulli(p) and Bernoulli(q).

    Uses the conventions 0 * log(0/x) = 0, so kl(0, 0) = kl(1, 1) = 0, and
    returns +inf when q is 0 or 1 while p differs from it.
    """
    _check_unit(p, "p")
    _check_unit(q, "q")
    if p == q:
        return 0.0
    if q <= 0.0 or q >= 1.0:
        return INF
    out = 0.0
    if p > 0.0:
        out += p * math.log(p / q)
    if p < 1.0:
        out += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return out


def exploration_budget(t: float) -> float:
    """Exploration allowance ``log t + 3 log log t``, clamped at zero.

    The raw value is negative (or undefined) for t in {1, 2}; clamping keeps
    the feasible set of the KL-UCB index non-empty.
    """
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if t == 1:
        return 0.0
    lt = math.log(t)
    return max(0.0, lt + 3.0 * math.log(lt))


def klucb_index(rho_hat: float, s: int, t: float) -> float:
    """Largest mean p in [rho_hat, 1] with ``s * kl(rho_hat, p)`` inside budget.

    Returns +inf when the pair was never pulled (s = 0), so unexplored pairs
    dominate every finite score. Returns 1.0 when even the largest
    representable mean below one fits the budget (the exact supremum is then
    closer to 1 than a double can express). Otherwise the unique interior
    root is found by bisection.
    """
    global _budget_memo
    _check_unit(rho_hat, "rho_hat")
    if s < 0:
        raise ValueError(f"pull count must be >= 0, got {s}")
    if s == 0:
        return INF
    if _budget_memo[0] == t:
        budget = _budget_memo[1]
    else:
        budget = exploration_budget(t)
        _budget_memo = (t, budget)
    if rho_hat >= 1.0:
        return 1.0
    log = math.log
    p = rho_hat
    one_m_p = 1.0 - p
    target = budget / s
    # Quadratic lower bound on the divergence caps the root, shrinking the
    # initial bracket; the small slack absorbs rounding of the cap itself.
    cap = p + math.sqrt(0.5 * target) * 1.000000001 + 1e-12
    top = _TOP
    if cap >= top:
        if s * kl(p, top) <= budget:
            return 1.0
        cap = top
    lo, hi = p, cap
    g_lo = 0.0
    resid_tol = 1e-9 / s
    # kl(p, q) = entropy_term(p) - p log q - (1 - p) log(1 - q)
    entropy_term = (p * log(p) if p > 0.0 else 0.0) + one_m_p * log(one_m_p)
    for _ in range(BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = entropy_term - p * log(mid) - one_m_p * log(1.0 - mid)
        if g_mid > target:
            hi = mid
        else:
            lo = mid
            g_lo = g_mid
        if hi - lo <= BISECTION_TOL and target - g_lo <= resid_tol:
            break
    if target - g_lo > resid_tol:
        # The crossing sits so close to 1 that one float step moves the
        # divergence past the residual contract; saturate.
        return 1.0
    return lo


def simple_ucb(rho_hat: float, s: int, t: float) -> float:
    """Empirical mean plus the exploration bonus ``sqrt(2 log t / s)``.

    Returns +inf for an unexplored pair (s = 0). The value can exceed 1; it
    is a score, not a probability.
    """
    _check_unit(rho_hat, "rho_hat")
    if s < 0:
        raise ValueError(f"pull count must be >= 0, got {s}")
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if s == 0:
        return INF
    return rho_hat + math.sqrt(2.0 * math.log(t) / s)
