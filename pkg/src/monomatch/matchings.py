"""Matchings of 2L players, ordered matchings, and the adjacent-couple swap graph.

A matching partitions the players 0..2L-1 into L unordered couples. An
ordered matching additionally carries a position order over its couples;
two ordered matchings are adjacent when one is obtained from the other by
exchanging one member each between two consecutive couples.

Representation: a couple is a tuple ``(lo, hi)`` with ``lo < hi``; a
``Matching`` is a tuple of couples sorted lexicographically (canonical,
order-free); an ``OrderedMatching`` is a tuple of couples whose order is
significant. All values are plain immutable tuples, hashable and safe to
share across workers.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

Pair = tuple[int, int]
# Canonical (sorted) tuple of couples: couple order carries no meaning.
Matching = tuple[Pair, ...]
# Tuple of couples whose order is significant.
OrderedMatching = tuple[Pair, ...]


class SwapDescriptor(NamedTuple):
    """Exchange of one member each between couples ``k`` and ``k + 1``.

    ``e1`` is the member taken out of couple ``k``, ``e2`` the member taken
    out of couple ``k + 1``.
    """

    k: int
    e1: int
    e2: int


def make_pair(a: int, b: int) -> tuple[int, int]:
    """Canonical unordered couple: smaller player first."""
    if a == b:
        raise ValueError(f"a couple needs two distinct players, got {a} twice")
    return (a, b) if a < b else (b, a)


def make_matching(pairs: Iterable[Sequence[int]], L: int) -> Matching:
    """Validate and canonicalize a matching of the players 0..2L-1.

    Rejects a wrong couple count, out-of-range players, and players that
    appear more than once (or not at all).
    """
    canon = [make_pair(int(a), int(b)) for a, b in pairs]
    if len(canon) != L:
        raise ValueError(f"expected {L} couples, got {len(canon)}")
    seen: set[int] = set()
    for a, b in canon:
        if not (0 <= a and b < 2 * L):
            raise ValueError(f"player out of range [0, {2 * L}): couple ({a}, {b})")
        if a in seen or b in seen:
            dup = a if a in seen else b
            raise ValueError(f"player {dup} appears in more than one couple")
        seen.add(a)
        seen.add(b)
    return tuple(sorted(canon))


def is_valid_matching(m: Matching, L: int) -> bool:
    """True when ``m`` is a canonical matching of 0..2L-1."""
    try:
        return make_matching(m, L) == tuple(m)
    except (ValueError, TypeError):
        return False


def swap(om: OrderedMatching, d: SwapDescriptor) -> OrderedMatching:
    """Exchange members between two consecutive couples of an ordered matching.

    With couple ``k`` holding ``{e1, x}`` and couple ``k + 1`` holding
    ``{e2, y}``, the result keeps every other couple and replaces the two by
    ``{e2, x}`` and ``{e1, y}``.
    """
    k, e1, e2 = d
    if not 0 <= k < len(om) - 1:
        raise ValueError(f"couple index {k} out of range for L={len(om)}")
    a, b = om[k]
    c, e = om[k + 1]
    if e1 not in (a, b):
        raise ValueError(f"player {e1} is not in couple {k} = {om[k]}")
    if e2 not in (c, e):
        raise ValueError(f"player {e2} is not in couple {k + 1} = {om[k + 1]}")
    keep_k = b if e1 == a else a
    keep_k1 = e if e2 == c else c
    return om[:k] + (make_pair(e2, keep_k), make_pair(e1, keep_k1)) + om[k + 2:]


def set_of(om: OrderedMatching) -> Matching:
    """Forget the couple order: canonical matching of an ordered matching."""
    return tuple(sorted(p if p[0] < p[1] else (p[1], p[0]) for p in om))


def neighborhood_set(om: OrderedMatching) -> list[tuple[Matching, SwapDescriptor]]:
    """Distinct matchings reachable from ``om`` by one adjacent-couple swap.

    The four raw swaps between couples ``k`` and ``k + 1`` collapse to two
    distinct matchings once couple order inside the result is forgotten, so
    the list has exactly ``2L - 2`` entries. Each matching comes with one
    representative descriptor, the lexicographically smallest ``(k, e1, e2)``
    producing it.
    """
    L = len(om)
    if L < 2:
        raise ValueError("need at least two couples to swap")
    out = []
    seen = set()
    for k in range(L - 1):
        for e1 in om[k]:
            for e2 in om[k + 1]:
                d = SwapDescriptor(k, e1, e2)
                m = set_of(swap(om, d))
                if m not in seen:
                    seen.add(m)
                    out.append((m, d))
    return out


def satisfies_pi(om: OrderedMatching, rho) -> bool:
    """True when success probabilities are non-increasing along the couples.

    ``rho`` is any symmetric 2L x 2L table indexable as ``rho[i][j]``.
    Vacuously true for a single couple; equality between consecutive couples
    counts as satisfying the order.
    """
    for k in range(len(om) - 1):
        i, j = om[k]
        a, b = om[k + 1]
        if rho[i][j] < rho[a][b]:
            return False
    return True


def assumption1_holds(theta: Sequence[float]) -> bool:
    """Strict inter-couple order: after sorting players by success rate,
    the weaker member of each couple strictly beats the stronger member of
    the next couple. Ties inside a couple are allowed."""
    s = sorted(theta, reverse=True)
    return all(s[2 * k + 1] > s[2 * k + 2] for k in range(len(s) // 2 - 1))


def optimum_leader(theta: Sequence[float]) -> OrderedMatching:
    """Ordered matching pairing the two best players, then the next two, etc.

    Players need not arrive sorted; they are ranked by descending success
    rate with ties broken by lower index. Couples are emitted best-first,
    which makes the couple-wise success probabilities non-increasing. Raises
    when the strict inter-couple order fails (a tie across a couple
    boundary), since the construction is only unique under that condition.
    """
    n = len(theta)
    if n < 2 or n % 2:
        raise ValueError(f"need an even number (>= 2) of players, got {n}")
    order = sorted(range(n), key=lambda i: (-theta[i], i))
    for k in range(n // 2 - 1):
        if not theta[order[2 * k + 1]] > theta[order[2 * k + 2]]:
            raise ValueError(
                "strict inter-couple order violated: rate "
                f"{theta[order[2 * k + 1]]} of couple {k} does not exceed "
                f"{theta[order[2 * k + 2]]} of couple {k + 1}"
            )
    return tuple(make_pair(order[2 * k], order[2 * k + 1]) for k in range(n // 2))
