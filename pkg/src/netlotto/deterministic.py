"""Deterministic defender allocations and the attacker's coverage response.

Against a pure defender allocation ``x``, a pure attacker wins node ``i`` by
matching ``x_i`` (ties to the attacker, the limit of outbidding by epsilon).
Its best response is then a budgeted maximum coverage problem: choose nodes
of total cost at most ``Y`` covering as many edges as possible.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, bipartite_partition, edges_covered
from .payoff import TieRule, gamma, node_wins, pure_payoff

BUDGET_RTOL = 1e-12
MAX_BRUTE_FORCE_N = 24


def _fits(cost: float, budget: float) -> bool:
    return cost <= budget + BUDGET_RTOL * max(1.0, abs(budget))


def degree_proportional(g: Graph, X: float) -> np.ndarray:
    """Heuristic defender allocation ``x_i = X * d_i / 2|E|``.

    Not known to be optimal among deterministic allocations.
    """
    return X * g.degrees / (2.0 * g.num_edges)


@dataclass(frozen=True)
class GreedyStep:
    node: int
    ratio: float
    accepted: bool


@dataclass(frozen=True)
class GreedyTrace:
    response: np.ndarray
    secured_nodes: frozenset[int]
    covered_edges: int
    chose_single_node: bool
    steps: tuple[GreedyStep, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "response": self.response.tolist(),
            "secured_nodes": sorted(self.secured_nodes),
            "covered_edges": int(self.covered_edges),
            "chose_single_node": self.chose_single_node,
            "steps": [
                {"node": s.node, "ratio": s.ratio if math.isfinite(s.ratio) else "inf", "accepted": s.accepted}
                for s in self.steps
            ],
        }


def greedy_response(x, Y: float, g: Graph) -> GreedyTrace:
    """Greedy budgeted-max-coverage response to the pure allocation ``x``.

    Repeatedly takes the candidate with the best newly-covered-edges per unit
    cost (cheapest node on ties, then lowest index), keeps it if the running
    cost stays within ``Y``, and drops it from the candidates either way.
    Zero-cost nodes rank first. The result is compared against the best
    single affordable node and the better of the two is returned.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n,) or (x < 0).any():
        raise ValueError(f"x must be a nonnegative vector of length {g.n}")
    if Y < 0:
        raise ValueError("Y must be nonnegative")

    gain = g.degrees.astype(np.int64).copy()
    candidate = np.ones(g.n, dtype=bool)
    chosen: list[int] = []
    steps = []
    while candidate.any():
        idx = np.flatnonzero(candidate)
        cost = x[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(cost > 0, gain[idx] / np.where(cost > 0, cost, 1.0), np.inf)
        best = ratio.max()
        if np.isinf(best):
            tied = idx[np.isinf(ratio)]
        else:
            tied = idx[ratio >= best * (1 - 1e-12)]
        u = int(tied[np.argmin(x[tied])])
        accepted = _fits(math.fsum(x[chosen]) + x[u] if chosen else x[u], Y)
        if accepted:
            chosen.append(u)
            for j in g.adjacency[u]:
                gain[j] -= 1
        candidate[u] = False
        steps.append(GreedyStep(u, float(best), bool(accepted)))

    covered_greedy = edges_covered(g, chosen)
    single = _best_single_node(x, Y, g)
    single_cov = g.degrees[single] if single is not None else 0
    use_single = bool(single is not None and single_cov > covered_greedy)
    y = np.zeros(g.n)
    secured = [single] if use_single else chosen
    y[secured] = x[secured]
    won = np.flatnonzero(~node_wins(x, y, TieRule.ATTACKER))
    return GreedyTrace(y, frozenset(secured), edges_covered(g, won.tolist()), use_single, tuple(steps))


def _best_single_node(x: np.ndarray, Y: float, g: Graph) -> int | None:
    """Highest-degree node the attacker can afford (lowest index on ties)."""
    best = None
    for i in range(g.n):
        if _fits(x[i], Y) and (best is None or g.degrees[i] > g.degrees[best]):
            best = i
    return best


def brute_force_response(x, Y: float, g: Graph, tie: TieRule = TieRule.ATTACKER) -> tuple[int, frozenset[int]]:
    """Exact attacker coverage by enumerating every node subset.

    With ``tie=ATTACKER`` a subset is affordable when its cost is at most
    ``Y``; with ``tie=DEFENDER`` the attacker must strictly outbid, so it
    needs cost below ``Y`` (or the empty set). Returns the best coverage and
    the optimal subset that is smallest, then lexicographically first.
    """
    x = np.asarray(x, dtype=float)
    n = g.n
    if n > MAX_BRUTE_FORCE_N:
        raise ValueError(f"brute force is capped at n={MAX_BRUTE_FORCE_N}, got n={n}")
    if x.shape != (n,) or (x < 0).any():
        raise ValueError(f"x must be a nonnegative vector of length {n}")
    tie = TieRule.parse(tie)

    cost = np.zeros(1)
    inside = np.zeros(1, dtype=np.int16)
    for b in range(n):
        lower = np.arange(1 << b, dtype=np.uint32)
        nbr = sum(1 << j for j in g.adjacency[b] if j < b)
        cost = np.concatenate([cost, cost + x[b]])
        inside = np.concatenate([inside, inside + np.bitwise_count(lower & np.uint32(nbr)).astype(np.int16)])
    # edges left uncovered by S are those inside the complement of S
    covered = g.num_edges - inside[::-1].astype(np.int64)
    tol = BUDGET_RTOL * max(1.0, abs(Y))
    if tie is TieRule.ATTACKER:
        feasible = cost <= Y + tol
    else:
        feasible = cost < Y - tol
        feasible[0] = True
    best = int(covered[feasible].max())
    masks = np.flatnonzero(feasible & (covered == best)).astype(np.uint32)
    sizes = np.bitwise_count(masks)
    masks = masks[sizes == sizes.min()]
    subsets = [tuple(i for i in range(n) if (int(m) >> i) & 1) for m in masks]
    return best, frozenset(min(subsets))


class Certificate(str, enum.Enum):
    POSITIVE = "positive"
    ZERO = "zero"
    UNKNOWN = "unknown"


def positivity_certificate(g: Graph, X: float, Y: float) -> Certificate:
    """Sign of the defender's deterministic security value, where decidable.

    Bipartite graphs are positive iff ``Y <= X/2``; complete graphs iff
    ``Y <= (n-1)X/n``. Any graph is zero above ``(n-1)X/n`` and positive at
    or below ``X/2``; between the two it is left undecided.
    """
    if not (X > 0 and Y > 0):
        raise ValueError("budgets must be positive")
    upper = (g.n - 1) * X / g.n
    if bipartite_partition(g) is not None:
        return Certificate.POSITIVE if Y <= X / 2 else Certificate.ZERO
    if g.is_complete():
        return Certificate.POSITIVE if Y <= upper else Certificate.ZERO
    if Y > upper:
        return Certificate.ZERO
    if Y <= X / 2:
        return Certificate.POSITIVE
    return Certificate.UNKNOWN


@dataclass(frozen=True)
class RatioRow:
    Y: float
    u_det: float
    gamma: float
    ratio: float
    flagged: bool = False


def ratio_row(g: Graph, X: float, Y: float, tie: TieRule) -> RatioRow:
    x = degree_proportional(g, X)
    trace = greedy_response(x, Y, g)
    u = pure_payoff(x, trace.response, g, TieRule.parse(tie))
    gam = gamma(X, Y)
    if gam > 0:
        return RatioRow(Y, u, gam, u / gam)
    return RatioRow(Y, u, gam, math.nan, flagged=True)


def ratio_experiment(g: Graph, X: float, Y_grid, tie: TieRule) -> list[RatioRow]:
    """Deterministic-to-randomized performance ratio along ``Y_grid``.

    ``u_det`` is the payoff of the degree-proportional allocation against the
    greedy response; the benchmark is ``gamma(X, Y)``.
    """
    grid = list(Y_grid)
    if not grid:
        raise ValueError("Y grid must be nonempty")
    return [ratio_row(g, X, float(Y), tie) for Y in grid]
