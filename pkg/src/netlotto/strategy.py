"""Correlated allocation strategies.

A correlated strategy with budget ``Z`` picks a support group ``D`` with
probability ``p_D``; with probability ``1 - delta`` it allocates nothing,
otherwise it draws one ``u ~ Uniform[0, 2Z/delta]`` and puts ``w_{D,i} * u``
on every node ``i`` of ``D``. Its joint CDF is

    F(z) = 1 - delta + delta**2 / (2Z) * sum_D p_D * min({z_i / w_{D,i}}_{i in D}, 2Z/delta)

Every named strategy in the package (both bipartite equilibrium strategies
and the vertex-cover attack that caps the defender's security value) is an
instance of this family.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .graph import BipartitePartition, Graph

SUM_TOL = 1e-12


@dataclass(frozen=True)
class Group:
    prob: float
    nodes: tuple[int, ...]
    weights: tuple[float, ...]


@dataclass(frozen=True)
class CorrelatedStrategy:
    n: int
    budget: float
    delta: float
    groups: tuple[Group, ...]
    name: str = "correlated"

    def __post_init__(self):
        if not (np.isfinite(self.budget) and self.budget > 0):
            raise ValueError(f"budget must be positive, got {self.budget}")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if not self.groups:
            raise ValueError("strategy needs at least one group")
        total_p = 0.0
        for g in self.groups:
            if not 0.0 <= g.prob <= 1.0:
                raise ValueError(f"group probability {g.prob} outside [0, 1]")
            if not g.nodes or len(g.nodes) != len(g.weights):
                raise ValueError("group needs matching, nonempty nodes and weights")
            if len(set(g.nodes)) != len(g.nodes) or not all(0 <= i < self.n for i in g.nodes):
                raise ValueError(f"bad support {g.nodes} for n={self.n}")
            if min(g.weights) <= 0:
                raise ValueError("weights must be strictly positive")
            if abs(sum(g.weights) - 1.0) > SUM_TOL:
                raise ValueError(f"group weights sum to {sum(g.weights)!r}, not 1")
            total_p += g.prob
        if abs(total_p - 1.0) > SUM_TOL:
            raise ValueError(f"group probabilities sum to {total_p!r}, not 1")

    @property
    def u_max(self) -> float:
        """Upper end of the shared uniform draw, ``2Z/delta``."""
        return 2.0 * self.budget / self.delta

    @cached_property
    def probs(self) -> np.ndarray:
        return np.array([g.prob for g in self.groups])

    @cached_property
    def weight_matrix(self) -> np.ndarray:
        """Dense ``(groups, n)`` weights; zero off the support."""
        w = np.zeros((len(self.groups), self.n))
        for k, g in enumerate(self.groups):
            w[k, list(g.nodes)] = g.weights
        w.setflags(write=False)
        return w

    @cached_property
    def support_cap(self) -> np.ndarray:
        """Largest amount any sample can put on each node."""
        return self.u_max * self.weight_matrix.max(axis=0)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "budget": self.budget,
            "delta": self.delta,
            "groups": [
                {"p": g.prob, "nodes": list(g.nodes), "weights": list(g.weights)}
                for g in self.groups
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "CorrelatedStrategy":
        groups = tuple(
            Group(float(g["p"]), tuple(int(i) for i in g["nodes"]), tuple(float(w) for w in g["weights"]))
            for g in d["groups"]
        )
        return cls(int(d["n"]), float(d["budget"]), float(d["delta"]), groups, d.get("name", "correlated"))


def sample_many(s: CorrelatedStrategy, rng: np.random.Generator, size: int) -> np.ndarray:
    """``(size, n)`` array of independent allocations drawn from ``s``.

    Draw order per call is fixed: group indices, then the activity coin, then
    the shared uniform.
    """
    k = rng.choice(len(s.groups), size=size, p=s.probs) if len(s.groups) > 1 else np.zeros(size, dtype=np.int64)
    active = rng.random(size) < s.delta
    u = rng.uniform(0.0, s.u_max, size=size) * active
    return s.weight_matrix[k] * u[:, None]


def sample(s: CorrelatedStrategy, rng: np.random.Generator) -> np.ndarray:
    return sample_many(s, rng, 1)[0]


def cdf(s: CorrelatedStrategy, z) -> float | np.ndarray:
    """Closed-form joint CDF ``P(Z <= z)``; accepts one point or a batch."""
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    z = np.atleast_2d(z)
    if z.shape[1] != s.n:
        raise ValueError(f"expected allocations of length {s.n}, got {z.shape[1]}")
    if (z < 0).any():
        raise ValueError("cdf is defined for nonnegative allocations only")
    total = np.zeros(z.shape[0])
    for g in s.groups:
        ratios = z[:, list(g.nodes)] / np.asarray(g.weights)
        total += g.prob * np.minimum(ratios.min(axis=1), s.u_max)
    out = 1.0 - s.delta + s.delta**2 / (2.0 * s.budget) * total
    return float(out[0]) if single else out


def empirical_cdf(samples: np.ndarray, z) -> np.ndarray:
    z = np.atleast_2d(np.asarray(z, dtype=float))
    return np.array([(samples <= zi).all(axis=1).mean() for zi in z])


# named strategies ---------------------------------------------------------

def _check_budgets(X: float, Y: float) -> None:
    if not (X > 0 and Y > 0):
        raise ValueError(f"budgets must be positive, got X={X}, Y={Y}")


def defender_equilibrium(g: Graph, X: float, Y: float) -> CorrelatedStrategy:
    """Degree-proportional defender strategy with budget ``X``.

    It is the equilibrium strategy on bipartite graphs and guarantees the
    bipartite equilibrium payoff as a floor on every graph.
    """
    _check_budgets(X, Y)
    delta = X / (2 * Y) if X < 2 * Y else 1.0
    nodes = g.active_nodes
    two_e = 2 * g.num_edges
    weights = tuple(g.degrees[i] / two_e for i in nodes)
    return CorrelatedStrategy(g.n, float(X), delta, (Group(1.0, nodes, weights),), "defender_equilibrium")


def attacker_equilibrium(g: Graph, part: BipartitePartition, X: float, Y: float) -> CorrelatedStrategy:
    """Attacker equilibrium strategy on a bipartite graph, budget ``Y``.

    Picks one side of the partition with probability 1/2 and spreads ``u``
    over it in proportion to degree.
    """
    _check_budgets(X, Y)
    part.validate(g)
    delta = 1.0 if X < 2 * Y else 2 * Y / X
    e = g.num_edges
    groups = []
    for side in (part.part1, part.part2):
        nodes = tuple(i for i in sorted(side) if g.degrees[i] > 0)
        groups.append(Group(0.5, nodes, tuple(g.degrees[i] / e for i in nodes)))
    return CorrelatedStrategy(g.n, float(Y), delta, tuple(groups), "attacker_equilibrium")


def upper_bound_delta(n: int, X: float, Y: float) -> float:
    return n * Y / ((n - 1) * X) if X >= n * Y / (n - 1) else 1.0


def attacker_upper_bound(g: Graph, X: float, Y: float) -> CorrelatedStrategy:
    """Vertex-cover attack with budget ``Y`` on an arbitrary graph.

    Each cover ``V \\ {k}`` is chosen with probability ``1/n``. Node ``i``
    gets weight ``d_i / 2|E|``, or ``(d_i + 1) / 2|E|`` when ``k`` is one of
    its neighbors, so every cover's weights sum to one. This strategy holds
    the defender to at most ``gamma_n``; it is not an equilibrium strategy.
    """
    _check_budgets(X, Y)
    n, two_e = g.n, 2 * g.num_edges
    groups = []
    for k in range(n):
        nodes, weights = [], []
        for i in range(n):
            if i == k or g.degrees[i] == 0:
                continue
            bump = 1 if k in g.adjacency[i] else 0
            nodes.append(i)
            weights.append((g.degrees[i] + bump) / two_e)
        groups.append(Group(1.0 / n, tuple(nodes), tuple(weights)))
    return CorrelatedStrategy(n, float(Y), upper_bound_delta(n, X, Y), tuple(groups), "attacker_upper_bound")
