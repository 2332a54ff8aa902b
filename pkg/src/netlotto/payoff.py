"""Payoffs: pure-strategy payoff, Monte Carlo estimates and closed-form values."""
from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from .graph import Graph
from .strategy import CorrelatedStrategy, sample_many

CHUNK = 1 << 16
CAP_RTOL = 1e-12


class TieRule(str, enum.Enum):
    DEFENDER = "defender_wins_ties"
    ATTACKER = "attacker_wins_ties"

    @classmethod
    def parse(cls, s: "str | TieRule") -> "TieRule":
        if isinstance(s, TieRule):
            return s
        key = s.strip().lower()
        for rule in cls:
            if key in (rule.value, rule.value.split("_")[0]):
                return rule
        raise ValueError(f"unknown tie rule {s!r}; use 'defender' or 'attacker'")


@dataclass(frozen=True)
class PayoffEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int

    def band(self, k: float = 3.0) -> tuple[float, float]:
        return self.mean - k * self.std_error, self.mean + k * self.std_error


Side = Union[CorrelatedStrategy, np.ndarray]


def node_wins(x: np.ndarray, y: np.ndarray, tie: TieRule) -> np.ndarray:
    """Boolean mask of nodes the defender wins."""
    return x >= y if tie is TieRule.DEFENDER else x > y


def secured_edges(x, y, g: Graph, tie: TieRule = TieRule.DEFENDER) -> np.ndarray:
    """Number of edges whose both endpoints the defender wins (batched)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != g.n or y.shape[-1] != g.n:
        raise ValueError(f"allocations must have length n={g.n}")
    win = node_wins(x, y, TieRule.parse(tie))
    ea = g.edge_array
    return (win[..., ea[:, 0]] & win[..., ea[:, 1]]).sum(axis=-1)


def pure_payoff(x, y, g: Graph, tie: TieRule = TieRule.DEFENDER) -> float:
    """Fraction of edges secured by the defender; the attacker gets the rest."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (g.n,) or y.shape != (g.n,):
        raise ValueError(f"allocations must have shape ({g.n},), got {x.shape} and {y.shape}")
    return int(secured_edges(x, y, g, tie)) / g.num_edges


def _draw(side: Side, rng: np.random.Generator, size: int) -> np.ndarray:
    if isinstance(side, CorrelatedStrategy):
        return sample_many(side, rng, size)
    return np.broadcast_to(side, (size, side.shape[0]))


def _chunk_sums(fx, fy, g, tie, seed, index, size):
    rng = np.random.default_rng([seed, index])
    xs = _draw(fx, rng, size)
    ys = _draw(fy, rng, size)
    k = secured_edges(xs, ys, g, tie).astype(np.int64)
    return int(k.sum()), int((k * k).sum())


def monte_carlo_payoff(
    fx: Side,
    fy: Side,
    g: Graph,
    tie: TieRule = TieRule.DEFENDER,
    samples: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> PayoffEstimate:
    """Estimate the defender's expected payoff.

    Samples are split into fixed-size chunks; chunk ``c`` draws from
    ``default_rng([seed, c])``. Secured-edge counts are integers, so the
    reduction is exact and the estimate does not depend on ``workers``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    tie = TieRule.parse(tie)
    for side in (fx, fy):
        if isinstance(side, CorrelatedStrategy):
            if side.n != g.n:
                raise ValueError("strategy and graph disagree on n")
        elif np.shape(side) != (g.n,) or (np.asarray(side) < 0).any():
            raise ValueError("pure allocations must be nonnegative vectors of length n")
    fx = fx if isinstance(fx, CorrelatedStrategy) else np.asarray(fx, dtype=float)
    fy = fy if isinstance(fy, CorrelatedStrategy) else np.asarray(fy, dtype=float)
    e = g.num_edges

    if not isinstance(fx, CorrelatedStrategy) and not isinstance(fy, CorrelatedStrategy):
        return PayoffEstimate(pure_payoff(fx, fy, g, tie), 0.0, samples, seed)

    jobs = [(c, min(CHUNK, samples - c * CHUNK)) for c in range(-(-samples // CHUNK))]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _chunk_sums(fx, fy, g, tie, seed, *j), jobs))
    else:
        parts = [_chunk_sums(fx, fy, g, tie, seed, *j) for j in jobs]
    s = sum(p[0] for p in parts)
    ss = sum(p[1] for p in parts)
    mean = s / (samples * e)
    if samples > 1:
        var = (samples * ss - s * s) / (e * e * samples * (samples - 1))
        se = float(np.sqrt(max(var, 0.0) / samples))
    else:
        se = 0.0
    return PayoffEstimate(mean, se, samples, seed)


# closed forms -------------------------------------------------------------

def _check_nonneg(X, Y):
    if X < 0 or Y < 0:
        raise ValueError(f"budgets must be nonnegative, got X={X}, Y={Y}")


def gamma(X: float, Y: float) -> float:
    """Defender's equilibrium payoff on any bipartite graph."""
    _check_nonneg(X, Y)
    if Y == 0:
        return 1.0
    if X == 0:
        return 0.0
    return 1.0 - Y / X if X >= 2 * Y else X / (4 * Y)


def gamma_n(n: int, X: float, Y: float) -> float:
    """Upper bound on the defender's security value on any ``n``-node graph."""
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n}")
    _check_nonneg(X, Y)
    if Y == 0:
        return 1.0
    if X == 0:
        return 0.0
    if X >= n * Y / (n - 1):
        return 1.0 - n * Y / (2 * (n - 1) * X)
    return (n - 1) / (2 * n) * X / Y


def _check_caps(v: np.ndarray, caps: np.ndarray, who: str) -> None:
    if (v < 0).any():
        raise ValueError(f"{who} allocation must be nonnegative")
    over = v > caps * (1 + CAP_RTOL) + 1e-300
    if over.any():
        i = int(np.flatnonzero(over)[0])
        raise ValueError(f"{who} allocation {v[i]} at node {i} exceeds the support cap {caps[i]}; truncate first")


def equilibrium_caps(g: Graph, X: float, Y: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-node support caps ``(defender_cap, attacker_cap)`` of the
    bipartite equilibrium pair. A best response never needs to exceed the
    opponent's cap on any node."""
    d_over_e = g.degrees / g.num_edges
    if X < 2 * Y:
        return 2 * Y * d_over_e, 2 * Y * d_over_e
    return X * d_over_e, X * d_over_e


def truncate(v, caps) -> np.ndarray:
    return np.minimum(np.asarray(v, dtype=float), caps)


def analytic_value_vs_attacker_eq(x, g: Graph, X: float, Y: float) -> float:
    """Exact defender payoff of pure ``x`` against the attacker equilibrium
    strategy (ties to the defender).

    Requires ``x`` within the attacker's support caps; the value is then
    linear in the total allocation.
    """
    x = np.asarray(x, dtype=float)
    if X <= 0 or Y <= 0:
        raise ValueError("budgets must be positive")
    _check_caps(x, equilibrium_caps(g, X, Y)[1], "defender")
    total = float(x[list(g.active_nodes)].sum())
    if X < 2 * Y:
        return total / (4 * Y)
    return 1.0 - 2 * Y / X + Y / X**2 * total


def analytic_value_vs_defender_eq(y, g: Graph, X: float, Y: float) -> float:
    """Exact attacker payoff of pure ``y`` against the defender equilibrium
    strategy (ties to the defender).

    Per edge the defender holds both endpoints with probability
    ``delta * (1 - delta * m / 2X)`` where ``m = 2|E| max(y_i/d_i, y_j/d_j)``,
    plus the zero-atom mass ``1 - delta`` when the attacker leaves both
    endpoints empty.
    """
    y = np.asarray(y, dtype=float)
    if X <= 0 or Y <= 0:
        raise ValueError("budgets must be positive")
    _check_caps(y, equilibrium_caps(g, X, Y)[0], "attacker")
    e = g.num_edges
    ea = g.edge_array
    d = g.degrees
    ratio = np.zeros(g.n)
    act = d > 0
    ratio[act] = y[act] / d[act]
    m = np.maximum(ratio[ea[:, 0]], ratio[ea[:, 1]])
    if X >= 2 * Y:
        return float(m.sum() / X)
    delta = X / (2 * Y)
    both_empty = int(((y[ea[:, 0]] == 0) & (y[ea[:, 1]] == 0)).sum())
    return float(1.0 - delta + X / (4 * Y * Y) * m.sum() - (1.0 - delta) * both_empty / e)


def random_capped_allocations(rng: np.random.Generator, caps: np.ndarray, budget: float, count: int) -> list[np.ndarray]:
    """Random pure allocations with ``x <= caps`` and ``sum(x) <= budget``.

    About a third of the draws are scaled to spend the whole budget so that
    deviations near the boundary are exercised too.
    """
    out = []
    for _ in range(count):
        x = caps * rng.random(caps.size)
        if rng.random() < 0.2:
            x[rng.random(caps.size) < 0.3] = 0.0
        total = x.sum()
        if total > budget or (rng.random() < 0.35 and total > 0 and caps.sum() >= budget):
            x *= budget / total
            x = np.minimum(x, caps)
        out.append(x)
    return out
