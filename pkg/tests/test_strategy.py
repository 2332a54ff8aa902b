import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netlotto.graph import Graph, bipartite_partition, complete, erdos_renyi, line, ring, star
from netlotto.strategy import (
    CorrelatedStrategy,
    Group,
    attacker_equilibrium,
    attacker_upper_bound,
    cdf,
    defender_equilibrium,
    empirical_cdf,
    sample,
    sample_many,
)

TRIANGLE = Graph(3, ((0, 1), (1, 2), (0, 2)))


def single_group(n, delta, budget=1.0, weights=None):
    weights = weights or [1.0 / n] * n
    return CorrelatedStrategy(n, budget, delta, (Group(1.0, tuple(range(n)), tuple(weights)),))


def test_construction_validates_sums():
    with pytest.raises(ValueError):
        CorrelatedStrategy(2, 1.0, 1.0, (Group(1.0, (0, 1), (0.5, 0.6)),))
    with pytest.raises(ValueError):
        CorrelatedStrategy(2, 1.0, 1.0, (Group(0.7, (0, 1), (0.5, 0.5)),))
    with pytest.raises(ValueError):
        CorrelatedStrategy(2, 1.0, 1.0, (Group(1.0, (0, 1), (1.0, 0.0)),))
    with pytest.raises(ValueError):
        single_group(2, 0.0)


def test_sample_at_top_of_uniform_spends_twice_budget():
    s = single_group(3, 1.0, budget=2.0, weights=[0.5, 0.3, 0.2])

    class TopRng:
        def random(self, size):
            return np.zeros(size)

        def uniform(self, lo, hi, size):
            return np.full(size, hi)

        def choice(self, *a, **k):
            raise AssertionError("single group must not draw a group index")

    z = sample(s, TopRng())
    assert z.sum() == pytest.approx(4.0)
    np.testing.assert_allclose(z / z.sum(), [0.5, 0.3, 0.2])


def test_zero_atom_frequency():
    s = single_group(4, 0.5)
    n = 200_000
    z = sample_many(s, np.random.default_rng(1), n)
    frac = (z.sum(axis=1) == 0).mean()
    assert abs(frac - 0.5) < 3 * np.sqrt(0.25 / n)


def test_cdf_examples():
    s = single_group(4, 0.5)
    assert cdf(s, np.zeros(4)) == pytest.approx(0.5)
    assert cdf(s, np.full(4, 100.0)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        cdf(s, -np.ones(4))


def test_star_defender_cdf_point():
    g = star(6)
    s = defender_equilibrium(g, 6, 6)
    x = np.array([3, 0.6, 0.6, 0.6, 0.6, 0.6])
    # through the degree form: 1 - X/2Y + X|E|/(4Y^2) * min(x_i/d_i, 2Y/|E|)
    by_degrees = 1 - 6 / 12 + 6 * 5 / (4 * 36) * min(min(x / g.degrees), 12 / 5)
    assert by_degrees == pytest.approx(0.625)
    assert cdf(s, x) == pytest.approx(0.625)
    z = sample_many(s, np.random.default_rng(3), 1_000_000)
    assert abs(empirical_cdf(z, x)[0] - 0.625) < 0.01


def test_defender_equilibrium_examples():
    s = defender_equilibrium(star(6), 6, 6)
    assert s.delta == 0.5
    np.testing.assert_allclose(s.weight_matrix[0], [0.5, 0.1, 0.1, 0.1, 0.1, 0.1])
    assert defender_equilibrium(star(6), 10, 2).delta == 1.0
    assert defender_equilibrium(star(6), 4, 2).delta == 1.0  # tie goes to the X >= 2Y branch
    np.testing.assert_allclose(defender_equilibrium(ring(7), 1, 1).weight_matrix[0], 1 / 7)
    with pytest.raises(ValueError):
        defender_equilibrium(star(6), 0, 1)


def test_isolated_nodes_excluded_from_support():
    g = Graph(5, ((0, 1), (1, 2)))
    s = defender_equilibrium(g, 1, 1)
    assert s.groups[0].nodes == (0, 1, 2)
    z = sample_many(s, np.random.default_rng(0), 1000)
    assert (z[:, 3:] == 0).all()
    ub = attacker_upper_bound(g, 1, 1)
    assert all(set(gr.nodes) <= {0, 1, 2} for gr in ub.groups)


def test_attacker_equilibrium_examples():
    g = star(6)
    s = attacker_equilibrium(g, bipartite_partition(g), 6, 6)
    assert s.delta == 1.0
    assert s.groups[0].nodes == (0,) and s.groups[0].weights == (1.0,)
    assert s.groups[1].nodes == (1, 2, 3, 4, 5)
    np.testing.assert_allclose(s.groups[1].weights, 0.2)
    r = ring(6)
    s = attacker_equilibrium(r, bipartite_partition(r), 6, 6)
    for grp in s.groups:
        assert len(grp.nodes) == 3
        np.testing.assert_allclose(grp.weights, 1 / 3)
    s = attacker_equilibrium(g, bipartite_partition(g), 10, 2)
    assert s.delta == pytest.approx(0.4)
    z = sample_many(s, np.random.default_rng(5), 200_000)
    assert abs((z.sum(axis=1) == 0).mean() - 0.6) < 3 * np.sqrt(0.24 / 200_000)


def test_attacker_equilibrium_rejects_wrong_partition():
    g = line(4)
    part = bipartite_partition(ring(4))
    bad = type(part)(frozenset({0, 1}), frozenset({2, 3}))
    with pytest.raises(ValueError):
        attacker_equilibrium(g, bad, 1, 1)


def test_upper_bound_examples():
    s = attacker_upper_bound(TRIANGLE, 1, 1)
    assert s.groups[0].nodes == (1, 2)
    np.testing.assert_allclose(s.groups[0].weights, [0.5, 0.5])
    for n in range(2, 12):
        assert attacker_upper_bound(complete(n), 3, 3).delta == 1.0
    assert attacker_upper_bound(TRIANGLE, 6, 2).delta == pytest.approx(3 * 2 / (2 * 6))
    assert "equilibrium" not in s.name


@given(st.integers(0, 10_000), st.sampled_from([0.2, 0.5, 0.8]))
@settings(max_examples=30, deadline=None)
def test_upper_bound_weights_normalised(seed, p):
    g = erdos_renyi(9, p, seed)
    s = attacker_upper_bound(g, 2, 2)
    for grp in s.groups:
        assert abs(sum(grp.weights) - 1) < 1e-12
    assert abs(s.probs.sum() - 1) < 1e-12


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_defender_weights_permutation_equivariant(seed):
    g = erdos_renyi(8, 0.4, seed)
    perm = np.random.default_rng(seed).permutation(g.n).tolist()
    w = defender_equilibrium(g, 3, 2).weight_matrix[0]
    wp = defender_equilibrium(g.relabel(perm), 3, 2).weight_matrix[0]
    np.testing.assert_allclose(wp[perm], w)


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_attacker_supports_partition_active_nodes(seed):
    from netlotto.graph import random_bipartite

    g = random_bipartite(4, 5, 0.4, seed)
    s = attacker_equilibrium(g, bipartite_partition(g), 2, 3)
    a, b = (set(grp.nodes) for grp in s.groups)
    assert not a & b
    assert a | b == set(g.active_nodes)


def _strategies():
    out = []
    for g in (star(6), ring(6), line(5)):
        part = bipartite_partition(g)
        for X, Y in ((6, 6), (6, 2)):
            out.append(defender_equilibrium(g, X, Y))
            out.append(attacker_equilibrium(g, part, X, Y))
    for g in (TRIANGLE, complete(6), erdos_renyi(10, 0.5, 1)):
        for X, Y in ((2, 2), (6, 2), (2, 6)):
            out.append(attacker_upper_bound(g, X, Y))
    return out


@pytest.mark.parametrize("s", _strategies(), ids=lambda s: f"{s.name}-n{s.n}-d{s.delta:.3g}")
def test_samples_stay_below_support_cap(s):
    rng = np.random.default_rng(0)
    z = sample_many(s, rng, 20_000)
    assert (z <= s.support_cap * (1 + 1e-12)).all()
    base = rng.random(s.n) * s.support_cap
    for i in range(s.n):
        hi = base.copy()
        hi[i] = s.support_cap[i]
        higher = hi.copy()
        higher[i] = 10 * s.support_cap[i] + 1
        assert cdf(s, hi) == pytest.approx(cdf(s, higher), abs=1e-14)


@pytest.mark.parametrize("s", _strategies()[:4], ids=lambda s: f"{s.name}-n{s.n}")
def test_cdf_monotone(s):
    rng = np.random.default_rng(2)
    for _ in range(50):
        z = rng.random(s.n) * s.support_cap
        bump = z.copy()
        bump[rng.integers(s.n)] += rng.random()
        assert cdf(s, bump) >= cdf(s, z) - 1e-15


def test_json_roundtrip():
    s = attacker_upper_bound(TRIANGLE, 6, 2)
    back = CorrelatedStrategy.from_dict(__import__("json").loads(s.to_json()))
    assert back == s
    d = s.to_dict()
    assert set(d) >= {"budget", "delta", "groups"}
    assert set(d["groups"][0]) == {"p", "nodes", "weights"}
