import math

import numpy as np
import pytest

from madd.attributes import AgentProfile, KIND_REGULAR
from madd.errors import CommunityTooSmall
from madd.network import (
    PropagationNetwork,
    assign_communities,
    build_network,
    community_overlap_matrix,
    degree_distribution,
)
from madd.scenario import SimulationParams


def profile(agent_id, ic, si=None):
    return AgentProfile(
        agent_id=agent_id,
        kind=KIND_REGULAR,
        interest_scores=dict(ic),
        social_influence=dict(si or {}),
    )


COMMUNITIES = ["c1", "c2", "c3", "c4", "c5", "c6"]


class TestAssignCommunities:
    def test_threshold_rule(self):
        ic = dict(zip(COMMUNITIES, [9, 3, 8, 2, 1, 1]))
        index = assign_communities([profile("u", ic)], tau=8, communities=COMMUNITIES)
        assert index["c1"] == ["u"] and index["c3"] == ["u"]
        assert all(index[c] == [] for c in ("c2", "c4", "c5", "c6"))

    def test_argmax_fallback_lowest_index(self):
        ic = dict(zip(COMMUNITIES, [5, 5, 5, 5, 5, 5]))
        index = assign_communities([profile("u", ic)], tau=8, communities=COMMUNITIES)
        assert index["c1"] == ["u"]
        assert all(index[c] == [] for c in COMMUNITIES[1:])

    def test_threshold_floor_puts_everyone_everywhere(self):
        ic = dict(zip(COMMUNITIES, [1, 2, 3, 4, 5, 6]))
        index = assign_communities([profile("u", ic)], tau=1, communities=COMMUNITIES)
        assert all(index[c] == ["u"] for c in COMMUNITIES)


def uniform_profiles(n, community="only", seed=0):
    rng = np.random.default_rng(seed)
    followers = rng.zipf(2.5, size=n) * 40
    total = followers.sum()
    return [
        profile(
            f"n{i:04d}",
            {community: 10.0},
            {community: followers[i] / total},
        )
        for i in range(n)
    ]


class TestBuildNetwork:
    def test_exact_edge_count_small(self):
        members = uniform_profiles(10)
        index = {"only": [p.agent_id for p in members]}
        params = SimulationParams(m0=5, m=2)
        net = build_network(members, index, params, seed=1)
        assert len(net.edges) == math.comb(5, 2) + 5 * 2

    def test_two_members_single_edge(self):
        members = uniform_profiles(2)
        index = {"only": [p.agent_id for p in members]}
        params = SimulationParams(m0=2, m=1)
        net = build_network(members, index, params, seed=1)
        assert len(net.edges) == 1

    def test_community_too_small(self):
        members = uniform_profiles(3)
        index = {"only": [p.agent_id for p in members]}
        with pytest.raises(CommunityTooSmall):
            build_network(members, index, SimulationParams(m0=5, m=2), seed=1)

    def test_deterministic_under_seed(self):
        members = uniform_profiles(200, seed=5)
        index = {"only": [p.agent_id for p in members]}
        params = SimulationParams(m0=5, m=2)
        a = build_network(members, index, params, seed=77)
        b = build_network(members, index, params, seed=77)
        assert a.edge_list() == b.edge_list()

    def test_each_arrival_adds_m_edges(self):
        members = uniform_profiles(50, seed=2)
        index = {"only": [p.agent_id for p in members]}
        params = SimulationParams(m0=4, m=3)
        net = build_network(members, index, params, seed=3)
        assert len(net.edges) == math.comb(4, 2) + (50 - 4) * 3

    def test_no_self_loops_or_duplicates(self):
        members = uniform_profiles(120, seed=8)
        index = {"only": [p.agent_id for p in members]}
        net = build_network(members, index, SimulationParams(m0=5, m=3), seed=9)
        assert all(a != b for a, b in net.edges)
        assert len(net.edges) == len(set(net.edges))

    def test_influence_attracts_degree(self):
        """Hubs should be high-influence members nearly always."""
        failures = 0
        for seed in range(20):
            members = uniform_profiles(500, seed=seed)
            index = {"only": [p.agent_id for p in members]}
            net = build_network(members, index, SimulationParams(m0=5, m=2), seed=seed)
            top = max(net.nodes, key=net.degree)
            ranked = sorted(
                members, key=lambda p: p.social_influence["only"], reverse=True
            )
            median_cut = {p.agent_id for p in ranked[: len(ranked) // 2]}
            if top not in median_cut:
                failures += 1
        assert failures <= 2


class TestDegreeDistribution:
    def test_star_graph_histogram(self):
        net = PropagationNetwork()
        net.add_node("hub", KIND_REGULAR)
        for i in range(6):
            net.add_node(f"leaf{i}", KIND_REGULAR)
            net.add_edge("hub", f"leaf{i}")
        histogram, fit = degree_distribution(net)
        assert histogram == {1: 6, 6: 1}
        assert fit is None  # far too small to fit

    def test_complete_graph_degrees(self):
        net = PropagationNetwork()
        for i in range(5):
            net.add_node(f"k{i}", KIND_REGULAR)
        for i in range(5):
            for j in range(i + 1, 5):
                net.add_edge(f"k{i}", f"k{j}")
        histogram, _ = degree_distribution(net)
        assert histogram == {4: 5}

    def test_grown_network_has_power_law_tail(self):
        members = uniform_profiles(1000, seed=4)
        index = {"only": [p.agent_id for p in members]}
        net = build_network(members, index, SimulationParams(m0=5, m=2), seed=4)
        _, fit = degree_distribution(net, min_degree=2)
        assert fit is not None
        assert 2.2 <= fit.alpha <= 3.5


class TestOverlapMatrix:
    def test_disjoint_communities_diagonal_only(self):
        index = {"a": ["u1", "u2"], "b": ["u3"]}
        matrix = community_overlap_matrix(index)
        assert matrix.tolist() == [[2, 0], [0, 1]]

    def test_single_shared_member(self):
        index = {"a": ["u1", "u2"], "b": ["u2", "u3", "u4"]}
        matrix = community_overlap_matrix(index)
        assert matrix[0, 1] == 1 and matrix[1, 0] == 1
        assert matrix[0, 0] == 2 and matrix[1, 1] == 3

    def test_symmetric_for_any_input(self, small_world):
        _, _, index, _, _ = small_world
        matrix = community_overlap_matrix(index)
        assert np.array_equal(matrix, matrix.T)


def test_intra_density_exceeds_inter_density(paper_world):
    """Edges only form inside communities, so pairs sharing a community must
    be denser than pairs that share none."""
    _, profiles, index, net, _ = paper_world
    membership = {}
    for community, members in index.items():
        for m in members:
            membership.setdefault(m, set()).add(community)
    intra_edges = 0
    inter_edges = 0
    for a, b in net.edges:
        if membership[a] & membership[b]:
            intra_edges += 1
        else:
            inter_edges += 1
    nodes = net.nodes
    same = 0
    cross = 0
    for i, a in enumerate(nodes):
        for b in nodes[i + 1 :]:
            if membership[a] & membership[b]:
                same += 1
            else:
                cross += 1
    intra_density = intra_edges / same
    inter_density = inter_edges / cross if cross else 0.0
    assert intra_density > inter_density
