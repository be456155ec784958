"""Propagation-network construction: community assignment plus
influence-weighted preferential attachment.

Communities come from thresholding interest scores (members may overlap;
users clearing the threshold nowhere fall back to their top-interest
community so nobody is silently dropped). Within each community the first
m0 members, in descending-influence arrival order, form a complete seed
graph; every later member attaches to m distinct existing members drawn
sequentially without replacement with probability proportional to their
influence restricted to the members present. Cross-community connectivity
arises solely from users who belong to several communities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from . import rng as rngmod
from .errors import CommunityTooSmall, DegenerateSamples, InsufficientData
from .powerlaw import PowerLawFit, fit_truncated_power_law

if TYPE_CHECKING:
    from .attributes import AgentProfile
    from .scenario import SimulationParams


@dataclass
class PropagationNetwork:
    """Undirected diffusion graph over agents, with community labels."""

    kinds: dict = field(default_factory=dict)  # agent_id -> agent kind
    edges: set = field(default_factory=set)  # frozenset pairs -> stored as sorted tuples
    community_index: dict = field(default_factory=dict)  # community -> sorted members
    _adjacency: dict = field(default_factory=dict, repr=False)

    @property
    def nodes(self) -> list:
        return sorted(self.kinds)

    def add_node(self, agent_id: str, kind: str) -> None:
        self.kinds.setdefault(agent_id, kind)
        self._adjacency.setdefault(agent_id, set())

    def add_edge(self, a: str, b: str) -> None:
        if a == b:
            raise ValueError(f"self-loop on {a!r}")
        pair = (a, b) if a < b else (b, a)
        if pair in self.edges:
            return
        self.edges.add(pair)
        self._adjacency[a].add(b)
        self._adjacency[b].add(a)

    def has_edge(self, a: str, b: str) -> bool:
        return ((a, b) if a < b else (b, a)) in self.edges

    def neighbors(self, agent_id: str) -> list:
        return sorted(self._adjacency.get(agent_id, ()))

    def degree(self, agent_id: str) -> int:
        return len(self._adjacency.get(agent_id, ()))

    def edge_list(self) -> list:
        return sorted(self.edges)

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "agent_id": agent_id,
                    "kind": self.kinds[agent_id],
                    "communities": sorted(
                        c for c, members in self.community_index.items() if agent_id in set(members)
                    ),
                }
                for agent_id in self.nodes
            ],
            "edges": [list(pair) for pair in self.edge_list()],
            "communities": {c: list(members) for c, members in self.community_index.items()},
        }

    def edge_text(self) -> str:
        return "\n".join(f"{a}\t{b}" for a, b in self.edge_list()) + "\n"


def assign_communities(profiles, tau: float, communities=None) -> dict:
    """Threshold rule: u joins every community whose interest score clears
    tau; users clearing none join their top-interest community (ties go to
    the earliest community in the configured order)."""
    profiles = list(profiles)
    if communities is None:
        communities = list(profiles[0].interest_scores) if profiles else []
    index: dict[str, list] = {c: [] for c in communities}
    for profile in profiles:
        hits = [c for c in communities if profile.interest_scores[c] >= tau]
        if not hits:
            best = max(communities, key=lambda c: profile.interest_scores[c])
            # max() keeps the earliest maximal community in list order
            hits = [best]
        for community in hits:
            index[community].append(profile.agent_id)
    return {c: sorted(members) for c, members in index.items()}


def build_network(
    profiles,
    community_index: dict,
    params: "SimulationParams",
    seed: int | None = None,
) -> PropagationNetwork:
    """Grow the network community by community (deterministic under seed).

    Arrival order within a community is descending influence, ties by
    agent_id: influential accounts predate their followers.
    """
    if seed is None:
        seed = params.rng_seed
    by_id = {p.agent_id: p for p in profiles}
    network = PropagationNetwork()
    for community, members in community_index.items():
        for agent_id in members:
            network.add_node(agent_id, by_id[agent_id].kind)
    network.community_index = {c: sorted(m) for c, m in community_index.items()}

    for community in community_index:
        members = community_index[community]
        if len(members) < params.m0:
            raise CommunityTooSmall(community, len(members), params.m0)
        order = sorted(
            members,
            key=lambda a: (-by_id[a].social_influence.get(community, 0.0), a),
        )
        rng = rngmod.substream(seed, "network", community)

        seeds = order[: params.m0]
        for i, a in enumerate(seeds):
            for b in seeds[i + 1 :]:
                network.add_edge(a, b)

        present = list(seeds)
        weights = [by_id[a].social_influence.get(community, 0.0) for a in present]
        for agent_id in order[params.m0 :]:
            targets = _draw_without_replacement(
                rng, present, weights, min(params.m, len(present))
            )
            for target in targets:
                network.add_edge(target, agent_id)
            present.append(agent_id)
            weights.append(by_id[agent_id].social_influence.get(community, 0.0))
    return network


def _draw_without_replacement(rng, items: list, weights: list, count: int) -> list:
    """Sequential weighted draws with renormalization after each pick."""
    available = list(range(len(items)))
    w = np.asarray(weights, dtype=np.float64)
    picks = []
    for _ in range(count):
        sub = w[available]
        total = sub.sum()
        if total <= 0.0:
            probs = np.full(len(available), 1.0 / len(available))
        else:
            probs = sub / total
        choice = int(rng.choice(len(available), p=probs))
        picks.append(items[available[choice]])
        available.pop(choice)
    return picks


def degree_distribution(network: PropagationNetwork, min_degree: int = 1):
    """Degree histogram plus the fitted tail exponent.

    The tail fit reuses the truncated power-law MLE on degrees >= min_degree
    (pass the construction parameter m to study only attachment-grown mass);
    it returns None when the degree sample can't support a fit.
    """
    degrees = [network.degree(agent_id) for agent_id in network.nodes]
    histogram: dict[int, int] = {}
    for d in degrees:
        histogram[d] = histogram.get(d, 0) + 1
    tail = [d for d in degrees if d >= max(1, min_degree)]
    try:
        fit: PowerLawFit | None = fit_truncated_power_law(tail)
    except (InsufficientData, DegenerateSamples):
        fit = None
    return dict(sorted(histogram.items())), fit


def community_overlap_matrix(community_index: dict) -> np.ndarray:
    """Symmetric JxJ membership-overlap counts; diagonal = community sizes."""
    communities = list(community_index)
    sets = [set(community_index[c]) for c in communities]
    n = len(communities)
    matrix = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i, n):
            overlap = len(sets[i] & sets[j])
            matrix[i, j] = overlap
            matrix[j, i] = overlap
    return matrix
