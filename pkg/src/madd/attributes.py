"""Per-agent attribute derivation.

Each agent carries five per-community attributes: interest scores, trust
thresholds, a dissemination tendency computed on demand from the fitted
share-count distribution, a follower-share social influence, and an
hour-of-day activation probability. Regular users get theirs from user
records plus evaluator scoring; bots get pinned procedural values.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from . import rng as rngmod
from .errors import EvaluatorFailure
from .evaluator import EvaluationRequest, Evaluator
from .network import assign_communities
from .powerlaw import PowerLawFit
from .scenario import HOURS_PER_DAY, Scenario, SimulationParams

logger = logging.getLogger(__name__)

KIND_REGULAR = "regular"
KIND_MBOT = "malicious_bot"
KIND_LBOT = "legitimate_bot"
AGENT_KINDS = (KIND_REGULAR, KIND_MBOT, KIND_LBOT)

_HISTORY_SUMMARY_CHARS = 280


@dataclass
class AgentProfile:
    agent_id: str
    kind: str
    interest_scores: dict = field(default_factory=dict)  # community -> [1, 10]
    trust_thresholds: dict = field(default_factory=dict)  # community -> [0, 1]
    social_influence: dict = field(default_factory=dict)  # member community -> share
    activation_probs: tuple = tuple([0.0] * HOURS_PER_DAY)
    share_total: int = 0
    follower_count: int = 0
    history_summary: str = ""
    exposure_counts: dict = field(default_factory=dict)  # content_id -> receipts

    @property
    def is_bot(self) -> bool:
        return self.kind != KIND_REGULAR

    def home_community(self) -> str:
        """Highest-interest community (ties: first in score order)."""
        return max(self.interest_scores, key=lambda c: self.interest_scores[c])

    def to_dict(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "kind": self.kind,
            "interest_scores": dict(self.interest_scores),
            "trust_thresholds": dict(self.trust_thresholds),
            "social_influence": dict(self.social_influence),
            "activation_probs": list(self.activation_probs),
            "share_total": self.share_total,
            "follower_count": self.follower_count,
        }


def normalize_histogram(histogram) -> tuple:
    """Counts to per-step probabilities (sum 1; all-zero falls back uniform)."""
    total = sum(histogram)
    if total <= 0:
        return tuple([1.0 / len(histogram)] * len(histogram))
    return tuple(v / total for v in histogram)


def activation_probability(profile: AgentProfile, t: int, schedule=None) -> float:
    """Chance the agent is active at step t.

    Regular agents read their hour-of-day bucket ((t-1) mod 24); bots are
    active exactly on their scheduled steps.
    """
    if profile.is_bot:
        return 1.0 if schedule is not None and t in schedule else 0.0
    return profile.activation_probs[(t - 1) % HOURS_PER_DAY]


def social_influence(followers) -> dict:
    """Follower-count share per member: f_u / sum(f).

    All-zero followers fall back to a uniform split (logged; the documented
    degenerate-input rule).
    """
    followers = list(followers)
    if not followers:
        raise ValueError("social_influence needs at least one member")
    total = sum(f for _, f in followers)
    if total <= 0:
        logger.warning(
            "all %d members have zero followers; assigning uniform influence",
            len(followers),
        )
        uniform = 1.0 / len(followers)
        return {agent_id: uniform for agent_id, _ in followers}
    return {agent_id: f / total for agent_id, f in followers}


def dissemination_tendency(
    profile: AgentProfile,
    community: str,
    fit: PowerLawFit,
    params: SimulationParams,
    exposure_n: int = 0,
) -> float:
    """Share probability: fitted-CDF and interest mix, damped by re-exposure.

    Bots always return 1. The fitted CDF reads as 0 below x_min, where the
    fit is not trusted.
    """
    if profile.is_bot:
        return 1.0
    ic = profile.interest_scores[community]
    ic_max = max(profile.interest_scores.values())
    cdf = float(fit.cdf(profile.share_total))
    base = params.theta * cdf + (1.0 - params.theta) * (ic / ic_max)
    value = base * math.exp(-params.xi * exposure_n)
    return min(1.0, max(0.0, value))


def _score_user(user, scenario: Scenario, evaluator: Evaluator, kind: str) -> dict:
    texts = tuple(text for _, text in user.historical_texts)
    request = EvaluationRequest(
        kind=kind,
        subject_texts=texts,
        context={
            "user_id": user.user_id,
            "communities": list(scenario.communities),
            "description": user.description,
            "follower_count": user.follower_count,
            "following_count": user.following_count,
        },
    )
    try:
        return evaluator.evaluate(request).scores
    except EvaluatorFailure as exc:
        raise EvaluatorFailure(f"scoring {kind} for user {user.user_id!r}: {exc}") from exc


def _summarize_history(user) -> str:
    joined = " | ".join(text for _, text in user.historical_texts)
    return joined[:_HISTORY_SUMMARY_CHARS]


def _half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def derive_profiles(scenario: Scenario, evaluator: Evaluator) -> list:
    """All agent profiles for a scenario: scored regular users plus the
    per-community bot populations.

    Bot counts are half-up-rounded ratio * community size (minimum one per
    community whenever the ratio is positive). Bot trust thresholds are
    pinned to 1 everywhere; their influence is sampled from the community's
    regular influence values and the whole community is renormalized so
    influence keeps summing to 1.
    """
    params = scenario.params
    seed = params.rng_seed

    profiles: list[AgentProfile] = []
    for user in scenario.users:
        ic = _score_user(user, scenario, evaluator, "interest_community")
        tt = _score_user(user, scenario, evaluator, "trust_threshold")
        profiles.append(
            AgentProfile(
                agent_id=user.user_id,
                kind=KIND_REGULAR,
                interest_scores={c: ic[c] for c in scenario.communities},
                trust_thresholds={c: tt[c] for c in scenario.communities},
                activation_probs=normalize_histogram(user.activity_histogram),
                share_total=user.share_total,
                follower_count=user.follower_count,
                history_summary=_summarize_history(user),
            )
        )

    regular_index = assign_communities(profiles, params.tau, scenario.communities)

    by_id = {p.agent_id: p for p in profiles}
    for community in scenario.communities:
        members = regular_index.get(community, [])
        if not members:
            continue
        influence = social_influence(
            [(agent_id, by_id[agent_id].follower_count) for agent_id in members]
        )
        for agent_id, share in influence.items():
            by_id[agent_id].social_influence[community] = share

    bots: list[AgentProfile] = []
    for community in scenario.communities:
        members = regular_index.get(community, [])
        if not members:
            continue
        regular_si = [by_id[a].social_influence[community] for a in members]
        # bots imitate rank-and-file accounts: sample the sub-median influence
        # values so no bot lands an organic celebrity's hub position
        si_pool = sorted(regular_si)[: max(1, len(regular_si) // 2)]
        for ratio, kind, prefix in (
            (params.malicious_ratio, KIND_MBOT, "mbot"),
            (params.legitimate_ratio, KIND_LBOT, "lbot"),
        ):
            if ratio <= 0.0:
                continue
            count = max(1, _half_up(ratio * len(members)))
            for i in range(count):
                bot_id = f"{prefix}_{community}_{i:03d}"
                rng = rngmod.substream(seed, "bot-si", bot_id)
                bots.append(
                    AgentProfile(
                        agent_id=bot_id,
                        kind=kind,
                        interest_scores={
                            c: (10.0 if c == community else 1.0)
                            for c in scenario.communities
                        },
                        trust_thresholds={c: 1.0 for c in scenario.communities},
                        social_influence={
                            community: float(rng.choice(si_pool))
                        },
                        activation_probs=tuple([0.0] * HOURS_PER_DAY),
                    )
                )

    profiles.extend(bots)

    # bots changed the community totals: renormalize influence to sum 1
    full_index = assign_communities(profiles, params.tau, scenario.communities)
    by_id = {p.agent_id: p for p in profiles}
    for community, members in full_index.items():
        total = sum(by_id[a].social_influence.get(community, 0.0) for a in members)
        if total <= 0:
            continue
        for agent_id in members:
            profile = by_id[agent_id]
            if community in profile.social_influence:
                profile.social_influence[community] /= total

    profiles.sort(key=lambda p: p.agent_id)
    return profiles
