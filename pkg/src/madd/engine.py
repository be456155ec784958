"""Time-stepped propagation engine.

Semantics, fixed for determinism:

* Synchronous rounds: everything sent during step t (bot broadcasts and
  regular shares alike) is delivered when t ends, so an agent activated at
  t reads only messages delivered at steps <= t-1.
* Delivery is where exposure happens: receipts land in the inbox, bump the
  per-item exposure counter, and (for disinformation) flip susceptible
  agents to exposed and re-draw belief at the receiver's current trust.
  A corrective receipt makes an already-exposed receiver re-judge the
  run's claim the same way; belief is re-evaluated on every exposure, so
  infected and uninfected spreader states stay revisitable.
* Activation is where judgment happens: an active regular agent first
  applies the trust update over everything received since its previous
  activation, then decides whether to share the latest received item.
* Sharing classifies exposed agents as infected or uninfected spreaders by
  whether they currently believe the run's disinformation. Non-believers
  pass the item on with a disputing stance, which receivers experience as
  corrective pressure - the spontaneous-debunker channel that operates
  even in control runs.
* Every agent's randomness comes from (seed, purpose, agent, step)
  substreams, so agent processing order cannot perturb results.

Bots are instruments: only bots homed in the run topic's community act,
malicious ones broadcasting the disinformation item on their schedule and
legitimate ones broadcasting the plan's correction inside the intervention
window. Bots never appear in status tallies.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import rng as rngmod
from .attributes import (
    KIND_LBOT,
    KIND_MBOT,
    KIND_REGULAR,
    AgentProfile,
    activation_probability,
    dissemination_tendency,
)
from .content import (
    ContentItem,
    InterventionPlan,
    correction_for,
    is_intervention_active,
    score_plausibility,
)
from .dynamics import (
    DiscernmentInputs,
    TrustUpdateInputs,
    believe_disinformation,
    discernment,
    update_trust,
)
from .errors import EvaluatorFailure, ScheduleConflict, WindowTooSmall
from .evaluator import Evaluator
from .network import PropagationNetwork
from .powerlaw import PowerLawFit, fit_truncated_power_law
from .report import RatioRecord, RunReport, TrustRecord, population_stats
from .scenario import Scenario

STATUS_SUSCEPTIBLE = "susceptible"
STATUS_EXPOSED = "exposed"
SPREADER_INFECTED = "infected_spreader"
SPREADER_UNINFECTED = "uninfected_spreader"

STANCE_ENDORSE = "endorse"
STANCE_DISPUTE = "dispute"

DEFAULT_RECORD_CADENCE = 12


@dataclass(frozen=True)
class Message:
    item: ContentItem
    stance: str
    sender: str
    mode: str  # broadcast | repost | quote
    sent_step: int


@dataclass
class AgentState:
    profile: AgentProfile
    status: str = STATUS_SUSCEPTIBLE
    spreader: str | None = None
    trust: dict = field(default_factory=dict)  # community -> current threshold
    believes: dict = field(default_factory=dict)  # content_id -> bool
    exposure_counts: dict = field(default_factory=dict)  # content_id -> receipts
    judgment_counts: dict = field(default_factory=dict)  # content_id -> belief redraws
    inbox: list = field(default_factory=list)
    outbox: list = field(default_factory=list)  # (step, content_id, stance, mode)
    pending: list = field(default_factory=list)  # receipts since last activation
    last_activation: int = 0


@dataclass
class SimulationState:
    step: int = 0
    agents: dict = field(default_factory=dict)  # agent_id -> AgentState (regular only)
    community_regulars: dict = field(default_factory=dict)  # community -> member ids
    delivery_log: list = field(default_factory=list)  # (step, sender, receiver, content_id, stance)


def snapshot_ratios(state: SimulationState, community: str) -> tuple:
    """(SR, ER, IR, UR) over the community's regular members."""
    members = state.community_regulars[community]
    n = len(members)
    if n == 0:
        return (1.0, 0.0, 0.0, 0.0)
    exposed = infected = uninfected = 0
    for agent_id in members:
        agent = state.agents[agent_id]
        if agent.status == STATUS_EXPOSED:
            exposed += 1
        if agent.spreader == SPREADER_INFECTED:
            infected += 1
        elif agent.spreader == SPREADER_UNINFECTED:
            uninfected += 1
    return (
        (n - exposed) / n,
        exposed / n,
        infected / n,
        uninfected / n,
    )


def build_bot_schedules(
    profiles, params, plan: InterventionPlan, seed: int
) -> dict:
    """Seeded activation-step sets per bot.

    Malicious activation counts draw from the malicious range and land
    anywhere in [1, T]; legitimate counts draw from the legitimate range and
    land inside the plan's window. Control plans produce empty legitimate
    schedules. Counts clamp to the hosting range length; a window shorter
    than the legitimate minimum raises WindowTooSmall.
    """
    total = params.total_steps
    schedules: dict[str, frozenset] = {}
    for profile in sorted(profiles, key=lambda p: p.agent_id):
        if profile.kind == KIND_REGULAR:
            continue
        rng = rngmod.substream(seed, "schedule", profile.agent_id)
        if profile.kind == KIND_MBOT:
            lo, hi = params.malicious_freq_range
            hi = min(hi, total)
            lo = min(lo, hi)
            count = int(rng.integers(lo, hi + 1))
            steps = rng.choice(total, size=count, replace=False) + 1
            schedules[profile.agent_id] = frozenset(int(s) for s in steps)
        else:
            if plan.stage == "control":
                schedules[profile.agent_id] = frozenset()
                continue
            w_lo, w_hi = plan.window
            window_len = w_hi - w_lo + 1
            lo, hi = params.legitimate_freq_range
            if lo > window_len:
                raise WindowTooSmall(window_len, lo)
            hi = min(hi, window_len)
            count = int(rng.integers(lo, hi + 1))
            steps = rng.choice(window_len, size=count, replace=False) + w_lo
            schedules[profile.agent_id] = frozenset(int(s) for s in steps)
    return schedules


def _sender_influence(profile: AgentProfile, community: str) -> float:
    si = profile.social_influence.get(community)
    if si is not None:
        return si
    if profile.social_influence:
        return sum(profile.social_influence.values()) / len(profile.social_influence)
    return 0.0


def run(
    scenario: Scenario,
    network: PropagationNetwork,
    profiles,
    plan: InterventionPlan,
    evaluator: Evaluator,
    seed: int | None = None,
    *,
    topic: str | None = None,
    record_cadence: int = DEFAULT_RECORD_CADENCE,
    collect_trajectories: bool = False,
    progress=None,
    fit: PowerLawFit | None = None,
    schedules: dict | None = None,
    state_out: list | None = None,
) -> RunReport:
    """Simulate one disinformation topic under one intervention plan.

    Inputs are treated as read-only; repeated calls with equal arguments
    produce byte-identical reports. An evaluator failure mid-run aborts and
    returns the records so far with ``complete`` set False. Pass a list as
    ``state_out`` to receive the final SimulationState (appended), for
    inspection and invariant checks.
    """
    params = scenario.params
    if seed is None:
        seed = params.rng_seed
    profiles = sorted(profiles, key=lambda p: p.agent_id)
    by_id = {p.agent_id: p for p in profiles}

    disinfo_src = scenario.disinformation_for(
        topic or _default_topic(scenario)
    )
    topic = disinfo_src.topic
    disinfo = replace(disinfo_src)
    if disinfo.plausibility is None:
        score_plausibility(disinfo, evaluator)

    correction = None
    if plan.strategy != "none":
        correction = correction_for(disinfo, plan.strategy, scenario.content_catalog)

    if schedules is None:
        schedules = build_bot_schedules(profiles, params, plan, seed)
    if plan.stage == "control":
        for profile in profiles:
            if profile.kind == KIND_LBOT and schedules.get(profile.agent_id):
                raise ScheduleConflict(
                    f"legitimate bot {profile.agent_id} has activations under a control plan"
                )

    if fit is None:
        # non-sharers carry no information about the share-count distribution
        fit = fit_truncated_power_law(
            [p.share_total for p in profiles if p.kind == KIND_REGULAR and p.share_total >= 1]
        )

    state = SimulationState()
    state.community_regulars = {
        community: [m for m in members if by_id[m].kind == KIND_REGULAR]
        for community, members in network.community_index.items()
    }
    for profile in profiles:
        if profile.kind == KIND_REGULAR:
            state.agents[profile.agent_id] = AgentState(
                profile=profile, trust=dict(profile.trust_thresholds)
            )

    active_bots = [
        p
        for p in profiles
        if p.is_bot and p.home_community() == topic and schedules.get(p.agent_id)
    ]

    report = RunReport(
        scenario_digest=scenario.digest(),
        seed=int(seed),
        topic=topic,
        plan_stage=plan.stage,
        plan_strategy=plan.strategy,
        record_cadence=record_cadence,
        total_steps=params.total_steps,
        ratios={c: [] for c in network.community_index},
        trust={c: [] for c in network.community_index},
        resource_ledger={},
    )

    def record(step: int) -> None:
        for community in network.community_index:
            sr, er, ir, ur = snapshot_ratios(state, community)
            report.ratios[community].append(RatioRecord(step, sr, er, ir, ur))
            values = [
                state.agents[m].trust[topic]
                for m in state.community_regulars[community]
            ]
            mean, std = population_stats(values)
            report.trust[community].append(TrustRecord(step, mean, std))
        if collect_trajectories:
            for agent_id, agent in state.agents.items():
                report.trajectories.setdefault(agent_id, []).append(
                    (step, agent.trust[topic])
                )
        if progress is not None:
            progress(
                {
                    "event": "record",
                    "step": step,
                    "topic": topic,
                    "stage": plan.stage,
                    "strategy": plan.strategy,
                }
            )

    record(0)
    try:
        for t in range(1, params.total_steps + 1):
            state.step = t
            outgoing: list[tuple[str, Message]] = []

            for bot in active_bots:
                if t not in schedules[bot.agent_id]:
                    continue
                if bot.kind == KIND_LBOT and not is_intervention_active(plan, t):
                    continue
                payload = disinfo if bot.kind == KIND_MBOT else correction
                message = Message(
                    item=payload,
                    stance=STANCE_ENDORSE,
                    sender=bot.agent_id,
                    mode="broadcast",
                    sent_step=t,
                )
                for neighbor in network.neighbors(bot.agent_id):
                    outgoing.append((neighbor, message))

            for agent_id in sorted(state.agents):
                agent = state.agents[agent_id]
                act_rng = rngmod.substream(seed, "act", agent_id, t)
                if act_rng.random() >= activation_probability(agent.profile, t):
                    continue
                _apply_trust_update(agent, by_id, evaluator, params, topic)
                agent.last_activation = t
                if not agent.inbox:
                    continue
                latest = agent.inbox[-1]
                prior_receipts = max(
                    0, agent.exposure_counts.get(latest.item.content_id, 1) - 1
                )
                dt = dissemination_tendency(
                    agent.profile, topic, fit, params, prior_receipts
                )
                if act_rng.random() >= dt:
                    continue
                if latest.item.kind == "disinformation":
                    believes = agent.believes.get(latest.item.content_id, False)
                    stance = STANCE_ENDORSE if believes else STANCE_DISPUTE
                else:
                    stance = STANCE_ENDORSE
                mode = "repost" if act_rng.random() < params.repost_probability else "quote"
                message = Message(
                    item=latest.item,
                    stance=stance,
                    sender=agent_id,
                    mode=mode,
                    sent_step=t,
                )
                for neighbor in network.neighbors(agent_id):
                    outgoing.append((neighbor, message))
                agent.outbox.append((t, latest.item.content_id, stance, mode))
                if agent.status == STATUS_EXPOSED:
                    agent.spreader = (
                        SPREADER_INFECTED
                        if agent.believes.get(disinfo.content_id, False)
                        else SPREADER_UNINFECTED
                    )

            _deliver(state, outgoing, seed, t, topic, disinfo)

            if t % record_cadence == 0 or t == params.total_steps:
                if not report.ratios[topic] or report.ratios[topic][-1].step != t:
                    record(t)
    except EvaluatorFailure:
        report.complete = False

    report.final_states = _final_states(state)
    report.resource_ledger = evaluator.ledger_snapshot()
    report.validate()
    if state_out is not None:
        state_out.append(state)
    return report


def _default_topic(scenario: Scenario) -> str:
    for item in scenario.content_catalog:
        if item.kind == "disinformation":
            return item.topic
    raise ValueError("scenario catalog holds no disinformation item")


def _apply_trust_update(agent, by_id, evaluator, params, topic: str) -> None:
    if not agent.pending:
        return
    # the enhancement/decay sums run over neighbors, not messages: a sender
    # re-delivering since the last activation counts once, through the most
    # recent thing it pushed
    latest_by_sender: dict[str, Message] = {}
    for msg in agent.pending:
        latest_by_sender[msg.sender] = msg
    corr = []
    dis = []
    for sender in sorted(latest_by_sender):
        msg = latest_by_sender[sender]
        si = _sender_influence(by_id[sender], topic)
        strength = evaluator.persuasiveness(
            msg.item.text,
            content_kind=msg.item.kind,
            strategy=msg.item.strategy,
            stance=msg.stance,
            receiver_history=agent.profile.history_summary,
            community=topic,
        )
        if msg.item.kind == "correction" or msg.stance == STANCE_DISPUTE:
            corr.append((si, strength))
        else:
            dis.append((si, strength))
    agent.trust[topic] = update_trust(
        TrustUpdateInputs(
            current_tt=agent.trust[topic],
            corr_neighbors=tuple(corr),
            dis_neighbors=tuple(dis),
            gamma=params.gamma,
            beta=params.beta,
            delta=params.delta,
        )
    )
    agent.pending.clear()


def _deliver(state, outgoing, seed, t, topic, disinfo) -> None:
    for receiver, message in outgoing:
        agent = state.agents.get(receiver)
        if agent is None:  # bots ignore their inboxes
            continue
        agent.inbox.append(message)
        agent.pending.append(message)
        item_id = message.item.content_id
        agent.exposure_counts[item_id] = agent.exposure_counts.get(item_id, 0) + 1
        state.delivery_log.append((t, message.sender, receiver, item_id, message.stance))
        fresh_claim = message.item.kind == "disinformation" and (
            message.stance == STANCE_ENDORSE or agent.status == STATUS_SUSCEPTIBLE
        )
        if fresh_claim:
            # seeing the claim pushed at face value (or for the first time,
            # even inside a disputing quote) re-draws belief both ways
            if agent.status == STATUS_SUSCEPTIBLE:
                agent.status = STATUS_EXPOSED
            da = discernment(
                DiscernmentInputs(
                    updated_tt=agent.trust[topic],
                    plausibility=message.item.plausibility,
                )
            )
            # draws are keyed by the judgment's ordinal for this (agent, item)
            # so plans sharing a seed see aligned randomness until their
            # histories actually diverge
            k = agent.judgment_counts.get(item_id, 0)
            agent.judgment_counts[item_id] = k + 1
            rng = rngmod.substream(seed, "belief", receiver, item_id, k)
            agent.believes[item_id] = believe_disinformation(da, rng)
        elif agent.status == STATUS_EXPOSED and agent.believes.get(
            disinfo.content_id, False
        ):
            # corrective pressure (a correction item, or a disputing quote of
            # a claim already seen) flips a believer on a successful
            # discernment event (probability DA); when it fails to land,
            # belief is unchanged - a rejected debunk never creates a believer
            da = discernment(
                DiscernmentInputs(
                    updated_tt=agent.trust[topic],
                    plausibility=disinfo.plausibility,
                )
            )
            key = "accept:" + disinfo.content_id
            k = agent.judgment_counts.get(key, 0)
            agent.judgment_counts[key] = k + 1
            rng = rngmod.substream(seed, "accept", receiver, disinfo.content_id, k)
            if rng.random() < da:
                agent.believes[disinfo.content_id] = False
        else:
            continue
        if agent.spreader is not None:
            agent.spreader = (
                SPREADER_INFECTED
                if agent.believes.get(disinfo.content_id, False)
                else SPREADER_UNINFECTED
            )


def _final_states(state: SimulationState) -> dict:
    out = {
        STATUS_SUSCEPTIBLE: [],
        STATUS_EXPOSED: [],
        SPREADER_INFECTED: [],
        SPREADER_UNINFECTED: [],
    }
    for agent_id in sorted(state.agents):
        agent = state.agents[agent_id]
        out[agent.status].append(agent_id)
        if agent.spreader is not None:
            out[agent.spreader].append(agent_id)
    return out
