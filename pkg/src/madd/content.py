"""Disinformation items, corrective content and intervention plans."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NoCorrectionAvailable, RangeViolation
from .evaluator import EvaluationRequest, Evaluator

CONTENT_KINDS = ("disinformation", "correction")
STRATEGIES = ("none", "fact_based", "narrative_based")
STAGES = ("early", "mid", "late", "control")


@dataclass
class ContentItem:
    """One message in circulation: a false claim or a correction for one.

    ``plausibility`` exists only for disinformation; it may arrive unset and
    is filled in by :func:`score_plausibility` before a simulation starts,
    after which the catalog is treated as immutable.
    """

    content_id: str
    topic: str
    kind: str
    strategy: str = "none"
    text: str = ""
    plausibility: float | None = None

    def __post_init__(self):
        if self.kind not in CONTENT_KINDS:
            raise RangeViolation("kind", self.kind, f"one of {CONTENT_KINDS}")
        if self.strategy not in STRATEGIES:
            raise RangeViolation("strategy", self.strategy, f"one of {STRATEGIES}")
        if self.kind == "correction" and self.strategy == "none":
            raise RangeViolation("strategy", self.strategy, "correction requires a strategy")
        if self.kind == "disinformation" and self.strategy != "none":
            raise RangeViolation("strategy", self.strategy, "disinformation carries no strategy")
        if self.kind == "correction" and self.plausibility is not None:
            raise RangeViolation("plausibility", self.plausibility, "only disinformation is scored")
        if self.plausibility is not None and not 0.0 <= self.plausibility <= 1.0:
            raise RangeViolation("plausibility", self.plausibility, "[0, 1]")

    def to_dict(self) -> dict:
        out = {
            "content_id": self.content_id,
            "topic": self.topic,
            "kind": self.kind,
            "strategy": self.strategy,
            "text": self.text,
        }
        if self.plausibility is not None:
            out["plausibility"] = self.plausibility
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ContentItem":
        return cls(
            content_id=data["content_id"],
            topic=data["topic"],
            kind=data["kind"],
            strategy=data.get("strategy", "none"),
            text=data.get("text", ""),
            plausibility=data.get("plausibility"),
        )


@dataclass(frozen=True)
class InterventionPlan:
    """When legitimate bots may act and which corrective strategy they push."""

    stage: str
    window: tuple[int, int] | None
    strategy: str

    def __post_init__(self):
        if self.stage not in STAGES:
            raise RangeViolation("stage", self.stage, f"one of {STAGES}")
        if self.strategy not in STRATEGIES:
            raise RangeViolation("strategy", self.strategy, f"one of {STRATEGIES}")
        if self.stage == "control":
            if self.strategy != "none" or self.window is not None:
                raise RangeViolation(
                    "strategy", self.strategy, "control plans have no strategy or window"
                )
        else:
            if self.strategy == "none":
                raise RangeViolation("strategy", self.strategy, "staged plans need a strategy")
            if self.window is None or self.window[0] > self.window[1]:
                raise RangeViolation("window", self.window, "non-empty inclusive step range")


CONTROL_PLAN = InterventionPlan(stage="control", window=None, strategy="none")


def make_plan(params, stage: str, strategy: str) -> InterventionPlan:
    """Plan for a stage using the window configured in the run parameters."""
    if stage == "control":
        return CONTROL_PLAN
    window = params.intervention_windows.get(stage)
    if window is None:
        raise RangeViolation("stage", stage, "a stage with a configured window")
    return InterventionPlan(stage=stage, window=tuple(window), strategy=strategy)


def is_intervention_active(plan: InterventionPlan, t: int) -> bool:
    if plan.stage == "control":
        return False
    lo, hi = plan.window
    return lo <= t <= hi


def score_plausibility(item: ContentItem, evaluator: Evaluator) -> float:
    """Score and store how credible a disinformation item reads."""
    if item.kind != "disinformation":
        raise ValueError("only disinformation items get plausibility scores")
    response = evaluator.evaluate(
        EvaluationRequest(
            kind="plausibility",
            subject_texts=(item.text,),
            context={"content_id": item.content_id, "community": item.topic},
        )
    )
    item.plausibility = response.scores["score"]
    return item.plausibility


def correction_for(disinfo: ContentItem, strategy: str, catalog) -> ContentItem:
    """The catalog correction countering ``disinfo`` under ``strategy``.

    Deterministic: ties resolve to the lowest content_id.
    """
    matches = [
        item
        for item in catalog
        if item.kind == "correction"
        and item.topic == disinfo.topic
        and item.strategy == strategy
    ]
    if not matches:
        raise NoCorrectionAvailable(disinfo.topic, strategy)
    return min(matches, key=lambda item: item.content_id)
