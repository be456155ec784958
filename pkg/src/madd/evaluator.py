"""Pluggable content/profile scoring with resource metering.

All judgment calls the simulation delegates to a language model flow through
one contract: build an :class:`EvaluationRequest`, call ``evaluate``, read
typed scores back. Two backends implement it:

* ``SyntheticEvaluator`` - the default. Every response is a pure function of
  (request bytes, scenario seed), drawn from configured per-kind
  distributions, so whole runs replay bit-for-bit offline.
* ``RemoteEvaluator`` - renders a prompt template, POSTs it to a
  chat-completion endpoint, parses the strict JSON reply (one retry on
  malformed output) and range-checks every score before anything reaches the
  engine.

Both meter usage into a :class:`ResourceLedger` keyed by community.
"""

from __future__ import annotations

import json
import math
import threading
import time
from dataclasses import asdict, dataclass, field, replace

from . import rng as rngmod
from .errors import MalformedEvaluatorResponse, RemoteUnavailable, ScenarioError

KINDS = (
    "interest_community",
    "trust_threshold",
    "plausibility",
    "persuasiveness",
    "belief_check",
)

# score range per request kind
_RANGES = {
    "interest_community": (1.0, 10.0),
    "trust_threshold": (0.0, 1.0),
    "plausibility": (0.0, 1.0),
    "persuasiveness": (0.0, 1.0),
    "belief_check": (0.0, 1.0),
}

GLOBAL_BUCKET = "global"


@dataclass(frozen=True)
class EvaluationRequest:
    kind: str
    subject_texts: tuple[str, ...] = ()
    context: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown request kind {self.kind!r}")
        object.__setattr__(self, "subject_texts", tuple(self.subject_texts))

    def canonical_bytes(self) -> bytes:
        payload = {
            "kind": self.kind,
            "texts": list(self.subject_texts),
            "context": self.context,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


@dataclass(frozen=True)
class Usage:
    calls: int = 1
    tokens_in: int = 0
    tokens_out: int = 0
    latency: float = 0.0
    approximate: bool = True


@dataclass(frozen=True)
class EvaluationResponse:
    scores: dict
    reasoning: str | None = None
    usage: Usage = field(default_factory=Usage)


class ResourceLedger:
    """Per-community call/token/time accounting. Thread-safe."""

    def __init__(self):
        self._lock = threading.Lock()
        self._per_community: dict[str, dict] = {}
        self._approximate = False

    def record(self, community: str, usage: Usage) -> None:
        with self._lock:
            entry = self._per_community.setdefault(
                community, {"llm_calls": 0, "tokens": 0, "wall_time": 0.0}
            )
            entry["llm_calls"] += usage.calls
            entry["tokens"] += usage.tokens_in + usage.tokens_out
            entry["wall_time"] += usage.latency
            self._approximate = self._approximate or usage.approximate

    def snapshot(self) -> dict:
        with self._lock:
            per_community = {
                name: dict(entry) for name, entry in sorted(self._per_community.items())
            }
        totals = {
            "llm_calls": sum(e["llm_calls"] for e in per_community.values()),
            "tokens": sum(e["tokens"] for e in per_community.values()),
            "wall_time": sum(e["wall_time"] for e in per_community.values()),
        }
        return {
            "per_community": per_community,
            "totals": totals,
            "approximate": self._approximate,
        }


@dataclass(frozen=True)
class SyntheticParams:
    """Distribution knobs for the synthetic backend.

    Defaults encode the directional assumptions the simulation rests on:
    trust thresholds cluster around a neutral 0.5, users score high in one
    home community and low elsewhere, and evidence-citing corrections land
    as slightly more persuasive than narrative ones or than the
    disinformation they counter.
    """

    tt_mean: float = 0.5
    tt_std: float = 0.15
    ic_home_mean: float = 9.0
    ic_home_std: float = 0.8
    # non-home interest: a low exponential mode plus a small chance of a
    # genuine second interest strong enough to clear community thresholds
    ic_other_scale: float = 0.8
    ic_cross_prob: float = 0.02
    ic_cross_mean: float = 8.5
    ic_cross_std: float = 0.8
    # (a, b) beta shapes per persuasiveness class
    fact_shape: tuple[float, float] = (5.0, 3.0)
    narrative_shape: tuple[float, float] = (4.0, 4.0)
    disinfo_shape: tuple[float, float] = (2.0, 7.0)
    dispute_shape: tuple[float, float] = (7.0, 2.0)
    citation_bonus: float = 0.1
    plausibility_base: float = 0.62
    plausibility_noise: float = 0.05


@dataclass(frozen=True)
class EvaluatorConfig:
    backend: str = "synthetic"
    synthetic: SyntheticParams = field(default_factory=SyntheticParams)
    endpoint: str = ""
    model: str = ""
    api_key_env: str = "MADD_LLM_API_KEY"
    timeout: float = 60.0
    max_in_flight: int = 4

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluatorConfig":
        data = dict(data)
        synth = data.pop("synthetic", None)
        cfg = cls(**data)
        if synth:
            synth = dict(synth)
            for key in ("fact_shape", "narrative_shape", "disinfo_shape", "dispute_shape"):
                if key in synth:
                    synth[key] = tuple(synth[key])
            cfg = replace(cfg, synthetic=SyntheticParams(**synth))
        return cfg


_CITATION_MARKERS = (
    "report",
    "according to",
    "official",
    "data",
    "record",
    "study",
    "evidence",
    "published",
    "transcript",
)


def _has_citation_markers(text: str) -> bool:
    lower = text.lower()
    return any(ch.isdigit() for ch in text) or any(m in lower for m in _CITATION_MARKERS)


def _whitespace_tokens(*texts: str) -> int:
    return sum(len(t.split()) for t in texts)


class Evaluator:
    """Backend-independent surface the rest of the package talks to."""

    def __init__(self):
        self.ledger = ResourceLedger()

    def evaluate(self, request: EvaluationRequest) -> EvaluationResponse:
        raise NotImplementedError

    def ledger_snapshot(self) -> dict:
        return self.ledger.snapshot()

    def persuasiveness(
        self,
        text: str,
        *,
        content_kind: str,
        strategy: str,
        stance: str,
        receiver_history: str,
        community: str,
    ) -> float:
        """Persuasive strength of a message for one receiver, in [0, 1]."""
        response = self.evaluate(
            EvaluationRequest(
                kind="persuasiveness",
                subject_texts=(text,),
                context={
                    "content_kind": content_kind,
                    "strategy": strategy,
                    "stance": stance,
                    "history": receiver_history,
                    "community": community,
                },
            )
        )
        return response.scores["score"]

    def _record(self, request: EvaluationRequest, usage: Usage) -> None:
        self.ledger.record(request.context.get("community", GLOBAL_BUCKET), usage)

    @staticmethod
    def _check_range(kind: str, key: str, value: float) -> float:
        lo, hi = _RANGES[kind]
        if not isinstance(value, (int, float)) or math.isnan(value) or not lo <= value <= hi:
            raise MalformedEvaluatorResponse(
                f"{kind} score {key!r} = {value!r} outside [{lo}, {hi}]"
            )
        return float(value)


class SyntheticEvaluator(Evaluator):
    """Deterministic offline backend: scores are seeded draws, not opinions."""

    def __init__(self, seed: int, params: SyntheticParams | None = None):
        super().__init__()
        self.seed = int(seed)
        self.params = params or SyntheticParams()

    def _rng(self, request: EvaluationRequest, *extra: object):
        return rngmod.substream(self.seed, "evaluator", request.canonical_bytes(), *extra)

    def evaluate(self, request: EvaluationRequest) -> EvaluationResponse:
        handler = getattr(self, f"_eval_{request.kind}")
        scores = handler(request)
        scores = {
            key: self._check_range(request.kind, key, value)
            for key, value in scores.items()
        }
        usage = Usage(
            calls=1,
            tokens_in=_whitespace_tokens(*request.subject_texts),
            tokens_out=8 * max(1, len(scores)),
            latency=0.0,  # keeps reports byte-identical across replays
            approximate=True,
        )
        self._record(request, usage)
        return EvaluationResponse(scores=scores, reasoning=None, usage=usage)

    # -- per-kind handlers ---------------------------------------------------

    def _home_community(self, request: EvaluationRequest) -> str:
        communities = request.context["communities"]
        user_id = request.context.get("user_id", "")
        pick = rngmod.substream(self.seed, "evaluator-home", user_id).integers(
            0, len(communities)
        )
        return communities[int(pick)]

    def _eval_interest_community(self, request: EvaluationRequest) -> dict:
        p = self.params
        home = self._home_community(request)
        scores = {}
        for community in request.context["communities"]:
            rng = self._rng(request, community)
            if community == home:
                value = rng.normal(p.ic_home_mean, p.ic_home_std)
            elif rng.random() < p.ic_cross_prob:
                value = rng.normal(p.ic_cross_mean, p.ic_cross_std)
            else:
                value = 1.0 + rng.exponential(p.ic_other_scale)
            scores[community] = min(10.0, max(1.0, float(value)))
        return scores

    def _eval_trust_threshold(self, request: EvaluationRequest) -> dict:
        p = self.params
        scores = {}
        for community in request.context["communities"]:
            rng = self._rng(request, community)
            value = rng.normal(p.tt_mean, p.tt_std)
            scores[community] = min(1.0, max(0.0, float(value)))
        return scores

    def _eval_plausibility(self, request: EvaluationRequest) -> dict:
        p = self.params
        text = request.subject_texts[0] if request.subject_texts else ""
        if not text.strip():
            return {"score": 0.0}
        value = p.plausibility_base
        if _has_citation_markers(text):
            value += 0.08
        exclaim = text.count("!") / max(1, len(text.split()))
        value -= min(0.15, exclaim)
        caps = sum(1 for w in text.split() if len(w) > 2 and w.isupper())
        value -= min(0.1, 0.02 * caps)
        value += float(self._rng(request).uniform(-p.plausibility_noise, p.plausibility_noise))
        return {"score": min(0.95, max(0.05, value))}

    def _eval_persuasiveness(self, request: EvaluationRequest) -> dict:
        p = self.params
        text = request.subject_texts[0] if request.subject_texts else ""
        if not text.strip():
            return {"score": 0.0}
        kind = request.context.get("content_kind", "disinformation")
        strategy = request.context.get("strategy", "none")
        stance = request.context.get("stance", "endorse")
        if kind == "correction":
            shape = p.fact_shape if strategy == "fact_based" else p.narrative_shape
        elif stance == "dispute":
            shape = p.dispute_shape
        else:
            shape = p.disinfo_shape
        value = float(self._rng(request).beta(*shape))
        if _has_citation_markers(text):
            value += p.citation_bonus
        else:
            value -= p.citation_bonus / 2.0
        return {"score": min(1.0, max(0.0, value))}

    def _eval_belief_check(self, request: EvaluationRequest) -> dict:
        discernment = float(request.context.get("discernment", 0.5))
        draw = float(self._rng(request).random())
        return {"believes": 1.0 if draw < (1.0 - discernment) else 0.0}


class RemoteEvaluator(Evaluator):
    """Chat-completion client enforcing the strict JSON output contract."""

    def __init__(self, config: EvaluatorConfig, api_key: str | None = None):
        super().__init__()
        if not config.endpoint:
            raise ScenarioError("remote backend requires an endpoint URL")
        self.config = config
        self._api_key = api_key
        self._semaphore = threading.BoundedSemaphore(max(1, config.max_in_flight))
        self._session = None

    # -- transport -----------------------------------------------------------

    def _post(self, prompt: str) -> dict:
        import requests  # imported lazily: offline runs never touch it

        if self._session is None:
            self._session = requests.Session()
        key = self._api_key
        if key is None:
            import os

            key = os.environ.get(self.config.api_key_env, "")
        headers = {"Content-Type": "application/json"}
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }
        with self._semaphore:
            reply = self._session.post(
                self.config.endpoint,
                json=payload,
                headers=headers,
                timeout=self.config.timeout,
            )
        reply.raise_for_status()
        return reply.json()

    def evaluate(self, request: EvaluationRequest) -> EvaluationResponse:
        prompt = render_prompt(request)
        last_error: Exception | None = None
        for _ in range(2):  # one retry on malformed output
            start = time.monotonic()
            try:
                raw = self._post(prompt)
            except Exception as exc:  # transport failure
                last_error = exc
                continue
            latency = time.monotonic() - start
            try:
                scores, reasoning = self._parse(request, raw)
            except MalformedEvaluatorResponse as exc:
                last_error = exc
                continue
            usage = self._usage(prompt, raw, latency)
            self._record(request, usage)
            return EvaluationResponse(scores=scores, reasoning=reasoning, usage=usage)
        if isinstance(last_error, MalformedEvaluatorResponse):
            raise last_error
        raise RemoteUnavailable(f"remote evaluator failed after retry: {last_error}")

    def _usage(self, prompt: str, raw: dict, latency: float) -> Usage:
        usage = raw.get("usage") or {}
        tokens_in = usage.get("prompt_tokens")
        tokens_out = usage.get("completion_tokens")
        approximate = tokens_in is None or tokens_out is None
        if approximate:
            content = _reply_content(raw)
            tokens_in = _whitespace_tokens(prompt)
            tokens_out = _whitespace_tokens(content)
        return Usage(
            calls=1,
            tokens_in=int(tokens_in),
            tokens_out=int(tokens_out),
            latency=latency,
            approximate=approximate,
        )

    # -- parsing -------------------------------------------------------------

    def _parse(self, request: EvaluationRequest, raw: dict):
        content = _reply_content(raw)
        try:
            body = json.loads(content)
        except (TypeError, json.JSONDecodeError) as exc:
            raise MalformedEvaluatorResponse(f"reply is not JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise MalformedEvaluatorResponse("reply JSON is not an object")

        kind = request.kind
        if kind in ("interest_community", "trust_threshold"):
            key = (
                "Interest Community Scores"
                if kind == "interest_community"
                else "Trust Threshold Scores"
            )
            rows = body.get(key)
            if not isinstance(rows, list):
                raise MalformedEvaluatorResponse(f"missing {key!r} list")
            scores = {}
            for row in rows:
                if not isinstance(row, dict) or "Community" not in row:
                    raise MalformedEvaluatorResponse(f"bad row in {key!r}: {row!r}")
                scores[row["Community"]] = _coerce_score(row.get("Score"), kind)
            expected = request.context.get("communities", ())
            missing = [c for c in expected if c not in scores]
            if missing:
                raise MalformedEvaluatorResponse(f"communities missing from reply: {missing}")
            scores = {c: self._check_range(kind, c, scores[c]) for c in expected}
            return scores, None
        if kind == "plausibility":
            value = _coerce_score(body.get("PlausibilityScore"), kind)
            return {"score": self._check_range(kind, "score", value)}, body.get("Reasoning")
        if kind == "persuasiveness":
            value = _coerce_score(body.get("Score"), kind)
            return {"score": self._check_range(kind, "score", value)}, body.get("Reasoning")
        if kind == "belief_check":
            value = body.get("Believes")
            if isinstance(value, bool):
                return {"believes": 1.0 if value else 0.0}, body.get("Reasoning")
            raise MalformedEvaluatorResponse(f"bad 'Believes' value: {value!r}")
        raise MalformedEvaluatorResponse(f"no parser for kind {kind!r}")


def _reply_content(raw: dict) -> str:
    try:
        return raw["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise MalformedEvaluatorResponse(f"no message content in reply: {exc}") from exc


def _coerce_score(value, kind: str) -> float:
    if isinstance(value, str):
        if value.strip().lower() == "insufficient data":
            # documented floor: no evidence reads as minimal interest/trust
            return _RANGES[kind][0]
        try:
            return float(value)
        except ValueError as exc:
            raise MalformedEvaluatorResponse(f"non-numeric score {value!r}") from exc
    if isinstance(value, (int, float)):
        return float(value)
    raise MalformedEvaluatorResponse(f"non-numeric score {value!r}")


_TEMPLATE_FILES = {
    "interest_community": "interest_community.txt",
    "trust_threshold": "trust_threshold.txt",
    "plausibility": "plausibility.txt",
    "persuasiveness": "persuasiveness.txt",
    "belief_check": "belief_check.txt",
}


def load_template(kind: str) -> str:
    from importlib import resources

    return (
        resources.files("madd").joinpath("prompts", _TEMPLATE_FILES[kind]).read_text("utf-8")
    )


def render_prompt(request: EvaluationRequest) -> str:
    template = load_template(request.kind)
    ctx = request.context
    texts = request.subject_texts
    values = {
        "communities": ", ".join(ctx.get("communities", ())),
        "subject_text": texts[0] if texts else "",
        "subject_texts": "\n".join(texts),
        "history": ctx.get("history", ""),
        "description": ctx.get("description", ""),
        "follower_count": ctx.get("follower_count", ""),
        "following_count": ctx.get("following_count", ""),
        "discernment": ctx.get("discernment", ""),
    }
    return template.format(**values)


def make_evaluator(config: EvaluatorConfig, seed: int) -> Evaluator:
    """Instantiate the configured backend; only 'remote' may touch a network."""
    if config.backend == "synthetic":
        return SyntheticEvaluator(seed=seed, params=config.synthetic)
    if config.backend == "remote":
        return RemoteEvaluator(config)
    raise ScenarioError(f"unknown evaluator backend {config.backend!r}")
