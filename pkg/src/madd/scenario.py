"""Run configuration: parameter ledger, user records and scenario files.

A scenario is a single JSON document (``version: 1``) bundling the numeric
parameters, the community list, the ingested user records (inline or in a
JSON/CSV sidecar referenced by ``users_file``) and the content catalog.
Loading is pure: identical bytes always produce an identical, fully
validated, effectively immutable Scenario.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .content import ContentItem
from .errors import (
    DuplicateUserId,
    MissingField,
    RangeViolation,
    ScenarioError,
    UnknownCommunity,
)
from .evaluator import EvaluatorConfig

HOURS_PER_DAY = 24

# Defaults for every tunable the simulation consumes. Ranges MF/LF are the
# per-bot activation-count draws; intervention windows are inclusive step
# ranges per stage.
PARAM_DEFAULTS: dict = {
    "theta": 0.5,
    "xi": 0.1,
    "gamma": 0.5,
    "beta": 0.5,
    "delta": 0.5,
    "tau": 8.0,
    "m0": 5,
    "m": 2,
    "total_steps": 72,
    "malicious_ratio": 0.15,
    "legitimate_ratio": 0.05,
    "malicious_freq_range": (1, 18),
    "legitimate_freq_range": (1, 12),
    "intervention_windows": {
        "early": (12, 72),
        "mid": (36, 72),
        "late": (48, 72),
    },
    "repost_probability": 0.7,
    "rng_seed": 0,
}


@dataclass(frozen=True)
class SimulationParams:
    theta: float = 0.5
    xi: float = 0.1
    gamma: float = 0.5
    beta: float = 0.5
    delta: float = 0.5
    tau: float = 8.0
    m0: int = 5
    m: int = 2
    total_steps: int = 72
    malicious_ratio: float = 0.15
    legitimate_ratio: float = 0.05
    malicious_freq_range: tuple[int, int] = (1, 18)
    legitimate_freq_range: tuple[int, int] = (1, 12)
    intervention_windows: dict = field(
        default_factory=lambda: {k: tuple(v) for k, v in PARAM_DEFAULTS["intervention_windows"].items()}
    )
    repost_probability: float = 0.7
    rng_seed: int = 0

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "xi": self.xi,
            "gamma": self.gamma,
            "beta": self.beta,
            "delta": self.delta,
            "tau": self.tau,
            "m0": self.m0,
            "m": self.m,
            "total_steps": self.total_steps,
            "malicious_ratio": self.malicious_ratio,
            "legitimate_ratio": self.legitimate_ratio,
            "malicious_freq_range": list(self.malicious_freq_range),
            "legitimate_freq_range": list(self.legitimate_freq_range),
            "intervention_windows": {k: list(v) for k, v in self.intervention_windows.items()},
            "repost_probability": self.repost_probability,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationParams":
        known = set(PARAM_DEFAULTS)
        unknown = set(data) - known
        if unknown:
            raise ScenarioError(f"unknown parameter(s): {sorted(unknown)}")
        merged = {**PARAM_DEFAULTS, **data}
        merged["malicious_freq_range"] = tuple(merged["malicious_freq_range"])
        merged["legitimate_freq_range"] = tuple(merged["legitimate_freq_range"])
        merged["intervention_windows"] = {
            k: tuple(v) for k, v in merged["intervention_windows"].items()
        }
        return cls(**merged)


@dataclass(frozen=True)
class Violation:
    field: str
    value: object
    constraint: str

    def __str__(self) -> str:
        return f"{self.field} = {self.value!r} violates: {self.constraint}"


def validate_params(params: SimulationParams) -> list[Violation]:
    """Constraint check; returns one Violation per breach, empty when clean."""
    out: list[Violation] = []

    def check(cond: bool, field_name: str, value, constraint: str):
        if not cond:
            out.append(Violation(field_name, value, constraint))

    for name in ("theta", "gamma", "beta", "delta"):
        value = getattr(params, name)
        check(0.0 < value < 1.0, name, value, "strictly inside (0, 1)")
    check(params.xi >= 0.0, "xi", params.xi, ">= 0")
    check(1.0 <= params.tau <= 10.0, "tau", params.tau, "within the 1-10 interest scale")
    check(params.m0 >= 2, "m0", params.m0, ">= 2")
    check(params.m >= 1, "m", params.m, ">= 1")
    check(params.m <= params.m0, "m", params.m, "m <= m0")
    check(params.total_steps >= 1, "total_steps", params.total_steps, ">= 1")
    for name in ("malicious_ratio", "legitimate_ratio"):
        value = getattr(params, name)
        check(0.0 <= value < 1.0, name, value, "within [0, 1)")
    check(
        params.malicious_ratio + params.legitimate_ratio < 1.0,
        "malicious_ratio+legitimate_ratio",
        params.malicious_ratio + params.legitimate_ratio,
        "< 1",
    )
    for name in ("malicious_freq_range", "legitimate_freq_range"):
        rng = getattr(params, name)
        ok = (
            len(rng) == 2
            and all(isinstance(v, int) for v in rng)
            and 0 <= rng[0] <= rng[1]
        )
        check(ok, name, rng, "integer pair 0 <= lo <= hi")
    for stage, window in params.intervention_windows.items():
        check(stage in ("early", "mid", "late"), "intervention_windows", stage,
              "stages are early/mid/late")
        ok = (
            len(window) == 2
            and 1 <= window[0] <= window[1] <= params.total_steps
        )
        check(ok, f"intervention_windows[{stage}]", tuple(window),
              f"sub-range of [1, {params.total_steps}]")
    check(
        0.0 <= params.repost_probability <= 1.0,
        "repost_probability",
        params.repost_probability,
        "within [0, 1]",
    )
    return out


@dataclass(frozen=True)
class UserRecord:
    user_id: str
    follower_count: int
    following_count: int = 0
    description: str = ""
    post_count: int = 0
    retweet_count: int = 0
    quote_count: int = 0
    historical_texts: tuple = ()
    activity_histogram: tuple = tuple([1] * HOURS_PER_DAY)

    @property
    def share_total(self) -> int:
        """Reshares plus quotes: the activity count the power-law fit uses."""
        return self.retweet_count + self.quote_count

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "follower_count": self.follower_count,
            "following_count": self.following_count,
            "description": self.description,
            "post_count": self.post_count,
            "retweet_count": self.retweet_count,
            "quote_count": self.quote_count,
            "historical_texts": [list(pair) for pair in self.historical_texts],
            "activity_histogram": list(self.activity_histogram),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "UserRecord":
        if "user_id" not in data:
            raise MissingField("user_id", "user record")
        if "follower_count" not in data:
            raise MissingField("follower_count", f"user record {data['user_id']!r}")
        texts = tuple(
            (str(kind), str(text)) for kind, text in data.get("historical_texts", ())
        )
        histogram = tuple(int(v) for v in data.get("activity_histogram", [1] * HOURS_PER_DAY))
        return cls(
            user_id=str(data["user_id"]),
            follower_count=int(data["follower_count"]),
            following_count=int(data.get("following_count", 0)),
            description=str(data.get("description", "")),
            post_count=int(data.get("post_count", 0)),
            retweet_count=int(data.get("retweet_count", 0)),
            quote_count=int(data.get("quote_count", 0)),
            historical_texts=texts,
            activity_histogram=histogram,
        )


@dataclass(frozen=True)
class Scenario:
    params: SimulationParams
    users: tuple
    communities: tuple
    content_catalog: tuple
    evaluator_config: EvaluatorConfig = field(default_factory=EvaluatorConfig)

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "params": self.params.to_dict(),
            "communities": list(self.communities),
            "users": [u.to_dict() for u in self.users],
            "content_catalog": [c.to_dict() for c in self.content_catalog],
            "evaluator": self.evaluator_config.to_dict(),
        }

    def disinformation_for(self, topic: str) -> ContentItem:
        for item in self.content_catalog:
            if item.kind == "disinformation" and item.topic == topic:
                return item
        raise UnknownCommunity(topic, "no disinformation item for this topic")


def _validate_scenario(scenario: Scenario) -> Scenario:
    violations = validate_params(scenario.params)
    if violations:
        v = violations[0]
        raise RangeViolation(v.field, v.value, v.constraint)
    if len(scenario.communities) < 1:
        raise MissingField("communities")
    if len(set(scenario.communities)) != len(scenario.communities):
        raise ScenarioError("community names must be unique")
    seen: set[str] = set()
    for user in scenario.users:
        if user.user_id in seen:
            raise DuplicateUserId(user.user_id)
        seen.add(user.user_id)
        for name in ("follower_count", "following_count", "post_count",
                     "retweet_count", "quote_count"):
            if getattr(user, name) < 0:
                raise RangeViolation(f"{name}({user.user_id})", getattr(user, name), ">= 0")
        if len(user.activity_histogram) != HOURS_PER_DAY:
            raise RangeViolation(
                f"activity_histogram({user.user_id})",
                len(user.activity_histogram),
                f"exactly {HOURS_PER_DAY} buckets",
            )
        if any(v < 0 for v in user.activity_histogram):
            raise RangeViolation(
                f"activity_histogram({user.user_id})", user.activity_histogram, "counts >= 0"
            )
    for item in scenario.content_catalog:
        if item.topic not in scenario.communities:
            raise UnknownCommunity(item.topic, f"content item {item.content_id!r}")
    return scenario


def make_scenario(
    params: SimulationParams,
    users,
    communities,
    content_catalog,
    evaluator_config: EvaluatorConfig | None = None,
) -> Scenario:
    """Assemble and validate a Scenario from in-memory pieces."""
    scenario = Scenario(
        params=params,
        users=tuple(users),
        communities=tuple(communities),
        content_catalog=tuple(content_catalog),
        evaluator_config=evaluator_config or EvaluatorConfig(),
    )
    return _validate_scenario(scenario)


def scenario_from_dict(data: dict, base_dir: Path | None = None) -> Scenario:
    if data.get("version") != 1:
        raise MissingField("version", "scenario (expected version: 1)")
    if "communities" not in data:
        raise MissingField("communities")
    params = SimulationParams.from_dict(data.get("params", {}))

    if "users" in data:
        users = tuple(UserRecord.from_dict(u) for u in data["users"])
    elif "users_file" in data:
        if base_dir is None:
            raise ScenarioError("users_file reference requires a scenario path")
        users = _load_user_sidecar(base_dir / data["users_file"])
    else:
        raise MissingField("users")

    catalog = tuple(ContentItem.from_dict(c) for c in data.get("content_catalog", ()))
    evaluator_config = EvaluatorConfig.from_dict(data.get("evaluator", {}))
    return make_scenario(params, users, tuple(data["communities"]), catalog, evaluator_config)


def load_scenario(path) -> Scenario:
    """Load, default-fill and validate a scenario JSON file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(raw, base_dir=path.parent)


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(
        json.dumps(scenario.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _load_user_sidecar(path: Path) -> tuple:
    if not path.exists():
        raise ScenarioError(f"users_file {path} does not exist")
    if path.suffix.lower() == ".json":
        rows = json.loads(path.read_text(encoding="utf-8"))
        return tuple(UserRecord.from_dict(r) for r in rows)
    if path.suffix.lower() == ".csv":
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            records = []
            for row in reader:
                histogram = _parse_histogram_cell(row.get("activity_histogram", ""))
                records.append(
                    UserRecord.from_dict(
                        {
                            "user_id": row["user_id"],
                            "follower_count": int(row["follower_count"]),
                            "following_count": int(row.get("following_count", 0) or 0),
                            "description": row.get("description", ""),
                            "post_count": int(row.get("post_count", 0) or 0),
                            "retweet_count": int(row.get("retweet_count", 0) or 0),
                            "quote_count": int(row.get("quote_count", 0) or 0),
                            "activity_histogram": histogram,
                        }
                    )
                )
        return tuple(records)
    raise ScenarioError(f"unsupported users_file extension: {path.suffix!r}")


def _parse_histogram_cell(cell: str) -> list[int]:
    """Histogram cell: a bracketed array of 24 integers, comma-free so the
    CSV stays unquoted ("[0 1 2 ...]"); commas are tolerated anyway."""
    cell = cell.strip()
    if not cell:
        return [1] * HOURS_PER_DAY
    cell = cell.strip("[]").replace(",", " ")
    return [int(tok) for tok in cell.split()]


def default_params() -> SimulationParams:
    return SimulationParams()


def defaults_as_json() -> str:
    """The numeric defaults, exactly as configured, for --print-defaults."""
    return json.dumps(SimulationParams().to_dict(), indent=2, sort_keys=True)


def with_seed(scenario: Scenario, seed: int) -> Scenario:
    """Copy of the scenario with its RNG seed replaced."""
    if seed == scenario.params.rng_seed:
        return scenario
    return replace(scenario, params=replace(scenario.params, rng_seed=seed))
