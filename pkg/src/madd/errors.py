"""Exception types shared across the package."""


class MaddError(Exception):
    """Base class for all package-specific errors."""


class ScenarioError(MaddError):
    """Base class for scenario file / parameter problems."""


class MissingField(ScenarioError):
    def __init__(self, field: str, where: str = "scenario"):
        self.field = field
        super().__init__(f"missing required field '{field}' in {where}")


class RangeViolation(ScenarioError):
    def __init__(self, field: str, value, constraint: str):
        self.field = field
        self.value = value
        self.constraint = constraint
        super().__init__(f"{field} = {value!r} violates {constraint}")


class DuplicateUserId(ScenarioError):
    def __init__(self, user_id: str):
        self.user_id = user_id
        super().__init__(f"duplicate user_id {user_id!r}")


class UnknownCommunity(ScenarioError):
    def __init__(self, name: str, where: str = ""):
        self.name = name
        suffix = f" ({where})" if where else ""
        super().__init__(f"unknown community {name!r}{suffix}")


class InsufficientData(MaddError):
    """Too few samples (or too few distinct values) to run a fit."""


class DegenerateSamples(MaddError):
    """All sample values equal; the likelihood surface is flat."""


class CommunityTooSmall(MaddError):
    def __init__(self, community: str, size: int, m0: int):
        self.community = community
        super().__init__(
            f"community {community!r} has {size} members, fewer than m0 = {m0}"
        )


class NoCorrectionAvailable(MaddError):
    def __init__(self, topic: str, strategy: str):
        self.topic = topic
        self.strategy = strategy
        super().__init__(f"no {strategy} correction for topic {topic!r} in catalog")


class EvaluatorFailure(MaddError):
    """An evaluator backend failed; carries context about the request."""


class MalformedEvaluatorResponse(EvaluatorFailure):
    """Backend returned unparseable output or out-of-range scores."""


class RemoteUnavailable(EvaluatorFailure):
    """Remote backend unreachable or persistently malformed after retry."""


class WindowTooSmall(MaddError):
    def __init__(self, window_len: int, minimum: int):
        super().__init__(
            f"intervention window of {window_len} steps cannot host "
            f"the minimum of {minimum} bot activations"
        )


class ScheduleConflict(MaddError):
    """Legitimate-bot schedule nonempty under a control plan."""


class MismatchedRuns(MaddError):
    """Reports being compared do not share a scenario digest and seed."""


class IoFailure(MaddError):
    """Wraps OS-level errors raised while exporting artifacts."""
