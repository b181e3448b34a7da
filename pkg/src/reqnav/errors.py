"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class ReqnavError(Exception):
    """Base class for all engine errors."""


class InvalidRegex(ReqnavError, ValueError):
    pass


class InvalidSelector(ReqnavError, ValueError):
    pass


class InvalidAction(ReqnavError, ValueError):
    pass


# --- device harness -------------------------------------------------------


class ParseError(ReqnavError):
    pass


class SchemaError(ReqnavError):
    def __init__(self, field: str, detail: str = ""):
        self.field = field
        self.detail = detail
        super().__init__(f"{field}: {detail}" if detail else field)


class DanglingStateRef(SchemaError):
    pass


class NondeterministicTransition(SchemaError):
    pass


class TargetNotFound(ReqnavError):
    pass


class DeviceError(ReqnavError):
    pass


class SelectorUnresolved(DeviceError):
    def __init__(self, selector, state_id: str | None = None):
        self.selector = selector
        self.state_id = state_id
        super().__init__(f"selector {selector} resolves to nothing in state {state_id!r}")


# --- scorer ---------------------------------------------------------------


class EmptyPath(ReqnavError, ValueError):
    pass


class ScorerUnavailable(ReqnavError):
    def __init__(self, message: str, attempts: int = 0, retry_after: float | None = None):
        self.attempts = attempts
        self.retry_after = retry_after
        super().__init__(f"{message} (attempts={attempts})")


class MalformedReply(ReqnavError):
    def __init__(self, detail: str):
        self.detail = detail
        super().__init__(detail)


# --- navigation / execution / oracle --------------------------------------


class ReplayDiverged(ReqnavError):
    def __init__(self, step_index: int, expected: str, actual: str):
        self.step_index = step_index
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"replay diverged at step {step_index}: expected {expected[:12]}, got {actual[:12]}"
        )


class UnplannableRequirement(ReqnavError):
    pass


class NoDiffDerivable(ReqnavError):
    pass


class Unrepairable(ReqnavError):
    pass


class ConfigError(ReqnavError):
    pass
