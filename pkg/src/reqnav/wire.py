"""Request and reply bodies shared by the HTTP service and the remote scorer."""

from __future__ import annotations

from typing import Any, Optional, Union

from pydantic import BaseModel, Field, ValidationError

from .errors import MalformedReply


class ExploreRequest(BaseModel):
    requirement: str
    page: dict[str, Any]
    k: int = Field(3, ge=1)


class CandidateModel(BaseModel):
    selector: dict[str, Any]
    action: Union[dict[str, Any], str]
    level: int = Field(ge=1, le=5)
    rationale: str = ""


class ExploreReply(BaseModel):
    is_entry: bool
    candidates: list[CandidateModel] = []


class ScriptRequest(BaseModel):
    requirement: str
    page: dict[str, Any]
    trigger: list[dict[str, Any]] = []
    round: int = Field(1, ge=1)
    acted: list[dict[str, str]] = []
    covered: list[str] = []


class ScriptReply(BaseModel):
    steps: list[dict[str, Any]] = []
    complete: bool = False
    covered: list[str] = []


class OracleRequest(BaseModel):
    requirement: str
    pre: dict[str, Any]
    post: dict[str, Any]
    ops: list[dict[str, Any]] = []
    eta: int = Field(3, ge=1)


class OracleReply(BaseModel):
    sub_oracles: list[dict[str, Any]] = []
    error: Optional[str] = None


class RunRequest(BaseModel):
    corpus: Optional[str] = None
    cases: list[str] = []
    max_steps: int = Field(5, ge=1)
    candidates: int = Field(3, ge=1)
    eta: int = Field(3, ge=1)
    max_rounds: int = Field(3, ge=1)


def parse_reply(model: type[BaseModel], data: Any) -> Any:
    """Validate a scorer reply, surfacing problems as :class:`MalformedReply`."""
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ()))
        raise MalformedReply(f"{where}: {first.get('msg')}") from None
