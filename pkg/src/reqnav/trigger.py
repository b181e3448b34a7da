"""Functional presence check and execution.

Starting at the entry state, scripts of interleaved actions and presence
assertions are generated and executed round by round until the
functionality's completion condition holds.  A failed assertion is a verdict
(the functionality is absent), never an engine error.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence, Union

from .device import DeviceSession
from .errors import InvalidSelector, UnplannableRequirement
from .refine import try_refine
from .scoring import LexicalScorer, _can_scroll_forward
from .ui_model import (
    CLICK,
    Action,
    Operation,
    Selector,
    UIElement,
    UIState,
    element_at,
    resolve_selector,
    unique_selector_for,
)

DEFAULT_MAX_ROUNDS = 3
ASSERT_MODES = ("exists", "absent", "text-matches", "attr-equals")


@dataclass(frozen=True)
class Assertion:
    selector: Selector
    mode: str = "exists"
    message: str = "expected element missing"
    regex: str | None = None
    key: str | None = None
    value: str | None = None
    scroll: bool = False  # keep scrolling the page's list until the check passes

    def __post_init__(self) -> None:
        if self.mode not in ASSERT_MODES:
            raise ValueError(f"unknown assertion mode {self.mode!r}")
        if not self.message:
            raise ValueError("assertion message must be non-empty")
        if self.mode == "text-matches":
            if self.regex is None:
                raise ValueError("text-matches needs a regex")
            re.compile(self.regex)
        if self.mode == "attr-equals" and (self.key is None or self.value is None):
            raise ValueError("attr-equals needs key and value")

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"selector": self.selector.to_json(), "mode": self.mode, "message": self.message}
        for name in ("regex", "key", "value"):
            if getattr(self, name) is not None:
                out[name] = getattr(self, name)
        if self.scroll:
            out["scroll"] = True
        return out

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Assertion":
        return cls(
            Selector.from_json(data["selector"]),
            data.get("mode", "exists"),
            data.get("message") or "expected element missing",
            data.get("regex"),
            data.get("key"),
            data.get("value"),
            bool(data.get("scroll", False)),
        )


@dataclass(frozen=True)
class ActStep:
    op: Operation
    optional: bool = False  # skipped when the target cannot take the action


@dataclass(frozen=True)
class AssertStep:
    assertion: Assertion


ScriptStep = Union[ActStep, AssertStep]


def step_to_json(step: ScriptStep) -> dict[str, Any]:
    if isinstance(step, ActStep):
        body = step.op.to_json()
        if step.optional:
            body["optional"] = True
        return {"act": body}
    return {"assert": step.assertion.to_json()}


def step_from_json(data: Mapping[str, Any]) -> ScriptStep:
    if "act" in data:
        body = data["act"]
        return ActStep(Operation.from_json(body), bool(body.get("optional", False)))
    if "assert" in data:
        return AssertStep(Assertion.from_json(data["assert"]))
    raise InvalidSelector(f"script step must be 'act' or 'assert': {data!r}")


@dataclass(frozen=True)
class AssertionResult:
    assertion: Assertion
    passed: bool
    detail: str = ""

    def to_json(self) -> dict[str, Any]:
        return {**self.assertion.to_json(), "pass": self.passed, "detail": self.detail}


@dataclass
class ExecutionOutcome:
    reached: UIState
    executed_ops: list[Operation] = field(default_factory=list)
    assertion_results: list[AssertionResult] = field(default_factory=list)
    acted: list[dict[str, str]] = field(default_factory=list)
    rounds: int = 0

    @property
    def presence_verdict(self) -> str:
        return "confirmed" if all(r.passed for r in self.assertion_results) else "absent"

    @property
    def confirmed(self) -> bool:
        return self.presence_verdict == "confirmed"

    @property
    def failed_assertion(self) -> Assertion | None:
        for r in self.assertion_results:
            if not r.passed:
                return r.assertion
        return None


# --------------------------------------------------------------------------
# assertion checks


def check_assertion(state: UIState, a: Assertion) -> tuple[bool, str]:
    hits = resolve_selector(state, a.selector)
    if a.mode == "exists":
        return bool(hits), f"{len(hits)} match(es)"
    if a.mode == "absent":
        return not hits, f"{len(hits)} match(es)"
    if a.mode == "text-matches":
        for path in hits:
            if re.fullmatch(a.regex, element_at(state.root, path).text, re.S):
                return True, "text matched"
        return False, f"no text of {len(hits)} match(es) fits {a.regex!r}"
    if not hits:
        return False, "no match"
    actual = element_at(state.root, hits[0]).get(a.key)
    return actual == a.value, f"{a.key}={actual!r}"


def evaluate_assertion(state: UIState, a: Assertion, repair: bool = True) -> tuple[bool, str]:
    """Check ``a`` on ``state``; unresolved positive assertions get one selector repair attempt."""
    ok, detail = check_assertion(state, a)
    if ok or not repair or a.mode == "absent":
        return ok, detail
    if resolve_selector(state, a.selector):
        return ok, detail
    fixed = try_refine(a.selector, state)
    if fixed is None:
        return ok, detail + "; selector unrepairable"
    ok2, detail2 = check_assertion(state, _replace_selector(a, fixed))
    return ok2, f"{detail2} (repaired to {fixed})"


def _replace_selector(a: Assertion, sel: Selector) -> Assertion:
    return Assertion(sel, a.mode, a.message, a.regex, a.key, a.value, a.scroll)


# --------------------------------------------------------------------------
# execution


def _accepts(el: UIElement, action: Action) -> bool:
    if action.kind == "input-text":
        return el.get("class").endswith("EditText")
    if action.kind == "scroll":
        return el.flag("scrollable")
    if action.kind in ("click", "long-click"):
        return el.flag("clickable")
    return True


def _scroll_forward_op(state: UIState) -> Operation | None:
    for path, el in state.elements():
        if el.flag("scrollable") and _can_scroll_forward(el):
            sel = unique_selector_for(state, path)
            if sel is not None:
                return Operation(sel, Action("scroll", "down"))
    return None


def _scroll_bound(state: UIState) -> int:
    for _, el in state.elements():
        if el.flag("scrollable") and "item-count" in el.attrs:
            try:
                return int(el.attrs["item-count"])
            except ValueError:
                pass
    return 0


def execute_script(
    session: DeviceSession, script: Sequence[ScriptStep], max_iters: int | None = None
) -> ExecutionOutcome:
    start = len(session.trace)
    results: list[AssertionResult] = []
    acted: list[dict[str, str]] = []
    state = session.observe()

    for step in script:
        if isinstance(step, AssertStep):
            a = step.assertion
            ok, detail = evaluate_assertion(state, a)
            if not ok and a.scroll:
                bound = _scroll_bound(state)
                if max_iters is not None:
                    bound = min(bound, max_iters)
                for _ in range(bound):
                    op = _scroll_forward_op(state)
                    if op is None:
                        break
                    before = state.digest
                    state = session.perform(op)
                    ok, detail = evaluate_assertion(state, a)
                    if ok or state.digest == before:
                        break
            results.append(AssertionResult(a, ok, detail))
            if not ok:
                break
            continue

        op = step.op
        sel = op.selector
        if not op.selector.root:
            hits = resolve_selector(state, sel)
            if len(hits) != 1:
                fixed = try_refine(sel, state)
                if fixed is None:
                    if step.optional:
                        continue
                    results.append(
                        AssertionResult(
                            Assertion(sel, "exists", f"target of {op.action} is not on the page"),
                            False,
                            "selector unrepairable",
                        )
                    )
                    break
                sel = fixed
            target = element_at(state.root, resolve_selector(state, sel)[0])
            if step.optional and not _accepts(target, op.action):
                continue
            acted.append(
                {
                    "resource-id": target.get("resource-id"),
                    "text": target.text,
                    "content-desc": target.get("content-desc"),
                }
            )
        state = session.perform(Operation(sel, op.action))

    return ExecutionOutcome(state, list(session.trace[start:]), results, acted, rounds=1)


# --------------------------------------------------------------------------
# planning


@dataclass
class PlanContext:
    round: int = 1
    covered: set[str] = field(default_factory=set)
    acted_ids: list[tuple] = field(default_factory=list)
    acted: list[dict[str, str]] = field(default_factory=list)


@dataclass
class ScriptPlan:
    steps: list[ScriptStep]
    complete: bool = False


def _element_tokens(lex, text: str, desc: str) -> frozenset[str]:
    return lex.tokens(text) | lex.tokens(desc)


def element_identity(lex, attrs: Mapping[str, str]) -> tuple:
    """Resource-id when present (survives text edits), else the element's wording."""
    rid = attrs.get("resource-id", "")
    if rid:
        return ("rid", rid)
    return ("tokens", _element_tokens(lex, attrs.get("text", ""), attrs.get("content-desc", "")))


def lexical_plan(
    requirement: str,
    state: UIState,
    trigger_ops: Sequence[Operation],
    scorer: LexicalScorer,
    ctx: PlanContext | None = None,
) -> list[ScriptStep]:
    """Deterministic script: assert+act per trigger, then a terminal presence check.

    Keyphrase tokens not yet covered by acted-upon elements are searched for
    (scrolling lists if needed) and the match is selected when clickable; if
    everything is covered the terminal check asserts the keyphrase is visible.
    """
    lex = scorer.lexicon
    keys = lex.keyphrase(requirement)
    if not keys:
        raise UnplannableRequirement(f"no keyphrase in requirement {requirement!r}")
    ctx = ctx if ctx is not None else PlanContext()

    steps: list[ScriptStep] = []
    acted_tokens: set[str] = set()
    for op in trigger_ops:
        hits = resolve_selector(state, op.selector) if not op.selector.root else []
        label = str(op.selector)
        if hits:
            el = element_at(state.root, hits[0])
            label = repr(el.label)
            acted_tokens |= _element_tokens(lex, el.text, el.get("content-desc"))
        steps.append(AssertStep(Assertion(op.selector, "exists", f"trigger element {label} is not present")))
        steps.append(ActStep(op))

    covered = set(ctx.covered) | lex.expand(acted_tokens)
    remaining = keys - covered
    if remaining:
        pattern = lex.regex_for(remaining)
        seek = Selector(text_regex=pattern)
        steps.append(
            AssertStep(
                Assertion(seek, "exists", f"no element matching {pattern!r} after triggering", scroll=True)
            )
        )
        steps.append(ActStep(Operation(seek, CLICK), optional=True))
        covered |= lex.expand(remaining)
    else:
        pattern = lex.regex_for(keys)
        steps.append(
            AssertStep(
                Assertion(Selector(text_regex=pattern), "exists", f"requirement text {pattern!r} not visible")
            )
        )
    ctx.covered = covered
    return steps


def lexical_pending(
    requirement: str, state: UIState, scorer: LexicalScorer, ctx: PlanContext
) -> list[Operation]:
    """Literal-match controls on ``state`` whose wording has not been acted on yet."""
    lex = scorer.lexicon
    pending = []
    for path, cand in scorer.rate(requirement, state):
        if cand.atomic.level != 5 or cand.op.action.kind not in ("click", "input-text"):
            continue
        el = element_at(state.root, path)
        if element_identity(lex, el.attrs) in ctx.acted_ids:
            continue
        pending.append(cand.op)
    return pending


def plan_round(
    requirement: str,
    state: UIState,
    trigger_ops: Sequence[Operation],
    scorer,
    ctx: PlanContext,
) -> ScriptPlan:
    if getattr(scorer, "mode", "lexical") == "remote":
        return scorer.script(requirement, state, list(trigger_ops), ctx)
    if ctx.round > 1:
        pending = lexical_pending(requirement, state, scorer, ctx)
        if not pending:
            return ScriptPlan([], complete=True)
        trigger_ops = pending[:1]
    return ScriptPlan(lexical_plan(requirement, state, trigger_ops, scorer, ctx))


def generate_script(
    requirement: str,
    state: UIState,
    trigger_ops: Sequence[Operation],
    scorer,
    ctx: PlanContext | None = None,
) -> list[ScriptStep]:
    if not trigger_ops:
        raise ValueError("trigger_ops must be non-empty")
    ctx = ctx if ctx is not None else PlanContext()
    if getattr(scorer, "mode", "lexical") == "remote":
        return scorer.script(requirement, state, list(trigger_ops), ctx).steps
    return lexical_plan(requirement, state, trigger_ops, scorer, ctx)


def iterate_until_complete(
    requirement: str,
    session: DeviceSession,
    scorer,
    trigger_ops: Sequence[Operation],
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    max_iters: int | None = None,
) -> ExecutionOutcome:
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    lex = getattr(scorer, "lexicon", None)
    ctx = PlanContext()
    total = ExecutionOutcome(session.observe())

    for rnd in range(1, max_rounds + 2):
        ctx.round = rnd
        plan = plan_round(requirement, total.reached, trigger_ops, scorer, ctx)
        if not plan.steps:
            if rnd == 1:
                raise UnplannableRequirement("planner produced no steps for the entry state")
            if plan.complete:
                return total
        if rnd > max_rounds:
            break
        if not any(isinstance(s, AssertStep) for s in plan.steps) and rnd == 1:
            raise UnplannableRequirement("script carries no assertion")
        out = execute_script(session, plan.steps, max_iters)
        total.reached = out.reached
        total.executed_ops += out.executed_ops
        total.assertion_results += out.assertion_results
        total.acted += out.acted
        total.rounds = rnd
        if not out.confirmed:
            return total
        ctx.acted += out.acted
        if lex is not None:
            ctx.acted_ids += [element_identity(lex, a) for a in out.acted]
        if plan.complete:
            return total

    total.assertion_results.append(
        AssertionResult(
            Assertion(Selector(root=True), "exists", f"functionality incomplete after {max_rounds} round(s)"),
            False,
            "round budget exhausted",
        )
    )
    return total
