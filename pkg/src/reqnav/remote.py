"""HTTP client for a remote scorer speaking the /v1 contract."""

from __future__ import annotations

import random
import threading
import time
from typing import Any, Callable, Sequence

import httpx

from .errors import InvalidAction, InvalidSelector, MalformedReply, NoDiffDerivable, ScorerUnavailable
from .oracle import StatePair, SubOracle
from .refine import try_refine
from .scoring import CandidateOp, ExploreResult, RelevanceLevel
from .trigger import ActStep, AssertStep, PlanContext, ScriptPlan, step_from_json
from .ui_model import Action, Operation, Selector, UIState, resolve_selector
from .wire import ExploreReply, OracleReply, ScriptReply, parse_reply

RETRY_STATUS = {429, 500, 502, 503, 504}


class RemoteScorer:
    mode = "remote"

    def __init__(
        self,
        endpoint: str,
        client: httpx.Client | None = None,
        timeout: float = 10.0,
        retries: int = 2,
        max_in_flight: int = 4,
        seed: int = 0,
        backoff: float = 0.05,
        sleep: Callable[[float], None] = time.sleep,
        lexicon=None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.client = client or httpx.Client(timeout=timeout)
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.sleep = sleep
        self._rng = random.Random(seed)
        self._gate = threading.BoundedSemaphore(max_in_flight)
        if lexicon is None:
            from .scoring import Lexicon

            lexicon = Lexicon.load()
        self.lexicon = lexicon

    # -- transport -------------------------------------------------------

    def _post(self, route: str, body: dict[str, Any]) -> Any:
        url = f"{self.endpoint}{route}"
        last = "no attempt made"
        retry_after = None
        for attempt in range(self.retries + 1):
            if attempt:
                self.sleep(self.backoff * (2 ** (attempt - 1)) * (1 + self._rng.random()))
            with self._gate:
                try:
                    resp = self.client.post(url, json=body, timeout=self.timeout)
                except httpx.HTTPError as exc:
                    last = f"{type(exc).__name__}: {exc}"
                    continue
            if resp.status_code in RETRY_STATUS:
                last = f"HTTP {resp.status_code}"
                ra = resp.headers.get("retry-after")
                retry_after = float(ra) if ra and ra.replace(".", "", 1).isdigit() else None
                continue
            if resp.status_code >= 400:
                raise MalformedReply(f"HTTP {resp.status_code} from {route}")
            try:
                return resp.json()
            except ValueError:
                raise MalformedReply(f"non-JSON body from {route}") from None
        raise ScorerUnavailable(f"{url}: {last}", attempts=self.retries + 1, retry_after=retry_after)

    # -- explore ---------------------------------------------------------

    def page_explore(self, requirement: str, state: UIState, k: int = 3) -> ExploreResult:
        if k < 1:
            raise ValueError("k must be >= 1")
        raw = self._post("/v1/explore", {"requirement": requirement, "page": state.to_json(), "k": k})
        reply = parse_reply(ExploreReply, raw)
        kept: list[CandidateOp] = []
        for c in reply.candidates:
            try:
                sel = Selector.from_json(c.selector)
                action = Action.from_json(c.action)
                op = Operation(sel, action)
            except (InvalidSelector, InvalidAction, ValueError, TypeError) as exc:
                raise MalformedReply(f"candidate: {exc}") from None
            if not sel.root and len(resolve_selector(state, sel)) != 1:
                fixed = try_refine(sel, state)
                if fixed is None:
                    continue
                op = Operation(fixed, action)
            kept.append(CandidateOp(op, RelevanceLevel(c.level), c.rationale))
        if reply.is_entry and not kept:
            raise MalformedReply("entry reported without a usable trigger candidate")
        kept.sort(key=lambda c: -c.atomic.level)
        return ExploreResult(reply.is_entry, tuple(kept[:k]))

    def atomic_score(self, requirement: str, state: UIState, op: Operation) -> RelevanceLevel:
        for cand in self.page_explore(requirement, state, k=1000).candidates:
            if cand.op.key == op.key:
                return cand.atomic
        return RelevanceLevel(1)

    # -- script ----------------------------------------------------------

    def script(
        self, requirement: str, state: UIState, trigger_ops: Sequence[Operation], ctx: PlanContext
    ) -> ScriptPlan:
        raw = self._post(
            "/v1/script",
            {
                "requirement": requirement,
                "page": state.to_json(),
                "trigger": [op.to_json() for op in trigger_ops],
                "round": ctx.round,
                "acted": ctx.acted,
                "covered": sorted(ctx.covered),
            },
        )
        reply = parse_reply(ScriptReply, raw)
        try:
            steps = [step_from_json(s) for s in reply.steps]
        except (InvalidSelector, InvalidAction, ValueError, TypeError, KeyError) as exc:
            raise MalformedReply(f"script step: {exc}") from None
        if steps and not any(isinstance(s, AssertStep) for s in steps) and ctx.round == 1:
            raise MalformedReply("script carries no assertion")
        # the first act targets the current page, so it can be repaired now
        for i, s in enumerate(steps):
            if isinstance(s, ActStep):
                sel = s.op.selector
                if not sel.root and len(resolve_selector(state, sel)) != 1:
                    fixed = try_refine(sel, state)
                    if fixed is not None:
                        steps[i] = ActStep(Operation(fixed, s.op.action), s.optional)
                break
        ctx.covered = set(reply.covered) | ctx.covered
        return ScriptPlan(steps, reply.complete)

    # -- oracle ----------------------------------------------------------

    def oracle(self, requirement: str, pair: StatePair, eta: int) -> list[SubOracle]:
        raw = self._post(
            "/v1/oracle",
            {
                "requirement": requirement,
                "pre": pair.pre.to_json(),
                "post": pair.post.to_json(),
                "ops": [op.to_json() for op in pair.ops],
                "eta": eta,
            },
        )
        reply = parse_reply(OracleReply, raw)
        subs: list[SubOracle] = []
        for item in reply.sub_oracles:
            try:
                sub = SubOracle.from_json(item)
            except (InvalidSelector, ValueError, TypeError, KeyError) as exc:
                raise MalformedReply(f"sub-oracle: {exc}") from None
            target = pair.pre if sub.target == "pre" else pair.post
            sel = sub.assertion.selector
            if sub.assertion.mode != "absent" and not sel.root and not resolve_selector(target, sel):
                fixed = try_refine(sel, target)
                if fixed is None:
                    continue
                a = sub.assertion
                sub = SubOracle(
                    type(a)(fixed, a.mode, a.message, a.regex, a.key, a.value, a.scroll),
                    sub.target, sub.rationale,
                )
            subs.append(sub)
        if not subs:
            raise NoDiffDerivable(reply.error or "remote scorer derived no usable sub-oracle")
        return subs[:eta]
