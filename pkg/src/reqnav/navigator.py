"""Requirement-guided best-first navigation to the functionality's entry state.

The frontier is a max-priority queue of ``(base state, operation, path
score)`` entries.  Each pop consumes one step of the budget, restores the base
state by replaying its canonical path when needed, skips pairs that were
already expanded, performs the operation and asks the scorer whether the new
page is the entry.  Otherwise its candidates are pushed with the geometric
mean of the atomic scores along their path.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Any, Callable

from .device import DeviceSession
from .errors import ReplayDiverged
from .scoring import DEFAULT_K, CandidateOp, RelevanceLevel, path_score
from .ui_model import LAUNCH_OP, Operation, UIState

log = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 5


@dataclass
class NodeInfo:
    digest: str
    page_id: str | None
    path: tuple[Operation, ...]
    path_digests: tuple[str, ...]  # digest after each op of ``path``
    gammas: tuple[float, ...]


@dataclass
class HistoryGraph:
    root: str = ""
    nodes: dict[str, NodeInfo] = field(default_factory=dict)
    edges: dict[tuple[str, str], str | None] = field(default_factory=dict)
    appended: list[tuple[str, str]] = field(default_factory=list)

    def add_node(self, info: NodeInfo) -> NodeInfo:
        # first discovered path stays canonical
        return self.nodes.setdefault(info.digest, info)

    def append(self, base: str, op: Operation) -> None:
        self.appended.append((base, op.key))
        self.edges.setdefault((base, op.key), None)

    def link(self, base: str, op: Operation, dest: str) -> None:
        self.edges[(base, op.key)] = dest

    def edge_ops(self, base: str) -> set[str]:
        return {k for (b, k) in self.edges if b == base}

    def canonical_path(self, digest: str) -> tuple[Operation, ...]:
        return self.nodes[digest].path


@dataclass(order=True)
class QueueEntry:
    sort_key: tuple[float, int] = field(init=False, repr=False)
    base: str = field(compare=False)
    op: Operation = field(compare=False)
    score: float = field(compare=False)
    gammas: tuple[float, ...] = field(compare=False)
    seq: int = field(compare=False)

    def __post_init__(self) -> None:
        # max-heap on score, FIFO among equal scores
        self.sort_key = (-self.score, self.seq)


@dataclass
class NavResult:
    entry: UIState | None
    history: HistoryGraph
    trigger_ops: list[Operation] | None
    steps_used: int
    trace: list[dict[str, Any]] = field(default_factory=list)
    trigger_candidates: list[CandidateOp] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.entry is not None

    @property
    def entry_path(self) -> tuple[Operation, ...]:
        if self.entry is None:
            return ()
        return self.history.canonical_path(self.entry.digest)


def equivalent_state(history: HistoryGraph, base: str, op: Operation) -> bool:
    """True iff ``(base, op)`` was already expanded."""
    if base not in history.nodes:
        return False
    return op.key in history.edge_ops(base)


def replay(session: DeviceSession, history: HistoryGraph, target: str) -> UIState:
    """Reset and re-run the canonical path to ``target``, checking every intermediate digest."""
    info = history.nodes[target]
    state = session.reset()
    if state.digest != history.root:
        raise ReplayDiverged(0, history.root, state.digest)
    for i, (op, expected) in enumerate(zip(info.path, info.path_digests), start=1):
        state = session.perform(op)
        if state.digest != expected:
            raise ReplayDiverged(i, expected, state.digest)
    return state


def compute_score(
    requirement: str,
    state: UIState,
    op: Operation | CandidateOp,
    history: HistoryGraph,
    scorer,
) -> tuple[float, tuple[float, ...]]:
    """Path score for ``op`` proposed on ``state``: the state's path gammas plus the op's own."""
    if isinstance(op, CandidateOp):
        level: RelevanceLevel = op.atomic
    else:
        level = scorer.atomic_score(requirement, state, op)
    prefix = history.nodes[state.digest].gammas if state.digest in history.nodes else ()
    gammas = tuple(prefix) + (level.gamma,)
    return path_score(gammas), gammas


def navigate(
    requirement: str,
    session: DeviceSession,
    scorer,
    max_steps: int = DEFAULT_MAX_STEPS,
    k: int = DEFAULT_K,
    on_iteration: Callable[[dict[str, Any]], None] | None = None,
) -> NavResult:
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")

    history = HistoryGraph()
    s0 = session.reset()
    history.root = s0.digest
    history.add_node(NodeInfo(s0.digest, s0.page_id, (), (), ()))
    current = s0.digest

    queue: list[QueueEntry] = []
    seq = 0
    heapq.heappush(queue, QueueEntry(s0.digest, LAUNCH_OP, 1.0, (), seq))

    trace: list[dict[str, Any]] = []
    step = 0
    while queue and step < max_steps:
        n = heapq.heappop(queue)
        step += 1
        record: dict[str, Any] = {
            "step": step,
            "popped": {"base": n.base, "op": n.op.to_json(), "score": round(n.score, 12)},
            "replayed": False,
            "skipped": False,
        }

        if n.base != current:
            try:
                replay(session, history, n.base)
                record["replayed"] = True
            except ReplayDiverged as exc:
                log.warning("dropping entry after replay divergence: %s", exc)
                record.update(skipped=True, diverged=exc.step_index)
                current = session.observe().digest
                _emit(trace, record, on_iteration)
                continue
            current = n.base

        if equivalent_state(history, n.base, n.op):
            record["skipped"] = True
            _emit(trace, record, on_iteration)
            continue

        history.append(n.base, n.op)
        s1 = session.perform(n.op)
        base_info = history.nodes[n.base]
        if n.op is LAUNCH_OP:
            info = base_info
        else:
            info = history.add_node(
                NodeInfo(
                    s1.digest,
                    s1.page_id,
                    base_info.path + (n.op,),
                    base_info.path_digests + (s1.digest,),
                    n.gammas,
                )
            )
        history.link(n.base, n.op, s1.digest)
        current = s1.digest
        record["new_state"] = s1.digest
        record["page_id"] = s1.page_id

        result = scorer.page_explore(requirement, s1, k)
        record["is_entry"] = result.is_entry
        if result.is_entry:
            record["trigger"] = [c.to_json() for c in result.candidates]
            _emit(trace, record, on_iteration)
            return NavResult(
                s1, history, [c.op for c in result.candidates], step, trace, list(result.candidates)
            )

        pushed = []
        for cand in result.candidates:
            score, gammas = compute_score(requirement, s1, cand, history, scorer)
            seq += 1
            heapq.heappush(queue, QueueEntry(s1.digest, cand.op, score, gammas, seq))
            pushed.append({"op": cand.op.to_json(), "level": cand.atomic.level, "score": round(score, 12)})
        record["pushed"] = pushed
        _emit(trace, record, on_iteration)

    return NavResult(None, history, None, step, trace)


def _emit(trace: list, record: dict, cb) -> None:
    trace.append(record)
    if cb is not None:
        cb(record)
