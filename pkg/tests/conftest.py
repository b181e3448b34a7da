from __future__ import annotations

from collections import deque
from pathlib import Path

import pytest

from reqnav.bench import default_corpus
from reqnav.device import AppSpec, DeviceSession, load_app
from reqnav.scoring import LexicalScorer
from reqnav.ui_model import Action, Operation, UIState, unique_selector_for

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def scorer() -> LexicalScorer:
    return LexicalScorer()


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return default_corpus()


def fixture_app(name: str) -> AppSpec:
    return load_app(FIXTURES / f"{name}.json")


def corpus_app(name: str) -> AppSpec:
    return load_app(default_corpus() / "apps" / f"{name}.json")


def raw_ops(state: UIState) -> list[Operation]:
    """Every click or text input the page offers, derived straight from the tree."""
    ops = []
    for path, el in state.elements():
        if el.get("class").endswith("EditText"):
            action = Action("input-text", payload="x")
        elif el.flag("clickable"):
            action = Action("click")
        else:
            continue
        sel = unique_selector_for(state, path)
        if sel is not None:
            ops.append(Operation(sel, action))
    return ops


def bfs_entries(app: AppSpec, requirement: str, scorer, max_depth: int = 3) -> dict[str, int]:
    """Exhaustive breadth-first search: entry page id -> shallowest depth."""
    found: dict[str, int] = {}
    seen: set[str] = set()
    frontier = deque([()])
    while frontier:
        path = frontier.popleft()
        session = DeviceSession(app)
        state = session.reset()
        for op in path:
            state = session.perform(op)
        if state.digest in seen:
            continue
        seen.add(state.digest)
        if scorer.page_explore(requirement, state, 1).is_entry:
            found.setdefault(state.page_id, len(path))
        if len(path) < max_depth:
            frontier.extend(path + (op,) for op in raw_ops(state))
    return found
