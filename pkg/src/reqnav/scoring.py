"""Relevance scoring: five-level atomic scores, path scores, and the lexical scorer.

The lexical scorer is a transparent, deterministic stand-in for a language
model.  It turns the requirement into a keyphrase (a set of stemmed content
tokens) and rates each interactable element against it:

    5  literal:    element tokens and keyphrase contain one another
    4  semantic:   an element token shares a synonym group with the keyphrase
    3  structural: a descendant element rates 4 or 5
    2  aggregate:  element text is a generic hub word (settings, menu, ...)
    1  otherwise
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path as FsPath
from typing import Iterable, Protocol, Sequence

from .errors import EmptyPath, SelectorUnresolved
from .ui_model import (
    Action,
    Operation,
    Path,
    UIElement,
    UIState,
    element_at,
    iter_elements,
    resolve_selector,
    unique_selector_for,
)

GAMMAS = (0.2, 0.4, 0.6, 0.8, 1.0)
DEFAULT_K = 3
PROBE_TOKEN = "reqnav-probe"

STOP_WORDS = frozenset(
    """
    a an the and or but nor to for of in on at by with from into onto as is are was were be been
    being it its this that these those there here i me my mine we us our you your he she they them
    their user users app apps application want wants wanted would like please should could can
    cannot able ability allow allows allowing let lets add adds adding added support supports
    supported feature features new functionality function make makes have has had need needs
    enable enabled enabling disable disabled turn turning show showing shown switch switching
    change changing use using via so when while before after then than also all any some each
    every very just only do does did done get gets give gives provide provides within without
    way which what who how why where will shall may might must on off up down out over under
    again current currently
    """.split()
)

GENERIC_HUBS = ("settings", "options", "more", "menu", "preferences", "tools")

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_QUOTED_RE = re.compile(r"[\"'“‘]([^\"'”’]+)[\"'”’]")


def stem(token: str) -> str:
    t = token
    if len(t) > 3 and t.endswith("s") and not t.endswith("ss"):
        t = t[:-1]
    if len(t) > 5 and t.endswith("ing"):
        t = t[:-3]
    elif len(t) > 4 and t.endswith("ed"):
        t = t[:-2]
    if len(t) > 3 and t.endswith("e"):
        t = t[:-1]
    return t


@dataclass
class Lexicon:
    """Tokenizer, stemmer and synonym table used by the lexical scorer."""

    groups: list[frozenset[str]] = field(default_factory=list)
    stop_words: frozenset[str] = STOP_WORDS

    def __post_init__(self) -> None:
        self._syn: dict[str, frozenset[str]] = {}
        for g in self.groups:
            for t in g:
                self._syn[t] = self._syn.get(t, frozenset()) | g
        self.generic = frozenset(stem(w) for w in GENERIC_HUBS)

    @classmethod
    def from_groups(cls, groups: Iterable[Iterable[str]]) -> "Lexicon":
        stemmed = []
        for g in groups:
            toks = frozenset(stem(w.lower()) for w in g if w.strip())
            if len(toks) > 1:
                stemmed.append(toks)
        return cls(stemmed)

    @classmethod
    def load(cls, path: str | FsPath | None = None) -> "Lexicon":
        if path is None:
            raw = resources.files("reqnav").joinpath("data/synonyms.json").read_text(encoding="utf-8")
        else:
            raw = FsPath(path).read_text(encoding="utf-8")
        data = json.loads(raw)
        groups = data["groups"] if isinstance(data, dict) else data
        return cls.from_groups(groups)

    def tokens(self, text: str) -> frozenset[str]:
        words = _TOKEN_RE.findall(text.lower())
        return frozenset(stem(w) for w in words if w not in self.stop_words and len(w) > 1)

    def keyphrase(self, requirement: str) -> frozenset[str]:
        return self.tokens(requirement)

    def synonyms(self, token: str) -> frozenset[str]:
        return self._syn.get(token, frozenset({token}))

    def expand(self, tokens: Iterable[str]) -> frozenset[str]:
        out: set[str] = set()
        for t in tokens:
            out |= self.synonyms(t)
        return frozenset(out)

    def regex_for(self, tokens: Iterable[str]) -> str:
        alts = sorted(self.expand(tokens))
        return "(?i).*(" + "|".join(re.escape(a) for a in alts) + ").*"


def requirement_payload(requirement: str) -> str:
    """Text to type for input actions: the first quoted literal, else a probe token."""
    m = _QUOTED_RE.search(requirement)
    return m.group(1) if m else PROBE_TOKEN


# --------------------------------------------------------------------------
# value types


@dataclass(frozen=True, order=True)
class RelevanceLevel:
    level: int

    def __post_init__(self) -> None:
        if not isinstance(self.level, int) or not 1 <= self.level <= 5:
            raise ValueError(f"relevance level must be an int in 1..5, got {self.level!r}")

    @property
    def gamma(self) -> float:
        return self.level / 5


@dataclass(frozen=True)
class CandidateOp:
    op: Operation
    atomic: RelevanceLevel
    rationale: str = ""

    def to_json(self) -> dict:
        return {
            "selector": self.op.selector.to_json(),
            "action": self.op.action.to_json(),
            "level": self.atomic.level,
            "rationale": self.rationale,
        }


@dataclass(frozen=True)
class ExploreResult:
    is_entry: bool
    candidates: tuple[CandidateOp, ...] = ()

    def to_json(self) -> dict:
        return {"is_entry": self.is_entry, "candidates": [c.to_json() for c in self.candidates]}


def path_score(gammas: Sequence[float]) -> float:
    """Geometric mean of the atomic scores along a path."""
    if len(gammas) == 0:
        raise EmptyPath("path score needs at least one atomic score")
    for g in gammas:
        if not any(math.isclose(g, v, rel_tol=0, abs_tol=1e-12) for v in GAMMAS):
            raise ValueError(f"atomic score {g!r} is not one of {GAMMAS}")
    return math.exp(math.fsum(math.log(g) for g in gammas) / len(gammas))


class Scorer(Protocol):
    def page_explore(self, requirement: str, state: UIState, k: int = DEFAULT_K) -> ExploreResult: ...

    def atomic_score(self, requirement: str, state: UIState, op: Operation) -> RelevanceLevel: ...


# --------------------------------------------------------------------------
# lexical scorer


class LexicalScorer:
    """Deterministic keyphrase/synonym scorer; pure with respect to its inputs."""

    mode = "lexical"

    def __init__(self, lexicon: Lexicon | None = None):
        self.lexicon = lexicon or Lexicon.load()

    # -- element level ---------------------------------------------------

    def _literal_or_semantic(self, keys: frozenset[str], el: UIElement) -> tuple[int, str]:
        best = (1, "")
        if not keys:
            return best
        for attr in ("text", "content-desc"):
            value = el.get(attr)
            if not value:
                continue
            toks = self.lexicon.tokens(value)
            if not toks:
                continue
            if toks <= keys or keys <= toks:
                return 5, f"literal equivalence: {attr} {value!r}"
            if any(self.lexicon.synonyms(t) & keys for t in toks):
                best = max(best, (4, f"semantic equivalence: {attr} {value!r}"))
        return best

    def element_level(self, keys: frozenset[str], state: UIState, path: Path) -> tuple[int, str]:
        el = element_at(state.root, path)
        level, why = self._literal_or_semantic(keys, el)
        if level >= 4:
            return level, why
        for child in el.children:
            for _, desc in iter_elements(child):
                if self._literal_or_semantic(keys, desc)[0] >= 4:
                    return 3, f"structural relation: contains {desc.label!r}"
        for attr in ("text", "content-desc"):
            toks = self.lexicon.tokens(el.get(attr))
            if toks and toks <= self.lexicon.generic:
                return 2, f"generic aggregation: {el.get(attr)!r}"
        return 1, "no relation"

    def atomic_score(self, requirement: str, state: UIState, op: Operation) -> RelevanceLevel:
        hits = resolve_selector(state, op.selector)
        if not hits:
            raise SelectorUnresolved(op.selector, state.page_id)
        keys = self.lexicon.keyphrase(requirement)
        return RelevanceLevel(self.element_level(keys, state, hits[0])[0])

    # -- page level ------------------------------------------------------

    def interactables(self, requirement: str, state: UIState) -> list[tuple[Path, Operation]]:
        """Operations applicable to the page, in document order."""
        payload = requirement_payload(requirement)
        out = []
        for path, el in state.elements():
            if not el.flag("enabled"):
                continue
            action = None
            if el.get("class").endswith("EditText"):
                action = Action("input-text", payload=payload)
            elif el.flag("clickable"):
                action = Action("click")
            elif el.flag("scrollable") and _can_scroll_forward(el):
                action = Action("scroll", "down")
            if action is None:
                continue
            sel = unique_selector_for(state, path)
            if sel is None:
                continue
            out.append((path, Operation(sel, action)))
        return out

    def rate(self, requirement: str, state: UIState) -> list[tuple[Path, CandidateOp]]:
        keys = self.lexicon.keyphrase(requirement)
        rated = []
        for path, op in self.interactables(requirement, state):
            level, why = self.element_level(keys, state, path)
            rated.append((path, CandidateOp(op, RelevanceLevel(level), why)))
        return rated

    def page_explore(self, requirement: str, state: UIState, k: int = DEFAULT_K) -> ExploreResult:
        if k < 1:
            raise ValueError("k must be >= 1")
        rated = self.rate(requirement, state)
        triggers = [
            c for _, c in rated if c.atomic.level == 5 and c.op.action.kind in ("click", "input-text")
        ]
        if triggers:
            return ExploreResult(True, tuple(triggers[:k]))
        # stable sort keeps document order among equal levels
        ranked = sorted((c for _, c in rated), key=lambda c: -c.atomic.level)
        return ExploreResult(False, tuple(ranked[:k]))


def _can_scroll_forward(el: UIElement) -> bool:
    try:
        total = int(el.attrs["item-count"])
        off = int(el.attrs.get("window-offset", "0"))
    except (KeyError, ValueError):
        return False
    return off + len(el.children) < total
