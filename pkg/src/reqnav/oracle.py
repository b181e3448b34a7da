"""Correctness oracles from the difference between pre- and post-execution states.

Both states are captured by replaying from a fresh session and compared on
their compressed trees.  Sub-oracles are derived from the diff in a fixed
order (requirement-matching changes, removals, other changes) and topped off
with a guard that asserts an untouched region survived.  The verdict is the
conjunction of all sub-oracle results.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from difflib import SequenceMatcher
from typing import Any, Mapping, Sequence

from .device import AppSpec, open_session
from .errors import NoDiffDerivable, ReplayDiverged
from .trigger import Assertion, check_assertion
from .ui_model import (
    Operation,
    Path,
    Selector,
    UIElement,
    UIState,
    _canonical,
    element_at,
    iter_elements,
    resolve_selector,
    unique_selector_for,
)

DEFAULT_ETA = 3
REMOVAL_WORDS = ("delete", "remove", "clear", "erase", "discard", "trash")
TARGETS = ("pre", "post")


@dataclass(frozen=True)
class StatePair:
    pre: UIState
    post: UIState
    ops: tuple[Operation, ...] = ()
    pre_index: int = 0  # number of ops replayed to reach ``pre``
    fallback_pre_digest: str = ""  # state right before the final op, kept for audit

    def to_json(self) -> dict[str, Any]:
        return {
            "pre": self.pre.digest,
            "post": self.post.digest,
            "pre_page": self.pre.page_id,
            "post_page": self.post.page_id,
            "pre_index": self.pre_index,
            "before_final_op": self.fallback_pre_digest,
        }


@dataclass(frozen=True)
class SubOracle:
    assertion: Assertion
    target: str = "post"
    rationale: str = ""

    def __post_init__(self) -> None:
        if self.target not in TARGETS:
            raise ValueError(f"sub-oracle target must be pre or post, got {self.target!r}")

    def to_json(self) -> dict[str, Any]:
        return {**self.assertion.to_json(), "target": self.target, "rationale": self.rationale}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "SubOracle":
        return cls(Assertion.from_json(data), data.get("target", "post"), data.get("rationale", ""))


@dataclass(frozen=True)
class SubResult:
    oracle: SubOracle
    passed: bool
    detail: str = ""


@dataclass
class Verdict:
    decision: str
    sub_results: list[SubResult] = field(default_factory=list)
    phase_attribution: str = "none"

    @property
    def passed(self) -> bool:
        return self.decision == "pass"

    def to_json(self) -> dict[str, Any]:
        return {
            "decision": self.decision,
            "phase_attribution": self.phase_attribution,
            "sub_oracles": [
                {**r.oracle.to_json(), "pass": r.passed, "detail": r.detail} for r in self.sub_results
            ],
        }


# --------------------------------------------------------------------------
# capture


def _compressed(state: UIState) -> UIState:
    return UIState(state.compressed, state.page_id)


def capture_pre_post(
    app: AppSpec, path_ops: Sequence[Operation], executed_ops: Sequence[Operation]
) -> StatePair:
    """Replay ``path_ops + executed_ops`` and pick the pre/post pair.

    ``pre`` is the last state before the final operation that shows the same
    page as ``post`` (so a confirmation dialog in between is skipped); with no
    such page it is the state right before the final operation.
    """
    ops = tuple(path_ops) + tuple(executed_ops)
    session = open_session(app)
    states = [session.reset()]
    for op in ops:
        states.append(session.perform(op))
    post = states[-1]

    last = max(len(ops) - 1, 0)
    pre_index = last
    for i in range(last, -1, -1):
        if states[i].page_id == post.page_id:
            pre_index = i
            break

    fresh = open_session(app)
    pre = fresh.reset()
    for i, op in enumerate(ops[:pre_index], start=1):
        pre = fresh.perform(op)
        if pre.digest != states[i].digest:
            raise ReplayDiverged(i, states[i].digest, pre.digest)
    return StatePair(_compressed(pre), _compressed(post), ops, pre_index, states[last].digest)


# --------------------------------------------------------------------------
# diff


@dataclass
class TreeDiff:
    changed: list[tuple[Path, Path]] = field(default_factory=list)  # (pre path, post path)
    added: list[Path] = field(default_factory=list)  # post paths, top-most only
    removed: list[Path] = field(default_factory=list)  # pre paths, top-most only
    unchanged: list[tuple[Path, Path]] = field(default_factory=list)
    ancestors: list[tuple[Path, Path]] = field(default_factory=list)  # paired nodes above a change

    @property
    def empty(self) -> bool:
        return not (self.changed or self.added or self.removed)


def _key(el: UIElement) -> tuple[str, str]:
    return el.get("resource-id"), el.get("class")


def diff_trees(pre: UIElement, post: UIElement) -> TreeDiff:
    """Match children by subtree identity, then by (resource-id, class) in order."""
    out = TreeDiff()

    def same(a: UIElement, b: UIElement, pa: Path, pb: Path) -> None:
        for (qa, _), (qb, _) in zip(iter_elements(a, pa), iter_elements(b, pb)):
            out.unchanged.append((qa, qb))

    def walk(a: UIElement, b: UIElement, pa: Path, pb: Path) -> bool:
        touched = dict(a.attrs) != dict(b.attrs)
        if touched:
            out.changed.append((pa, pb))
        else:
            out.unchanged.append((pa, pb))
        sa = [_canonical(c) for c in a.children]
        sb = [_canonical(c) for c in b.children]
        for tag, i1, i2, j1, j2 in SequenceMatcher(None, sa, sb, autojunk=False).get_opcodes():
            if tag == "equal":
                for i, j in zip(range(i1, i2), range(j1, j2)):
                    same(a.children[i], b.children[j], pa + (i,), pb + (j,))
                continue
            left = list(range(i1, i2))
            right = list(range(j1, j2))
            used: set[int] = set()
            for i in left:
                match = next(
                    (j for j in right if j not in used and _key(b.children[j]) == _key(a.children[i])),
                    None,
                )
                if match is None:
                    out.removed.append(pa + (i,))
                    touched = True
                    continue
                used.add(match)
                walk(a.children[i], b.children[match], pa + (i,), pb + (match,))
                touched = True
            for j in right:
                if j not in used:
                    out.added.append(pb + (j,))
                    touched = True
        if touched and (pa, pb) not in out.changed:
            out.ancestors.append((pa, pb))
        return touched

    walk(pre, post, (), ())
    return out


# --------------------------------------------------------------------------
# generation


def _selector(state: UIState, path: Path) -> Selector | None:
    if not path:
        return None
    sel = unique_selector_for(state, path, allow_index=False)
    return sel


def _text_holder(el: UIElement) -> UIElement | None:
    for _, d in iter_elements(el):
        if d.text or d.get("content-desc"):
            return d
    return None


def lexical_oracle(requirement: str, pair: StatePair, eta: int, scorer) -> list[SubOracle]:
    lex = scorer.lexicon
    keys = lex.keyphrase(requirement)
    pre, post = pair.pre, pair.post
    diff = diff_trees(pre.root, post.root)

    matched: list[SubOracle] = []
    removed: list[SubOracle] = []
    other: list[SubOracle] = []
    seen: set[str] = set()

    def push(bucket: list[SubOracle], sub: SubOracle) -> None:
        blob = repr(sub.to_json())
        if blob not in seen:
            seen.add(blob)
            bucket.append(sub)

    post_paths = [pb for _, pb in diff.changed]
    for top in diff.added:
        post_paths += [p for p, _ in iter_elements(element_at(post.root, top), top)]
    pre_of = {pb: pa for pa, pb in diff.changed}

    for pb in sorted(set(post_paths)):
        el = element_at(post.root, pb)
        sel = _selector(post, pb)
        if sel is None:
            continue
        before = element_at(pre.root, pre_of[pb]) if pb in pre_of else None
        delta = sorted(
            k for k in set(el.attrs) | set(before.attrs if before else ())
            if before is None or el.get(k) != before.get(k)
        )
        level, why = scorer._literal_or_semantic(keys, el)
        if level >= 4:
            toks = lex.tokens(el.text) | lex.tokens(el.get("content-desc"))
            hit = sorted(t for t in keys if lex.synonyms(t) & toks)
            if "text" in delta or before is None:
                if el.text and lex.tokens(el.text) & lex.expand(hit):
                    push(matched, SubOracle(
                        Assertion(sel, "text-matches", f"{el.label!r} should mention the requirement",
                                  regex=lex.regex_for(hit)),
                        "post", why,
                    ))
                    continue
                push(matched, SubOracle(
                    Assertion(sel, "exists", f"{el.label!r} should appear after execution"), "post", why
                ))
                continue
            key = next(k for k in delta)
            push(matched, SubOracle(
                Assertion(sel, "attr-equals", f"{el.label!r} should have {key}={el.get(key)!r}",
                          key=key, value=el.get(key)),
                "post", why,
            ))
            continue
        if before is None or not delta:
            continue
        key = "text" if "text" in delta else delta[0]
        push(other, SubOracle(
            Assertion(sel, "attr-equals", f"{el.label or sel} should have {key}={el.get(key)!r}",
                      key=key, value=el.get(key)),
            "post", f"changed {key}: {before.get(key)!r} -> {el.get(key)!r}",
        ))

    for pa in diff.removed:
        holder = _text_holder(element_at(pre.root, pa))
        if holder is None:
            continue
        if holder.text:
            sel = Selector(text=holder.text)
        else:
            sel = Selector(content_desc=holder.get("content-desc"))
        if len(resolve_selector(pre, sel)) != 1:
            continue
        push(removed, SubOracle(
            Assertion(sel, "absent", f"{holder.label!r} should be gone after execution"),
            "post", "removed by the functionality",
        ))

    intent = bool(keys & lex.expand(lex.tokens(" ".join(REMOVAL_WORDS))))
    if not matched and not (intent and removed):
        raise NoDiffDerivable(
            "pre/post difference shows no requirement-related change"
            if not diff.empty else "pre and post states are identical"
        )

    primary = matched + removed + other
    guard = _guard(pre, post, diff)
    if eta >= 2 and guard is not None:
        return primary[: eta - 1] + [guard]
    return primary[:eta]


def _guard(pre: UIState, post: UIState, diff: TreeDiff) -> SubOracle | None:
    # deepest untouched-attribute ancestor of a change first, then anything unchanged
    for _, pb in sorted(diff.ancestors, key=lambda p: -len(p[1])):
        sel = _selector(post, pb)
        if sel is not None:
            el = element_at(post.root, pb)
            return SubOracle(
                Assertion(sel, "exists", f"container {el.label or sel} should survive"),
                "post", "unchanged ancestor of the diff",
            )
    for _, pb in diff.unchanged:
        sel = _selector(post, pb)
        if sel is not None:
            el = element_at(post.root, pb)
            return SubOracle(
                Assertion(sel, "exists", f"{el.label or sel} should be untouched"),
                "post", "unchanged region",
            )
    return None


def generate_oracle(requirement: str, pair: StatePair, eta: int = DEFAULT_ETA, scorer=None) -> list[SubOracle]:
    if eta < 1:
        raise ValueError("eta must be >= 1")
    if scorer is None:
        from .scoring import LexicalScorer

        scorer = LexicalScorer()
    if getattr(scorer, "mode", "lexical") == "remote":
        return scorer.oracle(requirement, pair, eta)
    return lexical_oracle(requirement, pair, eta, scorer)


# --------------------------------------------------------------------------
# evaluation


def evaluate(sub_oracles: Sequence[SubOracle], pair: StatePair) -> Verdict:
    results = []
    for sub in sub_oracles:
        state = pair.pre if sub.target == "pre" else pair.post
        try:
            ok, detail = check_assertion(state, sub.assertion)
        except re.error as exc:
            ok, detail = False, f"bad regex: {exc}"
        results.append(SubResult(sub, ok, detail))
    passed = all(r.passed for r in results)
    return Verdict("pass" if passed else "fail", results, "none" if passed else "phase3")
