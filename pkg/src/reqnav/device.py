"""Deterministic application simulator driven by declarative app specs.

An app spec is a finite state machine whose states are UI trees and whose
transitions fire when an operation's resolved element matches a transition
selector.  Sessions keep a per-state overlay so that effects (e.g. a deleted
note) persist while navigating, and scroll offsets for windowed lists.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, replace
from pathlib import Path as FsPath
from typing import Any, Iterable, Mapping

import jsonschema

from .errors import (
    DanglingStateRef,
    NondeterministicTransition,
    ParseError,
    ReqnavError,
    SchemaError,
    SelectorUnresolved,
    TargetNotFound,
)
from .ui_model import (
    Action,
    Operation,
    Path,
    Selector,
    UIElement,
    UIState,
    element_at,
    iter_elements,
    replace_at,
    resolve_selector,
)

_SELECTOR_SCHEMA = {
    "type": "object",
    "properties": {
        "resource-id": {"type": "string"},
        "text": {"type": "string"},
        "text-regex": {"type": "string"},
        "content-desc": {"type": "string"},
        "class": {"type": "string"},
        "index": {"type": "integer", "minimum": 0},
        "root": {"type": "boolean"},
    },
    "additionalProperties": False,
    "minProperties": 1,
}
_NODE_SCHEMA = {
    "type": "object",
    "properties": {
        "attrs": {"type": "object", "additionalProperties": {"type": "string"}},
        "children": {"type": "array", "items": {"$ref": "#/$defs/node"}},
    },
    "required": ["attrs"],
    "additionalProperties": False,
}
_ACTION_SCHEMA = {
    "oneOf": [
        {"type": "string"},
        {
            "type": "object",
            "properties": {
                "kind": {"type": "string"},
                "direction": {"type": "string"},
                "payload": {"type": "string"},
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
    ]
}
_EFFECT_SCHEMA = {
    "type": "object",
    "properties": {
        "op": {"enum": ["set", "unset", "remove", "append"]},
        "selector": {"$ref": "#/$defs/selector"},
        "attrs": {"type": "object", "additionalProperties": {"type": "string"}},
        "keys": {"type": "array", "items": {"type": "string"}},
        "node": {"$ref": "#/$defs/node"},
    },
    "required": ["op", "selector"],
    "additionalProperties": False,
}
APP_SCHEMA = {
    "$defs": {"selector": _SELECTOR_SCHEMA, "node": _NODE_SCHEMA},
    "type": "object",
    "properties": {
        "app_id": {"type": "string", "minLength": 1},
        "initial": {"type": "string"},
        "states": {
            "type": "object",
            "minProperties": 1,
            "additionalProperties": {"$ref": "#/$defs/node"},
        },
        "transitions": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": "string"},
                    "from": {"type": "string"},
                    "selector": {"$ref": "#/$defs/selector"},
                    "action": _ACTION_SCHEMA,
                    "to": {"type": "string"},
                    "effects": {"type": "array", "items": _EFFECT_SCHEMA},
                },
                "required": ["from", "selector", "action", "to"],
                "additionalProperties": False,
            },
        },
        "variant": {"type": "string", "pattern": "^(correct|faulty:.+)$"},
        "description": {"type": "string"},
    },
    "required": ["app_id", "initial", "states"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class Effect:
    """Edit applied to the destination state's tree when a transition fires."""

    op: str
    selector: Selector
    attrs: Mapping[str, str] = field(default_factory=dict)
    keys: tuple[str, ...] = ()
    node: UIElement | None = None

    def apply(self, root: UIElement, payload: str | None = None) -> UIElement:
        # Deepest-first so earlier paths stay valid while editing.
        paths = sorted(
            resolve_selector(UIState(root), self.selector), key=lambda p: (len(p), p), reverse=True
        )
        for path in paths:
            target = element_at(root, path)
            if self.op == "set":
                attrs = dict(target.attrs)
                for k, v in self.attrs.items():
                    attrs[k] = v.replace("{payload}", payload or "")
                root = replace_at(root, path, UIElement(attrs, target.children))
            elif self.op == "unset":
                attrs = {k: v for k, v in target.attrs.items() if k not in self.keys}
                root = replace_at(root, path, UIElement(attrs, target.children))
            elif self.op == "remove":
                if path:
                    root = replace_at(root, path, None)
            elif self.op == "append" and self.node is not None:
                root = replace_at(root, path, UIElement(target.attrs, target.children + (self.node,)))
        return root

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"op": self.op, "selector": self.selector.to_json()}
        if self.attrs:
            out["attrs"] = dict(self.attrs)
        if self.keys:
            out["keys"] = list(self.keys)
        if self.node is not None:
            out["node"] = self.node.to_json()
        return out

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Effect":
        node = UIElement.from_json(data["node"]) if "node" in data else None
        return cls(
            data["op"],
            Selector.from_json(data["selector"]),
            dict(data.get("attrs", {})),
            tuple(data.get("keys", ())),
            node,
        )


@dataclass(frozen=True)
class Transition:
    source: str
    selector: Selector
    action: Action
    target: str
    effects: tuple[Effect, ...] = ()
    id: str | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.id is not None:
            out["id"] = self.id
        out.update(
            {
                "from": self.source,
                "selector": self.selector.to_json(),
                "action": self.action.to_json(),
                "to": self.target,
            }
        )
        if self.effects:
            out["effects"] = [e.to_json() for e in self.effects]
        return out


@dataclass(frozen=True)
class AppSpec:
    app_id: str
    initial: str
    states: Mapping[str, UIState]
    transitions: tuple[Transition, ...] = ()
    variant: str = "correct"
    description: str = ""

    @property
    def is_correct(self) -> bool:
        return self.variant == "correct"

    def transition(self, tid: str) -> tuple[int, Transition]:
        for i, t in enumerate(self.transitions):
            if t.id == tid:
                return i, t
        raise TargetNotFound(f"no transition with id {tid!r} in {self.app_id}")

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "app_id": self.app_id,
            "initial": self.initial,
            "states": {sid: st.root.to_json() for sid, st in self.states.items()},
            "transitions": [t.to_json() for t in self.transitions],
            "variant": self.variant,
        }
        if self.description:
            out["description"] = self.description
        return out


# --------------------------------------------------------------------------
# loading and validation


def app_from_dict(data: Any) -> AppSpec:
    try:
        jsonschema.validate(data, APP_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(where, exc.message) from None

    try:
        states = {
            sid: UIState(UIElement.from_json(tree), page_id=sid) for sid, tree in data["states"].items()
        }
        transitions = []
        for i, t in enumerate(data.get("transitions", [])):
            transitions.append(
                Transition(
                    t["from"],
                    Selector.from_json(t["selector"]),
                    Action.from_json(t["action"]),
                    t["to"],
                    tuple(Effect.from_json(e) for e in t.get("effects", [])),
                    t.get("id"),
                )
            )
    except (ReqnavError, ValueError) as exc:
        raise SchemaError("transitions", str(exc)) from None

    app = AppSpec(
        data["app_id"],
        data["initial"],
        states,
        tuple(transitions),
        data.get("variant", "correct"),
        data.get("description", ""),
    )
    validate_app(app)
    return app


def validate_app(app: AppSpec) -> None:
    if app.initial not in app.states:
        raise DanglingStateRef("initial", f"unknown state {app.initial!r}")
    seen_ids: set[str] = set()
    for i, t in enumerate(app.transitions):
        for end, sid in (("from", t.source), ("to", t.target)):
            if sid not in app.states:
                raise DanglingStateRef(f"transitions/{i}/{end}", f"unknown state {sid!r}")
        if t.id is not None:
            if t.id in seen_ids:
                raise SchemaError(f"transitions/{i}/id", f"duplicate id {t.id!r}")
            seen_ids.add(t.id)
    # At most one transition may fire for a given (state, element, gesture).
    for i, a in enumerate(app.transitions):
        for j in range(i + 1, len(app.transitions)):
            b = app.transitions[j]
            if a.source != b.source or not a.action.same_gesture(b.action):
                continue
            full = app.states[a.source]
            if set(resolve_selector(full, a.selector)) & set(resolve_selector(full, b.selector)):
                raise NondeterministicTransition(
                    f"transitions/{j}", f"overlaps transition {i} on state {a.source!r}"
                )


def load_app(path: str | FsPath) -> AppSpec:
    try:
        data = json.loads(FsPath(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return app_from_dict(data)


# --------------------------------------------------------------------------
# sessions


def _window(el: UIElement) -> int | None:
    if not el.flag("scrollable"):
        return None
    raw = el.attrs.get("window")
    if raw is None:
        return None
    try:
        size = int(raw)
    except ValueError:
        return None
    return size if size > 0 else None


@dataclass
class DeviceSession:
    """One simulated device running one app.  Owned by a single worker."""

    app: AppSpec
    current: str = ""
    trace: list[Operation] = field(default_factory=list)
    _trees: dict[str, UIElement] = field(default_factory=dict, repr=False)
    _offsets: dict[Path, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self.current:
            self.current = self.app.initial
        if not self._trees:
            self._trees = {sid: st.root for sid, st in self.app.states.items()}

    # -- observation -----------------------------------------------------

    def _project(self) -> tuple[UIElement, dict[Path, Path]]:
        mapping: dict[Path, Path] = {}

        def walk(el: UIElement, obs: Path, full: Path) -> UIElement:
            mapping[obs] = full
            size = _window(el)
            attrs = dict(el.attrs)
            indices = range(len(el.children))
            if size is not None:
                off = self._offsets.get(full, 0)
                indices = range(off, min(off + size, len(el.children)))
                attrs["item-count"] = str(len(el.children))
                attrs["window-offset"] = str(off)
            kids = tuple(
                walk(el.children[i], obs + (n,), full + (i,)) for n, i in enumerate(indices)
            )
            return UIElement(attrs, kids)

        root = walk(self._trees[self.current], (), ())
        return root, mapping

    def observe(self) -> UIState:
        root, _ = self._project()
        return UIState(root, page_id=self.current)

    @property
    def state(self) -> UIState:
        return self.observe()

    # -- interaction -----------------------------------------------------

    def perform(self, op: Operation) -> UIState:
        if op.action.kind == "launch":
            return self.observe()
        observed_root, mapping = self._project()
        observed = UIState(observed_root, self.current)
        hits = resolve_selector(observed, op.selector)
        if not hits:
            raise SelectorUnresolved(op.selector, self.current)
        target = hits[0]

        fired = None
        for t in self.app.transitions:
            if t.source != self.current or not t.action.same_gesture(op.action):
                continue
            if target in resolve_selector(observed, t.selector):
                fired = t
                break

        if fired is not None:
            tree = self._trees[fired.target]
            for eff in fired.effects:
                tree = eff.apply(tree, op.action.payload)
            self._trees[fired.target] = tree
            self.current = fired.target
            self._offsets = {}
        elif op.action.kind == "scroll":
            self._scroll(mapping[target], op.action.direction)

        self.trace.append(op)
        return self.observe()

    def _scroll(self, full_path: Path, direction: str | None) -> None:
        el = element_at(self._trees[self.current], full_path)
        size = _window(el)
        if size is None:
            return
        n = len(el.children)
        off = self._offsets.get(full_path, 0)
        if direction == "down":
            off = min(off + size, max(0, n - size))
        elif direction == "up":
            off = max(0, off - size)
        self._offsets[full_path] = off

    def reset(self) -> UIState:
        self.current = self.app.initial
        self.trace = []
        self._trees = {sid: st.root for sid, st in self.app.states.items()}
        self._offsets = {}
        return self.observe()


def open_session(app: AppSpec) -> DeviceSession:
    return DeviceSession(app)


def perform(session: DeviceSession, op: Operation) -> UIState:
    return session.perform(op)


def reset(session: DeviceSession) -> UIState:
    return session.reset()


# --------------------------------------------------------------------------
# fault injection

MUTATION_KINDS = ("remove-element", "corrupt-label", "retarget-transition", "noop-transition", "drop-effect")


@dataclass(frozen=True)
class Mutation:
    id: str
    kind: str
    target: Mapping[str, Any]
    expect_phase: str | None = None
    note: str = ""

    def __post_init__(self) -> None:
        if self.kind not in MUTATION_KINDS:
            raise SchemaError("kind", f"unknown mutation kind {self.kind!r}")

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Mutation":
        try:
            return cls(
                data["id"], data["kind"], dict(data["target"]),
                data.get("expect_phase"), data.get("note", ""),
            )
        except KeyError as exc:
            raise SchemaError(str(exc.args[0]), "missing mutation field") from None

    def to_json(self) -> dict[str, Any]:
        out = {"id": self.id, "kind": self.kind, "target": dict(self.target)}
        if self.expect_phase:
            out["expect_phase"] = self.expect_phase
        if self.note:
            out["note"] = self.note
        return out


def _corrupt(value: str) -> str:
    if len(value) < 2:
        return value + "_"
    mid = len(value) // 2
    return value[:mid] + value[mid + 1:]


def apply_mutation(app: AppSpec, m: Mutation) -> AppSpec:
    """Return a faulty variant of ``app``; the result always re-validates."""
    data = copy.deepcopy(app.to_json())
    tgt = m.target
    if m.kind in ("remove-element", "corrupt-label"):
        sid = tgt.get("state")
        if sid not in app.states:
            raise TargetNotFound(f"state {sid!r} not in {app.app_id}")
        sel = Selector.from_json(tgt["selector"])
        root = app.states[sid].root
        hits = resolve_selector(UIState(root), sel)
        hits = [h for h in hits if h]  # never the root
        if not hits:
            raise TargetNotFound(f"{sel} matches nothing in {sid!r}")
        for path in sorted(hits, key=lambda p: (len(p), p), reverse=True):
            if m.kind == "remove-element":
                root = replace_at(root, path, None)
            else:
                el = element_at(root, path)
                key = tgt.get("attr", "text")
                attrs = dict(el.attrs)
                attrs[key] = tgt.get("value", _corrupt(attrs.get(key, "")))
                root = replace_at(root, path, UIElement(attrs, el.children))
        data["states"][sid] = root.to_json()
    else:
        idx, _ = app.transition(tgt.get("transition", ""))
        entry = data["transitions"][idx]
        if m.kind == "retarget-transition":
            if tgt.get("to") not in app.states:
                raise TargetNotFound(f"retarget destination {tgt.get('to')!r} unknown")
            entry["to"] = tgt["to"]
        elif m.kind == "noop-transition":
            del data["transitions"][idx]
        elif m.kind == "drop-effect":
            if not entry.get("effects"):
                raise TargetNotFound(f"transition {tgt['transition']!r} has no effects")
            entry.pop("effects")
    data["variant"] = f"faulty:{m.id}"
    return app_from_dict(data)


def load_mutations(path: str | FsPath) -> dict[str, list[Mutation]]:
    """Mutations file: ``{app_id: [mutation, ...]}``."""
    try:
        raw = json.loads(FsPath(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not isinstance(raw, Mapping):
        raise SchemaError("<root>", "mutations file must map app_id to a list")
    return {app_id: [Mutation.from_json(m) for m in items] for app_id, items in raw.items()}


def reachable_states(app: AppSpec) -> set[str]:
    """State ids reachable from the initial state through declared transitions."""
    seen = {app.initial}
    frontier = [app.initial]
    while frontier:
        sid = frontier.pop()
        for t in app.transitions:
            if t.source == sid and t.target not in seen:
                seen.add(t.target)
                frontier.append(t.target)
    return seen
