"""UI hierarchy model: elements, states, selectors, actions and operations.

A UI state is a rooted tree of :class:`UIElement` nodes carrying string
attributes, mirroring a mobile hierarchy dump.  Exploration identifies states
by the digest of their *compressed* tree, so cosmetic attributes such as
``bounds`` never make two screens look different.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Any, Iterator, Mapping, Sequence

from .errors import InvalidAction, InvalidRegex, InvalidSelector

Path = tuple[int, ...]

# Closed attribute vocabulary understood by the engine.  Anything else is
# carried along untouched (the simulator uses e.g. ``window``/``item-count``)
# but compression drops it.
KNOWN_ATTRIBUTES = frozenset(
    {
        "resource-id",
        "text",
        "content-desc",
        "class",
        "bounds",
        "clickable",
        "scrollable",
        "enabled",
        "checked",
        "selected",
    }
)
KEPT_ATTRIBUTES = (
    "resource-id",
    "text",
    "content-desc",
    "class",
    "clickable",
    "scrollable",
    "enabled",
    "checked",
    "selected",
)
# Boolean attributes are dropped when they carry their default value.
BOOLEAN_DEFAULTS = {
    "clickable": "false",
    "scrollable": "false",
    "enabled": "true",
    "checked": "false",
    "selected": "false",
}
# Attributes that on their own justify keeping a node after compression.
# ``class`` is structural and does not.
_SEMANTIC = frozenset(KEPT_ATTRIBUTES) - {"class"}


@dataclass(frozen=True)
class UIElement:
    attrs: Mapping[str, str] = field(default_factory=dict)
    children: tuple["UIElement", ...] = ()

    def __post_init__(self) -> None:
        clean = {str(k): str(v) for k, v in dict(self.attrs).items()}
        object.__setattr__(self, "attrs", MappingProxyType(clean))
        object.__setattr__(self, "children", tuple(self.children))

    def __hash__(self) -> int:
        return hash(_canonical(self))

    def get(self, key: str, default: str = "") -> str:
        return self.attrs.get(key, default)

    def flag(self, key: str) -> bool:
        return self.attrs.get(key, BOOLEAN_DEFAULTS.get(key, "false")) == "true"

    @property
    def text(self) -> str:
        return self.attrs.get("text", "")

    @property
    def label(self) -> str:
        """Best human-readable handle for logs."""
        for key in ("text", "content-desc", "resource-id", "class"):
            if self.attrs.get(key):
                return self.attrs[key]
        return "<node>"

    def to_json(self) -> dict[str, Any]:
        return {
            "attrs": dict(sorted(self.attrs.items())),
            "children": [c.to_json() for c in self.children],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "UIElement":
        if not isinstance(data, Mapping):
            raise ValueError("ui node must be an object")
        attrs = data.get("attrs", {})
        children = data.get("children", [])
        if not isinstance(attrs, Mapping) or not isinstance(children, list):
            raise ValueError("ui node needs an 'attrs' object and a 'children' list")
        return cls(attrs, tuple(cls.from_json(c) for c in children))


def node(attrs: Mapping[str, str] | None = None, *children: UIElement, **kw: str) -> UIElement:
    """Terse constructor for hand-written trees; ``resource_id=`` maps to ``resource-id``."""
    merged = dict(attrs or {})
    for key, value in kw.items():
        merged[key.replace("_", "-")] = value
    return UIElement(merged, children)


@dataclass(frozen=True)
class UIState:
    root: UIElement
    page_id: str | None = None

    @cached_property
    def compressed(self) -> UIElement:
        return _compress(self.root, is_root=True)

    @cached_property
    def digest(self) -> str:
        return hashlib.sha256(_canonical(self.compressed).encode("utf-8")).hexdigest()

    def elements(self) -> Iterator[tuple[Path, UIElement]]:
        return iter_elements(self.root)

    def element_at(self, path: Path) -> UIElement:
        return element_at(self.root, path)

    def to_json(self) -> dict[str, Any]:
        return self.root.to_json()

    @classmethod
    def from_json(cls, data: Mapping[str, Any], page_id: str | None = None) -> "UIState":
        return cls(UIElement.from_json(data), page_id)


# --------------------------------------------------------------------------
# tree helpers


def iter_elements(root: UIElement, prefix: Path = ()) -> Iterator[tuple[Path, UIElement]]:
    """Pre-order (document order) walk yielding ``(path, element)``."""
    stack: list[tuple[Path, UIElement]] = [(prefix, root)]
    while stack:
        path, el = stack.pop()
        yield path, el
        for i in range(len(el.children) - 1, -1, -1):
            stack.append((path + (i,), el.children[i]))


def element_at(root: UIElement, path: Path) -> UIElement:
    el = root
    for i in path:
        el = el.children[i]
    return el


def replace_at(root: UIElement, path: Path, new: UIElement | None) -> UIElement:
    """Return a copy of ``root`` with the node at ``path`` replaced (or removed if ``new`` is None)."""
    if not path:
        if new is None:
            raise ValueError("cannot remove the root")
        return new
    head, rest = path[0], path[1:]
    children = list(root.children)
    if rest:
        children[head] = replace_at(children[head], rest, new)
    elif new is None:
        del children[head]
    else:
        children[head] = new
    return UIElement(root.attrs, tuple(children))


def _canonical(el: UIElement) -> str:
    return json.dumps(el.to_json(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


# --------------------------------------------------------------------------
# compression / hashing / prompt rendering


def _kept_attrs(el: UIElement) -> dict[str, str]:
    kept = {}
    for key in KEPT_ATTRIBUTES:
        value = el.attrs.get(key)
        if value is None or value == "":
            continue
        if BOOLEAN_DEFAULTS.get(key) == value:
            continue
        kept[key] = value
    return kept


def _compress(el: UIElement, is_root: bool = False) -> UIElement | None:
    kept = _kept_attrs(el)
    children = tuple(c for c in (_compress(ch) for ch in el.children) if c is not None)
    if not is_root and not children and not (_SEMANTIC & kept.keys()):
        return None
    return UIElement(kept, children)


def compress_tree(state: UIState) -> UIState:
    return UIState(state.compressed, state.page_id)


def state_hash(state: UIState) -> str:
    return state.digest


def serialize_for_prompt(state: UIState) -> str:
    lines: list[str] = []

    def walk(el: UIElement, depth: int) -> None:
        cls = el.attrs.get("class", "")
        tag = cls.rsplit(".", 1)[-1] if cls else "node"
        parts = [tag] + [
            f'{k}="{v}"' for k, v in sorted(el.attrs.items()) if k != "class"
        ]
        lines.append("  " * depth + " ".join(parts))
        for ch in el.children:
            walk(ch, depth + 1)

    walk(state.compressed, 0)
    return "\n".join(lines)


# --------------------------------------------------------------------------
# actions


ACTION_KINDS = ("click", "long-click", "swipe", "scroll", "input-text", "back", "launch")
DIRECTIONS = ("up", "down", "left", "right")


@dataclass(frozen=True)
class Action:
    """An interaction.  ``launch`` is the virtual seed action of exploration."""

    kind: str
    direction: str | None = None
    payload: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ACTION_KINDS:
            raise InvalidAction(f"unknown action kind {self.kind!r}")
        if self.kind in ("swipe", "scroll"):
            if self.direction not in DIRECTIONS:
                raise InvalidAction(f"{self.kind} needs a direction, got {self.direction!r}")
        elif self.direction is not None:
            raise InvalidAction(f"{self.kind} takes no direction")
        if self.kind == "input-text":
            if self.payload is None:
                raise InvalidAction("input-text needs a payload")
        elif self.payload is not None:
            raise InvalidAction(f"{self.kind} takes no payload")

    def same_gesture(self, other: "Action") -> bool:
        """Kind and direction equal; input payloads are ignored."""
        return self.kind == other.kind and self.direction == other.direction

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.direction is not None:
            out["direction"] = self.direction
        if self.payload is not None:
            out["payload"] = self.payload
        return out

    @classmethod
    def from_json(cls, data: Mapping[str, Any] | str) -> "Action":
        if isinstance(data, str):
            return cls(data)
        if not isinstance(data, Mapping) or "kind" not in data:
            raise InvalidAction(f"bad action {data!r}")
        return cls(data["kind"], data.get("direction"), data.get("payload"))

    def __str__(self) -> str:
        if self.direction:
            return f"{self.kind}:{self.direction}"
        if self.payload is not None:
            return f"{self.kind}:{self.payload!r}"
        return self.kind


CLICK = Action("click")
BACK = Action("back")
LAUNCH = Action("launch")


# --------------------------------------------------------------------------
# selectors

_SELECTOR_KEYS = {
    "resource-id": "resource_id",
    "text": "text",
    "text-regex": "text_regex",
    "content-desc": "content_desc",
    "class": "class_name",
    "index": "index",
    "root": "root",
}


@dataclass(frozen=True)
class Selector:
    """Conjunction of attribute predicates, optionally narrowed by ordinal."""

    resource_id: str | None = None
    text: str | None = None
    text_regex: str | None = None
    content_desc: str | None = None
    class_name: str | None = None
    index: int | None = None
    root: bool = False

    def __post_init__(self) -> None:
        if not self.predicates() and not self.root:
            raise InvalidSelector("selector needs at least one predicate")
        if self.index is not None and (not isinstance(self.index, int) or self.index < 0):
            raise InvalidSelector(f"index must be a non-negative int, got {self.index!r}")
        if self.text_regex is not None:
            try:
                re.compile(self.text_regex)
            except re.error as exc:
                raise InvalidRegex(f"{self.text_regex!r}: {exc}") from exc

    def predicates(self) -> dict[str, str]:
        """Attribute-equality predicates as ``{attribute: value}`` (regex excluded)."""
        out = {}
        if self.resource_id is not None:
            out["resource-id"] = self.resource_id
        if self.text is not None:
            out["text"] = self.text
        if self.content_desc is not None:
            out["content-desc"] = self.content_desc
        if self.class_name is not None:
            out["class"] = self.class_name
        if self.text_regex is not None:
            out["text-regex"] = self.text_regex
        return out

    def matches(self, el: UIElement) -> bool:
        if self.resource_id is not None and el.get("resource-id").strip() != self.resource_id.strip():
            return False
        if self.text is not None and el.get("text").strip() != self.text.strip():
            return False
        if self.content_desc is not None and el.get("content-desc").strip() != self.content_desc.strip():
            return False
        if self.class_name is not None and el.get("class").strip() != self.class_name.strip():
            return False
        if self.text_regex is not None and not re.fullmatch(self.text_regex, el.get("text"), re.S):
            return False
        return True

    def with_index(self, index: int | None) -> "Selector":
        return Selector(
            self.resource_id, self.text, self.text_regex, self.content_desc,
            self.class_name, index, self.root,
        )

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for wire, attr in _SELECTOR_KEYS.items():
            value = getattr(self, attr)
            if attr == "root":
                if value:
                    out["root"] = True
            elif value is not None:
                out[wire] = value
        return out

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Selector":
        if not isinstance(data, Mapping):
            raise InvalidSelector(f"selector must be an object, got {data!r}")
        unknown = set(data) - set(_SELECTOR_KEYS)
        if unknown:
            raise InvalidSelector(f"unknown selector keys {sorted(unknown)}")
        kwargs = {_SELECTOR_KEYS[k]: v for k, v in data.items()}
        return cls(**kwargs)

    def __str__(self) -> str:
        if self.root:
            return "<root>"
        inner = ", ".join(f"{k}={v!r}" for k, v in self.predicates().items())
        if self.index is not None:
            inner += f", index={self.index}"
        return f"Selector({inner})"


ROOT_SELECTOR = Selector(root=True)


def resolve_selector(state: UIState, sel: Selector) -> list[Path]:
    """All element paths satisfying ``sel`` in document order (the root selector yields ``[()]``)."""
    if sel.root:
        matches: list[Path] = [()]
    else:
        matches = [path for path, el in iter_elements(state.root) if sel.matches(el)]
    if sel.index is not None:
        return [matches[sel.index]] if sel.index < len(matches) else []
    return matches


_PRIORITY = ("resource-id", "text", "content-desc")
_FIELD = {"resource-id": "resource_id", "text": "text", "content-desc": "content_desc", "class": "class_name"}


def unique_selector_for(
    state: UIState, path: Path, exclude: Sequence[str] = (), allow_index: bool = True
) -> Selector | None:
    """Most readable selector that resolves to exactly ``path``.

    Single attributes are tried in priority resource-id > text > content-desc,
    then pairs, then class; failing that the first available predicate is
    disambiguated with an ordinal.
    """
    el = element_at(state.root, path)
    usable = [k for k in _PRIORITY if el.get(k) and k not in exclude]
    options: list[dict[str, str]] = [{k: el.get(k)} for k in usable]
    for i, a in enumerate(usable):
        for b in usable[i + 1:]:
            options.append({a: el.get(a), b: el.get(b)})
    if el.get("class") and "class" not in exclude:
        options.append({"class": el.get("class")})
        options += [{k: el.get(k), "class": el.get("class")} for k in usable]
    for preds in options:
        sel = Selector(**{_FIELD[k]: v for k, v in preds.items()})
        if resolve_selector(state, sel) == [path]:
            return sel
    if not allow_index or not options:
        return None
    sel = Selector(**{_FIELD[k]: v for k, v in options[0].items()})
    hits = resolve_selector(state, sel)
    return sel.with_index(hits.index(path))


# --------------------------------------------------------------------------
# operations


@dataclass(frozen=True)
class Operation:
    selector: Selector
    action: Action

    def __post_init__(self) -> None:
        if self.action.kind in ("back", "launch") and not self.selector.root:
            raise InvalidAction(f"{self.action.kind} must target the root selector")

    @cached_property
    def key(self) -> str:
        """Stable hash used for equality in the exploration history."""
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:32]

    def to_json(self) -> dict[str, Any]:
        return {"selector": self.selector.to_json(), "action": self.action.to_json()}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Operation":
        if not isinstance(data, Mapping) or "selector" not in data or "action" not in data:
            raise InvalidSelector(f"operation needs selector and action: {data!r}")
        return cls(Selector.from_json(data["selector"]), Action.from_json(data["action"]))

    def __str__(self) -> str:
        return f"<{self.action} {self.selector}>"


LAUNCH_OP = Operation(ROOT_SELECTOR, LAUNCH)
BACK_OP = Operation(ROOT_SELECTOR, BACK)
