"""Hierarchical repair of failed or ambiguous selectors.

Tiers, tried in order until one yields an element:

1. exact value under the same attribute
2. same value under a different attribute (text <-> content-desc <-> resource-id)
3. case-insensitive containment between values (longest containment wins)
4. class-only match, when the class is unique on the page

The winning element gets a fresh selector built with priority
resource-id > text > content-desc.
"""

from __future__ import annotations

from typing import Callable

from .errors import Unrepairable
from .ui_model import Path, Selector, UIState, resolve_selector, unique_selector_for

_VALUE_ATTRS = ("resource-id", "text", "content-desc")
MIN_FUZZY = 3


def _tier_exact(state: UIState, values: list[tuple[str, str]]) -> Path | None:
    for path, el in state.elements():
        for attr, v in values:
            if el.get(attr) and el.get(attr).strip() == v:
                return path
    return None


def _tier_cross(state: UIState, values: list[tuple[str, str]]) -> Path | None:
    for path, el in state.elements():
        for attr, v in values:
            for other in _VALUE_ATTRS:
                if other != attr and el.get(other) and el.get(other).strip() == v:
                    return path
    return None


def _tier_fuzzy(state: UIState, values: list[tuple[str, str]]) -> Path | None:
    best: tuple[int, Path] | None = None
    for path, el in state.elements():
        for _, v in values:
            lv = v.lower()
            for other in _VALUE_ATTRS:
                ev = el.get(other).strip().lower()
                if not ev:
                    continue
                if lv in ev or ev in lv:
                    overlap = min(len(lv), len(ev))
                    if overlap >= MIN_FUZZY and (best is None or overlap > best[0]):
                        best = (overlap, path)
    return best[1] if best else None


def _tier_class(state: UIState, failed: Selector) -> Path | None:
    if not failed.class_name:
        return None
    hits = resolve_selector(state, Selector(class_name=failed.class_name))
    return hits[0] if len(hits) == 1 else None


def refine(
    failed: Selector, state: UIState, probe: Callable[[int], None] | None = None
) -> Selector:
    """Return a selector that resolves to exactly one element of ``state``.

    A uniquely-resolving input comes back unchanged.  ``probe`` is called with
    each tier number as it is consulted.
    """
    hits = resolve_selector(state, failed)
    if len(hits) == 1:
        return failed
    if len(hits) > 1:
        return failed.with_index(0)
    if failed.root:
        raise Unrepairable("root selector cannot be repaired")

    preds = failed.predicates()
    values = [(a, preds[a].strip()) for a in _VALUE_ATTRS if preds.get(a, "").strip()]
    tiers: list[Callable[[], Path | None]] = [
        lambda: _tier_exact(state, values),
        lambda: _tier_cross(state, values),
        lambda: _tier_fuzzy(state, values),
        lambda: _tier_class(state, failed),
    ]
    for number, tier in enumerate(tiers, start=1):
        if probe is not None:
            probe(number)
        path = tier()
        if path is not None:
            sel = unique_selector_for(state, path)
            if sel is not None:
                return sel
    raise Unrepairable(f"no element in {state.page_id!r} resembles {failed}")


def try_refine(failed: Selector, state: UIState) -> Selector | None:
    try:
        return refine(failed, state)
    except Unrepairable:
        return None
