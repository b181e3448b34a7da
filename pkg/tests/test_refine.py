import pytest

from reqnav.errors import Unrepairable
from reqnav.refine import refine, try_refine
from reqnav.ui_model import Selector, UIState, node, resolve_selector


@pytest.fixture
def state() -> UIState:
    return UIState(
        node(
            {"class": "android.widget.FrameLayout"},
            node({"class": "android.widget.TextView", "resource-id": "title", "text": "Settings"}),
            node({"class": "android.widget.Button", "resource-id": "settings_btn_language", "text": "Language"}),
            node({"class": "android.widget.ImageButton", "content-desc": "Search"}),
            *[node({"class": "android.widget.TextView", "resource-id": "row", "text": t}) for t in ("a", "b", "c")],
            node({"class": "android.widget.Switch", "text": "Wi-Fi"}),
        ),
        "settings",
    )


def tiers_for(sel, state):
    seen = []
    out = refine(sel, state, probe=seen.append)
    return out, seen


def test_unique_selector_returned_unchanged(state):
    sel = Selector(resource_id="title")
    out, seen = tiers_for(sel, state)
    assert out is sel and seen == []


def test_ambiguous_selector_gets_index_zero(state):
    out, seen = tiers_for(Selector(resource_id="row"), state)
    assert out == Selector(resource_id="row", index=0) and seen == []
    assert resolve_selector(state, out) == [(3,)]


def test_tier1_exact_value_after_other_predicate_broke(state):
    out, seen = tiers_for(Selector(text="Language", class_name="android.widget.TextView"), state)
    assert out == Selector(resource_id="settings_btn_language")
    assert seen == [1]


def test_tier2_text_moved_to_content_desc(state):
    out, seen = tiers_for(Selector(text="Search"), state)
    assert out == Selector(content_desc="Search")
    assert seen == [1, 2]


def test_tier3_fuzzy_resource_id_containment(state):
    out, seen = tiers_for(Selector(resource_id="btn_lang"), state)
    assert out == Selector(resource_id="settings_btn_language")
    assert seen == [1, 2, 3]


def test_tier4_unique_class(state):
    out, seen = tiers_for(Selector(class_name="android.widget.Switch", text="WiFi!"), state)
    assert out == Selector(text="Wi-Fi")
    assert seen == [1, 2, 3, 4]


def test_fuzzy_needs_three_characters(state):
    with pytest.raises(Unrepairable):
        refine(Selector(text="ab"), state)
    assert try_refine(Selector(text="zzzz"), state) is None


def test_root_selector_unrepairable(state):
    assert refine(Selector(root=True), state) == Selector(root=True)
