import copy
import json

import pytest

from conftest import corpus_app, fixture_app
from reqnav.bench import default_corpus
from reqnav.device import (
    DeviceSession,
    Mutation,
    app_from_dict,
    apply_mutation,
    load_app,
    load_mutations,
    reachable_states,
)
from reqnav.errors import (
    DanglingStateRef,
    NondeterministicTransition,
    ParseError,
    SchemaError,
    SelectorUnresolved,
    TargetNotFound,
)
from reqnav.ui_model import BACK_OP, CLICK, Action, Operation, Selector, resolve_selector

APPS = ("browser", "health", "camera", "news", "social", "notes")


def click(**kw) -> Operation:
    return Operation(Selector(**kw), CLICK)


@pytest.mark.parametrize("name", APPS)
def test_bundled_apps_load_validate_and_are_connected(name):
    app = corpus_app(name)
    assert 5 <= len(app.states) <= 15
    assert reachable_states(app) == set(app.states)
    assert all(t.id for t in app.transitions)


def test_session_starts_at_initial_and_sessions_are_independent():
    app = corpus_app("browser")
    a, b = DeviceSession(app), DeviceSession(app)
    assert a.current == app.initial
    a.perform(click(resource_id="menu_btn"))
    assert a.current == "menu" and b.current == "home"


def test_faulty_variant_keeps_initial_state():
    app = corpus_app("notes")
    for m in load_mutations(default_corpus() / "mutations.json")["notes"]:
        bad = apply_mutation(app, m)
        assert DeviceSession(bad).observe().digest == DeviceSession(app).observe().digest
        assert bad.variant == f"faulty:{m.id}"


def test_effects_persist_until_reset():
    s = DeviceSession(corpus_app("camera"))
    before = s.observe().digest
    after = s.perform(click(resource_id="flash_btn"))
    assert after.element_at(resolve_selector(after, Selector(resource_id="flash_btn"))[0]).text == "Flash: On"
    s.perform(click(resource_id="settings_btn"))
    assert s.perform(BACK_OP).page_id == "settings"  # no back transition declared: stays put
    s.reset()
    assert s.observe().digest == before


def test_input_text_effect_edits_destination_state():
    s = DeviceSession(corpus_app("notes"))
    for rid in ("more_btn", "menu_settings", "app_lock"):
        s.perform(click(resource_id=rid))
    post = s.perform(Operation(Selector(resource_id="pin_field"), Action("input-text", payload="1234")))
    assert post.page_id == "settings"
    lock = post.element_at(resolve_selector(post, Selector(resource_id="app_lock"))[0])
    assert lock.get("checked") == "true"
    summary = post.element_at(resolve_selector(post, Selector(resource_id="lock_summary"))[0])
    assert summary.text == "PIN set"


def test_reset_is_idempotent_and_matches_fresh_session():
    app = corpus_app("camera")
    s = DeviceSession(app)
    for _ in range(9):
        s.perform(click(resource_id="flash_btn"))
    s.perform(click(resource_id="settings_btn"))
    assert len(s.trace) == 10
    first = s.reset().digest
    assert s.reset().digest == first == DeviceSession(app).observe().digest
    assert s.trace == []


def test_unresolved_selector_raises():
    s = DeviceSession(corpus_app("browser"))
    with pytest.raises(SelectorUnresolved):
        s.perform(click(text="Nope"))


def test_windowed_list_hides_rows_until_scrolled():
    s = DeviceSession(corpus_app("browser"))
    for rid in ("menu_btn", "menu_settings", "pref_language"):
        s.perform(click(resource_id=rid))
    st = s.observe()
    lst = st.element_at(resolve_selector(st, Selector(resource_id="language_list"))[0])
    assert lst.get("item-count") == "8" and len(lst.children) == 4
    assert not resolve_selector(st, Selector(text="Bengali"))
    st = s.perform(Operation(Selector(resource_id="language_list"), Action("scroll", "down")))
    assert resolve_selector(st, Selector(text="Bengali"))
    st = s.perform(Operation(Selector(resource_id="language_list"), Action("scroll", "down")))
    assert resolve_selector(st, Selector(text="Bengali"))  # clamped at the end


def test_validation_errors():
    base = corpus_app("notes").to_json()
    bad = copy.deepcopy(base)
    bad["initial"] = "nowhere"
    with pytest.raises(DanglingStateRef):
        app_from_dict(bad)
    bad = copy.deepcopy(base)
    bad["transitions"][0]["to"] = "nowhere"
    with pytest.raises(DanglingStateRef):
        app_from_dict(bad)
    bad = copy.deepcopy(base)
    bad["transitions"].append(dict(bad["transitions"][0], id="dup-ish"))
    with pytest.raises(NondeterministicTransition):
        app_from_dict(bad)
    bad = copy.deepcopy(base)
    bad["transitions"][1]["id"] = bad["transitions"][0]["id"]
    with pytest.raises(SchemaError):
        app_from_dict(bad)
    with pytest.raises(SchemaError):
        app_from_dict({"app_id": "x", "initial": "a", "states": {}})


def test_load_app_parse_errors(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(ParseError):
        load_app(p)
    with pytest.raises(ParseError):
        load_app(tmp_path / "missing.json")


def test_mutation_kinds_and_targets():
    app = corpus_app("browser")
    removed = apply_mutation(app, Mutation("m", "remove-element",
                                           {"state": "settings", "selector": {"resource-id": "pref_language"}}))
    assert not resolve_selector(removed.states["settings"], Selector(resource_id="pref_language"))
    corrupted = apply_mutation(app, Mutation("m", "corrupt-label",
                                             {"state": "menu", "selector": {"resource-id": "menu_history"}}))
    assert resolve_selector(corrupted.states["menu"], Selector(text="Hisory"))
    retarget = apply_mutation(app, Mutation("m", "retarget-transition",
                                            {"transition": "history:clear", "to": "menu"}))
    assert retarget.transition("history:clear")[1].target == "menu"
    noop = apply_mutation(app, Mutation("m", "noop-transition", {"transition": "menu->history"}))
    assert len(noop.transitions) == len(app.transitions) - 1
    dropped = apply_mutation(app, Mutation("m", "drop-effect", {"transition": "appearance:dark"}))
    assert dropped.transition("appearance:dark")[1].effects == ()
    with pytest.raises(TargetNotFound):
        apply_mutation(app, Mutation("m", "drop-effect", {"transition": "menu->history"}))
    with pytest.raises(TargetNotFound):
        apply_mutation(app, Mutation("m", "remove-element", {"state": "menu", "selector": {"text": "Zzz"}}))
    with pytest.raises(SchemaError):
        Mutation("m", "explode", {})


def test_bundled_mutations_cover_all_kinds():
    raw = json.loads((default_corpus() / "mutations.json").read_text())
    kinds = {m["kind"] for items in raw.values() for m in items}
    assert kinds == {"remove-element", "corrupt-label", "retarget-transition", "noop-transition", "drop-effect"}


def test_fixture_apps_load():
    for name in ("backtrack", "ranking", "chain"):
        assert fixture_app(name).initial == "home"
