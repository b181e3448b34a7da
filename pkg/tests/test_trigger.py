import pytest

from conftest import corpus_app
from reqnav.device import DeviceSession, Mutation, apply_mutation
from reqnav.errors import UnplannableRequirement
from reqnav.navigator import navigate
from reqnav.trigger import (
    ActStep,
    Assertion,
    AssertStep,
    PlanContext,
    check_assertion,
    element_identity,
    evaluate_assertion,
    execute_script,
    generate_script,
    iterate_until_complete,
    step_from_json,
    step_to_json,
)
from reqnav.ui_model import CLICK, Operation, Selector, UIState, node


def reach_entry(app, requirement, scorer):
    session = DeviceSession(app)
    nav = navigate(requirement, session, scorer, 5, 3)
    assert nav.found
    return session, nav


def labels(ops):
    return [op.selector.resource_id or op.selector.text or op.selector.text_regex for op in ops]


def test_bengali_without_scroll_takes_two_ops(scorer):
    session, nav = reach_entry(corpus_app("news"), "Bengali language support", scorer)
    out = iterate_until_complete("Bengali language support", session, scorer, nav.trigger_ops[:1])
    assert out.confirmed and out.presence_verdict == "confirmed"
    assert len(out.executed_ops) == 2
    assert out.executed_ops[0].selector == Selector(resource_id="pref_language")
    assert out.reached.page_id == "settings"


def test_hidden_row_found_by_bounded_scroll_loop(scorer):
    session, nav = reach_entry(corpus_app("browser"), "Bengali language support", scorer)
    out = iterate_until_complete("Bengali language support", session, scorer, nav.trigger_ops[:1])
    assert out.confirmed
    kinds = [op.action.kind for op in out.executed_ops]
    assert kinds == ["click", "scroll", "click"]
    assert out.reached.page_id == "settings"


def test_scroll_budget_can_starve_the_search(scorer):
    session, nav = reach_entry(corpus_app("browser"), "Bengali language support", scorer)
    out = iterate_until_complete("Bengali language support", session, scorer, nav.trigger_ops[:1], max_iters=0)
    assert not out.confirmed


def test_removed_row_reports_absent(scorer):
    app = apply_mutation(corpus_app("news"), Mutation("m", "remove-element",
                                                      {"state": "language", "selector": {"text": "Bengali"}}))
    session, nav = reach_entry(app, "Bengali language support", scorer)
    out = iterate_until_complete("Bengali language support", session, scorer, nav.trigger_ops[:1])
    assert out.presence_verdict == "absent"
    assert out.failed_assertion.selector.text_regex is not None


def test_confirmation_dialog_takes_two_rounds(scorer):
    req = "Show a confirmation window before deleting a note"
    session, nav = reach_entry(corpus_app("notes"), req, scorer)
    out = iterate_until_complete(req, session, scorer, nav.trigger_ops[:1])
    assert out.confirmed and out.rounds == 2
    assert labels(out.executed_ops) == ["delete_btn", "confirm_btn"]
    session, nav = reach_entry(corpus_app("notes"), req, scorer)
    with_one = iterate_until_complete(req, session, scorer, nav.trigger_ops[:1], max_rounds=1)
    assert not with_one.confirmed
    assert "incomplete after 1 round" in with_one.failed_assertion.message


def test_input_text_round_uses_field_identity(scorer):
    req = "Lock the app with a PIN"
    session, nav = reach_entry(corpus_app("notes"), req, scorer)
    out = iterate_until_complete(req, session, scorer, nav.trigger_ops[:1])
    assert out.confirmed and out.rounds == 2
    assert [op.action.kind for op in out.executed_ops] == ["click", "input-text"]


def test_generate_script_shape(scorer):
    session, nav = reach_entry(corpus_app("health"), "Switch units to metric", scorer)
    ctx = PlanContext()
    steps = generate_script("Switch units to metric", session.observe(), nav.trigger_ops[:1], scorer, ctx)
    assert [type(s).__name__ for s in steps] == ["AssertStep", "ActStep", "AssertStep", "ActStep"]
    assert steps[2].assertion.scroll and steps[3].optional
    assert steps[2].assertion.selector.text_regex == "(?i).*(metric).*"
    assert "metric" in ctx.covered
    with pytest.raises(UnplannableRequirement):
        generate_script("the of and", session.observe(), nav.trigger_ops[:1], scorer)
    with pytest.raises(ValueError):
        generate_script("x", session.observe(), [], scorer)


def test_step_json_round_trip():
    steps = [
        AssertStep(Assertion(Selector(text="A"), "text-matches", "m", regex="A.*", scroll=True)),
        ActStep(Operation(Selector(resource_id="b"), CLICK), optional=True),
        AssertStep(Assertion(Selector(resource_id="c"), "attr-equals", "m", key="checked", value="true")),
    ]
    assert [step_from_json(step_to_json(s)) for s in steps] == steps


def test_assertion_modes():
    st = UIState(node({"class": "F"}, node({"resource-id": "s", "text": "Dark", "checked": "true"})))
    assert check_assertion(st, Assertion(Selector(resource_id="s")))[0]
    assert check_assertion(st, Assertion(Selector(resource_id="x"), "absent"))[0]
    assert check_assertion(st, Assertion(Selector(resource_id="s"), "text-matches", "m", regex="(?i)dark"))[0]
    assert not check_assertion(st, Assertion(Selector(resource_id="s"), "attr-equals", "m", key="checked",
                                             value="false"))[0]
    with pytest.raises(ValueError):
        Assertion(Selector(text="a"), "text-matches", "m")
    with pytest.raises(ValueError):
        Assertion(Selector(text="a"), "bogus")


def test_assertion_selector_repaired_once():
    st = UIState(node({"class": "F"}, node({"content-desc": "Search"})))
    ok, detail = evaluate_assertion(st, Assertion(Selector(text="Search")))
    assert ok and "repaired" in detail
    assert not evaluate_assertion(st, Assertion(Selector(text="Search")), repair=False)[0]


def test_unrepairable_act_fails_script():
    app = corpus_app("camera")
    out = execute_script(DeviceSession(app), [ActStep(Operation(Selector(text="Zzz"), CLICK))])
    assert not out.confirmed and out.executed_ops == []
    optional = execute_script(DeviceSession(app), [ActStep(Operation(Selector(text="Zzz"), CLICK), optional=True)])
    assert optional.confirmed


def test_element_identity_prefers_resource_id(scorer):
    lex = scorer.lexicon
    assert element_identity(lex, {"resource-id": "f", "text": "abc"}) == ("rid", "f")
    assert element_identity(lex, {"text": "Dark mode"}) == ("tokens", frozenset({"dark", "mod"}))
