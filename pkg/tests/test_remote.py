import json

import httpx
import pytest
from fastapi.testclient import TestClient

from conftest import FIXTURES, corpus_app
from reqnav.bench import BenchConfig, load_corpus, report_json, run_batch
from reqnav.device import DeviceSession
from reqnav.errors import MalformedReply, NoDiffDerivable, ScorerUnavailable
from reqnav.oracle import StatePair
from reqnav.remote import RemoteScorer
from reqnav.scoring import LexicalScorer
from reqnav.service import create_app
from reqnav.trigger import ActStep, PlanContext
from reqnav.ui_model import CLICK, Operation, Selector, UIState, node

MINI = FIXTURES / "mini_corpus"


@pytest.fixture(scope="module")
def service():
    return TestClient(create_app())


def stub(handler) -> RemoteScorer:
    """Remote scorer wired to an in-process handler ``request -> (status, body)``."""
    calls = []

    def transport(request: httpx.Request) -> httpx.Response:
        calls.append(request.url.path)
        status, body = handler(request)
        if isinstance(body, (dict, list)):
            return httpx.Response(status, json=body)
        return httpx.Response(status, text=body)

    sc = RemoteScorer("http://stub", client=httpx.Client(transport=httpx.MockTransport(transport)),
                      retries=2, sleep=lambda s: None)
    sc.calls = calls
    return sc


def home() -> UIState:
    return DeviceSession(corpus_app("browser")).observe()


def test_health(service):
    assert service.get("/health").json() == {"status": "ok", "scorer": "lexical"}


def test_explore_route_matches_local_scorer(service):
    st = home()
    body = service.post("/v1/explore", json={"requirement": "Clear browsing history", "page": st.to_json(),
                                             "k": 2}).json()
    assert body == LexicalScorer().page_explore("Clear browsing history", st, 2).to_json()
    assert service.post("/v1/explore", json={"requirement": "x", "page": {}, "k": 0}).status_code == 422


def test_remote_pipeline_through_service_matches_lexical(service):
    remote = RemoteScorer("http://testserver", client=service)
    cases = load_corpus(MINI).cases
    via_http = run_batch(cases, BenchConfig(scorer="remote"), remote)
    local = run_batch(cases, BenchConfig(scorer="remote"), LexicalScorer())
    assert [r.to_json() for r in via_http] == [r.to_json() for r in local]


def test_script_route_rejects_empty_keyphrase(service):
    op = Operation(Selector(resource_id="menu_btn"), CLICK).to_json()
    r = service.post("/v1/script", json={"requirement": "the of", "page": home().to_json(), "trigger": [op]})
    assert r.status_code == 422
    r = service.post("/v1/script", json={"requirement": "menu", "page": home().to_json(), "trigger": []})
    assert r.status_code == 422


def test_oracle_route_reports_no_diff(service):
    st = home().to_json()
    body = service.post("/v1/oracle", json={"requirement": "dark", "pre": st, "post": st}).json()
    assert body["sub_oracles"] == [] and "identical" in body["error"]


def test_run_route_returns_report(service):
    body = service.post("/v1/run", json={"corpus": str(MINI), "cases": ["chain-dark"]}).json()
    assert body["metrics"]["confusion"] == {"tp": 1, "fn": 0, "tn": 0, "fp": 0}
    assert service.post("/v1/run", json={"corpus": str(MINI), "cases": ["zzz"]}).status_code == 404
    assert service.post("/v1/run", json={"corpus": "/nonexistent"}).status_code == 400


def test_misspelled_candidate_selector_is_repaired():
    reply = {"is_entry": False, "candidates": [
        {"selector": {"resource-id": "menu_bt"}, "action": "click", "level": 2},
        {"selector": {"text": "Nothing like this"}, "action": "click", "level": 3},
    ]}
    sc = stub(lambda req: (200, reply))
    res = sc.page_explore("x", home(), 3)
    assert [c.op.selector for c in res.candidates] == [Selector(resource_id="menu_btn")]


@pytest.mark.parametrize(
    "body",
    [
        "not json",
        {"candidates": []},
        {"is_entry": False, "candidates": [{"selector": {"text": "Menu"}, "action": "click", "level": 9}]},
        {"is_entry": False, "candidates": [{"selector": {"xpath": "//a"}, "action": "click", "level": 2}]},
        {"is_entry": False, "candidates": [{"selector": {"text": "Menu"}, "action": "teleport", "level": 2}]},
        {"is_entry": True, "candidates": [{"selector": {"text": "Nope at all"}, "action": "click", "level": 5}]},
    ],
)
def test_malformed_explore_replies_raise_typed_error(body):
    with pytest.raises(MalformedReply):
        stub(lambda req: (200, body)).page_explore("x", home(), 3)


def test_client_errors_are_malformed_not_retried():
    sc = stub(lambda req: (404, {"detail": "nope"}))
    with pytest.raises(MalformedReply):
        sc.page_explore("x", home(), 3)
    assert len(sc.calls) == 1


def test_retries_then_unavailable():
    sc = stub(lambda req: (503, "busy"))
    with pytest.raises(ScorerUnavailable) as info:
        sc.page_explore("x", home(), 3)
    assert info.value.attempts == 3 and len(sc.calls) == 3

    def flaky(req, state={"n": 0}):
        state["n"] += 1
        if state["n"] == 1:
            raise httpx.ConnectError("refused")
        return 200, {"is_entry": False, "candidates": []}

    assert stub(flaky).page_explore("x", home(), 3).candidates == ()


def test_script_reply_repairs_first_act_and_merges_covered():
    reply = {"steps": [{"assert": {"selector": {"text": "Menu"}, "mode": "exists", "message": "m"}},
                       {"act": {"selector": {"resource-id": "menu_bt"}, "action": {"kind": "click"}}}],
             "complete": False, "covered": ["menu"]}
    ctx = PlanContext(covered={"x"})
    plan = stub(lambda req: (200, reply)).script("menu", home(), [], ctx)
    act = plan.steps[1]
    assert isinstance(act, ActStep) and act.op.selector == Selector(resource_id="menu_btn")
    assert ctx.covered == {"x", "menu"}
    with pytest.raises(MalformedReply):
        stub(lambda req: (200, {"steps": [{"wat": 1}]})).script("m", home(), [], PlanContext())
    with pytest.raises(MalformedReply):
        stub(lambda req: (200, {"steps": [{"act": reply["steps"][1]["act"]}]})).script(
            "m", home(), [], PlanContext())


def test_oracle_reply_repair_drop_and_empty():
    pre = UIState(node({"class": "F"}, node({"resource-id": "title", "text": "A"})))
    post = UIState(node({"class": "F"}, node({"resource-id": "title", "text": "B"})))
    pair = StatePair(pre, post)
    reply = {"sub_oracles": [
        {"selector": {"resource-id": "titl"}, "mode": "exists", "message": "m"},
        {"selector": {"text": "zzzz"}, "mode": "exists", "message": "m"},
        {"selector": {"text": "A"}, "mode": "absent", "message": "m"},
    ]}
    subs = stub(lambda req: (200, reply)).oracle("x", pair, 3)
    assert [s.assertion.selector for s in subs] == [Selector(resource_id="title"), Selector(text="A")]
    with pytest.raises(NoDiffDerivable):
        stub(lambda req: (200, {"sub_oracles": [], "error": "nothing"})).oracle("x", pair, 3)
    with pytest.raises(MalformedReply):
        stub(lambda req: (200, {"sub_oracles": [{"selector": {}, "mode": "exists"}]})).oracle("x", pair, 3)


def test_malformed_replies_surface_as_case_failures():
    cases = load_corpus(MINI).cases[:1]
    results = run_batch(cases, BenchConfig(scorer="remote"), stub(lambda req: (200, "garbage")))
    assert results[0].failed_phase == "phase1" and "MalformedReply" in results[0].detail
    json.loads(report_json(results))
