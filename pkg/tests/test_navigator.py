import pytest

from conftest import bfs_entries, fixture_app
from reqnav.device import DeviceSession, Mutation, apply_mutation
from reqnav.errors import ReplayDiverged
from reqnav.navigator import HistoryGraph, NodeInfo, compute_score, equivalent_state, navigate, replay
from reqnav.scoring import CandidateOp, RelevanceLevel
from reqnav.ui_model import CLICK, LAUNCH_OP, Operation, Selector


def click(rid: str) -> Operation:
    return Operation(Selector(resource_id=rid), CLICK)


def test_chain_finds_appearance_within_three_steps(scorer):
    app = fixture_app("chain")
    res = navigate("dark mode", DeviceSession(app), scorer, max_steps=5, k=3)
    assert res.found and res.entry.page_id == "appearance"
    assert res.steps_used <= 3
    assert bfs_entries(app, "dark mode", scorer) == {"appearance": 2}
    assert [op.selector.resource_id for op in res.entry_path] == ["settings_btn", "pref_appearance"]
    assert res.trigger_ops == [click("dark_mode")]


def test_backtrack_replays_to_second_branch(scorer):
    res = navigate("Dark mode", DeviceSession(fixture_app("backtrack")), scorer, 5, 3)
    assert res.found and res.entry.page_id == "display"
    scores = [t["popped"]["score"] for t in res.trace]
    assert scores[2] == pytest.approx((0.4 * 0.8) ** 0.5)
    assert scores[3] == pytest.approx((0.4 * 0.6) ** 0.5)
    assert [t["replayed"] for t in res.trace] == [False, False, False, True]


def test_budget_exhaustion_uses_all_steps(scorer):
    res = navigate("zebra quux", DeviceSession(fixture_app("chain")), scorer, 5, 3)
    assert not res.found and res.steps_used == 5
    assert res.trigger_ops is None and res.entry_path == ()


def test_k_changes_outcome_on_ranking_fixture(scorer):
    app = fixture_app("ranking")
    found = {k: navigate("Unit converter", DeviceSession(app), scorer, 5, k).found for k in (1, 2, 3, 4)}
    assert found == {1: False, 2: False, 3: True, 4: True}


def test_launch_op_first_and_history_has_no_duplicates(scorer):
    res = navigate("Dark mode", DeviceSession(fixture_app("backtrack")), scorer, 5, 3)
    assert res.trace[0]["popped"]["op"] == LAUNCH_OP.to_json()
    assert len(res.history.appended) == len(set(res.history.appended))


def test_equivalent_state_distinguishes_ops():
    h = HistoryGraph(root="s1")
    h.add_node(NodeInfo("s1", "p", (), (), ()))
    h.append("s1", click("btnA"))
    assert equivalent_state(h, "s1", click("btnA"))
    assert not equivalent_state(h, "s1", click("btnB"))
    assert not equivalent_state(h, "s2", click("btnA"))


def test_compute_score_extends_prefix(scorer):
    app = fixture_app("chain")
    s = DeviceSession(app)
    st = s.observe()
    h = HistoryGraph(root=st.digest)
    h.add_node(NodeInfo(st.digest, st.page_id, (), (), (1.0,)))
    score, gs = compute_score("x", st, CandidateOp(click("feed_btn"), RelevanceLevel(1)), h, scorer)
    assert gs == (1.0, 0.2) and score == pytest.approx(0.2 ** 0.5, abs=1e-12)
    score, _ = compute_score("dark mode", st, click("settings_btn"), h, scorer)
    assert score == pytest.approx(0.4 ** 0.5, abs=1e-12)


def _history_for(app, scorer):
    res = navigate("dark mode", DeviceSession(app), scorer, 5, 3)
    return res.history, res.entry.digest


def test_replay_reaches_depth_and_checks_digests(scorer):
    app = fixture_app("chain")
    history, target = _history_for(app, scorer)
    session = DeviceSession(app)
    state = replay(session, history, target)
    assert state.digest == target and len(session.trace) == 2


def test_replay_diverges_on_mutated_transition(scorer):
    app = fixture_app("chain")
    history, target = _history_for(app, scorer)
    bad = apply_mutation(app, Mutation("m", "retarget-transition",
                                       {"transition": "settings->appearance", "to": "profile"}))
    with pytest.raises(ReplayDiverged) as info:
        replay(DeviceSession(bad), history, target)
    assert info.value.step_index == 2


def test_invalid_budget(scorer):
    with pytest.raises(ValueError):
        navigate("x", DeviceSession(fixture_app("chain")), scorer, 0)
