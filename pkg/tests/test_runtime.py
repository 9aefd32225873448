import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from justact import runtime as rt
from justact.dataplane import AccessRequest
from justact.model import Action, Message, reflect_actor
from justact.runtime import (
    Agree, Enact, Engine, Forget, Gossip, NotAnEnactment, ReplayDivergence, State, apply_update,
    audit, audit_all, read_trace, replay, write_trace,
)

basis = Message.of("consortium", "error if bob writes secret.", 1)
m_bob = Message.of("bob", "bob writes data1.", 1)
m_amy = Message.of("amy", "amy reads data1.", 1)


def setup_engine(**kw):
    e = Engine(**kw)
    e.submit(State("consortium", basis))
    e.submit(Gossip("consortium", "bob", basis))
    e.submit(State("bob", m_bob))
    return e


def test_state_rules():
    e = Engine()
    assert e.submit(State("amy", m_bob)).reason == rt.NOT_AUTHOR
    assert e.submit(State("bob", m_bob)).outcome == "applied"
    assert e.submit(State("bob", m_bob)).reason == rt.ALREADY_VIEWED
    clash = Message.of("bob", "other.", 1)
    assert e.submit(State("bob", clash)).reason == rt.DUPLICATE_ID
    assert m_bob in e.state.config.stated and e.state.view("bob") == (m_bob,)


def test_gossip_and_forget():
    e = setup_engine()
    assert e.submit(Gossip("amy", "bob", m_bob)).reason == rt.BAD_GOSSIP
    assert e.submit(Gossip("bob", "amy", m_bob)).outcome == "applied"
    assert e.submit(Gossip("bob", "amy", m_bob)).reason == rt.ALREADY_VIEWED
    assert e.submit(Forget("amy", m_bob)).outcome == "applied"
    assert m_bob not in e.state.view("amy")
    assert m_bob in e.state.config.stated  # forgetting never unstates
    assert e.submit(Forget("amy", m_bob)).reason == rt.NOT_VIEWED


def test_agree_requires_authority():
    e = setup_engine()
    assert e.submit(Agree("bob", (basis,))).reason == rt.NOT_AUTHORITY
    assert e.submit(Agree("consortium", (basis,))).outcome == "applied"
    assert e.state.config.agreed == (basis,)
    other = setup_engine(authority="board")
    assert other.submit(Agree("board", ())).outcome == "applied"


def test_enact():
    e = setup_engine()
    e.submit(Agree("consortium", (basis,)))
    action = Action("bob", basis, (m_bob,))
    assert e.submit(Enact("amy", action)).reason == rt.NOT_ACTOR
    assert e.submit(Enact("bob", Action("bob", basis, (m_amy,)))).reason == rt.PAYLOAD_NOT_VIEWED
    ev = e.submit(Enact("bob", action, "bob/w"))
    assert ev.is_applied_enact and ev.permission.permitted
    assert [str(x) for x in ev.effects] == ["bob writes data1"]
    assert action in e.state.config.enacted
    assert reflect_actor("bob") in e.state.config.stated


def test_prohibited_enactments_are_logged_unless_strict():
    e = setup_engine()  # nothing agreed
    ev = e.submit(Enact("bob", Action("bob", basis, (m_bob,))))
    assert ev.outcome == "applied" and ev.permission.based is False
    strict = setup_engine(strict=True)
    ev = strict.submit(Enact("bob", Action("bob", basis, (m_bob,))))
    assert ev.outcome == "rejected" and ev.reason == rt.PROHIBITED
    assert ev.permission is not None and strict.state.config.enacted == ()


def test_rejections_leave_state_unchanged():
    e = setup_engine()
    before = e.state
    apply_args = [State("amy", m_bob), Gossip("amy", "bob", m_bob), Forget("amy", m_bob),
                  Agree("amy", ()), Enact("amy", Action("bob", basis))]
    for u in apply_args:
        state, outcome, *_ = apply_update(before, u)
        assert outcome == "rejected" and state == before


def build_trace():
    e = setup_engine()
    e.submit(Agree("consortium", (basis,)))
    ev = e.submit(Enact("bob", Action("bob", basis, (m_bob,)), "bob/w"))
    e.access(AccessRequest("bob", "write", "data1", ev.index))
    e.access(AccessRequest("bob", "read", "data1", ev.index))
    e.access(AccessRequest("bob", "read", "data9", ev.index))
    e.submit(State("amy", m_amy))
    return e.events


def test_trace_round_trip_and_replay(tmp_path):
    events = build_trace()
    assert [e.index for e in events] == list(range(len(events)))
    path = tmp_path / "t.jsonl"
    write_trace(events, path)
    loaded = read_trace(path)
    assert [rt.dumps(e) for e in loaded] == [rt.dumps(e) for e in events]
    engine = replay(loaded)
    assert engine.state.config.enacted == (Action("bob", basis, (m_bob,)),)
    assert engine.store.get("data1").content == b"<asset data1>"


def test_tampered_trace_diverges(tmp_path):
    events = build_trace()
    path = tmp_path / "t.jsonl"
    write_trace(events, path)
    lines = path.read_text().splitlines()
    i = next(n for n, line in enumerate(lines) if '"permission"' in line and '"permitted": true' in line)
    data = json.loads(lines[i])
    data["permission"]["based"] = False
    data["permission"]["permitted"] = False
    lines[i] = json.dumps(data)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ReplayDivergence) as info:
        replay(read_trace(path))
    assert info.value.index == i


def test_reordered_trace_diverges():
    events = build_trace()
    with pytest.raises(ReplayDivergence):
        replay(events[1:])


def test_replay_options_matter():
    events = build_trace()
    with pytest.raises(ReplayDivergence):
        replay(events, authority="board")


def test_audit():
    events = build_trace()
    index = next(e.index for e in events if e.is_applied_enact)
    report = audit(events, index)
    assert report.actor == "bob" and report.label == "bob/w"
    assert [pid for pid, _ in report.payload] == ["consortium 1", "bob 0", "bob 1"]
    assert report.permission.permitted and report.agreed == ("consortium 1",)
    assert report.effects == ("bob writes data1",)
    assert report.accesses[0].endswith("granted")
    assert len(report.accesses) == 3 and "EffectNotOfAction" in report.accesses[2]
    assert "permitted: True" in report.render()
    json.dumps(report.to_json())
    assert audit_all(events) == [report]
    with pytest.raises(NotAnEnactment):
        audit(events, 0)
    with pytest.raises(NotAnEnactment):
        audit(events, 999)


msgs = [basis, m_bob, m_amy, Message.of("amy", "x.", 2)]
agents = ["consortium", "bob", "amy"]
updates = st.one_of(
    st.builds(State, st.sampled_from(agents), st.sampled_from(msgs)),
    st.builds(Gossip, st.sampled_from(agents), st.sampled_from(agents), st.sampled_from(msgs)),
    st.builds(Forget, st.sampled_from(agents), st.sampled_from(msgs)),
    st.builds(Agree, st.sampled_from(agents), st.lists(st.sampled_from(msgs), max_size=2).map(tuple)),
    st.builds(lambda a, b, x: Enact(a, Action(a, b, tuple(x))), st.sampled_from(agents),
              st.sampled_from(msgs), st.lists(st.sampled_from(msgs), max_size=2)),
)


@given(st.lists(updates, max_size=25))
@settings(max_examples=60, deadline=None)
def test_random_runs_replay_and_stay_accurate(batch):
    from justact.invariants import check_all

    e = Engine()
    for u in batch:
        e.submit(u)
        assert e.state.accurate()
    replay(e.events)
    assert all(v == [] for v in check_all(e.events).values())
