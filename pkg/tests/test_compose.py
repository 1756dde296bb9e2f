"""Synchronous product, the all-events automaton, and selfloop completion."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modeguard import (
    Automaton,
    AutomatonError,
    allevents,
    language_equivalent,
    selfloop_complete,
    sync,
    sync_all,
    trim,
)

from helpers import alpha, alphabets, aut, automata, sync_membership_mismatch

XY = alpha(("x", True), ("y", True))


def test_sync_interleaves_private_events():
    a = aut(alpha(("x", True)), 2, {1}, [(0, "x", 1)])
    b = aut(alpha(("y", True)), 2, {1}, [(0, "y", 1)])
    p = sync(a, b)
    # x and y are private to their components, so both orders exist.
    assert p.counts() == (4, 2, 4)
    assert p.accepts(("x", "y"))
    assert p.accepts(("y", "x"))
    assert not p.accepts(("x",))


def test_sync_synchronizes_shared_events():
    a = aut(XY, 2, {1}, [(0, "x", 1), (1, "y", 1)])
    b = aut(XY, 2, {1}, [(0, "x", 1)])
    p = sync(a, b)
    # y is in both alphabets but only a defines it, so it never fires.
    assert p.accepts(("x",))
    assert p.replay(("x", "y")) is None


def test_sync_marks_pairs_where_both_mark():
    a = aut(alpha(("x", True)), 2, {1}, [(0, "x", 1)])
    b = aut(alpha(("y", True)), 1, set(), [(0, "y", 0)])
    assert sync(a, b).marked == frozenset()


def test_sync_with_empty_component_is_empty():
    a = aut(XY, 1, {0}, [])
    assert sync(a, Automaton.empty("e", XY)).state_count == 0


def test_sync_rejects_conflicting_controllability():
    a = aut(alpha(("x", True)), 1, {0}, [])
    b = aut(alpha(("x", False)), 1, {0}, [])
    with pytest.raises(AutomatonError, match="controllable"):
        sync(a, b)


def test_sync_all_folds_left():
    parts = [
        aut(alpha(("x", True)), 2, {1}, [(0, "x", 1)]),
        aut(alpha(("y", True)), 2, {1}, [(0, "y", 1)]),
        aut(alpha(("z", False)), 2, {1}, [(0, "z", 1)]),
    ]
    p = sync_all(parts)
    assert p.counts()[0] == 8
    assert language_equivalent(p, sync(sync(parts[0], parts[1]), parts[2]))
    with pytest.raises(AutomatonError):
        sync_all([])


@given(automata(max_states=3), automata(max_states=3), st.integers(2, 4))
@settings(max_examples=60, deadline=None)
def test_sync_matches_projection_definition(a, b, max_len):
    p = sync(a, b)
    assert sync_membership_mismatch(a, b, p, max_len) is None


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_sync_commutes_and_associates(data):
    ab = data.draw(alphabets(max_events=3))
    a = data.draw(automata(alphabet=ab, max_states=3))
    b = data.draw(automata(alphabet=ab, max_states=3))
    c = data.draw(automata(alphabet=ab, max_states=3))
    assert language_equivalent(sync(a, b), sync(b, a))
    assert language_equivalent(sync(a, sync(b, c)), sync(sync(a, b), c))


def test_allevents_shape():
    a = aut(XY, 3, {0}, [(0, "x", 1)])
    hub = allevents(a)
    assert hub.counts() == (1, 2, 2)
    assert hub.marked == {0}
    assert hub.accepts(("y", "x", "x", "y"))


@given(automata())
@settings(max_examples=60)
def test_sync_with_allevents_changes_nothing(a):
    assert language_equivalent(sync(a, allevents(a)), a)


def test_selfloop_complete_adds_loops_everywhere():
    e = aut(alpha(("x", True)), 2, {1}, [(0, "x", 1)])
    target = alpha(("x", True), ("y", False), ("z", True))
    lifted = selfloop_complete(e, target)
    assert lifted.state_count == e.state_count
    assert lifted.alphabet == target
    assert len(lifted.transitions) == 1 + 2 * 2
    # The lifted automaton ignores the new events entirely.
    assert lifted.accepts(("y", "x", "z", "y"))
    assert not lifted.accepts(("y", "z"))


def test_selfloop_complete_requires_superset_alphabet():
    e = aut(XY, 1, {0}, [])
    with pytest.raises(AutomatonError, match="lacks"):
        selfloop_complete(e, alpha(("x", True)))


def test_selfloop_complete_rejects_retagged_events():
    e = aut(alpha(("x", True)), 1, {0}, [])
    with pytest.raises(AutomatonError, match="controllable"):
        selfloop_complete(e, alpha(("x", False), ("y", True)))


@given(automata(), st.data())
@settings(max_examples=60)
def test_selfloop_complete_preserves_states_and_language_shape(a, data):
    extra = data.draw(st.sampled_from(["p", "q", "r"]))
    target = alpha(*[(ev.name, ev.controllable) for ev in a.alphabet], (extra, False))
    lifted = selfloop_complete(a, target)
    assert lifted.state_count == a.state_count
    assert len(lifted.transitions) == len(a.transitions) + a.state_count
    for trace in [(), (extra,), (extra, extra)]:
        assert (lifted.replay(trace) is not None) == (a.state_count > 0)
