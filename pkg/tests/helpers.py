"""Shared builders, hypothesis strategies, and brute-force oracles.

The oracles here intentionally re-derive results from string-level
definitions (projections, prefix closures) instead of reusing library
internals, so library bugs cannot hide behind themselves.
"""

from __future__ import annotations

from collections import deque

from hypothesis import strategies as st

from modeguard import Alphabet, Automaton, EventDef


def alpha(*pairs: tuple[str, bool]) -> Alphabet:
    return Alphabet(EventDef(name, ctl) for name, ctl in pairs)


def aut(
    events: Alphabet,
    n: int,
    marked,
    trans,
    name: str = "t",
    initial: int = 0,
) -> Automaton:
    return Automaton(name, events, n, initial, marked, trans)


def closed_strings(a: Automaton, max_len: int) -> set[tuple[str, ...]]:
    """All strings of L(a) (prefix-closed behavior) up to max_len."""
    out: set[tuple[str, ...]] = set()
    if a.state_count == 0:
        return out
    layer = [(a.initial, ())]
    out.add(())
    for _ in range(max_len):
        nxt = []
        for state, prefix in layer:
            for event, dst in a.successors(state).items():
                trace = prefix + (event,)
                out.add(trace)
                nxt.append((dst, trace))
        layer = nxt
    return out


def project(trace: tuple[str, ...], names) -> tuple[str, ...]:
    return tuple(ev for ev in trace if ev in names)


def sync_membership_mismatch(a, b, p, max_len: int):
    """First string on which p disagrees with the projection definition.

    A string over the merged alphabet belongs to the composition exactly
    when its projection onto each component's alphabet belongs to that
    component; same statement for marked strings.  Checks every string
    up to max_len; None means full agreement on that horizon.
    """
    from itertools import product as iproduct

    names = sorted(p.alphabet.names())
    a_names = a.alphabet.name_set()
    b_names = b.alphabet.name_set()
    for length in range(max_len + 1):
        for combo in iproduct(names, repeat=length):
            pa = project(combo, a_names)
            pb = project(combo, b_names)
            closed_ok = (p.replay(combo) is not None) == (
                a.replay(pa) is not None and b.replay(pb) is not None
            )
            marked_ok = p.accepts(combo) == (a.accepts(pa) and b.accepts(pb))
            if not (closed_ok and marked_ok):
                return combo
    return None


def drop_uncontrollable_dead_entries(a: Automaton) -> Automaton:
    """Remove uncontrollable transitions that exit the coreachable part.

    A plant that can slide uncontrollably into a dead branch has a
    strictly smaller supremal result than its trim (no supervisor can
    veto the slide), so the supcon-equals-trim identity is only claimed
    for plants without such edges.  This scrub produces them.
    """
    from modeguard import coreachable

    co = coreachable(a)
    kept = {}
    for (src, ev), dst in a.transitions.items():
        if src in co and dst not in co and not a.alphabet[ev].controllable:
            continue
        kept[(src, ev)] = dst
    return Automaton(a.name, a.alphabet, a.state_count, a.initial, a.marked, kept)


def controllability_violation(k, g, horizon: int):
    """String-level controllability search: find (s, u) with s in both
    closed languages, u uncontrollable, s,u plant-defined but not in k."""
    unc = sorted(g.alphabet.uncontrollable_names())
    for s in sorted(closed_strings(k, horizon), key=lambda t: (len(t), t)):
        if g.replay(s) is None:
            continue
        for u in unc:
            if g.replay(s + (u,)) is not None and k.replay(s + (u,)) is None:
                return s, u
    return None


# ---------------------------------------------------------------------------
# hypothesis strategies
# ---------------------------------------------------------------------------

EVENT_POOL = [("a", True), ("b", False), ("c", True), ("d", False)]


@st.composite
def alphabets(draw, min_events: int = 1, max_events: int = 4) -> Alphabet:
    k = draw(st.integers(min_events, max_events))
    return alpha(*EVENT_POOL[:k])


@st.composite
def automata(
    draw,
    alphabet: Alphabet | None = None,
    max_states: int = 6,
    min_states: int = 1,
) -> Automaton:
    if alphabet is None:
        alphabet = draw(alphabets())
    n = draw(st.integers(min_states, max_states))
    names = alphabet.names()
    pairs = [(q, e) for q in range(n) for e in names]
    chosen = draw(st.sets(st.sampled_from(pairs)) if pairs else st.just(set()))
    trans = {}
    for src, event in sorted(chosen):
        trans[(src, event)] = draw(st.integers(0, n - 1))
    marked = draw(st.sets(st.integers(0, n - 1)))
    return Automaton("h", alphabet, n, 0, marked, trans)
