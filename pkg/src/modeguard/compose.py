"""Composition operators: synchronous product and alphabet completion."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

from .automata import Alphabet, Automaton, AutomatonError, EventDef


def merge_alphabets(a: Alphabet, b: Alphabet) -> Alphabet:
    """Union of two alphabets; a shared name must agree on controllability."""
    merged: list[EventDef] = list(a)
    for ev in b:
        if ev.name in a:
            if a[ev.name].controllable != ev.controllable:
                raise AutomatonError(
                    f"event {ev.name!r} tagged both controllable and uncontrollable"
                )
        else:
            merged.append(ev)
    return Alphabet(merged)


def sync(a: Automaton, b: Automaton) -> Automaton:
    """Synchronous product of two automata.

    Shared events move both components together; an event private to one
    alphabet moves that component alone.  Only pairs reachable from the
    initial pair are materialized, numbered densely in BFS discovery
    order, so a large conceptual product stays as small as its reachable
    part.  A pair is marked when both components are marked.
    """
    alphabet = merge_alphabets(a.alphabet, b.alphabet)
    if a.state_count == 0 or b.state_count == 0:
        return Automaton.empty(f"{a.name}||{b.name}", alphabet)
    a_names = a.alphabet.name_set()
    b_names = b.alphabet.name_set()

    start = (a.initial, b.initial)
    index = {start: 0}
    order = [start]
    frontier = deque([start])
    transitions: list[tuple[int, str, int]] = []
    while frontier:
        pair = frontier.popleft()
        qa, qb = pair
        src = index[pair]
        for ev in alphabet:
            name = ev.name
            if name in a_names:
                da = a.step(qa, name)
                if da is None:
                    continue
            else:
                da = qa
            if name in b_names:
                db = b.step(qb, name)
                if db is None:
                    continue
            else:
                db = qb
            nxt = (da, db)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
                frontier.append(nxt)
            transitions.append((src, name, index[nxt]))

    marked = [
        index[(qa, qb)]
        for (qa, qb) in order
        if qa in a.marked and qb in b.marked
    ]
    return Automaton(
        f"{a.name}||{b.name}", alphabet, len(order), 0, marked, transitions
    )


def sync_all(automata: Sequence[Automaton]) -> Automaton:
    """Left fold of :func:`sync` over a nonempty sequence."""
    if not automata:
        raise AutomatonError("sync_all needs at least one automaton")
    result = automata[0]
    for other in automata[1:]:
        result = sync(result, other)
    return result


def allevents(a: Automaton) -> Automaton:
    """One marked state selflooping every event of ``a``'s alphabet.

    Its language is the full event monoid, so syncing with it constrains
    nothing: ``sync(a, allevents(a))`` is language-equivalent to ``a``.
    """
    transitions = [(0, ev.name, 0) for ev in a.alphabet]
    return Automaton(f"all({a.name})", a.alphabet, 1, 0, (0,), transitions)


def selfloop_complete(e: Automaton, target_alphabet: Alphabet) -> Automaton:
    """Lift ``e`` to ``target_alphabet`` by selflooping the missing events.

    Every event of the target alphabet absent from ``e``'s alphabet is
    added as a selfloop at every state: the completed automaton imposes
    no constraint on events ``e`` never mentioned.  State count is
    preserved; ``e``'s own events must all appear in the target.
    """
    missing_from_target = e.alphabet.name_set() - target_alphabet.name_set()
    if missing_from_target:
        raise AutomatonError(
            f"target alphabet lacks events of {e.name!r}: {sorted(missing_from_target)}"
        )
    for ev in e.alphabet:
        if target_alphabet[ev.name].controllable != ev.controllable:
            raise AutomatonError(
                f"event {ev.name!r} tagged both controllable and uncontrollable"
            )
    extra = [ev for ev in target_alphabet if ev.name not in e.alphabet]
    transitions = dict(e.transitions)
    for q in range(e.state_count):
        for ev in extra:
            transitions[(q, ev.name)] = q
    return Automaton(
        e.name, target_alphabet, e.state_count, e.initial, e.marked, transitions
    )
