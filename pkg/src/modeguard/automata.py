"""Deterministic finite automata with marked states.

States are dense integer indices so the fixpoint computations
(reachability, coreachability, trim) are cheap set operations.  The
empty automaton (``state_count == 0``) is a first-class value: supremal
synthesis can legitimately return it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping


class AutomatonError(Exception):
    """Raised when an automaton cannot be constructed as requested."""


class AlphabetMismatchError(AutomatonError):
    """Raised when an operation requires compatible alphabets and got none."""


class AutFormatError(AutomatonError):
    """Raised on malformed ``.aut`` text; message carries the line number."""


@dataclass(frozen=True)
class EventDef:
    """A named event, tagged controllable or uncontrollable for good."""

    name: str
    controllable: bool

    def __post_init__(self) -> None:
        if not self.name or any(ch.isspace() for ch in self.name):
            raise AutomatonError(f"event name must be nonempty and spaceless: {self.name!r}")


class Alphabet:
    """An ordered collection of :class:`EventDef` with unique names."""

    __slots__ = ("_events",)

    def __init__(self, events: Iterable[EventDef]):
        table: dict[str, EventDef] = {}
        for ev in events:
            if ev.name in table:
                raise AutomatonError(f"duplicate event name {ev.name!r} in alphabet")
            table[ev.name] = ev
        self._events = table

    def __iter__(self) -> Iterator[EventDef]:
        return iter(self._events.values())

    def __len__(self) -> int:
        return len(self._events)

    def __contains__(self, name: str) -> bool:
        return name in self._events

    def __getitem__(self, name: str) -> EventDef:
        return self._events[name]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Alphabet):
            return NotImplemented
        return self._events == other._events

    def __repr__(self) -> str:
        return f"Alphabet({list(self._events)})"

    def names(self) -> tuple[str, ...]:
        return tuple(self._events)

    def name_set(self) -> frozenset[str]:
        return frozenset(self._events)

    def controllable_names(self) -> frozenset[str]:
        return frozenset(n for n, ev in self._events.items() if ev.controllable)

    def uncontrollable_names(self) -> frozenset[str]:
        return frozenset(n for n, ev in self._events.items() if not ev.controllable)


Trace = tuple[str, ...]
"""A (possibly empty) sequence of event names replayed on some automaton."""


class Automaton:
    """A deterministic automaton with marked (accepting) states.

    ``transitions`` may be an iterable of ``(src, event, dst)`` triples or a
    mapping ``{(src, event): dst}``.  Duplicate ``(src, event)`` pairs are
    rejected at construction: determinism is not negotiable.  Range and
    alphabet-membership problems are reported by :func:`validate` instead,
    so diagnostic tooling can inspect broken inputs.
    """

    __slots__ = ("name", "alphabet", "state_count", "initial", "marked", "transitions", "_adj")

    def __init__(
        self,
        name: str,
        alphabet: Alphabet,
        state_count: int,
        initial: int,
        marked: Iterable[int],
        transitions: Iterable[tuple[int, str, int]] | Mapping[tuple[int, str], int] = (),
    ):
        self.name = name
        self.alphabet = alphabet
        self.state_count = int(state_count)
        self.initial = int(initial)
        self.marked = frozenset(int(q) for q in marked)
        table: dict[tuple[int, str], int] = {}
        if isinstance(transitions, Mapping):
            table.update(transitions)
        else:
            for src, event, dst in transitions:
                key = (int(src), event)
                if key in table:
                    raise AutomatonError(
                        f"nondeterministic transition: ({src}, {event!r}) maps to "
                        f"both {table[key]} and {dst}"
                    )
                table[key] = int(dst)
        self.transitions = table
        adj: dict[int, dict[str, int]] = {}
        for (src, event), dst in table.items():
            adj.setdefault(src, {})[event] = dst
        self._adj = adj

    @classmethod
    def empty(cls, name: str, alphabet: Alphabet) -> "Automaton":
        """The designated empty automaton: no states, no language."""
        return cls(name, alphabet, 0, 0, ())

    def __repr__(self) -> str:
        return (
            f"<Automaton {self.name!r}: {self.state_count} states, "
            f"{len(self.alphabet)} events, {len(self.transitions)} transitions>"
        )

    def counts(self) -> tuple[int, int, int]:
        """(states, events, transitions) — the usual size summary."""
        return (self.state_count, len(self.alphabet), len(self.transitions))

    def successors(self, state: int) -> dict[str, int]:
        """Events defined at ``state`` and where they lead."""
        return self._adj.get(state, {})

    def step(self, state: int, event: str) -> int | None:
        return self.transitions.get((state, event))

    def replay(self, trace: Iterable[str], start: int | None = None) -> int | None:
        """Run ``trace`` from ``start`` (default: initial); None if undefined."""
        if self.state_count == 0:
            return None
        state = self.initial if start is None else start
        for event in trace:
            nxt = self.transitions.get((state, event))
            if nxt is None:
                return None
            state = nxt
        return state

    def accepts(self, trace: Iterable[str]) -> bool:
        end = self.replay(trace)
        return end is not None and end in self.marked


def validate(a: Automaton) -> list[str]:
    """All invariant violations, one description per finding; [] means valid."""
    problems: list[str] = []
    if a.state_count == 0:
        if a.marked:
            problems.append("empty automaton has marked states")
        if a.transitions:
            problems.append("empty automaton has transitions")
        return problems
    if not 0 <= a.initial < a.state_count:
        problems.append(f"initial state {a.initial} out of range [0, {a.state_count})")
    for q in sorted(a.marked):
        if not 0 <= q < a.state_count:
            problems.append(f"marked state {q} out of range [0, {a.state_count})")
    for (src, event), dst in sorted(a.transitions.items()):
        if not 0 <= src < a.state_count:
            problems.append(f"transition source {src} out of range ({src}, {event!r}, {dst})")
        if not 0 <= dst < a.state_count:
            problems.append(f"transition target {dst} out of range ({src}, {event!r}, {dst})")
        if event not in a.alphabet:
            problems.append(f"transition event {event!r} not in alphabet ({src}, {event!r}, {dst})")
    return problems


def reachable(a: Automaton) -> frozenset[int]:
    """States reachable from the initial state by defined transitions."""
    if a.state_count == 0:
        return frozenset()
    seen = {a.initial}
    frontier = deque([a.initial])
    while frontier:
        q = frontier.popleft()
        for dst in a.successors(q).values():
            if dst not in seen:
                seen.add(dst)
                frontier.append(dst)
    return frozenset(seen)


def coreachable(a: Automaton) -> frozenset[int]:
    """States from which some marked state can be reached."""
    preds: dict[int, set[int]] = {}
    for (src, _event), dst in a.transitions.items():
        preds.setdefault(dst, set()).add(src)
    seen = set(a.marked)
    frontier = deque(seen)
    while frontier:
        q = frontier.popleft()
        for p in preds.get(q, ()):
            if p not in seen:
                seen.add(p)
                frontier.append(p)
    return frozenset(seen)


def trim(a: Automaton) -> Automaton:
    """Restriction of ``a`` to reachable-and-coreachable states.

    States are renumbered densely in increasing old-index order.  Returns
    the empty automaton when the initial state cannot reach a marked one.
    """
    keep = reachable(a) & coreachable(a)
    if a.state_count == 0 or a.initial not in keep:
        return Automaton.empty(a.name, a.alphabet)
    renum = {old: new for new, old in enumerate(sorted(keep))}
    transitions = [
        (renum[src], event, renum[dst])
        for (src, event), dst in a.transitions.items()
        if src in keep and dst in keep
    ]
    return Automaton(
        a.name,
        a.alphabet,
        len(keep),
        renum[a.initial],
        (renum[q] for q in a.marked if q in keep),
        transitions,
    )


def is_nonblocking(a: Automaton) -> bool:
    """True iff every reachable state can reach a marked state."""
    if a.state_count == 0:
        return True
    return reachable(a) <= coreachable(a)


def language_equivalent(a: Automaton, b: Automaton) -> bool:
    """True iff L(a) = L(b) and Lm(a) = Lm(b).

    Synchronized pairwise traversal: a reachable pair that disagrees on
    marking, or on which events are defined, witnesses a difference.
    Alphabets must carry the same name set.
    """
    if a.alphabet.name_set() != b.alphabet.name_set():
        raise AlphabetMismatchError(
            f"alphabets differ: {sorted(a.alphabet.name_set() ^ b.alphabet.name_set())}"
        )
    if a.state_count == 0 or b.state_count == 0:
        # An empty automaton has no strings at all, not even the empty one.
        return a.state_count == 0 and b.state_count == 0
    start = (a.initial, b.initial)
    seen = {start}
    frontier = deque([start])
    while frontier:
        qa, qb = frontier.popleft()
        if (qa in a.marked) != (qb in b.marked):
            return False
        succ_a = a.successors(qa)
        succ_b = b.successors(qb)
        if set(succ_a) != set(succ_b):
            return False
        for event, da in succ_a.items():
            pair = (da, succ_b[event])
            if pair not in seen:
                seen.add(pair)
                frontier.append(pair)
    return True


def enumerate_marked_strings(a: Automaton, max_len: int) -> set[Trace]:
    """All marked strings of length <= ``max_len``.

    Grows as |alphabet|**max_len; meant for small oracle instances only.
    """
    results: set[Trace] = set()
    if a.state_count == 0:
        return results
    layer: list[tuple[int, Trace]] = [(a.initial, ())]
    if a.initial in a.marked:
        results.add(())
    for _ in range(max_len):
        nxt: list[tuple[int, Trace]] = []
        for state, prefix in layer:
            for event, dst in a.successors(state).items():
                trace = prefix + (event,)
                nxt.append((dst, trace))
                if dst in a.marked:
                    results.add(trace)
        layer = nxt
    return results


# ---------------------------------------------------------------------------
# ".aut" text format
#
#   name <string>
#   states <N>
#   initial <i>
#   marked <i> <j> ...        (may be bare "marked")
#   events
#     <name> <c|u>
#   trans
#     <src> <event-name> <dst>
#
# '#' starts a comment; blank lines are ignored on input, never emitted.
# Emission is canonical (events in alphabet order, transitions sorted by
# source, event, target) so export -> import -> export is byte-identical.
# ---------------------------------------------------------------------------


def write_aut(a: Automaton) -> str:
    lines = [f"name {a.name}", f"states {a.state_count}", f"initial {a.initial}"]
    lines.append(("marked " + " ".join(str(q) for q in sorted(a.marked))).rstrip())
    lines.append("events")
    for ev in a.alphabet:
        lines.append(f"  {ev.name} {'c' if ev.controllable else 'u'}")
    lines.append("trans")
    for src, event, dst in sorted(
        (src, event, dst) for (src, event), dst in a.transitions.items()
    ):
        lines.append(f"  {src} {event} {dst}")
    return "\n".join(lines) + "\n"


def parse_aut(text: str) -> Automaton:
    """Parse ``.aut`` text; malformed input raises line-numbered errors."""
    rows: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip()
        if stripped.strip():
            rows.append((lineno, stripped))

    def fail(lineno: int, why: str) -> AutFormatError:
        return AutFormatError(f"line {lineno}: {why}")

    def expect(idx: int, keyword: str) -> tuple[int, str]:
        if idx >= len(rows):
            raise AutFormatError(f"line {len(text.splitlines()) + 1}: missing {keyword!r} line")
        lineno, line = rows[idx]
        head = line.strip().split(None, 1)[0]
        if head != keyword:
            raise fail(lineno, f"expected {keyword!r}, found {head!r}")
        return rows[idx]

    lineno, line = expect(0, "name")
    parts = line.strip().split(None, 1)
    if len(parts) != 2:
        raise fail(lineno, "name line needs a value")
    name = parts[1]

    def int_field(idx: int, keyword: str) -> int:
        lineno, line = expect(idx, keyword)
        parts = line.strip().split()
        if len(parts) != 2:
            raise fail(lineno, f"{keyword} line needs exactly one integer")
        try:
            return int(parts[1])
        except ValueError:
            raise fail(lineno, f"{keyword} value {parts[1]!r} is not an integer") from None

    state_count = int_field(1, "states")
    initial = int_field(2, "initial")

    lineno, line = expect(3, "marked")
    marked: list[int] = []
    for token in line.strip().split()[1:]:
        try:
            marked.append(int(token))
        except ValueError:
            raise fail(lineno, f"marked state {token!r} is not an integer") from None

    expect(4, "events")
    events: list[EventDef] = []
    idx = 5
    while idx < len(rows):
        lineno, line = rows[idx]
        if not line.startswith(" "):
            break
        parts = line.strip().split()
        if len(parts) != 2 or parts[1] not in ("c", "u"):
            raise fail(lineno, "event line must be '<name> <c|u>'")
        if any(ev.name == parts[0] for ev in events):
            raise fail(lineno, f"duplicate event {parts[0]!r}")
        events.append(EventDef(parts[0], parts[1] == "c"))
        idx += 1
    alphabet = Alphabet(events)

    lineno, line = expect(idx, "trans")
    idx += 1
    transitions: dict[tuple[int, str], int] = {}
    while idx < len(rows):
        lineno, line = rows[idx]
        if not line.startswith(" "):
            raise fail(lineno, f"unexpected content after trans section: {line.strip()!r}")
        parts = line.strip().split()
        if len(parts) != 3:
            raise fail(lineno, "transition line must be '<src> <event> <dst>'")
        try:
            src, dst = int(parts[0]), int(parts[2])
        except ValueError:
            raise fail(lineno, "transition endpoints must be integers") from None
        event = parts[1]
        if event not in alphabet:
            raise fail(lineno, f"unknown event {event!r}")
        if not 0 <= src < state_count or not 0 <= dst < state_count:
            raise fail(lineno, f"state out of range in ({src}, {event}, {dst})")
        if (src, event) in transitions:
            raise fail(lineno, f"duplicate transition source ({src}, {event})")
        transitions[(src, event)] = dst
        idx += 1

    if state_count > 0 and not 0 <= initial < state_count:
        raise fail(rows[2][0], f"initial state {initial} out of range")
    for q in marked:
        if not 0 <= q < state_count:
            raise fail(rows[3][0], f"marked state {q} out of range")

    return Automaton(name, alphabet, state_count, initial, marked, transitions)


def load_aut(path) -> Automaton:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_aut(fh.read())


def dump_aut(a: Automaton, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_aut(a))
