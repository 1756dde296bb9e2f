"""Supervisor execution: transition-matrix export, the periodic decision
loop, scenario replay, and the live session backing the cockpit service.

The engine is deliberately free of web machinery; :mod:`modeguard.service`
wraps :class:`LiveSession` in the HTTP wire protocol.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .automata import Automaton, AutomatonError, Trace
from .multicopter import (
    GROUP_ORDER,
    EventCatalog,
    FlightMode,
    build_event_catalog,
    mode_labels,
)
from .synthesis import SynthesisReport

__all__ = [
    "AmbiguityError",
    "DeadlockError",
    "DecisionError",
    "EventFrame",
    "LiveSession",
    "LogEntry",
    "ScenarioFormatError",
    "SessionState",
    "SupFormatError",
    "TransitionMatrix",
    "DEFAULT_HEALTH",
    "decision_step",
    "default_frame",
    "dump_sup",
    "export_matrix",
    "initial_session",
    "load_sup",
    "matrix_to_automaton",
    "parse_scenario",
    "parse_sup",
    "run_scenario",
    "write_scenario",
    "write_sup",
]

HEALTH_GROUPS = GROUP_ORDER[3:]

#: Nominal readings: everything healthy, battery full, still airborne and
#: far from base, throttle in the normal band.
DEFAULT_HEALTH: dict[str, str] = {
    "INS": "ATE1",
    "GPS": "ATE3",
    "barometer": "ATE5",
    "compass": "ATE7",
    "propulsors": "ATE9",
    "RC": "ATE11",
    "battery": "ATE13",
    "altitude": "ATE17",
    "distance": "ATE19",
    "throttle": "ATE21",
}


class DecisionError(AutomatonError):
    """A decision period could not be resolved to a single mode command."""


class DeadlockError(DecisionError):
    """No command is defined where one is required: the matrix is corrupt."""


class AmbiguityError(DecisionError):
    """More than one mode command is enabled after a frame."""


class SupFormatError(AutomatonError):
    """A ``.sup`` matrix file is malformed."""


class ScenarioFormatError(AutomatonError):
    """A scenario file is malformed."""


@dataclass(frozen=True)
class TransitionMatrix:
    """The supervisor flattened to (source, destination, event) rows.

    Rows are kept sorted by (source, event name) and indexed by source so
    one lookup costs a dict probe.  Accepting states carry distinct mode
    labels; the full failsafe matrix has one per flight mode, which
    :meth:`covers_all_modes` reports.
    """

    rows: tuple[tuple[int, int, str], ...]
    initial: int
    accepting: dict[int, FlightMode]
    alphabet: EventCatalog
    _index: dict[int, dict[str, int]] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(sorted(self.rows, key=lambda r: (r[0], r[2]))))
        index: dict[int, dict[str, int]] = {}
        for src, dst, event in self.rows:
            out = index.setdefault(src, {})
            if event in out:
                raise AutomatonError(
                    f"matrix is nondeterministic: two rows for state {src} on {event!r}"
                )
            out[event] = dst
        object.__setattr__(self, "_index", index)
        if not self.accepting:
            raise AutomatonError("matrix has no accepting states")
        if len(set(self.accepting.values())) != len(self.accepting):
            raise AutomatonError("accepting states do not map to distinct flight modes")
        if self.initial not in self.accepting:
            raise AutomatonError("initial state is not accepting")

    def covers_all_modes(self) -> bool:
        """True when every flight mode owns an accepting state."""
        return set(self.accepting.values()) == set(FlightMode)

    def step(self, state: int, event: str) -> int | None:
        return self._index.get(state, {}).get(event)

    def commands_at(self, state: int) -> dict[str, int]:
        """Mode commands defined at ``state``, event name to destination."""
        mces = self.alphabet.mces
        return {ev: dst for ev, dst in self._index.get(state, {}).items() if ev in mces}

    def state_count(self) -> int:
        states = {self.initial, *self.accepting}
        for src, dst, _ in self.rows:
            states.add(src)
            states.add(dst)
        return max(states) + 1


def export_matrix(report: SynthesisReport) -> TransitionMatrix:
    """Flatten a synthesized supervisor into its runtime matrix."""
    if report.empty or not report.nonblocking:
        raise AutomatonError("refusing to export a blocking or empty supervisor")
    supervisor = report.supervisor
    labels = mode_labels(supervisor)
    rows = tuple((src, dst, ev) for (src, ev), dst in supervisor.transitions.items())
    return TransitionMatrix(
        rows=rows,
        initial=supervisor.initial,
        accepting=labels,
        alphabet=build_event_catalog(),
    )


def matrix_to_automaton(matrix: TransitionMatrix, name: str = "supervisor") -> Automaton:
    """Rebuild an automaton from matrix rows (the export is lossless)."""
    return Automaton(
        name,
        matrix.alphabet.alphabet(),
        state_count=matrix.state_count(),
        initial=matrix.initial,
        marked=tuple(sorted(matrix.accepting)),
        transitions=[(src, ev, dst) for src, dst, ev in matrix.rows],
    )


# -- .sup file format --------------------------------------------------------


def write_sup(matrix: TransitionMatrix) -> str:
    lines = [f"initial {matrix.initial}"]
    accepting = " ".join(
        f"{state}={mode.name}" for state, mode in sorted(matrix.accepting.items())
    )
    lines.append(f"accepting {accepting}")
    lines.append("matrix")
    lines.extend(f"  {src},{dst},{event}" for src, dst, event in matrix.rows)
    return "\n".join(lines) + "\n"


def parse_sup(text: str) -> TransitionMatrix:
    catalog = build_event_catalog()
    known = catalog.alphabet().name_set()
    modes = {m.name: m for m in FlightMode}
    initial: int | None = None
    accepting: dict[int, FlightMode] = {}
    rows: list[tuple[int, int, str]] = []
    section = "header"
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if section == "header":
            if line.startswith("initial "):
                if initial is not None:
                    raise SupFormatError(f"line {lineno}: duplicate initial line")
                try:
                    initial = int(line.split(maxsplit=1)[1])
                except ValueError:
                    raise SupFormatError(f"line {lineno}: initial state is not an integer")
            elif line.startswith("accepting "):
                for chunk in line.split()[1:]:
                    state_text, _, mode_text = chunk.partition("=")
                    if mode_text not in modes:
                        raise SupFormatError(f"line {lineno}: unknown mode {mode_text!r}")
                    try:
                        state = int(state_text)
                    except ValueError:
                        raise SupFormatError(f"line {lineno}: accepting state {state_text!r} is not an integer")
                    if state in accepting:
                        raise SupFormatError(f"line {lineno}: accepting state {state} repeated")
                    accepting[state] = modes[mode_text]
            elif line == "matrix":
                section = "rows"
            else:
                raise SupFormatError(f"line {lineno}: unexpected {line.split()[0]!r} in header")
        else:
            parts = line.split(",")
            if len(parts) != 3:
                raise SupFormatError(f"line {lineno}: expected src,dst,event")
            try:
                src, dst = int(parts[0]), int(parts[1])
            except ValueError:
                raise SupFormatError(f"line {lineno}: state indices must be integers")
            event = parts[2]
            if event not in known:
                raise SupFormatError(f"line {lineno}: unknown event {event!r}")
            rows.append((src, dst, event))
    if initial is None:
        raise SupFormatError("missing initial line")
    if section != "rows":
        raise SupFormatError("missing matrix section")
    try:
        return TransitionMatrix(tuple(rows), initial, accepting, catalog)
    except AutomatonError as err:
        raise SupFormatError(str(err)) from err


def load_sup(path) -> TransitionMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_sup(fh.read())


def dump_sup(matrix: TransitionMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_sup(matrix))


# -- frames and the decision loop --------------------------------------------


@dataclass(frozen=True)
class EventFrame:
    """One detection period's worth of inputs.

    ``health`` maps every reading group label to the group member observed
    this period; the pilot contributes a stick position, a mode switch
    position and, optionally, one power press.
    """

    stick_action: str
    mode_switch: str
    health: Mapping[str, str]
    power: str | None = None
    period_index: int = 0

    def __post_init__(self) -> None:
        catalog = build_event_catalog()
        if self.stick_action not in catalog.group("stick").members:
            raise ValueError(f"stick_action {self.stick_action!r} is not a stick event")
        if self.mode_switch not in catalog.group("switch").members:
            raise ValueError(f"mode_switch {self.mode_switch!r} is not a switch event")
        if self.power is not None and self.power not in catalog.group("power").members:
            raise ValueError(f"power {self.power!r} is not a power event")
        given = dict(self.health)
        missing = [label for label in HEALTH_GROUPS if label not in given]
        if missing:
            raise ValueError(f"health readings missing for groups: {', '.join(missing)}")
        extra = sorted(set(given) - set(HEALTH_GROUPS))
        if extra:
            raise ValueError(f"unknown health groups: {', '.join(extra)}")
        for label in HEALTH_GROUPS:
            if given[label] not in catalog.group(label).members:
                raise ValueError(
                    f"{given[label]!r} is not a {label} reading"
                )
        ordered = {label: given[label] for label in HEALTH_GROUPS}
        object.__setattr__(self, "health", ordered)

    def events(self) -> tuple[str, ...]:
        """Frame events in plant consumption order (power press first)."""
        head = (self.power,) if self.power else ()
        return head + (self.stick_action, self.mode_switch) + tuple(self.health.values())


def default_frame(
    period_index: int = 0,
    *,
    stick: str = "MIE5",
    switch: str = "MIE6",
    power: str | None = None,
    **overrides: str,
) -> EventFrame:
    """A nominal frame, with keyword overrides per health group label."""
    health = dict(DEFAULT_HEALTH)
    for label, event in overrides.items():
        if label not in health:
            raise ValueError(f"unknown health group {label!r}")
        health[label] = event
    return EventFrame(stick, switch, health, power=power, period_index=period_index)


@dataclass(frozen=True)
class LogEntry:
    period_index: int
    consumed: Trace
    command: str | None
    mode: FlightMode


@dataclass(frozen=True)
class SessionState:
    """Where the supervised system currently rests, plus its history."""

    current: int
    mode: FlightMode
    delta: float = 1.0
    detect_interval: float = 0.01
    log: tuple[LogEntry, ...] = ()


def initial_session(
    matrix: TransitionMatrix, delta: float = 1.0, detect_interval: float = 0.01
) -> SessionState:
    return SessionState(
        current=matrix.initial,
        mode=matrix.accepting[matrix.initial],
        delta=delta,
        detect_interval=detect_interval,
    )


def decision_step(
    session: SessionState, frame: EventFrame, matrix: TransitionMatrix
) -> SessionState:
    """Consume one frame and take the single enabled mode command.

    Frame events are offered in plant order; an event not defined at the
    present state is discarded (the current mode's check path does not
    consume its group).  Afterwards exactly one mode command must be
    enabled.  A frame none of whose events are defined is a no-op at an
    accepting state: the vehicle is parked where only a specific input
    (a power press, the neutral stick) can move it.
    """
    q = session.current
    consumed: list[str] = []
    for ev in frame.events():
        nxt = matrix.step(q, ev)
        if nxt is not None:
            q = nxt
            consumed.append(ev)
    commands = matrix.commands_at(q)
    if len(commands) > 1:
        raise AmbiguityError(
            f"period {frame.period_index}: commands {sorted(commands)} all enabled "
            f"at state {q} after {consumed}"
        )
    if not commands:
        if not consumed and session.current in matrix.accepting:
            entry = LogEntry(frame.period_index, (), None, session.mode)
            return replace(session, log=session.log + (entry,))
        raise DeadlockError(
            f"period {frame.period_index}: no command enabled at state {q} "
            f"after consuming {consumed}"
        )
    ((command, dst),) = commands.items()
    mode = matrix.accepting.get(dst)
    if mode is None:
        raise DeadlockError(
            f"period {frame.period_index}: command {command} lands on "
            f"non-accepting state {dst}"
        )
    entry = LogEntry(frame.period_index, tuple(consumed), command, mode)
    return replace(session, current=dst, mode=mode, log=session.log + (entry,))


def run_scenario(
    matrix: TransitionMatrix, scenario: Iterable[EventFrame]
) -> list[tuple[FlightMode, Trace]]:
    """Replay frames from the initial state; returns (mode, consumed) per period."""
    session = initial_session(matrix)
    timeline: list[tuple[FlightMode, Trace]] = []
    for index, frame in enumerate(scenario):
        session = decision_step(session, replace(frame, period_index=index), matrix)
        entry = session.log[-1]
        timeline.append((entry.mode, entry.consumed))
    return timeline


# -- scenario files -----------------------------------------------------------


def parse_scenario(text: str) -> list[EventFrame]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioFormatError(f"not valid JSON: {err}") from err
    if not isinstance(data, list):
        raise ScenarioFormatError("scenario must be a JSON array of frames")
    frames: list[EventFrame] = []
    for index, obj in enumerate(data):
        if not isinstance(obj, dict):
            raise ScenarioFormatError(f"frame {index}: not an object")
        unknown = sorted(set(obj) - {"stick", "switch", "power", "health"})
        if unknown:
            raise ScenarioFormatError(f"frame {index}: unknown keys {', '.join(unknown)}")
        try:
            stick = obj["stick"]
            switch = obj["switch"]
            health = obj["health"]
        except KeyError as err:
            raise ScenarioFormatError(f"frame {index}: missing key {err.args[0]!r}") from err
        if not isinstance(health, dict):
            raise ScenarioFormatError(f"frame {index}: health must be an object")
        try:
            frames.append(
                EventFrame(stick, switch, health, power=obj.get("power"), period_index=index)
            )
        except (ValueError, TypeError) as err:
            raise ScenarioFormatError(f"frame {index}: {err}") from err
    return frames


def write_scenario(frames: Iterable[EventFrame]) -> str:
    payload = [
        {
            "stick": f.stick_action,
            "switch": f.mode_switch,
            "power": f.power,
            "health": dict(f.health),
        }
        for f in frames
    ]
    return json.dumps(payload, indent=2) + "\n"


# -- live session --------------------------------------------------------------


class LiveSession:
    """One pilot-in-the-loop session driven by a periodic tick.

    Input values persist between ticks (sensors report levels, not edges);
    a power press is consumed by exactly one frame.  All mutations and
    reads go through one lock, and every mutation is acknowledged only
    after the next tick has run, so callers always observe a post-decision
    accepting state.  A decision error parks the session in a fault state:
    the tick loop stops and the fault report is published to subscribers.
    """

    def __init__(
        self,
        matrix: TransitionMatrix,
        delta: float = 1.0,
        detect_interval: float = 0.01,
        auto_power_on: bool = True,
        log_tail: int = 50,
    ):
        self._matrix = matrix
        self._session = initial_session(matrix, delta, detect_interval)
        self._health = dict(DEFAULT_HEALTH)
        self._stick = "MIE5"
        self._switch = "MIE6"
        self._pending_power: str | None = "MIE1" if auto_power_on else None
        self._log_tail = log_tail
        self._period = 0
        self._fault: str | None = None
        self._cond = threading.Condition()
        self._subscribers: list[queue.SimpleQueue] = []
        self._thread: threading.Thread | None = None
        self._stopping = threading.Event()

    # -- input commands (any thread) --

    def inject(self, group: str, event: str) -> dict:
        """Set one health group's reading; acknowledged post-tick."""
        with self._cond:
            self._check_alive()
            if group not in HEALTH_GROUPS:
                raise ValueError(f"unknown reading group {group!r}")
            if event not in self._matrix.alphabet.group(group).members:
                raise ValueError(f"{event!r} is not a {group} reading")
            self._health[group] = event
            return self._await_tick_locked()

    def set_rc(
        self,
        stick: str | None = None,
        switch: str | None = None,
        power: str | None = None,
    ) -> dict:
        """Update pilot inputs; acknowledged post-tick."""
        catalog = self._matrix.alphabet
        with self._cond:
            self._check_alive()
            if stick is not None:
                if stick not in catalog.group("stick").members:
                    raise ValueError(f"{stick!r} is not a stick event")
                self._stick = stick
            if switch is not None:
                if switch not in catalog.group("switch").members:
                    raise ValueError(f"{switch!r} is not a switch event")
                self._switch = switch
            if power is not None:
                if power not in catalog.group("power").members:
                    raise ValueError(f"{power!r} is not a power event")
                self._pending_power = power
            return self._await_tick_locked()

    def _check_alive(self) -> None:
        if self._fault is not None:
            raise RuntimeError(f"session halted: {self._fault}")

    def _await_tick_locked(self) -> dict:
        if self._thread is None:
            # manual mode (tests, scripted drivers): caller ticks explicitly
            return self._snapshot_locked()
        target = self._period + 1
        deadline = max(self._session.delta * 5, 2.0)
        self._cond.wait_for(
            lambda: self._period >= target or self._fault is not None, timeout=deadline
        )
        return self._snapshot_locked()

    # -- the tick (owner thread) --

    def tick(self) -> dict:
        """Assemble a frame from current inputs and decide one period."""
        with self._cond:
            if self._fault is not None:
                return self._snapshot_locked()
            frame = EventFrame(
                self._stick,
                self._switch,
                dict(self._health),
                power=self._pending_power,
                period_index=self._period,
            )
            self._pending_power = None
            try:
                self._session = decision_step(self._session, frame, self._matrix)
                entry = self._session.log[-1]
                record = {
                    "period": entry.period_index,
                    "mode": entry.mode.name,
                    "mce": entry.command,
                    "consumed": list(entry.consumed),
                }
            except DecisionError as err:
                self._fault = str(err)
                record = {"period": self._period, "fault": self._fault}
            self._period += 1
            for sub in self._subscribers:
                sub.put(record)
            self._cond.notify_all()
            return self._snapshot_locked()

    # -- observation --

    def state_snapshot(self) -> dict:
        with self._cond:
            return self._snapshot_locked()

    def _snapshot_locked(self) -> dict:
        tail = [
            {
                "period": e.period_index,
                "mode": e.mode.name,
                "mce": e.command,
                "consumed": list(e.consumed),
            }
            for e in self._session.log[-self._log_tail:]
        ]
        snapshot = {
            "mode": self._session.mode.name,
            "state": self._session.current,
            "period": self._period,
            "log_tail": tail,
        }
        if self._fault is not None:
            snapshot["fault"] = self._fault
        return snapshot

    @property
    def fault(self) -> str | None:
        with self._cond:
            return self._fault

    @property
    def running(self) -> bool:
        thread = self._thread
        return thread is not None and thread.is_alive()

    @property
    def log(self) -> tuple[LogEntry, ...]:
        with self._cond:
            return self._session.log

    def subscribe(self) -> queue.SimpleQueue:
        with self._cond:
            sub: queue.SimpleQueue = queue.SimpleQueue()
            self._subscribers.append(sub)
            return sub

    def unsubscribe(self, sub: queue.SimpleQueue) -> None:
        with self._cond:
            if sub in self._subscribers:
                self._subscribers.remove(sub)

    # -- lifecycle --

    def start(self) -> None:
        if self._thread is not None:
            raise RuntimeError("session already started")
        self._stopping.clear()
        self._thread = threading.Thread(target=self._run, name="modeguard-tick", daemon=True)
        self._thread.start()

    def _run(self) -> None:
        while not self._stopping.is_set():
            self.tick()
            if self.fault is not None:
                break
            self._stopping.wait(self._session.delta)

    def stop(self) -> None:
        self._stopping.set()
        thread, self._thread = self._thread, None
        if thread is not None:
            thread.join(timeout=5)
        with self._cond:
            self._cond.notify_all()
