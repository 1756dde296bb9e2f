"""Multicopter failsafe case study: event catalog, plant, and requirement set.

Everything in here is data and builders; the algorithms live in
:mod:`modeguard.automata`, :mod:`modeguard.compose` and
:mod:`modeguard.synthesis`.  The model follows a fixed frame discipline:
once per detection period the vehicle reports pilot inputs (power, stick,
mode switch) followed by one reading per health group, and the supervisor
answers with exactly one mode-change command.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .automata import Alphabet, Automaton, AutomatonError, EventDef
from .compose import selfloop_complete, sync, sync_all
from .synthesis import (
    BlockingDiagnosis,
    SynthesisReport,
    diagnose_blocking,
    is_controllable,
    supcon,
)

__all__ = [
    "FlightMode",
    "ExclusiveGroup",
    "EventCatalog",
    "BlockingSpecificationError",
    "build_event_catalog",
    "build_plant",
    "build_spec",
    "build_full_specification",
    "build_example",
    "synthesize",
    "synthesize_failsafe",
    "mode_labels",
    "SPEC_COUNT",
    "SPEC_MANIFEST",
    "GROUP_ORDER",
]

SPEC_COUNT = 25


class FlightMode(Enum):
    """Operating modes, one per mode-change command MCE1..MCE8."""

    POWER_OFF = 1
    STANDBY = 2
    GROUND_ERROR = 3
    LOITER = 4
    ALTITUDE_HOLD = 5
    STABILIZE = 6
    RTL = 7
    AL = 8

    @property
    def command(self) -> str:
        """The MCE event that switches into this mode."""
        return f"MCE{self.value}"


MODE_FOR_COMMAND = {m.command: m for m in FlightMode}

_MIES = tuple(f"MIE{i}" for i in range(1, 9))
_MCES = tuple(f"MCE{i}" for i in range(1, 9))
_ATES = tuple(f"ATE{i}" for i in range(1, 22))

_STICKS = ("MIE3", "MIE4", "MIE5")  # arm gesture, disarm gesture, neutral
_SWITCHES = ("MIE6", "MIE7", "MIE8")  # normal flight, return, land

# Input groups in the order the plant consumes them each detection period.
GROUP_ORDER = (
    "power",
    "stick",
    "switch",
    "INS",
    "GPS",
    "barometer",
    "compass",
    "propulsors",
    "RC",
    "battery",
    "altitude",
    "distance",
    "throttle",
)

_GROUP_MEMBERS = {
    "power": ("MIE1", "MIE2"),
    "stick": _STICKS,
    "switch": _SWITCHES,
    "INS": ("ATE1", "ATE2"),
    "GPS": ("ATE3", "ATE4"),
    "barometer": ("ATE5", "ATE6"),
    "compass": ("ATE7", "ATE8"),
    "propulsors": ("ATE9", "ATE10"),
    "RC": ("ATE11", "ATE12"),
    "battery": ("ATE13", "ATE14", "ATE15"),
    "altitude": ("ATE16", "ATE17"),
    "distance": ("ATE18", "ATE19"),
    "throttle": ("ATE20", "ATE21"),
}

_HEALTH_GROUPS = GROUP_ORDER[3:]
_GROUND_HEALTH_GROUPS = _HEALTH_GROUPS[:7]  # everything up to battery


@dataclass(frozen=True)
class ExclusiveGroup:
    """A set of mutually exclusive events reported together in a frame.

    ``exactly_one`` groups contribute exactly one event per frame; the
    power group is optional (at most one press per frame).
    """

    label: str
    members: tuple[str, ...]
    exactly_one: bool = True


@dataclass(frozen=True)
class EventCatalog:
    """All events of the model plus their frame grouping."""

    mies: tuple[str, ...]
    mces: tuple[str, ...]
    ates: tuple[str, ...]
    groups: tuple[ExclusiveGroup, ...]
    _group_index: dict[str, str] = field(repr=False, hash=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        for g in self.groups:
            for ev in g.members:
                self._group_index[ev] = g.label

    def alphabet(self) -> Alphabet:
        """Full 37-event alphabet; pilot/mode events controllable, readings not."""
        controllable = set(self.mies) | set(self.mces)
        return Alphabet(
            EventDef(name, name in controllable)
            for name in (*self.mies, *self.mces, *self.ates)
        )

    def group_of(self, event: str) -> str | None:
        return self._group_index.get(event)

    def group(self, label: str) -> ExclusiveGroup:
        for g in self.groups:
            if g.label == label:
                return g
        raise KeyError(label)


def build_event_catalog() -> EventCatalog:
    groups = tuple(
        ExclusiveGroup(label, _GROUP_MEMBERS[label], exactly_one=(label != "power"))
        for label in GROUP_ORDER
    )
    return EventCatalog(mies=_MIES, mces=_MCES, ates=_ATES, groups=groups)


def build_plant() -> Automaton:
    """Vehicle model: 27 states, one input-consumption chain per flight phase.

    State 0 is powered off, 3 is standby, 13 holds a failed ground check,
    14 is the armed hub.  Standby frames run the ground chain (stick,
    switch, seven health groups) into decision state 12; armed frames run
    the full chain (stick, switch, ten health groups) into decision state
    26.  From state 13 a neutral-stick frame re-enters the ground chain,
    which is how a later all-healthy period returns the vehicle to standby.
    """
    t: list[tuple[int, str, int]] = [
        (0, "MIE1", 1),
        (1, "MCE2", 3),
        (3, "MIE2", 2),
        (2, "MCE1", 0),
        (13, "MIE5", 4),
    ]
    t += [(3, s, 4) for s in _STICKS]
    t += [(4, s, 5) for s in _SWITCHES]
    state = 5
    for label in _GROUND_HEALTH_GROUPS:
        t += [(state, ev, state + 1) for ev in _GROUP_MEMBERS[label]]
        state += 1
    t += [(12, "MCE2", 3), (12, "MCE3", 13), (12, "MCE4", 14)]
    t += [(14, s, 15) for s in _STICKS]
    t += [(15, s, 16) for s in _SWITCHES]
    state = 16
    for label in _HEALTH_GROUPS:
        t += [(state, ev, state + 1) for ev in _GROUP_MEMBERS[label]]
        state += 1
    t += [(26, "MCE2", 3), (26, "MCE3", 13)]
    t += [(26, mce, 14) for mce in _MCES[3:]]
    return Automaton(
        "plant",
        build_event_catalog().alphabet(),
        state_count=27,
        initial=0,
        marked=(0, 3, 13, 14),
        transitions=t,
    )


# ---------------------------------------------------------------------------
# Requirement automata.
#
# Each in-air requirement is a tracker: state 0 watches for the mode command
# that makes its flight mode current, state 1 watches the stick while the
# mode is current, state 2 watches the switch, and the remaining states
# follow the health readings of one frame up to the single mode command the
# requirement allows for that frame.  State 0 and state 1 are the resting
# (marked) states.  A tracker constrains only the frames it owns; every
# other frame hands control back to state 0.
# ---------------------------------------------------------------------------

_Rows = dict[int, dict[str, int]]


def _alphabet(events: tuple[str, ...]) -> Alphabet:
    full = build_event_catalog().alphabet()
    return Alphabet(full[name] for name in events)


def _tracker(name: str, events: tuple[str, ...], rows: _Rows, marked=(0, 1)) -> Automaton:
    transitions = [
        (src, ev, dst) for src, row in sorted(rows.items()) for ev, dst in row.items()
    ]
    return Automaton(
        name,
        _alphabet(events),
        state_count=max(rows) + 1,
        initial=0,
        marked=marked,
        transitions=transitions,
    )


def _watch_row(events: tuple[str, ...], trigger: str) -> dict[str, int]:
    # Resting state: selfloop the world, advance only on our mode command.
    return {ev: (1 if ev == trigger else 0) for ev in events}


def _stick_row(own: str) -> dict[str, int]:
    return {s: (2 if s == own else 0) for s in _STICKS}


def _switch_row(entries: tuple[str, ...], target: int) -> dict[str, int]:
    return {s: (target if s in entries else 0) for s in _SWITCHES}


def _mce_to(mce: str, trigger: str) -> dict[str, int]:
    # A frame decision returns to "mode current" only if it re-issues our
    # own mode command; any other command belongs to a different tracker.
    return {mce: (1 if mce == trigger else 0)}


# Base alphabets shared by the tracker families.
_EVT14 = _STICKS + _SWITCHES + _MCES
_EVT18 = _EVT14 + ("ATE16", "ATE17", "ATE20", "ATE21")
_EVT29 = _STICKS + _SWITCHES + _MCES + tuple(
    a for a in _ATES[:15] if a not in ("ATE11", "ATE12")
) + ("ATE18", "ATE19")
_EVT31 = _STICKS + _SWITCHES + _MCES + _ATES[:15] + ("ATE18", "ATE19")
_EVT33_NORMAL = _STICKS + _SWITCHES + _MCES + _ATES[:15] + (
    "ATE16", "ATE17", "ATE20", "ATE21",
)
_EVT33_RETURN = _STICKS + _SWITCHES + _MCES + tuple(
    a for a in _ATES[:15] if a not in ("ATE11", "ATE12")
) + ("ATE16", "ATE17", "ATE18", "ATE19", "ATE20", "ATE21")

_ATES17 = _ATES[:15] + ("ATE18", "ATE19")


def _hover_tracker(
    name: str,
    trigger: str,
    own_stick: str,
    entries: tuple[str, ...],
    ladder: tuple[str, str, str],
) -> Automaton:
    """Failsafe decision for a hover-family frame (and for leaving RTL).

    Health readings drive a small lattice: navigation quality (ok, gps or
    compass degraded, barometer lost) picks the ladder rung; an RC loss or
    a battery good only for the trip home reroutes through the distance
    check (far: return, near: land); a critical reading (INS, propulsion,
    battery empty) forces landing outright.
    """
    V0, V1, V2, A0, A1, A2, R0, R1, R2, D7, D8 = range(11)
    rows: _Rows = {
        V0: _watch_row(_EVT31, trigger),
        V1: _stick_row(own_stick),
        V2: _switch_row(entries, A0),
    }

    def nav_moves(base: int, level: int) -> dict[str, int]:
        if level == 0:
            return {"ATE3": base, "ATE4": base + 1, "ATE5": base,
                    "ATE6": base + 2, "ATE7": base, "ATE8": base + 1}
        if level == 1:
            return {"ATE3": base + 1, "ATE4": base + 1, "ATE5": base + 1,
                    "ATE6": base + 2, "ATE7": base + 1, "ATE8": base + 1}
        return {a: base + 2 for a in ("ATE3", "ATE4", "ATE5", "ATE6", "ATE7", "ATE8")}

    for level in range(3):
        a = A0 + level
        rows[a] = {
            "ATE1": a, "ATE2": D8,
            "ATE9": a, "ATE10": D8,
            "ATE11": a, "ATE12": R0 + level,
            "ATE13": a, "ATE14": R0 + level, "ATE15": D8,
            "ATE18": a, "ATE19": a,
            **nav_moves(A0, level),
        }
        rows[a].update(_mce_to(ladder[level], trigger))
        r = R0 + level
        rows[r] = {
            "ATE1": r, "ATE2": D8,
            "ATE9": r, "ATE10": D8,
            "ATE11": r, "ATE12": r,
            "ATE13": r, "ATE14": r, "ATE15": D8,
            "ATE18": D8, "ATE19": (D7 if level == 0 else D8),
            **nav_moves(R0, level),
        }
    rows[D7] = {a: D7 for a in _ATES17}
    rows[D7].update(_mce_to("MCE7", trigger))
    rows[D8] = {a: D8 for a in _ATES17}
    rows[D8].update(_mce_to("MCE8", trigger))
    return _tracker(name, _EVT31, rows)


def _return_gate_tracker(name: str, trigger: str) -> Automaton:
    """Pilot asks a hovering vehicle (not LOITER) to fly home.

    Granted only when all five sensors, the RC link, the battery and the
    distance allow it; otherwise the frame keeps the current mode.
    """
    V0, V1, V2, G, F = range(5)
    passes = ("ATE1", "ATE3", "ATE5", "ATE7", "ATE9", "ATE11", "ATE13", "ATE14", "ATE19")
    rows: _Rows = {
        V0: _watch_row(_EVT31, trigger),
        V1: _stick_row("MIE5"),
        V2: _switch_row(("MIE7",), G),
        G: {a: (G if a in passes else F) for a in _ATES17},
        F: {a: F for a in _ATES17},
    }
    rows[G].update(_mce_to("MCE7", trigger))
    rows[F].update(_mce_to(trigger, trigger))
    return _tracker(name, _EVT31, rows)


def _land_switch_tracker(name: str, trigger: str) -> Automaton:
    """Pilot flips the land switch: land, whatever the readings say."""
    V0, V1, V2, W = range(4)
    rows: _Rows = {
        V0: _watch_row(_EVT14, trigger),
        V1: _stick_row("MIE5"),
        V2: _switch_row(("MIE8",), W),
        W: _mce_to("MCE8", trigger),
    }
    return _tracker(name, _EVT14, rows)


def _return_continue_tracker(name: str, own_stick: str, entries: tuple[str, ...]) -> Automaton:
    """Frame handling while flying home: keep going unless forced down.

    Any sensor failure, an empty battery, or reaching the neighbourhood of
    base switches to landing; the RC link is deliberately not consulted.
    """
    V0, V1, V2, G, D7, D8 = range(6)
    observed = tuple(a for a in _ATES17 if a not in ("ATE11", "ATE12"))
    passes = ("ATE1", "ATE3", "ATE5", "ATE7", "ATE9", "ATE13", "ATE14")
    rows: _Rows = {
        V0: _watch_row(_EVT29, "MCE7"),
        V1: _stick_row(own_stick),
        V2: _switch_row(entries, G),
        G: {},
        D7: {a: D7 for a in observed},
        D8: {a: D8 for a in observed},
    }
    for a in observed:
        if a in passes:
            rows[G][a] = G
        elif a == "ATE19":
            rows[G][a] = D7
        else:
            rows[G][a] = D8
    rows[D7]["MCE7"] = V1
    rows[D8]["MCE8"] = V0
    return _tracker(name, _EVT29, rows)


def _land_hold_tracker(name: str, own_stick: str, entries: tuple[str, ...]) -> Automaton:
    """Frame handling while landing: keep landing, disarm when down.

    A low altitude or low throttle reading means the vehicle has touched
    down, so the frame ends in the disarm command instead.
    """
    V0, V1, V2, W, Wd = range(5)
    rows: _Rows = {
        V0: _watch_row(_EVT18, "MCE8"),
        V1: _stick_row(own_stick),
        V2: _switch_row(entries, W),
        W: {"ATE16": Wd, "ATE17": W, "ATE20": Wd, "ATE21": W, "MCE8": V1},
        Wd: {"ATE16": Wd, "ATE17": Wd, "ATE20": Wd, "ATE21": Wd, "MCE2": V0},
    }
    return _tracker(name, _EVT18, rows)


def _land_to_normal_tracker(name: str) -> Automaton:
    """Pilot asks a landing vehicle for normal flight again.

    Granted only if INS, propulsion, RC and battery capacity are all good;
    the rung then follows navigation quality.  Touchdown still wins.
    """
    V0, V1, V2, G0, G1, G2, F, Dd = range(8)
    observed = _ATES[:15] + ("ATE16", "ATE17", "ATE20", "ATE21")
    fails = ("ATE2", "ATE10", "ATE12", "ATE14", "ATE15")
    rung = ("MCE4", "MCE5", "MCE6")
    rows: _Rows = {
        V0: _watch_row(_EVT33_NORMAL, "MCE8"),
        V1: _stick_row("MIE5"),
        V2: _switch_row(("MIE6",), G0),
        F: {},
        Dd: {a: Dd for a in observed},
    }
    rows[Dd]["MCE2"] = V0
    for level in range(3):
        g = G0 + level
        row: dict[str, int] = {}
        for a in observed:
            if a in fails:
                row[a] = F
            elif a in ("ATE16", "ATE20"):
                row[a] = Dd
            elif a == "ATE4" or a == "ATE8":
                row[a] = g if level else G1
            elif a == "ATE6":
                row[a] = G2
            else:
                row[a] = g
        row[rung[level]] = V0
        rows[g] = row
    for a in observed:
        rows[F][a] = Dd if a in ("ATE16", "ATE20") else F
    rows[F]["MCE8"] = V1
    return _tracker(name, _EVT33_NORMAL, rows)


def _land_to_return_tracker(name: str) -> Automaton:
    """Pilot asks a landing vehicle to fly home instead.

    Granted on five healthy sensors, enough battery for the trip and a
    position far from base; the RC link is not required.  Touchdown wins.
    """
    V0, V1, V2, G, F, Dd = range(6)
    observed = tuple(a for a in _ATES[:15] if a not in ("ATE11", "ATE12")) + (
        "ATE16", "ATE17", "ATE18", "ATE19", "ATE20", "ATE21",
    )
    passes = ("ATE1", "ATE3", "ATE5", "ATE7", "ATE9", "ATE13", "ATE14", "ATE17", "ATE19", "ATE21")
    rows: _Rows = {
        V0: _watch_row(_EVT33_RETURN, "MCE8"),
        V1: _stick_row("MIE5"),
        V2: _switch_row(("MIE7",), G),
        G: {},
        F: {},
        Dd: {a: Dd for a in observed},
    }
    for a in observed:
        if a in ("ATE16", "ATE20"):
            rows[G][a] = Dd
            rows[F][a] = Dd
        else:
            rows[G][a] = G if a in passes else F
            rows[F][a] = F
    rows[G]["MCE7"] = V0
    rows[F]["MCE8"] = V1
    rows[Dd]["MCE2"] = V0
    return _tracker(name, _EVT33_RETURN, rows)


def _build_ground_spec() -> Automaton:
    """Arming and standby rules: arm only with INS, propulsion, RC and
    battery all good and the switch on normal flight; a failed check parks
    the vehicle in the fault hold; anything else keeps it in standby."""
    events = _MIES[1:] + _MCES + (
        "ATE1", "ATE2", "ATE9", "ATE10", "ATE11", "ATE12", "ATE13", "ATE14", "ATE15",
    )
    ates9 = events[15:]
    T0, T1, T2, T3, T4, T5, T6, T7 = range(8)
    rows: _Rows = {
        T0: {ev: (T1 if ev in ("MCE2", "MCE3") else T0) for ev in events},
        T1: {"MIE2": T2, "MIE3": T3, "MIE4": T6, "MIE5": T6,
             "MIE6": T1, "MIE7": T1, "MIE8": T1},
        T2: {"MCE1": T0},
        T3: {"MIE6": T5, "MIE7": T7, "MIE8": T7},
        T4: {a: T4 for a in ates9},
        T5: {"ATE1": T5, "ATE2": T4, "ATE9": T5, "ATE10": T4,
             "ATE11": T5, "ATE12": T4, "ATE13": T5, "ATE14": T4, "ATE15": T4,
             "MCE4": T0},
        T6: {"MIE6": T7, "MIE7": T7, "MIE8": T7},
        T7: {a: T7 for a in ates9},
    }
    rows[T4]["MCE3"] = T1
    rows[T7]["MCE2"] = T1
    return _tracker("spec01", events, rows)


def _build_loiter_manual_spec() -> Automaton:
    """Manual mode changes out of LOITER: flying home needs every sensor,
    the RC link, a battery good for the trip and distance from base; the
    land switch always lands."""
    U0, U1, U2, U3, U4, U5 = range(6)
    passes = ("ATE1", "ATE3", "ATE5", "ATE7", "ATE9", "ATE11", "ATE13", "ATE14", "ATE19")
    rows: _Rows = {
        U0: _watch_row(_EVT31, "MCE4"),
        U1: {"MIE3": U0, "MIE4": U0, "MIE5": U2},
        U2: {"MIE6": U0, "MIE7": U3, "MIE8": U5},
        U3: {a: (U3 if a in passes else U4) for a in _ATES17},
        U4: {a: U4 for a in _ATES17},
        U5: {a: U5 for a in _ATES17},
    }
    rows[U3]["MCE7"] = U0
    rows[U4]["MCE4"] = U1
    rows[U5]["MCE8"] = U0
    return _tracker("spec07", _EVT31, rows)


_HOVER_LADDER = ("MCE4", "MCE5", "MCE6")
_STABILIZE_LADDER = ("MCE5", "MCE5", "MCE6")


def _spec_builders():
    h, g = _hover_tracker, _return_gate_tracker
    builders = {
        1: _build_ground_spec,
        2: lambda: h("spec02", "MCE4", "MIE3", _SWITCHES, _HOVER_LADDER),
        3: lambda: h("spec03", "MCE5", "MIE3", _SWITCHES, _HOVER_LADDER),
        4: lambda: h("spec04", "MCE6", "MIE3", _SWITCHES, _STABILIZE_LADDER),
        5: lambda: _return_continue_tracker("spec05", "MIE3", _SWITCHES),
        6: lambda: _land_hold_tracker("spec06", "MIE3", _SWITCHES),
        7: _build_loiter_manual_spec,
        8: lambda: g("spec08", "MCE5"),
        9: lambda: _land_switch_tracker("spec09", "MCE5"),
        10: lambda: g("spec10", "MCE6"),
        11: lambda: _land_switch_tracker("spec11", "MCE6"),
        12: lambda: _return_continue_tracker("spec12", "MIE5", ("MIE7",)),
        13: lambda: _land_switch_tracker("spec13", "MCE7"),
        14: lambda: _land_to_return_tracker("spec14"),
        15: lambda: _land_hold_tracker("spec15", "MIE5", ("MIE8",)),
        16: lambda: h("spec16", "MCE4", "MIE4", _SWITCHES, _HOVER_LADDER),
        17: lambda: h("spec17", "MCE5", "MIE4", _SWITCHES, _HOVER_LADDER),
        18: lambda: h("spec18", "MCE6", "MIE4", _SWITCHES, _STABILIZE_LADDER),
        19: lambda: _return_continue_tracker("spec19", "MIE4", _SWITCHES),
        20: lambda: _land_hold_tracker("spec20", "MIE4", _SWITCHES),
        21: lambda: h("spec21", "MCE4", "MIE5", ("MIE6",), _HOVER_LADDER),
        22: lambda: h("spec22", "MCE5", "MIE5", ("MIE6",), _HOVER_LADDER),
        23: lambda: h("spec23", "MCE6", "MIE5", ("MIE6",), _STABILIZE_LADDER),
        24: lambda: h("spec24", "MCE7", "MIE5", ("MIE6",), _HOVER_LADDER),
        25: lambda: _land_to_normal_tracker("spec25"),
    }
    return builders


def build_spec(j: int) -> Automaton:
    """Requirement automaton number ``j`` (1 to 25)."""
    if not isinstance(j, int) or isinstance(j, bool) or not 1 <= j <= SPEC_COUNT:
        raise ValueError(f"spec index {j!r} out of range 1..{SPEC_COUNT}")
    return _spec_builders()[j]()


#: One entry per requirement: (name, what it enforces, requirement ids).
SPEC_MANIFEST: tuple[tuple[str, str, tuple[str, ...]], ...] = (
    ("spec01", "ground arm gate and standby keeping", ("SR1", "SR2")),
    ("spec02", "failsafe ladder in LOITER during an arm gesture", ("SR3", "SR4", "SR5", "SR6")),
    ("spec03", "failsafe ladder in ALTITUDE_HOLD during an arm gesture", ("SR3", "SR4", "SR5", "SR6")),
    ("spec04", "failsafe ladder in STABILIZE during an arm gesture", ("SR3", "SR4", "SR5", "SR6")),
    ("spec05", "continue or abort the trip home during an arm gesture", ("SR10",)),
    ("spec06", "keep landing and disarm on touchdown during an arm gesture", ("SR13",)),
    ("spec07", "manual return and manual landing out of LOITER", ("SR7", "SR8")),
    ("spec08", "manual return out of ALTITUDE_HOLD", ("SR7",)),
    ("spec09", "manual landing out of ALTITUDE_HOLD", ("SR8",)),
    ("spec10", "manual return out of STABILIZE", ("SR7",)),
    ("spec11", "manual landing out of STABILIZE", ("SR8",)),
    ("spec12", "hold the return switch while flying home", ("SR10",)),
    ("spec13", "manual landing while flying home", ("SR8",)),
    ("spec14", "fly home instead of landing, on request", ("SR12",)),
    ("spec15", "hold the land switch while landing", ("SR13",)),
    ("spec16", "failsafe ladder in LOITER during a disarm gesture", ("SR3", "SR4", "SR5", "SR6")),
    ("spec17", "failsafe ladder in ALTITUDE_HOLD during a disarm gesture", ("SR3", "SR4", "SR5", "SR6")),
    ("spec18", "failsafe ladder in STABILIZE during a disarm gesture", ("SR3", "SR4", "SR5", "SR6")),
    ("spec19", "continue or abort the trip home during a disarm gesture", ("SR10",)),
    ("spec20", "keep landing and disarm on touchdown during a disarm gesture", ("SR13",)),
    ("spec21", "failsafe ladder in LOITER under normal flight inputs", ("SR3", "SR4", "SR5", "SR6")),
    ("spec22", "failsafe ladder in ALTITUDE_HOLD under normal flight inputs", ("SR3", "SR4", "SR5", "SR6")),
    ("spec23", "failsafe ladder in STABILIZE under normal flight inputs", ("SR3", "SR4", "SR5", "SR6")),
    ("spec24", "leave the trip home for normal flight, on request", ("SR9",)),
    ("spec25", "resume normal flight instead of landing, on request", ("SR11",)),
)


class BlockingSpecificationError(AutomatonError):
    """Raised when the requirement set deadlocks the closed loop."""

    def __init__(self, diagnosis: BlockingDiagnosis | None = None, message: str | None = None):
        super().__init__(message if message is not None else str(diagnosis))
        self.diagnosis = diagnosis


def build_full_specification(specs: list[Automaton] | None = None) -> Automaton:
    """Compose the requirement set over the full alphabet.

    Every requirement is first completed with selfloops for the plant
    events it does not mention, then all are synchronized.  The result is
    checked to be nonblocking on its own.
    """
    plant_alphabet = build_plant().alphabet
    if specs is None:
        specs = [build_spec(j) for j in range(1, SPEC_COUNT + 1)]
    completed = [selfloop_complete(s, plant_alphabet) for s in specs]
    e = sync_all(completed)
    diagnosis = diagnose_blocking(e)
    if diagnosis is not None:
        raise BlockingSpecificationError(diagnosis)
    return e


def synthesize(plant: Automaton, specs: list[Automaton]) -> SynthesisReport:
    """Full pipeline for an arbitrary requirement set against ``plant``.

    Completes and composes the requirements, checks the closed loop for
    blocking (raising :class:`BlockingSpecificationError` with the witness
    if it deadlocks), then computes the supervisor.
    """
    completed = [selfloop_complete(s, plant.alphabet) for s in specs]
    e = sync_all(completed)
    closed_loop = sync(plant, e)
    diagnosis = diagnose_blocking(closed_loop)
    if diagnosis is not None:
        raise BlockingSpecificationError(diagnosis)
    report = supcon(plant, e)
    if report.empty:
        raise BlockingSpecificationError(
            message="supervisor is empty: uncontrollable readings defeat every control choice"
        )
    return report


def synthesize_failsafe() -> SynthesisReport:
    """Synthesize the failsafe supervisor for the multicopter model.

    Guarantees on return: the supervisor is nonblocking, controllable with
    respect to the plant, and has exactly eight accepting states, one per
    flight mode (see :func:`mode_labels`).
    """
    plant = build_plant()
    specs = [build_spec(j) for j in range(1, SPEC_COUNT + 1)]
    report = synthesize(plant, specs)
    s = report.supervisor
    assert report.nonblocking and not report.empty
    assert is_controllable(s, plant) is True
    labels = mode_labels(s)
    assert len(labels) == len(s.marked) == len(FlightMode)
    return report


def mode_labels(supervisor: Automaton) -> dict[int, FlightMode]:
    """Label every accepting supervisor state with its flight mode.

    Each accepting state must be entered exclusively by one mode command,
    distinct across states; the labeling is that command's mode.
    """
    incoming: dict[int, set[str]] = {m: set() for m in supervisor.marked}
    for (src, ev), dst in supervisor.transitions.items():
        if dst in incoming:
            incoming[dst].add(ev)
    labels: dict[int, FlightMode] = {}
    for state, events in incoming.items():
        commands = {ev for ev in events if ev in MODE_FOR_COMMAND}
        if len(commands) != 1 or commands != events:
            raise AutomatonError(
                f"accepting state {state} lacks a unique entering mode command "
                f"(incoming: {sorted(events)})"
            )
        labels[state] = MODE_FOR_COMMAND[commands.pop()]
    if len(set(labels.values())) != len(labels):
        raise AutomatonError("accepting states do not map to distinct flight modes")
    return labels


# ---------------------------------------------------------------------------
# Known-bad requirement sets, used to exercise blocking detection.
# ---------------------------------------------------------------------------


def _spec1_missing_battery_holds() -> Automaton:
    """Ground requirement with the battery selfloops of the failed-check
    hold removed: a failed arm check can then strand the frame on its
    battery reading."""
    base = build_spec(1)
    dropped = {(4, "ATE13"), (4, "ATE14"), (4, "ATE15")}
    transitions = [
        (src, ev, dst)
        for (src, ev), dst in base.transitions.items()
        if (src, ev) not in dropped
    ]
    return Automaton(
        "spec01-missing-battery-holds",
        base.alphabet, base.state_count, base.initial, base.marked, transitions,
    )


def _spec1_conflicting_hold() -> Automaton:
    """Variant of the ground requirement whose stay-in-standby hold answers
    with the fault command instead of the standby command; combined with
    the original, no command is jointly allowed there."""
    base = build_spec(1)
    transitions = [
        (src, ev, dst)
        for (src, ev), dst in base.transitions.items()
        if (src, ev) != (7, "MCE2")
    ]
    transitions.append((7, "MCE3", 1))
    return Automaton(
        "spec01-conflicting-hold",
        base.alphabet, base.state_count, base.initial, base.marked, transitions,
    )


def _loiter_sensors_only_gate() -> Automaton:
    """A second opinion on manual return out of LOITER that checks only the
    five sensors; it grants frames the stricter gate refuses, so the two
    trackers disagree on the answer."""
    V0, V1, V2, G, F = range(5)
    passes = ("ATE1", "ATE3", "ATE5", "ATE7", "ATE9",
              "ATE11", "ATE12", "ATE13", "ATE14", "ATE15", "ATE18", "ATE19")
    fails = ("ATE2", "ATE4", "ATE6", "ATE8", "ATE10")
    rows: _Rows = {
        V0: _watch_row(_EVT31, "MCE4"),
        V1: _stick_row("MIE5"),
        V2: _switch_row(("MIE7",), G),
        G: {a: (F if a in fails else G) for a in _ATES17},
        F: {a: F for a in _ATES17},
    }
    rows[G]["MCE7"] = V0
    rows[F]["MCE4"] = V1
    return _tracker("loiter-sensors-only-gate", _EVT31, rows)


def build_example(k: int) -> list[Automaton]:
    """Requirement sets that fail synthesis, for exercising diagnostics.

    1: the ground requirement loses its battery holds (strands a frame),
    2: a conflicting copy of the ground requirement is added,
    3: a sensors-only return gate is added beside the stricter one.
    """
    if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= 3:
        raise ValueError(f"example index {k!r} out of range 1..3")
    specs = [build_spec(j) for j in range(1, SPEC_COUNT + 1)]
    if k == 1:
        specs[0] = _spec1_missing_battery_holds()
    elif k == 2:
        specs.append(_spec1_conflicting_hold())
    else:
        specs.append(_loiter_sensors_only_gate())
    return specs
