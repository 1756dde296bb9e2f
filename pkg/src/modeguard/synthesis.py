"""Controllability checking, supremal supervisor synthesis, and diagnosis.

Two independent routes compute the same supremal result: :func:`supcon`
(iterative state deletion, the production path) and
:func:`oracle_supremal` (exhaustive subset enumeration, usable only on
tiny instances).  They share no pruning logic on purpose, so agreement
between them is meaningful evidence of correctness.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .automata import (
    AlphabetMismatchError,
    Automaton,
    AutomatonError,
    Trace,
    coreachable,
    is_nonblocking,
)
from .compose import merge_alphabets

ORACLE_STATE_LIMIT = 14


@dataclass(frozen=True)
class ControllabilityCounterexample:
    """A witness that a candidate disables an uncontrollable event.

    ``trace`` is accepted by both the candidate and the plant; the plant
    then allows the uncontrollable ``event`` that the candidate does not
    define.  Falsy on purpose, so ``if is_controllable(k, g):`` reads as
    expected.
    """

    trace: Trace
    event: str

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        shown = ".".join(self.trace) if self.trace else "<empty string>"
        return f"after {shown!s}, uncontrollable {self.event} is plant-enabled but disabled"


@dataclass(frozen=True)
class BlockingDiagnosis:
    """Shortest route into a reachable state that cannot reach marking."""

    witness: Trace
    stuck_state: int
    defined_events_at_stuck: frozenset[str]

    def __str__(self) -> str:
        shown = " ".join(self.witness) if self.witness else "<empty string>"
        still = ", ".join(sorted(self.defined_events_at_stuck)) or "none"
        return (
            f"blocking: witness [{shown}] reaches state {self.stuck_state}, "
            f"which cannot reach a marked state; events still defined: {still}"
        )


@dataclass(frozen=True)
class SynthesisReport:
    supervisor: Automaton
    plant_counts: tuple[int, int, int]
    spec_counts: tuple[int, int, int]
    supervisor_counts: tuple[int, int, int]
    nonblocking: bool
    empty: bool
    iterations: int

    def summary(self) -> str:
        def fmt(c: tuple[int, int, int]) -> str:
            return f"{c[0]} states, {c[1]} events, {c[2]} transitions"

        lines = [
            f"plant:       {fmt(self.plant_counts)}",
            f"requirement: {fmt(self.spec_counts)}",
            f"supervisor:  {fmt(self.supervisor_counts)}",
            f"nonblocking: {'yes' if self.nonblocking else 'no'}",
            f"empty:       {'yes' if self.empty else 'no'}",
            f"pruning passes: {self.iterations}",
        ]
        return "\n".join(lines)


def _require_same_alphabet(a: Automaton, b: Automaton) -> None:
    if a.alphabet.name_set() != b.alphabet.name_set():
        raise AlphabetMismatchError(
            "alphabets must agree by name; differing events: "
            f"{sorted(a.alphabet.name_set() ^ b.alphabet.name_set())}"
        )
    for ev in a.alphabet:
        if b.alphabet[ev.name].controllable is not ev.controllable:
            raise AutomatonError(
                f"event {ev.name!r} tagged both controllable and uncontrollable"
            )


def is_controllable(k: Automaton, g: Automaton):
    """Check that ``k`` never disables an uncontrollable event of ``g``.

    Walks the product of k and g; at every reachable pair, each
    uncontrollable event the plant defines must be defined by the
    candidate too.  Returns True, or the shortest
    :class:`ControllabilityCounterexample` found by breadth-first search
    (events expanded in name order, so ties break lexicographically).
    """
    _require_same_alphabet(k, g)
    if k.state_count == 0 or g.state_count == 0:
        return True
    unc = sorted(g.alphabet.uncontrollable_names())
    start = (k.initial, g.initial)
    parent: dict[tuple[int, int], tuple[tuple[int, int], str] | None] = {start: None}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        qk, qg = pair
        succ_k = k.successors(qk)
        succ_g = g.successors(qg)
        for u in unc:
            if u in succ_g and u not in succ_k:
                trace: list[str] = []
                node = pair
                while parent[node] is not None:
                    node, event = parent[node]
                    trace.append(event)
                trace.reverse()
                return ControllabilityCounterexample(tuple(trace), u)
        for event in sorted(set(succ_k) & set(succ_g)):
            nxt = (succ_k[event], succ_g[event])
            if nxt not in parent:
                parent[nxt] = (pair, event)
                queue.append(nxt)
    return True


def supcon(g: Automaton, e: Automaton) -> SynthesisReport:
    """Supremal controllable nonblocking supervisor for plant g, requirement e.

    Both automata must share one alphabet by name (lift the requirement
    with selfloop_complete first).  The synchronous product is explored
    lazily with the plant component kept on every state; then states are
    deleted iteratively when they either let a plant-enabled
    uncontrollable event escape the product, or cannot reach a marked
    state; each pass re-trims and the loop runs to fixpoint.  The empty
    result is legitimate and reported via the ``empty`` flag: it means
    the requirement admits no controllable nonblocking behavior at all.
    """
    _require_same_alphabet(g, e)
    alphabet = g.alphabet
    event_names = alphabet.names()

    order: list[tuple[int, int]] = []
    trans: list[dict[str, int]] = []
    g_comp: list[int] = []
    if g.state_count > 0 and e.state_count > 0:
        start = (g.initial, e.initial)
        index = {start: 0}
        order.append(start)
        queue = deque([start])
        while queue:
            qg, qe = queue.popleft()
            succ_g = g.successors(qg)
            succ_e = e.successors(qe)
            row: dict[str, int] = {}
            for name in event_names:
                if name in succ_g and name in succ_e:
                    nxt = (succ_g[name], succ_e[name])
                    if nxt not in index:
                        index[nxt] = len(order)
                        order.append(nxt)
                        queue.append(nxt)
                    row[name] = index[nxt]
            trans.append(row)
        g_comp = [qg for (qg, _qe) in order]

    n = len(order)
    marked = {
        i for i, (qg, qe) in enumerate(order) if qg in g.marked and qe in e.marked
    }
    unc = sorted(alphabet.uncontrollable_names())
    g_unc: dict[int, list[str]] = {}
    for i, qg in enumerate(g_comp):
        if qg not in g_unc:
            g_unc[qg] = [u for u in unc if g.step(qg, u) is not None]

    alive: set[int] = set(range(n))
    iterations = 0
    while True:
        iterations += 1
        doomed: set[int] = set()
        for i in alive:
            row = trans[i]
            for u in g_unc[g_comp[i]]:
                j = row.get(u)
                if j is None or j not in alive:
                    doomed.add(i)
                    break
        current = alive - doomed

        reach: set[int] = set()
        if 0 in current:
            reach.add(0)
            frontier = deque([0])
            while frontier:
                i = frontier.popleft()
                for j in trans[i].values():
                    if j in current and j not in reach:
                        reach.add(j)
                        frontier.append(j)

        preds: dict[int, list[int]] = {}
        for i in current:
            for j in trans[i].values():
                if j in current:
                    preds.setdefault(j, []).append(i)
        coreach = set(marked & current)
        frontier = deque(coreach)
        while frontier:
            j = frontier.popleft()
            for i in preds.get(j, ()):
                if i not in coreach:
                    coreach.add(i)
                    frontier.append(i)

        keep = reach & coreach
        if keep == alive:
            break
        alive = keep

    if not alive:
        supervisor = Automaton.empty("supervisor", alphabet)
    else:
        renum = {old: new for new, old in enumerate(sorted(alive))}
        supervisor = Automaton(
            "supervisor",
            alphabet,
            len(alive),
            renum[0],
            (renum[q] for q in marked & alive),
            [
                (renum[i], name, renum[j])
                for i in alive
                for name, j in trans[i].items()
                if j in alive
            ],
        )
    return SynthesisReport(
        supervisor=supervisor,
        plant_counts=g.counts(),
        spec_counts=e.counts(),
        supervisor_counts=supervisor.counts(),
        nonblocking=is_nonblocking(supervisor),
        empty=supervisor.state_count == 0,
        iterations=iterations,
    )


def oracle_supremal(g: Automaton, e: Automaton) -> Automaton:
    """Brute-force supremal supervisor by subset enumeration.

    Considers induced subautomata of the g/e product: a candidate subset
    is trimmed to its reachable coreachable core and passes when no core
    state lets a plant-enabled uncontrollable event leave the core.
    Controllable nonblocking sublanguages are closed under union (the
    product is deterministic, so a string sits in the same state of
    every candidate containing its path), hence the union of all passing
    cores realizes the supremal result.  Exponential in product size;
    guarded at ``ORACLE_STATE_LIMIT`` states.
    """
    alphabet = merge_alphabets(g.alphabet, e.alphabet)
    name = f"oracle({g.name})"
    if g.state_count == 0 or e.state_count == 0:
        return Automaton.empty(name, alphabet)

    g_names = g.alphabet.name_set()
    e_names = e.alphabet.name_set()
    start = (g.initial, e.initial)
    index: dict[tuple[int, int], int] = {start: 0}
    order = [start]
    rows: list[dict[str, int]] = []
    stack = [start]
    explored: set[tuple[int, int]] = set()
    while stack:
        pair = stack.pop()
        if pair in explored:
            continue
        explored.add(pair)
        qg, qe = pair
        row: dict[str, int] = {}
        for ev in alphabet:
            nm = ev.name
            if nm in g_names:
                dg = g.step(qg, nm)
                if dg is None:
                    continue
            else:
                dg = qg
            if nm in e_names:
                de = e.step(qe, nm)
                if de is None:
                    continue
            else:
                de = qe
            nxt = (dg, de)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row[nm] = index[nxt]
            if nxt not in explored:
                stack.append(nxt)
        while len(rows) < len(order):
            rows.append({})
        rows[index[pair]] = row

    n_full = len(order)
    if n_full > ORACLE_STATE_LIMIT:
        raise AutomatonError(
            f"oracle_supremal: product has {n_full} states, "
            f"refusing to enumerate beyond {ORACLE_STATE_LIMIT}"
        )

    full_marked = {
        i for i, (qg, qe) in enumerate(order) if qg in g.marked and qe in e.marked
    }
    # Restrict to the trim part of the product; nothing outside it can
    # appear in any trimmed candidate.
    co: set[int] = set(full_marked)
    changed = True
    while changed:
        changed = False
        for i in range(n_full):
            if i not in co and any(j in co for j in rows[i].values()):
                co.add(i)
                changed = True
    keep = sorted(i for i in range(n_full) if i in co)  # all states are reachable
    if 0 not in co:
        return Automaton.empty(name, alphabet)
    pos = {old: bit for bit, old in enumerate(keep)}
    n = len(keep)

    unc = sorted(alphabet.uncontrollable_names() & g_names)
    succ_mask = [0] * n
    unc_dst = [0] * n
    poisoned = [False] * n
    marked_mask = 0
    for bit, old in enumerate(keep):
        qg = order[old][0]
        row = rows[old]
        if old in full_marked:
            marked_mask |= 1 << bit
        for nm, j in row.items():
            if j in pos:
                succ_mask[bit] |= 1 << pos[j]
        for u in unc:
            if g.step(qg, u) is None:
                continue
            j = row.get(u)
            if j is None or j not in pos:
                poisoned[bit] = True
            else:
                unc_dst[bit] |= 1 << pos[j]

    init_bit = 1 << pos[0]
    unpoisoned = 0
    for bit in range(n):
        if not poisoned[bit]:
            unpoisoned |= 1 << bit
    if not unpoisoned & init_bit:
        return Automaton.empty(name, alphabet)

    def core(mask: int) -> int:
        reach = init_bit
        frontier = init_bit
        while frontier:
            nxt = 0
            mm = frontier
            while mm:
                low = mm & -mm
                mm ^= low
                nxt |= succ_mask[low.bit_length() - 1] & mask
            frontier = nxt & ~reach
            reach |= frontier
        cr = marked_mask & mask
        grew = True
        while grew:
            grew = False
            mm = mask & ~cr
            while mm:
                low = mm & -mm
                mm ^= low
                if succ_mask[low.bit_length() - 1] & cr:
                    cr |= low
                    grew = True
        return reach & cr

    def passes(cr: int) -> bool:
        mm = cr
        while mm:
            low = mm & -mm
            mm ^= low
            bit = low.bit_length() - 1
            if poisoned[bit] or unc_dst[bit] & ~cr:
                return False
        return True

    # The largest candidate dominates every other (cores are monotone in
    # the mask), so try it before paying for full enumeration.
    union = core(unpoisoned)
    if not (union and passes(union)):
        union = 0
        sub = unpoisoned
        while True:
            if sub & init_bit and sub | union != union:
                cr = core(sub)
                if cr and passes(cr):
                    union |= cr
            if sub == 0:
                break
            sub = (sub - 1) & unpoisoned

    if not union & init_bit:
        return Automaton.empty(name, alphabet)
    chosen = [bit for bit in range(n) if union >> bit & 1]
    renum = {bit: i for i, bit in enumerate(chosen)}
    transitions = []
    for bit in chosen:
        old = keep[bit]
        for nm, j in rows[old].items():
            if j in pos and pos[j] in renum and union >> pos[j] & 1:
                transitions.append((renum[bit], nm, renum[pos[j]]))
    return Automaton(
        name,
        alphabet,
        len(chosen),
        renum[pos[0]],
        (renum[bit] for bit in chosen if marked_mask >> bit & 1),
        transitions,
    )


def diagnose_blocking(a: Automaton) -> BlockingDiagnosis | None:
    """Shortest witness into a reachable non-coreachable state, if any.

    Breadth-first from the initial state with events expanded in name
    order, so the returned witness is the shortest and, among those, the
    lexicographically smallest.  None exactly when ``a`` is nonblocking.
    """
    if a.state_count == 0:
        return None
    co = coreachable(a)

    def diagnosis(state: int, witness: tuple[str, ...]) -> BlockingDiagnosis:
        return BlockingDiagnosis(
            witness=witness,
            stuck_state=state,
            defined_events_at_stuck=frozenset(a.successors(state)),
        )

    if a.initial not in co:
        return diagnosis(a.initial, ())
    seen = {a.initial}
    queue: deque[tuple[int, tuple[str, ...]]] = deque([(a.initial, ())])
    while queue:
        state, witness = queue.popleft()
        succ = a.successors(state)
        for event in sorted(succ):
            nxt = succ[event]
            if nxt in seen:
                continue
            seen.add(nxt)
            if nxt not in co:
                return diagnosis(nxt, witness + (event,))
            queue.append((nxt, witness + (event,)))
    return None
