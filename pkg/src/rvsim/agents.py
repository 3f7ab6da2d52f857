"""Deterministic rendezvous programs for two distance-aware agents.

A program is a resumable transducer: the engine feeds it one Observation per
round and gets back the port to take (0, or anything outside 1..degree, means
stay put this round). Control flow between rounds is free; only moves consume
rounds. Programs may compare consecutive distance readings but never see node
identities, so the same code runs under exact readings and under
increase/decrease/same readings alike.

The rendezvous strategy, built from three sub-machines:

* a port test sweep: try ports 1..delta in order, hopping back after every
  try that did not strictly shrink the distance; report success on the first
  shrinking round, staying where that move landed;
* a degree-bounding loop: idle through geometrically growing windows, then
  run one full sweep sized past the local degree -- two agents doing this in
  lockstep discover whether their degrees share a dyadic bucket without any
  communication;
* a label-bit comparison: walk the bits of the agent's padded label, sweeping
  on 1-bits and idling on 0-bits, until the two agents' bits first differ;
  the padding guarantees a differing bit within twice the shorter bit length.

The main loop bounds degrees while it keeps paying off, compares labels once
to pick a single mover, then lets the mover close the remaining distance.
"""

from __future__ import annotations

from dataclasses import dataclass

from .oracle import DistanceDelta


@dataclass(frozen=True)
class Observation:
    """What an agent learns at the start of a round.

    ``arrival_port`` is 0 when the agent stayed put last round, else the entry
    port of the edge it traversed. ``distance_reading`` is the exact hop count
    or a DistanceDelta, depending on the engine's oracle mode. ``met`` is
    always False in delivered observations: co-location halts the run first.
    """

    degree: int
    arrival_port: int
    distance_reading: int | DistanceDelta
    met: bool = False


# An action is just the chosen port number; 0 or out-of-range means stay.
Action = int


class NoDistinguisherError(ValueError):
    """Two equal labels have no distinguishing bit."""


def label_bit_length(label: int) -> int:
    """Bits of a label, counting label 0 as the one-bit string '0'."""
    if label < 0:
        raise ValueError("labels are non-negative")
    return label.bit_length() or 1


@dataclass(frozen=True)
class ExtendedLabel:
    """Bit-doubled label: source bits at odd positions, a final 1 bit, zeros
    elsewhere. Positions are 1-based; ``bit(j)`` reads 0 past the end."""

    label: int
    bits: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.bits)

    def bit(self, j: int) -> int:
        return self.bits[j - 1] if 1 <= j <= len(self.bits) else 0


def extend_label(label: int) -> ExtendedLabel:
    k = label_bit_length(label)
    src = [(label >> (k - i)) & 1 for i in range(1, k + 1)]  # MSB first
    bits = []
    for j in range(1, 2 * k + 1):
        if j == 2 * k:
            bits.append(1)  # terminating bit
        elif j % 2 == 1:
            bits.append(src[(j + 1) // 2 - 1])
        else:
            bits.append(0)
    return ExtendedLabel(label, tuple(bits))


def distinguishing_index(e1: ExtendedLabel, e2: ExtendedLabel) -> int:
    """Least 1-based position where the two extended labels differ.

    Always at most twice the shorter source bit length: equal-length labels
    differ at some doubled source bit, and unequal lengths put the shorter
    label's terminating 1 against a structural 0.
    """
    if e1.label == e2.label:
        raise NoDistinguisherError(f"labels are equal ({e1.label})")
    for j in range(1, max(e1.length, e2.length) + 1):
        if e1.bit(j) != e2.bit(j):
            return j
    raise NoDistinguisherError("distinct labels with identical extended bits")  # unreachable


def ceil_log2(x: int) -> int:
    if x < 1:
        raise ValueError("ceil_log2 needs a positive argument")
    return (x - 1).bit_length()


def degree_class(d: int) -> int:
    """Dyadic degree bucket: 0 for degree 1, else j with 2**(j-1) < d <= 2**j."""
    return ceil_log2(d)


# ----------------------------------------------------------------------------
# program plumbing
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ProcEvent:
    """Sub-machine boundary marker for trace-level verification."""

    round: int
    proc: str
    kind: str  # "enter" | "exit"
    info: tuple


class _Ctx:
    __slots__ = ("round", "events")

    def __init__(self, record_events: bool):
        self.round = 0
        self.events: list[ProcEvent] | None = [] if record_events else None

    def log(self, proc: str, kind: str, *info) -> None:
        if self.events is not None:
            self.events.append(ProcEvent(self.round, proc, kind, info))


class AgentProgram:
    """Wraps a generator routine into the one-observation-in, one-port-out
    contract. Single-use: once the routine returns, the agent idles forever
    and the routine's return value is kept in ``result``."""

    def __init__(self, routine_factory, record_events: bool = False):
        self._ctx = _Ctx(record_events)
        self._routine = routine_factory(self._ctx)
        self._done = False
        self.result = None
        next(self._routine)  # advance to the first-observation handshake

    @property
    def events(self) -> list[ProcEvent] | None:
        return self._ctx.events

    @property
    def rounds_seen(self) -> int:
        return self._ctx.round

    def step(self, obs: Observation) -> Action:
        if self._done:
            return 0
        try:
            port = self._routine.send(obs)
        except StopIteration as stop:
            self._done = True
            self.result = stop.value
            return 0
        self._ctx.round += 1
        return port


def _went_closer(before: Observation, after: Observation) -> bool:
    # One round separates the two readings, so under delta readings the
    # strict comparison collapses to "the last round decreased".
    reading = after.distance_reading
    if isinstance(reading, DistanceDelta):
        return reading is DistanceDelta.DECREASED
    return reading < before.distance_reading


# ----------------------------------------------------------------------------
# sub-machines. Each is a generator yielding one port per round and returning
# (outcome, latest_observation) so callers can chain without losing a round.
# ----------------------------------------------------------------------------

def _probe_ports(delta: int, b: int, obs: Observation, ctx: _Ctx):
    """Try ports 1..delta (times b), undoing non-improving moves.

    Success on the first round whose post-move distance is strictly below its
    pre-move distance, staying at the post-move node; else failure after
    exactly 2*delta rounds. With b=0 every move is a stay, so the sweep only
    watches for the peer to close in.
    """
    ctx.log("probe_ports", "enter", delta, b)
    for i in range(1, delta + 1):
        before = obs
        obs = yield i * b
        if _went_closer(before, obs):
            ctx.log("probe_ports", "exit", True)
            return True, obs
        obs = yield obs.arrival_port * b  # retrace the same edge
    ctx.log("probe_ports", "exit", False)
    return False, obs


def _bound_degrees(b: int, obs: Observation, ctx: _Ctx):
    """Idle sweeps of sizes 1, 2, .., then one live sweep past the local degree.

    Two agents entering this in the same round keep identical phase timing
    while neither succeeds; a joint failure therefore certifies their degrees
    share a dyadic bucket, and opposite b values at same-bucket nodes force a
    joint success (the mover covers all its ports while the peer holds still).
    Full-failure duration is 2**(ceil_log2(deg)+2) - 2 rounds.
    """
    top = ceil_log2(obs.degree)
    ctx.log("bound_degrees", "enter", b, obs.degree)
    for level in range(top):
        s, obs = yield from _probe_ports(2 ** level, 0, obs, ctx)
        if s:
            ctx.log("bound_degrees", "exit", True)
            return True, obs
    s, obs = yield from _probe_ports(2 ** top, b, obs, ctx)
    ctx.log("bound_degrees", "exit", s)
    return s, obs


def _compare_labels(ext: ExtendedLabel, obs: Observation, ctx: _Ctx):
    """Walk the extended label's bits, degree-bounding with each bit as the
    liveness flag; return the bit that first produced a success.

    When both agents run this side by side from a joint failure, rounds stay
    aligned and the first success lands exactly at the distinguishing bit
    position, handing the two agents opposite return values in the same round.
    If nothing ever succeeds (no peer, or a frozen distance), fall through to
    1 so the caller still gets a total answer.
    """
    ctx.log("compare_labels", "enter")
    for i in range(1, ext.length + 1):
        bit = ext.bit(i)
        s, obs = yield from _bound_degrees(bit, obs, ctx)
        if s:
            ctx.log("compare_labels", "exit", bit, i)
            return bit, obs
    ctx.log("compare_labels", "exit", 1, None)
    return 1, obs


def _rendezvous_routine(label: int, ctx: _Ctx):
    obs = yield  # first observation of round 0
    s = True
    while s:
        s, obs = yield from _bound_degrees(1, obs, ctx)
    bit, obs = yield from _compare_labels(extend_label(label), obs, ctx)
    while True:
        _, obs = yield from _bound_degrees(bit, obs, ctx)


def rendezvous_program(label: int, record_events: bool = False) -> AgentProgram:
    """The full strategy for one agent; runs until the engine halts it."""
    if label < 0:
        raise ValueError("labels are non-negative")
    return AgentProgram(lambda ctx: _rendezvous_routine(label, ctx), record_events)


# ----------------------------------------------------------------------------
# stand-alone wrappers for the sub-machines and simple stubs (test harness
# fodder; they idle forever after returning, with the outcome in .result)
# ----------------------------------------------------------------------------

def _submachine(body):
    def factory(ctx):
        def routine():
            obs = yield
            outcome, _ = yield from body(obs, ctx)
            return outcome
        return routine()
    return AgentProgram(factory, record_events=True)


def probe_ports_program(delta: int, b: int) -> AgentProgram:
    return _submachine(lambda obs, ctx: _probe_ports(delta, b, obs, ctx))


def bound_degrees_program(b: int) -> AgentProgram:
    return _submachine(lambda obs, ctx: _bound_degrees(b, obs, ctx))


def compare_labels_program(label: int) -> AgentProgram:
    return _submachine(lambda obs, ctx: _compare_labels(extend_label(label), obs, ctx))


def constant_program(port: int) -> AgentProgram:
    def factory(ctx):
        def routine():
            _ = yield
            while True:
                _ = yield port
        return routine()
    return AgentProgram(factory)


def idle_program() -> AgentProgram:
    return constant_program(0)


# ----------------------------------------------------------------------------
# round-count bounds
# ----------------------------------------------------------------------------

def rendezvous_round_bound(max_degree: int, start_distance: int,
                           label1: int, label2: int) -> int:
    """Explicit-constant worst-case rounds for the rendezvous strategy.

    One degree-bounding call lasts at most 8*max_degree rounds; the first
    loop pays for at most start_distance+1 calls, the label comparison for at
    most 2*min_bits+1, and the mover's final approach for start_distance more.
    """
    k_min = min(label_bit_length(label1), label_bit_length(label2))
    return 8 * max_degree * (2 * start_distance + 4 * k_min + 3)


def default_round_cap(max_degree: int, start_distance: int,
                      label1: int, label2: int) -> int:
    """Comfortable engine cap for algorithm runs, hard-ceilinged at 1e6."""
    k_max = max(label_bit_length(label1), label_bit_length(label2))
    return min(16 * max_degree * (start_distance + 2 * k_max + 4), 10 ** 6)
