"""Synchronous two-agent round engine: lockstep execution, rendezvous
detection, trace capture, and trace replay validation.

Round structure: both agents receive an Observation (degree, last arrival
port, one distance reading), both answer with a port, both moves apply
atomically, and the round's TraceRow is recorded. Agents that cross on the
same edge swap without meeting; only co-location at a round boundary ends the
run. The distance reading is pushed into the Observation rather than exposed
as a callable, so a program cannot query more than once per round.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable

from .agents import AgentProgram, Observation
from .graphs import PortGraph
from .oracle import DistanceDelta, DistanceOracle, delta

MET = "met"
CAP = "cap"

_ORACLE_MODES = ("exact", "delta")
_TRACE_DETAILS = ("full", "meeting-only")


class InvalidStartError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    round_cap: int = 10 ** 6
    oracle_mode: str = "exact"
    trace_detail: str = "full"

    def __post_init__(self):
        if self.round_cap < 1:
            raise ValueError("round_cap must be >= 1")
        if self.oracle_mode not in _ORACLE_MODES:
            raise ValueError(f"oracle_mode must be one of {_ORACLE_MODES}")
        if self.trace_detail not in _TRACE_DETAILS:
            raise ValueError(f"trace_detail must be one of {_TRACE_DETAILS}")


@dataclass(frozen=True)
class TraceRow:
    """One round: start positions and distance, chosen ports, entry ports,
    and positions after the atomic moves."""

    round: int
    pos1: int
    pos2: int
    dist: int
    port1: int
    port2: int
    arrival1: int
    arrival2: int
    next1: int
    next2: int


@dataclass
class RunResult:
    outcome: str  # MET or CAP
    met_round: int | None
    rounds: int
    final1: int
    final2: int
    min_distance: int
    trace: list[TraceRow] | None = field(default=None, repr=False)

    @property
    def met(self) -> bool:
        return self.outcome == MET


def _apply_move(g: PortGraph, pos: int, port: int) -> tuple[int, int]:
    """Resolve one agent's action: (new position, entry port or 0 on a stay)."""
    if 1 <= port <= g.degree(pos):
        return g.neighbor(pos, port)
    return pos, 0


def run(g: PortGraph, start1: int, start2: int,
        prog1: AgentProgram, prog2: AgentProgram,
        cfg: SimConfig | None = None) -> RunResult:
    """Drive both programs until they co-locate or the round cap is reached.

    Met at round r means the agents shared a node after round r's moves;
    co-located starts report met at round 0 with an empty trace.
    """
    cfg = cfg or SimConfig()
    n = g.num_nodes
    if not (0 <= start1 < n and 0 <= start2 < n):
        raise InvalidStartError(f"starts ({start1}, {start2}) outside 0..{n - 1}")

    keep_rows = cfg.trace_detail == "full"
    rows: list[TraceRow] | None = [] if keep_rows else None
    if start1 == start2:
        return RunResult(MET, 0, 0, start1, start2, 0, rows)

    oracle = DistanceOracle(g)
    exact = cfg.oracle_mode == "exact"
    pos1, pos2 = start1, start2
    arr1 = arr2 = 0
    d = oracle.distance(pos1, pos2)
    prev_d: int | None = None
    min_d = d

    for r in range(cfg.round_cap):
        if exact:
            reading: int | DistanceDelta = d
        else:
            reading = DistanceDelta.SAME if prev_d is None else delta(prev_d, d)
        obs1 = Observation(g.degree(pos1), arr1, reading)
        obs2 = Observation(g.degree(pos2), arr2, reading)
        port1 = prog1.step(obs1)
        port2 = prog2.step(obs2)
        next1, a1 = _apply_move(g, pos1, port1)
        next2, a2 = _apply_move(g, pos2, port2)
        nd = oracle.distance(next1, next2)
        if keep_rows:
            rows.append(TraceRow(r, pos1, pos2, d, port1, port2, a1, a2, next1, next2))
        pos1, pos2, arr1, arr2 = next1, next2, a1, a2
        prev_d, d = d, nd
        if nd < min_d:
            min_d = nd
        if pos1 == pos2:
            return RunResult(MET, r, r + 1, pos1, pos2, min_d, rows)

    return RunResult(CAP, None, cfg.round_cap, pos1, pos2, min_d, rows)


def replay_check(rows: Iterable[TraceRow], g: PortGraph) -> list[str]:
    """Re-validate a full trace against the graph: move legality, exact
    distances, and position continuity. Returns violation descriptions."""
    violations = []
    oracle = DistanceOracle(g)
    prev: TraceRow | None = None
    for row in rows:
        if prev is not None:
            if (prev.next1, prev.next2) != (row.pos1, row.pos2):
                violations.append(
                    f"row {row.round}: start positions ({row.pos1}, {row.pos2}) "
                    f"break continuity with ({prev.next1}, {prev.next2})")
            if abs(row.dist - prev.dist) > 2:
                violations.append(f"row {row.round}: distance jumped {prev.dist} -> {row.dist}")
        true_d = oracle.distance(row.pos1, row.pos2)
        if row.dist != true_d:
            violations.append(f"row {row.round}: recorded distance {row.dist}, actual {true_d}")
        for who, pos, port, arr, nxt in (
            (1, row.pos1, row.port1, row.arrival1, row.next1),
            (2, row.pos2, row.port2, row.arrival2, row.next2),
        ):
            if 1 <= port <= g.degree(pos):
                w, q = g.neighbor(pos, port)
                if (nxt, arr) != (w, q):
                    violations.append(
                        f"row {row.round}: agent {who} took port {port} from {pos} "
                        f"but landed ({nxt}, arrival {arr}) instead of ({w}, {q})")
            else:
                if nxt != pos or arr != 0:
                    violations.append(
                        f"row {row.round}: agent {who} had stay action {port} "
                        f"but moved {pos} -> {nxt} (arrival {arr})")
        prev = row
    return violations


# ----------------------------------------------------------------------------
# trace serialization: JSON-lines with a header record, one record per row,
# and a result record; field order is fixed so traces diff cleanly.
# ----------------------------------------------------------------------------

def trace_header(g: PortGraph, start1: int, start2: int,
                 label1: int | None, label2: int | None, cfg: SimConfig) -> dict:
    return {
        "kind": "header",
        "graph_hash": g.content_hash(),
        "nodes": g.num_nodes,
        "start1": start1,
        "start2": start2,
        "label1": label1,
        "label2": label2,
        "oracle_mode": cfg.oracle_mode,
        "round_cap": cfg.round_cap,
    }


def write_trace(fh: IO[str], header: dict, result: RunResult) -> None:
    fh.write(json.dumps(header) + "\n")
    for row in result.trace or ():
        fh.write(json.dumps({
            "kind": "row",
            "round": row.round,
            "pos1": row.pos1,
            "pos2": row.pos2,
            "dist": row.dist,
            "port1": row.port1,
            "port2": row.port2,
            "arrival1": row.arrival1,
            "arrival2": row.arrival2,
            "next1": row.next1,
            "next2": row.next2,
        }) + "\n")
    fh.write(json.dumps({
        "kind": "result",
        "outcome": result.outcome,
        "met_round": result.met_round,
        "rounds": result.rounds,
        "final1": result.final1,
        "final2": result.final2,
        "min_distance": result.min_distance,
    }) + "\n")


def read_trace(fh: IO[str]) -> tuple[dict, list[TraceRow], dict]:
    header: dict | None = None
    rows: list[TraceRow] = []
    result: dict | None = None
    for line in fh:
        if not line.strip():
            continue
        rec = json.loads(line)
        kind = rec.get("kind")
        if kind == "header":
            header = rec
        elif kind == "row":
            rows.append(TraceRow(rec["round"], rec["pos1"], rec["pos2"], rec["dist"],
                                 rec["port1"], rec["port2"], rec["arrival1"],
                                 rec["arrival2"], rec["next1"], rec["next2"]))
        elif kind == "result":
            result = rec
    if header is None or result is None:
        raise ValueError("trace missing header or result record")
    return header, rows, result
