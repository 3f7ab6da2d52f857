"""Constructive worst-case instances.

Against any deterministic program factory, the pipeline here builds a
clique-ring graph and a pair of labels that provably freeze the inter-agent
distance: record each label's port choices in a port-indistinguishable world,
pick the two port pairs the programs use most rarely, reserve those pairs for
the bridge edges between adjacent cliques, and select two labels whose
forward/backward/stay patterns agree on a long prefix. While the patterns
agree the two agents shift columns in unison, so every distance reading is
useless. Also hosts the spine-last caterpillar renumbering that makes
ascending port probes pay full price per forward step.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .agents import AgentProgram, Observation, ceil_log2, rendezvous_program
from .graphs import (CaterpillarGraph, InvalidParamsError, PortGraph,
                     _caterpillar_edges, _check_butterfly_params, build,
                     butterfly_index, generate_caterpillar)
from .oracle import DistanceOracle
from .sim import SimConfig, run

ProgramFactory = Callable[[int], AgentProgram]

CLASS_FORWARD = ord("A")
CLASS_BACKWARD = ord("B")
CLASS_STAY = ord("C")


class DegenerateDeltaError(InvalidParamsError):
    """Degree too small to reserve two distinct port pairs."""


class HorizonViolatedError(RuntimeError):
    """Simulated distance deviated before the promised horizon."""


@dataclass(frozen=True)
class PortSequence:
    """Exit ports of one label over the extraction horizon, one byte per
    round; out-of-range actions are normalized to 0 (they are stays)."""

    label: int
    ports: bytes


def extract_port_sequence(make_program: ProgramFactory, label: int, degree: int,
                          frozen_distance: int, horizon: int) -> PortSequence:
    """Record a program's first ``horizon`` exit ports in a virtual world
    where every node has ``degree`` ports paired as q <-> degree+1-q and the
    distance reading never moves off ``frozen_distance``."""
    if degree % 2 != 0:
        raise InvalidParamsError("paired port numbering needs an even degree")
    if degree > 255:
        raise InvalidParamsError("extraction stores ports as bytes; degree must be <= 255")
    if horizon < 1:
        raise InvalidParamsError("horizon must be >= 1")
    obs_by_arrival = tuple(
        Observation(degree, a, frozen_distance) for a in range(degree + 1))
    prog = make_program(label)
    step = prog.step
    stay_obs = obs_by_arrival[0]
    comp = degree + 1
    obs = stay_obs
    out = bytearray()
    for _ in range(horizon):
        x = step(obs)
        if 1 <= x <= degree:
            out.append(x)
            obs = obs_by_arrival[comp - x]
        else:
            out.append(0)
            obs = stay_obs
    return PortSequence(label, bytes(out))


def choose_ports(sequences: Sequence[PortSequence], degree: int) -> tuple[int, int, list[int]]:
    """Pick the two port pairs the recorded programs touch least.

    Returns ``(p1, p2, survivors)`` where survivors are the labels whose own
    touch count of {p1, p2, degree+1-p1, degree+1-p2} is at most 8t/degree.
    Averaging guarantees at least half the labels survive.
    """
    if degree % 2 != 0:
        raise InvalidParamsError("need an even degree")
    half = degree // 2
    if half < 2:
        raise DegenerateDeltaError(f"degree {degree} has fewer than two port pairs")
    if not sequences:
        raise InvalidParamsError("no sequences given")
    t = len(sequences[0].ports)
    if any(len(s.ports) != t for s in sequences):
        raise InvalidParamsError("sequences must share one horizon")

    totals = [0] * (half + 1)
    for seq in sequences:
        ports = seq.ports
        for p in range(1, half + 1):
            totals[p] += ports.count(p) + ports.count(degree + 1 - p)
    ranked = sorted(range(1, half + 1), key=lambda p: (totals[p], p))
    p1, p2 = sorted(ranked[:2])

    special = (p1, p2, degree + 1 - p1, degree + 1 - p2)
    survivors = [seq.label for seq in sequences
                 if degree * sum(seq.ports.count(x) for x in special) <= 8 * t]
    if 2 * len(survivors) < len(sequences):
        raise RuntimeError("averaging bound broken: fewer than half the labels survive")
    return p1, p2, survivors


def class_table(degree: int, p1: int, p2: int) -> bytes:
    """Translate table mapping a port byte to its move class: forward (A),
    backward (B), or stays-in-clique (C, including port 0)."""
    table = bytearray([CLASS_STAY] * 256)
    table[p1] = table[p2] = CLASS_FORWARD
    table[degree + 1 - p1] = table[degree + 1 - p2] = CLASS_BACKWARD
    return bytes(table)


def class_string(seq: PortSequence, degree: int, p1: int, p2: int) -> bytes:
    return seq.ports.translate(class_table(degree, p1, p2))


def find_label_pair(sequences: Sequence[PortSequence], degree: int,
                    p1: int, p2: int) -> tuple[int, int, int]:
    """Label pair whose class strings share the longest common prefix.

    Returns ``(label1, label2, prefix_length)`` with label1 < label2. The
    maximum is found by sorting the class strings and scanning neighbours;
    ties resolve to the first sorted position.
    """
    if len(sequences) < 2:
        raise InvalidParamsError("need at least two labels to pair")
    table = class_table(degree, p1, p2)
    keyed = sorted((seq.ports.translate(table), seq.label) for seq in sequences)
    best_len, best_pair = -1, (0, 0)
    for (sa, la), (sb, lb) in zip(keyed, keyed[1:]):
        if sa == sb:
            lcp = len(sa)
        else:
            lcp = next(i for i, (x, y) in enumerate(zip(sa, sb)) if x != y)
        if lcp > best_len:
            best_len = lcp
            best_pair = (min(la, lb), max(la, lb))
    return best_pair[0], best_pair[1], best_len


# ----------------------------------------------------------------------------
# paired numbering of the clique-ring graph
# ----------------------------------------------------------------------------

def hamiltonian_cycles(k: int) -> list[list[int]]:
    """Split K_k (odd k) into (k-1)/2 edge-disjoint Hamiltonian cycles.

    Rotation construction: zig-zag path on vertices 0..k-2 closed through the
    fixed vertex k-1, rotated (k-1)/2 times.
    """
    if k < 3 or k % 2 == 0:
        raise InvalidParamsError(f"need odd k >= 3, got {k}")
    m = (k - 1) // 2
    base = [0]
    for t in range(1, 2 * m):
        base.append((t + 1) // 2 if t % 2 else 2 * m - t // 2)
    return [[k - 1] + [(s + j) % (2 * m) for s in base] for j in range(m)]


def number_butterfly(clique_size: int, columns: int, p1: int, p2: int) -> PortGraph:
    """Clique-ring graph with fully paired ports (port_u + port_v = degree+1).

    Exit ports p1/p2 always step one column forward, their complements one
    column back, and each remaining pair rides one oriented Hamiltonian cycle
    of the local clique.
    """
    k, p = clique_size, columns
    _check_butterfly_params(k, p)
    degree = k + 3
    half = degree // 2
    if not (1 <= p1 <= half and 1 <= p2 <= half and p1 != p2):
        raise InvalidParamsError(f"need distinct pair ids in 1..{half}, got ({p1}, {p2})")
    spare = [q for q in range(1, half + 1) if q not in (p1, p2)]
    cycles = hamiltonian_cycles(k)
    edges = []
    for j in range(p):
        jn = (j + 1) % p
        base, base_next = j * k, jn * k
        for i in range(k):
            edges.append((base + i, p1, base_next + (2 * i) % k, degree + 1 - p1))
            edges.append((base + i, p2, base_next + (2 * i + 1) % k, degree + 1 - p2))
        for q, cycle in zip(spare, cycles):
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                edges.append((base + a, q, base + b, degree + 1 - q))
    return build(k * p, edges)


def is_paired_numbering(g: PortGraph) -> bool:
    dmax = g.max_degree
    if any(g.degree(v) != dmax for v in range(g.num_nodes)):
        return False
    return all(pu + pv == dmax + 1 for _, pu, _, pv in g.edges())


# ----------------------------------------------------------------------------
# end-to-end instance construction and verification
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class AdversaryInstance:
    degree: int
    clique_size: int
    columns: int
    label_space: int
    distance: int
    p1: int
    p2: int
    label1: int
    label2: int
    graph: PortGraph
    start1: int
    start2: int
    agreement_horizon: int    # prefix length exhibited by the chosen pair
    guaranteed_horizon: int   # floor(log2 L / (2 log2 degree)) * floor(degree/8)
    extraction_horizon: int
    labels_examined: int
    sampled: bool


def guaranteed_horizon(degree: int, label_space: int) -> int:
    return int(math.log2(label_space) // (2 * math.log2(degree))) * (degree // 8)


def default_extraction_horizon(degree: int, label_space: int) -> int:
    blocks = math.ceil(math.log2(label_space) / (2 * math.log2(degree)))
    return blocks * math.ceil(degree / 8) + 8 * degree


EXPLICIT_LABEL_CAP = 2 ** 20
DEFAULT_SAMPLE_SIZE = 1024


def build_instance(make_program: ProgramFactory, degree: int, label_space: int,
                   distance: int, sample_size: int | None = None,
                   seed: int = 0, horizon: int | None = None) -> AdversaryInstance:
    """Full pipeline: extract every label's port sequence, reserve the rare
    port pairs, pick the longest-agreeing label pair, and number the graph.

    Label spaces above 2**20 are sampled (``sample_size`` labels drawn
    deterministically from ``seed``; default 1024). Pass ``sample_size``
    explicitly to sample smaller spaces too.
    """
    k = degree - 3
    if k < 3 or k % 2 == 0:
        raise InvalidParamsError(f"degree must be an odd clique size + 3, got {degree}")
    if label_space < 2:
        raise InvalidParamsError("need a label space of at least 2")
    if distance < ceil_log2(k):
        raise InvalidParamsError(
            f"distance {distance} below ceil(log2({k})) = {ceil_log2(k)}")

    if sample_size is None and label_space > EXPLICIT_LABEL_CAP:
        sample_size = DEFAULT_SAMPLE_SIZE
    if sample_size is not None:
        if sample_size < 2:
            raise InvalidParamsError("sample_size must be >= 2")
        rng = random.Random(seed)
        want = min(sample_size, label_space)
        drawn: set[int] = set()
        while len(drawn) < want:
            drawn.add(rng.randrange(label_space))
        labels = sorted(drawn)
    else:
        labels = list(range(label_space))

    t = horizon if horizon is not None else default_extraction_horizon(degree, label_space)
    sequences = [extract_port_sequence(make_program, lab, degree, distance, t)
                 for lab in labels]
    p1, p2, survivors = choose_ports(sequences, degree)
    survivor_set = set(survivors)
    surviving = [s for s in sequences if s.label in survivor_set]
    label1, label2, t_star = find_label_pair(surviving, degree, p1, p2)

    columns = 2 * (distance + ceil_log2(k))
    graph = number_butterfly(k, columns, p1, p2)
    return AdversaryInstance(
        degree=degree, clique_size=k, columns=columns, label_space=label_space,
        distance=distance, p1=p1, p2=p2, label1=label1, label2=label2,
        graph=graph,
        start1=butterfly_index(k, 0, 0), start2=butterfly_index(k, 0, distance),
        agreement_horizon=t_star,
        guaranteed_horizon=guaranteed_horizon(degree, label_space),
        extraction_horizon=t, labels_examined=len(labels),
        sampled=sample_size is not None)


def verify_frozen_distance(instance: AdversaryInstance,
                           make_program: ProgramFactory = rendezvous_program,
                           extra_rounds: int | None = None) -> int:
    """Run the real engine on the built instance and count the leading rounds
    whose start-of-round distance equals the planned distance.

    Raises HorizonViolatedError if the count falls short of the instance's
    agreement horizon: that would mean extraction or numbering is unfaithful.
    ``make_program`` must be the factory the instance was built against.
    """
    slack = extra_rounds if extra_rounds is not None else 8 * instance.degree
    cap = instance.agreement_horizon + slack
    result = run(instance.graph, instance.start1, instance.start2,
                 make_program(instance.label1), make_program(instance.label2),
                 SimConfig(round_cap=cap, oracle_mode="exact", trace_detail="full"))
    dists = [row.dist for row in result.trace]
    dists.append(DistanceOracle(instance.graph).distance(result.final1, result.final2))
    verified = next((r for r, d in enumerate(dists) if d != instance.distance),
                    len(dists))
    if verified < instance.agreement_horizon:
        raise HorizonViolatedError(
            f"distance deviated in round {verified}, before the promised "
            f"{instance.agreement_horizon}")
    return verified


# ----------------------------------------------------------------------------
# caterpillar renumbering (the degree-times-distance adversary)
# ----------------------------------------------------------------------------

def renumber_caterpillar(graph: PortGraph, spine: Sequence[int],
                         policy: str = "adversarial", seed: int = 0) -> PortGraph:
    """Re-assign ports on an existing caterpillar.

    Under ``adversarial`` every spine node gives its highest port to the spine
    edge pointing at the far half, so an ascending probe walks every leaf
    before making progress; ``random`` shuffles per node from ``seed``.
    """
    spine_set = set(spine)
    leaves_of = {}
    for s in spine:
        leaves_of[s] = [graph.neighbor(s, p)[0] for p in graph.ports(s)
                        if graph.neighbor(s, p)[0] not in spine_set]
    edges = _caterpillar_edges(tuple(spine), leaves_of, policy, seed)
    return build(graph.num_nodes, edges)


def adversarial_caterpillar(spine_length: int, degree: int) -> CaterpillarGraph:
    """Convenience: caterpillar already carrying the adversarial numbering."""
    return generate_caterpillar(spine_length, degree, policy="adversarial")
