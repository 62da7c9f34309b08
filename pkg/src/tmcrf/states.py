"""Label-state topologies: the plain binary alphabet and a duration-expanded
alphabet with counting states for helix ends/core, loop ends/interior, and
short loops.

State order is significant: the Viterbi tie-break prefers the lower-ordered
state at each decision, and loop states are listed before helix states so
those decisions lean non-helix. (Under the extended topology's transition
constraints this does not make an all-zero model decode to all-0 labels:
ties resolve from the sequence end backwards, and the lowest-ordered end
state is only reachable from a helix state.)
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import InfeasiblePathError

BINARY = "binary"
EXTENDED = "extended"

FAMILY_HELIX_CORE = "helix_core"
FAMILY_HELIX_END = "helix_end"
FAMILY_LOOP_END = "loop_end"
FAMILY_LOOP_INTERIOR = "loop_interior"
FAMILY_SHORT_LOOP = "short_loop"

MAX_END = 5  # counting states per run end
MAX_SHORT_LOOP = 6  # short loops are strictly shorter than 7 residues


class StateTopology:
    """Immutable label alphabet with transition constraints.

    ``names`` fixes the state order used for tie-breaking; ``labels[s]`` is
    the binary projection of state s. ``trans_log``/``start_log``/``end_log``
    are 0 where allowed and -inf where forbidden, ready to add into a trellis.
    """

    __slots__ = (
        "kind",
        "names",
        "labels",
        "families",
        "start_states",
        "end_states",
        "transitions",
        "trans_log",
        "start_log",
        "end_log",
        "index_of",
    )

    def __init__(
        self,
        kind: str,
        names: tuple[str, ...],
        labels: tuple[int, ...],
        families: tuple[str, ...],
        start_states: frozenset[int],
        end_states: frozenset[int],
        transitions: frozenset[tuple[int, int]],
    ):
        self.kind = kind
        self.names = names
        self.labels = np.array(labels, dtype=np.int8)
        self.labels.setflags(write=False)
        self.families = families
        self.start_states = start_states
        self.end_states = end_states
        self.transitions = transitions
        self.index_of = {name: i for i, name in enumerate(names)}

        n = len(names)
        trans = np.full((n, n), -np.inf, dtype=np.float64)
        for a, b in transitions:
            trans[a, b] = 0.0
        start = np.full(n, -np.inf, dtype=np.float64)
        start[sorted(start_states)] = 0.0
        end = np.full(n, -np.inf, dtype=np.float64)
        end[sorted(end_states)] = 0.0
        for arr in (trans, start, end):
            arr.setflags(write=False)
        self.trans_log = trans
        self.start_log = start
        self.end_log = end

    @property
    def n_states(self) -> int:
        return len(self.names)

    def states_with_label(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def states_in_family(self, family: str) -> tuple[int, ...]:
        return tuple(i for i, fam in enumerate(self.families) if fam == family)

    def __repr__(self):
        return f"StateTopology(kind={self.kind!r}, n_states={self.n_states})"


@lru_cache(maxsize=None)
def binary_topology() -> StateTopology:
    """Two states, non-helix first, all transitions and boundaries allowed."""
    return StateTopology(
        kind=BINARY,
        names=("nh", "h"),
        labels=(0, 1),
        families=("nh", "h"),
        start_states=frozenset({0, 1}),
        end_states=frozenset({0, 1}),
        transitions=frozenset({(0, 0), (0, 1), (1, 0), (1, 1)}),
    )


def _run_chain_names(prefix: str, core: str) -> list[str]:
    names = [f"{prefix}_in{k}" for k in range(1, MAX_END + 1)]
    names.append(core)
    names += [f"{prefix}_out{k}" for k in range(MAX_END, 0, -1)]
    return names


def _chain_transitions(idx: dict[str, int], prefix: str, core: str) -> set[tuple[int, int]]:
    """Transitions realizing every run length >= 1 with a unique internal path."""
    t: set[tuple[int, int]] = set()
    for k in range(1, MAX_END):
        t.add((idx[f"{prefix}_in{k}"], idx[f"{prefix}_in{k + 1}"]))
    for k in range(1, MAX_END + 1):
        t.add((idx[f"{prefix}_in{k}"], idx[f"{prefix}_out{k}"]))  # even run lengths
    for k in range(2, MAX_END + 1):
        t.add((idx[f"{prefix}_in{k}"], idx[f"{prefix}_out{k - 1}"]))  # odd run lengths
    t.add((idx[f"{prefix}_in{MAX_END}"], idx[core]))
    t.add((idx[core], idx[core]))
    t.add((idx[core], idx[f"{prefix}_out{MAX_END}"]))
    for k in range(MAX_END, 1, -1):
        t.add((idx[f"{prefix}_out{k}"], idx[f"{prefix}_out{k - 1}"]))
    return t


@lru_cache(maxsize=None)
def extended_topology() -> StateTopology:
    """28 counting states; loop states first so state-wise ties prefer non-helix."""
    names: list[str] = []
    names += _run_chain_names("loop", "loop_interior")
    names += [f"short_loop{j}" for j in range(1, MAX_SHORT_LOOP + 1)]
    names += _run_chain_names("helix", "helix_core")
    names_t = tuple(names)
    idx = {name: i for i, name in enumerate(names_t)}

    labels = tuple(1 if n.startswith("helix") else 0 for n in names_t)

    def family(name: str) -> str:
        if name == "helix_core":
            return FAMILY_HELIX_CORE
        if name == "loop_interior":
            return FAMILY_LOOP_INTERIOR
        if name.startswith("helix"):
            return FAMILY_HELIX_END
        if name.startswith("short_loop"):
            return FAMILY_SHORT_LOOP
        return FAMILY_LOOP_END

    families = tuple(family(n) for n in names_t)

    trans = _chain_transitions(idx, "loop", "loop_interior")
    trans |= _chain_transitions(idx, "helix", "helix_core")
    # run boundaries: helix run ends at helix_in1 (length 1) or helix_out1
    helix_exit = (idx["helix_in1"], idx["helix_out1"])
    loop_exit = (idx["loop_in1"], idx["loop_out1"])
    for h in helix_exit:
        trans.add((h, idx["loop_in1"]))
        trans.add((h, idx["short_loop1"]))
    for lo in loop_exit:
        trans.add((lo, idx["helix_in1"]))
    for j in range(1, MAX_SHORT_LOOP):
        trans.add((idx[f"short_loop{j}"], idx[f"short_loop{j + 1}"]))
    for j in range(1, MAX_SHORT_LOOP + 1):
        trans.add((idx[f"short_loop{j}"], idx["helix_in1"]))

    # short loops connect two helices, so they never start or end a sequence
    start = frozenset({idx["loop_in1"], idx["helix_in1"]})
    end = frozenset({idx["loop_in1"], idx["loop_out1"], idx["helix_in1"], idx["helix_out1"]})

    return StateTopology(
        kind=EXTENDED,
        names=names_t,
        labels=labels,
        families=families,
        start_states=start,
        end_states=end,
        transitions=frozenset(trans),
    )


def topology_for(kind: str) -> StateTopology:
    if kind == BINARY:
        return binary_topology()
    if kind == EXTENDED:
        return extended_topology()
    raise ValueError(f"unknown topology kind {kind!r}")


def _chain_state_names(prefix: str, core: str, n: int) -> list[str]:
    """Canonical counting-state decomposition of a run of length n."""
    a = min(MAX_END, (n + 1) // 2)
    b = min(MAX_END, n // 2)
    names = [f"{prefix}_in{k}" for k in range(1, a + 1)]
    names += [core] * (n - a - b)
    names += [f"{prefix}_out{k}" for k in range(b, 0, -1)]
    return names


def derive_states(gold: str, topo: StateTopology) -> np.ndarray:
    """Gold binary labels -> canonical state path (int indices).

    For the binary topology the mapping is the identity. For the extended
    topology, helix runs split into entering ends / core / exiting ends
    (extra residue of an odd run goes to the entering side); loop runs
    shorter than 7 bounded by helices on both sides become short loops;
    other loop runs split like helix runs with loop_interior in the middle.
    """
    if topo.kind == BINARY:
        return np.array([int(c) for c in gold], dtype=np.int32)

    idx = topo.index_of
    path: list[int] = []
    runs = _label_runs(gold)
    for r, (label, length) in enumerate(runs):
        if label == 1:
            names = _chain_state_names("helix", "helix_core", length)
        elif length < 7 and 0 < r < len(runs) - 1:
            names = [f"short_loop{j}" for j in range(1, length + 1)]
        else:
            names = _chain_state_names("loop", "loop_interior", length)
        path.extend(idx[name] for name in names)
    return np.array(path, dtype=np.int32)


def _label_runs(gold: str) -> list[tuple[int, int]]:
    """Maximal runs as (label, length) pairs, left to right."""
    runs: list[tuple[int, int]] = []
    i = 0
    n = len(gold)
    while i < n:
        j = i
        while j < n and gold[j] == gold[i]:
            j += 1
        runs.append((int(gold[i]), j - i))
        i = j
    return runs


def project(states, topo: StateTopology) -> str:
    """State path -> binary label string (positionwise projection)."""
    arr = np.asarray(states, dtype=np.int64)
    return "".join("1" if v else "0" for v in topo.labels[arr])


def check_path(states, topo: StateTopology, record_id: str = "") -> None:
    """Raise InfeasiblePathError unless states is an allowed start-to-end path."""
    arr = np.asarray(states, dtype=np.int64)
    if arr.size == 0:
        raise InfeasiblePathError(record_id, "empty path")
    if int(arr[0]) not in topo.start_states:
        raise InfeasiblePathError(record_id, f"state {topo.names[arr[0]]} cannot start a sequence")
    if int(arr[-1]) not in topo.end_states:
        raise InfeasiblePathError(record_id, f"state {topo.names[arr[-1]]} cannot end a sequence")
    for i in range(1, arr.size):
        pair = (int(arr[i - 1]), int(arr[i]))
        if pair not in topo.transitions:
            raise InfeasiblePathError(
                record_id,
                f"transition {topo.names[pair[0]]} -> {topo.names[pair[1]]} at position {i} is not allowed",
            )
