"""The eighteen observation feature groups, label contexts, and the dense
feature index.

A feature is an observation predicate (label-free function of the sequence
and a position) crossed with a label context. Unigram contexts condition on
the binary label of the current state ("y=0"/"y=1") or, in the extended
topology, on a state family ("fam=helix_end", ...). Bigram contexts condition
on the binary label pair ("yy=01", ...).

Only features observed in gold training data receive parameters; the index
orders them lexicographically by (group, key, context).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .config import FeatureConfig
from .errors import EmptyTrainingError, MissingGoldError
from .residues import (
    CHEMICAL_GROUPS,
    ELECTRONIC_CLASSES,
    HYDROPATHY_THRESHOLD,
    hydropathy_values,
    window_mean_kd_all,
)
from .sequence import Dataset, ProteinRecord, UNKNOWN_RESIDUE
from .states import (
    EXTENDED,
    FAMILY_HELIX_CORE,
    FAMILY_HELIX_END,
    FAMILY_LOOP_END,
    FAMILY_SHORT_LOOP,
    StateTopology,
    derive_states,
)

Pred = tuple[str, str]  # (group, key)

# Families usable as unigram label contexts (loop_interior carries none).
STATE_FAMILIES = (FAMILY_HELIX_CORE, FAMILY_HELIX_END, FAMILY_LOOP_END)

_ELECTRONIC_OF = {res: name for name, members in ELECTRONIC_CLASSES.items() for res in members}
_CHEMICAL_OF: dict[str, tuple[str, ...]] = {}
for _num, _members in sorted(CHEMICAL_GROUPS.items()):
    for _res in _members:
        _CHEMICAL_OF.setdefault(_res, ())
        _CHEMICAL_OF[_res] += (f"cg{_num:02d}",)


@dataclass(frozen=True)
class FeatureKey:
    group: str
    key: str
    context: str

    def sort_key(self):
        return (self.group, self.key, self.context)


class LabelContexts:
    """Context alphabet for one topology, with state masks for scoring.

    node_masks[c] is a 0/1 vector over states; edge_masks[c] a 0/1 matrix
    over state pairs. A feature with context c contributes its weight to
    every state (pair) the mask selects.
    """

    def __init__(self, topo: StateTopology):
        labels = topo.labels
        node_names = ["y=0", "y=1"]
        node_masks = [labels == 0, labels == 1]
        if topo.kind == EXTENDED:
            fams = np.array(topo.families)
            for fam in (*STATE_FAMILIES, FAMILY_SHORT_LOOP):
                node_names.append(f"fam={fam}")
                node_masks.append(fams == fam)
        self.node_names = tuple(node_names)
        self.node_masks = np.array(node_masks, dtype=np.float64)
        self.node_id = {name: i for i, name in enumerate(self.node_names)}

        self.edge_names = ("yy=00", "yy=01", "yy=10", "yy=11")
        masks = np.zeros((4, len(labels), len(labels)), dtype=np.float64)
        for c, (a, b) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
            masks[c] = np.outer(labels == a, labels == b)
        self.edge_masks = masks
        self.edge_id = {name: i for i, name in enumerate(self.edge_names)}

        self.node_masks.setflags(write=False)
        self.edge_masks.setflags(write=False)

    def node_contexts_for_group(self, group: str) -> tuple[int, ...]:
        if group == "short_loops":
            return (self.node_id[f"fam={FAMILY_SHORT_LOOP}"],)
        if group == "states":
            return tuple(self.node_id[f"fam={fam}"] for fam in STATE_FAMILIES)
        return (self.node_id["y=0"], self.node_id["y=1"])

    def edge_contexts_for_group(self, group: str) -> tuple[int, ...]:
        if group == "border":
            return (self.edge_id["yy=01"], self.edge_id["yy=10"])
        return tuple(range(4))


def _neighbor_means(values: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(left_mean, right_mean) of the k in-bounds neighbors at each position.

    Positions whose window crosses a boundary get NaN.
    """
    n = values.size
    csum = np.concatenate(([0.0], np.cumsum(values)))
    idx = np.arange(n)
    left = np.full(n, np.nan)
    right = np.full(n, np.nan)
    ok_l = idx >= k
    left[ok_l] = (csum[idx[ok_l]] - csum[idx[ok_l] - k]) / k
    ok_r = idx + k <= n - 1
    right[ok_r] = (csum[idx[ok_r] + 1 + k] - csum[idx[ok_r] + 1]) / k
    return left, right


@dataclass
class PredicateSet:
    """Per-position predicate activations for one record.

    node[i] lists unigram predicates at position i; edge[i-1] lists bigram
    predicates at position i (positions 1..T-1).
    """

    node: list[list[Pred]]
    edge: list[list[Pred]]


def enumerate_predicates(record: ProteinRecord, fc: FeatureConfig) -> PredicateSet:
    seq = record.sequence
    n = len(seq)
    node: list[list[Pred]] = [[] for _ in range(n)]
    edge: list[list[Pred]] = [[] for _ in range(max(0, n - 1))]
    on = fc.is_enabled

    if on("start_end_edge"):
        node[0].append(("start_end_edge", "start"))
        node[n - 1].append(("start_end_edge", "end"))
        for i in range(1, n):
            edge[i - 1].append(("start_end_edge", "edge"))

    if on("basic"):
        for i, r in enumerate(seq):
            if r != UNKNOWN_RESIDUE:
                node[i].append(("basic", r))

    if on("hydrophobic_window") or on("hydrophilic_window"):
        means = window_mean_kd_all(seq)
        if on("hydrophobic_window"):
            for i in np.flatnonzero(means > HYDROPATHY_THRESHOLD):
                node[i].append(("hydrophobic_window", "w19"))
        if on("hydrophilic_window"):
            for i in np.flatnonzero(means < HYDROPATHY_THRESHOLD):
                node[i].append(("hydrophilic_window", "w19"))

    _enumerate_neighbors(seq, fc, node)

    if on("properties"):
        table = fc.property_groups
        for i, r in enumerate(seq):
            for name, members in table:
                if r in members:
                    node[i].append(("properties", name))

    if on("electronic"):
        for i, r in enumerate(seq):
            cls = _ELECTRONIC_OF.get(r)
            if cls is not None:
                node[i].append(("electronic", cls))

    if on("chemical_groups"):
        for i, r in enumerate(seq):
            for tag in _CHEMICAL_OF.get(r, ()):
                node[i].append(("chemical_groups", tag))

    if on("short_loops"):
        for i, r in enumerate(seq):
            if r != UNKNOWN_RESIDUE:
                node[i].append(("short_loops", r))

    if on("states"):
        for i, r in enumerate(seq):
            if r != UNKNOWN_RESIDUE:
                node[i].append(("states", r))

    if on("border"):
        for i in range(1, n):
            a, b = seq[i - 1], seq[i]
            if UNKNOWN_RESIDUE not in (a, b):
                edge[i - 1].append(("border", a + b))

    return PredicateSet(node=node, edge=edge)


def _enumerate_neighbors(seq: str, fc: FeatureConfig, node: list[list[Pred]]) -> None:
    """Single/double-side neighbor groups: ordered, shuffled, hydropathy-mean.

    A window that crosses a sequence boundary activates nothing; ordered and
    shuffled grams containing the unknown residue activate nothing, while
    hydropathy means count it as 0.0.
    """
    n = len(seq)
    on = fc.is_enabled

    if on("single") or on("single_shuffled"):
        kmax_o = fc.bound("single") if on("single") else 0
        kmax_s = fc.bound("single_shuffled") if on("single_shuffled") else 0
        for k in range(1, max(kmax_o, kmax_s) + 1):
            for i in range(n):
                for side, lo, hi in (("L", i - k, i), ("R", i + 1, i + 1 + k)):
                    if lo < 0 or hi > n:
                        continue
                    gram = seq[lo:hi]
                    if UNKNOWN_RESIDUE in gram:
                        continue
                    if on("single") and k <= kmax_o:
                        node[i].append(("single", f"{side}{k}:{gram}"))
                    if on("single_shuffled") and k <= kmax_s:
                        node[i].append(("single_shuffled", f"{side}{k}:{''.join(sorted(gram))}"))

    if on("double") or on("double_shuffled"):
        kmax_o = fc.bound("double") if on("double") else 0
        kmax_s = fc.bound("double_shuffled") if on("double_shuffled") else 0
        for k in range(1, max(kmax_o, kmax_s) + 1):
            for i in range(k, n - k):
                left = seq[i - k : i]
                right = seq[i + 1 : i + 1 + k]
                if UNKNOWN_RESIDUE in left or UNKNOWN_RESIDUE in right:
                    continue
                if on("double") and k <= kmax_o:
                    node[i].append(("double", f"{k}:{left}|{right}"))
                if on("double_shuffled") and k <= kmax_s:
                    node[i].append(("double_shuffled", f"{k}:{''.join(sorted(left + right))}"))

    hydro_singles = on("single_hydrophobic") or on("single_hydrophilic")
    hydro_doubles = on("double_hydrophobic") or on("double_hydrophilic")
    if not (hydro_singles or hydro_doubles):
        return
    values = hydropathy_values(seq)

    if hydro_singles:
        kmax_hb = fc.bound("single_hydrophobic") if on("single_hydrophobic") else 0
        kmax_hl = fc.bound("single_hydrophilic") if on("single_hydrophilic") else 0
        for k in range(1, max(kmax_hb, kmax_hl) + 1):
            left, right = _neighbor_means(values, k)
            for side, means in (("L", left), ("R", right)):
                if on("single_hydrophobic") and k <= kmax_hb:
                    for i in np.flatnonzero(means > HYDROPATHY_THRESHOLD):
                        node[i].append(("single_hydrophobic", f"{side}{k}"))
                if on("single_hydrophilic") and k <= kmax_hl:
                    for i in np.flatnonzero(means < HYDROPATHY_THRESHOLD):
                        node[i].append(("single_hydrophilic", f"{side}{k}"))

    if hydro_doubles:
        kmax_hb = fc.bound("double_hydrophobic") if on("double_hydrophobic") else 0
        kmax_hl = fc.bound("double_hydrophilic") if on("double_hydrophilic") else 0
        for k in range(1, max(kmax_hb, kmax_hl) + 1):
            left, right = _neighbor_means(values, k)
            both = (left + right) / 2.0
            if on("double_hydrophobic") and k <= kmax_hb:
                for i in np.flatnonzero(both > HYDROPATHY_THRESHOLD):
                    node[i].append(("double_hydrophobic", f"{k}"))
            if on("double_hydrophilic") and k <= kmax_hl:
                for i in np.flatnonzero(both < HYDROPATHY_THRESHOLD):
                    node[i].append(("double_hydrophilic", f"{k}"))


class FeatureIndex:
    """Bijection between FeatureKeys and dense parameter indices 0..K-1."""

    def __init__(self, keys: Iterable[FeatureKey]):
        self.keys: tuple[FeatureKey, ...] = tuple(sorted(set(keys), key=FeatureKey.sort_key))
        self._index = {key: i for i, key in enumerate(self.keys)}

    @property
    def K(self) -> int:
        return len(self.keys)

    def lookup(self, key: FeatureKey) -> int | None:
        return self._index.get(key)

    def __contains__(self, key: FeatureKey) -> bool:
        return key in self._index

    def serialize(self) -> str:
        return "".join(
            f"{k.group}\t{k.key}\t{k.context}\t{i}\n" for i, k in enumerate(self.keys)
        )

    @classmethod
    def deserialize(cls, text: str) -> "FeatureIndex":
        keys: list[FeatureKey] = []
        for lineno, line in enumerate(text.splitlines()):
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"feature line {lineno}: expected 4 tab-separated fields")
            group, key, context, idx = parts
            if int(idx) != lineno:
                raise ValueError(f"feature line {lineno}: non-contiguous index {idx}")
            keys.append(FeatureKey(group, key, context))
        out = cls(keys)
        if len(out.keys) != len(keys) or list(out.keys) != keys:
            raise ValueError("feature lines are not in canonical sorted order")
        return out


def _gold_node_context(group: str, binary_label: str, family: str | None) -> str | None:
    """Context fired at a gold position by a unigram predicate of this group."""
    if group == "short_loops":
        return f"fam={FAMILY_SHORT_LOOP}" if family == FAMILY_SHORT_LOOP else None
    if group == "states":
        return f"fam={family}" if family in STATE_FAMILIES else None
    return f"y={binary_label}"


def _gold_edge_context(group: str, prev_label: str, cur_label: str) -> str | None:
    if group == "border" and prev_label == cur_label:
        return None
    return f"yy={prev_label}{cur_label}"


def build_index(train: Dataset, fc: FeatureConfig, topo: StateTopology) -> FeatureIndex:
    """Instantiate exactly the features observed in the gold labelings."""
    if len(train) == 0:
        raise EmptyTrainingError("training dataset has no records")
    keys: set[FeatureKey] = set()
    for record in train:
        if record.gold is None:
            raise MissingGoldError(record.id)
        preds = enumerate_predicates(record, fc)
        families = _gold_families(record.gold, topo)
        for i, active in enumerate(preds.node):
            for group, key in active:
                ctx = _gold_node_context(group, record.gold[i], families[i])
                if ctx is not None:
                    keys.add(FeatureKey(group, key, ctx))
        for i1, active in enumerate(preds.edge):
            i = i1 + 1
            for group, key in active:
                ctx = _gold_edge_context(group, record.gold[i - 1], record.gold[i])
                if ctx is not None:
                    keys.add(FeatureKey(group, key, ctx))
    return FeatureIndex(keys)


def _gold_families(gold: str, topo: StateTopology) -> list[str | None]:
    if topo.kind != EXTENDED:
        return [None] * len(gold)
    path = derive_states(gold, topo)
    return [topo.families[s] for s in path]


@dataclass
class RecordFeatures:
    """Flattened feature occurrences of one record against one index.

    Each entry of the node arrays is one (position, context, parameter)
    instantiation whose predicate fires there; edge arrays use positions
    1..T-1. gold_fid repeats a parameter id once per gold firing.
    """

    T: int
    node_pos: np.ndarray
    node_ctx: np.ndarray
    node_fid: np.ndarray
    edge_pos: np.ndarray
    edge_ctx: np.ndarray
    edge_fid: np.ndarray
    gold_fid: np.ndarray | None


def extract(
    record: ProteinRecord,
    index: FeatureIndex,
    fc: FeatureConfig,
    topo: StateTopology,
    contexts: LabelContexts,
) -> RecordFeatures:
    preds = enumerate_predicates(record, fc)
    n = len(record.sequence)
    node_pos: list[int] = []
    node_ctx: list[int] = []
    node_fid: list[int] = []
    edge_pos: list[int] = []
    edge_ctx: list[int] = []
    edge_fid: list[int] = []

    node_ctx_cache: dict[str, tuple[int, ...]] = {}
    edge_ctx_cache: dict[str, tuple[int, ...]] = {}

    for i, active in enumerate(preds.node):
        for group, key in active:
            cids = node_ctx_cache.get(group)
            if cids is None:
                cids = contexts.node_contexts_for_group(group)
                node_ctx_cache[group] = cids
            for cid in cids:
                fid = index.lookup(FeatureKey(group, key, contexts.node_names[cid]))
                if fid is not None:
                    node_pos.append(i)
                    node_ctx.append(cid)
                    node_fid.append(fid)
    for i1, active in enumerate(preds.edge):
        for group, key in active:
            cids = edge_ctx_cache.get(group)
            if cids is None:
                cids = contexts.edge_contexts_for_group(group)
                edge_ctx_cache[group] = cids
            for cid in cids:
                fid = index.lookup(FeatureKey(group, key, contexts.edge_names[cid]))
                if fid is not None:
                    edge_pos.append(i1 + 1)
                    edge_ctx.append(cid)
                    edge_fid.append(fid)

    gold_fid = None
    if record.gold is not None:
        fired: list[int] = []
        families = _gold_families(record.gold, topo)
        for i, active in enumerate(preds.node):
            for group, key in active:
                ctx = _gold_node_context(group, record.gold[i], families[i])
                if ctx is None:
                    continue
                fid = index.lookup(FeatureKey(group, key, ctx))
                if fid is not None:
                    fired.append(fid)
        for i1, active in enumerate(preds.edge):
            i = i1 + 1
            for group, key in active:
                ctx = _gold_edge_context(group, record.gold[i - 1], record.gold[i])
                if ctx is None:
                    continue
                fid = index.lookup(FeatureKey(group, key, ctx))
                if fid is not None:
                    fired.append(fid)
        gold_fid = np.array(fired, dtype=np.int64)

    return RecordFeatures(
        T=n,
        node_pos=np.array(node_pos, dtype=np.int64),
        node_ctx=np.array(node_ctx, dtype=np.int64),
        node_fid=np.array(node_fid, dtype=np.int64),
        edge_pos=np.array(edge_pos, dtype=np.int64),
        edge_ctx=np.array(edge_ctx, dtype=np.int64),
        edge_fid=np.array(edge_fid, dtype=np.int64),
        gold_fid=gold_fid,
    )


def node_scores(rf: RecordFeatures, lam: np.ndarray, contexts: LabelContexts) -> np.ndarray:
    """Per-position per-state unigram score matrix U, shape (T, n_states)."""
    cn = len(contexts.node_names)
    occ = np.bincount(
        rf.node_pos * cn + rf.node_ctx, weights=lam[rf.node_fid], minlength=rf.T * cn
    ).reshape(rf.T, cn)
    return occ @ contexts.node_masks


def edge_scores(rf: RecordFeatures, lam: np.ndarray, contexts: LabelContexts) -> np.ndarray | None:
    """Bigram score tensor of shape (T-1, L, L), or None when no bigram fires."""
    if rf.edge_fid.size == 0 or rf.T < 2:
        return None
    ce = len(contexts.edge_names)
    occ = np.bincount(
        (rf.edge_pos - 1) * ce + rf.edge_ctx, weights=lam[rf.edge_fid], minlength=(rf.T - 1) * ce
    ).reshape(rf.T - 1, ce)
    return np.einsum("tc,cab->tab", occ, contexts.edge_masks)


def accumulate_expectations(
    rf: RecordFeatures,
    node_marginals: np.ndarray,
    edge_marginals: np.ndarray,
    contexts: LabelContexts,
    out: np.ndarray,
) -> None:
    """Add this record's model expectations E[f_j] into ``out`` (length K)."""
    probs = node_marginals @ contexts.node_masks.T
    out += np.bincount(
        rf.node_fid, weights=probs[rf.node_pos, rf.node_ctx], minlength=out.size
    )
    if rf.edge_fid.size:
        eprobs = np.einsum("tab,cab->tc", edge_marginals, contexts.edge_masks)
        out += np.bincount(
            rf.edge_fid, weights=eprobs[rf.edge_pos - 1, rf.edge_ctx], minlength=out.size
        )


def gold_counts(rf: RecordFeatures, K: int) -> np.ndarray:
    assert rf.gold_fid is not None
    return np.bincount(rf.gold_fid, minlength=K).astype(np.float64)
