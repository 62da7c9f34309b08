"""Seeded generators for randomized tests: trellises, tiny datasets, and a
synthetic membrane-protein corpus with hydrophobic helix cores and polar
loops (composition-noised so no feature set is trivially perfect).
"""

from __future__ import annotations

import numpy as np

from tmcrf.sequence import Dataset, ProteinRecord, STANDARD_RESIDUES

# residues with Kyte-Doolittle value > 1 (helix-favoring pool)
HELIX_POOL = "AILMFVC"
# strongly polar/charged residues (loop-favoring pool)
LOOP_POOL = "DEKRNQSTHPG"


def random_trellis(rng: np.random.Generator, n_pos: int, n_states: int, mask_prob: float = 0.0):
    """(start, edges, end_mask) with uniform [-2, 2] weights.

    With mask_prob > 0, single entries are knocked out to -inf; the caller
    should reject infeasible draws (all paths blocked).
    """
    start = rng.uniform(-2.0, 2.0, n_states)
    edges = rng.uniform(-2.0, 2.0, (n_pos - 1, n_states, n_states))
    end_mask = np.zeros(n_states)
    if mask_prob > 0.0:
        start[rng.random(n_states) < mask_prob] = -np.inf
        edges[rng.random(edges.shape) < mask_prob] = -np.inf
        end_mask[rng.random(n_states) < mask_prob] = -np.inf
    return start, np.ascontiguousarray(edges), end_mask


def random_records(
    rng: np.random.Generator, count: int, min_len: int = 2, max_len: int = 8, prefix: str = "r"
) -> Dataset:
    """Tiny labeled records with uniformly random sequences and labels."""
    letters = np.array(list(STANDARD_RESIDUES))
    records = []
    for i in range(count):
        n = int(rng.integers(min_len, max_len + 1))
        seq = "".join(rng.choice(letters, size=n))
        gold = "".join(rng.choice(["0", "1"], size=n))
        records.append(ProteinRecord(f"{prefix}{i}", seq, gold))
    return Dataset(tuple(records))


def _sample(rng: np.random.Generator, pool: str, noise: float) -> str:
    if rng.random() < noise:
        return STANDARD_RESIDUES[rng.integers(len(STANDARD_RESIDUES))]
    return pool[rng.integers(len(pool))]


def synthetic_tm_dataset(
    n_proteins: int = 60, seed: int = 20140604, noise: float = 0.18
) -> Dataset:
    """Membrane-like corpus: hydrophobic helices of 15-28 residues separated
    by polar loops, with occasional short (3-6 residue) interior loops."""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n_proteins):
        seq: list[str] = []
        gold: list[str] = []

        def add_loop(length: int):
            for _ in range(length):
                seq.append(_sample(rng, LOOP_POOL, noise))
                gold.append("0")

        def add_helix(length: int):
            for _ in range(length):
                seq.append(_sample(rng, HELIX_POOL, noise))
                gold.append("1")

        n_helices = int(rng.integers(1, 5))
        add_loop(int(rng.integers(5, 26)))
        for h in range(n_helices):
            add_helix(int(rng.integers(15, 29)))
            if h < n_helices - 1:
                if rng.random() < 0.25:
                    add_loop(int(rng.integers(3, 7)))  # short interior loop
                else:
                    add_loop(int(rng.integers(8, 26)))
        add_loop(int(rng.integers(5, 26)))
        records.append(ProteinRecord(f"syn{i:03d}", "".join(seq), "".join(gold)))
    return Dataset(tuple(records))


def split_dataset(data: Dataset, train_fraction: float, seed: int = 97) -> tuple[Dataset, Dataset]:
    """Deterministic shuffled split into (train, held-out)."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(data))
    cut = int(round(train_fraction * len(data)))
    records = data.records
    train = tuple(records[i] for i in order[:cut])
    held = tuple(records[i] for i in order[cut:])
    return Dataset(train), Dataset(held)
