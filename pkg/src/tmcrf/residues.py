"""Residue-level physico-chemical tables and window statistics.

All tables are keyed by one-letter residue code. The unknown residue X
carries hydropathy 0.0 and belongs to no property/chemical group and no
electronic class.
"""

from __future__ import annotations

import numpy as np

from .sequence import STANDARD_RESIDUES, UNKNOWN_RESIDUE

# Kyte-Doolittle hydropathy index.
KD_HYDROPATHY: dict[str, float] = {
    "A": 1.8,
    "C": 2.5,
    "D": -3.5,
    "E": -3.5,
    "F": 2.8,
    "G": -0.4,
    "H": -3.2,
    "I": 4.5,
    "K": -3.9,
    "L": 3.8,
    "M": 1.9,
    "N": -3.5,
    "P": -1.6,
    "Q": -3.5,
    "R": -4.5,
    "S": -0.8,
    "T": -0.7,
    "V": 4.2,
    "W": -0.9,
    "Y": -1.3,
    UNKNOWN_RESIDUE: 0.0,
}

HYDROPATHY_THRESHOLD = 1.0
DEFAULT_WINDOW = 19

# Physico-chemical property groups; a residue may appear in several.
PROPERTY_GROUPS: dict[str, str] = {
    "Aromatic": "FWYH",
    "Hydrophobic": "MILVAGFWYHKC",
    "Positive": "HKR",
    "Polar": "WYCHKREDSQNT",
    "Charged": "HKRED",
    "Negative": "ED",
    "Aliphatic": "ILV",
    "Small": "VAGCPSDTN",
    "Tiny": "AGS",
}

# Electron donor/acceptor classes; each standard residue is in exactly one.
ELECTRONIC_CLASSES: dict[str, str] = {
    "strong_donor": "ADEP",
    "weak_donor": "ILV",
    "neutral": "CGHSWM",
    "weak_acceptor": "FQTY",
    "strong_acceptor": "KNR",
}

# Side-chain chemical components, numbered 1..18; residues may repeat.
CHEMICAL_GROUPS: dict[int, str] = {
    1: "R",
    2: "YFHW",
    3: "LVIT",
    4: "KNDELCWSIRQFHY",
    5: "P",
    6: "LVIATM",
    7: "WFYH",
    8: "WP",
    9: "NQ",
    10: "DE",
    11: "H",
    12: "R",
    13: "NRQ",
    14: "R",
    15: "K",
    16: "STY",
    17: "C",
    18: "PHW",
}


def _check_tables():
    for res in STANDARD_RESIDUES:
        assert res in KD_HYDROPATHY
    electronic_union = "".join(ELECTRONIC_CLASSES.values())
    assert sorted(electronic_union) == sorted(
        STANDARD_RESIDUES
    ), "electronic classes must partition the residue alphabet"


_check_tables()

_PROPERTIES_BY_RESIDUE: dict[str, frozenset[str]] = {
    res: frozenset(name for name, members in PROPERTY_GROUPS.items() if res in members)
    for res in STANDARD_RESIDUES
}
_ELECTRONIC_BY_RESIDUE: dict[str, str] = {
    res: name for name, members in ELECTRONIC_CLASSES.items() for res in members
}
_CHEMICAL_BY_RESIDUE: dict[str, frozenset[int]] = {
    res: frozenset(num for num, members in CHEMICAL_GROUPS.items() if res in members)
    for res in STANDARD_RESIDUES
}


def kd_value(residue: str) -> float:
    """Hydropathy of one residue; 0.0 for the unknown residue."""
    return KD_HYDROPATHY[residue]


def hydropathy_values(sequence: str) -> np.ndarray:
    """Per-position hydropathy as a float64 vector."""
    return np.array([KD_HYDROPATHY[ch] for ch in sequence], dtype=np.float64)


def window_mean_kd(sequence: str, i: int, window: int = DEFAULT_WINDOW) -> float:
    """Mean hydropathy over the centered window at position i.

    The window is truncated at sequence boundaries: the divisor is the
    number of positions actually inside the sequence.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd integer, got {window}")
    if not 0 <= i < len(sequence):
        raise ValueError(f"position {i} outside sequence of length {len(sequence)}")
    half = window // 2
    lo = max(0, i - half)
    hi = min(len(sequence) - 1, i + half)
    return sum(KD_HYDROPATHY[ch] for ch in sequence[lo : hi + 1]) / (hi - lo + 1)


def window_mean_kd_all(sequence: str, window: int = DEFAULT_WINDOW) -> np.ndarray:
    """window_mean_kd at every position, vectorized."""
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd integer, got {window}")
    values = hydropathy_values(sequence)
    n = len(values)
    half = window // 2
    csum = np.concatenate(([0.0], np.cumsum(values)))
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half, n - 1)
    return (csum[hi + 1] - csum[lo]) / (hi - lo + 1)


def classify(residue: str) -> tuple[frozenset[str], str | None, frozenset[int]]:
    """(property groups, electronic class, chemical group numbers) of a residue.

    The unknown residue returns empty sets and no electronic class.
    """
    if residue == UNKNOWN_RESIDUE:
        return frozenset(), None, frozenset()
    return (
        _PROPERTIES_BY_RESIDUE[residue],
        _ELECTRONIC_BY_RESIDUE[residue],
        _CHEMICAL_BY_RESIDUE[residue],
    )
