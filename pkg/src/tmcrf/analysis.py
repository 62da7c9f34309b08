"""Residue-distribution analyses around predicted transmembrane helices.

Both analyses anchor at each predicted helix's center residue (the lower
median for even-length segments) and pool counts across all predictions.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import EmptyAnalysisError
from .sequence import ProteinRecord, segmentize

DEFAULT_HALF_WIDTH = 4
DEFAULT_RADIUS = 25

Prediction = tuple[ProteinRecord, str]


def _segment_center(start: int, end: int) -> int:
    return (start + end) // 2


def central_composition(
    predictions: list[Prediction], half_width: int = DEFAULT_HALF_WIDTH
) -> dict[str, float]:
    """Residue frequencies in the central window of each predicted helix.

    The window spans 2*half_width+1 residues around the segment center,
    clipped to the segment; frequencies sum to 1 over tallied residues.
    """
    if half_width < 0:
        raise ValueError(f"half_width must be >= 0, got {half_width}")
    counts: Counter[str] = Counter()
    for record, labels in predictions:
        for start, end in segmentize(labels):
            mid = _segment_center(start, end)
            lo = max(start, mid - half_width)
            hi = min(end, mid + half_width)
            counts.update(record.sequence[lo : hi + 1])
    total = sum(counts.values())
    if total == 0:
        raise EmptyAnalysisError("no predicted helix segments to analyze")
    return {res: counts[res] / total for res in sorted(counts)}


@dataclass(frozen=True)
class PositionalProfile:
    """Occurrence profile of a residue class at offsets around helix centers.

    frequencies[k] = counts[k] / denominators[k]; offsets with an empty
    denominator (never inside any protein) hold NaN.
    """

    offsets: np.ndarray
    counts: np.ndarray
    denominators: np.ndarray
    frequencies: np.ndarray

    def render_tsv(self) -> str:
        lines = ["offset\tcount\tdenominator\tfrequency"]
        for off, cnt, den, freq in zip(
            self.offsets, self.counts, self.denominators, self.frequencies
        ):
            text = "NA" if np.isnan(freq) else repr(float(freq))
            lines.append(f"{off}\t{cnt}\t{den}\t{text}")
        return "\n".join(lines) + "\n"


def positional_profile(
    predictions: list[Prediction],
    residue_set: frozenset[str] | set[str],
    radius: int = DEFAULT_RADIUS,
) -> PositionalProfile:
    """Frequency of residue_set membership at each offset from helix centers."""
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    size = 2 * radius + 1
    counts = np.zeros(size, dtype=np.int64)
    denominators = np.zeros(size, dtype=np.int64)
    any_segment = False
    for record, labels in predictions:
        seq = record.sequence
        for start, end in segmentize(labels):
            any_segment = True
            mid = _segment_center(start, end)
            lo = max(0, mid - radius)
            hi = min(len(seq) - 1, mid + radius)
            for pos in range(lo, hi + 1):
                k = pos - mid + radius
                denominators[k] += 1
                if seq[pos] in residue_set:
                    counts[k] += 1
    if not any_segment:
        raise EmptyAnalysisError("no predicted helix segments to analyze")
    with np.errstate(invalid="ignore"):
        frequencies = np.where(denominators > 0, counts / np.maximum(denominators, 1), np.nan)
    return PositionalProfile(
        offsets=np.arange(-radius, radius + 1),
        counts=counts,
        denominators=denominators,
        frequencies=frequencies,
    )


def render_composition_tsv(composition: dict[str, float]) -> str:
    lines = ["residue\tfrequency"]
    for res, freq in composition.items():
        lines.append(f"{res}\t{freq!r}")
    return "\n".join(lines) + "\n"
