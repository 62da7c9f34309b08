"""Protein records, the canonical dataset text format, and label segments.

A dataset file is a sequence of blocks::

    >identifier
    MKLVVI...
    0011100...

The label line is optional; when present it must consist of '0'/'1' and
match the sequence length. Blank lines between blocks are ignored and
sequences are never wrapped.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    DuplicateIdError,
    MalformedRecordError,
    UnknownResidueError,
)

STANDARD_RESIDUES = "ACDEFGHIKLMNPQRSTVWY"
UNKNOWN_RESIDUE = "X"
RESIDUE_ALPHABET = frozenset(STANDARD_RESIDUES) | {UNKNOWN_RESIDUE}

LABEL_CHARS = frozenset("01")


@dataclass(frozen=True)
class ProteinRecord:
    """One observation sequence with optional gold binary labels.

    ``sequence`` uses the 20 standard one-letter codes plus ``X`` for an
    unknown residue; ``gold`` is a '0'/'1' string of equal length or None.
    """

    id: str
    sequence: str
    gold: str | None = None

    def __post_init__(self):
        if not self.sequence:
            raise MalformedRecordError(self.id, "empty sequence")
        for pos, letter in enumerate(self.sequence):
            if letter not in RESIDUE_ALPHABET:
                raise UnknownResidueError(self.id, pos, letter)
        if self.gold is not None:
            if len(self.gold) != len(self.sequence):
                raise MalformedRecordError(
                    self.id,
                    f"label length {len(self.gold)} != sequence length {len(self.sequence)}",
                )
            if not LABEL_CHARS.issuperset(self.gold):
                raise MalformedRecordError(self.id, "label line contains characters other than 0/1")

    def __len__(self) -> int:
        return len(self.sequence)


@dataclass(frozen=True)
class Dataset:
    records: tuple[ProteinRecord, ...]

    def __post_init__(self):
        seen = set()
        for rec in self.records:
            if rec.id in seen:
                raise DuplicateIdError(rec.id)
            seen.add(rec.id)

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def by_id(self) -> dict[str, ProteinRecord]:
        return {rec.id: rec for rec in self.records}


def parse_dataset(text: str | bytes, mode: str = "strict") -> Dataset:
    """Parse the canonical dataset format.

    In lenient mode unrecognized residue letters map to ``X``; in strict
    mode they raise UnknownResidueError.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if mode not in ("strict", "lenient"):
        raise ValueError(f"mode must be 'strict' or 'lenient', got {mode!r}")

    records: list[ProteinRecord] = []
    block_id: str | None = None
    block_lines: list[str] = []

    def flush():
        if block_id is None:
            return
        if not block_lines:
            raise MalformedRecordError(block_id, "missing sequence line")
        if len(block_lines) > 2:
            raise MalformedRecordError(block_id, "more than two lines in block")
        raw_seq = block_lines[0]
        seq_chars = []
        for pos, letter in enumerate(raw_seq.upper()):
            if letter in RESIDUE_ALPHABET:
                seq_chars.append(letter)
            elif mode == "lenient":
                seq_chars.append(UNKNOWN_RESIDUE)
            else:
                raise UnknownResidueError(block_id, pos, letter)
        gold = block_lines[1] if len(block_lines) == 2 else None
        records.append(ProteinRecord(block_id, "".join(seq_chars), gold))

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            flush()
            block_id = line[1:].strip()
            block_lines = []
            if not block_id:
                raise MalformedRecordError("", "empty header line")
        else:
            if block_id is None:
                raise MalformedRecordError("", f"data line before first header: {line[:20]!r}")
            block_lines.append(line)
    flush()
    return Dataset(tuple(records))


def serialize_dataset(dataset: Dataset) -> str:
    parts = []
    for rec in dataset:
        parts.append(f">{rec.id}\n{rec.sequence}\n")
        if rec.gold is not None:
            parts.append(f"{rec.gold}\n")
    return "".join(parts)


def load_dataset(path: str, mode: str = "strict") -> Dataset:
    with open(path, "rb") as fh:
        return parse_dataset(fh.read(), mode=mode)


def segmentize(labels: str) -> list[tuple[int, int]]:
    """Maximal runs of label '1' as (start, end) inclusive pairs, left to right."""
    segments = []
    start = None
    for i, ch in enumerate(labels):
        if ch == "1":
            if start is None:
                start = i
        elif start is not None:
            segments.append((start, i - 1))
            start = None
    if start is not None:
        segments.append((start, len(labels) - 1))
    return segments
