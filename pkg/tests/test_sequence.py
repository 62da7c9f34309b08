"""Dataset format parsing, validation, and label segmentation."""

import numpy as np
import pytest

from tmcrf.errors import DuplicateIdError, MalformedRecordError, UnknownResidueError
from tmcrf.sequence import (
    Dataset,
    ProteinRecord,
    parse_dataset,
    segmentize,
    serialize_dataset,
)


class TestParseDataset:
    def test_basic_block(self):
        data = parse_dataset(">p1\nCAAF\n0111\n")
        assert len(data) == 1
        rec = data.records[0]
        assert (rec.id, rec.sequence, rec.gold) == ("p1", "CAAF", "0111")

    def test_label_line_optional(self):
        data = parse_dataset(">p1\nCAAF\n")
        assert data.records[0].gold is None

    def test_blank_lines_between_blocks_ignored(self):
        data = parse_dataset("\n>p1\nAA\n01\n\n\n>p2\nCC\n\n")
        assert [rec.id for rec in data] == ["p1", "p2"]

    def test_length_mismatch_rejected(self):
        with pytest.raises(MalformedRecordError):
            parse_dataset(">p1\nCAAF\n011\n")

    def test_bad_label_characters_rejected(self):
        with pytest.raises(MalformedRecordError):
            parse_dataset(">p1\nCAAF\n01x1\n")

    def test_duplicate_id_rejected(self):
        with pytest.raises(DuplicateIdError):
            parse_dataset(">p1\nAA\n>p1\nCC\n")

    def test_unknown_residue_strict(self):
        with pytest.raises(UnknownResidueError) as err:
            parse_dataset(">p1\nCAZF\n0111\n")
        assert err.value.position == 2
        assert err.value.letter == "Z"

    def test_unknown_residue_lenient_maps_to_x(self):
        data = parse_dataset(">p1\nCAZF\n0111\n", mode="lenient")
        assert data.records[0].sequence == "CAXF"

    def test_x_is_always_accepted(self):
        data = parse_dataset(">p1\nCAXF\n")
        assert data.records[0].sequence == "CAXF"

    def test_empty_sequence_rejected(self):
        with pytest.raises(MalformedRecordError):
            parse_dataset(">p1\n>p2\nAA\n")

    def test_data_before_header_rejected(self):
        with pytest.raises(MalformedRecordError):
            parse_dataset("CAAF\n0111\n")

    def test_extra_block_line_rejected(self):
        with pytest.raises(MalformedRecordError):
            parse_dataset(">p1\nCAAF\n0111\n0111\n")

    def test_round_trip(self):
        text = ">p1\nCAAF\n0111\n>p2\nMKTAYI\n>p3\nDDDD\n0000\n"
        data = parse_dataset(text)
        assert parse_dataset(serialize_dataset(data)) == data


class TestRecordValidation:
    def test_gold_must_match_length(self):
        with pytest.raises(MalformedRecordError):
            ProteinRecord("p", "AAA", "01")

    def test_sequence_alphabet_enforced(self):
        with pytest.raises(UnknownResidueError):
            ProteinRecord("p", "AB", None)

    def test_dataset_unique_ids(self):
        rec = ProteinRecord("p", "A", None)
        with pytest.raises(DuplicateIdError):
            Dataset((rec, rec))


class TestSegmentize:
    def test_single_run(self):
        assert segmentize("0110") == [(1, 2)]

    def test_whole_sequence(self):
        assert segmentize("111") == [(0, 2)]

    def test_no_helix(self):
        assert segmentize("000") == []

    def test_runs_reconstruct_input(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            labels = "".join(rng.choice(["0", "1"], size=rng.integers(1, 40)))
            segments = segmentize(labels)
            rebuilt = ["0"] * len(labels)
            for start, end in segments:
                assert start <= end
                for i in range(start, end + 1):
                    rebuilt[i] = "1"
            assert "".join(rebuilt) == labels
            # disjoint and sorted
            for (a1, b1), (a2, _) in zip(segments, segments[1:]):
                assert b1 < a2 - 0  # no touching runs possible by maximality
