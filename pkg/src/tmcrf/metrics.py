"""Per-residue and per-segment prediction accuracy.

Counts are pooled over the whole dataset before any ratio is taken. Segment
matching is greedy left-to-right over observed segments with a minimum
overlap of three residues and one-to-one pairing. Ratios with a zero
denominator are undefined and render as "NA".
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MalformedPairError
from .sequence import segmentize

MIN_SEGMENT_OVERLAP = 3

Segment = tuple[int, int]


@dataclass(frozen=True)
class PerResidue:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def q2(self) -> float | None:
        return _ratio(self.tp + self.tn, self.total)

    @property
    def q2t_obs(self) -> float | None:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def q2t_prd(self) -> float | None:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def q2n_obs(self) -> float | None:
        return _ratio(self.tn, self.tn + self.fp)

    @property
    def q2n_prd(self) -> float | None:
        return _ratio(self.tn, self.tn + self.fn)


@dataclass(frozen=True)
class PerSegment:
    observed: int
    predicted: int
    matched: int
    proteins: int
    proteins_ok: int

    @property
    def qtmh_obs(self) -> float | None:
        return _ratio(self.matched, self.observed)

    @property
    def qtmh_prd(self) -> float | None:
        return _ratio(self.matched, self.predicted)

    @property
    def qok(self) -> float | None:
        return _ratio(self.proteins_ok, self.proteins)


@dataclass(frozen=True)
class MetricsReport:
    residue: PerResidue
    segment: PerSegment


def _ratio(num: int, den: int) -> float | None:
    return 100.0 * num / den if den else None


def _check_pairs(pairs) -> None:
    for i, (gold, pred) in enumerate(pairs):
        if len(gold) != len(pred):
            raise MalformedPairError(
                f"pair {i}: gold length {len(gold)} != prediction length {len(pred)}"
            )


def per_residue(pairs: list[tuple[str, str]]) -> PerResidue:
    _check_pairs(pairs)
    tp = fp = tn = fn = 0
    for gold, pred in pairs:
        for g, p in zip(gold, pred):
            if g == "1":
                if p == "1":
                    tp += 1
                else:
                    fn += 1
            else:
                if p == "1":
                    fp += 1
                else:
                    tn += 1
    return PerResidue(tp=tp, fp=fp, tn=tn, fn=fn)


def overlap(a: Segment, b: Segment) -> int:
    return max(0, min(a[1], b[1]) - max(a[0], b[0]) + 1)


def match_segments(obs: list[Segment], pred: list[Segment]) -> list[tuple[int, int]]:
    """One-to-one (obs_index, pred_index) pairs.

    Observed segments are visited left to right; each takes the unmatched
    predicted segment with the largest overlap, requiring >= 3 residues;
    overlap ties go to the leftmost predicted segment.
    """
    taken = [False] * len(pred)
    matches: list[tuple[int, int]] = []
    for i, seg in enumerate(obs):
        best_j = -1
        best_ov = 0
        for j, candidate in enumerate(pred):
            if taken[j]:
                continue
            ov = overlap(seg, candidate)
            if ov >= MIN_SEGMENT_OVERLAP and ov > best_ov:
                best_ov = ov
                best_j = j
        if best_j >= 0:
            taken[best_j] = True
            matches.append((i, best_j))
    return matches


def per_segment(pairs: list[tuple[str, str]]) -> PerSegment:
    _check_pairs(pairs)
    observed = predicted = matched = ok = 0
    for gold, pred in pairs:
        obs_segs = segmentize(gold)
        pred_segs = segmentize(pred)
        pairs_matched = match_segments(obs_segs, pred_segs)
        observed += len(obs_segs)
        predicted += len(pred_segs)
        matched += len(pairs_matched)
        # vacuously correct when neither gold nor prediction has helices
        if len(obs_segs) == len(pred_segs) == len(pairs_matched):
            ok += 1
    return PerSegment(
        observed=observed,
        predicted=predicted,
        matched=matched,
        proteins=len(pairs),
        proteins_ok=ok,
    )


def compute_metrics(pairs: list[tuple[str, str]]) -> MetricsReport:
    return MetricsReport(residue=per_residue(pairs), segment=per_segment(pairs))


def _fmt(value: float | None) -> str:
    return "NA" if value is None else f"{value:.2f}"


_ROWS = (
    ("Q2", lambda r: r.residue.q2, "residues correctly predicted (%)"),
    ("Q2T_obs", lambda r: r.residue.q2t_obs, "helix residue recall (%)"),
    ("Q2T_prd", lambda r: r.residue.q2t_prd, "helix residue precision (%)"),
    ("Q2N_obs", lambda r: r.residue.q2n_obs, "non-helix residue recall (%)"),
    ("Q2N_prd", lambda r: r.residue.q2n_prd, "non-helix residue precision (%)"),
    ("Qok", lambda r: r.segment.qok, "proteins with all helices correct (%)"),
    ("Qtmh_obs", lambda r: r.segment.qtmh_obs, "observed helices matched (%)"),
    ("Qtmh_prd", lambda r: r.segment.qtmh_prd, "predicted helices matched (%)"),
)


def render_tsv(report: MetricsReport) -> str:
    lines = [f"{name}\t{_fmt(value_of(report))}" for name, value_of, _ in _ROWS]
    lines.append(f"proteins\t{report.segment.proteins}")
    lines.append(f"residues\t{report.residue.total}")
    lines.append(f"observed_segments\t{report.segment.observed}")
    lines.append(f"predicted_segments\t{report.segment.predicted}")
    lines.append(f"matched_segments\t{report.segment.matched}")
    return "\n".join(lines) + "\n"


def render_table(report: MetricsReport) -> str:
    width = max(len(name) for name, _, _ in _ROWS)
    lines = []
    for name, value_of, label in _ROWS:
        lines.append(f"{name:<{width}}  {_fmt(value_of(report)):>7}  {label}")
    counts = (
        f"proteins={report.segment.proteins}"
        f" residues={report.residue.total}"
        f" segments obs/prd/matched="
        f"{report.segment.observed}/{report.segment.predicted}/{report.segment.matched}"
    )
    lines.append(counts)
    return "\n".join(lines) + "\n"
