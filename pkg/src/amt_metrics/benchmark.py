"""Framewise and notewise precision, recall and F-measure."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matching import ONSET, Matching, max_match
from .model import NoteList, PianoRoll


@dataclass(frozen=True)
class PrfCounts:
    tp: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError(f"negative count in {self}")


@dataclass(frozen=True)
class PrfResult:
    precision: float
    recall: float
    f_measure: float


def check_aligned(target: PianoRoll, output: PianoRoll):
    if target.frames.shape != output.frames.shape:
        raise ValueError(
            f"piano roll shapes differ: {target.frames.shape} vs {output.frames.shape}")
    if target.frame_duration != output.frame_duration:
        raise ValueError("piano rolls use different frame durations")


def framewise_counts(target: PianoRoll, output: PianoRoll) -> PrfCounts:
    check_aligned(target, output)
    ref, est = target.frames, output.frames
    tp = int(np.count_nonzero(ref & est))
    fp = int(np.count_nonzero(est & ~ref))
    fn = int(np.count_nonzero(ref & ~est))
    return PrfCounts(tp, fp, fn)


def prf(counts: PrfCounts) -> PrfResult:
    """Precision, recall and F-measure from counts.

    With nothing to find and nothing found, all three are 1.  Otherwise an
    empty denominator gives 0, as does ``P + R == 0`` for the F-measure.
    """
    tp, fp, fn = counts.tp, counts.fp, counts.fn
    if tp + fp + fn == 0:
        return PrfResult(1.0, 1.0, 1.0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        return PrfResult(precision, recall, 0.0)
    return PrfResult(precision, recall, 2 * precision * recall / (precision + recall))


def matching_counts(matching: Matching) -> PrfCounts:
    tp = len(matching)
    return PrfCounts(tp, matching.n_outputs - tp, matching.n_targets - tp)


def notewise_prf(targets: NoteList, outputs: NoteList, criterion: str = ONSET,
                 matching: Matching = None, **tolerances) -> PrfResult:
    if matching is None:
        matching = max_match(targets, outputs, criterion, **tolerances)
    return prf(matching_counts(matching))
