"""Specific-interval pitch errors and repeated / merged notes."""
from __future__ import annotations

import numpy as np

from .benchmark import check_aligned
from .matching import Matching
from .model import NoteList, PianoRoll
from .salience import Proportions, _ratio

SEMITONE = 1
OCTAVE = 12
TWELFTH = 19  # octave + fifth, the third harmonic
INTERVALS = (SEMITONE, OCTAVE, TWELFTH)
LOOKBACK_FRAMES = 5
OVERLAP_THRESHOLD = 0.8


def _check_interval(interval):
    if interval not in INTERVALS:
        raise ValueError(f"interval must be one of {INTERVALS}, got {interval}")


def _shift_rows(frames: np.ndarray, k: int) -> np.ndarray:
    """``out[p] = frames[p - k]``, zero where ``p - k`` is off the keyboard."""
    out = np.zeros_like(frames)
    if k > 0:
        out[k:] = frames[:-k]
    elif k < 0:
        out[:k] = frames[-k:]
    else:
        out[:] = frames
    return out


def specific_pitch_mask(target: PianoRoll, output: PianoRoll, interval: int,
                        lookback: int = LOOKBACK_FRAMES) -> np.ndarray:
    """Output cells that are ``interval``-semitone errors.

    A cell counts when the output is on, the target is off, a target note
    sounds ``interval`` semitones away (only below, for the twelfth), and
    the target pitch was silent for the ``lookback`` previous frames.
    """
    _check_interval(interval)
    check_aligned(target, output)
    ref, est = target.frames, output.frames
    neighbour = _shift_rows(ref, interval)
    if interval != TWELFTH:
        neighbour |= _shift_rows(ref, -interval)

    # recent[p, t]: target pitch p active somewhere in frames [t - lookback, t)
    cum = np.concatenate((np.zeros((ref.shape[0], 1), dtype=int),
                          np.cumsum(ref, axis=1)), axis=1)
    t = np.arange(ref.shape[1])
    recent = (cum[:, t] - cum[:, np.maximum(t - lookback, 0)]) > 0
    return est & ~ref & neighbour & ~recent


def specific_pitch_framewise(target: PianoRoll, output: PianoRoll, interval: int,
                             lookback: int = LOOKBACK_FRAMES) -> Proportions:
    """Specific errors per frame and per framewise false positive."""
    count = int(np.count_nonzero(specific_pitch_mask(target, output, interval, lookback)))
    n_frames = target.frames.shape[1]
    n_fp = int(np.count_nonzero(output.frames & ~target.frames))
    return Proportions(_ratio(count, n_frames, 0.0), _ratio(count, n_fp, None))


def overlap_fraction(onset, offset, other_onset, other_offset):
    """Share of [onset, offset] covered by the other interval (may be negative)."""
    return (np.minimum(offset, other_offset) - np.maximum(onset, other_onset)) / (offset - onset)


def specific_pitch_notewise(targets: NoteList, outputs: NoteList, matching: Matching,
                            interval: int,
                            overlap: float = OVERLAP_THRESHOLD) -> Proportions:
    _check_interval(interval)
    fps = matching.false_positives
    count = 0
    for j in fps:
        o = outputs.notes[j]
        if interval == TWELFTH:
            related = targets.pitches == o.pitch - interval
        else:
            related = np.abs(targets.pitches - o.pitch) == interval
        if not related.any():
            continue
        frac = overlap_fraction(o.onset, o.offset, targets.onsets[related],
                                targets.offsets[related])
        if np.any(frac > overlap):
            count += 1
    return Proportions(_ratio(count, len(outputs), 0.0), _ratio(count, len(fps), None))


def _fragment_count(candidates, pool: NoteList, other: NoteList,
                    overlap: float) -> int:
    """Count notes of ``pool`` (restricted to ``candidates``) that cover a
    note of ``other`` while an earlier ``pool`` note, ending before they
    start, covers the same ``other`` note."""
    count = 0
    for k in candidates:
        n = pool.notes[k]
        same = np.flatnonzero(other.pitches == n.pitch)
        for j in same:
            ref = other.notes[j]
            if not overlap_fraction(n.onset, n.offset, ref.onset, ref.offset) > overlap:
                continue
            earlier = np.flatnonzero((pool.pitches == ref.pitch)
                                     & (pool.offsets < n.onset))
            earlier = earlier[earlier != k]
            frac = overlap_fraction(pool.onsets[earlier], pool.offsets[earlier],
                                    ref.onset, ref.offset)
            if np.any(frac > overlap):
                count += 1
                break
    return count


def repeated_notes(targets: NoteList, outputs: NoteList, matching: Matching,
                   overlap: float = OVERLAP_THRESHOLD) -> Proportions:
    """Fragmented notes: false positives covering a target note that an
    earlier output note already covers."""
    fps = matching.false_positives
    count = _fragment_count(fps, outputs, targets, overlap)
    return Proportions(_ratio(count, len(outputs), 0.0), _ratio(count, len(fps), None))


def merged_notes(targets: NoteList, outputs: NoteList, matching: Matching,
                 overlap: float = OVERLAP_THRESHOLD) -> Proportions:
    """Mirror of :func:`repeated_notes` over missed target notes."""
    fns = matching.false_negatives
    count = _fragment_count(fns, targets, outputs, overlap)
    return Proportions(_ratio(count, len(targets), 0.0), _ratio(count, len(fns), None))
