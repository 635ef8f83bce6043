"""Mistakes in the highest and lowest voice.

The highest (lowest) sounding target pitch stands in for the melody (bass
line).  Target notes are taken without sustain pedal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .benchmark import PrfCounts, check_aligned
from .matching import Matching
from .model import PITCH_MIN, NoteList, PianoRoll

HIGHEST = "highest"
LOWEST = "lowest"
VOICE_MIN_DURATION = 0.5


def _check_which(which):
    if which not in (HIGHEST, LOWEST):
        raise ValueError(f"voice must be 'highest' or 'lowest', got {which!r}")


def frame_voice(target: PianoRoll, which: str = HIGHEST) -> np.ndarray:
    """Highest (or lowest) active MIDI pitch per frame, -1 on silent frames."""
    _check_which(which)
    frames = target.frames
    active = frames.any(axis=0)
    if which == HIGHEST:
        rows = frames.shape[0] - 1 - np.argmax(frames[::-1], axis=0)
    else:
        rows = np.argmax(frames, axis=0)
    return np.where(active, rows + PITCH_MIN, -1)


def voice_framewise_counts(target: PianoRoll, output: PianoRoll,
                           which: str = HIGHEST) -> PrfCounts:
    """Counts restricted to the target's outer voice.

    Every active output cell beyond the voice (above the highest, below the
    lowest) is a false positive.  When the target is silent every active
    output cell counts as a false positive, for both voices.
    """
    check_aligned(target, output)
    voice = frame_voice(target, which)
    est = output.frames
    n_frames = est.shape[1]
    voiced = np.flatnonzero(voice >= 0)
    hit = est[voice[voiced] - PITCH_MIN, voiced]
    tp = int(np.count_nonzero(hit))
    fn = int(len(voiced) - tp)

    pitch = np.arange(est.shape[0])[:, None] + PITCH_MIN
    if which == HIGHEST:
        beyond = pitch > voice[None, :]
    else:
        beyond = (pitch < voice[None, :]) | (voice[None, :] < 0)
    fp = int(np.count_nonzero(est & beyond)) if n_frames else 0
    return PrfCounts(tp, fp, fn)


def _longest_free_run(start, end, blockers) -> float:
    """Length of the longest part of [start, end] not touching any blocker.

    ``blockers`` is an iterable of closed ``(s, e)`` intervals.
    """
    spans = sorted((max(s, start), min(e, end)) for s, e in blockers
                   if s <= end and e >= start)
    best = 0.0
    cursor = start
    for s, e in spans:
        if s > cursor:
            best = max(best, s - cursor)
        cursor = max(cursor, e)
    if end > cursor:
        best = max(best, end - cursor)
    return best


def _dominates(onset, offset, pitch, others: NoteList, which, d_h, skip=None) -> bool:
    """True if [onset, offset] holds a stretch longer than ``d_h`` during
    which no note of ``others`` at or beyond ``pitch`` sounds."""
    if len(others) == 0:
        return offset - onset > d_h
    if which == HIGHEST:
        rival = others.pitches >= pitch
    else:
        rival = others.pitches <= pitch
    rival &= (others.onsets <= offset) & (others.offsets >= onset)
    if skip is not None:
        rival[skip] = False
    idx = np.flatnonzero(rival)
    blockers = zip(others.onsets[idx], others.offsets[idx])
    return _longest_free_run(onset, offset, blockers) > d_h


@dataclass(frozen=True)
class VoiceNotes:
    members: frozenset
    which: str
    min_duration: float


def extract_voice_notes(target: NoteList, which: str = HIGHEST,
                        min_duration: float = VOICE_MIN_DURATION) -> VoiceNotes:
    """Target notes that are the outermost sounding note for more than
    ``min_duration`` seconds in a row."""
    _check_which(which)
    if min_duration <= 0:
        raise ValueError("min_duration must be positive")
    members = frozenset(
        i for i, n in enumerate(target.notes)
        if _dominates(n.onset, n.offset, n.pitch, target, which, min_duration, skip=i))
    return VoiceNotes(members, which, min_duration)


def voice_notewise_counts(targets: NoteList, outputs: NoteList, matching: Matching,
                          which: str = HIGHEST,
                          min_duration: float = VOICE_MIN_DURATION,
                          voice: VoiceNotes = None) -> PrfCounts:
    """Notewise counts for one outer voice, given an onset-only matching.

    ``targets`` should be the target notes without sustain pedal.
    """
    if voice is None:
        voice = extract_voice_notes(targets, which, min_duration)
    matched = matching.matched_targets
    tp = sum(1 for t, _ in matching.pairs if t in voice.members)
    fn = sum(1 for t in voice.members if t not in matched)
    fp = 0
    for j in matching.false_positives:
        o = outputs.notes[j]
        if _dominates(o.onset, o.offset, o.pitch, targets, which, voice.min_duration):
            fp += 1
    return PrfCounts(tp, fp, fn)
