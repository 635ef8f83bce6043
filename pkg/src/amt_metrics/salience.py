"""Loudness of missed notes, out-of-key insertions and polyphony mismatch."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .matching import Matching
from .model import PITCH_MAX, PITCH_MIN, Note, NoteList, PianoRoll

LOUDNESS_WINDOW = 1.0
RATIO_WINDOW = 0.050
PROFILE_THRESHOLD = 0.1


@dataclass(frozen=True)
class DecayModel:
    """Per-second amplitude decay rate, affine in MIDI pitch."""

    intercept: float = 0.050532
    slope: float = 0.021292
    horizon: float = 1.0

    def rate(self, pitch):
        pitch = np.asarray(pitch)
        if np.any((pitch < PITCH_MIN) | (pitch > PITCH_MAX)):
            raise ValueError(f"pitch outside [{PITCH_MIN}, {PITCH_MAX}]")
        rate = self.intercept + self.slope * pitch
        return float(rate) if rate.ndim == 0 else rate


DECAY = DecayModel()


def decay_rate(pitch) -> float:
    return DECAY.rate(pitch)


def time_varying_velocity(note: Note, t, decay: DecayModel = DECAY):
    """Velocity of a held note at time(s) ``t``.

    Decays exponentially for ``decay.horizon`` seconds after the onset, then
    stays flat until the offset; zero outside the note.
    """
    t = np.asarray(t, dtype=float)
    elapsed = np.clip(t - note.onset, 0.0, decay.horizon)
    value = note.velocity * np.exp(-decay.rate(note.pitch) * elapsed)
    value = np.where((t >= note.onset) & (t <= note.offset), value, 0.0)
    return float(value) if value.ndim == 0 else value


def _window_peak(notes: NoteList, lo: float, hi: float, decay: DecayModel) -> float:
    """Largest time-varying velocity of any note over [lo, hi].

    Each note's curve is non-increasing while it sounds, so its peak over
    the window sits at the first instant both overlap.
    """
    start = np.maximum(notes.onsets, lo)
    sounding = start <= np.minimum(notes.offsets, hi)
    if not sounding.any():
        return 0.0
    elapsed = np.minimum(start[sounding] - notes.onsets[sounding], decay.horizon)
    rates = decay.rate(notes.pitches[sounding])
    return float(np.max(notes.velocities[sounding] * np.exp(-rates * elapsed)))


def normalized_fn_loudness(targets: NoteList, matching: Matching,
                           window: float = LOUDNESS_WINDOW) -> Optional[float]:
    """Mean over missed notes of velocity / mean velocity of the notes whose
    onsets lie within ``window`` seconds.  None without missed notes."""
    missed = matching.false_negatives
    if not missed:
        return None
    onsets, velocities = targets.onsets, targets.velocities
    values = []
    for i in missed:
        near = np.abs(onsets - onsets[i]) < window
        values.append(velocities[i] * np.count_nonzero(near) / velocities[near].sum())
    return float(np.mean(values))


def fn_loudness_ratio(targets: NoteList, matching: Matching,
                      window: float = RATIO_WINDOW,
                      decay: DecayModel = DECAY) -> Optional[float]:
    """Mean over missed notes of velocity / loudest target velocity around
    the missed onset (within ``window`` seconds).  None without missed notes.

    ``targets`` should be the sounding (pedal-extended) target notes.
    """
    missed = matching.false_negatives
    if not missed:
        return None
    values = []
    for i in missed:
        n = targets.notes[i]
        peak = _window_peak(targets, n.onset - window, n.onset + window, decay)
        values.append(n.velocity / peak)
    return float(np.mean(values))


@dataclass(frozen=True)
class PitchProfile:
    fitness: np.ndarray  # share of frames each pitch class is active, shape (12,)
    threshold: float = PROFILE_THRESHOLD

    @property
    def in_key(self) -> frozenset:
        return frozenset(int(q) for q in np.flatnonzero(self.fitness > self.threshold))


def pitch_class_activity(roll: PianoRoll) -> np.ndarray:
    """12 x T boolean matrix: pitch class q sounds in frame t."""
    frames = roll.frames
    activity = np.zeros((12, frames.shape[1]), dtype=bool)
    for row in range(frames.shape[0]):
        activity[(row + PITCH_MIN) % 12] |= frames[row]
    return activity


def build_pitch_profile(target: PianoRoll,
                        threshold: float = PROFILE_THRESHOLD) -> PitchProfile:
    """Pitch-class fitness from a target roll taken without pedal."""
    activity = pitch_class_activity(target)
    if activity.shape[1] == 0:
        return PitchProfile(np.zeros(12), threshold)
    return PitchProfile(activity.mean(axis=1), threshold)


class Proportions(NamedTuple):
    """An error count divided by all notes (or frames) and by all errors.

    ``among_all`` is 0 when there is nothing to divide by; ``among_errors``
    is None then.
    """

    among_all: float
    among_errors: Optional[float]


def _ratio(count, total, empty):
    return count / total if total else empty


def out_of_key_binary(outputs: NoteList, matching: Matching,
                      profile: PitchProfile) -> Proportions:
    fps = matching.false_positives
    in_key = profile.in_key
    count = sum(1 for j in fps if outputs.notes[j].pitch % 12 not in in_key)
    return Proportions(_ratio(count, len(outputs), 0.0), _ratio(count, len(fps), None))


class KeyDisagreement(NamedTuple):
    normalized: Optional[float]
    among_errors: Optional[float]


def out_of_key_nonbinary(outputs: NoteList, matching: Matching,
                         profile: PitchProfile) -> KeyDisagreement:
    """Mean key-disagreement ``1 - F(q)`` of false positives, raw and divided
    by the mean over all output notes (0 when that mean is 0)."""
    fps = matching.false_positives
    if not fps:
        return KeyDisagreement(None, None)
    disagreement = 1.0 - profile.fitness[outputs.pitches % 12]
    mean_fp = float(disagreement[fps].mean())
    mean_all = float(disagreement.mean())
    normalized = mean_fp / mean_all if mean_all > 0 else 0.0
    return KeyDisagreement(normalized, mean_fp)


class SeriesStats(NamedTuple):
    mean: float
    std: float
    min: float
    max: float


def polyphony_series(target: PianoRoll, output: PianoRoll) -> np.ndarray:
    return np.abs(output.column_counts().astype(int) - target.column_counts().astype(int))


def polyphony_features(target: PianoRoll, output: PianoRoll) -> Optional[SeriesStats]:
    series = polyphony_series(target, output)
    if series.size == 0:
        return None
    return SeriesStats(float(series.mean()), float(series.std()),
                       float(series.min()), float(series.max()))
