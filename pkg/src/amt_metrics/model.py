"""Note lists, pedal events and piano rolls.

Times are in seconds, pitches are MIDI numbers restricted to the 88 piano
keys (21 to 108).  Row ``i`` of a piano roll holds MIDI pitch ``21 + i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

PITCH_MIN = 21
PITCH_MAX = 108
N_PITCHES = PITCH_MAX - PITCH_MIN + 1
FRAME_DURATION = 0.010
PEDAL_THRESHOLD = 64

TARGET = "target"
OUTPUT = "output"
WITH_PEDAL = "with-pedal"
WITHOUT_PEDAL = "without-pedal"


@dataclass(frozen=True)
class Note:
    onset: float
    offset: float
    pitch: int
    velocity: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "onset", float(self.onset))
        object.__setattr__(self, "offset", float(self.offset))
        if int(self.pitch) != self.pitch:
            raise ValueError(f"pitch must be an integer: {self.pitch}")
        object.__setattr__(self, "pitch", int(self.pitch))
        if self.velocity is not None:
            object.__setattr__(self, "velocity", int(self.velocity))
        if not (math.isfinite(self.onset) and math.isfinite(self.offset)):
            raise ValueError(f"non-finite note times: {self}")
        if self.onset < 0:
            raise ValueError(f"negative onset: {self}")
        if not self.offset > self.onset:
            raise ValueError(f"offset must be after onset: {self}")
        if not PITCH_MIN <= self.pitch <= PITCH_MAX:
            raise ValueError(
                f"pitch {self.pitch} outside piano range [{PITCH_MIN}, {PITCH_MAX}]")
        if self.velocity is not None and not 1 <= self.velocity <= 127:
            raise ValueError(f"velocity {self.velocity} outside [1, 127]")

    @property
    def duration(self) -> float:
        return self.offset - self.onset


@dataclass(frozen=True)
class PedalEvent:
    time: float
    value: int

    @property
    def down(self) -> bool:
        return self.value >= PEDAL_THRESHOLD


@dataclass(frozen=True)
class NoteList:
    """An immutable, onset-ordered list of notes plus sustain-pedal events.

    Notes are stably sorted by ``(onset, pitch)`` on construction, so note
    indices used by matchings and error lists refer to that order.
    """

    notes: tuple = ()
    pedal: tuple = ()
    role: str = TARGET

    def __post_init__(self):
        if self.role not in (TARGET, OUTPUT):
            raise ValueError(f"unknown role {self.role!r}")
        notes = tuple(sorted(self.notes, key=lambda n: (n.onset, n.pitch)))
        pedal = tuple(sorted(self.pedal, key=lambda e: e.time))
        object.__setattr__(self, "notes", notes)
        object.__setattr__(self, "pedal", pedal)

    def __len__(self):
        return len(self.notes)

    def __iter__(self):
        return iter(self.notes)

    def __getitem__(self, i):
        return self.notes[i]

    @property
    def duration(self) -> float:
        return max((n.offset for n in self.notes), default=0.0)

    @property
    def has_velocities(self) -> bool:
        return all(n.velocity is not None for n in self.notes)

    @cached_property
    def onsets(self) -> np.ndarray:
        return np.array([n.onset for n in self.notes], dtype=float)

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.array([n.offset for n in self.notes], dtype=float)

    @cached_property
    def pitches(self) -> np.ndarray:
        return np.array([n.pitch for n in self.notes], dtype=int)

    @cached_property
    def velocities(self) -> np.ndarray:
        if any(n.velocity is None for n in self.notes):
            raise ValueError("note list has notes without velocity")
        return np.array([n.velocity for n in self.notes], dtype=float)

    def with_role(self, role: str, keep_velocity: bool = True) -> "NoteList":
        notes = self.notes
        if not keep_velocity:
            notes = tuple(Note(n.onset, n.offset, n.pitch) for n in notes)
        return NoteList(notes, self.pedal, role)


def make_notes(rows: Iterable[Sequence], role: str = OUTPUT, pedal=()) -> NoteList:
    """Build a NoteList from ``(onset, offset, pitch[, velocity])`` rows."""
    return NoteList(tuple(Note(*row) for row in rows), tuple(pedal), role)


def apply_sustain(notes: NoteList, pedal_mode: str = WITH_PEDAL,
                  threshold: int = PEDAL_THRESHOLD) -> NoteList:
    """Extend note offsets while the sustain pedal is held.

    A note whose key is released while the pedal is down keeps sounding until
    the next pedal release.  The extension stops at the next onset of the same
    pitch and never shortens the note.  A pedal that is never released holds
    notes until the end of the note list.
    """
    if pedal_mode == WITHOUT_PEDAL or not notes.pedal:
        return notes
    if pedal_mode != WITH_PEDAL:
        raise ValueError(f"unknown pedal mode {pedal_mode!r}")

    times = np.array([e.time for e in notes.pedal])
    down = np.array([e.value >= threshold for e in notes.pedal])
    release_times = times[~down]
    end = notes.duration

    by_pitch: dict = {}
    for i, n in enumerate(notes.notes):
        by_pitch.setdefault(n.pitch, []).append(i)

    new_offsets = [n.offset for n in notes.notes]
    for i, n in enumerate(notes.notes):
        k = np.searchsorted(times, n.offset, side="right") - 1
        if k < 0 or not down[k]:
            continue
        j = np.searchsorted(release_times, n.offset, side="left")
        extended = release_times[j] if j < len(release_times) else end
        later = [notes.notes[m].onset for m in by_pitch[n.pitch]
                 if notes.notes[m].onset > n.onset]
        if later:
            extended = min(extended, min(later))
        new_offsets[i] = max(n.offset, extended)

    sustained = tuple(Note(n.onset, e, n.pitch, n.velocity)
                      for n, e in zip(notes.notes, new_offsets))
    return NoteList(sustained, notes.pedal, notes.role)


def frame_index(t, frame_duration: float = FRAME_DURATION):
    """Index of the first frame starting at or after ``t``.

    Times within ~1e-8 frames of a boundary snap onto it, so that
    0.07 s really is 7 frames.
    """
    return np.ceil(np.round(np.asarray(t, dtype=float) / frame_duration, 6)).astype(int)


@dataclass(frozen=True)
class PianoRoll:
    frames: np.ndarray = field(repr=False)
    frame_duration: float = FRAME_DURATION
    pedal_mode: str = WITHOUT_PEDAL

    @property
    def n_frames(self) -> int:
        return self.frames.shape[1]

    def column_counts(self) -> np.ndarray:
        return self.frames.sum(axis=0)


def notes_to_roll(notes: NoteList, pedal_mode: str = WITHOUT_PEDAL,
                  total_duration: Optional[float] = None,
                  frame_duration: float = FRAME_DURATION) -> PianoRoll:
    """Binary 88 x T roll; frame t is active when onset <= t * dt < offset."""
    if pedal_mode == WITH_PEDAL:
        notes = apply_sustain(notes, WITH_PEDAL)
    elif pedal_mode != WITHOUT_PEDAL:
        raise ValueError(f"unknown pedal mode {pedal_mode!r}")
    if total_duration is None:
        total_duration = notes.duration
    if total_duration < notes.duration:
        raise ValueError("total_duration shorter than the note list")
    n_frames = int(frame_index(total_duration, frame_duration))
    frames = np.zeros((N_PITCHES, n_frames), dtype=bool)
    if len(notes):
        if notes.pitches.min() < PITCH_MIN or notes.pitches.max() > PITCH_MAX:
            raise ValueError("pitch outside the 88-key range")
        starts = frame_index(notes.onsets, frame_duration)
        stops = frame_index(notes.offsets, frame_duration)
        for p, a, b in zip(notes.pitches - PITCH_MIN, starts, stops):
            frames[p, a:b] = True
    return PianoRoll(frames, frame_duration, pedal_mode)


def roll_to_intervals(roll: PianoRoll):
    """Active runs per row as ``(pitch, onset, offset)`` tuples."""
    out = []
    dt = roll.frame_duration
    for row in range(roll.frames.shape[0]):
        padded = np.concatenate(([0], roll.frames[row].astype(np.int8), [0]))
        edges = np.flatnonzero(np.diff(padded))
        for a, b in zip(edges[::2], edges[1::2]):
            out.append((row + PITCH_MIN, a * dt, b * dt))
    return out
