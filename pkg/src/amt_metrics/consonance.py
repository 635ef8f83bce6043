"""Consonance of the chords sounding between note events.

Three measures are computed per chord:

roughness
    Hutchinson & Knopoff style partial interference.  Each tone has
    ``ROUGHNESS_HARMONICS`` harmonics with amplitude ``1/n``; every pair of
    partials contributes ``a_i a_j g(y)`` where ``y`` is their distance in
    critical bandwidths ``1.72 * fmean**0.65`` and
    ``g(y) = (4y * exp(1 - 4y))**2`` below ``y = 1.2``.  The sum is divided by
    the total partial energy.
harmonicity
    Peak cosine similarity, over all 1200 circular cent shifts, between the
    chord's smoothed pitch-class spectrum and that of a single harmonic tone.
corpus familiarity
    Laplace-smoothed log frequency of the chord's bass-relative pitch-class
    set in a chord-type count table.

These are frozen re-statements of published models, not bit-exact ports;
``CONSTANTS`` records the parameters so results can be versioned.
"""
from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable, NamedTuple, Optional

import numpy as np

from .model import NoteList

logger = logging.getLogger(__name__)

ROUGHNESS_HARMONICS = 11
CBW_SCALE = 1.72
CBW_EXPONENT = 0.65
KERNEL_PEAK = 0.25
KERNEL_CUTOFF = 1.2
A4_HZ = 440.0

HARMONICITY_HARMONICS = 12
ROLLOFF = 0.75
SMOOTHING_CENTS = 6.83
N_CENT_BINS = 1200

N_CHORD_TYPES = 2 ** 11  # bass-relative pitch-class sets all contain 0

CONSTANTS = {
    "roughness_harmonics": ROUGHNESS_HARMONICS,
    "roughness_amplitude": "1/n",
    "critical_bandwidth": f"{CBW_SCALE} * f**{CBW_EXPONENT}",
    "roughness_kernel_peak": KERNEL_PEAK,
    "roughness_kernel_cutoff": KERNEL_CUTOFF,
    "harmonicity_harmonics": HARMONICITY_HARMONICS,
    "harmonicity_rolloff": ROLLOFF,
    "harmonicity_sigma_cents": SMOOTHING_CENTS,
    "familiarity_smoothing": "laplace over 2048 bass-relative pitch-class sets",
}

DEFAULT_TABLE = "chord_types.csv"


def midi_to_hz(pitch):
    return A4_HZ * 2.0 ** ((np.asarray(pitch, dtype=float) - 69) / 12)


def _chord(chord: Iterable[int]) -> tuple:
    pitches = tuple(sorted(set(int(p) for p in chord)))
    if not pitches:
        raise ValueError("consonance is undefined for an empty chord")
    return pitches


# ---------------------------------------------------------------------------
# roughness


def chord_partials(chord, n_harmonics: int = ROUGHNESS_HARMONICS):
    """Frequencies and amplitudes of all partials; coinciding partials
    (equal to 1e-6 Hz) are merged by adding amplitudes."""
    merged: dict = {}
    for f0 in midi_to_hz(_chord(chord)):
        for n in range(1, n_harmonics + 1):
            entry = merged.setdefault(round(n * f0, 6), [n * f0, 0.0])
            entry[1] += 1.0 / n
    freqs, amps = np.array(sorted(merged.values())).T
    return freqs, amps


def roughness_kernel(y):
    y = np.asarray(y, dtype=float)
    x = y / KERNEL_PEAK
    return np.where(y <= KERNEL_CUTOFF, (x * np.exp(1 - x)) ** 2, 0.0)


@lru_cache(maxsize=4096)
def _roughness(chord: tuple, n_harmonics: int) -> float:
    freqs, amps = chord_partials(chord, n_harmonics)
    fi, fj = np.triu_indices(len(freqs), k=1)
    mean_f = (freqs[fi] + freqs[fj]) / 2
    y = np.abs(freqs[fi] - freqs[fj]) / (CBW_SCALE * mean_f ** CBW_EXPONENT)
    total = np.sum(amps[fi] * amps[fj] * roughness_kernel(y))
    return float(total / np.sum(amps ** 2))


def roughness_hutch78(chord, n_harmonics: int = ROUGHNESS_HARMONICS) -> float:
    return _roughness(_chord(chord), n_harmonics)


# ---------------------------------------------------------------------------
# harmonicity


@lru_cache(maxsize=64)
def _tone_spectrum(pitch_class: int, n_harmonics: int, rolloff: float,
                   sigma: float) -> np.ndarray:
    bins = np.arange(N_CENT_BINS)
    n = np.arange(1, n_harmonics + 1)
    positions = (100.0 * pitch_class + 1200.0 * np.log2(n)) % N_CENT_BINS
    d = np.abs(bins[None, :] - positions[:, None])
    d = np.minimum(d, N_CENT_BINS - d)
    spectrum = (n[:, None] ** -rolloff * np.exp(-d ** 2 / (2 * sigma ** 2))).sum(axis=0)
    spectrum.flags.writeable = False
    return spectrum


def pitch_class_spectrum(chord, n_harmonics: int = HARMONICITY_HARMONICS,
                         rolloff: float = ROLLOFF,
                         sigma: float = SMOOTHING_CENTS) -> np.ndarray:
    """1200-bin cyclic spectrum, one bin per cent above C.  Octaves fold
    together, so each tone contributes the spectrum of its pitch class."""
    spectrum = np.zeros(N_CENT_BINS)
    for p in _chord(chord):
        spectrum += _tone_spectrum(p % 12, n_harmonics, rolloff, sigma)
    return spectrum


@lru_cache(maxsize=8)
def _template_fft(n_harmonics, rolloff, sigma):
    template = pitch_class_spectrum([60], n_harmonics, rolloff, sigma)
    return np.conj(np.fft.rfft(template)), np.linalg.norm(template)


@lru_cache(maxsize=4096)
def _harmonicity(chord: tuple, n_harmonics: int, rolloff: float, sigma: float) -> float:
    spectrum = pitch_class_spectrum(chord, n_harmonics, rolloff, sigma)
    conj_template, template_norm = _template_fft(n_harmonics, rolloff, sigma)
    corr = np.fft.irfft(np.fft.rfft(spectrum) * conj_template, n=N_CENT_BINS)
    return float(corr.max() / (np.linalg.norm(spectrum) * template_norm))


def harmonicity(chord, n_harmonics: int = HARMONICITY_HARMONICS,
                rolloff: float = ROLLOFF, sigma: float = SMOOTHING_CENTS) -> float:
    """Best match of the chord to a transposed harmonic template, in [0, 1]."""
    return _harmonicity(_chord(chord), n_harmonics, rolloff, sigma)


# ---------------------------------------------------------------------------
# corpus familiarity


def chord_type_id(chord) -> str:
    """Bass-relative pitch-class set, e.g. ``"0-4-7"`` for a root-position triad."""
    pitches = _chord(chord)
    bass = pitches[0] % 12
    return "-".join(str(q) for q in sorted({(p - bass) % 12 for p in pitches}))


@dataclass(frozen=True)
class ChordTable:
    counts: dict
    total: int
    n_types: int = N_CHORD_TYPES

    def log_probability(self, type_id: str) -> float:
        return math.log((self.counts.get(type_id, 0) + 1) / (self.total + self.n_types))


def read_chord_table(path) -> ChordTable:
    """Read a ``chord_type_id,count`` CSV."""
    counts = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["chord_type_id", "count"]:
            raise ValueError(f"{path}: expected header 'chord_type_id,count'")
        for row in reader:
            count = int(row["count"])
            if count < 0:
                raise ValueError(f"{path}: negative count for {row['chord_type_id']}")
            counts[row["chord_type_id"]] = counts.get(row["chord_type_id"], 0) + count
    return ChordTable(counts, sum(counts.values()))


@lru_cache(maxsize=1)
def default_chord_table() -> Optional[ChordTable]:
    try:
        ref = resources.files("amt_metrics") / "data" / DEFAULT_TABLE
        with resources.as_file(ref) as path:
            return read_chord_table(path)
    except (FileNotFoundError, OSError) as exc:
        logger.warning("chord table unavailable, familiarity disabled: %s", exc)
        return None


def load_chord_table(path=None) -> Optional[ChordTable]:
    """The table at ``path``, or the bundled one; None (with a warning) if missing."""
    if path is None:
        return default_chord_table()
    if not os.path.exists(path):
        logger.warning("chord table %s not found, familiarity disabled", path)
        return None
    return read_chord_table(path)


def corpus_familiarity(chord, table: ChordTable) -> float:
    return table.log_probability(chord_type_id(chord))


# ---------------------------------------------------------------------------
# event segmentation and statistics


@dataclass(frozen=True)
class EventSegment:
    start: float
    end: float
    chord: frozenset

    @property
    def silent(self) -> bool:
        return not self.chord

    @property
    def duration(self) -> float:
        return self.end - self.start


def event_segments(notes: NoteList) -> list:
    """Split time at every onset and offset; each piece holds a fixed chord."""
    if len(notes) == 0:
        return []
    bounds = np.unique(np.concatenate((notes.onsets, notes.offsets)))
    segments = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        sounding = (notes.onsets <= a) & (notes.offsets >= b)
        chord = frozenset(int(p) for p in notes.pitches[sounding])
        segments.append(EventSegment(float(a), float(b), chord))
    return segments


class WeightedStats(NamedTuple):
    mean: float
    std: float
    min: float
    max: float


def weighted_stats(values, weights) -> WeightedStats:
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    mean = float(np.average(values, weights=weights))
    std = float(np.sqrt(np.average((values - mean) ** 2, weights=weights)))
    return WeightedStats(mean, std, float(values.min()), float(values.max()))


class ConsonanceFeatures(NamedTuple):
    roughness: Optional[WeightedStats]
    harmonicity: Optional[WeightedStats]
    familiarity: Optional[WeightedStats]


def consonance_features(notes: NoteList, table: Optional[ChordTable] = None,
                        roughness_harmonics: int = ROUGHNESS_HARMONICS,
                        harmonicity_harmonics: int = HARMONICITY_HARMONICS,
                        rolloff: float = ROLLOFF,
                        sigma: float = SMOOTHING_CENTS) -> ConsonanceFeatures:
    """Duration-weighted statistics of the three measures over non-silent
    segments.  Familiarity is None without a chord table."""
    segments = [s for s in event_segments(notes) if not s.silent]
    if not segments:
        return ConsonanceFeatures(None, None, None)
    weights = [s.duration for s in segments]
    rough = weighted_stats([roughness_hutch78(s.chord, roughness_harmonics)
                            for s in segments], weights)
    harm = weighted_stats([harmonicity(s.chord, harmonicity_harmonics, rolloff, sigma)
                           for s in segments], weights)
    fam = None
    if table is not None:
        fam = weighted_stats([corpus_familiarity(s.chord, table) for s in segments], weights)
    return ConsonanceFeatures(rough, harm, fam)
