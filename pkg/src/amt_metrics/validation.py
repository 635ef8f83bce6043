"""Check the rhythm features against controlled rhythm degradations.

Each target file of a corpus is degraded four ways (quantised to a constant
16th grid, quantised to its own time-varying 16th grid, and onset noise of
+-100 ms and +-300 ms); the eight rhythm features are computed for every
version and summarised per condition.
"""
from __future__ import annotations

import json
import logging
import os
from pathlib import Path

import numpy as np

from .ingest import MIDI_EXTENSIONS, TEXT_EXTENSIONS, format_notes_text, load_notes
from .model import TARGET, Note, NoteList
from .rhythm import (NOISY, QUANT, QUANT_CONSTANT, PerturbationSpec,
                     flatness_features, perturb, read_beat_grid, rhythm_dispersion)

logger = logging.getLogger(__name__)

RHYTHM_FEATURES = (
    "flatness_output", "flatness_difference",
    "std_change_mean", "std_change_min", "std_change_max",
    "drift_mean", "drift_min", "drift_max",
)
ROW_LABELS = {
    "flatness_output": "Spectral Flatness Output",
    "flatness_difference": "Spectral Flatness Difference",
    "std_change_mean": "Dispersion Avg. std Change",
    "std_change_min": "Dispersion Min. std Change",
    "std_change_max": "Dispersion Max. std Change",
    "drift_mean": "Dispersion Avg. Drift",
    "drift_min": "Dispersion Min. Drift",
    "drift_max": "Dispersion Max. Drift",
}
GRID_EXTENSIONS = (".grid", ".txt")


def rhythm_features(target: NoteList, output: NoteList) -> dict:
    flat = flatness_features(target, output)
    disp = rhythm_dispersion(target, output)
    row = {"flatness_output": flat.output, "flatness_difference": flat.difference}
    for key in RHYTHM_FEATURES[2:]:
        row[key] = getattr(disp, key) if disp is not None else None
    return row


def noisy_label(noise: float) -> str:
    return f"noisy-{int(round(noise * 1000))}"


# ---------------------------------------------------------------------------
# synthetic corpus


def synthetic_piece(rng: np.random.Generator, n_bars: int = 6,
                    rubato: float = 0.03, tempo_wander: float = 0.004,
                    timing_jitter: float = 0.02,
                    asynchrony: float = 0.008, harmony: float = 0.5):
    """A short expressive two-hand piece and its true 16th-note grid.

    The melody runs in a per-piece unit (16ths or 8ths) with occasional
    longer notes; the left hand plays bass notes or triads on the beats.
    Tempo follows a two-bar rubato arch of depth ``rubato`` (log scale)
    plus small step-to-step wander, so it stays near a random base tempo.
    Each grid position gets one expressive timing deviation
    (``timing_jitter``, shared by the notes starting there) and every note
    its own small ``asynchrony``.
    A share ``harmony`` of melody notes gets a third or sixth below it.
    """
    n_steps = 16 * n_bars
    period = 60.0 / rng.uniform(80, 130) / 4
    phase = rng.uniform(0, 2 * np.pi)
    log_tempo = (rubato * np.sin(2 * np.pi * np.arange(n_steps) / 32 + phase)
                 + rng.normal(0, tempo_wander, n_steps))
    steps = period * np.exp(-log_tempo)
    grid = np.concatenate(([0.5], 0.5 + np.cumsum(steps)))
    deviation = rng.normal(0, timing_jitter, len(grid))

    key = int(rng.integers(0, 12))
    scale = np.array([0, 2, 4, 5, 7, 9, 11])
    melody_pitches = [p for p in range(60 + key, 86 + key) if (p - key) % 12 in scale]
    bass_pitches = [p for p in range(36 + key, 56 + key) if (p - key) % 12 in scale]

    def onset(k):
        return max(grid[k] + deviation[k] + rng.normal(0, asynchrony), 0.0)

    unit = int(rng.choice([1, 2]))  # running 16ths or 8ths
    notes = []
    k = 0
    m = len(melody_pitches) // 2
    while k < n_steps:
        length = unit * int(rng.choice([1, 2, 4], p=[0.7, 0.2, 0.1]))
        length = min(length, n_steps - k)
        m = int(np.clip(m + rng.integers(-2, 3), 0, len(melody_pitches) - 1))
        start = onset(k)
        end = max(grid[k + length] - 0.02, start + 0.05)
        notes.append(Note(start, end, melody_pitches[m], int(rng.integers(50, 101))))
        if m >= 5 and rng.random() < harmony:
            below = melody_pitches[m - int(rng.choice([2, 5]))]
            start = onset(k)
            end = max(grid[k + length] - 0.02, start + 0.05)
            notes.append(Note(start, end, below, int(rng.integers(40, 81))))
        k += length
    for beat in range(0, n_steps, 4):
        if rng.random() < 0.25:
            continue
        length = int(min(rng.choice([4, 8]), n_steps - beat))
        root = int(rng.integers(0, len(bass_pitches) - 4))
        chord = [bass_pitches[root]]
        if rng.random() < 0.6:
            chord += [bass_pitches[root + 2], bass_pitches[root + 4]]
        for p in chord:
            start = onset(beat)
            end = max(grid[beat + length] - 0.03, start + 0.05)
            notes.append(Note(start, end, p, int(rng.integers(40, 91))))
    return NoteList(tuple(notes), (), TARGET), tuple(float(t) for t in grid)


def write_synthetic_corpus(directory, n_pieces: int = 30, seed: int = 0) -> list:
    """Write ``piece_XXX.txt`` note files and ``grids/piece_XXX.grid`` files."""
    directory = Path(directory)
    (directory / "grids").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = []
    for i in range(n_pieces):
        notes, grid = synthetic_piece(rng)
        path = directory / f"piece_{i:03d}.txt"
        path.write_text(format_notes_text(notes), encoding="utf-8")
        (directory / "grids" / f"piece_{i:03d}.grid").write_text(
            "".join(f"{t!r}\n" for t in grid), encoding="utf-8")
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# harness


def _find_grid(grids_dir, stem):
    if grids_dir is None:
        return None
    for ext in GRID_EXTENSIONS:
        candidate = Path(grids_dir) / f"{stem}{ext}"
        if candidate.exists():
            return read_beat_grid(candidate)
    return None


def corpus_files(corpus_dir) -> list:
    exts = MIDI_EXTENSIONS + TEXT_EXTENSIONS
    return sorted(p for p in Path(corpus_dir).iterdir()
                  if p.is_file() and p.suffix.lower() in exts)


def _summary(rows):
    summary = {}
    for key in RHYTHM_FEATURES:
        vals = np.array([r[key] for r in rows if r[key] is not None], dtype=float)
        summary[key] = {
            "mean": float(vals.mean()) if vals.size else None,
            "std": float(vals.std()) if vals.size else None,
            "n": int(vals.size),
        }
    return summary


def validate_rhythm(corpus_dir, out_path=None, seeds=(0,), grids_dir=None,
                    tempo=None, noise_levels=(0.1, 0.3)) -> dict:
    """Degrade every corpus file and summarise its rhythm features.

    Grids are looked up as ``<stem>.grid`` (or ``.txt``) in ``grids_dir``,
    which defaults to ``<corpus_dir>/grids``.  Without a grid the ``quant``
    condition is skipped for that file; ``quant-constant`` then needs
    ``tempo`` (BPM).  Noise is drawn from a generator seeded by
    ``(seed, file index, noise level index)``.
    """
    files = corpus_files(corpus_dir)
    if grids_dir is None and (Path(corpus_dir) / "grids").is_dir():
        grids_dir = Path(corpus_dir) / "grids"
    conditions = [QUANT_CONSTANT, QUANT] + [noisy_label(n) for n in noise_levels]
    rows = {c: [] for c in conditions}
    skipped = {c: [] for c in conditions}

    for index, path in enumerate(files):
        target = load_notes(path, TARGET, require_velocity=False)
        grid = _find_grid(grids_dir, path.stem)
        if grid is not None or tempo:
            spec = PerturbationSpec(QUANT_CONSTANT, beat_grid=grid, tempo=tempo)
            rows[QUANT_CONSTANT].append(rhythm_features(target, perturb(target, spec)))
        else:
            skipped[QUANT_CONSTANT].append(path.name)
        if grid is not None:
            spec = PerturbationSpec(QUANT, beat_grid=grid)
            rows[QUANT].append(rhythm_features(target, perturb(target, spec)))
        else:
            skipped[QUANT].append(path.name)
        for level_index, noise in enumerate(noise_levels):
            for seed in seeds:
                rng = np.random.default_rng(np.random.SeedSequence([seed, index, level_index]))
                output = perturb(target, PerturbationSpec(NOISY, noise=noise), rng)
                rows[noisy_label(noise)].append(rhythm_features(target, output))

    for condition, names in skipped.items():
        if names:
            logger.warning("%s skipped for %d file(s) without a grid", condition, len(names))
    report = {
        "n_files": len(files),
        "seeds": list(seeds),
        "conditions": {c: _summary(rows[c]) for c in conditions if rows[c]},
        "skipped": {c: names for c, names in skipped.items() if names},
    }
    if out_path is not None:
        Path(out_path).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    return report


def format_report(report: dict) -> str:
    """Features as rows, conditions as mean/std column pairs."""
    conditions = list(report["conditions"])
    width = max(len(label) for label in ROW_LABELS.values())
    header = " " * width + "".join(f" | {c:^17}" for c in conditions)
    sub = " " * width + "".join(f" | {'mean':>8} {'std':>8}" for _ in conditions)
    lines = [header, sub, "-" * len(sub)]

    def cell(x):
        return f"{x:8.3f}" if x is not None else f"{'-':>8}"

    for key in RHYTHM_FEATURES:
        row = ROW_LABELS[key].rjust(width)
        for c in conditions:
            stats = report["conditions"][c][key]
            row += f" | {cell(stats['mean'])} {cell(stats['std'])}"
        lines.append(row)
    return os.linesep.join(lines)
