"""Assemble every metric into one named feature vector per (target, output) pair."""
from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .benchmark import framewise_counts, matching_counts, prf
from .consonance import CONSTANTS, consonance_features, load_chord_table
from .confusions import (OCTAVE, SEMITONE, TWELFTH, merged_notes, repeated_notes,
                         specific_pitch_framewise, specific_pitch_notewise)
from .ingest import load_notes
from .matching import ONSET, ONSET_OFFSET, max_match
from .model import OUTPUT, TARGET, NoteList, apply_sustain, notes_to_roll
from .rhythm import (COARSE_EDGES, FINE_EDGES, flatness_features,
                     rhythm_dispersion)
from .salience import (DecayModel, build_pitch_profile, fn_loudness_ratio,
                       normalized_fn_loudness, out_of_key_binary,
                       out_of_key_nonbinary, polyphony_features)
from .voice import HIGHEST, LOWEST, voice_framewise_counts, voice_notewise_counts

logger = logging.getLogger(__name__)

YES, NO, AMBIVALENT = "yes", "no", "ambivalent"


def _prf_keys(prefix, group):
    return [(f"{prefix}_{m}", group, YES) for m in ("precision", "recall", "f_measure")]


def _pair(prefix, group, first, second, better=AMBIVALENT):
    return [(f"{prefix}_{first}", group, better), (f"{prefix}_{second}", group, better)]


def _stats(prefix, group, better=AMBIVALENT):
    return [(f"{prefix}_{s}", group, better) for s in ("mean", "std", "min", "max")]


SCHEMA = (
    _prf_keys("framewise", "benchmark framewise")
    + _prf_keys("onset", "benchmark onset-only notewise")
    + _prf_keys("onset_offset", "benchmark onset-offset notewise")
    + _prf_keys("highest_voice_framewise", "framewise highest voice")
    + _prf_keys("lowest_voice_framewise", "framewise lowest voice")
    + _prf_keys("highest_voice_notewise", "notewise highest voice")
    + _prf_keys("lowest_voice_notewise", "notewise lowest voice")
    + [("loudness_fn_normalized", "loudness", NO),
       ("loudness_fn_ratio", "loudness", NO)]
    + _pair("out_of_key_binary", "binary out-of-key false positives",
            "among_fp", "among_detected", NO)
    + _pair("out_of_key_disagreement", "non-binary out-of-key false positives",
            "fp_mean", "fp_mean_normalized", NO)
    + _pair("semitone_framewise", "framewise semitone errors", "among_fp", "among_frames")
    + _pair("octave_framewise", "framewise octave errors", "among_fp", "among_frames")
    + _pair("twelfth_framewise", "framewise third-harmonic errors", "among_fp", "among_frames")
    + _pair("semitone_notewise", "notewise semitone errors", "among_fp", "among_detected")
    + _pair("octave_notewise", "notewise octave errors", "among_fp", "among_detected")
    + _pair("twelfth_notewise", "notewise third-harmonic errors", "among_fp", "among_detected")
    + _pair("repeated_notes", "repeated notes", "among_fp", "among_detected")
    + _pair("merged_notes", "merged notes", "among_fn", "among_targets")
    + [("rhythm_flatness_output", "rhythm histogram spectral flatness", AMBIVALENT),
       ("rhythm_flatness_difference", "rhythm histogram spectral flatness", AMBIVALENT)]
    + [(f"rhythm_drift_{s}", "rhythm dispersion", NO) for s in ("mean", "min", "max")]
    + [(f"rhythm_std_change_{s}", "rhythm dispersion", AMBIVALENT)
       for s in ("mean", "min", "max")]
    + _stats("roughness", "consonance")
    + _stats("harmonicity", "consonance")
    + _stats("familiarity", "consonance")
    + _stats("polyphony_diff", "polyphony level", NO)
)
FEATURE_NAMES = tuple(name for name, _, _ in SCHEMA)
FEATURE_GROUPS = {name: group for name, group, _ in SCHEMA}
HIGHER_IS_BETTER = {name: better for name, _, better in SCHEMA}


@dataclass(frozen=True)
class EvalConfig:
    """Every tunable of the metric suite; defaults give the reference settings."""

    frame_duration: float = 0.010
    onset_tolerance: float = 0.050
    offset_ratio: float = 0.2
    offset_min_tolerance: float = 0.050
    pedal_threshold: int = 64
    output_pedal: bool = False
    voice_min_duration: float = 0.5
    loudness_window: float = 1.0
    ratio_window: float = 0.050
    decay_intercept: float = 0.050532
    decay_slope: float = 0.021292
    decay_horizon: float = 1.0
    profile_threshold: float = 0.1
    lookback: float = 0.050
    overlap_threshold: float = 0.8
    flatness_epsilon: float = 1e-5
    fine_edges: tuple = tuple(FINE_EDGES)
    coarse_edges: tuple = tuple(COARSE_EDGES)
    kmeans_tol: float = 1e-9
    kmeans_max_iter: int = 100
    roughness_harmonics: int = 11
    harmonicity_harmonics: int = 12
    harmonicity_rolloff: float = 0.75
    harmonicity_sigma: float = 6.83
    chord_table: Optional[str] = None
    seed: int = 0

    @property
    def lookback_frames(self) -> int:
        return int(round(self.lookback / self.frame_duration))

    @property
    def tolerances(self) -> dict:
        return dict(onset_tolerance=self.onset_tolerance, offset_ratio=self.offset_ratio,
                    offset_min_tolerance=self.offset_min_tolerance)

    def replace(self, **changes) -> "EvalConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _coerce(value: str, default):
    if isinstance(default, bool):
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    if isinstance(default, tuple):
        return tuple(float(v) for v in value.replace(",", " ").split())
    return value or None


def parse_config(text: str, base: EvalConfig = None) -> EvalConfig:
    """``key = value`` lines (``#`` comments) overriding ``base``."""
    base = base or EvalConfig()
    defaults = base.as_dict()
    changes = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {number}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in defaults:
            raise ValueError(f"config line {number}: unknown key {key!r}")
        template = defaults[key] if defaults[key] is not None else ""
        changes[key] = _coerce(value, template)
    return base.replace(**changes)


def read_config(path, base: EvalConfig = None) -> EvalConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), base)


@dataclass
class FeatureVector:
    """Feature values keyed by name (None when undefined) plus run metadata."""

    values: dict
    metadata: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.values[name]

    def to_dict(self, annotated: bool = True) -> dict:
        if annotated:
            features = {k: {"value": self.values[k], "group": FEATURE_GROUPS[k],
                            "higher_is_better": HIGHER_IS_BETTER[k]}
                        for k in FEATURE_NAMES}
        else:
            features = {k: self.values[k] for k in FEATURE_NAMES}
        return {"features": features, "metadata": self.metadata}

    def to_json(self, indent=2, annotated: bool = True) -> str:
        return json.dumps(self.to_dict(annotated), indent=indent, allow_nan=False)

    def csv_row(self) -> list:
        return ["" if self.values[k] is None else repr(self.values[k]) for k in FEATURE_NAMES]


def schema_document() -> dict:
    """JSON Schema of the ``evaluate --json`` output."""
    entry = {
        "type": "object",
        "properties": {
            "value": {"type": ["number", "null"]},
            "group": {"type": "string"},
            "higher_is_better": {"enum": [YES, NO, AMBIVALENT]},
        },
        "required": ["value", "group", "higher_is_better"],
        "additionalProperties": False,
    }
    features = {}
    for name in FEATURE_NAMES:
        features[name] = dict(entry, description=f"{FEATURE_GROUPS[name]}; "
                              f"higher is better: {HIGHER_IS_BETTER[name]}")
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "amt_metrics feature vector",
        "type": "object",
        "properties": {
            "features": {"type": "object", "properties": features,
                         "required": list(FEATURE_NAMES), "additionalProperties": False},
            "metadata": {"type": "object"},
        },
        "required": ["features", "metadata"],
    }


def _clean(value):
    if value is None:
        return None
    value = float(value)
    if not np.isfinite(value):
        return None
    return value


def evaluate_pair(target: NoteList, output: NoteList,
                  config: EvalConfig = None) -> FeatureVector:
    """Compute every feature for one (target, output) pair."""
    cfg = config or EvalConfig()
    out = output
    if cfg.output_pedal:
        out = apply_sustain(out, threshold=cfg.pedal_threshold)
    out = NoteList(out.notes, (), OUTPUT)
    raw = NoteList(target.notes, target.pedal, TARGET)
    sounding = apply_sustain(raw, threshold=cfg.pedal_threshold)

    total = max(sounding.duration, out.duration)
    dt = cfg.frame_duration
    roll_sounding = notes_to_roll(NoteList(sounding.notes), total_duration=total,
                                  frame_duration=dt)
    roll_raw = notes_to_roll(NoteList(raw.notes), total_duration=total, frame_duration=dt)
    roll_out = notes_to_roll(out, total_duration=total, frame_duration=dt)

    onset_match = max_match(sounding, out, ONSET, **cfg.tolerances)
    offset_match = max_match(sounding, out, ONSET_OFFSET, **cfg.tolerances)

    v = {}

    def put_prf(prefix, counts):
        r = prf(counts)
        v[f"{prefix}_precision"] = r.precision
        v[f"{prefix}_recall"] = r.recall
        v[f"{prefix}_f_measure"] = r.f_measure

    put_prf("framewise", framewise_counts(roll_sounding, roll_out))
    put_prf("onset", matching_counts(onset_match))
    put_prf("onset_offset", matching_counts(offset_match))
    for which in (HIGHEST, LOWEST):
        put_prf(f"{which}_voice_framewise", voice_framewise_counts(roll_raw, roll_out, which))
        put_prf(f"{which}_voice_notewise",
                voice_notewise_counts(raw, out, onset_match, which, cfg.voice_min_duration))

    if target.has_velocities:
        decay = DecayModel(cfg.decay_intercept, cfg.decay_slope, cfg.decay_horizon)
        v["loudness_fn_normalized"] = normalized_fn_loudness(
            sounding, onset_match, cfg.loudness_window)
        v["loudness_fn_ratio"] = fn_loudness_ratio(sounding, onset_match, cfg.ratio_window, decay)
    else:
        logger.warning("target notes lack velocities; loudness features left empty")
        v["loudness_fn_normalized"] = v["loudness_fn_ratio"] = None

    profile = build_pitch_profile(roll_raw, cfg.profile_threshold)
    binary = out_of_key_binary(out, onset_match, profile)
    v["out_of_key_binary_among_fp"] = binary.among_errors
    v["out_of_key_binary_among_detected"] = binary.among_all
    nonbinary = out_of_key_nonbinary(out, onset_match, profile)
    v["out_of_key_disagreement_fp_mean"] = nonbinary.among_errors
    v["out_of_key_disagreement_fp_mean_normalized"] = nonbinary.normalized

    for name, interval in (("semitone", SEMITONE), ("octave", OCTAVE), ("twelfth", TWELFTH)):
        frame = specific_pitch_framewise(roll_sounding, roll_out, interval, cfg.lookback_frames)
        v[f"{name}_framewise_among_fp"] = frame.among_errors
        v[f"{name}_framewise_among_frames"] = frame.among_all
        note = specific_pitch_notewise(sounding, out, onset_match, interval,
                                       cfg.overlap_threshold)
        v[f"{name}_notewise_among_fp"] = note.among_errors
        v[f"{name}_notewise_among_detected"] = note.among_all

    rep = repeated_notes(sounding, out, onset_match, cfg.overlap_threshold)
    v["repeated_notes_among_fp"] = rep.among_errors
    v["repeated_notes_among_detected"] = rep.among_all
    mer = merged_notes(sounding, out, onset_match, cfg.overlap_threshold)
    v["merged_notes_among_fn"] = mer.among_errors
    v["merged_notes_among_targets"] = mer.among_all

    flat = flatness_features(raw, out, np.asarray(cfg.fine_edges), cfg.flatness_epsilon)
    v["rhythm_flatness_output"] = flat.output
    v["rhythm_flatness_difference"] = flat.difference
    disp = rhythm_dispersion(raw, out, cfg.kmeans_tol, cfg.kmeans_max_iter,
                             np.asarray(cfg.coarse_edges))
    for key in ("drift_mean", "drift_min", "drift_max",
                "std_change_mean", "std_change_min", "std_change_max"):
        v[f"rhythm_{key}"] = getattr(disp, key) if disp is not None else None

    table = load_chord_table(cfg.chord_table)
    cons = consonance_features(out, table, cfg.roughness_harmonics,
                               cfg.harmonicity_harmonics, cfg.harmonicity_rolloff,
                               cfg.harmonicity_sigma)
    for name in ("roughness", "harmonicity", "familiarity"):
        stats = getattr(cons, name)
        for s in ("mean", "std", "min", "max"):
            v[f"{name}_{s}"] = getattr(stats, s) if stats is not None else None

    poly = polyphony_features(roll_sounding, roll_out)
    for s in ("mean", "std", "min", "max"):
        v[f"polyphony_diff_{s}"] = getattr(poly, s) if poly is not None else None

    values = {k: _clean(v[k]) for k in FEATURE_NAMES}
    metadata = {
        "version": __version__,
        "seed": cfg.seed,
        "n_target_notes": len(target),
        "n_output_notes": len(output),
        "n_frames": roll_out.n_frames,
        "consonance": dict(CONSTANTS, harmonicity_harmonics=cfg.harmonicity_harmonics,
                           harmonicity_rolloff=cfg.harmonicity_rolloff,
                           harmonicity_sigma_cents=cfg.harmonicity_sigma,
                           roughness_harmonics=cfg.roughness_harmonics,
                           chord_table=cfg.chord_table or "bundled",
                           familiarity_available=table is not None),
    }
    return FeatureVector(values, metadata)


def evaluate_files(target_path, output_path, config: EvalConfig = None) -> FeatureVector:
    target = load_notes(target_path, TARGET, require_velocity=False)
    output = load_notes(output_path, OUTPUT)
    return evaluate_pair(target, output, config)
