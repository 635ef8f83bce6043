import math

import numpy as np
import pytest

from amt_metrics.consonance import (ChordTable, EventSegment, chord_type_id,
                                    consonance_features, corpus_familiarity,
                                    default_chord_table, event_segments, harmonicity,
                                    load_chord_table, pitch_class_spectrum,
                                    read_chord_table, roughness_hutch78, weighted_stats)
from amt_metrics.model import make_notes

from oracles import random_notes, roughness_direct


def test_roughness_orders_dissonance():
    assert roughness_hutch78({60, 61}) > roughness_hutch78({60, 64, 67})
    assert roughness_hutch78({60, 61, 62}) > roughness_hutch78({60, 61})
    assert roughness_hutch78({60, 67}) < roughness_hutch78({60, 66})


def test_roughness_set_semantics():
    assert roughness_hutch78([60, 60]) == roughness_hutch78([60])
    with pytest.raises(ValueError):
        roughness_hutch78([])


def test_roughness_against_direct_sum():
    assert roughness_hutch78({60}) == pytest.approx(roughness_direct([60]), rel=1e-9)
    rng = np.random.default_rng(0)
    for _ in range(100):
        chord = rng.choice(np.arange(36, 85), size=int(rng.integers(2, 4)), replace=False)
        assert roughness_hutch78(chord) == pytest.approx(roughness_direct(chord), rel=1e-9)
    # octaves make partials coincide
    for chord in ([48, 60], [48, 60, 72], [48, 55, 60]):
        assert roughness_hutch78(chord) == pytest.approx(roughness_direct(chord), rel=1e-9)


def test_harmonicity_single_tone_is_maximal():
    assert harmonicity([60]) == pytest.approx(1.0, abs=1e-12)
    spec = pitch_class_spectrum([60])
    corr = [np.dot(spec, np.roll(spec, k)) for k in range(1200)]
    assert int(np.argmax(corr)) == 0


def test_harmonicity_transposition_invariant():
    rng = np.random.default_rng(1)
    for _ in range(30):
        chord = rng.choice(np.arange(40, 80), size=int(rng.integers(1, 5)), replace=False)
        k = int(rng.integers(-12, 13))
        assert harmonicity(chord) == pytest.approx(harmonicity(chord + k), abs=1e-9)


def test_harmonicity_prefers_triads_to_clusters():
    assert harmonicity([60, 64, 67]) > harmonicity([60, 61, 62])


def test_harmonicity_matches_brute_force_shift_search():
    chord = [60, 63, 67, 70]
    spec, template = pitch_class_spectrum(chord), pitch_class_spectrum([60])
    best = max(np.dot(spec, np.roll(template, k)) for k in range(1200))
    expected = best / (np.linalg.norm(spec) * np.linalg.norm(template))
    assert harmonicity(chord) == pytest.approx(expected, rel=1e-9)


def test_chord_type_ids():
    assert chord_type_id([60, 64, 67]) == "0-4-7"
    assert chord_type_id([64, 67, 72]) == "0-3-8"
    assert chord_type_id([48, 60, 64]) == "0-4"


def test_familiarity_toy_table():
    table = ChordTable({"0-4-7": 9, "0-1-2": 1}, 10)
    assert corpus_familiarity([60, 64, 67], table) == pytest.approx(math.log(10 / 2058))
    assert corpus_familiarity([60, 61, 62], table) == pytest.approx(math.log(2 / 2058))
    assert corpus_familiarity([60, 63, 67], table) == pytest.approx(math.log(1 / 2058))


def test_familiarity_monotone_in_counts():
    rng = np.random.default_rng(2)
    for _ in range(50):
        a, b = sorted(rng.integers(0, 1000, 2))
        table = ChordTable({"0-4-7": int(b), "0-1-2": int(a)}, int(a + b))
        fa, fb = corpus_familiarity([60, 61, 62], table), corpus_familiarity([60, 64, 67], table)
        assert fb >= fa and (fb > fa) == (b > a)


def test_chord_table_files(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("chord_type_id,count\n0-4-7,3\n0-3-7,1\n")
    table = read_chord_table(path)
    assert table.counts == {"0-4-7": 3, "0-3-7": 1} and table.total == 4
    path.write_text("type,n\n0-4-7,3\n")
    with pytest.raises(ValueError, match="header"):
        read_chord_table(path)
    assert load_chord_table(tmp_path / "missing.csv") is None


def test_bundled_table_ranks_major_triad_first():
    table = default_chord_table()
    assert table is not None and table.total > 1000
    assert max(table.counts, key=table.counts.get) == "0-4-7"


def test_event_segments_examples():
    assert event_segments(make_notes([(0, 1, 60)])) == [EventSegment(0.0, 1.0, frozenset({60}))]
    segs = event_segments(make_notes([(0, 2, 60), (1, 3, 64)]))
    assert [(s.start, s.end, set(s.chord)) for s in segs] == [
        (0, 1, {60}), (1, 2, {60, 64}), (2, 3, {64})]


def test_event_segments_against_sweep():
    rng = np.random.default_rng(3)
    for _ in range(30):
        notes = random_notes(rng, 6, pitches=(50, 70))
        bounds = sorted({x for n in notes for x in (n.onset, n.offset)})
        expected = []
        for a, b in zip(bounds, bounds[1:]):
            mid = (a + b) / 2
            expected.append((a, b, {n.pitch for n in notes if n.onset < mid < n.offset}))
        got = [(s.start, s.end, set(s.chord)) for s in event_segments(notes)]
        assert got == expected


def test_consonance_features_weighting():
    f = consonance_features(make_notes([(0, 2, 60), (0, 2, 64), (0, 2, 67)]))
    r = roughness_hutch78([60, 64, 67])
    assert f.roughness == pytest.approx((r, 0.0, r, r))
    assert f.familiarity is None
    f = consonance_features(make_notes([(0, 1, 60), (0, 1, 61), (1, 2, 60), (1, 2, 67)]))
    v1, v2 = harmonicity([60, 61]), harmonicity([60, 67])
    assert f.harmonicity.mean == pytest.approx((v1 + v2) / 2)
    assert consonance_features(make_notes([])) == (None, None, None)


def test_consonance_features_against_weighted_sums():
    rng = np.random.default_rng(4)
    table = ChordTable({"0-4-7": 5, "0-3": 2}, 7)
    for _ in range(10):
        notes = random_notes(rng, 5, pitches=(55, 75))
        segs = [s for s in event_segments(notes) if s.chord]
        w = np.array([s.end - s.start for s in segs])
        vals = np.array([corpus_familiarity(s.chord, table) for s in segs])
        mean = float((w * vals).sum() / w.sum())
        std = math.sqrt(float((w * (vals - mean) ** 2).sum() / w.sum()))
        f = consonance_features(notes, table)
        assert f.familiarity == pytest.approx((mean, std, vals.min(), vals.max()))
    assert weighted_stats([1.0, 3.0], [1.0, 1.0]) == (2.0, 1.0, 1.0, 3.0)
