import numpy as np
import pytest

from amt_metrics.confusions import (OCTAVE, SEMITONE, TWELFTH, merged_notes,
                                    repeated_notes, specific_pitch_framewise,
                                    specific_pitch_mask, specific_pitch_notewise)
from amt_metrics.matching import max_match
from amt_metrics.model import PianoRoll, make_notes

from oracles import (fragment_oracle, jitter_notes, random_notes, random_roll,
                     specific_cell_oracle, specific_note_oracle)


def _roll(rows_frames, n_frames=20):
    frames = np.zeros((88, n_frames), dtype=bool)
    for pitch, frames_on in rows_frames:
        frames[pitch - 21, frames_on] = True
    return PianoRoll(frames)


def test_framewise_identity():
    roll = _roll([(60, slice(0, 10))])
    assert specific_pitch_framewise(roll, roll, OCTAVE) == (0.0, None)


def test_framewise_octave_construction():
    ref = _roll([(60, slice(0, 10))])
    est = _roll([(72, slice(0, 10))])
    assert specific_pitch_mask(ref, est, OCTAVE).sum() == 10
    assert specific_pitch_framewise(ref, est, OCTAVE) == (10 / 20, 1.0)


def test_framewise_lookback_excludes_recent_offsets():
    # target 72 ends at frame 5; output 72 starting at frame 8 is within 5 frames
    ref = _roll([(60, slice(0, 20)), (72, slice(0, 5))])
    est = _roll([(72, slice(8, 12))])
    mask = specific_pitch_mask(ref, est, OCTAVE)
    assert np.flatnonzero(mask[72 - 21]).tolist() == [10, 11]


def test_twelfth_only_below():
    ref = _roll([(60, slice(0, 10))])
    above = _roll([(79, slice(0, 10))])
    below = _roll([(41, slice(0, 10))])
    assert specific_pitch_framewise(ref, above, TWELFTH).among_all == 0.5
    assert specific_pitch_framewise(ref, below, TWELFTH) == (0.0, 0.0)
    t = make_notes([(0, 1, 60)])
    for pitch, expected in ((79, 1), (41, 0)):
        o = make_notes([(0, 1, pitch)])
        r = specific_pitch_notewise(t, o, max_match(t, o), TWELFTH)
        assert r.among_errors == expected


@pytest.mark.parametrize("interval", [SEMITONE, OCTAVE, TWELFTH])
def test_framewise_against_cell_oracle(interval):
    rng = np.random.default_rng(interval)
    for _ in range(30):
        ref = random_roll(rng, n_frames=40, density=0.04)
        est = random_roll(rng, n_frames=40, density=0.04)
        got = specific_pitch_mask(PianoRoll(ref), PianoRoll(est), interval).sum()
        assert got == specific_cell_oracle(ref, est, interval)


def test_notewise_examples():
    t = make_notes([(0, 1, 60)])
    o = make_notes([(0, 1, 72)])
    assert specific_pitch_notewise(t, o, max_match(t, o), OCTAVE) == (1.0, 1.0)
    t = make_notes([(0.5, 2, 60)])
    assert specific_pitch_notewise(t, o, max_match(t, o), OCTAVE) == (0.0, 0.0)


@pytest.mark.parametrize("interval", [SEMITONE, OCTAVE, TWELFTH])
def test_notewise_against_predicate_oracle(interval):
    rng = np.random.default_rng(100 + interval)
    for _ in range(40):
        t = random_notes(rng, 8, pitches=(55, 70))
        o = jitter_notes(rng, t, pitch_shift=(0, interval, -interval), max_shift_ms=30)
        m = max_match(t, o)
        r = specific_pitch_notewise(t, o, m, interval)
        count = specific_note_oracle(list(t), list(o), m.false_positives, interval)
        assert r.among_all == pytest.approx(count / len(o) if len(o) else 0.0)


def test_repeated_note_canonical():
    t = make_notes([(0, 2, 60)])
    o = make_notes([(0, 0.9, 60), (1.0, 2.0, 60)])
    m = max_match(t, o)
    assert m.pairs == ((0, 0),)
    # overlap is measured on the fragment's own length; both lie inside the target
    assert repeated_notes(t, o, m) == (0.5, 1.0)
    assert repeated_notes(t, t, max_match(t, t)) == (0.0, None)


def test_merged_note_canonical():
    t = make_notes([(0, 0.9, 60), (1.0, 2.0, 60)])
    o = make_notes([(0, 2, 60)])
    m = max_match(t, o)
    assert merged_notes(t, o, m) == (0.5, 1.0)
    assert merged_notes(t, t, max_match(t, t)) == (0.0, None)


def _fragment(rng, targets):
    """Split about half of the target notes in two."""
    out = []
    for n in targets:
        if rng.random() < 0.5 and n.offset - n.onset > 0.1:
            cut = round(n.onset + (n.offset - n.onset) * rng.uniform(0.3, 0.7), 3)
            out += [(n.onset, round(cut - 0.01, 3), n.pitch), (cut, n.offset, n.pitch)]
        else:
            out.append((n.onset, n.offset, n.pitch))
    return make_notes(out)


def test_repeated_and_merged_against_oracle():
    rng = np.random.default_rng(12)
    for _ in range(60):
        t = random_notes(rng, 6, pitches=(60, 62), min_ms=100, max_ms=900)
        o = _fragment(rng, t)
        m = max_match(t, o)
        rep = repeated_notes(t, o, m)
        assert rep.among_all * len(o) == pytest.approx(
            fragment_oracle(m.false_positives, list(o), list(t)))
        # merging is fragmentation seen from the other side
        m2 = max_match(o, t)
        mer = merged_notes(o, t, m2)
        assert mer.among_all * len(o) == pytest.approx(
            fragment_oracle(m2.false_negatives, list(o), list(t)))
