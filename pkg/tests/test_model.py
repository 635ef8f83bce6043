import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amt_metrics.model import (OUTPUT, TARGET, WITH_PEDAL, Note, NoteList, PedalEvent,
                               apply_sustain, frame_index, make_notes, notes_to_roll,
                               roll_to_intervals)

from oracles import random_notes, roll_oracle


def test_note_validation():
    with pytest.raises(ValueError):
        Note(1.0, 1.0, 60)
    with pytest.raises(ValueError):
        Note(-0.1, 1.0, 60)
    with pytest.raises(ValueError):
        Note(0.0, 1.0, 20)
    with pytest.raises(ValueError):
        Note(0.0, 1.0, 60, 0)
    with pytest.raises(ValueError):
        Note(0.0, float("inf"), 60)


def test_note_coerces_numpy_scalars():
    n = Note(np.float64(0.5), np.float32(1.0), np.int64(60), np.int16(80))
    assert type(n.onset) is float and type(n.pitch) is int and type(n.velocity) is int


def test_notelist_sorted_by_onset_then_pitch():
    notes = make_notes([(1.0, 2.0, 60), (0.0, 1.0, 64), (0.0, 1.0, 62)])
    assert [(n.onset, n.pitch) for n in notes] == [(0.0, 62), (0.0, 64), (1.0, 60)]
    assert notes.duration == 2.0


def test_notelist_velocity_flags():
    assert make_notes([(0, 1, 60, 80)]).has_velocities
    assert not make_notes([(0, 1, 60)], role=TARGET).has_velocities


def test_sustain_extends_to_release():
    notes = make_notes([(0, 1, 60)], pedal=[PedalEvent(0.5, 127), PedalEvent(2.0, 0)])
    assert apply_sustain(notes).notes[0].offset == 2.0


def test_sustain_without_pedal_is_identity():
    notes = make_notes([(0, 1, 60)])
    assert apply_sustain(notes).notes == notes.notes


def test_sustain_clipped_at_restrike():
    notes = make_notes([(0, 1, 60), (1.5, 2, 60)],
                       pedal=[PedalEvent(0.2, 127), PedalEvent(3.0, 0)])
    assert [n.offset for n in apply_sustain(notes)] == [1.5, 3.0]


def test_sustain_released_before_offset_has_no_effect():
    notes = make_notes([(0, 1, 60)], pedal=[PedalEvent(0.2, 127), PedalEvent(0.6, 0)])
    assert apply_sustain(notes).notes[0].offset == 1.0


def test_sustain_threshold():
    notes = make_notes([(0, 1, 60)], pedal=[PedalEvent(0.2, 63), PedalEvent(2.0, 0)])
    assert apply_sustain(notes).notes[0].offset == 1.0
    notes = make_notes([(0, 1, 60), (0, 3, 40)], pedal=[PedalEvent(0.2, 64)])
    assert apply_sustain(notes).notes[1].offset == 3.0  # never released: held to the end


def _simulate_sustain(notes, step=0.001):
    """Advance key and pedal state millisecond by millisecond."""
    end = notes.duration
    pedal = sorted(notes.pedal, key=lambda e: e.time)
    offsets = []
    for i, n in enumerate(notes):
        t = n.offset
        later = [m.onset for m in notes if m.pitch == n.pitch and m.onset > n.onset]
        horizon = max([end] + [e.time for e in pedal]) + step

        def down(x):
            state = False
            for e in pedal:
                if e.time <= x:
                    state = e.value >= 64
            return state

        if not down(t):
            offsets.append(n.offset)
            continue
        while t < horizon and down(t):
            t = round(t + step, 6)
        if t >= horizon:  # never released
            t = end
        if later:
            t = min(t, min(later))
        offsets.append(max(n.offset, t))
    return offsets


def test_sustain_matches_event_simulation():
    rng = np.random.default_rng(3)
    for _ in range(100):
        base = random_notes(rng, 6, pitches=(60, 62), step_ms=10)
        times = sorted(set(int(x) * 10 for x in rng.integers(0, 250, size=4)))
        pedal = [PedalEvent(t / 1000, int(v)) for t, v in
                 zip(times, rng.choice([0, 127], size=len(times)))]
        notes = NoteList(base.notes, tuple(pedal), TARGET)
        got = [n.offset for n in apply_sustain(notes)]
        assert np.allclose(got, _simulate_sustain(notes), atol=1e-6)


def test_roll_frames_examples():
    roll = notes_to_roll(make_notes([(0.0, 0.03, 60)]))
    assert np.flatnonzero(roll.frames[60 - 21]).tolist() == [0, 1, 2]
    roll = notes_to_roll(make_notes([(0.005, 0.015, 60)]))
    assert np.flatnonzero(roll.frames[60 - 21]).tolist() == [1]
    roll = notes_to_roll(make_notes([]), total_duration=1.0)
    assert roll.frames.shape == (88, 100) and not roll.frames.any()


def test_frame_index_snaps_float_noise():
    assert frame_index(0.07) == 7
    assert frame_index(0.1 + 0.2) == 30


def test_roll_matches_membership_oracle():
    rng = np.random.default_rng(0)
    for _ in range(50):
        notes = random_notes(rng, 10, pitches=(21, 108))
        roll = notes_to_roll(notes, total_duration=3.0)
        assert np.array_equal(roll.frames, roll_oracle(notes, roll.n_frames))


def test_roll_with_pedal_mode():
    notes = make_notes([(0, 0.05, 60)], pedal=[PedalEvent(0.0, 127), PedalEvent(0.1, 0)])
    assert notes_to_roll(notes, WITH_PEDAL).frames[39].sum() == 10
    assert notes_to_roll(notes).frames[39].sum() == 5


def test_roll_rejects_short_duration():
    with pytest.raises(ValueError):
        notes_to_roll(make_notes([(0, 1, 60)]), total_duration=0.5)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 100), st.integers(1, 50), st.integers(21, 108)),
                max_size=8))
def test_roll_round_trip_on_frame_grid(rows):
    # notes on the frame grid that never touch on the same pitch survive a round trip
    kept, busy = [], {}
    for start, length, pitch in rows:
        end = start + length
        if any(not (end < s or start > e) for s, e in busy.get(pitch, [])):
            continue
        busy.setdefault(pitch, []).append((start, end))
        kept.append((start / 100, end / 100, pitch))
    roll = notes_to_roll(make_notes(kept, role=OUTPUT))
    got = sorted((p, round(a, 6), round(b, 6)) for p, a, b in roll_to_intervals(roll))
    assert got == sorted((p, round(a, 6), round(b, 6)) for a, b, p in kept)
