# %% [markdown]
"""
Melody, bass and the salience of mistakes
=========================================

The highest and lowest sounding target notes stand in for melody and
bass.  Missed notes are rated by how loud they were, both against their
neighbourhood and against whatever was sounding at the time.
"""

# %%
from amt_metrics.matching import max_match
from amt_metrics.model import make_notes, notes_to_roll
from amt_metrics.salience import (build_pitch_profile, decay_rate, fn_loudness_ratio,
                                  normalized_fn_loudness, out_of_key_binary,
                                  polyphony_features)
from amt_metrics.voice import HIGHEST, LOWEST, extract_voice_notes, voice_notewise_counts

melody = [(0.75 * k, 0.75 * k + 0.7, p, 90) for k, p in enumerate([72, 74, 76, 77, 79, 77, 76, 74])]
chords = ([(0.0, 3.0, p, 50) for p in (48, 55, 64)]
          + [(3.0, 6.0, p, 50) for p in (43, 55, 62)])
target = make_notes(melody + chords, role="target")

for which in (HIGHEST, LOWEST):
    voice = extract_voice_notes(target, which)
    print(which, sorted(target[i].pitch for i in voice.members))

# %% [markdown]
"""
A transcription that drops the quiet inner voice and adds a wrong note.
"""

# %%
output = make_notes([n[:3] for n in melody] + [(0, 3, 48), (3, 6, 43), (1.0, 1.5, 61)])
m = max_match(target, output)
print("missed pitches:", [target[i].pitch for i in m.false_negatives])
print("melody notes:", voice_notewise_counts(target, output, m, HIGHEST))
print("normalised loudness of misses:", round(normalized_fn_loudness(target, m), 3))
print("loudness ratio of misses:", round(fn_loudness_ratio(target, m), 3))

# %%
print("decay rate per second at A0, C4, C8:",
      [round(decay_rate(p), 6) for p in (21, 60, 108)])

# %%
span = max(target.duration, output.duration)
ref = notes_to_roll(target, total_duration=span)
profile = build_pitch_profile(ref)
print("in-key pitch classes:", sorted(profile.in_key))
print("out-of-key extras:", out_of_key_binary(output, m, profile))
print("polyphony difference:", polyphony_features(ref, notes_to_roll(output, total_duration=span)))
