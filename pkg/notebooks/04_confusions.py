# %% [markdown]
"""
Typical confusions
==================

Extra notes are often a semitone, an octave or a twelfth (19 semitones)
away from a real note.  Long notes get split into repeated notes, and
repeated notes get merged into one.
"""

# %%
from amt_metrics.confusions import (OCTAVE, SEMITONE, TWELFTH, merged_notes, repeated_notes,
                                    specific_pitch_framewise, specific_pitch_notewise)
from amt_metrics.matching import max_match
from amt_metrics.model import make_notes, notes_to_roll

target = make_notes([(0, 1, 48, 80), (0, 1, 60, 80), (1, 2, 62, 80)], role="target")
output = make_notes([(0, 1, 48), (0, 1, 60), (0, 1, 67), (0.05, 0.95, 72), (1, 2, 62),
                     (1, 2, 63)])
m = max_match(target, output)
for name, interval in (("semitone", SEMITONE), ("octave", OCTAVE), ("twelfth", TWELFTH)):
    print(f"{name:8s} notewise {specific_pitch_notewise(target, output, m, interval)}")

# %% [markdown]
"""
The twelfth only counts when the real note lies below, as it would for a
harmonic mistaken for a note.  Here 67 sits 19 semitones above 48.
"""

# %%
ref, est = notes_to_roll(target), notes_to_roll(output)
print("twelfth framewise", specific_pitch_framewise(ref, est, TWELFTH))

# %%
long_note = make_notes([(0, 2, 60, 80)], role="target")
split = make_notes([(0, 0.9, 60), (1.0, 2.0, 60)])
print("repeated:", repeated_notes(long_note, split, max_match(long_note, split)))
print("merged:", merged_notes(split, long_note, max_match(split, long_note)))
