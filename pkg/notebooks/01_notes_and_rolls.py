# %% [markdown]
"""
Note lists, sustain and piano rolls
===================================

Every metric starts from a list of ``(onset, offset, pitch, velocity)``
notes.  Targets come with velocities and sustain pedal events, outputs
usually do not.
"""

# %%
import numpy as np

from amt_metrics.ingest import format_notes_text, parse_notes_text
from amt_metrics.model import WITH_PEDAL, PedalEvent, apply_sustain, make_notes, notes_to_roll

target = make_notes(
    [(0.0, 0.4, 60, 80), (0.5, 0.9, 64, 70), (1.0, 1.4, 67, 75), (1.2, 2.0, 60, 60)],
    role="target",
    pedal=[PedalEvent(0.3, 127), PedalEvent(1.1, 0)],
)
print(format_notes_text(target))

# %% [markdown]
"""
With the pedal down from 0.3 s to 1.1 s the first two notes ring until
the release.  The sounding version is what framewise metrics compare.
"""

# %%
sounding = apply_sustain(target)
for raw, held in zip(target, sounding):
    print(f"pitch {raw.pitch}: offset {raw.offset:.2f} -> {held.offset:.2f}")

# %%
roll = notes_to_roll(target, pedal_mode=WITH_PEDAL)
print("roll shape (pitches, 10 ms frames):", roll.frames.shape)
active = np.flatnonzero(roll.frames.any(axis=1)) + 21
print("active pitches:", active.tolist())

# %% [markdown]
"""
The text format is one note per line.  Bad lines are reported with their
line number.
"""

# %%
try:
    parse_notes_text("0.0 0.5 60 90\n0.5 oops 62 80\n", role="target")
except ValueError as exc:
    print(exc)
