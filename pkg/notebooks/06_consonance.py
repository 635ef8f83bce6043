# %% [markdown]
"""
Consonance of the transcription
===============================

The output is cut wherever a note starts or stops.  Each chord is rated
for roughness, harmonicity and how common its chord type is in a chorale
corpus, and the ratings are averaged with the segment lengths as weights.
"""

# %%
from amt_metrics.consonance import (chord_type_id, consonance_features, corpus_familiarity,
                                    default_chord_table, harmonicity, roughness_hutch78)

table = default_chord_table()
for chord in ([60, 64, 67], [60, 63, 67], [60, 61], [60, 66], [60, 64, 67, 70]):
    print(f"{chord_type_id(chord):10s} roughness {roughness_hutch78(chord):.3f}  "
          f"harmonicity {harmonicity(chord):.3f}  "
          f"familiarity {corpus_familiarity(chord, table):.2f}")

# %%
from amt_metrics.model import make_notes

clean = make_notes([(0, 1, p) for p in (48, 64, 67)] + [(1, 2, p) for p in (43, 62, 67)])
smeared = make_notes(list((n.onset, n.offset, n.pitch) for n in clean)
                     + [(0.2, 0.8, 61), (1.2, 1.9, 68)])
for name, notes in (("clean", clean), ("with wrong notes", smeared)):
    f = consonance_features(notes, table)
    print(f"{name:18s} roughness {f.roughness.mean:.3f}  harmonicity {f.harmonicity.mean:.3f}"
          f"  familiarity {f.familiarity.mean:.2f}")
