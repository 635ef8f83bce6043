# %% [markdown]
"""
Note matching and the benchmark scores
======================================

Output notes are paired with target notes by a maximum bipartite
matching.  A pair is allowed when the pitches agree and the onsets are
within 50 ms; the stricter criterion also bounds the offset difference.
"""

# %%
from amt_metrics.benchmark import framewise_counts, notewise_prf, prf
from amt_metrics.matching import ONSET, ONSET_OFFSET, max_match
from amt_metrics.model import make_notes, notes_to_roll

target = make_notes([(0.00, 0.50, 60, 80), (0.50, 1.00, 62, 80), (1.00, 2.00, 64, 80),
                     (1.00, 2.00, 48, 60)], role="target")
output = make_notes([(0.02, 0.48, 60), (0.53, 0.70, 62), (1.04, 1.95, 64), (1.00, 2.00, 60)])

# %%
for criterion in (ONSET, ONSET_OFFSET):
    m = max_match(target, output, criterion)
    print(criterion, "pairs:", m.pairs, "missed:", m.false_negatives,
          "extra:", m.false_positives)
    print("   ", notewise_prf(target, output, criterion))

# %% [markdown]
"""
Framewise scores compare 10 ms piano-roll cells.  Both rolls must cover
the same number of frames, so the output roll is padded to the target
length.
"""

# %%
ref = notes_to_roll(target)
est = notes_to_roll(output, total_duration=2.0)
counts = framewise_counts(ref, est)
print(counts, prf(counts))
