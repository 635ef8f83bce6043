# %% [markdown]
"""
The full feature vector and batch runs
======================================

``evaluate_pair`` gathers every measure into one fixed, named vector.
``evaluate_batch`` runs a CSV manifest of file pairs and writes one row
per pair; the ``amt-metrics`` command wraps both.
"""

# %%
import tempfile
from pathlib import Path

import numpy as np

from amt_metrics.cli import evaluate_batch
from amt_metrics.features import EvalConfig, evaluate_pair
from amt_metrics.ingest import format_notes_text
from amt_metrics.model import make_notes
from amt_metrics.validation import synthetic_piece

rng = np.random.default_rng(3)
target, _ = synthetic_piece(rng)
rows = [(n.onset + rng.normal(0, 0.02), n.offset, n.pitch) for n in target
        if rng.random() > 0.1]
output = make_notes([(max(a, 0.0), max(b, a + 0.01), p) for a, b, p in rows])
fv = evaluate_pair(target, output)
for name in ("onset_f_measure", "highest_voice_notewise_f_measure", "loudness_fn_normalized",
             "rhythm_flatness_difference", "roughness_mean"):
    print(f"{name:34s} {fv[name]:.3f}")

# %%
with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    (tmp / "target.txt").write_text(format_notes_text(target))
    (tmp / "output.txt").write_text(format_notes_text(output))
    (tmp / "pairs.csv").write_text("target_path,output_path,pair_id\n"
                                   "target.txt,output.txt,piece\n"
                                   "target.txt,missing.txt,broken\n")
    results = evaluate_batch(tmp / "pairs.csv", tmp / "scores.csv", EvalConfig())
    print([(r["pair_id"], r["status"]) for r in results])
    print((tmp / "scores.csv").read_text().splitlines()[0][:80], "...")
