"""Regenerate the chord-type count table used by corpus familiarity.

Every vertical sonority of every Bach chorale bundled with music21 is
reduced to its bass-relative pitch-class-set type and counted.  Any other
labelled corpus can be swapped in through ``--source`` as a text file with
one chord per line, written as space-separated MIDI pitches.

    python scripts/build_chord_table.py -o src/amt_metrics/data/chord_types.csv

music21 is only needed for the default corpus.
"""
import argparse
import collections
import csv
import sys

from amt_metrics.consonance import chord_type_id


def iter_bach_chords():
    from music21 import corpus

    for path in corpus.getComposer("bach"):
        name = str(path)
        if not name.endswith((".mxl", ".xml", ".musicxml", ".krn")):
            continue
        try:
            score = corpus.parse(path)
        except Exception as exc:  # a handful of files in the corpus are broken
            print(f"skipping {name}: {exc}", file=sys.stderr)
            continue
        for ch in score.chordify().recurse().getElementsByClass("Chord"):
            pitches = [p.midi for p in ch.pitches]
            if pitches:
                yield pitches


def iter_text_chords(path):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                yield [int(tok) for tok in line.split()]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("-o", "--out", required=True)
    parser.add_argument("--source", help="text chord file instead of the Bach chorales")
    args = parser.parse_args(argv)

    chords = iter_text_chords(args.source) if args.source else iter_bach_chords()
    counts = collections.Counter(chord_type_id(c) for c in chords)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["chord_type_id", "count"])
        for type_id, count in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
            writer.writerow([type_id, count])
    print(f"{sum(counts.values())} chords, {len(counts)} types -> {args.out}")


if __name__ == "__main__":
    main()
