"""Command-line front end.

Subcommands::

    evaluate        --target F --output F [--json | --csv] [--config F] [--seed N]
    batch           --manifest F --out F [--jobs N] [--config F] [--seed N]
    validate-rhythm --corpus D --out F [--seed N] [--n-seeds K] [--grids D] [--tempo BPM]
    make-corpus     --out D [--n-pieces N] [--seed N]
    schema

Every evaluation tunable is also a flag (``--onset-tolerance 0.05``) and a
config-file key (``onset_tolerance = 0.05``); flags override the file.

Exit codes: 0 success, 1 usage, 2 unreadable or malformed input,
3 some batch rows failed.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .features import (FEATURE_NAMES, EvalConfig, _coerce, evaluate_files, read_config,
                       schema_document)
from .ingest import MidiParseError, NoteTextError
from .validation import format_report, validate_rhythm, write_synthetic_corpus

logger = logging.getLogger("amt_metrics")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_PARTIAL = 0, 1, 2, 3
INPUT_ERRORS = (MidiParseError, NoteTextError, OSError, ValueError)
MANIFEST_FIELDS = ("target_path", "output_path", "pair_id")
BATCH_COLUMNS = ("pair_id", "target_path", "output_path", "status", "error") + FEATURE_NAMES


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_config_flags(parser):
    group = parser.add_argument_group("metric settings")
    group.add_argument("--config", metavar="F", help="key=value settings file")
    group.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    for f in dataclasses.fields(EvalConfig):
        if f.name == "seed":
            continue
        group.add_argument("--" + f.name.replace("_", "-"), dest=f"cfg_{f.name}",
                           metavar="V", default=None)


def _build_config(args) -> EvalConfig:
    try:
        cfg = read_config(args.config) if args.config else EvalConfig()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{args.config}: {exc}") from exc
    defaults = cfg.as_dict()
    changes = {}
    for name, current in defaults.items():
        raw = getattr(args, f"cfg_{name}", None)
        if raw is not None:
            try:
                changes[name] = _coerce(raw, current if current is not None else "")
            except ValueError as exc:
                raise UsageError(f"--{name.replace('_', '-')}: {exc}") from exc
    if args.seed is not None:
        changes["seed"] = args.seed
    return cfg.replace(**changes)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="amt-metrics",
                     description="Musically informed metrics for piano transcriptions.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evaluate", help="evaluate one (target, output) pair")
    p.add_argument("--target", required=True, metavar="F")
    p.add_argument("--output", required=True, metavar="F")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")
    _add_config_flags(p)

    p = sub.add_parser("batch", help="evaluate every pair of a manifest")
    p.add_argument("--manifest", required=True, metavar="F",
                   help="CSV rows target_path,output_path,pair_id")
    p.add_argument("--out", required=True, metavar="F", help=".csv or .jsonl")
    p.add_argument("--jobs", type=int, default=1, metavar="N")
    _add_config_flags(p)

    p = sub.add_parser("validate-rhythm", help="rhythm features under rhythm degradations")
    p.add_argument("--corpus", required=True, metavar="D")
    p.add_argument("--out", required=True, metavar="F", help="JSON report")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.add_argument("--n-seeds", type=int, default=2, metavar="K")
    p.add_argument("--grids", metavar="D", help="16th-note grid files (default <corpus>/grids)")
    p.add_argument("--tempo", type=float, metavar="BPM",
                   help="constant tempo for files without a grid")

    p = sub.add_parser("make-corpus", help="write a synthetic piano corpus with grids")
    p.add_argument("--out", required=True, metavar="D")
    p.add_argument("--n-pieces", type=int, default=30, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="N")

    sub.add_parser("schema", help="print the JSON schema of evaluate --json")
    return parser


# ---------------------------------------------------------------------------
# evaluate


def cmd_evaluate(args) -> int:
    cfg = _build_config(args)
    try:
        fv = evaluate_files(args.target, args.output, cfg)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.fmt == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(FEATURE_NAMES)
        writer.writerow(fv.csv_row())
    else:
        sys.stdout.write(fv.to_json() + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# batch


def read_manifest(path) -> list:
    """Rows of ``(target_path, output_path, pair_id)``, paths resolved
    against the manifest's directory.  A header row is optional."""
    base = Path(path).parent
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows and tuple(c.strip() for c in rows[0]) == MANIFEST_FIELDS:
        rows = rows[1:]
    entries = []
    for number, row in enumerate(rows, start=1):
        row = [c.strip() for c in row]
        if len(row) == 2:
            row.append(str(number))
        if len(row) != 3:
            raise ValueError(f"{path}: row {number}: expected target_path,output_path,pair_id")
        target, output, pair_id = row
        entries.append((str(base / target), str(base / output), pair_id))
    return entries


def row_seed(base_seed: int, row: int) -> int:
    return int(np.random.SeedSequence([base_seed, row]).generate_state(1)[0])


def _evaluate_row(task):
    index, (target, output, pair_id), cfg = task
    cfg = cfg.replace(seed=row_seed(cfg.seed, index))
    try:
        fv = evaluate_files(target, output, cfg)
    except INPUT_ERRORS as exc:
        return {"pair_id": pair_id, "target_path": target, "output_path": output,
                "status": "error", "error": str(exc), "features": None}
    return {"pair_id": pair_id, "target_path": target, "output_path": output,
            "status": "ok", "error": None, "features": fv.values}


def evaluate_batch(manifest_path, out_path, config: EvalConfig = None, jobs: int = 1) -> list:
    """Evaluate every manifest row and write one result row per pair.

    Rows may run in parallel; the file lists them in manifest order.  Paths
    are written as given in the manifest so output does not depend on the
    working directory.
    """
    cfg = config or EvalConfig()
    entries = read_manifest(manifest_path)
    tasks = [(i, e, cfg) for i, e in enumerate(entries)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_row, tasks))
    else:
        results = [_evaluate_row(t) for t in tasks]
    base = Path(manifest_path).parent
    for r in results:
        r["target_path"] = Path(r["target_path"]).relative_to(base).as_posix()
        r["output_path"] = Path(r["output_path"]).relative_to(base).as_posix()
    write_batch(results, out_path)
    return results


def write_batch(results, out_path):
    out_path = Path(out_path)
    if out_path.suffix.lower() in (".jsonl", ".json"):
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            for r in results:
                fh.write(json.dumps(r, allow_nan=False) + "\n")
        return
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BATCH_COLUMNS)
        for r in results:
            feats = r["features"] or {}
            row = [r["pair_id"], r["target_path"], r["output_path"], r["status"], r["error"] or ""]
            row += ["" if feats.get(k) is None else repr(feats[k]) for k in FEATURE_NAMES]
            writer.writerow(row)


def cmd_batch(args) -> int:
    cfg = _build_config(args)
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    try:
        results = evaluate_batch(args.manifest, args.out, cfg, args.jobs)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read manifest: {exc}", file=sys.stderr)
        return EXIT_INPUT
    failed = [r for r in results if r["status"] != "ok"]
    for r in failed:
        print(f"error: pair {r['pair_id']}: {r['error']}", file=sys.stderr)
    print(f"{len(results) - len(failed)} of {len(results)} pairs evaluated", file=sys.stderr)
    return EXIT_PARTIAL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# rhythm validation


def cmd_validate_rhythm(args) -> int:
    if args.n_seeds < 1:
        raise UsageError("--n-seeds must be at least 1")
    if not Path(args.corpus).is_dir():
        print(f"error: corpus directory {args.corpus} not found", file=sys.stderr)
        return EXIT_INPUT
    seeds = tuple(range(args.seed, args.seed + args.n_seeds))
    try:
        report = validate_rhythm(args.corpus, args.out, seeds, args.grids, args.tempo)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(format_report(report))
    for condition, names in report["skipped"].items():
        print(f"note: {condition} skipped for {len(names)} file(s) without a grid",
              file=sys.stderr)
    return EXIT_OK


def cmd_make_corpus(args) -> int:
    paths = write_synthetic_corpus(args.out, args.n_pieces, args.seed)
    print(f"wrote {len(paths)} pieces to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_schema(args) -> int:
    sys.stdout.write(json.dumps(schema_document(), indent=2) + "\n")
    return EXIT_OK


COMMANDS = {
    "evaluate": cmd_evaluate,
    "batch": cmd_batch,
    "validate-rhythm": cmd_validate_rhythm,
    "make-corpus": cmd_make_corpus,
    "schema": cmd_schema,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s", stream=sys.stderr)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
