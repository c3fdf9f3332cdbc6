"""Command-line pipeline: synth -> ingest -> embed -> train -> eval, plus params.

Exit codes: 0 success, 1 usage error, 2 data error (parsing, file layout,
shapes), 3 numeric failure (non-finite loss or activation).

All artifacts land in --output-dir under fixed names, so a rerun with the
same inputs and seeds reproduces every file byte for byte.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import artifacts, records
from .aami import AamiClass
from .config import RunConfig, load_config
from .embedding import embed_dataset, get_filters
from .errors import LdtfError, NonFiniteActivation, NonFiniteLoss
from .evaluate import confusion_matrix, recall_precision, report_to_json, report_to_text
from .model import count_params, predict_batch, train
from .model import REFERENCE_PER_LAYER, REFERENCE_TOTAL
from .preprocess import Dataset, read_manifest, smote, split_train_test, write_manifest, zscore

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

SEGMENTS_FILE = "segments.seg1"
MANIFEST_FILE = "manifest.csv"
EMBEDDINGS_FILE = "embeddings.lde1"
CHECKPOINT_FILE = "checkpoint.ldtf"
HISTORY_FILE = "history.csv"
HISTORY_FIGURE = "history.png"
REPORT_JSON = "report.json"
REPORT_TEXT = "report.txt"
REPORT_FIGURE = "confusion.png"


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this pipeline reserves 2 for
    data errors, so remap usage problems to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="JSON run configuration; flags override it")
    p.add_argument("--records-dir", help="directory with .hea/.dat record files")
    p.add_argument("--annotations-dir", help="directory with .csv annotation files "
                                             "(default: records dir)")
    p.add_argument("--output-dir", help="directory for all produced artifacts")
    p.add_argument("--threads", type=int, default=1,
                   help="worker processes for embedding (1 keeps everything "
                        "single-threaded and deterministic)")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--num-layers", type=int, help="encoder layers (default 8)")
    p.add_argument("--num-heads", type=int, help="attention heads (default 6)")
    p.add_argument("--ffb-hidden", type=int, help="feed-forward width (default 964)")
    p.add_argument("--num-classes", type=int, help="classifier outputs (default 5)")
    p.add_argument("--dropout", type=float, help="dropout ratio (default 0.10)")
    p.add_argument("--model-seed", type=int, help="seed for init/shuffle/dropout (default 0)")


def _add_lde_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--wavelet", choices=("haar", "db4", "db6"),
                   help="wavelet family (default db4)")
    p.add_argument("--row-scheme", choices=("as_printed", "details"),
                   help="wavelet rows: four approximations + deepest detail "
                        "(default as_printed) or four details + deepest "
                        "approximation")
    p.add_argument("--drop-detail-levels", metavar="LEVELS",
                   help="comma-separated detail levels zeroed in the denoised "
                        "row (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ldtf",
                     description="Two-lead beat classification: wavelet/Fourier "
                                 "embedding plus a deep-narrow transformer.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[], help="write synthetic records",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_common(p)
    p.add_argument("--classes", default="N,S,V,F",
                   help="comma-separated beat symbols to generate")
    p.add_argument("--beats-per-class", type=int, default=200)
    p.add_argument("--noise-std", type=float, default=0.05,
                   help="white-noise level in millivolts")
    p.add_argument("--spacing", type=int, default=300,
                   help="samples between consecutive beats")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default="synth0", help="record name to write")

    p = sub.add_parser("ingest", help="parse records into a segment archive + manifest",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_common(p)
    p.add_argument("--half-width", type=int, help="samples either side of the "
                                                  "beat center (default 120)")
    p.add_argument("--train-fraction", type=float,
                   help="per-class share assigned to the training split (default 0.8)")
    p.add_argument("--split-seed", type=int, help="seed for the stratified split (default 1)")

    p = sub.add_parser("embed", help="embed a segment archive into matrices",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_common(p)
    _add_lde_flags(p)
    p.add_argument("--csv-dir", metavar="DIR",
                   help="also export each embedding as a CSV file here")

    p = sub.add_parser("train", help="oversample, embed, and train the classifier",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_common(p)
    _add_lde_flags(p)
    _add_model_flags(p)
    p.add_argument("--epochs", type=int, help="training epochs (default 20)")
    p.add_argument("--batch-size", type=int, help="minibatch size (default 64)")
    p.add_argument("--learning-rate", type=float, help="SGD step size (default 0.001)")
    p.add_argument("--smote-k", type=int, help="oversampling neighbor count (default 5)")
    p.add_argument("--smote-seed", type=int, help="seed for oversampling (default 2)")
    p.add_argument("--track-validation", action="store_true", default=None,
                   help="compute test-split macro recall/precision each epoch")

    p = sub.add_parser("eval", help="evaluate a checkpoint on a split",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_common(p)
    _add_lde_flags(p)
    p.add_argument("--checkpoint", help=f"model file (default <output-dir>/{CHECKPOINT_FILE})")
    p.add_argument("--split", choices=("test", "train", "all"), default="test")

    p = sub.add_parser("params", help="print the parameter-count breakdown",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_common(p)
    _add_model_flags(p)

    return parser


def _config_from_args(args: argparse.Namespace, check_paths: bool = True) -> RunConfig:
    overrides = {
        "records_dir": getattr(args, "records_dir", None),
        "annotations_dir": getattr(args, "annotations_dir", None),
        "output_dir": getattr(args, "output_dir", None),
        "preprocess.half_width": getattr(args, "half_width", None),
        "preprocess.train_fraction": getattr(args, "train_fraction", None),
        "preprocess.split_seed": getattr(args, "split_seed", None),
        "preprocess.smote_k": getattr(args, "smote_k", None),
        "preprocess.smote_seed": getattr(args, "smote_seed", None),
        "lde.wavelet": getattr(args, "wavelet", None),
        "lde.row_scheme": getattr(args, "row_scheme", None),
        "model.num_layers": getattr(args, "num_layers", None),
        "model.num_heads": getattr(args, "num_heads", None),
        "model.ffb_hidden": getattr(args, "ffb_hidden", None),
        "model.num_classes": getattr(args, "num_classes", None),
        "model.dropout": getattr(args, "dropout", None),
        "model.seed": getattr(args, "model_seed", None),
        "train.epochs": getattr(args, "epochs", None),
        "train.batch_size": getattr(args, "batch_size", None),
        "train.learning_rate": getattr(args, "learning_rate", None),
        "train.track_validation": getattr(args, "track_validation", None),
    }
    drop = getattr(args, "drop_detail_levels", None)
    if drop is not None:
        levels = [int(part) for part in drop.split(",") if part.strip()]
        overrides["lde.drop_detail_levels"] = levels
    config = load_config(args.config, overrides)
    config.validate(check_paths=check_paths)
    return config


def _write_meta(config: RunConfig, command: str) -> None:
    meta = {"command": command, "seeds": config.seeds(), "config": config.to_dict()}
    path = Path(config.output_dir) / f"run_meta_{command}.json"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _zscore_and_embed(segments, config: RunConfig, threads: int) -> np.ndarray:
    normalized = [zscore(seg) for seg in segments]
    return embed_dataset(normalized, get_filters(config.lde.wavelet),
                         frozenset(config.lde.drop_detail_levels),
                         config.lde.row_scheme, threads=threads)


def _load_split(config: RunConfig, which: str):
    out = Path(config.output_dir)
    segments = artifacts.read_segments(out / SEGMENTS_FILE)
    manifest = read_manifest(out / MANIFEST_FILE)
    if len(segments) != len(manifest):
        raise LdtfError(f"manifest rows ({len(manifest)}) != archive segments "
                        f"({len(segments)})")
    if which == "all":
        return segments
    return [seg for seg, row in zip(segments, manifest) if row["split"] == which]


# --- subcommands ---------------------------------------------------------------

def cmd_synth(args) -> int:
    config = _config_from_args(args, check_paths=False)
    symbols = [s.strip() for s in args.classes.split(",") if s.strip()]
    if not symbols:
        raise LdtfError("--classes is empty")
    beats: list[str] = []
    for i in range(args.beats_per_class):
        beats.extend(symbols)
    margin = 400
    indices = tuple(margin + i * args.spacing for i in range(len(beats)))
    spec = records.SynthSpec(
        num_samples=indices[-1] + margin if indices else 2 * margin,
        beat_indices=indices,
        beat_symbols=tuple(beats),
        noise_std=args.noise_std,
        record_name=args.name,
    )
    record = records.synth_record(spec, seed=args.seed)
    records.write_record(record, config.records_dir,
                         config.annotations_dir or config.records_dir)
    print(f"wrote record {args.name!r}: {len(beats)} beats over "
          f"{spec.num_samples} samples in {config.records_dir}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    config = _config_from_args(args)
    names = records.list_records(config.records_dir)
    segments = []
    rows = []
    skipped = 0
    for name in names:
        record = records.read_record(config.records_dir, name, config.annotations_path)
        result = records.extract_segments(record, config.preprocess.half_width)
        skipped += result.skipped
        for seg in result.segments:
            rows.append({"record_name": seg.source[0],
                         "center_index": seg.source[1],
                         "symbol": seg.symbol,
                         "aami_class": seg.label.letter,
                         "split": ""})
            segments.append(seg)

    train_set, _test_set = split_train_test(Dataset(segments),
                                            config.preprocess.train_fraction,
                                            config.preprocess.split_seed)
    train_ids = {id(seg) for seg in train_set.segments}
    for seg, row in zip(segments, rows):
        row["split"] = "train" if id(seg) in train_ids else "test"

    out = Path(config.output_dir)
    artifacts.write_segments(out / SEGMENTS_FILE, segments)
    write_manifest(out / MANIFEST_FILE, rows)
    _write_meta(config, "ingest")

    counts = Dataset(segments).class_counts
    print("per-class segment counts:")
    for cls in AamiClass:
        print(f"  {cls.letter}: {counts.get(cls, 0)}")
    print(f"skipped annotations: {skipped}")
    if not segments:
        print("warning: no segments extracted; manifest is empty", file=sys.stderr)
    print(f"wrote {out / SEGMENTS_FILE} ({len(segments)} segments)")
    print(f"wrote {out / MANIFEST_FILE}")
    return EXIT_OK


def cmd_embed(args) -> int:
    config = _config_from_args(args)
    out = Path(config.output_dir)
    segments = artifacts.read_segments(out / SEGMENTS_FILE)
    matrices = _zscore_and_embed(segments, config, args.threads)
    artifacts.write_embedding_archive(out / EMBEDDINGS_FILE, matrices)
    if args.csv_dir:
        csv_dir = Path(args.csv_dir)
        csv_dir.mkdir(parents=True, exist_ok=True)
        for i, matrix in enumerate(matrices):
            np.savetxt(csv_dir / f"embedding_{i:05d}.csv", matrix, delimiter=",")
    _write_meta(config, "embed")
    print(f"wrote {out / EMBEDDINGS_FILE} ({len(matrices)} matrices)")
    return EXIT_OK


def cmd_train(args) -> int:
    config = _config_from_args(args)
    out = Path(config.output_dir)
    train_segments = _load_split(config, "train")
    if not train_segments:
        raise LdtfError("training split is empty")
    balanced = smote(Dataset(train_segments), config.preprocess.smote_k,
                     config.preprocess.smote_seed)
    labels = np.array([int(seg.label) for seg in balanced.segments], dtype=np.intp)
    if labels.max(initial=0) >= config.model.num_classes:
        raise LdtfError(
            f"segment class index {labels.max()} does not fit "
            f"num_classes={config.model.num_classes}")
    x = _zscore_and_embed(balanced.segments, config, args.threads)

    val_data = None
    if config.train.track_validation:
        test_segments = _load_split(config, "test")
        if test_segments:
            val_x = _zscore_and_embed(test_segments, config, args.threads)
            val_y = np.array([int(seg.label) for seg in test_segments], dtype=np.intp)
            val_data = (val_x, val_y)

    params, history = train(x, labels, config.model, config.train.epochs,
                            batch_size=config.train.batch_size,
                            learning_rate=config.train.learning_rate,
                            val_data=val_data,
                            log=lambda msg: print(msg))
    artifacts.save_checkpoint(out / CHECKPOINT_FILE, params, run_seeds=config.seeds())
    (out / HISTORY_FILE).write_text(artifacts.history_to_csv(history))
    from .figures import save_history_figure

    save_history_figure(history, out / HISTORY_FIGURE)
    _write_meta(config, "train")
    print(f"wrote {out / CHECKPOINT_FILE}")
    print(f"wrote {out / HISTORY_FILE} and {out / HISTORY_FIGURE}")
    return EXIT_OK


def cmd_eval(args) -> int:
    config = _config_from_args(args)
    out = Path(config.output_dir)
    checkpoint = Path(args.checkpoint) if args.checkpoint else out / CHECKPOINT_FILE
    params, seeds = artifacts.load_checkpoint(checkpoint)
    segments = _load_split(config, args.split)
    if not segments:
        raise LdtfError(f"split {args.split!r} is empty")
    labels = np.array([int(seg.label) for seg in segments], dtype=np.intp)
    if labels.max(initial=0) >= params.config.num_classes:
        raise LdtfError(f"labels exceed checkpoint num_classes={params.config.num_classes}")
    x = _zscore_and_embed(segments, config, args.threads)
    preds = predict_batch(x, params)
    report = recall_precision(confusion_matrix(preds, labels, params.config.num_classes))

    extra = {"split": args.split, "num_samples": len(segments), "seeds": seeds}
    (out / REPORT_JSON).write_text(report_to_json(report, extra))
    text = report_to_text(report)
    (out / REPORT_TEXT).write_text(text)
    from .figures import save_confusion_figure

    save_confusion_figure(report, out / REPORT_FIGURE)
    _write_meta(config, "eval")
    print(text, end="")
    print(f"wrote {out / REPORT_JSON}, {out / REPORT_TEXT}, {out / REPORT_FIGURE}")
    return EXIT_OK


def cmd_params(args) -> int:
    config = _config_from_args(args, check_paths=False)
    counts = count_params(config.model)
    b = counts.breakdown
    print(f"model: layers={config.model.num_layers} heads={config.model.num_heads} "
          f"seq_len={config.model.seq_len} ffb_hidden={config.model.ffb_hidden} "
          f"classes={config.model.num_classes}")
    print(f"  per layer:    {counts.per_layer:>12,}")
    print(f"    projections {b['projections']:>12,}")
    print(f"    out_proj    {b['out_proj']:>12,}")
    print(f"    norms       {b['norms']:>12,}")
    print(f"    ffb         {b['ffb']:>12,}")
    print(f"  classifier:   {counts.classifier:>12,}")
    print(f"  total:        {counts.total:>12,}")
    print(f"reference totals: per layer {REFERENCE_PER_LAYER:,}, "
          f"model {REFERENCE_TOTAL:,}")
    print(f"  gap vs reference: per layer {REFERENCE_PER_LAYER - counts.per_layer:+,}, "
          f"model {REFERENCE_TOTAL - counts.total:+,}")
    print("  (no integer ffb width reproduces the reference totals under these "
          "tensor shapes; the breakdown above is what the implementation trains)")
    return EXIT_OK


_COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "embed": cmd_embed,
    "train": cmd_train,
    "eval": cmd_eval,
    "params": cmd_params,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (NonFiniteActivation, NonFiniteLoss) as exc:
        print(f"ldtf {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (LdtfError, FileNotFoundError, ValueError) as exc:
        print(f"ldtf {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
