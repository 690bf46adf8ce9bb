"""Command line entry point: ``gesture-synth <command> ...``.

Exit status is 0 on success, 1 on a usage error and 2 on a data error.
"""

from __future__ import annotations

import argparse
import shutil
import sys
from pathlib import Path

import numpy as np

from .dataset import DatasetError, ingest, read_labeled
from .export import export_motion
from .fixtures import data_path
from .library import GestureLibrary, LibraryConfig, build
from .pipeline import GenerationConfig, TextModels, generate
from .signal import read_wav
from .text import EmbeddingTable, GestureType, LinearHead, train_head

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

MODEL_FILES = {"embeddings": "embeddings.txt", "type_head": "type_head.txt", "word_head": "word_head.txt"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gesture-synth", description="Type-aware co-speech gesture synthesis.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build-lib", help="build a gesture library from a dataset")
    b.add_argument("dataset")
    b.add_argument("out_dir")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--k", type=int, default=None, help="number of Imagistic clusters")
    b.add_argument("--fps", type=float, default=25.0)
    b.add_argument("--embeddings", help="embedding table copied into the library (default: bundled)")
    b.add_argument("--type-head", help="gesture-type head copied into the library (default: bundled)")
    b.add_argument("--word-head", help="Imagistic word selector copied into the library (default: bundled)")

    g = sub.add_parser("gen", help="generate motion for a text")
    g.add_argument("--text", required=True)
    g.add_argument("--audio")
    g.add_argument("--lib", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--format", choices=("json", "bvh"), default="json")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--rest", action="store_true", help="end the motion in the rest pose")
    g.add_argument("--wpm", type=float, default=150.0)
    g.add_argument("--embeddings")
    g.add_argument("--type-head")
    g.add_argument("--word-head")

    for name, what in (("train-types", "gesture-type classifier"), ("train-words", "Imagistic word selector")):
        t = sub.add_parser(name, help=f"train the {what}")
        t.add_argument("labeled")
        t.add_argument("embeddings")
        t.add_argument("out")
        t.add_argument("--lr", type=float, default=0.1)
        t.add_argument("--epochs", type=int, default=500)

    s = sub.add_parser("stats", help="print dataset statistics")
    s.add_argument("dataset")
    return p


def _model_path(explicit, lib_dir, key):
    if explicit:
        return Path(explicit)
    if lib_dir is not None and (Path(lib_dir) / MODEL_FILES[key]).exists():
        return Path(lib_dir) / MODEL_FILES[key]
    return data_path(MODEL_FILES[key])


def cmd_build_lib(args) -> int:
    records, manifest = ingest(args.dataset, fps=args.fps)
    table_path = _model_path(args.embeddings, None, "embeddings")
    table = EmbeddingTable.load(table_path)
    lib = build(records, table, LibraryConfig(fps=args.fps, k=args.k, seed=args.seed))
    out = lib.save(args.out_dir)
    shutil.copyfile(table_path, out / MODEL_FILES["embeddings"])
    shutil.copyfile(_model_path(args.type_head, None, "type_head"), out / MODEL_FILES["type_head"])
    shutil.copyfile(_model_path(args.word_head, None, "word_head"), out / MODEL_FILES["word_head"])
    c = lib.counts
    print(
        f"library written to {out}: {c['beat']} beat, {c['imagistic_clusters']} imagistic clusters "
        f"({c['imagistic_members']} gestures), {c['nogesture']} no-gesture"
    )
    return EXIT_OK


def cmd_gen(args) -> int:
    lib = GestureLibrary.load(args.lib)
    models = TextModels(
        EmbeddingTable.load(_model_path(args.embeddings, args.lib, "embeddings")),
        LinearHead.load(_model_path(args.type_head, args.lib, "type_head")),
        LinearHead.load(_model_path(args.word_head, args.lib, "word_head")),
    )
    audio = read_wav(args.audio) if args.audio else None
    config = GenerationConfig(fps=lib.config.fps, seed=args.seed, end_at_rest=args.rest, wpm=args.wpm)
    result = generate(args.text, lib, models, config, audio)
    export_motion(result.clip, args.out, args.format)
    print(f"{result.clip.n_frames} frames ({result.duration:.2f} s) written to {args.out}")
    for rep in result.spans:
        print(f"  [{rep.span.start:>3},{rep.span.end:>3}) {rep.span.label.name:<10} {' '.join(rep.words)}  <- {', '.join(rep.sources)}")
    return EXIT_OK


def _type_examples(rows, table):
    x, y, split = [], [], []
    for row in rows:
        words = [w.lower() for w in row["words"]]
        if "labels" in row:
            labels = [GestureType.parse(v) for v in row["labels"]]
            if len(labels) != len(words):
                raise DatasetError("labels", row["_line"], "labels and words differ in length")
        elif "type" in row:
            labels = [GestureType.parse(row["type"])] * len(words)
        else:
            raise DatasetError("labels", row["_line"], "row needs 'type' or 'labels'")
        for w, lab in zip(words, labels):
            x.append(table.lookup(w))
            y.append(lab.index)
            split.append(row.get("split", "train"))
    return np.array(x), np.array(y), np.array(split)


def _word_examples(rows, table):
    x, y, split = [], [], []
    for row in rows:
        words = [w.lower() for w in row["words"]]
        if "important" in row:
            marks = [float(v) for v in row["important"]]
        elif str(row.get("type", "")).lower() == "imagistic":
            keep = {w.lower() for w in row.get("imagistic_words", ())}
            marks = [float(w in keep) for w in words]
        else:
            continue
        if len(marks) != len(words):
            raise DatasetError("labels", row["_line"], "importance marks and words differ in length")
        for w, m in zip(words, marks):
            x.append(table.lookup(w))
            y.append(m)
            split.append(row.get("split", "train"))
    return np.array(x), np.array(y), np.array(split)


def _train(args, classes: int) -> int:
    rows = read_labeled(args.labeled)
    table = EmbeddingTable.load(args.embeddings)
    sizes = {}
    for row in rows:
        sizes[row.get("split", "train")] = sizes.get(row.get("split", "train"), 0) + 1
    print("split sizes (texts): " + ", ".join(f"{k}={v}" for k, v in sorted(sizes.items())))
    x, y, split = (_type_examples if classes == 3 else _word_examples)(rows, table)
    if x.size == 0:
        raise DatasetError(args.labeled, None, "no usable training examples")
    train = split == "train" if np.any(split == "train") else np.ones(len(y), bool)
    losses = []
    head = train_head(x[train], y[train], classes, args.lr, args.epochs, lambda e, l: losses.append(l))
    print(f"trained on {int(train.sum())} words: loss {losses[0]:.4f} -> {losses[-1]:.4f}")
    for name in sorted(set(split)):
        mask = split == name
        z = head.logits(x[mask])
        pred = np.argmax(z, axis=1) if classes > 1 else (z[:, 0] >= 0).astype(float)
        print(f"  {name}: accuracy {np.mean(pred == y[mask]):.3f} over {int(mask.sum())} words")
    head.save(args.out)
    return EXIT_OK


def cmd_stats(args) -> int:
    _, manifest = ingest(args.dataset)
    print(manifest.summary())
    return EXIT_OK


COMMANDS = {
    "build-lib": cmd_build_lib,
    "gen": cmd_gen,
    "train-types": lambda a: _train(a, 3),
    "train-words": lambda a: _train(a, 1),
    "stats": cmd_stats,
}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (DatasetError, ValueError, LookupError, OSError, FloatingPointError) as e:
        print(f"gesture-synth {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
