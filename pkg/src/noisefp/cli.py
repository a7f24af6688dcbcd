"""Command-line front end.

Every subcommand reads an optional JSON config (``--config``) and applies
flag overrides on top.  Failures exit with status 1 and print a single line
``error: <ErrorType>: <message>`` on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .corpus import MANIFEST_NAME, load_manifest_recordings, synth_corpus
from .experiment import (
    CLASSIFIERS,
    ExperimentConfig,
    evaluate_model,
    featurize_manifest,
    final_training_loss,
    prepare,
    run_grid,
    save_report,
    train_model,
    vote_evaluate,
)
from .features import MODES, load_matrix
from .learn import load_model, save_model
from .learn.config import CNN_LEARNING_RATE, NETWORK_EPOCHS, NETWORK_LEARNING_RATE, SOFTMAX_EPOCHS
from .learn.cnn import CnnModel

log = logging.getLogger("noisefp")

_D = ExperimentConfig()


def _common(p):
    p.add_argument("--config", metavar="PATH", help="JSON experiment config (default: built-in defaults)")
    p.add_argument("--seed", type=int, help=f"master seed for corpus and segmentation (default: {_D.corpus.seed})")
    p.add_argument("--out", metavar="DIR", help=f"output directory (default: {_D.output_dir})")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr (default: off)")


def _corpus_flags(p):
    c = _D.corpus
    p.add_argument("--devices", type=int, help=f"synthetic device count (default: {c.device_count})")
    p.add_argument("--duration", type=float, help=f"seconds per synthetic recording (default: {c.duration_s})")
    p.add_argument("--train-segments", type=int,
                   help=f"segments per training recording (default: {c.train_segments_per_recording})")
    p.add_argument("--test-segments", type=int,
                   help=f"segments per test recording (default: {c.test_segments_per_recording})")


def _model_flags(p):
    t = _D.train
    p.add_argument("--classifier", choices=CLASSIFIERS, help=f"model family (default: {_D.classifier})")
    p.add_argument("--mode", choices=MODES, help=f"feature mode (default: {_D.feature_mode})")
    p.add_argument("--hidden-layers", type=int, help=f"MLP hidden layers, 1..3 (default: {_D.mlp_hidden_layers})")
    p.add_argument("--hidden-width", type=int, help=f"units per hidden layer (default: {_D.hidden_width})")
    p.add_argument("--chunks", type=int, help=f"input chunks for mlp-averaged (default: {_D.chunk_count})")
    p.add_argument("--epochs", type=int,
                   help=f"training epochs (default: {NETWORK_EPOCHS} for mlp/cnn, {SOFTMAX_EPOCHS} steps for softmax)")
    p.add_argument("--lr", type=float,
                   help=f"learning rate (default: {NETWORK_LEARNING_RATE} for mlp, {CNN_LEARNING_RATE} for cnn, "
                        "1/L curvature bound for softmax)")
    p.add_argument("--batch-size", type=int, help=f"mini-batch size (default: {t.batch_size})")
    p.add_argument("--lam", type=float, help=f"softmax weight decay (default: {t.lam})")
    p.add_argument("--loss", choices=("squared", "cross_entropy"), help=f"MLP loss (default: {t.loss})")
    p.add_argument("--train-seed", type=int, help=f"initialisation/shuffle seed (default: {t.seed})")


def build_parser():
    parser = argparse.ArgumentParser(prog="noisefp", description="Recording-device identification from background noise.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic multi-device corpus")
    _common(p)
    _corpus_flags(p)

    p = sub.add_parser("ingest", help="load and validate the recordings of a manifest")
    _common(p)
    p.add_argument("--manifest", required=True, metavar="PATH", help="manifest TSV (required)")

    p = sub.add_parser("featurize", help="write train/test ADFM feature files")
    _common(p)
    _corpus_flags(p)
    p.add_argument("--manifest", required=True, metavar="PATH", help="manifest TSV (required)")
    p.add_argument("--mode", choices=MODES, help=f"feature mode (default: {_D.feature_mode})")

    p = sub.add_parser("train", help="train a classifier and write an ADID model file")
    _common(p)
    _corpus_flags(p)
    _model_flags(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--features", metavar="PATH", help="training ADFM file")
    src.add_argument("--manifest", metavar="PATH", help="manifest TSV (segments are cut and featurised)")
    p.add_argument("--model-out", metavar="PATH", help="model file (default: <out>/model.adid)")

    p = sub.add_parser("evaluate", help="score a model on test data and write report CSVs")
    _common(p)
    _corpus_flags(p)
    _model_flags(p)
    p.add_argument("--model", required=True, metavar="PATH", help="ADID model file (required)")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--features", metavar="PATH", help="test ADFM file")
    src.add_argument("--manifest", metavar="PATH", help="manifest TSV (test role is used)")
    p.add_argument("--name", default="eval", help="report file prefix (default: eval)")

    p = sub.add_parser("vote-eval", help="voted accuracy over independent segment draws")
    _common(p)
    _corpus_flags(p)
    _model_flags(p)
    p.add_argument("--model", required=True, metavar="PATH", help="ADID model file (required)")
    p.add_argument("--manifest", required=True, metavar="PATH", help="manifest TSV (required)")
    p.add_argument("--voters", type=int, help=f"segment sets per trial (default: {_D.voters})")

    p = sub.add_parser("grid", help="run the full comparison grid and write grid.csv")
    _common(p)
    _corpus_flags(p)
    _model_flags(p)
    p.add_argument("--manifest", metavar="PATH", help=f"manifest TSV (default: <out>/corpus/{MANIFEST_NAME})")
    p.add_argument("--voter-counts", default="1,3,4,5", help="comma-separated voter counts (default: 1,3,4,5)")
    p.add_argument("--no-cnn", action="store_true", help="skip the CNN row (default: included)")
    return parser


def resolve_config(args):
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    corpus, train, top = {}, {}, {}
    pick = lambda name: getattr(args, name, None)  # noqa: E731
    for flag, key in (("seed", "seed"), ("devices", "device_count"), ("duration", "duration_s"),
                      ("train_segments", "train_segments_per_recording"),
                      ("test_segments", "test_segments_per_recording")):
        if pick(flag) is not None:
            corpus[key] = pick(flag)
    for flag, key in (("epochs", "epochs"), ("lr", "learning_rate"), ("batch_size", "batch_size"),
                      ("lam", "lam"), ("loss", "loss"), ("train_seed", "seed")):
        if pick(flag) is not None:
            train[key] = pick(flag)
    for flag, key in (("classifier", "classifier"), ("mode", "feature_mode"), ("hidden_layers", "mlp_hidden_layers"),
                      ("hidden_width", "hidden_width"), ("chunks", "chunk_count"), ("voters", "voters"),
                      ("out", "output_dir")):
        if pick(flag) is not None:
            top[key] = pick(flag)
    if corpus:
        top["corpus"] = dataclasses.replace(cfg.corpus, **corpus)
    if train:
        top["train"] = dataclasses.replace(cfg.train, **train)
    return cfg.replace(**top) if top else cfg


def _out(cfg):
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(args, cfg):
    manifest = synth_corpus(cfg.corpus, _out(cfg))
    print(f"manifest={manifest}")


def cmd_ingest(args, cfg):
    recs = load_manifest_recordings(args.manifest)
    for entry, rec in recs:
        print(f"{entry.path}\t{entry.device_label}\t{entry.role}\t{len(rec)}\t{rec.sample_rate}")
    print(f"recordings={len(recs)}")


def cmd_featurize(args, cfg):
    train, test = featurize_manifest(args.manifest, cfg, _out(cfg))
    print(f"train_segments={len(train)} test_segments={len(test)} dim={train.dim}")


def cmd_train(args, cfg):
    if args.features:
        if cfg.classifier == "cnn":
            raise ValueError("the CNN trains on raw segments; pass --manifest instead of --features")
        m = load_matrix(args.features)
        X, y = m.values, m.labels
    else:
        X, y = prepare(args.manifest, cfg, "train")
    model = train_model(X, y, cfg)
    path = Path(args.model_out) if args.model_out else _out(cfg) / "model.adid"
    path.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, path)
    print(f"final_loss={final_training_loss(model):.6f}")
    print(f"model={path}")


def cmd_evaluate(args, cfg):
    model = load_model(args.model)
    if args.features:
        m = load_matrix(args.features)
        X, y = m.values, m.labels
    else:
        if isinstance(model, CnnModel):
            cfg = cfg.replace(classifier="cnn")
        X, y = prepare(args.manifest, cfg, "test")
    report = evaluate_model(model, X, y)
    save_report(report, _out(cfg), args.name)
    print(f"accuracy={report.accuracy:.6f}")


def cmd_vote_eval(args, cfg):
    model = load_model(args.model)
    if isinstance(model, CnnModel):
        cfg = cfg.replace(classifier="cnn")
    report = vote_evaluate(model, args.manifest, cfg, cfg.voters)
    save_report(report, _out(cfg), f"vote{cfg.voters}")
    print(f"accuracy={report.accuracy:.6f}")


def cmd_grid(args, cfg):
    out = _out(cfg)
    manifest = Path(args.manifest) if args.manifest else out / "corpus" / MANIFEST_NAME
    if not manifest.exists():
        synth_corpus(cfg.corpus, manifest.parent)
    voters = tuple(int(v) for v in args.voter_counts.split(",") if v.strip())
    rows = run_grid(manifest, cfg, out, voters, include_cnn=not args.no_cnn)
    for r in rows:
        print(f"{r['name']}\t{r['accuracy']:.4f}")
    print(f"grid={out / 'grid.csv'}")


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "vote-eval": cmd_vote_eval,
    "grid": cmd_grid,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        cfg = resolve_config(args)
        COMMANDS[args.command](args, cfg)
    except Exception as exc:  # one machine-parsable line, no traceback
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
