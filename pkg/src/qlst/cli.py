"""Command-line entry point: data generation, training stages, explanation,
calibration evaluation, and serving.

Every subcommand that writes files also writes a run-manifest recording the
resolved config hash, seed, and a content hash of each input file, so any
output is reproducible from its manifest (same inputs + seed => same bytes).
Logs go to standard error; data only to files.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from pathlib import Path

from .explain import (DEFAULT_GRID, eval_calibration, explain_local,
                      export_bundle, traverse_global)
from .models import load_checkpoint, load_manifest, save_checkpoint
from .synthecg import LABELS, build_dataset, load_dataset
from .training import (StageConfig, train_classifier, train_qlst, train_vae,
                       write_metrics_csv)


class CliError(Exception):
    """One-line, machine-parseable failure; maps to a nonzero exit code."""


def _log(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _hash_input(path) -> dict:
    """Content hash of an input file or checkpoint directory."""
    p = Path(path)
    if p.is_dir():
        parts = {c.name: _sha256_file(c) for c in sorted(p.iterdir())
                 if c.is_file()}
        digest = hashlib.sha256(
            json.dumps(parts, sort_keys=True).encode()).hexdigest()
        return {"path": str(p), "sha256": digest, "files": parts}
    return {"path": str(p), "sha256": _sha256_file(p)}


def write_run_manifest(out_path, *, subcommand: str, config: dict,
                       seed: int, inputs: list) -> Path:
    """Record what produced `out_path`: config hash, seed, input hashes.

    For directory outputs the manifest lives inside the directory; for file
    outputs it is a sibling `<name>.run.json`.  No timestamps: reruns with
    identical inputs produce identical manifests.
    """
    out = Path(out_path)
    target = (out / "run-manifest.json" if out.is_dir()
              else out.parent / (out.name + ".run.json"))
    config_json = json.dumps(config, sort_keys=True)
    doc = {
        "subcommand": subcommand,
        "seed": seed,
        "config": config,
        "config_sha256": hashlib.sha256(config_json.encode()).hexdigest(),
        "inputs": [_hash_input(p) for p in inputs],
    }
    target.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return target


def _load_stage_config(args, stage: str, **overrides) -> StageConfig:
    """Config file (JSON, StageConfig schema) first, then flag overrides."""
    base: dict = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
    base["stage"] = stage
    if args.seed is not None:
        base["seed"] = overrides.pop("seed", args.seed)
    for key, value in overrides.items():
        if value is not None:
            base[key] = value
    known = {f.name for f in dataclasses.fields(StageConfig)}
    unknown = set(base) - known
    if unknown:
        raise CliError(f"unknown config keys: {sorted(unknown)}")
    return StageConfig(**base)


def _require(args, flag: str, hint: str):
    attr = flag.lstrip("-").replace("-", "_")
    if not hasattr(args, attr):
        attr += "_"          # flags shadowing python keywords, e.g. --class
    value = getattr(args, attr)
    if value is None:
        raise CliError(f"{flag} is required: {hint}")
    return value


def _class_id(name_or_id: str) -> int:
    if name_or_id in LABELS:
        return LABELS.index(name_or_id)
    try:
        cid = int(name_or_id)
    except ValueError:
        raise CliError(f"unknown class {name_or_id!r}; "
                       f"expected one of {', '.join(LABELS)} or an index")
    if not 0 <= cid < len(LABELS):
        raise CliError(f"class index {cid} out of range 0..{len(LABELS)-1}")
    return cid


def _parse_queries(text: str) -> tuple:
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise CliError(f"--queries must be comma-separated floats, "
                       f"got {text!r}")


# ---------------------------------------------------------------- subcommands

def cmd_gen_data(args) -> int:
    out = Path(args.out)
    seed = args.seed if args.seed is not None else 0
    _log(f"generating {args.n} samples (seed={seed}) -> {out}")
    build_dataset(args.n, seed=seed, out_path=out,
                  noise_sd_mv=args.noise_sd)
    write_run_manifest(out, subcommand="gen-data",
                       config={"n": args.n, "noise_sd_mv": args.noise_sd},
                       seed=seed, inputs=[])
    _log("done")
    return 0


def _write_model_outputs(args, model, metrics, config: StageConfig,
                         subcommand: str, inputs: list) -> None:
    out = Path(args.out)
    save_checkpoint(model, out)
    write_metrics_csv(out / "metrics.csv", metrics)
    write_run_manifest(out, subcommand=subcommand,
                       config=json.loads(config.canonical_json()),
                       seed=config.seed, inputs=inputs)
    _log(f"checkpoint written to {out}")


def cmd_train_clf(args) -> int:
    config = _load_stage_config(
        args, "classifier", epochs=args.epochs, batch_size=args.batch_size,
        learning_rate=args.lr, architecture=args.arch,
        max_train_samples=args.max_train_samples,
        final_lr_fraction=args.final_lr_fraction)
    dataset = load_dataset(args.data)
    _log(f"stage 1: training {config.architecture} classifier "
         f"on {len(dataset)} samples")
    model, metrics = train_classifier(config, dataset)
    _write_model_outputs(args, model, metrics, config, "train-clf",
                         [args.data])
    return 0


def cmd_train_vae(args) -> int:
    config = _load_stage_config(
        args, "vae", epochs=args.epochs, batch_size=args.batch_size,
        learning_rate=args.lr, latent_dim=args.latent_dim,
        kl_target=args.kl_target, max_train_samples=args.max_train_samples,
        final_lr_fraction=args.final_lr_fraction)
    dataset = load_dataset(args.data)
    _log(f"stage 2: training VAE (latent_dim={config.latent_dim}) "
         f"on {len(dataset)} samples")
    model, metrics = train_vae(config, dataset)
    _write_model_outputs(args, model, metrics, config, "train-vae",
                         [args.data])
    return 0


def cmd_train_qlst(args) -> int:
    clf_path = _require(args, "--clf",
                        "a stage 1 classifier checkpoint must be trained "
                        "first (qlst train-clf)")
    vae_path = _require(args, "--vae",
                        "a stage 2 VAE checkpoint must be trained first "
                        "(qlst train-vae)")
    class_id = _class_id(_require(args, "--class",
                                  "the target class to train for"))
    config = _load_stage_config(
        args, "qlst", epochs=args.epochs, batch_size=args.batch_size,
        learning_rate=args.lr, class_id=class_id,
        max_train_samples=args.max_train_samples,
        final_lr_fraction=args.final_lr_fraction)
    clf = load_checkpoint(clf_path)
    vae = load_checkpoint(vae_path)
    dataset = load_dataset(args.data)
    _log(f"stage 3: training qLST model for class {LABELS[class_id]}")
    model, metrics = train_qlst(config, dataset, clf, vae)
    _write_model_outputs(args, model, metrics, config, "train-qlst",
                         [args.data, clf_path, vae_path])
    return 0


def _load_stack(args):
    qlst = load_checkpoint(_require(args, "--qlst",
                                    "a stage 3 qLST checkpoint"))
    vae = load_checkpoint(_require(args, "--vae",
                                   "a stage 2 VAE checkpoint"))
    clf = load_checkpoint(_require(args, "--clf",
                                   "a stage 1 classifier checkpoint"))
    return qlst, vae, clf


def cmd_explain(args) -> int:
    qlst, vae, clf = _load_stack(args)
    if args.class_ is not None and _class_id(args.class_) != qlst.class_id:
        raise CliError(f"--class {args.class_} does not match the qLST "
                       f"checkpoint, which targets {LABELS[qlst.class_id]}")
    grid = _parse_queries(args.queries)
    if args.global_origin:
        bundle = traverse_global(qlst, vae, clf, grid=grid)
        inputs = [args.qlst, args.vae, args.clf]
    else:
        if args.sample_id is None or args.data is None:
            raise CliError("explain needs --global, or --data with "
                           "--sample-id for a local explanation")
        dataset = load_dataset(args.data)
        if not 0 <= args.sample_id < len(dataset):
            raise CliError(f"--sample-id {args.sample_id} out of range "
                           f"for dataset of {len(dataset)}")
        bundle = explain_local(dataset.signals[args.sample_id], qlst, vae,
                               clf, grid=grid, direction=args.direction,
                               sample_id=args.sample_id)
        inputs = [args.qlst, args.vae, args.clf, args.data]
    path = export_bundle(bundle, args.out, format=args.format)
    write_run_manifest(path, subcommand="explain",
                       config={"queries": list(grid),
                               "global": args.global_origin,
                               "sample_id": args.sample_id,
                               "direction": args.direction,
                               "format": args.format},
                       seed=args.seed if args.seed is not None else 0,
                       inputs=inputs)
    _log(f"bundle written to {path}")
    return 0


def cmd_eval_calibration(args) -> int:
    vae = load_checkpoint(_require(args, "--vae", "a stage 2 VAE checkpoint"))
    clf = load_checkpoint(_require(args, "--clf",
                                   "a stage 1 classifier checkpoint"))
    if not args.qlst:
        raise CliError("--qlst is required: one or more stage 3 checkpoints")
    qlst_models = {}
    for path in args.qlst:
        model = load_checkpoint(path)
        qlst_models[model.class_id] = model
    dataset = load_dataset(args.data)
    grid = _parse_queries(args.queries)
    _log(f"evaluating calibration for {len(qlst_models)} classes "
         f"on split {args.split!r}")
    report = eval_calibration(dataset, qlst_models, vae, clf, grid=grid,
                              split=args.split,
                              max_samples=args.max_samples)
    report.to_csv(args.out)
    write_run_manifest(Path(args.out), subcommand="eval-calibration",
                       config={"queries": list(grid), "split": args.split,
                               "max_samples": args.max_samples},
                       seed=args.seed if args.seed is not None else 0,
                       inputs=[args.data, args.vae, args.clf, *args.qlst])
    for name in sorted(report.per_class):
        _log(f"{name}: mean |attained - q| = "
             f"{report.mean_abs_error(name):.4f}")
    _log(f"report written to {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.models_dir)
    _log(f"serving models from {args.models_dir} "
         f"on {args.bind}:{args.port}")
    uvicorn.run(app, host=args.bind, port=args.port, log_level="warning")
    return 0


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlst",
        description="Query-based latent space traversal on synthetic "
                    "median-beat ECGs.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--config", default=None,
                       help="JSON file with StageConfig fields; flags "
                            "override config values")

    p = sub.add_parser("gen-data", help="generate a synthetic ECG dataset")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--noise-sd", type=float, default=0.01,
                   help="additive noise standard deviation in mV")
    p.set_defaults(func=cmd_gen_data)

    def training_flags(p):
        common(p)
        p.add_argument("--data", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--epochs", type=int, default=None)
        p.add_argument("--batch-size", type=int, default=None)
        p.add_argument("--lr", type=float, default=None,
                       dest="lr", metavar="LEARNING_RATE")
        p.add_argument("--max-train-samples", type=int, default=None)
        p.add_argument("--lr-final-fraction", type=float, default=None,
                       dest="final_lr_fraction",
                       help="linearly decay the learning rate to this "
                            "fraction by the last epoch")

    p = sub.add_parser("train-clf", help="stage 1: train a classifier")
    training_flags(p)
    p.add_argument("--arch", choices=("mlp", "resnet_small"), default=None)
    p.set_defaults(func=cmd_train_clf)

    p = sub.add_parser("train-vae", help="stage 2: train the VAE")
    training_flags(p)
    p.add_argument("--latent-dim", type=int, default=None)
    p.add_argument("--kl-target", type=float, default=None)
    p.set_defaults(func=cmd_train_vae)

    p = sub.add_parser("train-qlst",
                       help="stage 3: train a per-class qLST model")
    training_flags(p)
    p.add_argument("--clf", default=None,
                   help="stage 1 classifier checkpoint directory")
    p.add_argument("--vae", default=None,
                   help="stage 2 VAE checkpoint directory")
    p.add_argument("--class", dest="class_", default=None,
                   help="target class name or index")
    p.set_defaults(func=cmd_train_qlst)

    p = sub.add_parser("explain", help="export a traversal bundle")
    common(p)
    p.add_argument("--qlst", default=None)
    p.add_argument("--vae", default=None)
    p.add_argument("--clf", default=None)
    p.add_argument("--global", dest="global_origin", action="store_true",
                   help="traverse from the latent-space origin")
    p.add_argument("--class", dest="class_", default=None,
                   help="expected target class; fails if the qLST "
                        "checkpoint targets a different one")
    p.add_argument("--data", default=None)
    p.add_argument("--sample-id", type=int, default=None)
    p.add_argument("--direction", choices=("increase", "decrease"),
                   default="increase")
    p.add_argument("--queries",
                   default=",".join(str(q) for q in DEFAULT_GRID))
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("eval-calibration",
                       help="attained vs queried probability report")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--qlst", action="append", default=[],
                   help="stage 3 checkpoint; repeat for multiple classes")
    p.add_argument("--vae", default=None)
    p.add_argument("--clf", default=None)
    p.add_argument("--split", default="test")
    p.add_argument("--max-samples", type=int, default=0)
    p.add_argument("--queries",
                   default=",".join(str(q) for q in DEFAULT_GRID))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_calibration)

    p = sub.add_parser("serve", help="run the HTTP inference service")
    common(p)
    p.add_argument("--models-dir", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--bind", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        _log(f"error: {e}")
        return 2
    except FileNotFoundError as e:
        _log(f"error: missing file: {e.filename or e}")
        return 2
    except (ValueError, KeyError) as e:
        _log(f"error: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
