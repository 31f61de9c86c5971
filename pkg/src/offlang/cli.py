"""``offlang`` command line: stats, weights, preprocess, train, eval, experiment.

Exit codes: 0 success, 1 internal error, 2 bad input or usage.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import logging
import sys
from pathlib import Path

from offlang import __version__
from offlang.balance import class_weights
from offlang.corpus import (
    DEFAULT_SEPARATOR,
    ClassCounts,
    CorpusError,
    Dataset,
    Language,
    Scheme,
    Split,
    dataset_stats,
    flatten_conversations,
    load_conversations,
    load_dataset,
)
from offlang.fileio import atomic_write_text, resolve_data_path, sha256_file
from offlang.nnet.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from offlang.nnet.model import ClassifierSpec
from offlang.preprocess import PreprocessConfig, preprocess
from offlang.sweep import seed_sweep
from offlang.train import TrainConfig, desk_preset, evaluate, train

log = logging.getLogger("offlang")

SCHEMES = {"binary": Scheme.BINARY, "four": Scheme.FOUR}
LANGS = {lang.value: lang for lang in Language}


class UsageError(ValueError):
    pass


# -- helpers ------------------------------------------------------------------

def _read_json(path) -> dict:
    path = resolve_data_path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from None


def _pick(flag, config: dict, key: str, default=None):
    """Flag value if given, else the config file's value, else `default`."""
    if flag is not None:
        return flag
    return config.get(key, default)


def _existing(path) -> Path:
    p = resolve_data_path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such file: {path}")
    return p


def _load_any(path, scheme: Scheme, split: Split, lang: Language) -> Dataset:
    """TSV datasets, or ICHCL conversation JSON flattened to one row per node."""
    p = _existing(path)
    if p.suffix.lower() == ".json":
        if scheme is not Scheme.BINARY:
            raise UsageError("conversation files only carry binary labels")
        return flatten_conversations(load_conversations(p), split=split)
    return load_dataset(p, scheme, split, lang)


def _clean(data: Dataset, lang: Language) -> Dataset:
    cfg = PreprocessConfig(lang)
    return data.with_texts([preprocess(t, cfg) for t in data.texts])


def write_manifest(path, subcommand: str, config: dict, inputs, outputs, metrics=None) -> Path:
    manifest = {
        "subcommand": subcommand,
        "version": __version__,
        "config": config,
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "metrics": metrics or {},
        "timestamp": dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
    }
    return atomic_write_text(path, json.dumps(manifest, indent=2, ensure_ascii=False) + "\n")


def _manifest_path(args, primary_out) -> Path | None:
    if args.manifest:
        return Path(args.manifest)
    if primary_out is not None:
        return Path(str(primary_out) + ".manifest.json")
    return None


def _parse_counts(text: str) -> ClassCounts:
    pairs = {}
    for item in text.split(","):
        name, _, value = item.partition("=")
        if not value:
            raise UsageError(f"--counts expects LABEL=N pairs, got {item!r}")
        pairs[name.strip().upper()] = int(value)
    return ClassCounts.from_mapping(pairs)


# -- subcommands --------------------------------------------------------------

def cmd_stats(args) -> int:
    scheme = SCHEMES[args.scheme]
    data = _load_any(args.data, scheme, Split.TRAIN, LANGS[args.lang])
    counts = dataset_stats(data)
    width = max(5, *(len(x) for x in counts.labels))
    print(f"{'class':<{width}}  count")
    for label, n in zip(counts.labels, counts.counts):
        print(f"{label:<{width}}  {n}")
    print(f"{'total':<{width}}  {counts.total}")
    mpath = _manifest_path(args, None)
    if mpath:
        write_manifest(mpath, "stats", {"scheme": args.scheme}, [_existing(args.data)], [], {"counts": counts.as_dict()})
    return 0


def cmd_weights(args) -> int:
    inputs = []
    if args.counts:
        counts = _parse_counts(args.counts)
    elif args.data:
        inputs.append(_existing(args.data))
        counts = dataset_stats(_load_any(args.data, SCHEMES[args.scheme], Split.TRAIN, LANGS[args.lang]))
    else:
        raise UsageError("give --data PATH or --counts LABEL=N,...")
    weights = class_weights(counts)
    print(weights.format_table())
    mpath = _manifest_path(args, None)
    if mpath:
        write_manifest(mpath, "weights", {"scheme": args.scheme}, inputs, [], {"weights": weights.as_dict()})
    return 0


def _preprocess_tsv(src: Path, cfg: PreprocessConfig) -> str:
    with src.open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE))
    if not rows:
        raise CorpusError(f"{src}: empty file, expected a header row")
    header = [h.strip() for h in rows[0]]
    if "text" not in header:
        raise CorpusError(f"{src}: missing column 'text'")
    col = header.index("text")
    out = ["\t".join(header)]
    for row in rows[1:]:
        if not row:
            continue
        row = list(row)
        if col < len(row):
            row[col] = preprocess(row[col], cfg)
        out.append("\t".join(row))
    return "\n".join(out) + "\n"


def cmd_preprocess(args) -> int:
    lang = LANGS[args.lang]
    cfg = PreprocessConfig(lang)
    src = _existing(args.inp)
    if args.flatten:
        trees = load_conversations(src)
        for tree in trees:
            for _, node in tree.walk():
                node.text = preprocess(node.text, cfg)
        data = flatten_conversations(trees, args.separator)
        lines = ["text_id\ttext\ttask_1"] + [f"{p.id}\t{p.text}\t{p.label.value}" for p in data]
        text = "\n".join(lines) + "\n"
    else:
        text = _preprocess_tsv(src, cfg)
    atomic_write_text(args.out, text)
    log.info("wrote %s", args.out)
    write_manifest(
        _manifest_path(args, args.out), "preprocess",
        {"lang": args.lang, "flatten": args.flatten, "separator": args.separator}, [src], [args.out],
    )
    return 0


def _spec_from(value, scheme: Scheme) -> ClassifierSpec:
    if value is None:
        return ClassifierSpec(num_classes=scheme.num_classes)
    d = dict(_read_json(value) if isinstance(value, (str, Path)) else value)
    d.setdefault("num_classes", scheme.num_classes)
    try:
        return ClassifierSpec.from_dict(d)
    except TypeError as exc:
        raise UsageError(f"bad classifier spec: {exc}") from None


def cmd_train(args) -> int:
    conf = _read_json(args.config) if args.config else {}
    scheme = SCHEMES[_pick(args.scheme, conf, "scheme", "binary")]
    lang_code = _pick(args.lang, conf, "lang", "en")
    lang = LANGS[lang_code]
    train_path = _pick(args.train, conf, "train")
    out = _pick(args.out, conf, "out", "model.olk")
    if not train_path:
        raise UsageError("--train PATH is required")
    weighted = _pick(args.weighted, conf, "weighted")
    if weighted is None:
        # code-mixed data is near balanced; weighting is opt-in there
        weighted = lang is not Language.CODE_MIXED
    cfg = TrainConfig(
        epochs=int(_pick(args.epochs, conf, "epochs", 20)),
        batch_size=int(_pick(args.batch_size, conf, "batch_size", 16)),
        learning_rate=float(_pick(args.lr, conf, "learning_rate", TrainConfig.learning_rate)),
        weighted=bool(weighted),
        seed=int(_pick(args.seed, conf, "seed", 0)),
        max_vocab=int(conf.get("max_vocab", 20000)),
    )
    spec = _spec_from(_pick(args.spec, conf, "spec"), scheme)
    src = _existing(train_path)
    data = _clean(_load_any(src, scheme, Split.TRAIN, lang), lang)
    result = train(data, spec, cfg)
    meta = {
        "scheme": scheme.value,
        "language": lang.value,
        "labels": list(result.labels),
        "train_config": cfg.to_dict(),
        "class_weights": result.weights.as_dict() if result.weights else None,
        "history": result.history.to_dict(),
    }
    save_checkpoint(out, Checkpoint(spec, result.vocab, result.params, meta))
    final = {"train_macro_f1": result.history.train_macro_f1[-1], "train_loss": result.history.loss[-1]}
    print(f"trained {cfg.epochs} epochs on {len(data)} posts: loss {final['train_loss']:.6f}, "
          f"train macro F1 {final['train_macro_f1']:.4f} -> {out}")
    write_manifest(
        _manifest_path(args, out), "train",
        {"scheme": scheme.value, "lang": lang.value, "spec": spec.to_dict(), "train_config": cfg.to_dict()},
        [src], [out], {**final, "history": result.history.to_dict(), "seconds": result.history.seconds},
    )
    return 0


def cmd_eval(args) -> int:
    ckpt = load_checkpoint(_existing(args.model))
    scheme = Scheme(ckpt.meta.get("scheme", "binary"))
    lang = Language(ckpt.meta.get("language", "en"))
    src = _existing(args.test)
    data = _clean(_load_any(src, scheme, Split.TEST, lang), lang)
    report = evaluate(ckpt.params, ckpt.spec, ckpt.vocab, data)
    print(report.format_table())
    outputs = []
    if args.out:
        atomic_write_text(args.out, report.to_json())
        outputs.append(args.out)
    mpath = _manifest_path(args, args.out)
    if mpath:
        write_manifest(mpath, "eval", {"model": str(args.model)}, [Path(args.model), src], outputs,
                       {"macro_f1": report.macro_f1, "accuracy": report.accuracy})
    return 0


def _parse_seeds(value) -> list[int]:
    if isinstance(value, str):
        try:
            return [int(s) for s in value.split(",") if s.strip()]
        except ValueError:
            raise UsageError(f"--seeds expects comma-separated integers, got {value!r}") from None
    return [int(s) for s in value]


def cmd_experiment(args) -> int:
    conf_path = _existing(args.config)
    conf = _read_json(conf_path)
    base = conf_path.parent

    def rel(p):
        q = Path(p)
        return q if q.is_absolute() or q.exists() else base / q

    seeds = _parse_seeds(_pick(args.seeds, conf, "seeds", []))
    if len(seeds) < 2:
        raise UsageError("a seed sweep needs at least two seeds")
    scheme = SCHEMES[conf.get("scheme", "binary")]
    lang = LANGS[conf.get("lang", "en")]
    if "train" not in conf or "test" not in conf:
        raise UsageError("experiment config needs 'train' and 'test' paths")
    train_src, test_src = _existing(rel(conf["train"])), _existing(rel(conf["test"]))
    spec_value = conf.get("spec")
    spec = _spec_from(rel(spec_value) if isinstance(spec_value, str) else spec_value, scheme)
    cfg = desk_preset(**conf.get("train_config", {}))
    train_data = _clean(_load_any(train_src, scheme, Split.TRAIN, lang), lang)
    test_data = _clean(_load_any(test_src, scheme, Split.TEST, lang), lang)
    report = seed_sweep(train_data, test_data, spec, cfg, seeds, workers=args.workers)
    print(report.format_table())
    out = args.out or conf.get("out")
    if out:
        atomic_write_text(out, report.to_json())
    write_manifest(
        _manifest_path(args, out) or Path(str(conf_path) + ".manifest.json"), "experiment",
        {"seeds": seeds, "spec": spec.to_dict(), "train_config": cfg.to_dict(), "scheme": scheme.value, "lang": lang.value},
        [conf_path, train_src, test_src], [out] if out else [],
        {"mean": report.mean, "stddev": report.stddev, "spread": report.spread, "spread_pct": report.spread_pct},
    )
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="offlang", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"offlang {__version__}")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--manifest", help="where to write the run manifest")
        return sp

    sp = common(sub.add_parser("stats", help="per-class counts of a dataset"))
    sp.add_argument("--data", required=True)
    sp.add_argument("--scheme", choices=SCHEMES, default="binary")
    sp.add_argument("--lang", choices=LANGS, default="en")
    sp.set_defaults(func=cmd_stats)

    sp = common(sub.add_parser("weights", help="normalized class weights"))
    sp.add_argument("--data")
    sp.add_argument("--counts", help="LABEL=N pairs instead of a data file, e.g. NOT=1342,HOF=2501")
    sp.add_argument("--scheme", choices=SCHEMES, default="binary")
    sp.add_argument("--lang", choices=LANGS, default="en")
    sp.set_defaults(func=cmd_weights)

    sp = common(sub.add_parser("preprocess", help="clean a TSV or flatten a conversation file"))
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--lang", choices=LANGS, default="en")
    sp.add_argument("--flatten", action="store_true", help="input is conversation JSON; emit one row per node")
    sp.add_argument("--separator", default=DEFAULT_SEPARATOR)
    sp.set_defaults(func=cmd_preprocess)

    sp = common(sub.add_parser("train", help="train a classifier and write a checkpoint"))
    sp.add_argument("--config")
    sp.add_argument("--train")
    sp.add_argument("--spec", help="JSON classifier spec")
    sp.add_argument("--epochs", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--weighted", action=argparse.BooleanOptionalAction, default=None)
    sp.add_argument("--lr", type=float)
    sp.add_argument("--batch-size", type=int)
    sp.add_argument("--scheme", choices=SCHEMES)
    sp.add_argument("--lang", choices=LANGS)
    sp.add_argument("--out", help="checkpoint path (default model.olk)")
    sp.set_defaults(func=cmd_train)

    sp = common(sub.add_parser("eval", help="score a checkpoint on a labeled file"))
    sp.add_argument("--model", required=True)
    sp.add_argument("--test", required=True)
    sp.add_argument("--out", help="write the JSON report here")
    sp.set_defaults(func=cmd_eval)

    sp = common(sub.add_parser("experiment", help="seed sweep from a JSON config"))
    sp.add_argument("--config", required=True)
    sp.add_argument("--seeds", help="comma-separated, e.g. 1,2,3,4,5")
    sp.add_argument("--out", help="write the JSON sweep report here")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        # CorpusError, BalanceError, TrainingError, CheckpointError and UsageError are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        log.exception("internal error")
        return 1


if __name__ == "__main__":
    sys.exit(main())
