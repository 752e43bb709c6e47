"""Command-line front end.

Commands: features, train, fitdist, simulate, experiment, evaluate.
Exit codes: 0 success, 1 runtime failure, 2 input/schema error. Every
command that writes artifacts also writes a manifest with the config
hash, seeds, and output checksums; outputs carry no timestamps so reruns
with the same seed are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .assets import load_bundle
from .compare import FeatureSpec, PairFeaturizer, default_feature_bank
from .matcher import (
    MatcherModel,
    ScoreDistribution,
    fit_score_distributions,
    train_matcher,
)
from .metrics import GroupedRanking, auroc, eauroc, log_loss
from .simgen import SimConfig, build_name_model, generate_pair_files, write_truth
from . import experiment as exp
from .linkage import read_records, write_records
from .simgen import read_truth

PKG_VERSION = "0.1.0"


class InputError(ValueError):
    """Bad input file or config; maps to exit code 2."""


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n",
                    encoding="utf-8")


def _write_manifest(out_dir: Path, command: str, config: dict, seed,
                    bundle=None) -> None:
    outputs = {p.name: _sha256(p) for p in sorted(out_dir.iterdir())
               if p.is_file() and p.name != "manifest.json"}
    manifest = {
        "command": command,
        "config": config,
        "config_sha256": hashlib.sha256(
            json.dumps(config, sort_keys=True).encode()).hexdigest(),
        "seed": seed,
        "package_version": PKG_VERSION,
        "asset_versions": bundle.versions() if bundle else None,
        "outputs": outputs,
    }
    _write_json(out_dir / "manifest.json", manifest)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise InputError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"config file {path} is not valid JSON: {exc}") from exc


def _read_pairs_csv(path: str) -> tuple[list[tuple[str, str]], list[str] | None]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise InputError(f"{path}: empty file")
        cols = {name: i for i, name in enumerate(header)}
        for needed in ("name_a", "name_b"):
            if needed not in cols:
                raise InputError(f"{path}: missing required column '{needed}'")
        has_label = "label" in cols
        pairs, labels = [], []
        for row in reader:
            pairs.append((row[cols["name_a"]], row[cols["name_b"]]))
            if has_label:
                labels.append(row[cols["label"]])
    return pairs, (labels if has_label else None)


def cmd_features(args) -> int:
    bundle = load_bundle(args.assets)
    pairs, labels = _read_pairs_csv(args.input)
    featurizer = PairFeaturizer(bundle.tables, bundle.freq, bundle.surnames)
    out_path = Path(args.out)
    with out_path.open("w", encoding="utf-8", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        header = [s.name for s in featurizer.specs] + ["han_category"]
        if labels is not None:
            header.append("label")
        writer.writerow(header)
        for i, (a, b) in enumerate(pairs):
            fv = featurizer.feature_vector(a, b)
            row = [f"{v:.12g}" for v in fv.values] + [fv.han_category.value]
            if labels is not None:
                row.append(labels[i])
            writer.writerow(row)
    print(f"wrote {len(pairs)} feature rows to {out_path}")
    return 0


def _read_feature_csv(path: str):
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise InputError(f"{path}: empty file")
        if "label" not in header:
            raise InputError(f"{path}: missing required column 'label'")
        label_ix = header.index("label")
        cat_ix = header.index("han_category") if "han_category" in header else None
        spec_cols = [(i, FeatureSpec.from_name(name)) for i, name in enumerate(header)
                     if i not in (label_ix, cat_ix)]
        X_rows, cats, y = [], [], []
        cat_codes = {"NeitherHan": 0, "BothHan": 1, "Disagreeing": 2}
        for row in reader:
            X_rows.append([float(row[i]) for i, _ in spec_cols])
            y.append(int(row[label_ix]))
            cats.append(cat_codes[row[cat_ix]] if cat_ix is not None else 0)
    specs = tuple(spec for _, spec in spec_cols)
    return (np.array(X_rows), np.array(cats, dtype=np.int8),
            np.array(y, dtype=float), specs)


def cmd_train(args) -> int:
    X, cats, y, specs = _read_feature_csv(args.input)
    if len(np.unique(y)) < 2:
        raise InputError("training data must contain both labels")
    rng = np.random.Generator(np.random.PCG64(args.seed))
    order = rng.permutation(len(y))
    X, cats, y = X[order], cats[order], y[order]
    n_dev = max(1, int(len(y) * args.dev_fraction))
    dev = (X[:n_dev], cats[:n_dev], y[:n_dev])
    train = (X[n_dev:], cats[n_dev:], y[n_dev:])
    model = train_matcher(train, dev, specs, penalty=args.penalty)
    out = Path(args.out)
    model.save(out)
    print(f"trained logistic matcher on {len(y) - n_dev} pairs "
          f"({len(model.specs)} features selected); wrote {out}")
    return 0


def cmd_fitdist(args) -> int:
    with open(args.input, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise InputError(f"{args.input}: empty file")
        cols = {name: i for i, name in enumerate(header)}
        rows = list(reader)
    if "score" in cols and "label" in cols:
        scores = np.array([float(r[cols["score"]]) for r in rows])
        labels = np.array([int(r[cols["label"]]) for r in rows])
    elif "name_a" in cols and "name_b" in cols and "label" in cols:
        if not args.model:
            raise InputError("name-pair input needs --model to score pairs")
        bundle = load_bundle(args.assets)
        model = MatcherModel.load(args.model)
        scorer = exp.NamePairScorer(
            model, PairFeaturizer(bundle.tables, bundle.freq, bundle.surnames,
                                  specs=model.specs))
        pairs = [(r[cols["name_a"]], r[cols["name_b"]]) for r in rows]
        scores = scorer.scores(pairs)
        labels = np.array([int(r[cols["label"]]) for r in rows])
    else:
        raise InputError(f"{args.input}: need columns (score,label) or "
                         "(name_a,name_b,label)")
    dist = fit_score_distributions(scores, labels, bins=args.bins)
    dist.save(args.out)
    print(f"fitted score distribution from {len(scores)} labeled scores; "
          f"wrote {args.out}")
    return 0


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    if args.seed is not None:
        config["seed"] = args.seed
    try:
        sim_cfg = SimConfig.from_dict(config)
    except (ValueError, TypeError) as exc:
        raise InputError(f"bad simulation config: {exc}") from exc
    bundle = load_bundle(args.assets)
    name_model = build_name_model(bundle.corpus, bundle.tables)
    result = generate_pair_files(sim_cfg, name_model)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_records(out_dir / "file_a.csv", result.records_a)
    write_records(out_dir / "file_b.csv", result.records_b)
    write_truth(out_dir / "truth.csv", result.truth)
    _write_manifest(out_dir, "simulate", config, sim_cfg.seed, bundle)
    print(f"simulated {sim_cfg.n_records} record pairs "
          f"(name error rate {sim_cfg.name_error_rate}) into {out_dir}")
    return 0


def _experiment_files(config: dict, args, bundle) -> dict:
    data = config["data"]
    records_a = read_records(data["file_a"])
    records_b = read_records(data["file_b"])
    truth = read_truth(data["truth"])
    fields = tuple(config.get("fields", ("name", "sex", "yob", "mob", "dob", "loc")))
    dataset = exp.LinkageDataset(records_a, records_b, truth, fields)
    methods = tuple(config.get("methods") or
                    ([config["method"]] if config.get("method") else ("exact",)))
    classifier = config.get("classifier")
    scorer = None
    dist = None
    if any(m != "exact" for m in methods):
        if not classifier:
            raise InputError("non-exact methods require a 'classifier'")
        if classifier.startswith("single:"):
            model = MatcherModel.single_feature(
                FeatureSpec.from_name(classifier.split(":", 1)[1]))
            scorer = exp.NamePairScorer(
                model, PairFeaturizer(bundle.tables, bundle.freq, bundle.surnames,
                                      specs=model.specs))
        elif classifier.startswith("logistic:"):
            model = MatcherModel.load(classifier.split(":", 1)[1])
            scorer = exp.NamePairScorer(
                model, PairFeaturizer(bundle.tables, bundle.freq, bundle.surnames,
                                      specs=model.specs))
        elif classifier.startswith("external-scores:"):
            table = {}
            with open(classifier.split(":", 1)[1], "r", encoding="utf-8",
                      newline="") as handle:
                reader = csv.reader(handle)
                header = next(reader)
                cols = {name: i for i, name in enumerate(header)}
                for needed in ("name_a", "name_b", "score"):
                    if needed not in cols:
                        raise InputError(f"external scores: missing column '{needed}'")
                for row in reader:
                    table[(row[cols["name_a"]], row[cols["name_b"]])] = \
                        float(row[cols["score"]])
            scorer = exp.ExternalScorer(table)
        else:
            raise InputError(f"unknown classifier selector {classifier!r}")
        if not config.get("dist"):
            raise InputError("non-exact methods require a fitted 'dist' file")
        dist = ScoreDistribution.load(config["dist"])
    reports = exp.run_methods(
        dataset, methods, scorer=scorer, dist=dist,
        floor=float(config.get("floor", exp.DEFAULT_POSTERIOR_FLOOR)),
        candidate_floor=float(config.get("candidate_floor",
                                         exp.DEFAULT_CANDIDATE_FLOOR)),
        q=config.get("q"))
    return {"config": config, "reports": reports}


def cmd_experiment(args) -> int:
    config = _load_config(args.config)
    for key, value in (("seed", args.seed), ("method", args.method),
                       ("classifier", args.classifier)):
        if value is not None:
            config[key] = value
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = load_bundle(args.assets or config.get("assets_dir"))
    written: list[Path] = []
    try:
        if "simulate" in config:
            report = exp.run_study(config, assets_dir=args.assets,
                                   workers=args.workers or
                                   int(config.get("workers", 1)))
            if report.get("model"):
                _write_json(out_dir / "model.json", report["model"])
                written.append(out_dir / "model.json")
        elif "data" in config:
            report = _experiment_files(config, args, bundle)
        else:
            raise InputError("experiment config needs a 'simulate' or 'data' section")
        _write_json(out_dir / "report.json", report)
        written.append(out_dir / "report.json")
        _write_manifest(out_dir, "experiment", config, config.get("seed"), bundle)
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    summary = report.get("summary") or report.get("reports") or {}
    for method, row in summary.items():
        line = (f"{method}: eauroc={row.get('eauroc', float('nan')):.6f} "
                f"-LL={row.get('neg_log_lik', float('nan')):.1f}")
        if "mean_misclass_est_pm" in row:
            line += f" misclass@est={row['mean_misclass_est_pm']:.1f}"
        print(line)
    print(f"wrote {out_dir / 'report.json'}")
    return 0


def cmd_evaluate(args) -> int:
    with open(args.input, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise InputError(f"{args.input}: empty file")
        cols = {name: i for i, name in enumerate(header)}
        for needed in ("score", "label"):
            if needed not in cols:
                raise InputError(f"{args.input}: missing required column '{needed}'")
        scores, labels = [], []
        for row in reader:
            scores.append(float(row[cols["score"]]))
            labels.append(int(row[cols["label"]]))
    ranking = GroupedRanking.from_pairs(np.array(scores), np.array(labels))
    q = args.q if args.q else ranking.total_pos() / ranking.total_neg()
    report = {
        "auroc": auroc(ranking),
        "eauroc": eauroc(ranking, q),
        "q": q,
        "neg_log_lik": log_loss(np.array(scores), np.array(labels)),
        "n": len(scores),
    }
    text = json.dumps(report, indent=1, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hanlink",
        description="Record linkage toolkit with logographic name matching")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", help="compute pairwise feature vectors")
    p.add_argument("--in", dest="input", required=True,
                   help="CSV with name_a,name_b[,label]")
    p.add_argument("--out", required=True)
    p.add_argument("--assets", default=None)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train the logistic matcher")
    p.add_argument("--in", dest="input", required=True, help="feature CSV")
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--penalty", type=float, default=1e-6)
    p.add_argument("--dev-fraction", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("fitdist", help="fit the empirical score distribution")
    p.add_argument("--in", dest="input", required=True,
                   help="CSV with score,label or name_a,name_b,label")
    p.add_argument("--out", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--assets", default=None)
    p.add_argument("--bins", type=int, default=200)
    p.set_defaults(func=cmd_fitdist)

    p = sub.add_parser("simulate", help="generate a paired dataset with truth")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--assets", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a linkage experiment or study")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--method", default=None)
    p.add_argument("--classifier", default=None)
    p.add_argument("--assets", default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("evaluate", help="metrics for a per-pair score file")
    p.add_argument("--in", dest="input", required=True, help="CSV with score,label")
    p.add_argument("--out", default=None)
    p.add_argument("--q", type=float, default=None)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
