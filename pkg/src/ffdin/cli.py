"""Command line interface: ``ffdin <command> [options]``.

Every command writes machine-readable files into ``--out`` and prints a
plain-text summary. Randomness comes only from ``--seed``. ``--config`` takes
a JSON object whose keys are option names (``segment_len`` or
``segment-len``); explicit flags override it.

Exit codes: 0 success, 2 usage, 3 invalid data, 4 I/O failure, 5 leakage.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from pathlib import Path

from . import behavior, datio, findings
from .evaluation import (
    ExperimentConfig,
    LeakageError,
    run_length_sweep,
    run_main_experiment,
    run_outcome_split,
    segment_all,
    sweep_table,
)
from .features import COLUMNS, DeceptionRankFeaturizer, unit_index
from .learn import LogisticRegressionGD, auroc
from .netcore import Layer, negative_for, slice_game
from .rank import RankConfig, deception_rank, init_prior
from .synthetic import PRESETS, generate_synthetic_dataset

EXIT_DATA, EXIT_IO, EXIT_LEAKAGE = 3, 4, 5


def _dump_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args):
    ds = datio.ingest(args.data, fmt=args.format, mapping=args.mapping, strict=not args.lenient)
    for d in ds.diagnostics:
        print(f"warning: {d}", file=sys.stderr)
    return ds


def _rank_config(args):
    return RankConfig(args.beta, args.tau, args.max_iter, args.edge_direction)


def _units(games, segment_len):
    return list(games) if not segment_len else segment_all(games, segment_len)


# -- commands ---------------------------------------------------------------

def cmd_synth(args):
    games = generate_synthetic_dataset(
        n_games=args.games, seed=args.seed, preset=args.preset, length=args.length, n_dw=args.dw)
    out = _out_dir(args)
    datio.export(games, out)
    summary = datio.summarize(games)
    _dump_json(out / "summary.json", summary.to_dict())
    print(f"wrote {len(games)} synthetic games to {out}")
    print(summary.describe())


def cmd_ingest(args):
    ds = _load(args)
    out = _out_dir(args)
    _dump_json(out / "summary.json", ds.summary.to_dict())
    (out / "diagnostics.txt").write_text("".join(f"{d}\n" for d in ds.diagnostics))
    print(ds.summary.describe())


def cmd_export(args):
    ds = _load(args)
    out = _out_dir(args)
    manifest = datio.export(ds.games, out)
    print(f"wrote {len(ds.games)} games, manifest {manifest}")


def cmd_features(args):
    ds = _load(args)
    units = _units(ds.games, args.segment_len)
    featurizer = DeceptionRankFeaturizer(
        args.beta, args.tau, args.max_iter, args.layer, args.edge_direction, args.prior_scope)
    X = featurizer.fit(ds.games).transform(units)
    labels, games, people, ids = unit_index(units)
    out = _out_dir(args)
    rows = [
        [uid, g, p, int(lab)] + [float(v) for v in x]
        for uid, g, p, lab, x in zip(ids, games, people, labels, X)
    ]
    _write_csv(out / "features.csv", ["unit", "game", "participant", "label", *COLUMNS], rows)
    print(f"{len(units)} units, {len(rows)} participant rows -> {out / 'features.csv'}")


def cmd_analyze(args):
    ds = _load(args)
    rows = findings.characterize(ds.games)
    out = _out_dir(args)
    fields = list(rows[0].to_dict()) if rows else []
    _write_csv(out / "findings.csv", fields, [list(r.to_dict().values()) for r in rows])
    pair_rows = []
    for metric in findings.PairMetric:
        for st in findings.role_pair_aggregates(ds.games, metric):
            pair_rows.append([metric.value, f"{st.pair[0].value}->{st.pair[1].value}",
                              st.mean, st.ci95[0], st.ci95[1], st.sample_count])
    _write_csv(out / "role_pairs.csv",
               ["metric", "pair", "mean", "ci_low", "ci_high", "samples"], pair_rows)
    text = findings.format_findings(rows)
    (out / "findings.txt").write_text(text + "\n")
    print(text)


def cmd_rank(args):
    ds = _load(args)
    games = ds.games
    if args.game:
        games = [g for g in games if g.game_id == args.game]
        if not games:
            raise ValueError(f"no game {args.game!r}")
    cfg = _rank_config(args)
    rows = []
    for game in games:
        if args.start is not None or args.length is not None:
            start = args.start or 0
            game = slice_game(game, start, args.length or game.length - start)
        prior = init_prior(behavior.feature_matrix(game))
        result = deception_rank(negative_for(game, args.layer), prior, cfg)
        for u in range(game.n):
            rows.append([game.game_id, u, game.roles[u].value, float(prior.scores[u]),
                         float(result.scores[u]), result.iterations, result.converged,
                         result.final_dif])
        print(f"{game.game_id}: {result.iterations} iterations, "
              f"{'converged' if result.converged else 'not converged'} "
              f"(dif {result.final_dif:.3g}); scores "
              + " ".join(f"{s:.4f}" for s in result.scores))
    out = _out_dir(args)
    _write_csv(out / "scores.csv", ["game", "participant", "role", "prior", "score",
                                    "iterations", "converged", "final_dif"], rows)


def cmd_train(args):
    ds = _load(args)
    units = _units(ds.games, args.segment_len)
    featurizer = DeceptionRankFeaturizer(
        args.beta, args.tau, args.max_iter, args.layer, args.edge_direction, args.prior_scope)
    X = featurizer.fit(ds.games).transform(units)
    labels, *_ = unit_index(units)
    model = LogisticRegressionGD(args.learning_rate, args.epochs, args.l2, args.seed).fit(X, labels)
    out = _out_dir(args)
    extra = "".join(f"featurizer.{k} = {v}\n" for k, v in sorted(featurizer.get_params().items()))
    (out / "model.txt").write_text(model.to_text() + extra)
    stats = {
        "examples": int(len(labels)),
        "initial_loss": float(model.loss_curve_[0]),
        "final_loss": float(model.loss_curve_[-1]),
        "train_auroc": auroc(model.predict_proba(X)[:, 1], labels),
        "coef": [float(c) for c in model.coef_],
        "intercept": float(model.intercept_),
    }
    _dump_json(out / "train.json", stats)
    print(f"trained on {stats['examples']} examples: loss {stats['initial_loss']:.4f} -> "
          f"{stats['final_loss']:.4f}, training AUROC {stats['train_auroc']:.3f}")


def cmd_evaluate(args):
    ds = _load(args)
    cfg = ExperimentConfig(
        segment_len=args.segment_len, folds=args.folds, train_frac=args.train_frac,
        seed=args.seed, bootstrap=args.bootstrap, per_game=args.per_game, beta=args.beta,
        tau=args.tau, max_iter=args.max_iter, layer=args.layer,
        edge_direction=args.edge_direction, prior_scope=args.prior_scope,
        learning_rate=args.learning_rate, epochs=args.epochs, l2=args.l2, grid=args.grid)
    out = _out_dir(args)
    texts = []
    report = run_main_experiment(ds.games, cfg)
    _dump_json(out / "report.json", report.to_dict(include_predictions=False))
    _write_csv(out / "predictions.csv", ["unit", "fold", "label", "prob"],
               [[p["unit"], p["fold"], p["label"], p["prob"]] for p in report.predictions])
    texts.append(report.summary())
    timings = [f"{report.label}: {report.wall_clock:.1f}s"]
    if args.sweep is not None:
        lengths = args.sweep or list(range(60, 841, 60))
        reports = run_length_sweep(ds.games, lengths, per_game=args.per_game or 100, cfg=cfg)
        _write_csv(out / "sweep.csv", ["seconds", "auroc", "ci_low", "ci_high"], sweep_table(reports))
        _dump_json(out / "sweep.json", [r.to_dict(include_predictions=False) for r in reports])
        texts.extend(r.summary() for r in reports)
        timings.extend(f"{r.label}: {r.wall_clock:.1f}s" for r in reports)
    if args.outcome_split:
        dl, dw = run_outcome_split(ds.games, cfg)
        _dump_json(out / "outcome_split.json",
                   {"DL": dl.to_dict(include_predictions=False),
                    "DW": dw.to_dict(include_predictions=False)})
        texts.extend([dl.summary(), dw.summary()])
        timings.extend(f"{r.label}: {r.wall_clock:.1f}s" for r in (dl, dw))
    text = "\n".join(texts)
    (out / "summary.txt").write_text(text + "\n\nwall clock\n" + "\n".join(timings) + "\n")
    print(text)


# -- parser -----------------------------------------------------------------

def _common(p, suppress=False):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=default(0), help="master random seed")
    p.add_argument("--config", default=default(None), help="JSON file of option defaults")
    p.add_argument("--out", default=default(None), help="output directory (default: .)")


def _data_args(p):
    p.add_argument("data", help="dataset directory or manifest")
    p.add_argument("--format", default="canonical", choices=["canonical", "column-mapped"])
    p.add_argument("--mapping", help="JSON column mapping for --format column-mapped")
    p.add_argument("--lenient", action="store_true",
                   help="skip bad records (reported as warnings) instead of failing")


def _rank_args(p):
    p.add_argument("--beta", type=float, default=0.85)
    p.add_argument("--tau", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--layer", default="look_at", choices=[l.value for l in Layer])
    p.add_argument("--edge-direction", default="incoming", choices=["incoming", "outgoing"])


def _feature_args(p, segment_default):
    p.add_argument("--segment-len", type=int, default=segment_default,
                   help="clip length in seconds (0 = whole games)")
    p.add_argument("--prior-scope", default="segment", choices=["segment", "game"])


def _train_args(p):
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--l2", type=float, default=1e-4)


def build_parser():
    parser = argparse.ArgumentParser(prog="ffdin", description=__doc__.splitlines()[0])
    _common(parser, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        _common(p, suppress=True)
        p.set_defaults(func=func)
        subs[name] = p
        return p

    p = add("synth", cmd_synth, "generate a synthetic dataset")
    p.add_argument("--games", type=int, default=26)
    p.add_argument("--length", type=int, default=2300, help="mean game length in seconds")
    p.add_argument("--preset", default="strong", choices=sorted(PRESETS))
    p.add_argument("--dw", type=int, default=None, help="number of deceiver-win games")

    p = add("ingest", cmd_ingest, "validate a dataset and summarize it")
    _data_args(p)
    p = add("export", cmd_export, "convert a dataset to the canonical layout")
    _data_args(p)

    p = add("features", cmd_features, "per-participant feature table")
    _data_args(p)
    _rank_args(p)
    _feature_args(p, 60)

    p = add("analyze", cmd_analyze, "deceiver vs non-deceiver behavior report")
    _data_args(p)

    p = add("rank", cmd_rank, "DeceptionRank scores per participant")
    _data_args(p)
    _rank_args(p)
    p.add_argument("--game", help="only this game id")
    p.add_argument("--start", type=int, help="score the clip starting here (seconds)")
    p.add_argument("--length", type=int, help="clip length (seconds)")

    p = add("train", cmd_train, "fit the classifier on a whole dataset")
    _data_args(p)
    _rank_args(p)
    _feature_args(p, 60)
    _train_args(p)

    p = add("evaluate", cmd_evaluate, "cross-validated evaluation")
    _data_args(p)
    _rank_args(p)
    _feature_args(p, 60)
    _train_args(p)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--train-frac", type=float, default=0.6)
    p.add_argument("--bootstrap", type=int, default=1000, help="bootstrap resamples")
    p.add_argument("--per-game", type=int, default=None,
                   help="sample this many random clips per game instead of tiling")
    p.add_argument("--sweep", type=int, nargs="*", default=None,
                   help="also run the clip-length sweep (seconds; default 60..840)")
    p.add_argument("--outcome-split", action="store_true",
                   help="also run separate DL-only and DW-only experiments")
    p.add_argument("--grid", action="store_true",
                   help="select beta, layer and l2 on training folds")
    return parser, subs


def _apply_config(parser, subs, argv):
    args = parser.parse_args(argv)
    config = getattr(args, "config", None)
    if not config:
        return args
    values = json.loads(Path(config).read_text())
    if not isinstance(values, dict):
        raise ValueError("--config must hold a JSON object")
    subs[args.command].set_defaults(**{k.replace("-", "_"): v for k, v in values.items()})
    return parser.parse_args(argv)


def main(argv=None):
    parser, subs = build_parser()
    try:
        args = _apply_config(parser, subs, argv)
        for name, value in (("seed", 0), ("config", None), ("out", None)):
            if not hasattr(args, name):
                setattr(args, name, value)
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda m, *a, **k: print(f"warning: {m}", file=sys.stderr)
            args.func(args)
    except datio.IngestError as exc:
        print(f"ffdin: error [data]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except LeakageError as exc:
        print(f"ffdin: error [leakage]: {exc}", file=sys.stderr)
        return EXIT_LEAKAGE
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"ffdin: error [data]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"ffdin: error [io]: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
