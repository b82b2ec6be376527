"""Command-line entry point: ``deal <command> [--config PATH] [--set key=value ...]``."""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from .config import ConfigError, RunConfig, format_value
from .encoders import ATTRIBUTE, STRUCTURE, ShapeError
from .evaluation import (Metrics, default_lambda, evaluate, hop_similarity_profile, link_score,
                         run_trials, write_hop_profile_csv, write_metrics_csv)
from .graph import load_graph_files, read_split, write_split
from .model import load_checkpoint, save_checkpoint
from .training import TrainingError, train, write_run_report

logger = logging.getLogger("deal")


class CommandError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# helpers


def _out_path(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg["out"], exist_ok=True)
    return os.path.join(cfg["out"], name)


def _write_echo(cfg: RunConfig, command: str):
    with open(_out_path(cfg, f"{command}.config"), "w", encoding="utf-8") as f:
        f.write(f"# effective configuration of 'deal {command}'\n")
        f.write(cfg.echo())


def _require(cfg: RunConfig, key: str) -> str:
    path = cfg[key]
    if not path:
        raise CommandError(f"config key {key!r} is required")
    if not os.path.exists(path):
        raise CommandError(f"{key} file not found: {path}")
    return path


def _load_graph(cfg: RunConfig):
    return load_graph_files(_require(cfg, "edges"), _require(cfg, "features") if cfg["features"] else None)


def _load_split(cfg: RunConfig, graph):
    with open(_require(cfg, "split"), encoding="utf-8") as f:
        split = read_split(f)
    split.check(graph)
    return split


def _split_path(cfg: RunConfig) -> str:
    return cfg["split"] or _out_path(cfg, "split.txt")


def _checkpoint_path(cfg: RunConfig) -> str:
    return cfg["checkpoint"] or _out_path(cfg, "model.ckpt")


def _lambda(cfg: RunConfig, mode: str):
    return cfg["lambda"] or default_lambda(mode)


# --------------------------------------------------------------------------
# commands


def cmd_split(cfg: RunConfig) -> int:
    graph = _load_graph(cfg)
    split = cfg.split_recipe().make(graph, cfg["seed"])
    split.check(graph)
    path = _split_path(cfg)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        write_split(split, f)
    _write_echo(cfg, "split")
    print(f"wrote {path}: {len(split.train_edges)} train, {len(split.val_pos)} val, "
          f"{len(split.test_pos)} test positives")
    return 0


def cmd_train(cfg: RunConfig) -> int:
    graph = _load_graph(cfg)
    split = _load_split(cfg, graph)
    tcfg = cfg.train_config()
    report = _out_path(cfg, "train_report.csv")
    _write_echo(cfg, "train")
    try:
        model = train(graph, split, tcfg)
    except TrainingError as exc:
        bad = [("bad_batch", "p", "q", "y", "d_sp")]
        bad += [("bad_batch", int(p), int(q), int(y), format_value(float(d)))
                for p, q, y, d in zip(exc.batch.p, exc.batch.q, exc.batch.y, exc.batch.d)]
        write_run_report(exc.curve, report, bad)
        raise CommandError(f"training aborted: {exc} (offending batch logged to {report})") from exc
    model.config = cfg.as_dict()
    path = _checkpoint_path(cfg)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    save_checkpoint(model, path)
    write_run_report(model.curve, report)
    print(f"wrote {path}; best validation {model.best_val}")
    return 0


def cmd_eval(cfg: RunConfig) -> int:
    graph = _load_graph(cfg)
    if cfg["trials"] > 1 or not cfg["checkpoint"]:
        metrics = run_trials(graph, cfg.split_recipe(), cfg.train_config(), cfg["trials"],
                             base_seed=cfg["seed"], symmetrize=cfg["symmetrize_scores"],
                             workers=cfg["parallel"])
    else:
        model = load_checkpoint(_require(cfg, "checkpoint"))
        model.features = graph.features
        split = _load_split(cfg, graph)
        metrics = evaluate(model, split, _lambda(cfg, split.mode), cfg["eval_set"],
                           cfg["symmetrize_scores"])
    path = _out_path(cfg, "metrics.csv")
    write_metrics_csv(metrics, path)
    _write_echo(cfg, "eval")
    print(f"auc {metrics.auc:.4f} (sd {metrics.auc_std:.4f})  ap {metrics.ap:.4f} "
          f"(sd {metrics.ap_std:.4f}) over {len(metrics.trial_values)} trial(s)")
    return 0


def _sweep_point(args):
    graph, split, point_cfg = args
    model = train(graph, split, point_cfg.train_config())
    lam = _lambda(point_cfg, split.mode)
    val = evaluate(model, split, lam, "val", point_cfg["symmetrize_scores"])
    test = evaluate(model, split, lam, "test", point_cfg["symmetrize_scores"])
    return val.auc, val.ap, test.auc, test.ap


def sweep(cfg: RunConfig, graph, split):
    """Train one model per grid point; returns a list of result rows in grid order."""
    if not cfg.grid:
        raise ConfigError("sweep needs at least one grid.<key> entry")
    points = list(cfg.grid_points())
    jobs = [(graph, split, pcfg) for _, pcfg in points]
    if cfg["parallel"] > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=cfg["parallel"]) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(job) for job in jobs]
    return [(assign, pcfg, res) for (assign, pcfg), res in zip(points, results)]


def cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.grid:
        raise ConfigError("sweep needs at least one grid.<key> entry")
    graph = _load_graph(cfg)
    if cfg["split"]:
        split = _load_split(cfg, graph)
    else:
        split = cfg.split_recipe().make(graph, cfg["seed"])
    rows = sweep(cfg, graph, split)
    axes = list(cfg.grid)
    with open(_out_path(cfg, "sweep.csv"), "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["point", *axes, "val_auc", "val_ap", "test_auc", "test_ap"])
        for i, (assign, _, res) in enumerate(rows):
            w.writerow([i, *(format_value(assign[a]) for a in axes), *(repr(float(x)) for x in res)])
    best = max(range(len(rows)), key=lambda i: (rows[i][2][0], -i))
    if len(axes) == 2:
        a, b = axes
        with open(_out_path(cfg, "sweep_matrix.csv"), "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow([f"{a}\\{b}", *(format_value(v) for v in cfg.grid[b])])
            lookup = {(format_value(r[0][a]), format_value(r[0][b])): r[2][0] for r in rows}
            for va in cfg.grid[a]:
                w.writerow([format_value(va), *(repr(float(lookup[(format_value(va), format_value(vb))]))
                                                for vb in cfg.grid[b])])
    with open(_out_path(cfg, "sweep_best.config"), "w", encoding="utf-8") as f:
        f.write(f"# best grid point {best} by validation AUC\n")
        f.write(rows[best][1].echo())
    _write_echo(cfg, "sweep")
    assign, _, res = rows[best]
    print("best " + ", ".join(f"{k}={format_value(v)}" for k, v in assign.items())
          + f": val auc {res[0]:.4f}, test auc {res[2]:.4f}")
    return 0


def cmd_diagnose(cfg: RunConfig) -> int:
    graph = _load_graph(cfg)
    model = load_checkpoint(_require(cfg, "checkpoint"))
    model.features = graph.features
    kinds = {"both": [STRUCTURE, ATTRIBUTE], STRUCTURE: [STRUCTURE], ATTRIBUTE: [ATTRIBUTE]}.get(cfg["kinds"])
    if kinds is None:
        raise ConfigError("kinds must be 'structure', 'attribute' or 'both'")
    for kind in kinds:
        profile = hop_similarity_profile(model, graph, cfg["h_max"], kind, cfg["hop_max_pairs"], cfg["seed"])
        path = _out_path(cfg, f"hop_profile_{kind}.csv")
        write_hop_profile_csv(profile, path)
        print(f"{kind}: " + ", ".join(f"h{h}={s:.3f}" for h, s, _ in profile))
    _write_echo(cfg, "diagnose")
    return 0


def read_attribute_file(path) -> np.ndarray:
    with open(path, encoding="utf-8") as f:
        try:
            return np.array([float(t) for line in f for t in line.split("#", 1)[0].split()])
        except ValueError as exc:
            raise CommandError(f"{path}: {exc}") from None


def _endpoint(token: str):
    token = token.strip()
    if token.lstrip("-").isdigit():
        return int(token)
    if not os.path.exists(token):
        raise CommandError(f"attribute file not found: {token}")
    return read_attribute_file(token)


def cmd_predict(cfg: RunConfig, extra_pairs=()) -> int:
    model = load_checkpoint(_require(cfg, "checkpoint"))
    if cfg["edges"]:
        model.features = _load_graph(cfg).features
    pairs = [p for p in cfg["pairs"].split(";") if p.strip()] + list(extra_pairs)
    if not pairs:
        raise CommandError("no pairs given (use --pair P:Q or pairs = P:Q; ...)")
    lam = _lambda(cfg, cfg["mode"])
    for pair in pairs:
        left, sep, right = pair.partition(":")
        if not sep:
            raise CommandError(f"pair {pair!r} is not of the form P:Q")
        p, q = _endpoint(left), _endpoint(right)
        print(f"{left.strip()}\t{right.strip()}\t{float(link_score(model, p, q, lam))!r}")
    return 0


def cmd_convert(args) -> int:
    from . import datasets
    if args.format == "planetoid":
        graph = datasets.convert_planetoid(args.inputs[0], args.name)
    elif args.format == "linqs":
        graph = datasets.convert_linqs(*args.inputs[:2])
    else:
        graph = datasets.convert_npz(args.inputs[0])
    edges, feats = datasets.export(graph, args.out, args.name)
    print(f"wrote {edges} and {feats}: {graph}")
    return 0


COMMANDS = {
    "split": cmd_split,
    "train": cmd_train,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "diagnose": cmd_diagnose,
    "predict": cmd_predict,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "predict":
            p.add_argument("--pair", action="append", default=[], metavar="P:Q",
                           help="endpoints as node ids or attribute-vector files")
    conv = sub.add_parser("convert", help="convert a public dataset to edge/feature files")
    conv.add_argument("format", choices=["planetoid", "linqs", "npz"])
    conv.add_argument("inputs", nargs="+", help="planetoid: DIR; linqs: CONTENT CITES; npz: FILE")
    conv.add_argument("--name", default="graph", help="dataset name (planetoid prefix, output stem)")
    conv.add_argument("--out", default=".")
    return parser


def make_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        cfg.set(key.strip(), value.strip())
    for key in ("seed", "trials", "out"):
        if getattr(args, key) is not None:
            cfg.set(key, getattr(args, key))
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "convert":
            return cmd_convert(args)
        cfg = make_config(args)
        if args.command == "predict":
            return cmd_predict(cfg, args.pair)
        return COMMANDS[args.command](cfg)
    except (ConfigError, CommandError, ShapeError, ValueError, OSError, RuntimeError) as exc:
        print(f"deal {args.command}: error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ConfigError) else 1


if __name__ == "__main__":
    sys.exit(main())
