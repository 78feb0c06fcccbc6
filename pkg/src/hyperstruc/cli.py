"""Command-line interface: ``generate``, ``embed``, ``classify``, ``project``.

Settings resolve as command-line flag, then ``--config`` JSON file, then the
built-in defaults below.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import graph as gr
from .evaluate import REFERENCE_MICRO_F1, cross_validate
from .manifold import to_poincare
from .pipeline import embed_graph
from .trainer import TrainConfig, read_embedding, write_embedding
from .walker import WalkConfig, write_corpus

logger = logging.getLogger("hyperstruc")

DEFAULTS = {
    "dim": 10,
    "alpha": 0.7,
    "walks": 8,
    "walk_length": 10,
    "window": 3,
    "negatives": 20,
    "lr": 1.0,
    "batch": 50,
    "epochs": 5,
    "init_scale": 1e-3,
    "radius": 1,
    "k": 5,
    "folds": 10,
    "seed": 0,
    "threads": 1,
    "clique": 10,
    "path": 10,
}


class CLIError(Exception):
    pass


def _tunables(p: argparse.ArgumentParser, *names: str) -> None:
    knobs = {
        "dim": (int, "embedding dimension n (points live in R^{n+1})"),
        "alpha": (float, "layer-change probability"),
        "walks": (int, "walks started from every node"),
        "walk_length": (int, "nodes emitted per walk"),
        "window": (int, "context window radius"),
        "negatives": (int, "negative samples per positive pair"),
        "lr": (float, "learning rate"),
        "batch": (int, "positive pairs per batch"),
        "epochs": (int, "training epochs"),
        "init_scale": (float, "half-width of the uniform initialisation"),
        "radius": (int, "FastDTW search radius"),
        "k": (int, "neighbours for the k-NN classifier"),
        "folds": (int, "cross-validation folds"),
        "seed": (int, "random seed"),
        "threads": (int, "worker thread cap; 1 is the deterministic mode"),
    }
    for name in names:
        typ, help_ = knobs[name]
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None, help=help_)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperstruc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    embed_knobs = ("dim", "alpha", "walks", "walk_length", "window", "negatives", "lr", "batch",
                   "epochs", "init_scale", "radius", "seed", "threads")

    g = sub.add_parser("generate", help="write an experiment graph")
    g.add_argument("generator", choices=["barbell", "mirror"])
    g.add_argument("--clique", type=int, default=None, help="barbell clique size")
    g.add_argument("--path", type=int, default=None, help="barbell path length")
    g.add_argument("--edgelist", help="graph to mirror (default: Zachary's karate club)")
    g.add_argument("--bridge", action="append", default=None, metavar="U[:W]",
                   help="bridge node U to the mirror of W (default W=U); repeatable; default 1")
    g.add_argument("--out", required=True, help="output prefix")
    g.add_argument("--config")

    e = sub.add_parser("embed", help="learn hyperboloid embeddings from an edge list")
    e.add_argument("--edgelist", required=True)
    e.add_argument("--out", required=True, help="embedding file")
    e.add_argument("--cache-dir", help="reuse structural distances keyed by the edge list hash")
    e.add_argument("--corpus-out", help="also write the walk corpus here")
    e.add_argument("--config")
    _tunables(e, *embed_knobs)

    c = sub.add_parser("classify", help="k-NN cross-validation of node labels")
    c.add_argument("--labels", required=True)
    c.add_argument("--embedding", help="embedding file; omit to embed --edgelist first")
    c.add_argument("--edgelist")
    c.add_argument("--out", required=True, help="report prefix (.txt and .tsv are written)")
    c.add_argument("--dataset", help="name used to look up reference scores (brazil, usa, europe)")
    c.add_argument("--cache-dir")
    c.add_argument("--config")
    _tunables(c, *embed_knobs, "k", "folds")

    pr = sub.add_parser("project", help="Poincaré-disk coordinates and figure")
    pr.add_argument("--embedding", required=True)
    pr.add_argument("--labels", help="colour nodes by these classes")
    pr.add_argument("--out", required=True, help="output prefix (.tsv and .svg are written)")
    pr.add_argument("--format", default="svg", choices=["svg", "pdf", "png"])
    pr.add_argument("--config")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as f:
            loaded = json.load(f)
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise CLIError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _read_graph(path) -> gr.Graph:
    if not Path(path).is_file():
        raise CLIError(f"edge list not found: {path}")
    return gr.read_edge_list_file(path)


def _configs(cfg: dict) -> tuple[WalkConfig, TrainConfig]:
    walk = WalkConfig(cfg["walks"], cfg["walk_length"], cfg["alpha"], cfg["window"], rng_seed=cfg["seed"])
    train = TrainConfig(cfg["dim"], cfg["negatives"], cfg["lr"], cfg["batch"], cfg["epochs"],
                        cfg["init_scale"], cfg["seed"])
    return walk, train


def _set_threads(n: int) -> None:
    import numba

    numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


def _embed(g: gr.Graph, cfg: dict, cache_dir=None):
    _set_threads(cfg["threads"])
    walk, train = _configs(cfg)
    run = embed_graph(g, walk, train, radius=cfg["radius"], cache_dir=cache_dir)
    for stage, secs in run.timings.items():
        print(f"{stage:>10s}  {secs:8.2f}s")
    print(f"final mean loss {run.epoch_losses[-1] if run.epoch_losses else float('nan'):.6f}")
    return run


def cmd_generate(args) -> None:
    cfg = resolve(args)
    out = Path(args.out)
    if args.generator == "barbell":
        g, roles = gr.generate_barbell(args.clique or cfg["clique"], args.path or cfg["path"])
        with open(out.with_suffix(".edgelist"), "w", encoding="utf-8") as f:
            gr.write_edge_list(g, f)
        with open(out.with_suffix(".labels"), "w", encoding="utf-8") as f:
            gr.write_labels(g, roles, f)
    else:
        base = _read_graph(args.edgelist) if args.edgelist else gr.karate_graph()
        bridges = []
        for bridge in args.bridge or ["1"]:
            u, _, w = bridge.partition(":")
            w = w or u
            for t in (u, w):
                if t not in base.index:
                    raise CLIError(f"bridge node {t!r} not in the graph")
            bridges.append((base.index[u], base.index[w]))
        g, pairs = gr.generate_mirrored(base, bridges)
        with open(out.with_suffix(".edgelist"), "w", encoding="utf-8") as f:
            gr.write_edge_list(g, f)
        with open(out.with_suffix(".mirror"), "w", encoding="utf-8") as f:
            for a, b in pairs:
                f.write(f"{g.labels[a]} {g.labels[b]}\n")
    print(f"wrote {out.with_suffix('.edgelist')}: {g.node_count} nodes, {g.edge_count} edges")


def cmd_embed(args) -> None:
    cfg = resolve(args)
    g = _read_graph(args.edgelist)
    run = _embed(g, cfg, args.cache_dir)
    with open(args.out, "w", encoding="utf-8") as f:
        write_embedding(run.embedding, g.labels, f)
    if args.corpus_out:
        with open(args.corpus_out, "w", encoding="utf-8") as f:
            write_corpus(run.corpus, g.labels, f)


def _labels_for(tokens: list[str], path) -> dict[int, int]:
    # embedding rows act as the node universe for the label file
    g = gr.Graph(tuple(() for _ in tokens), tuple(tokens))
    with open(path, encoding="utf-8") as f:
        return gr.load_labels(f, g)


def cmd_classify(args) -> None:
    cfg = resolve(args)
    if args.embedding:
        with open(args.embedding, encoding="utf-8") as f:
            tokens, emb = read_embedding(f)
    elif args.edgelist:
        g = _read_graph(args.edgelist)
        emb, tokens = _embed(g, cfg, args.cache_dir).embedding, list(g.labels)
    else:
        raise CLIError("classify needs --embedding or --edgelist")
    try:
        labels = _labels_for(tokens, args.labels)
    except gr.GraphError as exc:
        raise CLIError(f"label/embedding mismatch: {exc}") from None
    report = cross_validate(emb, labels, folds=cfg["folds"], k=cfg["k"], rng=np.random.default_rng(cfg["seed"]))

    out = Path(args.out)
    lines = [f"nodes\t{len(labels)}", f"folds\t{cfg['folds']}", f"k\t{cfg['k']}", *report.lines()]
    ref = REFERENCE_MICRO_F1.get((args.dataset or "").lower())
    if ref:
        lines += [f"reference_{name}\t{val!r}" for name, val in ref.items()]
    out.with_suffix(".tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    text = [
        f"hyperbolic {cfg['k']}-NN, {cfg['folds']}-fold stratified cross-validation, {len(labels)} labelled nodes",
        f"micro-F1: {report.micro_f1:.4f}",
        "per fold: " + " ".join(f"{s:.3f}" for s in report.fold_scores),
        "confusion (rows true, columns predicted):",
        *("  " + " ".join(f"{int(c):4d}" for c in row) for row in report.confusion),
    ]
    if ref:
        text.append("reference micro-F1: " + ", ".join(f"{k} {v:.3f}" for k, v in ref.items()))
    out.with_suffix(".txt").write_text("\n".join(text) + "\n", encoding="utf-8")
    print("\n".join(text))


def cmd_project(args) -> None:
    if not Path(args.embedding).is_file():
        raise CLIError(f"embedding not found: {args.embedding}")
    with open(args.embedding, encoding="utf-8") as f:
        tokens, emb = read_embedding(f)
    disk = to_poincare(emb)
    out = Path(args.out)
    with open(out.with_suffix(".tsv"), "w", encoding="utf-8") as f:
        for token, row in zip(tokens, disk):
            f.write(token + "\t" + "\t".join(repr(float(c)) for c in row) + "\n")
    if disk.shape[1] != 2:
        print(f"dimension {disk.shape[1]} > 2: figure skipped, coordinates written")
        return
    from .plotting import save_disk_figure

    classes = None
    if args.labels:
        labels = _labels_for(tokens, args.labels)
        classes = [labels.get(u, 0) for u in range(len(tokens))]
    path = save_disk_figure(out.with_suffix("." + args.format), disk, classes, tokens)
    print(f"wrote {path}")


COMMANDS = {"generate": cmd_generate, "embed": cmd_embed, "classify": cmd_classify, "project": cmd_project}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        COMMANDS[args.command](args)
    except (CLIError, gr.GraphError, ValueError, OSError, RuntimeError) as exc:
        print(f"hyperstruc {args.command}: error: {exc}", file=sys.stderr)
        return 1
    logger.info("done in %.2fs", time.perf_counter() - t0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
