"""Command-line driver: dataset generation, runs, and comparisons.

Exit codes: 0 success, 2 usage, 3 I/O, 4 config, 5 internal invariant
violation.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .core import (ConfigError, Dataset, DatasetFormatError, DatasetParseError,
                   EmptyDatasetError, SimConfig, load_dataset)
from .datasets import (PAPER_GAUSSIAN, GaussianCluster, GaussianSpec,
                       generate_gaussian, size_experiment)
from .engine import run as engine_run
from .grid import EMPTY, Grid
from .metrics import ClusterReport, extract_clusters, total_entropy

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CONFIG = 4
EXIT_INTERNAL = 5

_PALETTE = [
    (220, 30, 30), (30, 30, 220), (30, 160, 30), (240, 160, 0),
    (160, 0, 160), (0, 170, 170), (130, 70, 0), (250, 110, 180),
]
_AGENT_COLOR = (0, 0, 0)
_EMPTY_COLOR = (255, 255, 255)
_GLYPHS = ("circle", "triangle", "dot", "plus")


class AlignmentError(ValueError):
    """Entropy series do not share a common step grid."""


def _cluster_letter(i: int) -> str:
    letters = ""
    i += 1
    while i > 0:
        i, rem = divmod(i - 1, 26)
        letters = chr(ord("A") + rem) + letters
    return letters


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_dataset_csv(dataset: Dataset, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for item in dataset.items:
            fields = [repr(float(f)) for f in item.features]
            if item.label is not None:
                fields.append(item.label)
            fh.write(",".join(fields) + "\n")


def _label_palette(dataset: Dataset) -> dict[str, tuple[int, int, int]]:
    labels = sorted({l for l in dataset.labels if l is not None}) or ["all"]
    return {l: _PALETTE[i % len(_PALETTE)] for i, l in enumerate(labels)}


def write_ppm(grid: Grid, dataset: Dataset, path: str) -> None:
    """Plain-text PPM, one pixel per cell; items over agents over empty."""
    palette = _label_palette(dataset)
    lines = [f"P3 {grid.side} {grid.side} 255"]
    for r in range(grid.side):
        row = []
        for c in range(grid.side):
            oid = int(grid.items[r, c])
            if oid != EMPTY:
                color = palette.get(dataset.labels[oid] or "all", _PALETTE[0])
            elif grid.agents[r, c] != EMPTY:
                color = _AGENT_COLOR
            else:
                color = _EMPTY_COLOR
            row.append("%d %d %d" % color)
        lines.append(" ".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_svg(grid: Grid, dataset: Dataset, path: str, cell: int = 8) -> None:
    """Scalable snapshot with one glyph per item, by class label."""
    labels = sorted({l for l in dataset.labels if l is not None}) or ["all"]
    glyph_of = {l: _GLYPHS[i % len(_GLYPHS)] for i, l in enumerate(labels)}
    size = grid.side * cell
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>']
    h = cell / 2
    for r in range(grid.side):
        for c in range(grid.side):
            oid = int(grid.items[r, c])
            if oid == EMPTY:
                continue
            x, y = c * cell + h, r * cell + h
            g = glyph_of[dataset.labels[oid] or "all"]
            if g == "circle":
                parts.append(f'<circle cx="{x}" cy="{y}" r="{h*0.7:.1f}" '
                             'fill="none" stroke="black"/>')
            elif g == "dot":
                parts.append(f'<circle cx="{x}" cy="{y}" r="{h*0.6:.1f}" fill="black"/>')
            elif g == "triangle":
                parts.append(f'<polygon points="{x},{y-h*0.7:.1f} {x-h*0.7:.1f},{y+h*0.7:.1f} '
                             f'{x+h*0.7:.1f},{y+h*0.7:.1f}" fill="none" stroke="black"/>')
            else:
                parts.append(f'<path d="M {x-h*0.7:.1f} {y} H {x+h*0.7:.1f} '
                             f'M {x} {y-h*0.7:.1f} V {y+h*0.7:.1f}" stroke="black"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


def write_cluster_report(report: ClusterReport, path: str, connectivity: int = 8) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# clusters: {report.n_clusters} ({connectivity}-connectivity)\n")
        for i, cl in enumerate(report.clusters):
            fh.write(f"({_cluster_letter(i)}) [size={cl.size} majority={cl.majority_label} "
                     f"purity={cl.purity:.3f}] " + ", ".join(str(m) for m in cl.members) + "\n")


def _parse_cluster_flag(text: str) -> GaussianCluster:
    try:
        label, rest = text.split(":", 1)
        mx, my, sd, count = rest.split(",")
        return GaussianCluster(label, float(mx), float(my), float(sd), int(count))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad --clusters entry {text!r}: "
                          "expected label:mean_x,mean_y,stddev,count") from exc


def cmd_generate(args) -> int:
    if args.paper_gaussian:
        spec = PAPER_GAUSSIAN
    elif args.clusters:
        spec = GaussianSpec(tuple(_parse_cluster_flag(c) for c in args.clusters))
    else:
        raise ConfigError("need --paper-gaussian or --clusters")
    dataset = generate_gaussian(spec, np.random.default_rng(args.seed))
    write_dataset_csv(dataset, args.output)
    _write_manifest(args.output + ".manifest.json", {
        "artifact": "acluster",
        "version": __version__,
        "command": "generate",
        "seed": args.seed,
        "clusters": [asdict(c) for c in spec.clusters],
        "sha256": _sha256(args.output),
        "outputs": [os.path.basename(args.output)],
    })
    print(f"wrote {len(dataset)} items to {args.output}")
    return EXIT_OK


def _entropy_header(dataset: Dataset) -> list[str]:
    labels = sorted({l for l in dataset.labels if l is not None}) or ["all"]
    return ["t"] + [f"E_{l}" for l in labels] + ["E_total"]


def cmd_run(args) -> int:
    dataset = load_dataset(args.dataset, label_column=args.labels)
    sizing = size_experiment(len(dataset)) if args.auto_size else {}
    k2 = args.k2
    if k2 is None:
        # LF baseline default differs from the threshold-composition default
        k2 = 0.15 if args.type == 4 else 0.3
    cfg = SimConfig(
        k1=args.k1, k2=k2, beta=args.beta, gamma=args.gamma, eta=args.eta,
        k_evap=args.kevap, p_dep=args.pdep, theta_count=args.theta,
        steepness=args.steepness, t_max=args.tmax, function_type=args.type,
        lf_alpha=args.lf_alpha, lf_s=args.lf_s,
        grid_side=sizing.get("grid_side", args.grid_side),
        n_agents=sizing.get("n_agents", args.agents),
        seed=args.seed, drain_cap=args.drain_cap,
        shuffle_agents=args.shuffle_agents,
    )
    outdir = args.output
    os.makedirs(outdir, exist_ok=True)

    if args.snapshots is not None:
        snap_steps = sorted({int(s) for s in args.snapshots.split(",")})
    else:
        snap_steps = sorted({t for t in (1, 10**4, 10**5, 10**6) if t <= cfg.t_max}
                            | {cfg.t_max})
    header = _entropy_header(dataset)
    labels = [h[2:] for h in header[1:-1]]
    entropy_path = os.path.join(outdir, "entropy.csv")
    entropy_rows: list[list[str]] = []
    snapshot_files: list[str] = []

    def on_entropy(t, state):
        if t > cfg.t_max:
            return  # drain end; off the interval grid, kept out of the series
        rec = total_entropy(state.grid, dataset, t)
        row = [str(t)] + [f"{rec.per_class[l]:.10f}" if l in rec.per_class else ""
                          for l in labels] + [f"{rec.total:.10f}"]
        entropy_rows.append(row)

    def on_snapshot(t, state):
        name = "snapshot_final.ppm" if t > cfg.t_max else f"snapshot_t{t}.ppm"
        write_ppm(state.grid, dataset, os.path.join(outdir, name))
        snapshot_files.append(name)
        if args.svg:
            svg_name = name[:-4] + ".svg"
            write_svg(state.grid, dataset, os.path.join(outdir, svg_name))
            snapshot_files.append(svg_name)

    state = engine_run(cfg, dataset, observers=[
        (args.entropy_interval, on_entropy),
        (snap_steps, on_snapshot),
    ])

    with open(entropy_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(entropy_rows)

    report = extract_clusters(state.grid, dataset, connectivity=args.connectivity)
    write_cluster_report(report, os.path.join(outdir, "clusters.txt"),
                         args.connectivity)

    outputs = sorted(["entropy.csv", "clusters.txt"] + snapshot_files)
    _write_manifest(os.path.join(outdir, "manifest.json"), {
        "artifact": "acluster",
        "version": __version__,
        "command": "run",
        "config": asdict(cfg),
        "dataset": {"path": os.path.basename(args.dataset),
                    "sha256": _sha256(args.dataset),
                    "label_column": args.labels},
        "entropy_interval": args.entropy_interval,
        "snapshot_steps": snap_steps,
        "connectivity": args.connectivity,
        "outputs": outputs,
    })
    print(f"run finished at t={state.t}; {report.n_clusters} clusters; "
          f"outputs in {outdir}")
    return EXIT_OK


def _read_entropy_series(path: str) -> tuple[list[int], list[float]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "t" or header[-1] != "E_total":
            raise DatasetFormatError(f"{path}: not an entropy series")
        ts, totals = [], []
        for row in reader:
            ts.append(int(row[0]))
            totals.append(float(row[-1]))
    return ts, totals


def cmd_compare(args) -> int:
    if len(args.series) < 2:
        raise ConfigError("need at least 2 entropy series")
    names, grids, columns = [], [], []
    for path in args.series:
        ts, totals = _read_entropy_series(path)
        name = os.path.splitext(os.path.basename(path))[0]
        if name == "entropy":
            name = os.path.basename(os.path.dirname(os.path.abspath(path))) or name
        while name in names:
            name += "_"
        names.append(name)
        grids.append(ts)
        columns.append(totals)
    if any(g != grids[0] for g in grids[1:]):
        raise AlignmentError("entropy series do not share a common step grid")
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t"] + names)
        for i, t in enumerate(grids[0]):
            writer.writerow([t] + [f"{col[i]:.10f}" for col in columns])
    ranking = sorted(zip(names, (col[-1] for col in columns)), key=lambda p: p[1])
    print(f"{'run':<24} final E_total")
    for name, final in ranking:
        print(f"{name:<24} {final:.6f}")
    print(f"merged series written to {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acluster",
                                     description="Stigmergic ant clustering on a toroidal grid")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic Gaussian benchmark dataset")
    gen.add_argument("--paper-gaussian", action="store_true",
                     help="the 4x200 corner-cluster benchmark")
    gen.add_argument("--clusters", nargs="+", metavar="L:MX,MY,SD,N",
                     help="custom clusters, e.g. A:0.5,0.5,0.1,10")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--output", default="data.csv")
    gen.set_defaults(func=cmd_generate)

    runp = sub.add_parser("run", help="run the clustering simulation on a dataset")
    runp.add_argument("dataset", help="delimiter-separated feature table")
    runp.add_argument("--labels", action="store_true",
                      help="treat the trailing column as a class label")
    runp.add_argument("--type", type=int, default=1, choices=(1, 2, 3, 4),
                      help="pick/drop probability function variant")
    runp.add_argument("--k1", type=float, default=0.1)
    runp.add_argument("--k2", type=float, default=None,
                      help="default 0.3 (0.15 for --type 4)")
    runp.add_argument("--beta", type=float, default=3.5)
    runp.add_argument("--gamma", type=float, default=0.2)
    runp.add_argument("--eta", type=float, default=0.07)
    runp.add_argument("--kevap", type=float, default=0.015)
    runp.add_argument("--pdep", type=float, default=0.0025)
    runp.add_argument("--theta", type=float, default=5.0)
    runp.add_argument("--steepness", type=float, default=2.0)
    runp.add_argument("--lf-alpha", type=float, default=0.3)
    runp.add_argument("--lf-s", type=int, default=3)
    runp.add_argument("--tmax", type=int, default=10**6)
    runp.add_argument("--grid-side", type=int, default=57)
    runp.add_argument("--agents", type=int, default=80)
    runp.add_argument("--auto-size", action="store_true",
                      help="size grid and ant count from the item count")
    runp.add_argument("--seed", type=int, default=1)
    runp.add_argument("--drain-cap", type=int, default=10**5)
    runp.add_argument("--shuffle-agents", action="store_true",
                      help="randomize agent order each step instead of fixed id order")
    runp.add_argument("--entropy-interval", type=int, default=1000)
    runp.add_argument("--snapshots", default=None,
                      help="comma-separated step numbers (default 1,1e4,1e5,1e6 capped to tmax)")
    runp.add_argument("--svg", action="store_true", help="also write SVG snapshots")
    runp.add_argument("--connectivity", type=int, default=8, choices=(4, 8))
    runp.add_argument("-o", "--output",
                      default=os.environ.get("ACLUSTER_OUTDIR", "out"))
    runp.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="merge entropy series and rank final entropy")
    cmp_.add_argument("series", nargs="+", help="entropy.csv paths")
    cmp_.add_argument("-o", "--output", default="compare.csv")
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (FileNotFoundError, PermissionError, IsADirectoryError,
            DatasetFormatError, DatasetParseError, EmptyDatasetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, AlignmentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssertionError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
