"""Command-line interface: fit, select-q, simulate, and grid subcommands."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .em import EMConfig, fit_ablation, fit_multi_restart
from .harness import run_grid
from .io import check_pair, read_features, read_graph, write_features, \
    write_graph, write_result
from .selection import icl_score, select_q
from .simulate import AffiliationSpec, SETTINGS, generate, grid_specs


@dataclass
class RunManifest:
    """Validated invocation: mode, inputs, outputs, and EM overrides."""

    mode: str
    out_dir: Path
    seed: int
    cfg: EMConfig
    graph_path: Path | None = None
    features_path: Path | None = None

    def __post_init__(self):
        for path in (self.graph_path, self.features_path):
            if path is not None and not path.is_file():
                raise ValueError(f"input file not found: {path}")
        self.out_dir.mkdir(parents=True, exist_ok=True)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=int, default=0, help="master RNG seed")
    parser.add_argument("--restarts", type=int, default=10,
                        help="independent EM restarts per fit")
    parser.add_argument("--max-iters", type=int, default=100,
                        help="EM iteration cap")
    parser.add_argument("--out", default="results", help="output directory")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohsmix",
        description="Cluster graphs with vertex features via variational EM.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit_p = sub.add_parser("fit", help="fit a fixed number of classes")
    fit_p.add_argument("--graph", required=True)
    fit_p.add_argument("--features", required=True)
    fit_p.add_argument("--q", type=int, required=True, help="number of classes")
    fit_p.add_argument("--mode", default="joint",
                       choices=("joint", "graph-only", "features-only"))
    _add_common(fit_p)

    sel_p = sub.add_parser("select-q", help="scan a class-count range")
    sel_p.add_argument("--graph", required=True)
    sel_p.add_argument("--features", required=True)
    sel_p.add_argument("--qmin", type=int, required=True)
    sel_p.add_argument("--qmax", type=int, required=True)
    _add_common(sel_p)

    sim_p = sub.add_parser("simulate", help="generate synthetic datasets")
    sim_p.add_argument("--setting", choices=SETTINGS,
                       help="emit every model of one benchmark family")
    sim_p.add_argument("--n", type=int, default=150)
    sim_p.add_argument("--q", type=int, help="number of classes")
    sim_p.add_argument("--lambda", dest="lam", type=float,
                       help="within-class edge probability")
    sim_p.add_argument("--epsilon", type=float,
                       help="between-class edge probability")
    sim_p.add_argument("--gap", type=float, default=0.0,
                       help="per-coordinate distance of adjacent class means")
    sim_p.add_argument("--p", type=int, default=3, help="feature dimension")
    _add_common(sim_p)

    grid_p = sub.add_parser("grid", help="run one benchmark family")
    grid_p.add_argument("--setting", choices=SETTINGS, required=True)
    grid_p.add_argument("--replicates", type=int, default=20)
    grid_p.add_argument("--scan-qmin", type=int,
                        help="select the class count per replicate (lower end)")
    grid_p.add_argument("--scan-qmax", type=int,
                        help="select the class count per replicate (upper end)")
    _add_common(grid_p)

    return parser


def _config(args) -> EMConfig:
    return EMConfig(max_em_iters=args.max_iters, n_restarts=args.restarts,
                    rng_seed=args.seed)


def _cmd_fit(args) -> int:
    manifest = RunManifest(mode="fit", out_dir=Path(args.out), seed=args.seed,
                           cfg=_config(args), graph_path=Path(args.graph),
                           features_path=Path(args.features))
    graph = read_graph(manifest.graph_path)
    features = read_features(manifest.features_path)
    check_pair(graph, features)
    if args.mode == "joint":
        result = fit_multi_restart(graph, features, args.q, manifest.cfg)
        result.icl = icl_score(result, graph, features)
    else:
        result = fit_ablation(graph, features, args.q, manifest.cfg,
                              mode=args.mode)
    paths = write_result(result, manifest.out_dir)
    print(f"fitted q={args.q} mode={args.mode} "
          f"bound={result.final_bound:.6f} converged={result.converged}")
    for name, path in paths.items():
        print(f"wrote {name}: {path}")
    return 0


def _cmd_select_q(args) -> int:
    manifest = RunManifest(mode="select-q", out_dir=Path(args.out),
                           seed=args.seed, cfg=_config(args),
                           graph_path=Path(args.graph),
                           features_path=Path(args.features))
    graph = read_graph(manifest.graph_path)
    features = read_features(manifest.features_path)
    check_pair(graph, features)
    scan = select_q(graph, features, args.qmin, args.qmax, manifest.cfg)
    scan_path = manifest.out_dir / "scan.csv"
    with scan_path.open("w", encoding="utf-8") as handle:
        handle.write("q,icl,final_bound,status\n")
        for q in range(args.qmin, args.qmax + 1):
            if q in scan.scores:
                result = scan.results[q]
                handle.write(f"{q},{scan.scores[q]!r},"
                             f"{result.final_bound!r},ok\n")
            else:
                handle.write(f"{q},,,{scan.failures.get(q, 'failed')}\n")
    paths = write_result(scan.best, manifest.out_dir)
    print(f"selected q={scan.selected_q} over {args.qmin}..{args.qmax}")
    print(f"wrote scan: {scan_path}")
    for name, path in paths.items():
        print(f"wrote {name}: {path}")
    return 0


def _write_dataset(spec: AffiliationSpec, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    graph, features, labels = generate(spec)
    write_graph(out_dir / "graph.tsv", graph)
    write_features(out_dir / "features.csv", features)
    with (out_dir / "labels.csv").open("w", encoding="utf-8") as handle:
        handle.write("vertex,label\n")
        for i, label in enumerate(labels):
            handle.write(f"{i},{int(label)}\n")
    print(f"wrote dataset: {out_dir} "
          f"(n={spec.n}, q={spec.n_classes}, p={spec.n_features})")


def _cmd_simulate(args) -> int:
    manifest = RunManifest(mode="simulate", out_dir=Path(args.out),
                           seed=args.seed, cfg=_config(args))
    if args.setting:
        for index, spec in enumerate(grid_specs(args.setting, n=args.n)):
            child = np.random.SeedSequence(args.seed, spawn_key=(index,))
            spec = replace(spec, seed=int(child.generate_state(1)[0]))
            _write_dataset(spec, manifest.out_dir / f"{args.setting}{index:02d}")
        return 0
    if args.q is None or args.lam is None or args.epsilon is None:
        raise ValueError("explicit simulation needs --q, --lambda and --epsilon")
    spec = AffiliationSpec(
        n_classes=args.q, n=args.n, n_features=args.p,
        within_prob=args.lam, between_prob=args.epsilon,
        mean_gap=args.gap, seed=args.seed,
    )
    _write_dataset(spec, manifest.out_dir)
    return 0


def _cmd_grid(args) -> int:
    manifest = RunManifest(mode="grid", out_dir=Path(args.out),
                           seed=args.seed, cfg=_config(args))
    scan_range = None
    if (args.scan_qmin is None) != (args.scan_qmax is None):
        raise ValueError("--scan-qmin and --scan-qmax must be given together")
    if args.scan_qmin is not None:
        scan_range = (args.scan_qmin, args.scan_qmax)
    records = run_grid(args.setting, replicates=args.replicates,
                       cfg=manifest.cfg, out_dir=manifest.out_dir,
                       seed=args.seed, scan_range=scan_range)
    failures = sum(record.status != "ok" for record in records)
    print(f"grid setting={args.setting}: {len(records)} replicates, "
          f"{failures} failures -> {manifest.out_dir / 'results.csv'}")
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "select-q": _cmd_select_q,
    "simulate": _cmd_simulate,
    "grid": _cmd_grid,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
