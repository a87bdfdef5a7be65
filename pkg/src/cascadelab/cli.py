"""Config-driven experiment runner.

Subcommands: gen, components, sweep, membership, audit, attack. Every run
takes an optional JSON config plus flag overrides, and writes CSV files
whose first line is a comment carrying the 64-bit FNV-1a hash of the
effective config and the tool version. Identical (config, seed) runs write
byte-identical files at any thread count.

Exit codes: 0 success, 2 configuration error, 3 degenerate conditioning.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .attack import evaluate_attack
from .graph import (
    Graph,
    chung_lu_weights,
    dump_edge_list,
    generate_chung_lu,
    generate_er,
    load_edge_list,
)
from .percolation import (
    DegenerateConditioningError,
    conditional_giant_distributions,
    connected_components,
    estimate_giant_membership,
    percolate,
)
from .privacy import (
    MechanismSpec,
    hypothesis_test_error,
    push_through_mechanism,
    wasserstein_mechanism_scale,
)
from .seeding import child_seed

logger = logging.getLogger(__name__)

DEFAULTS = {
    "q": 0.3,
    "s": 1,
    "trials": 1000,
    "sweep_trials": 50,
    "thresholds": [0.99, 0.95, 0.90, 0.75, 0.50],
    "floors": [0.99, 0.95, 0.90, 0.75, 0.50],
    "seed": 42,
    "threads": 1,
    "epsilon": 1.0,
    "protected": [0],
    "q_grid": {"start": 0.05, "stop": 0.9, "count": 20},
    "out_dir": "out",
}

# purpose tags for deriving independent sub-streams from the master seed
_STREAM_GRAPH = 101
_STREAM_TRIALS = 102
_STREAM_SWEEP = 103
_STREAM_AUDIT = 104
_STREAM_ATTACK = 105


class ConfigError(ValueError):
    """The effective configuration is unusable."""


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


# keys that affect where or how fast a run executes, not what it computes
_NON_EXPERIMENT_KEYS = ("threads", "out_dir")


def config_hash(cfg: dict) -> int:
    """Hash of the canonical JSON form (sorted keys, compact separators).

    Thread count and output directory are excluded so reruns of the same
    experiment hash identically wherever and however they execute.
    """
    stripped = {k: v for k, v in cfg.items() if k not in _NON_EXPERIMENT_KEYS}
    text = json.dumps(stripped, sort_keys=True, separators=(",", ":"))
    return fnv1a64(text.encode("utf-8"))


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, columns: list[str], rows, cfg_hash: int) -> None:
    """Write rows with a header and a config-hash comment, LF line endings."""
    lines = [f"# config_hash={cfg_hash:016x} tool_version={__version__}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _parse_q_flag(text: str):
    """Accept '0.3', '0.1,0.2,0.3', or 'start:stop:count'."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            return [
                float(v)
                for v in np.linspace(float(start), float(stop), int(count))
            ]
        if "," in text:
            return [float(v) for v in text.split(",")]
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse q specification {text!r}") from exc


def load_config(path: str | None, overrides: dict) -> dict:
    cfg = dict(DEFAULTS)
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg.update(loaded)
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    if "graph" not in cfg:
        raise ConfigError("config needs a 'graph' entry")
    return cfg


def _q_values(cfg: dict) -> list[float]:
    grid = cfg.get("q_grid")
    if isinstance(grid, dict):
        return [
            float(v)
            for v in np.linspace(
                float(grid["start"]), float(grid["stop"]), int(grid["count"])
            )
        ]
    if isinstance(grid, (list, tuple)):
        return [float(v) for v in grid]
    raise ConfigError("q_grid must be a list or {start, stop, count}")


def _single_q(cfg: dict) -> float:
    q = cfg["q"]
    if isinstance(q, (list, tuple)):
        raise ConfigError("this subcommand expects a single q value")
    q = float(q)
    if not 0.0 < q <= 1.0:
        raise ConfigError("q must lie in (0, 1]")
    return q


def build_graph(source: dict, master_seed: int) -> tuple[str, Graph]:
    """Realize one graph source; returns (display name, graph)."""
    if not isinstance(source, dict) or "kind" not in source:
        raise ConfigError("graph source must be an object with a 'kind'")
    kind = source["kind"]
    seed = int(source.get("seed", child_seed(master_seed, _STREAM_GRAPH)))
    try:
        if kind == "er":
            n, p = int(source["n"]), float(source["p"])
            g = generate_er(n, p, seed)
            name = source.get("name", f"er_n{n}_p{p:g}")
        elif kind == "chung_lu":
            n = int(source["n"])
            d, b = float(source["d"]), float(source["b"])
            g = generate_chung_lu(chung_lu_weights(n, d, b), seed)
            name = source.get("name", f"chung_lu_n{n}_d{d:g}_b{b:g}")
        elif kind == "edge_list":
            g = load_edge_list(source["path"])
            name = source.get("name", Path(source["path"]).stem)
        else:
            raise ConfigError(f"unknown graph kind {kind!r}")
    except ConfigError:
        raise
    except (KeyError, ValueError, OSError) as exc:
        raise ConfigError(f"bad graph source: {exc}") from exc
    return name, g


def _graph_sources(cfg: dict) -> list[dict]:
    src = cfg["graph"]
    if isinstance(src, dict):
        return [src]
    if isinstance(src, list) and src and all(isinstance(s, dict) for s in src):
        return src
    raise ConfigError("'graph' must be an object or a non-empty list of objects")


def _the_graph(cfg: dict) -> Graph:
    sources = _graph_sources(cfg)
    if len(sources) != 1:
        raise ConfigError("this subcommand expects exactly one graph source")
    return build_graph(sources[0], int(cfg["seed"]))[1]


def _mechanism(cfg: dict) -> MechanismSpec:
    raw = cfg.get("mechanism")
    if raw is None:
        raise ConfigError("config needs a 'mechanism' entry")
    if not isinstance(raw, dict):
        raise ConfigError("'mechanism' must be an object")
    try:
        return MechanismSpec(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad mechanism: {exc}") from exc


def _component_stats(g: Graph, q: float, trials: int, seed: int, workers: int):
    """Mean and std of the two largest retained component sizes."""
    from .percolation import _map_trials

    def one(t: int):
        lab = connected_components(percolate(g, q, child_seed(child_seed(seed, t), 0)))
        return lab.giant_size, lab.second_size

    pairs = _map_trials(one, trials, workers)
    c1 = np.array([a for a, _ in pairs], dtype=np.float64)
    c2 = np.array([b for _, b in pairs], dtype=np.float64)
    return c1, c2


def cmd_gen(cfg: dict, out_dir: Path, cfg_hash: int) -> int:
    name, g = build_graph(_graph_sources(cfg)[0], int(cfg["seed"]))
    path = out_dir / "graph.txt"
    dump_edge_list(g, path)
    print(f"wrote {path} ({name}: {g.node_count} nodes, {g.edge_count} edges)")
    return 0


def cmd_components(cfg: dict, out_dir: Path, cfg_hash: int) -> int:
    q = _single_q(cfg)
    trials = int(cfg["trials"])
    workers = int(cfg["threads"])
    master = int(cfg["seed"])
    rows = []
    for idx, source in enumerate(_graph_sources(cfg)):
        name, g = build_graph(source, master)
        c1, c2 = _component_stats(
            g, q, trials, child_seed(child_seed(master, _STREAM_TRIALS), idx), workers
        )
        rows.append(
            (
                name,
                g.node_count,
                g.edge_count,
                q,
                trials,
                float(c1.mean()),
                float(c2.mean()),
                float(c1.std()),
                float(c2.std()),
            )
        )
    write_csv(
        out_dir / "components.csv",
        [
            "network",
            "n",
            "edges",
            "q",
            "trials",
            "mean_giant",
            "mean_second",
            "std_giant",
            "std_second",
        ],
        rows,
        cfg_hash,
    )
    return 0


def cmd_sweep(cfg: dict, out_dir: Path, cfg_hash: int) -> int:
    g = _the_graph(cfg)
    trials = int(cfg["sweep_trials"])
    workers = int(cfg["threads"])
    master = child_seed(int(cfg["seed"]), _STREAM_SWEEP)
    rows = []
    for qi, q in enumerate(_q_values(cfg)):
        if not 0.0 < q <= 1.0:
            raise ConfigError("q grid values must lie in (0, 1]")
        c1, c2 = _component_stats(g, q, trials, child_seed(master, qi), workers)
        rows.append(
            (q, float(c1.mean()) / g.node_count, float(c2.mean()) / g.node_count)
        )
    write_csv(
        out_dir / "sweep.csv",
        ["q", "mean_giant_frac", "mean_second_frac"],
        rows,
        cfg_hash,
    )
    return 0


def cmd_membership(cfg: dict, out_dir: Path, cfg_hash: int) -> int:
    g = _the_graph(cfg)
    q = _single_q(cfg)
    trials = int(cfg["trials"])
    est = estimate_giant_membership(
        g,
        q,
        trials,
        child_seed(int(cfg["seed"]), _STREAM_TRIALS),
        workers=int(cfg["threads"]),
    )
    rows = []
    for threshold in cfg["thresholds"]:
        threshold = float(threshold)
        count = int((est.frequency >= threshold).sum())
        rows.append((threshold, count, count / g.node_count))
    write_csv(
        out_dir / "membership.csv",
        ["threshold", "node_count", "node_fraction"],
        rows,
        cfg_hash,
    )
    return 0


def cmd_audit(cfg: dict, out_dir: Path, cfg_hash: int) -> int:
    g = _the_graph(cfg)
    q = _single_q(cfg)
    s = int(cfg["s"])
    trials = int(cfg["trials"])
    workers = int(cfg["threads"])
    epsilon = float(cfg["epsilon"])
    if epsilon <= 0:
        raise ConfigError("epsilon must be > 0")
    master = child_seed(int(cfg["seed"]), _STREAM_AUDIT)
    protected = cfg["protected"]
    report = wasserstein_mechanism_scale(
        g, q, s, protected, trials, child_seed(master, 0), workers=workers
    )
    comparison = _mechanism(cfg)
    # the theta gap and the comparison test are diagnostics; a world whose
    # giant is always (or never) seeded still has a well-defined W, so a
    # one-sided split downgrades them to nan instead of aborting the audit
    try:
        split = conditional_giant_distributions(
            g, q, s, trials, child_seed(master, 1), workers=workers
        )
    except DegenerateConditioningError as exc:
        logger.warning("theta split unavailable: %s", exc)
        theta = (float("nan"), float("nan"), float("nan"))
        test_rows = [
            ("comparison_kind", comparison.kind),
            ("comparison_tvd", float("nan")),
            ("comparison_test_error", float("nan")),
        ]
    else:
        z0 = push_through_mechanism(split.inactive, comparison)
        z1 = push_through_mechanism(split.active, comparison)
        test = hypothesis_test_error(z0, z1, threshold=split.midpoint)
        theta = (
            split.inactive_max,
            split.active_min,
            split.active_min - split.inactive_max,
        )
        test_rows = [
            ("comparison_kind", comparison.kind),
            ("comparison_tvd", test.tvd),
            ("comparison_test_error", test.test_error),
        ]
    lap_scale = report.w_scale / epsilon
    rows = [
        ("w_scale", report.w_scale),
        ("epsilon", epsilon),
        ("laplace_scale", lap_scale),
        ("mean_abs_noise", lap_scale),
        ("theta_inactive_max", theta[0]),
        ("theta_active_min", theta[1]),
        ("theta_gap", theta[2]),
        *test_rows,
        ("degenerate_nodes", len(report.degenerate)),
    ]
    write_csv(out_dir / "audit.csv", ["metric", "value"], rows, cfg_hash)
    node_rows = [(v, w) for v, w in sorted(report.per_node.items())]
    write_csv(
        out_dir / "audit_nodes.csv", ["node", "w_infinity"], node_rows, cfg_hash
    )
    return 0


def cmd_attack(cfg: dict, out_dir: Path, cfg_hash: int) -> int:
    g = _the_graph(cfg)
    q = _single_q(cfg)
    fixed = cfg.get("decision_threshold")
    evaluation = evaluate_attack(
        g,
        q,
        int(cfg["s"]),
        _mechanism(cfg),
        [float(f) for f in cfg["floors"]],
        int(cfg["trials"]),
        child_seed(int(cfg["seed"]), _STREAM_ATTACK),
        workers=int(cfg["threads"]),
        decision_threshold=None if fixed is None else float(fixed),
    )
    rows = [
        (fs.floor, fs.predicted_nodes, fs.coverage, fs.precision)
        for fs in evaluation.floors
    ]
    write_csv(
        out_dir / "attack.csv",
        ["floor", "predicted_nodes", "coverage", "precision"],
        rows,
        cfg_hash,
    )
    summary = [
        ("giant_status_accuracy", evaluation.giant_status_accuracy),
        ("decision_threshold", evaluation.config.decision_threshold),
        ("theta_inactive_max", evaluation.inactive_max),
        ("theta_active_min", evaluation.active_min),
        ("max_mechanism_error", evaluation.config.max_mechanism_error),
        ("tie_trials", evaluation.tie_trials),
        ("calibration_trials", evaluation.calibration_trials),
        ("evaluation_trials", evaluation.evaluation_trials),
    ]
    write_csv(out_dir / "attack_summary.csv", ["metric", "value"], summary, cfg_hash)
    return 0


_COMMANDS = {
    "gen": cmd_gen,
    "components": cmd_components,
    "sweep": cmd_sweep,
    "membership": cmd_membership,
    "audit": cmd_audit,
    "attack": cmd_attack,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cascadelab",
        description="Percolated-contagion experiments on privacy of released counts",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="master RNG seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--trials", type=int, help="trial count override")
        p.add_argument(
            "--q", help="transmission probability: X, or X,Y,Z, or start:stop:count"
        )
        p.add_argument("--threads", type=int, help="worker thread count")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        overrides: dict = {
            "seed": args.seed,
            "out_dir": args.out,
            "trials": args.trials,
            "threads": args.threads,
        }
        if args.q is not None:
            q_spec = _parse_q_flag(args.q)
            if isinstance(q_spec, list):
                overrides["q_grid"] = q_spec
            else:
                overrides["q"] = q_spec
        cfg = load_config(args.config, overrides)
        cfg_hash = config_hash(cfg)
        out_dir = Path(cfg["out_dir"])
        out_dir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, out_dir, cfg_hash)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DegenerateConditioningError as exc:
        print(f"degenerate conditioning: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
