"""Config-driven experiment runner.

Usage::

    consensus-lab <mode> --config experiment.json [--seed S] [--out DIR]
                         [--t-max T] [--runs N]
    consensus-lab examples --out DIR   # materialize the bundled configs

Modes: analyze, fixed, switching, blinking, expected-eta. A run writes
``summary.json`` plus, depending on the mode, ``trajectory.csv``,
``intervals.csv``, and a ``graph.edges`` echo into the output directory.
Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bundled
from .dynamics import SimOptions, finite_time_bound, simulate_fixed
from .graph import (
    NoSpanningTreeError,
    WeightedDigraph,
    is_delta_scrambling,
    laplacian,
    read_edge_list,
    root_partition,
    scrambling_coefficient,
    wra,
    write_edge_list,
)
from .protocol import epsilon_separation
from .protocol import from_config as function_from_config
from .switching import (
    BlinkingModel,
    BlinkingSampler,
    ConstantDuration,
    FixedGraphSampler,
    UniformDuration,
    estimate_expected_eta,
    process_for_blinking,
    process_for_graph,
    simulate_switching,
    write_interval_reports_csv,
)

MODES = ("analyze", "fixed", "switching", "blinking", "expected-eta")

_CONFIG_KEYS = {
    "mode", "graph", "function", "x0", "options", "durations", "seed", "out",
    "stride", "delta", "n_samples", "runs", "graph_dump_stride", "name",
}

_MODE_REQUIRES = {
    "analyze": ("graph",),
    "fixed": ("graph", "function", "x0"),
    "switching": ("graph", "durations", "function", "x0"),
    "blinking": ("graph", "durations", "function", "x0"),
    "expected-eta": ("graph",),
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    mode: str
    graph: dict | None = None
    function: dict | None = None
    x0: dict | None = None
    options: dict = field(default_factory=dict)
    durations: dict | None = None
    seed: int = 0
    out: str | None = None
    stride: int = 10
    delta: float | None = None
    n_samples: int = 10_000
    runs: int = 1
    graph_dump_stride: int = 0
    name: str | None = None
    base_dir: str = "."

    def sim_options(self) -> SimOptions:
        try:
            return SimOptions(**self.options)
        except TypeError as exc:
            raise ConfigError(f"unknown simulation option: {exc}") from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def load_config(path: str | Path, mode: str | None = None,
                overrides: dict | None = None) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {path}: {exc}") from None
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key, value in (overrides or {}).items():
        if value is not None:
            if key == "t_max":
                raw.setdefault("options", {})
                raw["options"]["t_max"] = value
            else:
                raw[key] = value
    cfg = ExperimentConfig(**raw, base_dir=str(path.parent))
    if mode is not None and cfg.mode != mode:
        raise ConfigError(f"config declares mode {cfg.mode!r} but {mode!r} was requested")
    if cfg.mode not in MODES:
        raise ConfigError(f"unknown mode {cfg.mode!r}; expected one of {MODES}")
    missing = [k for k in _MODE_REQUIRES[cfg.mode] if getattr(cfg, k) in (None, {})]
    if missing:
        raise ConfigError(f"mode {cfg.mode!r} needs config fields: {missing}")
    return cfg


def _derived_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence([seed, *path]).generate_state(1)[0])


def _load_graph(cfg: ExperimentConfig) -> WeightedDigraph:
    spec = cfg.graph or {}
    if "edge_list" not in spec:
        raise ConfigError(f"mode {cfg.mode!r} needs a graph edge_list path")
    path = Path(cfg.base_dir) / spec["edge_list"]
    if not path.exists():
        raise ConfigError(f"edge list file not found: {path}")
    try:
        return read_edge_list(path)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _blinking_model(cfg: ExperimentConfig) -> BlinkingModel:
    spec = (cfg.graph or {}).get("blinking")
    if spec is None:
        raise ConfigError(f"mode {cfg.mode!r} needs graph.blinking parameters")
    try:
        return BlinkingModel(**spec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad blinking parameters: {exc}") from None


def _durations(cfg: ExperimentConfig):
    spec = cfg.durations or {}
    if "constant" in spec:
        value = float(spec["constant"])
        if value <= 0:
            raise ConfigError("constant duration must be positive")
        return ConstantDuration(value)
    if "uniform" in spec:
        lo, hi = (float(v) for v in spec["uniform"])
        if not 0 <= lo < hi:
            raise ConfigError("uniform duration needs 0 <= lo < hi")
        return UniformDuration(lo, hi)
    raise ConfigError("durations must be {'constant': v} or {'uniform': [lo, hi]}")


def _function(cfg: ExperimentConfig):
    try:
        return function_from_config(cfg.function or {})
    except ValueError as exc:
        raise ConfigError(f"bad function spec: {exc}") from None


def _initial_state(cfg: ExperimentConfig, n: int) -> np.ndarray:
    spec = cfg.x0 or {}
    if "values" in spec:
        x0 = np.asarray(spec["values"], dtype=float)
        if x0.shape != (n,):
            raise ConfigError(f"x0 has {x0.size} entries but the graph has {n} vertices")
        return x0
    if "uniform" in spec:
        lo, hi = float(spec["uniform"]["lo"]), float(spec["uniform"]["hi"])
        if not lo < hi:
            raise ConfigError("x0 uniform range needs lo < hi")
        rng = np.random.default_rng(_derived_seed(cfg.seed, 0))
        return rng.uniform(lo, hi, size=n)
    raise ConfigError("x0 must be {'values': [...]} or {'uniform': {'lo': a, 'hi': b}}")


def _graph_report(graph: WeightedDigraph, delta: float | None) -> dict:
    lap = laplacian(graph)
    eta = scrambling_coefficient(-lap) if graph.n >= 2 else None
    part = root_partition(graph)
    report = {
        "n": graph.n,
        "edge_count": len(graph.edges()),
        "has_spanning_tree": part is not None,
        "s1": list(part.s1) if part else None,
        "s2": list(part.s2) if part else None,
        "eta_hat": eta,
        "scrambling": (eta > 0) if eta is not None else None,
    }
    if delta is not None:
        report["delta_scrambling"] = {str(delta): is_delta_scrambling(graph, delta)}
    return report


def _config_echo(cfg: ExperimentConfig) -> dict:
    echo = dataclasses.asdict(cfg)
    echo.pop("base_dir")
    return echo


def _defaults_echo() -> dict:
    return dataclasses.asdict(SimOptions())


def _summary_skeleton(cfg: ExperimentConfig) -> dict:
    return {
        "mode": cfg.mode,
        "seed": cfg.seed,
        "config": _config_echo(cfg),
        "defaults": _defaults_echo(),
    }


def _write_summary(out: Path, summary: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _out_dir(cfg: ExperimentConfig, config_path: Path | None) -> Path:
    if cfg.out:
        return Path(cfg.out)
    stem = cfg.name or (config_path.stem if config_path else cfg.mode)
    return Path(f"{stem}.out")


def run(cfg: ExperimentConfig, out_dir: str | Path) -> dict:
    """Execute one experiment; returns the summary dict written to disk."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = _summary_skeleton(cfg)

    if cfg.mode == "analyze":
        graph = _load_graph(cfg)
        summary["graph"] = _graph_report(graph, cfg.delta)
        if cfg.function and cfg.x0:
            g = _function(cfg)
            x0 = _initial_state(cfg, graph.n)
            try:
                summary["wra_predicted"] = wra(x0, graph)
            except NoSpanningTreeError:
                summary["wra_predicted"] = None
            part = root_partition(graph)
            if part is not None and not part.s2:
                summary["finite_time_bound"] = finite_time_bound(graph, g, x0)
        write_edge_list(graph, out / "graph.edges")
        _write_summary(out, summary)
        return summary

    if cfg.mode == "expected-eta":
        if "blinking" in (cfg.graph or {}):
            sampler = BlinkingSampler(_blinking_model(cfg))
        else:
            sampler = FixedGraphSampler(_load_graph(cfg))
        est = estimate_expected_eta(sampler, cfg.n_samples, _derived_seed(cfg.seed, 2))
        summary["expected_eta"] = {
            "mean": est.mean,
            "std_error": est.std_error,
            "n_samples": est.n_samples,
            "certified_positive": est.certified_positive,
        }
        _write_summary(out, summary)
        return summary

    opts = cfg.sim_options()
    g = _function(cfg)

    if cfg.mode == "fixed":
        graph = _load_graph(cfg)
        x0 = _initial_state(cfg, graph.n)
        result = simulate_fixed(graph, g, x0, opts, record_stride=cfg.stride)
        summary["graph"] = _graph_report(graph, cfg.delta)
        part = root_partition(graph)
        if part is not None and not part.s2:
            summary["finite_time_bound"] = finite_time_bound(graph, g, x0)
        s = result.summary
        summary["result"] = {
            "consensus_reached": s.consensus_reached,
            "consensus_value": s.consensus_value,
            "wra_predicted": s.wra_predicted,
            "time_to_tol": s.time_to_tol,
            "final_disagreement": s.final_disagreement,
            "steps": s.steps,
            "fallback_steps": s.fallback_steps,
            "options": dataclasses.asdict(s.options),
        }
        summary["x0"] = [float(v) for v in x0]
        result.trajectory.to_csv(out / "trajectory.csv")
        write_edge_list(graph, out / "graph.edges")
        _write_summary(out, summary)
        return summary

    # switching / blinking
    if cfg.mode == "switching":
        graph = _load_graph(cfg)
        proc = process_for_graph(graph, _durations(cfg))
        summary["graph"] = _graph_report(graph, cfg.delta)
        n = graph.n
        write_edge_list(graph, out / "graph.edges")
    else:
        model = _blinking_model(cfg)
        proc = process_for_blinking(model, _durations(cfg))
        summary["blinking"] = dataclasses.asdict(model)
        n = model.n
    x0 = _initial_state(cfg, n)
    try:
        result = simulate_switching(
            proc, g, x0, opts, seed=_derived_seed(cfg.seed, 1),
            record_stride=cfg.stride, delta=cfg.delta,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    s = result.summary
    summary["result"] = {
        "consensus_reached": s.consensus_reached,
        "time_to_tol": s.time_to_tol,
        "final_disagreement": s.final_disagreement,
        "steps": s.steps,
        "fallback_steps": s.fallback_steps,
        "options": dataclasses.asdict(s.options),
    }
    summary["switching"] = {
        "n_intervals": s.n_intervals,
        "epsilon": s.epsilon,
        "epsilon_exact": s.epsilon_exact,
        "cumulative_exponent": s.cumulative_exponent,
        "schedule_seed": s.seed,
        "delta": s.delta,
        "delta_scrambling_intervals": s.delta_scrambling_intervals,
        "delta_scrambling_fraction": (
            s.delta_scrambling_intervals / s.n_intervals
            if s.delta is not None and s.n_intervals else None
        ),
    }
    summary["x0"] = [float(v) for v in x0]
    result.trajectory.to_csv(out / "trajectory.csv")
    write_interval_reports_csv(result.reports, out / "intervals.csv")
    if cfg.graph_dump_stride > 0:
        gdir = out / "graphs"
        gdir.mkdir(exist_ok=True)
        from .switching import sample_schedule
        for interval in sample_schedule(proc, opts.t_max, _derived_seed(cfg.seed, 1)):
            if interval.k % cfg.graph_dump_stride == 0:
                write_edge_list(interval.graph, gdir / f"interval_{interval.k:06d}.edges")
    _write_summary(out, summary)
    return summary


def _run_indexed(args: tuple[ExperimentConfig, Path, int]) -> tuple[int, dict]:
    cfg, out_root, idx = args
    sub = dataclasses.replace(cfg, seed=_derived_seed(cfg.seed, 100, idx), runs=1)
    summary = run(sub, out_root / f"run_{idx:03d}")
    return idx, summary


def run_batch(cfg: ExperimentConfig, out_dir: str | Path) -> dict:
    """Monte Carlo batch: cfg.runs concurrent runs with derived per-run seeds."""
    out_root = Path(out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, out_root, idx) for idx in range(cfg.runs)]
    with ProcessPoolExecutor() as pool:
        results = sorted(pool.map(_run_indexed, jobs))
    summaries = [s for _, s in results]
    reached = [s.get("result", {}).get("consensus_reached") for s in summaries]
    aggregate = {
        "runs": cfg.runs,
        "seed": cfg.seed,
        "consensus_reached_count": sum(1 for r in reached if r),
        "per_run": summaries,
    }
    (out_root / "runs.json").write_text(json.dumps(aggregate, indent=2, sort_keys=True) + "\n")
    return aggregate


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="consensus-lab",
        description="Simulate and analyze discontinuous consensus protocols.",
    )
    parser.add_argument("mode", choices=MODES + ("examples",))
    parser.add_argument("--config", help="path to the experiment config (JSON)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--t-max", type=float, dest="t_max", help="override the time horizon")
    parser.add_argument("--runs", type=int, help="Monte Carlo batch size")
    parser.add_argument("--list", action="store_true", help="with mode=examples: list names only")
    args = parser.parse_args(argv)

    try:
        if args.mode == "examples":
            names = sorted(bundled.bundled_examples())
            if args.list or not args.out:
                print("\n".join(names))
                return 0
            paths = bundled.write_bundled(args.out)
            print(f"wrote {len(paths)} configs to {args.out}")
            return 0
        if not args.config:
            raise ConfigError("--config is required")
        cfg = load_config(
            args.config, mode=args.mode,
            overrides={"seed": args.seed, "out": args.out, "t_max": args.t_max, "runs": args.runs},
        )
        out = _out_dir(cfg, Path(args.config))
        if cfg.runs > 1:
            aggregate = run_batch(cfg, out)
            print(f"{cfg.runs} runs -> {out} "
                  f"(consensus in {aggregate['consensus_reached_count']}/{cfg.runs})")
        else:
            summary = run(cfg, out)
            outcome = summary.get("result", {}).get("consensus_reached")
            note = "" if outcome is None else f" consensus_reached={outcome}"
            print(f"{cfg.mode} run -> {out}{note}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # simulation / IO failures
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
