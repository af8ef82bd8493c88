"""Randomly switching topologies: schedules, the blinking model, decay reports.

A switching process pairs an i.i.d. duration sampler with an i.i.d. graph
sampler; the two streams are seeded independently so durations and graphs
are independent by construction. Each simulated interval produces a report
comparing the realized disagreement decay with the per-interval exponential
bound ``V(t_{k+1}) <= exp(-eps * eta * dt_k) * V(t_k)``, where ``eps`` is the
certified separation ratio of the coupling function on the initial hull and
``eta`` the scrambling coefficient of the interval's graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import numpy as np

from .dynamics import SimOptions, Trajectory, _Recorder, _Stepper
from .graph import WeightedDigraph, is_delta_scrambling, laplacian, scrambling_coefficient
from .protocol import ClassAFunction, epsilon_separation, validated


class AssumptionViolationError(RuntimeError):
    """The coupling function has no positive separation ratio on the state hull."""


class DurationSampler(Protocol):
    def sample(self, rng: np.random.Generator) -> float: ...


@dataclass(frozen=True)
class ConstantDuration:
    value: float

    def sample(self, rng: np.random.Generator) -> float:
        return self.value

    @property
    def mean(self) -> float:
        return self.value


@dataclass(frozen=True)
class UniformDuration:
    low: float
    high: float

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.low, self.high))

    @property
    def mean(self) -> float:
        return 0.5 * (self.low + self.high)


GraphSampler = Callable[[np.random.Generator], WeightedDigraph]


@dataclass(frozen=True)
class FixedGraphSampler:
    graph: WeightedDigraph

    def __call__(self, rng: np.random.Generator) -> WeightedDigraph:
        return self.graph


@dataclass(frozen=True)
class BlinkingModel:
    """Ring backbone with 2K fixed neighbors plus independent on/off shortcuts.

    Every non-backbone ordered pair (i, j) is switched on independently with
    probability ``p`` for the duration of one interval; every live link has
    weight ``w``. ``K = 0`` means no backbone at all.
    """

    n: int
    K: int = 0
    p: float = 0.1
    w: float = 0.1

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("blinking model needs at least two nodes")
        if not 0 <= self.K <= (self.n - 1) // 2:
            raise ValueError("K must satisfy 0 <= 2K <= n-1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if not self.w > 0:
            raise ValueError("link weight must be positive")

    def backbone(self) -> np.ndarray:
        """Boolean matrix with entry [i, j] true when i -> j is a ring edge."""
        on = np.zeros((self.n, self.n), dtype=bool)
        for k in range(1, self.K + 1):
            idx = np.arange(self.n)
            on[idx, (idx + k) % self.n] = True
            on[idx, (idx - k) % self.n] = True
        return on


def sample_blinking(model: BlinkingModel, rng: np.random.Generator) -> WeightedDigraph:
    """One interval's graph: backbone always on, shortcuts on with probability p."""
    on = rng.random((model.n, model.n)) < model.p
    on |= model.backbone()
    np.fill_diagonal(on, False)
    # on[i, j] is the edge i -> j; the weight convention stores it at W[j, i].
    return WeightedDigraph(model.n, model.w * on.T.astype(float))


@dataclass(frozen=True)
class BlinkingSampler:
    model: BlinkingModel

    def __call__(self, rng: np.random.Generator) -> WeightedDigraph:
        return sample_blinking(self.model, rng)


@dataclass(frozen=True)
class SwitchingProcess:
    """I.i.d. interval durations plus an independent i.i.d. graph sequence."""

    durations: DurationSampler
    graphs: GraphSampler
    bound: float = math.inf  # uniform bound on |l_ij| of sampled Laplacians


def process_for_graph(graph: WeightedDigraph, durations: DurationSampler) -> SwitchingProcess:
    bound = float(np.abs(laplacian(graph)).max())
    return SwitchingProcess(durations, FixedGraphSampler(graph), bound)


def process_for_blinking(model: BlinkingModel, durations: DurationSampler) -> SwitchingProcess:
    return SwitchingProcess(durations, BlinkingSampler(model), bound=model.n * model.w)


@dataclass(frozen=True)
class ScheduleInterval:
    k: int
    t_start: float
    t_end: float
    graph: WeightedDigraph
    lap: np.ndarray = field(repr=False)

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


def sample_schedule(proc: SwitchingProcess, t_max: float, rng_seed: int) -> list[ScheduleInterval]:
    """Switch times and per-interval graphs on [0, t_max], fully seed-determined.

    Durations and graphs come from two independent child streams of the seed.
    """
    rng_dur, rng_graph = (np.random.default_rng(s) for s in np.random.SeedSequence(rng_seed).spawn(2))
    out: list[ScheduleInterval] = []
    t = 0.0
    k = 0
    while t < t_max:
        dt = float(proc.durations.sample(rng_dur))
        if dt <= 0:
            raise ValueError(f"duration sampler produced a non-positive duration {dt}")
        graph = proc.graphs(rng_graph)
        lap = laplacian(graph)
        if np.abs(lap).max() > proc.bound + 1e-12:
            raise ValueError("sampled Laplacian exceeds the declared uniform bound")
        out.append(ScheduleInterval(k, t, min(t + dt, t_max), graph, lap))
        t += dt
        k += 1
    return out


@dataclass(frozen=True)
class IntervalReport:
    k: int
    dt: float
    eta: float
    v_start: float
    v_end: float
    bound_rhs: float


def write_interval_reports_csv(reports: list[IntervalReport], path: str | Path) -> None:
    lines = ["k,dt,eta,v_start,v_end,bound_rhs"]
    for r in reports:
        lines.append(
            f"{r.k},{r.dt!r},{r.eta!r},{r.v_start!r},{r.v_end!r},{r.bound_rhs!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class SwitchingSummary:
    consensus_reached: bool
    time_to_tol: float | None
    final_disagreement: float
    epsilon: float
    epsilon_exact: bool
    cumulative_exponent: float
    n_intervals: int
    delta: float | None
    delta_scrambling_intervals: int | None
    seed: int
    steps: int
    fallback_steps: int
    options: SimOptions


@dataclass
class SwitchingRunResult:
    trajectory: Trajectory
    reports: list[IntervalReport]
    summary: SwitchingSummary


def simulate_switching(proc: SwitchingProcess, g: ClassAFunction, x0: np.ndarray,
                       opts: SimOptions, seed: int, record_stride: int = 1,
                       stop_at_consensus: bool = True,
                       delta: float | None = None) -> SwitchingRunResult:
    """Integrate across a sampled switching schedule, one report per interval.

    Aborts when the coupling function has no certified positive separation
    ratio on ``[min x0, max x0]`` (trajectories stay inside that hull, so the
    certificate is valid for the whole run).
    """
    g = validated(g)
    x = np.array(x0, dtype=float)
    if not np.isfinite(x).all():
        raise ValueError("x0 must be finite")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        lo, hi = lo - 1.0, hi + 1.0  # degenerate hull: already at consensus
    sep = epsilon_separation(g, lo, hi)
    if not sep.satisfied:
        raise AssumptionViolationError(
            f"separation ratio {sep.value} on [{lo}, {hi}] is not positive; "
            "the decay bound has no certified rate"
        )
    eps = sep.value

    schedule = sample_schedule(proc, opts.t_max, seed)
    rec = _Recorder(record_stride)
    reports: list[IntervalReport] = []
    t = 0.0
    steps = fallback_steps = 0
    time_to_tol: float | None = None
    cumulative_exponent = 0.0
    delta_count: int | None = 0 if delta is not None else None
    stop = False
    tiny = 1e-12 * max(1.0, opts.t_max)

    for interval in schedule:
        stepper = _Stepper(interval.lap, g, opts)
        v_start = float(x.max() - x.min())
        while t < interval.t_end - tiny:
            if time_to_tol is None and x.max() - x.min() < opts.consensus_tol:
                time_to_tol = t
                if stop_at_consensus:
                    stop = True
                    break
            x_new, t_new, gamma, sliding, _, fb = stepper.advance(x, t, interval.t_end - t)
            rec.maybe_add(t, x, gamma, sliding)
            x, t = x_new, t_new
            steps += 1
            fallback_steps += fb
        if not stop:
            t = interval.t_end
        dt_actual = t - interval.t_start
        if dt_actual > 0:
            eta = scrambling_coefficient(-interval.lap)
            v_end = float(x.max() - x.min())
            reports.append(IntervalReport(
                k=interval.k,
                dt=dt_actual,
                eta=eta,
                v_start=v_start,
                v_end=v_end,
                bound_rhs=v_start * math.exp(-eps * eta * dt_actual),
            ))
            cumulative_exponent += eps * eta * dt_actual
            if delta is not None and is_delta_scrambling(interval.graph, delta):
                delta_count += 1
        if stop:
            break
    if time_to_tol is None and x.max() - x.min() < opts.consensus_tol:
        time_to_tol = t

    gamma, sliding, _, _ = stepper.selection(x)
    rec.add(t, x, gamma, sliding)
    meta = {"dt": opts.dt, "band": opts.band, "t_max": opts.t_max,
            "record_stride": record_stride, "seed": seed}
    return SwitchingRunResult(
        trajectory=rec.build(meta),
        reports=reports,
        summary=SwitchingSummary(
            consensus_reached=time_to_tol is not None,
            time_to_tol=time_to_tol,
            final_disagreement=float(x.max() - x.min()),
            epsilon=eps,
            epsilon_exact=sep.exact,
            cumulative_exponent=cumulative_exponent,
            n_intervals=len(reports),
            delta=delta,
            delta_scrambling_intervals=delta_count,
            seed=seed,
            steps=steps,
            fallback_steps=fallback_steps,
            options=opts,
        ),
    )


@dataclass(frozen=True)
class EtaEstimate:
    mean: float
    std_error: float
    n_samples: int

    @property
    def certified_positive(self) -> bool:
        """Three-sigma certificate that the expected scrambling coefficient is positive."""
        return self.mean - 3.0 * self.std_error > 0


def estimate_expected_eta(graph_sampler: GraphSampler, n_samples: int, rng_seed: int) -> EtaEstimate:
    """Monte Carlo estimate of E[eta(-L)] over the sampler's graph distribution."""
    if n_samples < 2:
        raise ValueError("need at least two samples for a standard error")
    rng = np.random.default_rng(rng_seed)
    vals = np.empty(n_samples)
    for i in range(n_samples):
        vals[i] = scrambling_coefficient(-laplacian(graph_sampler(rng)))
    std = float(vals.std(ddof=1))
    return EtaEstimate(float(vals.mean()), std / math.sqrt(n_samples), n_samples)
