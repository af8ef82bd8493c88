"""Consensus under discontinuous nonlinear protocols on directed graphs."""

from .graph import (
    NoSpanningTreeError,
    RootPartition,
    WeightedDigraph,
    has_spanning_tree,
    is_delta_scrambling,
    is_strongly_connected,
    laplacian,
    left_null_vector,
    read_edge_list,
    root_partition,
    root_weights,
    scrambling_coefficient,
    wra,
    write_edge_list,
)
from .protocol import (
    AffinePiece,
    Breakpoint,
    CallablePiece,
    ClassAFunction,
    FilippovInterval,
    epsilon_separation,
    preset,
    unit_jump,
    validate_class_a,
)
from .dynamics import (
    Disagreement,
    IntegrationError,
    SimOptions,
    State,
    Trajectory,
    disagreement,
    finite_time_bound,
    lyapunov_VL,
    simulate_fixed,
    step,
)
from .switching import (
    AssumptionViolationError,
    BlinkingModel,
    BlinkingSampler,
    ConstantDuration,
    FixedGraphSampler,
    IntervalReport,
    SwitchingProcess,
    UniformDuration,
    estimate_expected_eta,
    process_for_blinking,
    process_for_graph,
    sample_blinking,
    sample_schedule,
    simulate_switching,
)
from .bundled import bundled_examples, double_star_graph, fig1_graph, fig4_graph

__all__ = [name for name in dir() if not name.startswith("_")]
