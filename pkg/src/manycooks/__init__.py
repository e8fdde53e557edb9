"""manycooks: deterministic N-seat cooperative kitchen simulation with
population training and cross-play evaluation."""

from .engine import (
    Action,
    AgentState,
    EngineConfig,
    GameState,
    HeldObject,
    Orientation,
    PotPhase,
    PotState,
    StepOutcome,
    featurize,
    observation_length,
    reset,
    step,
)
from .evaluate import EvalConfig, EvalReport, EvalRow, emit_report, evaluate_cell, load_report, ratio_sweep
from .layout import (
    Layout,
    LayoutError,
    Tile,
    builtin_layout,
    builtin_layout_names,
    check_reachability,
    load_layout_file,
    parse_layout,
    render_layout,
)
from .policy import (
    PolicyParams,
    Trajectory,
    action_distribution,
    argmax_action,
    reinforce_update,
    sample_action,
    scripted_policy,
    zero_params,
)
from .population import (
    Checkpoint,
    Population,
    TrainConfig,
    assign_tiers,
    build_population,
    load_population,
    sample_collaborators,
    save_population,
)
from .training import EgoTrainConfig, SeatAssignment, compose_episode, run_episode, train_ego

__version__ = "0.1.0"
