"""connkit: assembly connection graphs, pose recovery, and insertion search.

The package covers the full loop for connector-based assemblies: a typed
graph of parts and fastening points, validation and step planning, SVD
pose recovery from matched attachment features, extraction datasets with
scoring and a random baseline, a contact-rich insertion simulator with
three search strategies, and a two-stage model pipeline for reading
connections out of manual images.
"""

from .errors import (
    ConnkitError,
    DegenerateInput,
    InsufficientCandidates,
    InvalidGraph,
    LengthMismatch,
    MissingAsset,
    ParseError,
    PromptInputError,
    SchemaError,
    StepMismatch,
    UnparseableResponse,
    UnsolvedPose,
)
from .geometry import (
    RigidTransform,
    geodesic_distance,
    minimal_rotation_between,
    random_rotation,
    rotation_about_axis,
)
from .graph import (
    AssemblyGraph,
    AttachmentFeature,
    ConnectionEdge,
    ConnectionInstance,
    ConnectionOperation,
    ConnectorType,
    GraphNode,
    NodeKind,
    ValidationReport,
    graph_from_dict,
    graph_to_dict,
    load_graph,
    load_graph_file,
    plan_sequence,
    save_graph,
    save_graph_file,
    swap_equivalent,
    validate,
)
from .pose import (
    AlignmentResult,
    AssemblySolution,
    Degeneracy,
    MatchedPairs,
    PoseMetrics,
    alignment_objective,
    chamfer_distance,
    pose_metrics,
    solve_alignment,
    solve_assembly,
)
from .fixtures import fixture, fixture_names, write_fixture_files
from .extraction import (
    DatasetScore,
    ExtractionDataset,
    ExtractionStep,
    PairLabel,
    StepPrediction,
    baseline_success_probability,
    dataset_from_graph,
    enumerate_baseline,
    random_baseline,
    score_dataset,
    score_step,
)
from .sim import (
    Command,
    ContactReading,
    HoleSpec,
    Phase,
    SimParams,
    World,
    check_success,
    init_trial,
    step_sim,
)
from .strategies import (
    STRATEGY_NAMES,
    StrategyConfig,
    TrialReport,
    run_benchmark,
    run_grid_search,
    run_hybrid_search,
    run_random_search,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentResult",
    "AssemblyGraph",
    "AssemblySolution",
    "AttachmentFeature",
    "Command",
    "ConnectionEdge",
    "ConnectionInstance",
    "ConnectionOperation",
    "ConnectorType",
    "ConnkitError",
    "ContactReading",
    "DatasetScore",
    "Degeneracy",
    "DegenerateInput",
    "ExtractionDataset",
    "ExtractionStep",
    "GraphNode",
    "HoleSpec",
    "InsufficientCandidates",
    "InvalidGraph",
    "LengthMismatch",
    "MatchedPairs",
    "MissingAsset",
    "NodeKind",
    "PairLabel",
    "ParseError",
    "Phase",
    "PoseMetrics",
    "PromptInputError",
    "RigidTransform",
    "STRATEGY_NAMES",
    "SchemaError",
    "SimParams",
    "StepMismatch",
    "StepPrediction",
    "StrategyConfig",
    "TrialReport",
    "UnparseableResponse",
    "UnsolvedPose",
    "ValidationReport",
    "World",
    "alignment_objective",
    "baseline_success_probability",
    "chamfer_distance",
    "check_success",
    "dataset_from_graph",
    "enumerate_baseline",
    "fixture",
    "fixture_names",
    "geodesic_distance",
    "graph_from_dict",
    "graph_to_dict",
    "init_trial",
    "load_graph",
    "load_graph_file",
    "minimal_rotation_between",
    "plan_sequence",
    "pose_metrics",
    "random_baseline",
    "random_rotation",
    "rotation_about_axis",
    "run_benchmark",
    "run_grid_search",
    "run_hybrid_search",
    "run_random_search",
    "save_graph",
    "save_graph_file",
    "score_dataset",
    "score_step",
    "solve_alignment",
    "solve_assembly",
    "step_sim",
    "summarize",
    "swap_equivalent",
    "validate",
    "write_fixture_files",
]
