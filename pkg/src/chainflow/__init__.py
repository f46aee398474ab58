"""Online admission and embedding of service chains.

The online algorithm :class:`ACE` (exponential node costs), a first-fit
baseline, exact offline solvers, an LP exporter, and generators for the
lower-bound adversary and the hardness reductions.
"""
from .ace import (
    ACE,
    AceParams,
    Decision,
    GreedyFirstFit,
    OnlineState,
    ace_run,
    ace_step,
    chain_cost,
    greedy_run,
    node_weight,
    relative_load,
)
from .exceptions import (
    ChainflowError,
    EnumerationTooLarge,
    GuardError,
    InstanceError,
    MismatchedInstanceError,
    SearchSpaceTooLarge,
)
from .generators import (
    AdversaryOutcome,
    PhaseSchedule,
    adversarial_instance,
    adversary_run,
    ksp_to_scep,
    mis_to_scep,
    random_instance,
)
from .harness import ExperimentConfig, MetricsRow, append_metrics, evaluate, read_metrics, run_experiment
from .instance import (
    FunctionPlacement,
    Instance,
    NetworkGraph,
    Request,
    RouteConstraint,
    candidate_set,
    enumerate_chains,
    hop_distances,
    load_instance,
    save_instance,
    walk_length,
)
from .lp import export_ilp, parse_lp
from .offline import (
    BranchAndBoundSolver,
    BruteForceSolver,
    SolveResult,
    branch_and_bound,
    brute_force,
    verify_solution,
)
from .validation import check_instance

__version__ = "0.1.0"
