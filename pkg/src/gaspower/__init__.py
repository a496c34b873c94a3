"""Power indices for gas pipeline networks under regulated third-party access."""

from .flows import (
    PlayerFlow,
    ResidualState,
    TransferMatrices,
    UnservableDemand,
    allocate_coalition_flows,
    allocate_partition_flows,
    solve_member_flow,
)
from .games import (
    CharacteristicFunction,
    PartitionFunction,
    build_cff,
    build_pff,
    enumerate_partitions,
    externality,
    internal_profit,
)
from .lp import LPInfeasible, lp_solve
from .scenario import Network, ScenarioConfig, ScenarioError, load_scenario, parse_scenario, validate
from .solvers import (
    PowerReport,
    extended_shapley,
    minimal_claim,
    power_report,
    recursive_core_stable_partitions,
    shapley,
)
from .subnetwork import AccessSet, access_set, accessible_edges, accessible_sources

__version__ = "0.1.0"
