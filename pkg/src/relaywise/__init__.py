"""Power allocation and relaying-strategy selection for multi-user relay networks."""

from .allocators import (
    Allocation,
    UserClass,
    allocate,
    allocate_af,
    allocate_cf,
    allocate_direct,
    allocate_ndf,
    allocate_rdf,
    classify_user,
)
from .hybrid import HybridResult, Partition, allocate_partition, exhaustive_hybrid, norss, switch_cost
from .model import (
    LinkBudget,
    LinkDerived,
    RelayGroup,
    Scenario,
    SourceNode,
    Strategy,
    capacity_af,
    capacity_cf,
    capacity_direct,
    capacity_ndf,
    capacity_rdf,
    cf_compression_noise,
    derive,
    df_upper_bound,
    to_linear,
    user_capacity,
)
from .network import MODES, NetworkSolution, SweepResult, solve_network, sweep
from .oracle import OracleReport, grid_maximize, kkt_check
from .scenario import ScenarioError, load_scenario, parse_scenario
from .waterfill import DemandCurve, WaterLevelSolution, bounded_waterfill, solve_water_level

__version__ = "0.1.0"
