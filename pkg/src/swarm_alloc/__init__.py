"""Resource selection for cloud-edge capacities.

Three allocators share one cost model: an exhaustive centralised search, a
first-fit heuristic, and a consensus-based bundle auction run over a
simulated synchronous network.
"""

from .baselines import centralised_exhaustive, collect_offers, first_fit
from .domain import (
    Allocation,
    Application,
    Capacity,
    Failure,
    Kind,
    Location,
    Microservice,
    Outcome,
    QosProfile,
    Scenario,
    validate_allocation,
)
from .harness import Method, RunRecord, run_experiment, run_scale_suite
from .scenario import ScenarioSpec, generate_scenario
from .scoring import NormBounds, Weights, allocation_cost, ms_cost, utility
from .simnet import NetworkStats, allocate_cbba
from .stats import KsResult, ks_two_sample, report

__version__ = "0.1.0"

__all__ = [
    "Allocation", "Application", "Capacity", "Failure", "Kind", "KsResult", "Location", "Method",
    "Microservice", "NetworkStats", "NormBounds", "Outcome", "QosProfile", "RunRecord", "Scenario",
    "ScenarioSpec", "Weights", "allocate_cbba", "allocation_cost", "centralised_exhaustive", "collect_offers",
    "first_fit", "generate_scenario", "ks_two_sample", "ms_cost", "report", "run_experiment", "run_scale_suite",
    "utility", "validate_allocation",
]
