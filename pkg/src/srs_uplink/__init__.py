"""Subband random sensing (SRS) grant-free uplink: analysis, simulation and grouping."""

from .analytic import (
    NonPositiveTransmitTime,
    overall_collision,
    pc_contention,
    pc_srs,
    sps_max_users,
    sps_required_rate,
    traffic_pmf,
)
from .grouping import GroupAssignment, assign_group_resources, group_users
from .model import (
    BLOCKED,
    ConfigError,
    ExternalOccupancy,
    GroupConfig,
    McEstimate,
    Scheme,
    SensingConfig,
    SlotOutcome,
    SpsParams,
    TrafficModel,
    UeDecision,
    UePosition,
)
from .sim import SimConfig, enumerate_exact_poc, monte_carlo_fixed_n, monte_carlo_poc, simulate_slot

__version__ = "0.1.0"
