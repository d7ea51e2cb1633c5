"""rtflow: hard-real-time flow layout, rule synthesis and validation."""

from .errors import RtflowError
from .layout import LayoutReport, layout_paths, verify_layout
from .model import (
    DelayModel,
    Edge,
    FlowSpec,
    Topology,
    edge_delay_bound,
    random_topology,
)
from .sim import SEPARATE_PER_FLOW, SHARED_SINGLE, SimParams, TrafficProfile, simulate
from .solver import RelaxParams, WeightedInstance, kernel_name, mcp_heuristic

__version__ = "0.1.0"

__all__ = [
    "DelayModel",
    "Edge",
    "FlowSpec",
    "LayoutReport",
    "RelaxParams",
    "RtflowError",
    "SEPARATE_PER_FLOW",
    "SHARED_SINGLE",
    "SimParams",
    "Topology",
    "TrafficProfile",
    "WeightedInstance",
    "edge_delay_bound",
    "kernel_name",
    "layout_paths",
    "mcp_heuristic",
    "random_topology",
    "simulate",
    "verify_layout",
    "__version__",
]
