"""Select a small set of flows to rate-control so TCP sharing satisfies the rest."""

from .fairshare import Allocation, InfeasibleAllocation, allocate, check_maxmin, unsatisfied_flows
from .jfsrd import Solution, flow_selection, rate_determination, solve
from .netmodel import EPS, Flow, Instance, InstanceError, Link, Topology, load_instance, validate_instance

__version__ = "0.1.0"
