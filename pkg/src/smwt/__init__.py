"""Single-machine total weighted tardiness with sequence-dependent setups."""
from .model import EvalState, Instance, make_sequence, recompute_prefixes, total_cost, validate_instance

__all__ = ["EvalState", "Instance", "make_sequence", "recompute_prefixes", "total_cost", "validate_instance"]
