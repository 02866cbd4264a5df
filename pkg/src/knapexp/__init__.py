"""Offline knapsack under explorable uncertainty.

Exact engines, feasibility verification, prefix-problem solvers, the
approximation pipeline and hardness-reduction generators, all in exact
rational arithmetic.
"""
from .errors import (CapacityError, EnumerationCapError, KnapExpError, ParameterError,
                     RefusalError, StructuralError)
from .model import Instance, Interval, Item, load_instance, loads_instance, random_instance

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "EnumerationCapError", "KnapExpError", "ParameterError", "RefusalError",
    "StructuralError", "Instance", "Interval", "Item", "load_instance", "loads_instance",
    "random_instance",
]
