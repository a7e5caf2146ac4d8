"""Causal-order analysis of two-party quantum measurement statistics.

Simulate sequential, parallel and individual strategies, reconstruct Choi
matrices and pseudo-density matrices from outcome tables, and test which
causal structures a table is compatible with.
"""

from __future__ import annotations

from .errors import CausalOrderError
from .sim import JointDistribution, simulate_born, simulate_exact

__all__ = ["CausalOrderError", "JointDistribution", "simulate_born", "simulate_exact"]
__version__ = "0.1.0"
