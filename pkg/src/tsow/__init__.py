"""Oracle quantum algorithms in their relativized and time-symmetrized form.

Statevector simulation of Grover, Deutsch-Jozsa, Bernstein-Vazirani and
Simon with Bob's setting held in a quantum register, enumeration of
advanced-knowledge instances, and exhaustive classical decision-tree
depths to compare against.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .algorithms import (
    build_bernstein_vazirani,
    build_deutsch_jozsa,
    build_for,
    build_grover,
    build_grover_any,
    build_grover_long,
    calibrate_long,
    run_extended,
    run_relativized,
    run_simon,
)
from .errors import TsowError
from .oracle import make_builtin, restrict
from .query import brute_force_depth, dt_depth, dt_strategy
from .rules import compare, predict, simon_advanced_knowledge_probe
from .symmetrization import (
    bob_invariance_check,
    contribution,
    enumerate_instances,
    is_valid_pair,
    make_instance,
    rebuild_check,
)
