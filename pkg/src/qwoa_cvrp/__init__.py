"""Quantum-walk optimisation ansatz toolkit for capacitated vehicle routing.

Subpackages cover the solution-space combinatorics (``partitions``), the
problem model and cost function (``cvrp``), the index-space statevector
simulator (``qwoa``), gate-level circuit checks (``circuits``), the
variational optimiser (``optimize``), classical sampling baselines
(``baseline``), and the command line (``cli``).
"""

__version__ = "0.1.0"
