"""Robust phase-shadow estimation toolkit.

Samples CZ-S-H random circuits, simulates noisy measurement shots with
stabilizer techniques, inverts the gate-dependent measurement channel
via per-class coefficients, and recovers fidelities to stabilizer
states with cubic-time shared-stabilizer post-processing. Dense
brute-force oracles cross-validate every fast path at small qubit
counts.
"""

from .core import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
