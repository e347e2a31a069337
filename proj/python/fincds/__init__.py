"""Clearing engine for financial networks with credit default swaps.

Thin wrapper around the C++ core: exact clearing solvers, structural
analysis of the auxiliary graph, the circuit-to-network compiler, and the
fragment-cycle algebra.
"""

from ._fincds import (
    FincdsError,
    analyze,
    compile_circuit,
    export_dot,
    fragment_emit,
    fragment_rewrite,
    fragment_solve,
    solve,
    verify,
)

__all__ = [
    "FincdsError",
    "analyze",
    "compile_circuit",
    "export_dot",
    "fragment_emit",
    "fragment_rewrite",
    "fragment_solve",
    "solve",
    "verify",
]
