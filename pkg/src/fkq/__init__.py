"""Exact q-series toolkit for torus-knot complement invariants.

Subpackages by concern: `qlaurent` (exact sparse two-variable Laurent
arithmetic with truncation-trust windows), `knots` (torus knots, connected
sums, their series and colored Jones polynomials), `holonomy` (recursion
operators and cancellation/gap diagnostics), `wrt` (analytic surgery
invariants at roots of unity), `zhat` (surgery q-series and radial limits),
`cli` (command line).
"""

from .knots import (
    FkTruncation,
    KnotSum,
    TorusKnot,
    epsilon,
    fk_connected_sum,
    fk_factor_product,
    fk_torus,
    jones_knotsum,
    jones_torus,
    parse_knot,
)
from .qlaurent import (
    Series,
    add,
    div_antisym,
    invert_q,
    mul,
    scale_q,
    scale_x,
    shift_x,
    slice_q,
    slice_x,
)

__all__ = [
    "FkTruncation",
    "KnotSum",
    "Series",
    "TorusKnot",
    "add",
    "div_antisym",
    "epsilon",
    "fk_connected_sum",
    "fk_factor_product",
    "fk_torus",
    "invert_q",
    "jones_knotsum",
    "jones_torus",
    "mul",
    "parse_knot",
    "scale_q",
    "scale_x",
    "shift_x",
    "slice_q",
    "slice_x",
]

__version__ = "0.1.0"
