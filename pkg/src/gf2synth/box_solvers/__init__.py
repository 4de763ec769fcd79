"""Local solvers for the three block problems: closed-form boxes, depth tables and all-to-all constructions."""

from .alltoall import alltoall_p1_layers, alltoall_p2_layers, alltoall_solve_p1, alltoall_solve_p2, matching_decomposition
from .boxes import box_p1_closed, box_p2_closed, solve_p1, solve_p2, solve_p3
from .solvers import AllToAllSolvers, ClosedFormLine, LocalSolvers, TableSolvers, solvers_for
from .tables import (
    BudgetExceeded,
    DepthTable,
    LocalProblem,
    TableLookupError,
    bfs_table,
    get_table,
    load_table,
    save_table,
)

__all__ = [
    "AllToAllSolvers",
    "BudgetExceeded",
    "ClosedFormLine",
    "DepthTable",
    "LocalProblem",
    "LocalSolvers",
    "TableLookupError",
    "TableSolvers",
    "alltoall_p1_layers",
    "alltoall_p2_layers",
    "alltoall_solve_p1",
    "alltoall_solve_p2",
    "bfs_table",
    "box_p1_closed",
    "box_p2_closed",
    "get_table",
    "load_table",
    "matching_decomposition",
    "save_table",
    "solve_p1",
    "solve_p2",
    "solve_p3",
    "solvers_for",
]
