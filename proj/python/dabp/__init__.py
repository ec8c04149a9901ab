"""Min-sum belief propagation toolkit for constraint optimization.

The heavy lifting lives in the compiled extension; this package re-exports
its surface: instance generation and IO, the BP solver family (vanilla,
damped, split-graph, and the attentively learned variant), and the exact
oracle for small instances.
"""

from dabp._core import (
    CostFunction,
    Instance,
    assignment_probs,
    dumps,
    generate,
    graph_info,
    load,
    loads,
    save,
    smoothed_loss,
    smoothing_gap,
    solve,
    solve_exact,
    split_scfg,
    total_cost,
)

__all__ = [
    "CostFunction",
    "Instance",
    "assignment_probs",
    "dumps",
    "generate",
    "graph_info",
    "load",
    "loads",
    "save",
    "smoothed_loss",
    "smoothing_gap",
    "solve",
    "solve_exact",
    "split_scfg",
    "total_cost",
]
