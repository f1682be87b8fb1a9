"""vrp-benchlab: a benchmarking harness for CVRP solvers.

Instances and solutions, seeded instance generation, solver orchestration with
incumbent traces, cross-CPU time normalization, gap/primal-integral metrics,
Wilcoxon signed-rank comparisons with Bonferroni correction, and chart/table
reporting.
"""

__version__ = "0.1.0"
