"""Trajectory metrics, cost accounting and paired statistics."""

from .cost import (BenchmarkCost, CostBreakdown, CostModel, ModelPrice, PriceTable, TaskSummary,
                   amortization_ratio, amortized_cost, benchmark_cost, dollar_cost, exec_cost,
                   load_cost_model, load_prices, per_task_cost, pre_eval_cost)
from .report import (JSON_KEYS, MetricReport, arr, block_stats, cache_utilization,
                     mean_steps, mean_time, mean_tokens, metric_report, recombine,
                     repeat_loop_detected, skill_hit_rate, sor, split_blocks, success_rate,
                     token_efficiency)
from .stats import BootstrapResult, discordant_counts, mcnemar, mcnemar_exact, paired_bootstrap

__all__ = [
    "BenchmarkCost", "BootstrapResult", "CostBreakdown", "CostModel", "JSON_KEYS",
    "MetricReport", "ModelPrice", "PriceTable", "TaskSummary", "amortization_ratio",
    "amortized_cost", "arr", "benchmark_cost", "block_stats", "cache_utilization",
    "discordant_counts", "dollar_cost", "exec_cost", "load_cost_model", "load_prices",
    "mcnemar", "mcnemar_exact", "mean_steps", "mean_time", "mean_tokens", "metric_report",
    "paired_bootstrap", "per_task_cost", "pre_eval_cost", "recombine", "repeat_loop_detected",
    "skill_hit_rate", "sor", "split_blocks", "success_rate", "token_efficiency",
]
