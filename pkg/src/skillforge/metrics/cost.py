"""Token-cost identity, dollar pricing and amortization."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import NamedTuple

import yaml

from ..errors import ConfigInvalid, EmptyInput, UnknownModel
from .report import as_tasks

PER_MILLION = 1_000_000


@dataclass(frozen=True)
class CostModel:
    c_pre: float = 0.0
    n_rollout: float = 1.0
    verify_multiplier: float = 0.0
    induce_tokens: float = 0.0
    kappa_H: float = 1.0
    kappa_L: float = 1.0
    q_plan: float = 1000.0
    q_reflect: float = 500.0
    q_act: float = 200.0
    k_R: int = 3
    beta_vis: float = 0.6
    compress: bool = False

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name != "compress" and v < 0:
                raise ConfigInvalid(f"{f.name} must be nonnegative, got {v}")
        if self.kappa_H < self.kappa_L:
            raise ConfigInvalid(f"kappa_H ({self.kappa_H}) must be >= kappa_L ({self.kappa_L})")
        if self.k_R < 1:
            raise ConfigInvalid(f"k_R must be >= 1, got {self.k_R}")
        if not 0.0 < self.beta_vis <= 1.0:
            raise ConfigInvalid(f"beta_vis must lie in (0, 1], got {self.beta_vis}")

    def baseline(self):
        """Same routing and prompts with every inflation term removed."""
        return CostModel(0.0, 1.0, 0.0, 0.0, self.kappa_H, self.kappa_L, self.q_plan,
                         self.q_reflect, self.q_act, self.k_R, self.beta_vis, self.compress)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigInvalid(f"unknown cost-model keys: {sorted(unknown)}")
        return cls(**d)


def load_cost_model(path):
    with open(path, encoding="utf-8") as fh:
        return CostModel.from_dict(yaml.safe_load(fh) or {})


class TaskSummary(NamedTuple):
    plans: int
    steps: int


class CostBreakdown(NamedTuple):
    c_exec: float
    c_verify: float
    c_induce: float
    c_task: float


def summarize(task):
    if isinstance(task, TaskSummary):
        return task
    return TaskSummary(task.count("planner"), task.step_count)


def exec_cost(model, plans, steps):
    high = model.kappa_H * (plans * model.q_plan + (steps // model.k_R) * model.q_reflect)
    low = model.kappa_L * steps * model.q_act
    if model.compress:
        low *= model.beta_vis
    return high + low


def per_task_cost(model, task):
    s = summarize(task)
    c_exec = exec_cost(model, s.plans, s.steps)
    c_verify = model.verify_multiplier * c_exec
    c_task = model.n_rollout * c_exec + c_verify + model.induce_tokens
    return CostBreakdown(c_exec, c_verify, model.induce_tokens, c_task)


class BenchmarkCost(NamedTuple):
    total: float
    terms: tuple        # (pre per task, rollout, verify, induce), summing to mean
    mean: float
    rho: float


def benchmark_cost(model, tasks):
    tasks = [summarize(t) for t in as_tasks(tasks)]
    if not tasks:
        raise EmptyInput("benchmark_cost needs at least one task")
    n = len(tasks)
    parts = [per_task_cost(model, t) for t in tasks]
    rollout = sum(model.n_rollout * p.c_exec for p in parts) / n
    verify = sum(p.c_verify for p in parts) / n
    induce = sum(p.c_induce for p in parts) / n
    terms = (model.c_pre / n, rollout, verify, induce)
    mean = sum(terms)
    base = sum(p.c_exec for p in parts) / n
    rho = mean / base if base > 0 else float("nan")
    total = model.c_pre + sum(p.c_task for p in parts)
    return BenchmarkCost(total, terms, mean, rho)


def pre_eval_cost(n_tools, steps_per_tool=100, kappa=1.0):
    """Exploration budget spent before the stream starts: steps x tools x kappa."""
    return steps_per_tool * n_tools * kappa


def amortized_cost(headline_per_task, one_time, n_tasks):
    if n_tasks < 1:
        raise ValueError(f"n_tasks must be >= 1, got {n_tasks}")
    return headline_per_task + one_time / n_tasks


def amortization_ratio(headline_per_task, one_time, n_tasks):
    return amortized_cost(headline_per_task, one_time, n_tasks) / headline_per_task


@dataclass(frozen=True)
class ModelPrice:
    cached: float
    input: float
    output: float

    def __post_init__(self):
        for name in ("cached", "input", "output"):
            if getattr(self, name) < 0:
                raise ConfigInvalid(f"price {name} must be nonnegative")


class PriceTable(dict):
    """model name -> ModelPrice, all in currency per million tokens."""

    @classmethod
    def from_dict(cls, d):
        table = cls()
        for model, p in d.items():
            table[model] = p if isinstance(p, ModelPrice) else ModelPrice(
                float(p["cached"]), float(p["input"]), float(p["output"]))
        return table

    def call_cost(self, row):
        try:
            p = self[row.model]
        except KeyError:
            raise UnknownModel(f"no price for model {row.model!r}") from None
        uncached = row.prompt_tokens - row.cached_prompt_tokens
        out = row.completion_tokens + row.reasoning_tokens
        return (row.cached_prompt_tokens * p.cached + uncached * p.input
                + out * p.output) / PER_MILLION


def load_prices(path):
    with open(path, encoding="utf-8") as fh:
        return PriceTable.from_dict(yaml.safe_load(fh) or {})


def task_dollar_cost(task, prices):
    rows = list(task.events) + [task.terminal]
    return sum(prices.call_cost(r) for r in rows
               if r.prompt_tokens or r.completion_tokens or r.reasoning_tokens)


def dollar_cost(tasks, prices):
    """Mean dollar cost per task."""
    tasks = as_tasks(tasks)
    if not tasks:
        raise EmptyInput("dollar_cost needs at least one task")
    return sum(task_dollar_cost(t, prices) for t in tasks) / len(tasks)
