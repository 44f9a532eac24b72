"""Simulation configuration: templates, domains, token/cache model, timings."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from datetime import date
from importlib.resources import files

import yaml

from ..errors import ConfigInvalid
from ..learning import LearningConfig
from ..metrics.cost import CostModel
from ..skills.keywords import normalize_keywords

ROW_TYPES = ("planner", "actor", "reflector", "action", "routine", "eval")
DEFAULT_TIMING_MS = {"planner": 4000, "actor": 1500, "reflector": 3000, "action": 800,
                     "routine": 1200, "eval": 500}


@dataclass(frozen=True)
class Template:
    """A recurring subgoal: trigger phrases, the primitive actions that solve it,
    and how reliably the Actor and a distilled routine complete it."""

    name: str
    domain: str
    phrases: tuple
    actions: tuple                  # ((name, target, text), ...)
    actor_success: float = 0.9
    reliability: float = 0.95       # pass probability of a routine serving it
    coverable: bool = True
    loopy: bool = False
    savings: int | None = None      # actions a routine saves; None -> global default
    start_task: int = 1
    weight: float = 1.0             # relative frequency within its domain

    def __post_init__(self):
        if self.weight <= 0:
            raise ConfigInvalid(f"template {self.name!r}: weight must be positive")
        if not normalize_keywords(self.phrases):
            raise ConfigInvalid(f"template {self.name!r} has no keywords")
        if not self.actions:
            raise ConfigInvalid(f"template {self.name!r} has no actions")
        for p in ("actor_success", "reliability"):
            v = getattr(self, p)
            if not 0.0 <= v <= 1.0:
                raise ConfigInvalid(f"template {self.name!r}: {p}={v} outside [0, 1]")
        if self.start_task < 1:
            raise ConfigInvalid(f"template {self.name!r}: start_task must be >= 1")

    @property
    def keywords(self):
        return normalize_keywords(self.phrases)


@dataclass(frozen=True)
class Domain:
    name: str
    weight: float
    templates: tuple
    objects: tuple = ()             # filler nouns added to subgoal keywords


@dataclass(frozen=True)
class BrittleInjection:
    template: str
    reliability: float = 0.3
    start_task: int = 1


@dataclass(frozen=True)
class CacheModel:
    stable_prefix_tokens: int = 6000
    volatile_tokens_per_call: int = 2500
    per_skill_tokens: int = 150
    cold_start: bool = False


@dataclass(frozen=True)
class Models:
    planner: str = "claude-opus-4-6"
    reflector: str = "claude-opus-4-6"
    actor: str = "gpt-5.2-2026-01"


@dataclass(frozen=True)
class SimConfig:
    seed: int = 42
    n_tasks: int = 500
    domains: tuple = ()
    subgoals_per_task: tuple = (1, 3)
    max_steps_per_task: int = 50
    k_R: int = 3
    routine_step_cost: int = 1
    routine_action_savings: int = 3
    actor_attempts: int = 2
    infeasible_rate: float = 0.0
    brittle_injections: tuple = ()
    token_model: CostModel = field(default_factory=CostModel)
    cache_model: CacheModel = field(default_factory=CacheModel)
    models: Models = field(default_factory=Models)
    timing_ms: dict = field(default_factory=lambda: dict(DEFAULT_TIMING_MS))
    learning: LearningConfig = field(default_factory=LearningConfig)
    learning_enabled: bool = True
    rules_enabled: bool = True
    demotion_date: date = date(2026, 1, 14)
    method: str = "skill_agent"
    run_id: str = "sim"

    def __post_init__(self):
        if self.n_tasks < 0:
            raise ConfigInvalid(f"n_tasks must be >= 0, got {self.n_tasks}")
        if self.max_steps_per_task < 1:
            raise ConfigInvalid("max_steps_per_task must be >= 1")
        if self.k_R < 1:
            raise ConfigInvalid("k_R must be >= 1")
        if self.routine_step_cost < 1 or self.routine_action_savings < 0:
            raise ConfigInvalid("routine_step_cost must be >= 1 and savings >= 0")
        if self.actor_attempts < 1:
            raise ConfigInvalid("actor_attempts must be >= 1")
        if not 0.0 <= self.infeasible_rate <= 1.0:
            raise ConfigInvalid(f"infeasible_rate {self.infeasible_rate} outside [0, 1]")
        lo, hi = self.subgoals_per_task
        if not 1 <= lo <= hi:
            raise ConfigInvalid(f"subgoals_per_task {self.subgoals_per_task} is not a range >= 1")
        if self.domains:
            if any(d.weight < 0 for d in self.domains) or sum(d.weight for d in self.domains) <= 0:
                raise ConfigInvalid("domain weights must be nonnegative with a positive sum")
            for d in self.domains:
                if not d.templates:
                    raise ConfigInvalid(f"domain {d.name!r} has no templates")
        elif self.n_tasks:
            raise ConfigInvalid("a nonempty stream needs at least one domain")
        names = [t.name for d in self.domains for t in d.templates]
        if len(names) != len(set(names)):
            raise ConfigInvalid("template names must be unique")
        for b in self.brittle_injections:
            if b.template not in names:
                raise ConfigInvalid(f"brittle injection names unknown template {b.template!r}")
            if not 0.0 <= b.reliability <= 1.0:
                raise ConfigInvalid(f"brittle reliability {b.reliability} outside [0, 1]")
        missing = set(ROW_TYPES) - set(self.timing_ms)
        if missing:
            raise ConfigInvalid(f"timing_ms lacks {sorted(missing)}")

    def templates(self):
        """All templates with brittle injections applied."""
        inject = {b.template: b for b in self.brittle_injections}
        out = {}
        for d in self.domains:
            for t in d.templates:
                b = inject.get(t.name)
                if b is not None:
                    t = replace(t, reliability=b.reliability, start_task=b.start_task)
                out[t.name] = t
        return out

    def with_(self, **changes):
        return replace(self, **changes)


# ----------------------------------------------------------------- loading

def _actions(raw, where):
    out = []
    for a in raw:
        if isinstance(a, str):
            a = [a]
        a = list(a) + [""] * (3 - len(a))
        if len(a) != 3:
            raise ConfigInvalid(f"{where}: action {a!r} should be [name, target, text]")
        out.append(tuple(str(x) for x in a))
    return tuple(out)


def template_from_dict(d, domain):
    d = dict(d)
    try:
        name = d.pop("name")
        phrases = tuple(d.pop("phrases"))
        actions = _actions(d.pop("actions"), name)
    except KeyError as exc:
        raise ConfigInvalid(f"template in {domain!r} lacks {exc.args[0]!r}") from None
    known = {f.name for f in fields(Template)}
    unknown = set(d) - known
    if unknown:
        raise ConfigInvalid(f"template {name!r}: unknown keys {sorted(unknown)}")
    return Template(name=name, domain=d.pop("domain", domain), phrases=phrases,
                    actions=actions, **d)


def _sub(cls, raw, label):
    raw = raw or {}
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigInvalid(f"{label}: unknown keys {sorted(unknown)}")
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ConfigInvalid(f"{label}: {exc}") from None


def config_from_dict(raw):
    raw = dict(raw or {})
    domains = []
    for d in raw.pop("domains", ()):
        d = dict(d)
        name = d["name"]
        templates = tuple(template_from_dict(t, name) for t in d.get("templates", ()))
        domains.append(Domain(name, float(d.get("weight", 1.0)), templates,
                              tuple(d.get("objects", ()))))
    kwargs = {"domains": tuple(domains)}
    if "brittle_injections" in raw:
        kwargs["brittle_injections"] = tuple(
            _sub(BrittleInjection, b, "brittle_injections") for b in raw.pop("brittle_injections"))
    if "token_model" in raw:
        kwargs["token_model"] = CostModel.from_dict(raw.pop("token_model") or {})
    if "cache_model" in raw:
        kwargs["cache_model"] = _sub(CacheModel, raw.pop("cache_model"), "cache_model")
    if "models" in raw:
        kwargs["models"] = _sub(Models, raw.pop("models"), "models")
    if "learning" in raw:
        learning = dict(raw.pop("learning") or {})
        if "antonym_lexicon" in learning:
            learning["antonym_lexicon"] = tuple(tuple(p) for p in learning["antonym_lexicon"])
        if "admit_confidence" in learning:
            learning["admit_confidence"] = tuple(learning["admit_confidence"])
        kwargs["learning"] = _sub(LearningConfig, learning, "learning")
    if "subgoals_per_task" in raw:
        kwargs["subgoals_per_task"] = tuple(raw.pop("subgoals_per_task"))
    if "timing_ms" in raw:
        timing = dict(DEFAULT_TIMING_MS)
        timing.update(raw.pop("timing_ms") or {})
        kwargs["timing_ms"] = timing
    if "demotion_date" in raw:
        dd = raw.pop("demotion_date")
        kwargs["demotion_date"] = dd if isinstance(dd, date) else date.fromisoformat(str(dd))
    known = {f.name for f in fields(SimConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
    kwargs.update(raw)
    try:
        return SimConfig(**kwargs)
    except TypeError as exc:
        raise ConfigInvalid(str(exc)) from None


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigInvalid(f"{path}: {exc}") from None
    return config_from_dict(raw)


def default_config_path():
    return files("skillforge") / "data" / "default_sim.yaml"


def default_config(**changes):
    cfg = load_config(default_config_path())
    return replace(cfg, **changes) if changes else cfg
