"""scikit-learn style wrappers around the metric suite and the library learner."""

from __future__ import annotations

from datetime import date

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_boundaries, check_tasks
from .learning import LearningConfig, library_stats, library_update
from .ledger import REPEAT_ACTION
from .metrics import block_stats, metric_report
from .skills.retrieval import retrieve
from .skills.types import SkillLibrary

TASK_FEATURES = ("success", "steps", "tokens_k", "time_s", "repeat_action", "cached_ratio",
                 "skill_hit")


def task_features(task):
    prompt = task.prompt_tokens
    return (float(task.succeeded), float(task.step_count), task.total_tokens / 1000,
            task.wall_time_ms / 1000, float(task.status == REPEAT_ACTION),
            task.cached_prompt_tokens / prompt if prompt else 0.0,
            float(bool(task.fired_skill_ids)))


class LedgerMetrics(TransformerMixin, BaseEstimator):
    """Fit computes the stream report (and block reports when ``boundaries`` is
    set); transform maps each task to its per-task metric features."""

    def __init__(self, boundaries=None):
        self.boundaries = boundaries

    def fit(self, X, y=None):
        tasks = check_tasks(X)
        ends = check_boundaries(self.boundaries, len(tasks))
        self.report_ = metric_report(tasks)
        self.blocks_ = block_stats(tasks, ends) if ends else None
        self.n_features_in_ = len(TASK_FEATURES)
        return self

    def transform(self, X):
        check_is_fitted(self, "report_")
        return np.array([task_features(t) for t in check_tasks(X)], dtype=float)

    def get_feature_names_out(self, input_features=None):
        return np.array(TASK_FEATURES, dtype=object)


class SkillLibraryLearner(BaseEstimator):
    """Online library learner: fit/partial_fit consume task trajectories (views
    with subgoal segments), predict retrieves a routine per subgoal."""

    def __init__(self, config=None, seed_library=None, demotion_date=None):
        self.config = config
        self.seed_library = seed_library
        self.demotion_date = demotion_date

    def _start(self):
        self.library_ = self.seed_library if self.seed_library is not None else SkillLibrary()
        self.initial_library_ = self.library_
        self.events_ = []

    def fit(self, X, y=None):
        self._start()
        return self.partial_fit(X)

    def partial_fit(self, X, y=None):
        if not hasattr(self, "library_"):
            self._start()
        cfg = self.config or LearningConfig()
        today = self.demotion_date or date.today()
        for task in check_tasks(X):
            self.library_, events = library_update(self.library_, task, cfg, today)
            self.events_.extend(events)
        return self

    @property
    def stats_(self):
        check_is_fitted(self, "library_")
        return library_stats(self.events_, self.initial_library_, self.library_)

    def predict(self, X, url=""):
        """``X``: keyword sets (or (keywords, url) pairs).  Returns matched skill ids,
        with None where no routine applies."""
        check_is_fitted(self, "library_")
        prior = (self.config or LearningConfig()).prior
        out = []
        for item in X:
            kws, where = item if isinstance(item, tuple) else (item, url)
            m = retrieve(self.library_, frozenset(kws), where, prior)
            out.append(None if m is None else m.skill_id)
        return np.array(out, dtype=object)
