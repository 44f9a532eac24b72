"""Several simulated streams sharing one on-disk library.

Each worker runs its own task stream and writes its own ledger.  The library
directory is the only shared state: a worker reads it under the exclusive lock
before a task, and re-reads, updates and saves it under the lock afterwards,
so concurrent updates are serialized and none is lost.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from ..learning import library_update, write_events
from ..ledger import LedgerWriter
from ..skills.store import library_lock, load_library, save_library
from .agent import RandomOracle, new_cache, run_task
from .stream import generate_stream


VERSION_NAME = ".version"


def worker_run_id(base, index):
    return f"{base}-w{index:02d}"


def _version(library_dir):
    path = Path(library_dir) / VERSION_NAME
    return path.read_text() if path.exists() else ""


def _bump(library_dir):
    path = Path(library_dir) / VERSION_NAME
    path.write_text(str(int(_version(library_dir) or 0) + 1))


class _LibraryView:
    """A worker's parsed copy of the shared library, reparsed only after a change."""

    def __init__(self, library_dir):
        self.dir = library_dir
        self.stamp = None
        self.library = None

    def get(self):
        # caller holds the lock
        stamp = _version(self.dir)
        if self.library is None or stamp != self.stamp:
            self.library = load_library(self.dir)
            self.stamp = stamp
        return self.library

    def put(self, library):
        save_library(library, self.dir)
        _bump(self.dir)
        self.library = library
        self.stamp = _version(self.dir)


def _worker(config, library_dir, ledger_path, events_path, index):
    run_id = worker_run_id(config.run_id, index)
    cfg = replace(config, seed=config.seed + index, run_id=run_id)
    tasks = generate_stream(cfg)
    oracle = RandomOracle(cfg.seed)
    cache = None
    events = []
    view = _LibraryView(library_dir)
    with LedgerWriter(ledger_path) as ledger:
        for task in tasks:
            with library_lock(library_dir):
                library = view.get()
            if cache is None:
                cache = new_cache(cfg, library)
            outcome = run_task(cfg, task, library, cache, oracle, run_id)
            ledger.extend(outcome.rows)
            if not cfg.learning_enabled:
                continue
            with library_lock(library_dir):
                current = view.get()
                updated, evs = library_update(current, outcome.view, cfg.learning,
                                              cfg.demotion_date)
                if updated != current:
                    view.put(updated)
            events.extend(evs)
    write_events(events_path, events)
    return str(ledger_path), len(tasks)


def run_shared(config, library_dir, out_dir, workers, tasks_per_worker=None, seed_library=None,
               prefix="ledger"):
    """Run ``workers`` streams in separate processes against one library directory.

    Returns the per-worker ledger paths in worker order.
    """
    library_dir = Path(library_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if seed_library is not None:
        library_dir.mkdir(parents=True, exist_ok=True)
        with library_lock(library_dir):
            save_library(seed_library, library_dir)
            _bump(library_dir)
    if tasks_per_worker is not None:
        config = replace(config, n_tasks=tasks_per_worker)
    jobs = []
    for i in range(workers):
        ledger = out_dir / f"{prefix}_w{i:02d}.csv"
        if ledger.exists():
            os.remove(ledger)
        jobs.append((config, str(library_dir), str(ledger), str(out_dir / f"{prefix}_w{i:02d}.events.jsonl"), i))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_worker, *job) for job in jobs]
        return [Path(f.result()[0]) for f in futures]


def concat_ledgers(paths, out_path):
    """Join per-worker ledgers into one file with a single header."""
    with open(out_path, "w", encoding="utf-8", newline="") as out:
        for i, p in enumerate(paths):
            with open(p, encoding="utf-8", newline="") as fh:
                header = fh.readline()
                if i == 0:
                    out.write(header)
                out.write(fh.read())
