"""Command-line entry point: analyze, simulate, compare, cost and library.

Exit codes: 0 ok, 1 validation error, 2 I/O error, 3 statistical precondition
failure.  Every command prints what the corresponding module call returns;
``--json`` gives the same numbers unrounded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import replace
from importlib.resources import files
from pathlib import Path

from .errors import (ConfigInvalid, LedgerError, LibraryInvariantError, MetricError,
                     SkillFormatError, UnknownModel)
from .learning import library_stats, write_events
from .ledger import read_ledger, read_tasks, write_ledger
from .metrics import (amortization_ratio, amortized_cost, benchmark_cost, block_stats,
                      dollar_cost, load_cost_model, load_prices, mcnemar_exact,
                      metric_report, paired_bootstrap, recombine, token_efficiency)
from .metrics.stats import discordant_counts
from .skills import load_library, save_library, scan_library
from .skills.types import confidence

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_STATS = 0, 1, 2, 3
LIBRARY_ENV = "SKILLFORGE_LIBRARY_DIR"
DEFAULT_LIBRARY = "skill_library"


class TaskSetMismatch(MetricError):
    pass


# ------------------------------------------------------------- helpers

def _blocks(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--blocks expects integers, got {text!r}") from None


def _library_dir(arg):
    return Path(arg or os.environ.get(LIBRARY_ENV) or DEFAULT_LIBRARY)


def _emit(payload, as_json, text):
    if as_json:
        print(json.dumps(payload, indent=2, sort_keys=False))
    else:
        print(text)


def _table(rows, headers):
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(headers)]
    line = lambda cells: "  ".join(str(c).rjust(w) for c, w in zip(cells, widths))
    return "\n".join([line(headers)] + [line(r) for r in rows])


def _report_table(labels, reports):
    headers = ["Block"] + list(reports[0].display_row())
    rows = [[lab] + list(r.display_row().values()) for lab, r in zip(labels, reports)]
    return _table(rows, headers)


def _block_labels(ends):
    starts = [1] + [e + 1 for e in ends[:-1]]
    return [f"{s}-{e}" for s, e in zip(starts, ends)]


def _quartiles(n):
    return sorted({max(1, round(n * q / 4)) for q in range(1, 5)}) if n >= 4 else [n]


def checksum(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_tasks(path):
    return read_tasks(read_ledger(path))


def analysis(tasks, boundaries=None):
    """Whole-stream report plus optional per-block reports and their recombination."""
    out = {"overall": metric_report(tasks)}
    if boundaries:
        blocks = block_stats(tasks, boundaries)
        out["blocks"] = blocks
        out["recombined"] = recombine(blocks)
        out["boundaries"] = list(boundaries)
    return out


def _analysis_json(res):
    d = {"overall": res["overall"].to_dict()}
    if "blocks" in res:
        d["boundaries"] = res["boundaries"]
        d["blocks"] = [b.to_dict() for b in res["blocks"]]
        d["recombined"] = res["recombined"]
    return d


def _analysis_text(res):
    if "blocks" not in res:
        return _report_table(["all"], [res["overall"]])
    labels = _block_labels(res["boundaries"]) + ["all"]
    return _report_table(labels, res["blocks"] + [res["overall"]])


# ------------------------------------------------------------- commands

def cmd_analyze(args):
    res = analysis(_load_tasks(args.ledger), args.blocks)
    _emit(_analysis_json(res), args.json, _analysis_text(res))
    return EXIT_OK


def _stats_table(stats):
    return _table([stats.as_row()], stats.COLUMNS)


def _simulate_single(config, seed_library, args, library_dir):
    from .simulator import run_stream
    tasks = getattr(args, "_scenario_tasks", None)
    oracle = getattr(args, "_scenario_oracle", None)
    result = run_stream(config, seed_library, tasks, oracle)
    write_ledger(args.out, result.rows)
    write_events(str(args.out) + ".events.jsonl", result.all_events)
    save_library(result.library, library_dir)
    return result.rows, result.all_events, result.library


def _simulate_shared(config, seed_library, args, library_dir):
    from .learning import read_events
    from .simulator import concat_ledgers, run_shared
    out = Path(args.out)
    paths = run_shared(config, library_dir, out.parent, args.workers,
                       seed_library=seed_library, prefix=out.stem)
    concat_ledgers(paths, out)
    events = []
    for p in paths:
        events.extend(read_events(p.with_suffix(".events.jsonl")))
    return read_ledger(out), events, load_library(library_dir)


def cmd_simulate(args):
    from .simulator import (ScriptedOracle, default_config, default_seed_library, load_config,
                            load_scenario)
    config = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.tasks is not None:
        config = replace(config, n_tasks=args.tasks)
    library_dir = _library_dir(args.library)
    seed_library = None
    if args.scenario:
        scenario = load_scenario(args.scenario, config)
        config = scenario.config
        seed_library = scenario.seed_library
        args._scenario_tasks = scenario.tasks
        args._scenario_oracle = ScriptedOracle()
    has_files = library_dir.is_dir() and any(library_dir.glob("*/*.md"))
    if has_files:
        seed_library = load_library(library_dir)
    elif seed_library is None:
        seed_library = default_seed_library()
    if args.workers > 1:
        if args.scenario:
            raise ConfigInvalid("--scenario replays one scripted stream; use --workers 1")
        rows, events, final = _simulate_shared(config, seed_library, args, library_dir)
    else:
        rows, events, final = _simulate_single(config, seed_library, args, library_dir)
    tasks = read_tasks(rows)
    boundaries = args.blocks or _quartiles(len(tasks))
    res = analysis(tasks, boundaries) if tasks else None
    stats = library_stats(events, seed_library, final)
    digest = checksum(args.out)
    payload = {"ledger": str(args.out), "checksum": digest, "library_dir": str(library_dir),
               "library": dict(zip(stats.COLUMNS, stats.as_row())),
               "analysis": _analysis_json(res) if res else None}
    text = [f"ledger {args.out}  sha256 {digest}", ""]
    if res:
        text += [_analysis_text(res), ""]
    text += ["Library", _stats_table(stats)]
    _emit(payload, args.json, "\n".join(text))
    return EXIT_OK


def verdicts(tasks_a, tasks_b):
    """Aligned 0/1 success vectors over a shared task-id set (order of A)."""
    a = {t.task_id: t for t in tasks_a}
    b = {t.task_id: t for t in tasks_b}
    if len(a) != len(tasks_a) or len(b) != len(tasks_b):
        raise TaskSetMismatch("a ledger repeats a task id across runs")
    if set(a) != set(b):
        only_a, only_b = sorted(set(a) - set(b)), sorted(set(b) - set(a))
        raise TaskSetMismatch(f"task sets differ: {len(only_a)} only in A, "
                              f"{len(only_b)} only in B")
    ids = list(a)
    return ([int(a[i].succeeded) for i in ids], [int(b[i].succeeded) for i in ids])


def comparison(y_a, y_b, iterations, seed, alpha):
    boot = paired_bootstrap(y_a, y_b, iterations, seed, alpha)
    b, c = discordant_counts(y_a, y_b)
    return boot, (b, c), mcnemar_exact(b, c)


def cmd_compare(args):
    y_a, y_b = verdicts(_load_tasks(args.ledger_a), _load_tasks(args.ledger_b))
    boot, (b, c), p = comparison(y_a, y_b, args.iters, args.seed, args.alpha)
    payload = dict(boot.to_dict(), discordant=[b, c], mcnemar_p=p, n_tasks=len(y_a))
    row = [f"{boot.sr_a:.1f}", f"[{boot.ci_a[0]:.1f}, {boot.ci_a[1]:.1f}]",
           f"{boot.sr_b:.1f}", f"[{boot.ci_b[0]:.1f}, {boot.ci_b[1]:.1f}]",
           f"{boot.diff:+.1f}", f"[{boot.diff_ci[0]:+.1f}, {boot.diff_ci[1]:+.1f}]",
           f"{p:.4g}"]
    headers = ["SR_A (%)", "95% CI", "SR_B (%)", "95% CI", "Delta (pp)", "Delta CI", "McNemar p"]
    if args.alpha != 0.05:
        level = f"{100 * (1 - args.alpha):g}% CI"
        headers[1] = headers[3] = level
    _emit(payload, args.json, _table([row], headers))
    return EXIT_OK


def cost_report(tasks, model, prices, one_time=0.0, n=None, headline=None):
    bench = benchmark_cost(model, tasks)
    rep = metric_report(tasks)
    per_task = dollar_cost(tasks, prices) if headline is None else headline
    n = len(tasks) if n is None else n
    return {
        "terms": dict(zip(("pre", "rollout", "verify", "induce"), bench.terms)),
        "mean_tokens": bench.mean,
        "rho": bench.rho,
        "dollar_per_task": per_task,
        "one_time": one_time,
        "n": n,
        "amortized_per_task": amortized_cost(per_task, one_time, n),
        "amortization_ratio": amortization_ratio(per_task, one_time, n) if per_task else None,
        "eta": token_efficiency(rep.sr, rep.mean_tokens_k),
    }


def cmd_cost(args):
    tasks = _load_tasks(args.ledger)
    model = load_cost_model(args.cost_model or files("skillforge") / "data" / "cost_model.yaml")
    prices = load_prices(args.prices or files("skillforge") / "data" / "prices.yaml")
    rep = cost_report(tasks, model, prices, args.one_time, args.n, args.headline)
    t = rep["terms"]
    lines = [
        "Cost identity (tokens per task)",
        _table([[f"{t['pre']:.1f}", f"{t['rollout']:.1f}", f"{t['verify']:.1f}",
                 f"{t['induce']:.1f}", f"{rep['mean_tokens']:.1f}", f"{rep['rho']:.3f}"]],
               ["C_pre/n", "rollout", "verify", "induce", "total", "rho"]),
        "",
        f"dollars/task            {rep['dollar_per_task']:.4f}",
        f"amortized dollars/task  {rep['amortized_per_task']:.4f}  "
        f"(one-time {rep['one_time']:g} over {rep['n']} tasks)",
        f"eta (pp per K tokens)   {rep['eta']:.4f}",
    ]
    _emit(rep, args.json, "\n".join(lines))
    return EXIT_OK


def _inspect(library):
    rows = []
    for r in sorted(library.rules.values(), key=lambda r: r.id):
        rows.append(["rule", r.id, "-", "-", r.trigger_pattern.render(), "-"])
    for r in sorted(library.routines.values(), key=lambda r: r.id):
        pol = " | ".join(f"{v.dir}: {', '.join(v.phrases)}" for v in r.polarity or ()) or "-"
        rows.append(["routine", r.id, f"({r.confidence.n_pass},{r.confidence.n_fail})",
                     f"{confidence(r.confidence):.2f}", ", ".join(r.trigger_phrases), pol])
    out = [_table(rows, ["kind", "id", "(s,f)", "conf", "keywords", "polarity"]) if rows
           else "(no active skills)"]
    out += ["", f"blacklist ({len(library.blacklist)})"]
    for e in library.blacklist:
        out.append(f"  {e.id}  {e.demoted_at}  {e.reason}")
    return "\n".join(out)


def _library_json(library):
    return {
        "rules": [{"id": r.id, "trigger": r.trigger_pattern.render()}
                  for r in sorted(library.rules.values(), key=lambda r: r.id)],
        "routines": [{"id": r.id, "s": r.confidence.n_pass, "f": r.confidence.n_fail,
                      "confidence": confidence(r.confidence),
                      "keywords": list(r.trigger_phrases),
                      "polarity": [{"dir": v.dir, "keywords": list(v.phrases)}
                                   for v in r.polarity or ()]}
                     for r in sorted(library.routines.values(), key=lambda r: r.id)],
        "blacklist": [{"id": e.id, "date": str(e.demoted_at), "reason": e.reason}
                      for e in library.blacklist],
    }


def cmd_library(args):
    root = _library_dir(args.directory)
    if not root.is_dir():
        raise FileNotFoundError(f"library directory {root} does not exist")
    library, problems = scan_library(root)
    if args.action == "validate":
        payload = {"ok": not problems,
                   "problems": [{"path": p, "error": str(e)} for p, e in problems]}
        text = "\n".join(f"{p}: {e}" for p, e in problems) or f"{root}: ok"
        _emit(payload, args.json, text)
        return EXIT_INVALID if problems else EXIT_OK
    if problems:
        for p, e in problems:
            print(f"{p}: {e}", file=sys.stderr)
        return EXIT_INVALID
    _emit(_library_json(library), args.json, _inspect(library))
    return EXIT_OK


# ------------------------------------------------------------- parser

def build_parser():
    parser = argparse.ArgumentParser(prog="skillforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="metric report for a ledger")
    p.add_argument("ledger")
    p.add_argument("--blocks", type=_blocks, help="cumulative block ends, e.g. 100,300,600,910")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="run the mock agent and write a ledger and library")
    p.add_argument("--config", help="simulation config (YAML); packaged default if omitted")
    p.add_argument("--scenario", help="scripted task list to replay")
    p.add_argument("--out", default="ledger.csv", help="ledger path")
    p.add_argument("--library", help=f"library directory (default ${LIBRARY_ENV} or "
                                     f"./{DEFAULT_LIBRARY})")
    p.add_argument("--seed", type=int)
    p.add_argument("--tasks", type=int, help="override the number of tasks per stream")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--blocks", type=_blocks)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="paired bootstrap and McNemar test of two ledgers")
    p.add_argument("ledger_a")
    p.add_argument("ledger_b")
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("cost", help="token-cost identity, dollars and amortization")
    p.add_argument("ledger")
    p.add_argument("--cost-model")
    p.add_argument("--prices")
    p.add_argument("--one-time", type=float, default=0.0, help="one-time dollars to amortize")
    p.add_argument("--n", type=int, help="tasks to amortize over (default: ledger size)")
    p.add_argument("--headline", type=float, help="use this dollars/task instead of pricing rows")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("library", help="inspect or validate a library directory")
    p.add_argument("action", choices=("inspect", "validate"))
    p.add_argument("directory", nargs="?")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_library)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UnknownModel, ConfigInvalid, LedgerError, SkillFormatError,
            LibraryInvariantError) as exc:
        task = getattr(exc, "task_id", None)
        suffix = f" (task {task})" if task else ""
        print(f"error: {exc}{suffix}", file=sys.stderr)
        return EXIT_INVALID
    except (MetricError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATS if isinstance(exc, MetricError) else EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
