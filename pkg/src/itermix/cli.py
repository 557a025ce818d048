"""Command-line entry point: ``itermix {benchmark,sweep,ablation,case-study}``.

Every command is a pure function of the config file and the seed set; all
outputs are written atomically and ``report.json`` carries no timestamps, so
reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from ._util import atomic_write_text
from .config import ExperimentConfig, load_config
from .env import REWARD_MODES
from .errors import DimensionError, InvalidConfig, ItermixError
from .trainer import ExperimentReport, run_experiment

logger = logging.getLogger("itermix")

REPORT_VERSION = 1
SWEEP_PARAMS = ("K", "eta")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _row(label: str, report: ExperimentReport, reward_mode: str) -> dict:
    d = report.to_dict()
    d["label"] = label
    d["reward_mode"] = reward_mode
    return d


def report_document(command: str, cfg: ExperimentConfig, rows: list[dict], extra: dict | None = None) -> dict:
    doc = {"version": REPORT_VERSION, "command": command, "config": cfg.echo(), "rows": rows}
    if extra:
        doc.update(extra)
    return doc


def format_table(rows: list[dict], classifiers) -> str:
    """Aligned text table: one line per row label, P/R/F1 per classifier."""
    labels = list(dict.fromkeys(r["label"] for r in rows))
    cell = {(r["label"], r["classifier"]): r["mean"] for r in rows}
    header = ["method"] + [f"{c}:{m}" for c in classifiers for m in ("P", "R", "F1")]
    body = []
    for label in labels:
        line = [label]
        for c in classifiers:
            m = cell.get((label, c))
            line += ["-"] * 3 if m is None else [f"{m['precision']:.4f}", f"{m['recall']:.4f}", f"{m['f1']:.4f}"]
        body.append(line)
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]

    def fmt(r):
        return "  ".join(v.ljust(w) if i == 0 else v.rjust(w) for i, (v, w) in enumerate(zip(r, widths)))

    rule = "  ".join("-" * w for w in widths)
    return "\n".join([fmt(header), rule, *map(fmt, body)]) + "\n"


def _trace_lines(method: str, kind: str, report: ExperimentReport, label: str | None = None) -> list[str]:
    lines = []
    for r in report.per_seed:
        for step in r.trace or []:
            rec = {"method": method, "classifier": kind, "seed": r.seed, **step}
            if label is not None:
                rec["label"] = label
            lines.append(json.dumps(rec, sort_keys=True))
    return lines


def _write_outputs(out: Path, doc: dict, classifiers, trace_lines: list[str] | None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "report.json", dumps_json(doc))
    atomic_write_text(out / "report.txt", format_table(doc["rows"], classifiers))
    if trace_lines is not None:
        atomic_write_text(out / "trace.jsonl", "".join(line + "\n" for line in trace_lines))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_benchmark(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> int:
    dataset = cfg.dataset.load()
    rows, trace = [], []
    for method in cfg.methods:
        for kind in cfg.classifiers:
            rep = run_experiment(cfg.train_for(kind), dataset, method, jobs=jobs, keep=cfg.trace)
            rows.append(_row(method, rep, cfg.train.reward_mode))
            trace += _trace_lines(method, kind, rep)
    _write_outputs(out, report_document("benchmark", cfg, rows), cfg.classifiers,
                   trace if cfg.trace else None)
    return 0


def cmd_ablation(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> int:
    dataset = cfg.dataset.load()
    rows, trace = [], []
    for mode in REWARD_MODES:
        for kind in cfg.classifiers:
            tc = replace(cfg.train_for(kind), reward_mode=mode)
            rep = run_experiment(tc, dataset, "mixann", jobs=jobs, keep=cfg.trace)
            rows.append(_row(mode, rep, mode))
            trace += _trace_lines("mixann", kind, rep, label=mode)
    _write_outputs(out, report_document("ablation", cfg, rows), cfg.classifiers,
                   trace if cfg.trace else None)
    return 0


def parse_sweep_values(param: str, values) -> list:
    if param not in SWEEP_PARAMS:
        raise InvalidConfig(f"--param: expected one of {', '.join(SWEEP_PARAMS)}, got {param!r}")
    if not values:
        raise InvalidConfig("--values: at least one value is required")
    parsed = []
    for v in values:
        try:
            parsed.append(int(v) if param == "K" else float(v))
        except ValueError:
            raise InvalidConfig(f"--values: {v!r} is not a valid {param} value") from None
    if len(set(parsed)) != len(parsed):
        raise InvalidConfig("--values: duplicate values")
    return parsed


def _sweep_key(value) -> str:
    return str(value) if isinstance(value, int) else repr(float(value))


def cmd_sweep(cfg: ExperimentConfig, out: Path, param: str, values, jobs: int = 1) -> int:
    values = parse_sweep_values(param, values)
    envs = []
    for v in values:
        try:
            envs.append(replace(cfg.train.env, **{param: v}))
        except InvalidConfig as exc:
            raise InvalidConfig(f"--values: {param}={v}: {exc}") from None
    dataset = cfg.dataset.load()
    rows, results, trace = [], {}, []
    for v, env in zip(values, envs):
        key = _sweep_key(v)
        results[key] = {}
        for method in cfg.methods:
            results[key][method] = {}
            for kind in cfg.classifiers:
                tc = replace(cfg.train_for(kind), env=env)
                rep = run_experiment(tc, dataset, method, jobs=jobs, keep=cfg.trace)
                results[key][method][kind] = rep.mean.to_dict()
                rows.append(_row(f"{method} {param}={key}", rep, cfg.train.reward_mode))
                trace += _trace_lines(method, kind, rep, label=f"{param}={key}")
    sweep = {"version": REPORT_VERSION, "parameter": param, "values": values,
             "results": results}
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "sweep.json", dumps_json(sweep))
    _write_outputs(out, report_document("sweep", cfg, rows, {"sweep": {"parameter": param}}),
                   cfg.classifiers, trace if cfg.trace else None)
    return 0


def decision_grid(classifier, X: np.ndarray, size: int) -> np.ndarray:
    """``size**2`` rows of ``(x1, x2, p_minority)`` over the bounding box of ``X``."""
    lo, hi = X.min(axis=0), X.max(axis=0)
    g1 = np.linspace(lo[0], hi[0], size)
    g2 = np.linspace(lo[1], hi[1], size)
    A, B = np.meshgrid(g1, g2, indexing="ij")
    pts = np.column_stack([A.ravel(), B.ravel()])
    p = np.atleast_1d(classifier.predict_proba(pts))
    return np.column_stack([pts, p])


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def cmd_case_study(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> int:
    """Synthetic points and decision-grid exports for 2-D data.

    Uses the first configured classifier and the first seed.
    """
    dataset = cfg.dataset.load()
    if dataset.dim != 2:
        raise DimensionError(f"case-study needs 2-D data, dataset has {dataset.dim} features")
    kind = cfg.classifiers[0]
    seed = cfg.train.seeds[0]
    out.mkdir(parents=True, exist_ok=True)
    names = list(dataset.feature_names or ("x1", "x2"))
    rows, trace = [], []
    for method in cfg.methods:
        tc = replace(cfg.train_for(kind), seeds=(seed,))
        rep = run_experiment(tc, dataset, method, jobs=jobs, keep=True)
        res = rep.per_seed[0]
        syn = [[repr(float(s.features[0])), repr(float(s.features[1])), s.label] for s in res.synthetics]
        atomic_write_text(out / f"synthetics_{method}.csv", _csv_text([*names, "label"], syn))
        grid = decision_grid(res.classifier, dataset.X, cfg.grid_size)
        atomic_write_text(out / f"grid_{method}.csv",
                          _csv_text([*names, "p_minority"], ([repr(float(v)) for v in r] for r in grid)))
        rows.append(_row(method, rep, cfg.train.reward_mode))
        trace += _trace_lines(method, kind, rep)
    doc = report_document("case-study", cfg, rows, {"case_study": {"classifier": kind, "seed": seed}})
    _write_outputs(out, doc, [kind], trace if cfg.trace else None)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to the JSON experiment config")
    common.add_argument("--out", help="output directory (overrides the config's 'out')")
    common.add_argument("--seed-offset", type=int, default=0, help="added to every configured seed")
    common.add_argument("--jobs", type=int, default=1, help="worker processes across seeds")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog="itermix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("benchmark", parents=[common], help="run every configured method")
    sw = sub.add_parser("sweep", parents=[common], help="vary K or eta")
    sw.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sw.add_argument("--values", nargs="*", default=[], help="values to try, e.g. 5 10 15")
    sub.add_parser("ablation", parents=[common], help="compare the reward variants")
    sub.add_parser("case-study", parents=[common], help="export synthetics and decision grids (2-D data)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.jobs < 1:
            raise InvalidConfig("--jobs: must be >= 1")
        cfg = load_config(args.config)
        if args.seed_offset:
            cfg = cfg.with_seed_offset(args.seed_offset)
        out = Path(args.out if args.out is not None else cfg.out)
        if args.command == "benchmark":
            code = cmd_benchmark(cfg, out, args.jobs)
        elif args.command == "sweep":
            code = cmd_sweep(cfg, out, args.param, args.values, args.jobs)
        elif args.command == "ablation":
            code = cmd_ablation(cfg, out, args.jobs)
        else:
            code = cmd_case_study(cfg, out, args.jobs)
    except (ItermixError, OSError) as exc:
        print(f"itermix: error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote results to {out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
