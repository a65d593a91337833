"""Two-sample Kolmogorov-Smirnov test and report files."""

from __future__ import annotations

import csv
import math
import os
import statistics
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy.special import kolmogorov

from .domain import Outcome
from .harness import Method, RunRecord
from .scoring import ATTRIBUTES

SIGNIFICANCE = 0.05
REPORT_FILES = ("time_by_app.csv", "failures.csv", "cost_dist.csv", "cost_delta.csv", "qos_dist.csv",
                "ks_tests.csv", "summary.txt")
METRICS = ("cost",) + ATTRIBUTES


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n1: int
    n2: int
    significant_at_0_05: bool


def ks_two_sample(a, b) -> KsResult:
    """Maximum ECDF gap between two samples, with the asymptotic two-sided p-value."""
    x = np.sort(np.asarray(a, dtype=float))
    y = np.sort(np.asarray(b, dtype=float))
    n1, n2 = len(x), len(y)
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples need at least one observation")
    grid = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, grid, side="right") / n1
    cdf_y = np.searchsorted(y, grid, side="right") / n2
    d = float(np.max(np.abs(cdf_x - cdf_y)))
    en = n1 * n2 / (n1 + n2)
    p = float(min(1.0, max(0.0, kolmogorov(math.sqrt(en) * d))))
    return KsResult(d, p, n1, n2, p < SIGNIFICANCE)


# -- report -------------------------------------------------------------


def _f(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(getattr(value, "value", value))


def _write(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_f(v) for v in row])


def _groups(records) -> dict[str, list[RunRecord]]:
    groups: dict[str, list[RunRecord]] = defaultdict(list)
    for r in records:
        groups[r.scenario or "all"].append(r)
    return dict(sorted(groups.items()))


def _methods(records) -> list[Method]:
    present = {r.method for r in records}
    return [m for m in Method if m in present]


def comparison_pairs(methods) -> list[tuple[Method, Method]]:
    """Which method pairs to test: against Centralised when present, else First-Fit vs CBBA."""
    if Method.CENTRALISED in methods:
        return [(Method.CENTRALISED, m) for m in methods if m is not Method.CENTRALISED]
    if Method.FIRST_FIT in methods and Method.CBBA in methods:
        return [(Method.FIRST_FIT, Method.CBBA)]
    return []


def _sample(records, method: Method, metric: str) -> list[float]:
    return [getattr(r, metric) for r in records if r.method is method and r.outcome is Outcome.SUCCESS]


def ks_table(records) -> tuple[list[tuple], list[str]]:
    """KS rows pooled over all records, plus per scenario when there are several."""
    rows, notes = [], []
    groups = _groups(records)
    scopes = [("all", list(records))]
    if len(groups) > 1:
        scopes += list(groups.items())
    pairs = comparison_pairs(_methods(records))
    if not pairs:
        notes.append("KS table empty: need at least two methods to compare")
    for scope, recs in scopes:
        for ref, other in pairs:
            for metric in METRICS:
                a, b = _sample(recs, ref, metric), _sample(recs, other, metric)
                if not a or not b:
                    notes.append(f"KS skipped for {scope} {ref.value} vs {other.value} {metric}: empty sample")
                    continue
                res = ks_two_sample(a, b)
                rows.append((scope, f"{ref.value} vs {other.value}", metric, res.n1, res.n2, res.statistic,
                             res.p_value, res.significant_at_0_05))
    return rows, notes


def report(records, out_dir) -> list[str]:
    """Write the plot-ready tables and summary for ``records`` into ``out_dir``; returns the paths."""
    records = list(records)
    if not records:
        raise ValueError("no records to report")
    os.makedirs(out_dir, exist_ok=True)
    if not os.access(out_dir, os.W_OK):
        raise PermissionError(f"{out_dir} is not writable")
    groups = _groups(records)
    methods = _methods(records)
    path = lambda name: os.path.join(out_dir, name)  # noqa: E731

    _write(path("time_by_app.csv"),
           ("scenario", "repetition", "application_id", "method", "outcome", "elapsed_seconds"),
           [(g, r.repetition, r.application_id, r.method, r.outcome, r.elapsed_seconds)
            for g, recs in groups.items() for r in recs])

    _write(path("failures.csv"), ("scenario", "method", "failures", "total"),
           [(g, m, sum(1 for r in recs if r.method is m and r.outcome is not Outcome.SUCCESS),
             sum(1 for r in recs if r.method is m))
            for g, recs in groups.items() for m in methods])

    _write(path("cost_dist.csv"), ("scenario", "method", "repetition", "application_id", "cost"),
           [(g, r.method, r.repetition, r.application_id, r.cost)
            for g, recs in groups.items() for r in recs if r.outcome is Outcome.SUCCESS])

    delta_rows = []
    for g, recs in groups.items():
        reference = {(r.repetition, r.application_id): r for r in recs if r.method is Method.CENTRALISED}
        for r in recs:
            ref = reference.get((r.repetition, r.application_id))
            if r.method is Method.CENTRALISED or ref is None:
                continue
            failed = {(False, False): "", (True, False): "reference", (False, True): "method",
                      (True, True): "both"}[(ref.cost is None, r.cost is None)]
            delta = None if failed else ref.cost - r.cost
            delta_rows.append((g, r.repetition, r.application_id, r.method, ref.cost, r.cost, delta, failed))
    _write(path("cost_delta.csv"),
           ("scenario", "repetition", "application_id", "method", "reference_cost", "cost", "delta", "failed"),
           delta_rows)

    _write(path("qos_dist.csv"), ("scenario", "method", "repetition", "application_id", "attribute", "value"),
           [(g, r.method, r.repetition, r.application_id, name, getattr(r, name))
            for g, recs in groups.items() for r in recs if r.outcome is Outcome.SUCCESS for name in ATTRIBUTES])

    ks_rows, notes = ks_table(records)
    _write(path("ks_tests.csv"),
           ("scope", "comparison", "metric", "n1", "n2", "statistic", "p_value", "significant"), ks_rows)
    if Method.CENTRALISED not in methods:
        notes.append("cost_delta.csv empty: no Centralised reference records")

    with open(path("summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(_summary(groups, methods, ks_rows, notes))
    return [path(name) for name in REPORT_FILES]


def _num(x: float | None) -> str:
    return "-" if x is None else f"{x:.6g}"


def _summary(groups, methods, ks_rows, notes) -> str:
    lines = []
    for g, recs in groups.items():
        lines.append(f"scenario {g}")
        for m in methods:
            mine = [r for r in recs if r.method is m]
            if not mine:
                continue
            ok = [r for r in mine if r.outcome is Outcome.SUCCESS]
            times = [r.elapsed_seconds for r in mine if r.elapsed_seconds is not None]
            costs = [r.cost for r in ok]
            lines.append(
                f"  {m.value:<12} records={len(mine)} success={len(ok)} failed={len(mine) - len(ok)}"
                f" median_time={_num(statistics.median(times) if times else None)}"
                f" mean_cost={_num(statistics.fmean(costs) if costs else None)}"
            )
    lines.append("")
    lines.append("Kolmogorov-Smirnov tests (alpha = 0.05)")
    for scope, comparison, metric, n1, n2, d, p, sig in ks_rows:
        lines.append(f"  [{scope}] {comparison} {metric}: D={d:.6g} p={p:.6g} n=({n1},{n2})"
                     f" {'significant' if sig else 'not significant'}")
    if notes:
        lines.append("")
        lines.extend(f"note: {n}" for n in notes)
    return "\n".join(lines) + "\n"
