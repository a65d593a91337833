"""Sequential allocation experiments with per-method capacity state."""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field
from enum import Enum

from .baselines import DEFAULT_ENUMERATION_BUDGET, centralised_exhaustive, first_fit
from .domain import Allocation, Application, Capacity, Failure, Kind, Outcome, Scenario, index_capacities
from .scenario import (
    ScenarioSpec,
    application_rng,
    capacity_rng,
    generate_applications,
    generate_capacities,
    generate_scenario,
)
from .scoring import ATTRIBUTES, DEFAULT_BOUNDS, DEFAULT_WEIGHTS, NormBounds, Weights
from .simnet import allocate_cbba

log = logging.getLogger(__name__)


class Method(str, Enum):
    CENTRALISED = "Centralised"
    FIRST_FIT = "FirstFit"
    CBBA = "CBBA"


METHOD_NAMES = {"centralised": Method.CENTRALISED, "first-fit": Method.FIRST_FIT, "cbba": Method.CBBA}
ALL_METHODS = (Method.CENTRALISED, Method.FIRST_FIT, Method.CBBA)

CSV_COLUMNS = ("repetition", "application_id", "method", "elapsed_seconds", "outcome", "cost",
               "price", "energy", "bandwidth", "latency", "rounds", "messages")

SCALE_SCENARIOS = ((10, 50), (50, 250), (100, 500), (500, 1000), (1000, 3000))


def parse_methods(text: str) -> list[Method]:
    methods = []
    for name in text.split(","):
        name = name.strip().lower()
        if name not in METHOD_NAMES:
            raise ValueError(f"unknown method {name!r}; choose from {', '.join(METHOD_NAMES)}")
        methods.append(METHOD_NAMES[name])
    return methods


@dataclass
class RunRecord:
    repetition: int
    application_id: int
    method: Method
    elapsed_seconds: float | None
    outcome: Outcome
    cost: float | None = None
    price: float | None = None
    energy: float | None = None
    bandwidth: float | None = None
    latency: float | None = None
    rounds: int | None = None
    messages: int | None = None
    # grouping label, not written to CSV
    scenario: str = field(default="", compare=False)

    def __post_init__(self):
        if (self.cost is not None) != (self.outcome is Outcome.SUCCESS):
            raise ValueError(f"cost must be present exactly when the outcome is Success: {self}")

    @property
    def qos_breakdown(self) -> dict[str, float] | None:
        if self.price is None:
            return None
        return {name: getattr(self, name) for name in ATTRIBUTES}


@dataclass(frozen=True)
class AllocatorSettings:
    weights: Weights = DEFAULT_WEIGHTS
    bounds: NormBounds = DEFAULT_BOUNDS
    max_rounds: int | None = None
    enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET
    timing: bool = True
    trace: object = None


def allocate(method: Method, app: Application, caps, settings: AllocatorSettings = AllocatorSettings(),
             deadline: float | None = None):
    """Dispatch to one allocator; returns ``(Allocation | Failure, NetworkStats | None)``."""
    w, nb = settings.weights, settings.bounds
    if method is Method.CENTRALISED:
        return centralised_exhaustive(app, caps, w, nb, settings.enumeration_budget, deadline), None
    if method is Method.FIRST_FIT:
        return first_fit(app, caps, w, nb, deadline), None
    return allocate_cbba(app, caps, w, nb, settings.max_rounds, deadline, settings.trace)


def commit(alloc: Allocation, app: Application, capacities) -> None:
    """Reserve an allocation's demands on the capacities it uses."""
    caps = index_capacities(capacities)
    for ms in app.microservices:
        cap = caps[alloc.assignments[ms.id]]
        cap.remaining = cap.remaining - ms.demand
        if cap.kind is Kind.EDGE:
            cap.occupied_by = app.id


def fresh_copy(capacities) -> dict[int, Capacity]:
    copies = {}
    for cap in index_capacities(capacities).values():
        c = cap.copy()
        c.reset()
        copies[c.id] = c
    return copies


def _record(rep: int, app: Application, method: Method, result, stats, elapsed: float | None,
            settings: AllocatorSettings, label: str) -> RunRecord:
    rounds = messages = None
    if stats is not None:
        rounds, messages = stats.rounds, stats.messages_sent
    if not settings.timing:
        elapsed = None
    if isinstance(result, Failure):
        # the centralised methods stop before evaluation, so no time is reported
        if method is not Method.CBBA:
            elapsed = None
        return RunRecord(rep, app.id, method, elapsed, result.reason, rounds=rounds, messages=messages, scenario=label)
    q = result.qos_breakdown
    return RunRecord(rep, app.id, method, elapsed, Outcome.SUCCESS, result.total_cost, q["price"], q["energy"],
                     q["bandwidth"], q["latency"], rounds, messages, scenario=label)


def _repetition_inputs(scenario: Scenario, rep: int, redraw_applications: bool, redraw_capacities: bool):
    apps = scenario.applications
    caps = scenario.capacities
    if rep > 0 and redraw_applications:
        n = len(apps)
        apps = generate_applications(n, application_rng(scenario.seed, rep), first_id=rep * n)
    if rep > 0 and redraw_capacities:
        n = len(caps)
        n_cloud = sum(1 for c in caps if c.kind is Kind.CLOUD)
        caps = generate_capacities(n, n_cloud / n, capacity_rng(scenario.seed, rep))
    return apps, caps


def run_experiment(scenario: Scenario, methods=ALL_METHODS, w: Weights = DEFAULT_WEIGHTS,
                   nb: NormBounds = DEFAULT_BOUNDS, repetitions: int = 5, *, redraw_applications: bool = True,
                   redraw_capacities: bool = False, max_rounds: int | None = None,
                   enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET, timing: bool = True,
                   time_budget: float | None = None, label: str = "", trace=None) -> list[RunRecord]:
    """Allocate every application in order, once per method and repetition.

    Capacities are reset at the start of each repetition, and each method
    works on its own copy, so one method's commitments never affect another.
    Repetition 0 uses the scenario's applications; later repetitions draw a
    fresh application set from the scenario seed unless
    ``redraw_applications`` is off. With ``time_budget`` set, a method that
    takes longer than that on one application is recorded as ``TimedOut``
    from then on.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    settings = AllocatorSettings(w, nb, max_rounds, enumeration_budget, timing, trace)
    methods = list(methods)
    timed_out: set[Method] = set()
    records: list[RunRecord] = []
    for rep in range(repetitions):
        apps, caps = _repetition_inputs(scenario, rep, redraw_applications, redraw_capacities)
        state = {m: fresh_copy(caps) for m in methods}
        for app in apps:
            for method in methods:
                if method in timed_out:
                    records.append(RunRecord(rep, app.id, method, None, Outcome.TIMED_OUT, scenario=label))
                    continue
                deadline = None if time_budget is None else time.perf_counter() + time_budget
                start = time.perf_counter()
                result, stats = allocate(method, app, state[method], settings, deadline)
                elapsed = time.perf_counter() - start
                if time_budget is not None and elapsed > time_budget:
                    log.info("%s exceeded %.3gs on application %d; skipping it from now on",
                             method.value, time_budget, app.id)
                    timed_out.add(method)
                    result = Failure(Outcome.TIMED_OUT, app.id)
                if isinstance(result, Allocation):
                    commit(result, app, state[method])
                records.append(_record(rep, app, method, result, stats, elapsed, settings, label))
    return records


def scale_specs(factor: float = 1.0, seed: int = 0, repetitions: int = 5, cloud_fraction: float = 0.5):
    def scaled(x: int) -> int:
        return max(1, int(x * factor + 0.5))

    return [
        ScenarioSpec(scaled(a), scaled(c), seed + i, cloud_fraction, repetitions)
        for i, (a, c) in enumerate(SCALE_SCENARIOS)
    ]


def scenario_label(spec: ScenarioSpec, index: int) -> str:
    return f"s{index}_{spec.n_applications}x{spec.n_capacities}"


def run_scale_suite(specs, methods=(Method.FIRST_FIT, Method.CBBA), time_budget: float | None = 60.0,
                    w: Weights = DEFAULT_WEIGHTS, nb: NormBounds = DEFAULT_BOUNDS, **kwargs) -> list[RunRecord]:
    """Run each scenario shape in turn; records carry the shape as ``scenario``."""
    records = []
    for i, spec in enumerate(specs, 1):
        label = scenario_label(spec, i)
        log.info("scale scenario %s", label)
        records.extend(run_experiment(generate_scenario(spec), methods, w, nb, spec.repetitions,
                                      time_budget=time_budget, label=label, **kwargs))
    return records


# -- CSV ----------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records(records, out) -> None:
    """Write records as CSV to a path or an open text file."""
    if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__"):
        with open(out, "w", newline="", encoding="utf-8") as fh:
            write_records(records, fh)
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([_fmt(getattr(r, col)) for col in CSV_COLUMNS])


def records_to_csv(records) -> str:
    buf = io.StringIO()
    write_records(records, buf)
    return buf.getvalue()


def _opt(cast, text: str):
    return None if text == "" else cast(text)


def read_records(path, label: str = "") -> list[RunRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: expected columns {','.join(CSV_COLUMNS)}")
        return [
            RunRecord(
                repetition=int(row["repetition"]),
                application_id=int(row["application_id"]),
                method=Method(row["method"]),
                elapsed_seconds=_opt(float, row["elapsed_seconds"]),
                outcome=Outcome(row["outcome"]),
                cost=_opt(float, row["cost"]),
                price=_opt(float, row["price"]),
                energy=_opt(float, row["energy"]),
                bandwidth=_opt(float, row["bandwidth"]),
                latency=_opt(float, row["latency"]),
                rounds=_opt(int, row["rounds"]),
                messages=_opt(int, row["messages"]),
                scenario=label,
            )
            for row in reader
        ]
