"""Core data types for applications, capacities and allocations."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, NamedTuple

SPEC_VERSION = 1


class Location(str, Enum):
    EU = "EU"
    US = "US"
    ASIA = "Asia"
    WORLDWIDE = "Worldwide"


CAPACITY_LOCATIONS = (Location.EU, Location.US, Location.ASIA)


class Kind(str, Enum):
    CLOUD = "Cloud"
    EDGE = "Edge"


class Outcome(str, Enum):
    SUCCESS = "Success"
    NO_VALID_ALLOCATION = "NoValidAllocation"
    ENUMERATION_BUDGET_EXCEEDED = "EnumerationBudgetExceeded"
    CONVERGENCE_TIMEOUT = "ConvergenceTimeout"
    TIMED_OUT = "TimedOut"


class UnknownCapacityError(KeyError):
    """An allocation references a capacity id that is not in the pool."""


class Resources(NamedTuple):
    cpu: int
    ram: int
    storage: int

    def covers(self, other: Resources) -> bool:
        return self.cpu >= other.cpu and self.ram >= other.ram and self.storage >= other.storage

    def __sub__(self, other):  # type: ignore[override]
        return Resources(self.cpu - other.cpu, self.ram - other.ram, self.storage - other.storage)

    def __add__(self, other):  # type: ignore[override]
        return Resources(self.cpu + other.cpu, self.ram + other.ram, self.storage + other.storage)


ZERO = Resources(0, 0, 0)


@dataclass(frozen=True)
class Microservice:
    id: int
    cpu: int
    ram: int
    storage: int
    location: Location
    running_time: int

    def __post_init__(self):
        if min(self.cpu, self.ram, self.storage) < 0 or self.running_time < 0:
            raise ValueError(f"microservice {self.id}: negative demand")

    @property
    def demand(self) -> Resources:
        return Resources(self.cpu, self.ram, self.storage)


@dataclass(frozen=True)
class Application:
    id: int
    microservices: tuple[Microservice, ...]

    def __post_init__(self):
        object.__setattr__(self, "microservices", tuple(self.microservices))
        ids = [ms.id for ms in self.microservices]
        if ids != list(range(len(ids))):
            raise ValueError(f"application {self.id}: microservice ids must be 0..m-1, got {ids}")

    def __len__(self) -> int:
        return len(self.microservices)


@dataclass(frozen=True)
class QosProfile:
    price: float
    energy: float
    bandwidth: float
    latency: float

    def __post_init__(self):
        if min(self.price, self.energy, self.bandwidth, self.latency) <= 0:
            raise ValueError(f"QoS values must be strictly positive: {self}")


@dataclass
class Capacity:
    id: int
    kind: Kind
    cpu_quota: int
    ram_quota: int
    storage_quota: int
    location: Location
    qos: QosProfile
    discount: float
    remaining: Resources = None  # type: ignore[assignment]
    occupied_by: int | None = None

    def __post_init__(self):
        if self.location not in CAPACITY_LOCATIONS:
            raise ValueError(f"capacity {self.id}: invalid location {self.location}")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError(f"capacity {self.id}: discount {self.discount} outside [0, 1]")
        if self.remaining is None:
            self.remaining = self.quota
        self.remaining = Resources(*self.remaining)
        if not (self.quota.covers(self.remaining) and self.remaining.covers(ZERO)):
            raise ValueError(f"capacity {self.id}: remaining {self.remaining} outside quota {self.quota}")
        if self.kind is Kind.CLOUD and self.occupied_by is not None:
            raise ValueError(f"capacity {self.id}: cloud capacities cannot be occupied")

    @property
    def quota(self) -> Resources:
        return Resources(self.cpu_quota, self.ram_quota, self.storage_quota)

    def reset(self) -> None:
        self.remaining = self.quota
        self.occupied_by = None

    def copy(self) -> Capacity:
        # qos is frozen, so a shallow copy is independent
        return Capacity(**{f: getattr(self, f) for f in self.__dataclass_fields__})


@dataclass
class Allocation:
    application_id: int
    assignments: dict[int, int]
    total_cost: float = 0.0
    qos_breakdown: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class Failure:
    """Why an allocator produced no allocation."""

    reason: Outcome
    application_id: int
    microservice_ids: tuple[int, ...] = ()
    detail: str = ""


def index_capacities(capacities) -> dict[int, Capacity]:
    if isinstance(capacities, dict):
        return capacities
    return {cap.id: cap for cap in capacities}


def validate_allocation(alloc: Allocation, app: Application, capacities) -> bool:
    """Check completeness, per-assignment feasibility and joint quota feasibility.

    Raises UnknownCapacityError if the allocation names a capacity that is not
    in ``capacities``; every other problem yields ``False``.
    """
    from .scoring import feasible

    if alloc.application_id != app.id:
        raise ValueError(f"allocation is for application {alloc.application_id}, not {app.id}")
    caps = index_capacities(capacities)
    for cap_id in alloc.assignments.values():
        if cap_id not in caps:
            raise UnknownCapacityError(cap_id)

    if set(alloc.assignments) != {ms.id for ms in app.microservices}:
        return False

    used: dict[int, Resources] = defaultdict(lambda: ZERO)
    for ms in app.microservices:
        cap = caps[alloc.assignments[ms.id]]
        if not feasible(ms, cap, app.id):
            return False
        used[cap.id] = used[cap.id] + ms.demand
    return all(caps[cid].remaining.covers(total) for cid, total in used.items())


# -- JSON ---------------------------------------------------------------


@dataclass
class Scenario:
    applications: list[Application]
    capacities: list[Capacity]
    seed: int = 0


def microservice_to_dict(ms: Microservice) -> dict[str, Any]:
    return {
        "id": ms.id,
        "cpu": ms.cpu,
        "ram": ms.ram,
        "storage": ms.storage,
        "location": ms.location.value,
        "running_time": ms.running_time,
    }


def application_to_dict(app: Application) -> dict[str, Any]:
    return {"id": app.id, "microservices": [microservice_to_dict(ms) for ms in app.microservices]}


def capacity_to_dict(cap: Capacity) -> dict[str, Any]:
    return {
        "id": cap.id,
        "kind": cap.kind.value,
        "cpu_quota": cap.cpu_quota,
        "ram_quota": cap.ram_quota,
        "storage_quota": cap.storage_quota,
        "location": cap.location.value,
        "qos": {
            "price": cap.qos.price,
            "energy": cap.qos.energy,
            "bandwidth": cap.qos.bandwidth,
            "latency": cap.qos.latency,
        },
        "discount": cap.discount,
        "remaining": {"cpu": cap.remaining.cpu, "ram": cap.remaining.ram, "storage": cap.remaining.storage},
        "occupied_by": cap.occupied_by,
    }


def application_from_dict(d: dict[str, Any]) -> Application:
    return Application(
        id=int(d["id"]),
        microservices=tuple(
            Microservice(
                id=int(m["id"]),
                cpu=int(m["cpu"]),
                ram=int(m["ram"]),
                storage=int(m["storage"]),
                location=Location(m["location"]),
                running_time=int(m["running_time"]),
            )
            for m in d["microservices"]
        ),
    )


def capacity_from_dict(d: dict[str, Any]) -> Capacity:
    rem = d.get("remaining")
    return Capacity(
        id=int(d["id"]),
        kind=Kind(d["kind"]),
        cpu_quota=int(d["cpu_quota"]),
        ram_quota=int(d["ram_quota"]),
        storage_quota=int(d["storage_quota"]),
        location=Location(d["location"]),
        qos=QosProfile(**{k: float(v) for k, v in d["qos"].items()}),
        discount=float(d["discount"]),
        remaining=None if rem is None else Resources(int(rem["cpu"]), int(rem["ram"]), int(rem["storage"])),
        occupied_by=d.get("occupied_by"),
    )


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    return {
        "applications": [application_to_dict(a) for a in scenario.applications],
        "capacities": [capacity_to_dict(c) for c in scenario.capacities],
        "seed": scenario.seed,
        "spec_version": SPEC_VERSION,
    }


def scenario_from_dict(d: dict[str, Any]) -> Scenario:
    version = d.get("spec_version", SPEC_VERSION)
    if version != SPEC_VERSION:
        raise ValueError(f"unsupported scenario version {version}")
    return Scenario(
        applications=[application_from_dict(a) for a in d["applications"]],
        capacities=[capacity_from_dict(c) for c in d["capacities"]],
        seed=int(d.get("seed", 0)),
    )


def dumps_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"


def loads_scenario(text: str) -> Scenario:
    return scenario_from_dict(json.loads(text))


def save_scenario(scenario: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_scenario(scenario))


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return loads_scenario(fh.read())
