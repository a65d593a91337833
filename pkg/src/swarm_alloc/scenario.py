"""Seeded random applications and capacities.

All randomness flows through ``numpy.random.Generator`` (PCG64). Integer
draws include both endpoints; real draws are half-open ``[min, max)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import (
    CAPACITY_LOCATIONS,
    Application,
    Capacity,
    Kind,
    Location,
    Microservice,
    QosProfile,
    Scenario,
)

MICROSERVICES = (1, 5)
CPU = (1, 6)
RAM = (1, 6)
STORAGE = (1, 10)
RUNNING_TIME = (1, 30)
MS_LOCATIONS = (Location.EU, Location.US, Location.ASIA, Location.WORLDWIDE)
MS_LOCATION_WEIGHTS = (0.2, 0.2, 0.2, 0.4)

# exponent ranges for 2**n quotas
CPU_EXP = {Kind.CLOUD: (4, 10), Kind.EDGE: (1, 5)}
RAM_EXP = {Kind.CLOUD: (4, 10), Kind.EDGE: (1, 5)}
STORAGE_EXP = {Kind.CLOUD: (2, 13), Kind.EDGE: (2, 10)}

PRICE = {Location.US: (0.15, 1.0), Location.EU: (0.1, 0.8), Location.ASIA: (0.05, 0.7)}
ENERGY = (1.0, 10.0)
BANDWIDTH = (100.0, 1000.0)
LATENCY = (50.0, 200.0)
DISCOUNT = (0.0, 1.0)

# stream tags so applications and capacities can be redrawn independently
_APP_STREAM = 0
_CAP_STREAM = 1


@dataclass(frozen=True)
class ScenarioSpec:
    n_applications: int
    n_capacities: int
    seed: int = 0
    cloud_fraction: float = 0.5
    repetitions: int = 5

    def __post_init__(self):
        if self.n_applications < 1 or self.n_capacities < 1:
            raise ValueError("a scenario needs at least one application and one capacity")
        if not 0.0 <= self.cloud_fraction <= 1.0:
            raise ValueError(f"cloud_fraction {self.cloud_fraction} outside [0, 1]")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


def _int(rng: np.random.Generator, bounds: tuple[int, int]) -> int:
    return int(rng.integers(bounds[0], bounds[1], endpoint=True))


def _real(rng: np.random.Generator, bounds: tuple[float, float]) -> float:
    return float(rng.uniform(bounds[0], bounds[1]))


def generate_application(rng: np.random.Generator, app_id: int = 0) -> Application:
    count = _int(rng, MICROSERVICES)
    microservices = []
    for i in range(count):
        cpu = _int(rng, CPU)
        ram = _int(rng, RAM)
        storage = _int(rng, STORAGE)
        location = MS_LOCATIONS[int(rng.choice(len(MS_LOCATIONS), p=MS_LOCATION_WEIGHTS))]
        running_time = _int(rng, RUNNING_TIME)
        microservices.append(Microservice(i, cpu, ram, storage, location, running_time))
    return Application(app_id, tuple(microservices))


def generate_capacity(rng: np.random.Generator, kind: Kind, cap_id: int = 0) -> Capacity:
    cpu = 2 ** _int(rng, CPU_EXP[kind])
    ram = 2 ** _int(rng, RAM_EXP[kind])
    storage = 2 ** _int(rng, STORAGE_EXP[kind])
    location = CAPACITY_LOCATIONS[int(rng.integers(len(CAPACITY_LOCATIONS)))]
    qos = QosProfile(
        price=_real(rng, PRICE[location]),
        energy=_real(rng, ENERGY),
        bandwidth=_real(rng, BANDWIDTH),
        latency=_real(rng, LATENCY),
    )
    discount = _real(rng, DISCOUNT)
    return Capacity(cap_id, kind, cpu, ram, storage, location, qos, discount)


def cloud_count(n_capacities: int, cloud_fraction: float) -> int:
    # round half up, not banker's rounding
    return int(math.floor(cloud_fraction * n_capacities + 0.5))


def application_rng(seed: int, repetition: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, _APP_STREAM, repetition])


def capacity_rng(seed: int, repetition: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, _CAP_STREAM, repetition])


def generate_applications(n: int, rng: np.random.Generator, first_id: int = 0) -> list[Application]:
    return [generate_application(rng, first_id + i) for i in range(n)]


def generate_capacities(n: int, cloud_fraction: float, rng: np.random.Generator) -> list[Capacity]:
    n_cloud = cloud_count(n, cloud_fraction)
    kinds = np.array([Kind.CLOUD] * n_cloud + [Kind.EDGE] * (n - n_cloud), dtype=object)
    # interleave kinds so id order (which first-fit follows) is not type-sorted
    rng.shuffle(kinds)
    return [generate_capacity(rng, kind, i) for i, kind in enumerate(kinds)]


def generate_scenario(spec: ScenarioSpec) -> Scenario:
    apps = generate_applications(spec.n_applications, application_rng(spec.seed))
    caps = generate_capacities(spec.n_capacities, spec.cloud_fraction, capacity_rng(spec.seed))
    return Scenario(apps, caps, spec.seed)
