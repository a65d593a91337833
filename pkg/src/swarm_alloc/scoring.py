"""Feasibility, QoS normalisation, allocation cost and bidding utility.

Costs are minimised by the centralised allocators; the consensus agents
maximise ``utility = 1 - cost`` instead.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass

from .domain import (
    Allocation,
    Application,
    Capacity,
    Kind,
    Location,
    Microservice,
    Resources,
    index_capacities,
)

ATTRIBUTES = ("price", "energy", "bandwidth", "latency")


@dataclass(frozen=True)
class Weights:
    w_price: float = 0.25
    w_energy: float = 0.25
    w_bandwidth: float = 0.25
    w_latency: float = 0.25

    def __post_init__(self):
        values = (self.w_price, self.w_energy, self.w_bandwidth, self.w_latency)
        if min(values) < 0:
            raise ValueError(f"weights must be non-negative: {values}")
        if abs(sum(values) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {sum(values)}")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(ATTRIBUTES, (self.w_price, self.w_energy, self.w_bandwidth, self.w_latency)))


@dataclass(frozen=True)
class NormBounds:
    """Static (min, max) ranges used for min-max normalisation.

    Defaults are the capacity generator's ranges. Price and energy are
    per resource-unit per time-unit values; bandwidth is inverted when
    normalised since more bandwidth is better.
    """

    price: tuple[float, float] = (0.05, 1.0)
    energy: tuple[float, float] = (1.0, 10.0)
    bandwidth: tuple[float, float] = (100.0, 1000.0)
    latency: tuple[float, float] = (50.0, 200.0)

    def __post_init__(self):
        for name in ATTRIBUTES:
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} bounds need min < max, got ({lo}, {hi})")
            object.__setattr__(self, name, (float(lo), float(hi)))


DEFAULT_WEIGHTS = Weights()
DEFAULT_BOUNDS = NormBounds()


def load_config(path) -> tuple[Weights, NormBounds]:
    """Read ``{"weights": {...}, "bounds": {"price": [lo, hi], ...}}``; missing keys keep defaults."""
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    weights = Weights(**cfg.get("weights", {}))
    bounds = NormBounds(**{k: tuple(v) for k, v in cfg.get("bounds", {}).items()})
    return weights, bounds


def fits(ms: Microservice, available: Resources) -> bool:
    return available.cpu >= ms.cpu and available.ram >= ms.ram and available.storage >= ms.storage


def compatible(ms: Microservice, cap: Capacity, app_id: int) -> bool:
    """Location and edge-exclusivity part of feasibility, ignoring quotas."""
    if ms.location is not Location.WORLDWIDE and ms.location is not cap.location:
        return False
    return cap.kind is Kind.CLOUD or cap.occupied_by is None or cap.occupied_by == app_id


def feasible(ms: Microservice, cap: Capacity, app_id: int) -> bool:
    return fits(ms, cap.remaining) and compatible(ms, cap, app_id)


def raw_price(ms: Microservice, cap: Capacity) -> float:
    return cap.qos.price * (ms.cpu + ms.ram) * ms.running_time


def raw_energy(ms: Microservice, cap: Capacity) -> float:
    return cap.qos.energy * (ms.cpu + ms.ram) * ms.running_time


def _clamp(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def _scaled(unit: float, unit_bounds: tuple[float, float], ms: Microservice) -> float:
    # raw = unit * (cpu + ram) * time and its bounds carry the same factor, which
    # cancels; dividing it out explicitly would add per-task rounding noise and
    # break exact ties between tasks on one capacity
    if (ms.cpu + ms.ram) * ms.running_time == 0:
        return 0.0
    lo, hi = unit_bounds
    return _clamp((unit - lo) / (hi - lo))


def normalized_qos(ms: Microservice, cap: Capacity, nb: NormBounds = DEFAULT_BOUNDS) -> dict[str, float]:
    bw_lo, bw_hi = nb.bandwidth
    lat_lo, lat_hi = nb.latency
    return {
        "price": _scaled(cap.qos.price, nb.price, ms),
        "energy": _scaled(cap.qos.energy, nb.energy, ms),
        "bandwidth": _clamp((bw_hi - cap.qos.bandwidth) / (bw_hi - bw_lo)),
        "latency": _clamp((cap.qos.latency - lat_lo) / (lat_hi - lat_lo)),
    }


def ms_cost(ms: Microservice, cap: Capacity, w: Weights = DEFAULT_WEIGHTS, nb: NormBounds = DEFAULT_BOUNDS) -> float:
    q = normalized_qos(ms, cap, nb)
    return (
        w.w_price * q["price"]
        + w.w_energy * q["energy"]
        + w.w_bandwidth * q["bandwidth"]
        + w.w_latency * q["latency"]
    )


def qos_breakdown(assignments: dict[int, int], app: Application, capacities, nb: NormBounds = DEFAULT_BOUNDS):
    """Per-attribute sums of normalised QoS, with the consolidation discount on price."""
    caps = index_capacities(capacities)
    missing = [ms.id for ms in app.microservices if ms.id not in assignments]
    if missing:
        raise ValueError(f"allocation for application {app.id} is missing microservices {missing}")
    hosted = defaultdict(int)
    for ms in app.microservices:
        hosted[assignments[ms.id]] += 1

    totals = dict.fromkeys(ATTRIBUTES, 0.0)
    # sum in microservice order so the result does not depend on dict order
    for ms in app.microservices:
        cap = caps[assignments[ms.id]]
        q = normalized_qos(ms, cap, nb)
        if hosted[cap.id] >= 2:
            q["price"] *= 1.0 - cap.discount
        for name in ATTRIBUTES:
            totals[name] += q[name]
    return totals


def weighted_sum(breakdown: dict[str, float], w: Weights = DEFAULT_WEIGHTS) -> float:
    return (
        w.w_price * breakdown["price"]
        + w.w_energy * breakdown["energy"]
        + w.w_bandwidth * breakdown["bandwidth"]
        + w.w_latency * breakdown["latency"]
    )


def allocation_cost(alloc: Allocation, app: Application, capacities, w: Weights = DEFAULT_WEIGHTS,
                    nb: NormBounds = DEFAULT_BOUNDS) -> float:
    return weighted_sum(qos_breakdown(alloc.assignments, app, capacities, nb), w)


def score(alloc: Allocation, app: Application, capacities, w: Weights = DEFAULT_WEIGHTS,
          nb: NormBounds = DEFAULT_BOUNDS) -> Allocation:
    """Fill in ``total_cost`` and ``qos_breakdown`` on ``alloc`` and return it."""
    alloc.qos_breakdown = qos_breakdown(alloc.assignments, app, capacities, nb)
    alloc.total_cost = weighted_sum(alloc.qos_breakdown, w)
    return alloc


def utility(ms: Microservice, cap: Capacity, app_id: int, w: Weights = DEFAULT_WEIGHTS,
            nb: NormBounds = DEFAULT_BOUNDS) -> float:
    """Bidding value of ``cap`` for ``ms``; 0 when the pair is infeasible.

    The discount is left out on purpose so a task's value does not depend on
    what else is in the bundle.
    """
    if not feasible(ms, cap, app_id):
        return 0.0
    return 1.0 - ms_cost(ms, cap, w, nb)


def marginal_utility(ms: Microservice, bundle, cap: Capacity, app_id: int, w: Weights = DEFAULT_WEIGHTS,
                     nb: NormBounds = DEFAULT_BOUNDS) -> float:
    """Utility gained by appending ``ms`` to ``bundle``; bundle contents never matter."""
    del bundle
    return utility(ms, cap, app_id, w, nb)


def allocation_utility(alloc: Allocation, app: Application, capacities, w: Weights = DEFAULT_WEIGHTS,
                       nb: NormBounds = DEFAULT_BOUNDS) -> float:
    return len(app) - allocation_cost(alloc, app, capacities, w, nb)
