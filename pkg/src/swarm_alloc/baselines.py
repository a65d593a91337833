"""Centralised allocators: exhaustive enumeration and first-fit.

Both read capacity state and never modify it; committing a result is the
caller's job.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .domain import Allocation, Application, Capacity, Failure, Outcome, Resources, index_capacities
from .scoring import DEFAULT_BOUNDS, DEFAULT_WEIGHTS, NormBounds, Weights, feasible, fits, ms_cost, normalized_qos, score

DEFAULT_ENUMERATION_BUDGET = 10**8

# replace the incumbent only on a strictly lower cost beyond float noise,
# which keeps the lexicographically smallest assignment on ties
_COST_EPS = 1e-12


@dataclass(frozen=True)
class Offer:
    capacity_id: int
    microservice_id: int
    feasible: bool = True


def _ordered(capacities) -> list[Capacity]:
    return sorted(index_capacities(capacities).values(), key=lambda c: c.id)


def collect_offers(app: Application, capacities) -> list[Offer]:
    return [
        Offer(cap.id, ms.id)
        for cap in _ordered(capacities)
        for ms in app.microservices
        if feasible(ms, cap, app.id)
    ]


def candidate_count(app: Application, capacities) -> int:
    """Size of the Cartesian product of per-microservice feasible capacity sets."""
    ordered = _ordered(capacities)
    return math.prod(sum(1 for cap in ordered if feasible(ms, cap, app.id)) for ms in app.microservices)


class ExhaustiveSearch:
    """Depth-first enumeration of every jointly feasible assignment.

    Branches are cut as soon as a partial assignment overcommits a capacity;
    there is no cost-based pruning. ``candidates`` counts complete valid
    assignments scored.
    """

    def __init__(self, app: Application, capacities, w: Weights = DEFAULT_WEIGHTS, nb: NormBounds = DEFAULT_BOUNDS,
                 budget: int = DEFAULT_ENUMERATION_BUDGET, deadline: float | None = None):
        self.app = app
        self.caps = index_capacities(capacities)
        self.w = w
        self.nb = nb
        self.budget = budget
        self.deadline = deadline
        self.candidates = 0

    def run(self) -> Allocation | Failure:
        app = self.app
        ordered = _ordered(self.caps)
        options = [[cap for cap in ordered if feasible(ms, cap, app.id)] for ms in app.microservices]
        empty = tuple(ms.id for ms, opts in zip(app.microservices, options) if not opts)
        if empty:
            return Failure(Outcome.NO_VALID_ALLOCATION, app.id, empty, "no offer for some microservices")
        total = math.prod(len(opts) for opts in options)
        if total > self.budget:
            return Failure(Outcome.ENUMERATION_BUDGET_EXCEEDED, app.id,
                           detail=f"{total} candidates exceed budget {self.budget}")

        # per (microservice, option) constants; n_price never depends on co-located tasks
        slot = {cap.id: i for i, cap in enumerate(ordered)}
        branches = []
        for ms, opts in zip(app.microservices, options):
            row = []
            for cap in opts:
                price_term = self.w.w_price * normalized_qos(ms, cap, self.nb)["price"]
                row.append((slot[cap.id], ms_cost(ms, cap, self.w, self.nb), price_term))
            branches.append(row)
        demands = [ms.demand for ms in app.microservices]
        remaining = [cap.remaining for cap in ordered]
        discount = [cap.discount for cap in ordered]

        n_slots = len(ordered)
        used_cpu = [0] * n_slots
        used_ram = [0] * n_slots
        used_sto = [0] * n_slots
        hosted = [0] * n_slots
        price_sum = [0.0] * n_slots
        choice = [0] * len(app)
        best = [math.inf, None]
        depth_max = len(app)
        timed_out = False

        def descend(depth: int, base: float) -> None:
            nonlocal timed_out
            if depth == depth_max:
                self.candidates += 1
                cost = base
                seen = set()
                for s in choice:
                    if hosted[s] >= 2 and s not in seen:
                        seen.add(s)
                        cost -= discount[s] * price_sum[s]
                if cost < best[0] - _COST_EPS:
                    best[0] = cost
                    best[1] = tuple(choice)
                if self.deadline is not None and self.candidates % 1024 == 0 and time.perf_counter() > self.deadline:
                    timed_out = True
                return
            d = demands[depth]
            for s, c, p in branches[depth]:
                rem = remaining[s]
                if (used_cpu[s] + d.cpu > rem.cpu or used_ram[s] + d.ram > rem.ram
                        or used_sto[s] + d.storage > rem.storage):
                    continue
                used_cpu[s] += d.cpu
                used_ram[s] += d.ram
                used_sto[s] += d.storage
                hosted[s] += 1
                price_sum[s] += p
                choice[depth] = s
                descend(depth + 1, base + c)
                used_cpu[s] -= d.cpu
                used_ram[s] -= d.ram
                used_sto[s] -= d.storage
                hosted[s] -= 1
                price_sum[s] -= p
                if timed_out:
                    return

        descend(0, 0.0)
        if timed_out:
            return Failure(Outcome.TIMED_OUT, app.id, detail=f"deadline hit after {self.candidates} candidates")
        if best[1] is None:
            return Failure(Outcome.NO_VALID_ALLOCATION, app.id, detail="no jointly feasible combination")
        assignments = {ms.id: ordered[s].id for ms, s in zip(app.microservices, best[1])}
        return score(Allocation(app.id, assignments), app, self.caps, self.w, self.nb)


def centralised_exhaustive(app: Application, capacities, w: Weights = DEFAULT_WEIGHTS,
                           nb: NormBounds = DEFAULT_BOUNDS, budget: int = DEFAULT_ENUMERATION_BUDGET,
                           deadline: float | None = None) -> Allocation | Failure:
    return ExhaustiveSearch(app, capacities, w, nb, budget, deadline).run()


def first_fit(app: Application, capacities, w: Weights = DEFAULT_WEIGHTS, nb: NormBounds = DEFAULT_BOUNDS,
              deadline: float | None = None) -> Allocation | Failure:
    """Place each microservice on the first offering capacity that still fits, without backtracking."""
    caps = index_capacities(capacities)
    offers = collect_offers(app, caps)
    tentative: dict[int, Resources] = {}
    assignments: dict[int, int] = {}
    for ms in app.microservices:
        if deadline is not None and time.perf_counter() > deadline:
            return Failure(Outcome.TIMED_OUT, app.id, (ms.id,))
        for offer in offers:
            if offer.microservice_id != ms.id:
                continue
            avail = tentative.get(offer.capacity_id, caps[offer.capacity_id].remaining)
            if fits(ms, avail):
                tentative[offer.capacity_id] = avail - ms.demand
                assignments[ms.id] = offer.capacity_id
                break
        else:
            return Failure(Outcome.NO_VALID_ALLOCATION, app.id, (ms.id,), "first-fit found no capacity")
    return score(Allocation(app.id, assignments), app, caps, w, nb)
