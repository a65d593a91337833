"""Consensus-based bundle auction over one application's microservices.

Each capacity is one agent. Agents greedily bundle the tasks they value most
and can still fit, then exchange winning-bid views ``(y, z, s)`` and keep,
per task, the entry ranked highest by

    newer timestamp > higher bid > higher winner discount > lower agent id

An agent outbid on a bundled task drops that task and everything it added
after it.

Timestamps are a logical clock with two ticks per round: bids placed while
bundling carry ``2 * round`` and releases made while resolving carry
``2 * round + 1``, so news of a release always outranks stale copies of the
released bid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .domain import Allocation, Application, Capacity, Failure, Outcome, Resources, validate_allocation
from .scoring import DEFAULT_BOUNDS, DEFAULT_WEIGHTS, NormBounds, Weights, feasible, ms_cost, score

NONE = None
NO_DISCOUNT = -1.0
# feasible pairs always bid something, so y == 0 keeps meaning "unassigned"
MIN_BID = 1e-12


class ProtocolError(RuntimeError):
    """Raised when agents exchange malformed data or reach an inconsistent state."""


@dataclass(frozen=True)
class ConsensusMessage:
    sender_id: int
    y: tuple[float, ...]
    z: tuple[int | None, ...]
    s: tuple[int, ...]
    sender_discount: float
    # discount of each entry's winner, needed to rank relayed bids
    winner_discount: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "sender_id": self.sender_id,
            "y": list(self.y),
            "z": list(self.z),
            "s": list(self.s),
            "sender_discount": self.sender_discount,
            "winner_discount": list(self.winner_discount),
        }


@dataclass
class AgentState:
    agent_id: int
    capacity: Capacity
    utilities: list[float]
    demands: list[Resources]
    bundle: list[int] = field(default_factory=list)
    y: list[float] = field(default_factory=list)
    z: list[int | None] = field(default_factory=list)
    s: list[int] = field(default_factory=list)
    winner_discount: list[float] = field(default_factory=list)
    tentative_remaining: Resources | None = None
    clock: int = 0
    changed: bool = True

    def __post_init__(self):
        n = len(self.utilities)
        self.y = self.y or [0.0] * n
        self.z = self.z or [NONE] * n
        self.s = self.s or [0] * n
        self.winner_discount = self.winner_discount or [NO_DISCOUNT] * n
        if self.tentative_remaining is None:
            self.tentative_remaining = self.capacity.remaining

    @property
    def discount(self) -> float:
        return self.capacity.discount

    def snapshot(self) -> tuple:
        return tuple(self.bundle), tuple(self.y), tuple(self.z), tuple(self.s)


def init_agent(capacity: Capacity, app: Application, w: Weights = DEFAULT_WEIGHTS,
               nb: NormBounds = DEFAULT_BOUNDS) -> AgentState:
    bids = [max(1.0 - ms_cost(ms, capacity, w, nb), MIN_BID) if feasible(ms, capacity, app.id) else 0.0
            for ms in app.microservices]
    return AgentState(capacity.id, capacity, bids, [ms.demand for ms in app.microservices])


def key(s: int, y: float, wd: float, z: int | None) -> tuple:
    return s, y, wd, -math.inf if z is None else -z


def check_invariants(state: AgentState) -> None:
    if len(set(state.bundle)) != len(state.bundle):
        raise ProtocolError(f"agent {state.agent_id}: duplicate bundle entries {state.bundle}")
    for m, (y, z) in enumerate(zip(state.y, state.z)):
        if (y == 0.0) != (z is None):
            raise ProtocolError(f"agent {state.agent_id}: task {m} has y={y} but z={z}")
        if (z == state.agent_id) != (m in state.bundle):
            raise ProtocolError(f"agent {state.agent_id}: task {m} winner {z} disagrees with bundle {state.bundle}")
    reserved = state.capacity.remaining
    for m in state.bundle:
        reserved = reserved - state.demands[m]
    if reserved != state.tentative_remaining:
        raise ProtocolError(f"agent {state.agent_id}: tentative {state.tentative_remaining} != {reserved}")


def _outbids(state: AgentState, m: int, bid: float) -> bool:
    y = state.y[m]
    if bid != y:
        return bid > y
    z = state.z[m]
    if z is None or z == state.agent_id:
        return False
    if state.discount != state.winner_discount[m]:
        return state.discount > state.winner_discount[m]
    return state.agent_id < z


def build_bundle(state: AgentState) -> bool:
    """Greedily append the best task this agent can still fit and win.

    Returns True if the bundle grew.
    """
    grew = False
    in_bundle = set(state.bundle)
    while True:
        best, best_bid = None, 0.0
        for m, bid in enumerate(state.utilities):
            if bid <= 0.0 or m in in_bundle or bid <= best_bid:
                continue
            d = state.demands[m]
            t = state.tentative_remaining
            if d.cpu > t.cpu or d.ram > t.ram or d.storage > t.storage:
                continue
            if _outbids(state, m, bid):
                best, best_bid = m, bid
        if best is None:
            return grew
        state.bundle.append(best)
        in_bundle.add(best)
        state.y[best] = best_bid
        state.z[best] = state.agent_id
        state.s[best] = state.clock
        state.winner_discount[best] = state.discount
        state.tentative_remaining = state.tentative_remaining - state.demands[best]
        grew = True


def message(state: AgentState) -> ConsensusMessage:
    return ConsensusMessage(state.agent_id, tuple(state.y), tuple(state.z), tuple(state.s), state.discount,
                            tuple(state.winner_discount))


def merge(state: AgentState, y, z, s, wd) -> bool:
    """Fold per-task incoming entries into ``state``; returns True on any change."""
    me = state.agent_id
    adopted = []
    for m in range(len(state.y)):
        if z[m] == me and state.z[m] != me:
            # never take someone else's word that we hold a task we released
            continue
        if key(s[m], y[m], wd[m], z[m]) > key(state.s[m], state.y[m], state.winner_discount[m], state.z[m]):
            adopted.append(m)
    if not adopted:
        return False

    position = {t: i for i, t in enumerate(state.bundle)}
    cut = min((position[m] for m in adopted if m in position and z[m] != me), default=None)
    for m in adopted:
        state.y[m], state.z[m], state.s[m], state.winner_discount[m] = y[m], z[m], s[m], wd[m]
    if cut is not None:
        released = state.bundle[cut:]
        del state.bundle[cut:]
        for t in released:
            state.tentative_remaining = state.tentative_remaining + state.demands[t]
            if state.z[t] == me:
                state.y[t], state.z[t], state.s[t], state.winner_discount[t] = 0.0, NONE, state.clock, NO_DISCOUNT
    return True


def resolve(state: AgentState, msg: ConsensusMessage) -> bool:
    n = len(state.y)
    if not (len(msg.y) == len(msg.z) == len(msg.s) == n):
        raise ProtocolError(f"message from {msg.sender_id} has vectors of length {len(msg.y)}, expected {n}")
    wd = msg.winner_discount
    if not wd:
        # plain message: only the sender's own claims carry a known discount
        wd = tuple(msg.sender_discount if zz == msg.sender_id else
                   state.winner_discount[m] if zz == state.z[m] else NO_DISCOUNT
                   for m, zz in enumerate(msg.z))
    elif len(wd) != n:
        raise ProtocolError(f"message from {msg.sender_id} has {len(wd)} winner discounts, expected {n}")
    return merge(state, msg.y, msg.z, msg.s, wd)


def converged(states: list[AgentState]) -> bool:
    """True when every agent holds the same winners list and nothing moved last round."""
    if not states:
        return True
    if any(st.changed for st in states):
        return False
    first = states[0].z
    return all(st.z == first for st in states[1:])


def extract_allocation(states: list[AgentState], app: Application, w: Weights = DEFAULT_WEIGHTS,
                       nb: NormBounds = DEFAULT_BOUNDS) -> Allocation | Failure:
    if not states:
        if len(app):
            return Failure(Outcome.NO_VALID_ALLOCATION, app.id, tuple(range(len(app))), "no agents")
        return Allocation(app.id, {})
    winners = states[0].z
    if any(st.z != winners for st in states):
        raise ProtocolError("agents disagree on winners")
    unassigned = tuple(m for m, z in enumerate(winners) if z is None)
    if unassigned:
        return Failure(Outcome.NO_VALID_ALLOCATION, app.id, unassigned, "no agent won these microservices")
    caps = {st.agent_id: st.capacity for st in states}
    alloc = Allocation(app.id, {m: z for m, z in enumerate(winners)})
    if not validate_allocation(alloc, app, caps):
        raise ProtocolError(f"converged allocation {alloc.assignments} is not valid")
    return score(alloc, app, caps, w, nb)
