"""Synchronous full-mesh broadcast between consensus agents.

Every round each agent bundles, then all messages are snapshotted and every
agent hears every other agent. Since adoption keeps the highest-ranked entry
per task, hearing n - 1 messages is the same as hearing, per task, the best
entry among them; ``run_round`` computes that with a best/second-best pass
instead of n * (n - 1) pairwise deliveries. ``pairwise=True`` does the
deliveries one by one and exists to check the shortcut.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

from .cbba import (
    AgentState,
    build_bundle,
    converged,
    extract_allocation,
    init_agent,
    key,
    merge,
    message,
)
from .domain import Allocation, Application, Failure, Outcome, index_capacities
from .scoring import DEFAULT_BOUNDS, DEFAULT_WEIGHTS, NormBounds, Weights


@dataclass
class NetworkStats:
    rounds: int = 0
    messages_sent: int = 0
    converged: bool = False


def _incoming_best(messages, n_tasks):
    """Per task, the best and second-best (key, sender index)."""
    best = [(None, -1)] * n_tasks
    second = [(None, -1)] * n_tasks
    for i, msg in enumerate(messages):
        for m in range(n_tasks):
            k = key(msg.s[m], msg.y[m], msg.winner_discount[m], msg.z[m])
            if best[m][0] is None or k > best[m][0]:
                second[m] = best[m]
                best[m] = (k, i)
            elif second[m][0] is None or k > second[m][0]:
                second[m] = (k, i)
    return best, second


def _deliver_merged(agents: list[AgentState], messages) -> list[bool]:
    n_tasks = len(agents[0].y)
    best, second = _incoming_best(messages, n_tasks)
    changed = []
    for i, agent in enumerate(agents):
        senders = [best[m][1] if best[m][1] != i else second[m][1] for m in range(n_tasks)]
        if -1 in senders:
            # a lone agent hears nothing
            changed.append(False)
            continue
        y = [messages[j].y[m] for m, j in enumerate(senders)]
        z = [messages[j].z[m] for m, j in enumerate(senders)]
        s = [messages[j].s[m] for m, j in enumerate(senders)]
        wd = [messages[j].winner_discount[m] for m, j in enumerate(senders)]
        changed.append(merge(agent, y, z, s, wd))
    return changed


def _deliver_pairwise(agents: list[AgentState], messages) -> list[bool]:
    n_tasks = len(agents[0].y)
    changed = []
    for i, agent in enumerate(agents):
        best = None
        for j, msg in enumerate(messages):
            if j == i:
                continue
            if best is None:
                best = [[msg.y[m], msg.z[m], msg.s[m], msg.winner_discount[m]] for m in range(n_tasks)]
                continue
            for m in range(n_tasks):
                y, z, s, wd = best[m]
                if key(msg.s[m], msg.y[m], msg.winner_discount[m], msg.z[m]) > key(s, y, wd, z):
                    best[m] = [msg.y[m], msg.z[m], msg.s[m], msg.winner_discount[m]]
        if best is None:
            changed.append(False)
            continue
        columns = list(zip(*best)) if n_tasks else [(), (), (), ()]
        changed.append(merge(agent, *columns))
    return changed


def run_round(agents: list[AgentState], round_no: int, pairwise: bool = False, trace=None):
    """Bundle, broadcast and resolve once; returns ``(agents, changed)``.

    ``trace``, if given, is called as ``trace(round_no, message)`` for every
    broadcast message.
    """
    if not agents:
        return agents, False
    before = [a.snapshot() for a in agents]
    for a in agents:
        a.clock = 2 * round_no
        build_bundle(a)
    messages = [message(a) for a in agents]
    if trace is not None:
        for msg in messages:
            trace(round_no, msg)
    for a in agents:
        a.clock = 2 * round_no + 1
    (_deliver_pairwise if pairwise else _deliver_merged)(agents, messages)
    for a, snap in zip(agents, before):
        a.changed = a.snapshot() != snap
    return agents, any(a.changed for a in agents)


def default_max_rounds(n_tasks: int, n_agents: int) -> int:
    # one round beyond the bound is spent confirming nothing moves
    return n_tasks * n_agents + 1


def allocate_cbba(app: Application, capacities, w: Weights = DEFAULT_WEIGHTS, nb: NormBounds = DEFAULT_BOUNDS,
                  max_rounds: int | None = None, deadline: float | None = None, trace=None,
                  pairwise: bool = False) -> tuple[Allocation | Failure, NetworkStats]:
    """Run the auction to convergence and read the allocation off the agreed winners.

    ``trace`` is an optional text file; each broadcast message is appended to
    it as one JSON line.
    """
    caps = sorted(index_capacities(capacities).values(), key=lambda c: c.id)
    agents = [init_agent(cap, app, w, nb) for cap in caps]
    n = len(agents)
    emit = None
    if trace is not None:
        def emit(round_no, msg):
            trace.write(json.dumps({"application_id": app.id, "round": round_no, **msg.to_dict()}) + "\n")

    limit = max_rounds if max_rounds is not None else default_max_rounds(len(app), n)
    if limit < 1:
        raise ValueError("max_rounds must be >= 1")
    stats = NetworkStats()
    for r in range(1, limit + 1):
        run_round(agents, r, pairwise=pairwise, trace=emit)
        stats.rounds = r
        stats.messages_sent += n * (n - 1)
        if converged(agents):
            stats.converged = True
            return extract_allocation(agents, app, w, nb), stats
        if deadline is not None and time.perf_counter() > deadline:
            return Failure(Outcome.TIMED_OUT, app.id, detail=f"deadline hit after {r} rounds"), stats
    return Failure(Outcome.CONVERGENCE_TIMEOUT, app.id, detail=f"no convergence in {limit} rounds"), stats
