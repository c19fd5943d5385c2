"""Information discovery by synchronous average consensus.

Each available agent starts with its own indicator entry set to 1 and the
fields it measures locally.  Every round, an agent moves toward its
neighbours using Metropolis-Hastings weights; entries it has never seen are
taken as 0 the first time a neighbour mentions them.  At the fixed point all
members of a communication-connected part (CCP) hold the average of the
initial vectors, so ``1/indicator`` is the CCP size and ``size * entry`` is the
original value published by the entry's owner.
"""

from __future__ import annotations

import csv
import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

log = logging.getLogger(__name__)

Key = tuple[int, str]


@dataclass(frozen=True)
class CommGraph:
    """Agents with availability flags plus two-way links.

    Links touching an unavailable agent are kept but inert.
    """

    agents: Mapping[int, bool]
    links: frozenset = frozenset()

    def __post_init__(self):
        norm = set()
        for link in self.links:
            a, b = tuple(link)
            if a == b:
                raise ValueError(f"self-link on agent {a}")
            for end in (a, b):
                if end not in self.agents:
                    raise ValueError(f"link {a}-{b} references unknown agent {end}")
            norm.add(frozenset((a, b)))
        object.__setattr__(self, "links", frozenset(norm))

    @classmethod
    def build(cls, agents: Mapping[int, bool] | Iterable[int], links: Iterable[tuple[int, int]] = ()):
        if not isinstance(agents, Mapping):
            agents = {a: True for a in agents}
        return cls(dict(agents), frozenset(frozenset(l) for l in links))

    @property
    def available(self) -> list[int]:
        return sorted(a for a, ok in self.agents.items() if ok)

    def active_links(self) -> list[tuple[int, int]]:
        out = []
        for link in self.links:
            a, b = sorted(link)
            if self.agents[a] and self.agents[b]:
                out.append((a, b))
        return sorted(out)

    def neighbors(self) -> dict[int, list[int]]:
        nb: dict[int, list[int]] = {a: [] for a in self.available}
        for a, b in self.active_links():
            nb[a].append(b)
            nb[b].append(a)
        return {a: sorted(v) for a, v in nb.items()}

    def with_agent(self, agent: int, available: bool = True) -> "CommGraph":
        agents = dict(self.agents)
        agents[agent] = available
        return CommGraph(agents, self.links)

    def with_link(self, a: int, b: int) -> "CommGraph":
        return CommGraph(dict(self.agents), self.links | {frozenset((a, b))})


@dataclass
class AgentVector:
    entries: dict[Key, float] = field(default_factory=dict)
    indicator: dict[int, float] = field(default_factory=dict)

    @classmethod
    def initial(cls, agent: int, fields: Mapping[str, float] | None = None) -> "AgentVector":
        entries = {(agent, k): float(v) for k, v in (fields or {}).items()}
        return cls(entries, {agent: 1.0})


@dataclass(frozen=True)
class IdpConfig:
    tol: float = 1e-10
    k_max: int = 100_000
    iteration_latency: float = 1.0  # ms per round

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")


@dataclass(frozen=True)
class CcpView:
    members: frozenset
    agent_count: int
    global_state: Mapping[Key, float]
    rounds_used: int
    elapsed_ms: float

    def field(self, agent: int, name: str, default: float = 0.0) -> float:
        return self.global_state.get((agent, name), default)

    def fields_of(self, agent: int) -> dict[str, float]:
        return {k: v for (a, k), v in self.global_state.items() if a == agent}


@dataclass
class IdpRun:
    agents: list[int]
    views: dict[int, CcpView]
    rounds: int
    converged: bool
    trace: np.ndarray  # (rounds + 1, n_agents) of 1/indicator
    iteration_latency: float
    message: str = ""

    @property
    def elapsed_ms(self) -> float:
        return self.rounds * self.iteration_latency

    def ccps(self) -> list[list[int]]:
        """Distinct member sets, ordered by smallest member."""
        seen = {}
        for a in self.agents:
            m = self.views[a].members
            seen.setdefault(min(m), sorted(m))
        return [seen[k] for k in sorted(seen)]


class IdpNotConverged(RuntimeError):
    def __init__(self, run: IdpRun):
        super().__init__(run.message or "IDP did not converge")
        self.run = run


def metropolis_weights(graph: CommGraph) -> dict[tuple[int, int], float]:
    """Metropolis-Hastings weights keyed by (i, j); self weights under (i, i)."""
    nb = graph.neighbors()
    deg = {a: len(v) for a, v in nb.items()}
    a_ij: dict[tuple[int, int], float] = {}
    for i in sorted(nb):
        total = 0.0
        for j in nb[i]:
            w = 1.0 / (max(deg[i], deg[j]) + 1)
            a_ij[(i, j)] = w
            total += w
        a_ij[(i, i)] = 1.0 - total
    return a_ij


def consensus_step(vectors: Mapping[int, AgentVector],
                   weights: Mapping[tuple[int, int], float]) -> dict[int, AgentVector]:
    """One synchronous round of the neighbour-averaging update."""
    agents = sorted({i for i, _ in weights})
    if set(vectors) != set(agents):
        raise ValueError("vector agent set does not match the weight graph")
    nb: dict[int, list[int]] = {i: [] for i in agents}
    for (i, j) in weights:
        if i != j:
            nb[i].append(j)

    out = {}
    for i in agents:
        me = vectors[i]
        ent_keys = set(me.entries)
        ind_keys = set(me.indicator)
        for j in nb[i]:
            ent_keys |= vectors[j].entries.keys()
            ind_keys |= vectors[j].indicator.keys()
        entries = {}
        for key in sorted(ent_keys):
            x_i = me.entries.get(key, 0.0)
            acc = 0.0
            for j in sorted(nb[i]):
                acc += weights[(i, j)] * (vectors[j].entries.get(key, 0.0) - x_i)
            entries[key] = x_i + acc
        indicator = {}
        for key in sorted(ind_keys):
            x_i = me.indicator.get(key, 0.0)
            acc = 0.0
            for j in sorted(nb[i]):
                acc += weights[(i, j)] * (vectors[j].indicator.get(key, 0.0) - x_i)
            indicator[key] = x_i + acc
        out[i] = AgentVector(entries, indicator)
    return out


def _hop_distances(agents: list[int], nb: Mapping[int, list[int]]) -> dict[int, dict[int, int]]:
    dist = {}
    for s in agents:
        d = {s: 0}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in nb[u]:
                if v not in d:
                    d[v] = d[u] + 1
                    queue.append(v)
        dist[s] = d
    return dist


def run_idp(graph: CommGraph, local_states: Mapping[int, Mapping[str, float]],
            config: IdpConfig = IdpConfig(),
            integer_fields: Iterable[str] = ()) -> IdpRun:
    """Run synchronous consensus rounds until the largest per-entry change
    drops below ``config.tol`` or ``config.k_max`` rounds have elapsed.

    ``local_states`` maps each available agent to the fields it publishes.
    Fields named in ``integer_fields`` are rounded after reconstruction.
    Non-convergence is reported through ``IdpRun.converged``; callers that
    cannot continue should call :func:`require_converged`.
    """
    agents = graph.available
    n = len(agents)
    pos = {a: k for k, a in enumerate(agents)}
    nb = graph.neighbors()
    weights = metropolis_weights(graph)
    int_fields = set(integer_fields)

    keys: list[Key] = sorted({(a, f) for a in agents for f in local_states.get(a, {})})
    col = {k: n + c for c, k in enumerate(keys)}
    z = np.zeros((n, n + len(keys)))
    z[np.arange(n), np.arange(n)] = 1.0
    for (a, f), c in col.items():
        z[pos[a], c] = float(local_states[a][f])

    # Off-diagonal weights minus row sums, so z + lap @ z is the
    # difference-form update x_i + sum_j a_ij (x_j - x_i).
    lap = np.zeros((n, n))
    for i in agents:
        for j in nb[i]:
            lap[pos[i], pos[j]] = weights[(i, j)]
    lap[np.arange(n), np.arange(n)] = -lap.sum(axis=1)

    trace = [np.ones(n)]
    rounds = 0
    converged = False
    while rounds < config.k_max:
        new = z + lap @ z
        change = float(np.max(np.abs(new - z))) if z.size else 0.0
        z = new
        rounds += 1
        trace.append(1.0 / z[np.arange(n), np.arange(n)])
        if change < config.tol:
            converged = True
            break

    dist = _hop_distances(agents, nb)
    views: dict[int, CcpView] = {}
    message = "" if converged else f"no convergence within k_max={config.k_max} rounds"
    for a in agents:
        i = pos[a]
        own = z[i, i]
        est = 1.0 / own if own > 0 else float("inf")
        count = int(round(est)) if np.isfinite(est) else 0
        if not np.isfinite(est) or abs(est - count) >= 0.01 or count < 1:
            converged = False
            message = message or f"agent {a}: CCP size estimate {est:.6f} is not near an integer"
        members = frozenset(b for b, d in dist[a].items() if d <= rounds)
        state = {}
        for key, c in col.items():
            if key[0] in members:
                val = count * z[i, c]
                state[key] = float(round(val)) if key[1] in int_fields else float(val)
        views[a] = CcpView(members, count, state, rounds, rounds * config.iteration_latency)

    if not converged:
        log.warning("IDP: %s", message)
    return IdpRun(agents, views, rounds, converged, np.vstack(trace),
                  config.iteration_latency, message)


def require_converged(run: IdpRun) -> IdpRun:
    if not run.converged:
        raise IdpNotConverged(run)
    return run


def convergence_trace(run: IdpRun) -> dict[int, list[float]]:
    """Per-agent CCP-size estimate (1/indicator) for every round, round 0 included."""
    return {a: run.trace[:, k].tolist() for k, a in enumerate(run.agents)}


def write_trace_csv(run: IdpRun, path: str | Path) -> Path:
    return write_trace_rows(run.agents, run.trace, path)


def write_trace_rows(agents, trace: np.ndarray, path: str | Path) -> Path:
    """Long-format trace: one row per (round, agent) with 1/indicator."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["round", "agent_id", "inverse_indicator"])
        for k in range(trace.shape[0]):
            for c, a in enumerate(agents):
                wr.writerow([k, a, repr(float(trace[k, c]))])
    return path
