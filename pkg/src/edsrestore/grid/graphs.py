"""Pure graph checks shared by the consensus and MILP layers."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable

from .model import Network, NetworkState


def connected_components(nodes: Iterable[Hashable], edges: Iterable[tuple]) -> list[list]:
    """Partition ``nodes`` into maximal connected components.

    Components are sorted internally and ordered by their smallest member.
    Raises ``ValueError`` if an edge touches a node outside ``nodes``.
    """
    node_set = set(nodes)
    adj: dict = {n: [] for n in node_set}
    for a, b in edges:
        if a not in node_set or b not in node_set:
            missing = a if a not in node_set else b
            raise ValueError(f"edge ({a}, {b}) references unknown node {missing}")
        adj[a].append(b)
        adj[b].append(a)

    seen: set = set()
    comps = []
    for start in sorted(node_set):
        if start in seen:
            continue
        seen.add(start)
        comp = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for nb in adj[u]:
                if nb not in seen:
                    seen.add(nb)
                    comp.append(nb)
                    queue.append(nb)
        comps.append(sorted(comp))
    comps.sort(key=lambda c: c[0])
    return comps


@dataclass(frozen=True)
class RadialityReport:
    ok: bool
    clause: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def check_islands(on_buses: Iterable[int], on_edges: Iterable[tuple[int, int]],
                  sources: Iterable[int]) -> RadialityReport:
    """Forest-with-a-source check on an explicit energized subgraph.

    Clause (a): every energized edge has energized endpoints.
    Clause (b): the energized subgraph is acyclic.
    Clause (c): every tree touches an energized source bus.
    """
    buses = set(on_buses)
    edges = list(on_edges)
    for a, b in edges:
        if a not in buses or b not in buses:
            return RadialityReport(False, "a", f"feeder {a}-{b} energized with a dark endpoint")

    parent = {b: b for b in buses}

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            return RadialityReport(False, "b", f"feeder {a}-{b} closes a cycle")
        parent[ra] = rb

    fed = {find(s) for s in sources if s in buses}
    for b in sorted(buses):
        if find(b) not in fed:
            return RadialityReport(False, "c", f"island containing bus {b} has no DG/ES bus")
    return RadialityReport(True)


def is_radial_islanding(network: Network, state: NetworkState) -> RadialityReport:
    on_buses = [b for b in network.buses if state.v.get(b, 0) == 1]
    on_edges = [(f.i, f.j) for f in network.feeders if state.w.get(f.key, 0) == 1]
    return check_islands(on_buses, on_edges, network.source_buses)
