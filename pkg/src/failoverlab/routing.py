"""Forwarding simulation: per-flow paths, loop/disconnect detection, loads.

Matrix rows are consumed with a forward-only cursor: a packet at the
current node delivers directly whenever the link to the destination is
alive, and otherwise advances the cursor past unusable entries (its own
source, the destination, the current node, or a dead link) to the next
backup hop. The cursor never rewinds, so an entry is tried at most once
per flow.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

from .schemes import FailoverMatrix, Flow, HopRule, NoNextHopError
from .topology import Link, Topology, make_link

Scheme = Union[FailoverMatrix, HopRule]


class Status(enum.Enum):
    DELIVERED = "delivered"
    LOOP = "loop"
    DISCONNECTED = "disconnected"


@dataclass(frozen=True)
class PathVerdict:
    """Outcome of routing one flow.

    ``path`` is the full walk: src..dst when delivered, the walk up to and
    including the first repeated node for a loop, and the walk ending at
    the stuck node when disconnected.
    """

    flow: Flow
    status: Status
    path: tuple[int, ...]

    @property
    def stuck_at(self) -> int:
        if self.status is not Status.DISCONNECTED:
            raise ValueError("stuck_at is defined for disconnected flows only")
        return self.path[-1]

    @property
    def hops(self) -> int:
        return len(self.path) - 1


def route_matrix_flow(
    matrix: FailoverMatrix, topo: Topology, flow: Flow
) -> PathVerdict:
    """Walk one flow through its backup row under the cursor semantics."""
    if matrix.n != topo.n:
        raise ValueError(f"matrix n={matrix.n} does not match topology n={topo.n}")
    row = matrix.row(flow)
    src, dst = flow
    current = src
    path = [src]
    visited = {src}
    pos = 0
    while True:
        if topo.alive(current, dst):
            path.append(dst)
            return PathVerdict(flow, Status.DELIVERED, tuple(path))
        hop: Optional[int] = None
        while pos < len(row):
            e = row[pos]
            pos += 1
            if e == src or e == dst or e == current:
                continue
            if not topo.alive(current, e):
                continue
            hop = e
            break
        if hop is None:
            return PathVerdict(flow, Status.DISCONNECTED, tuple(path))
        path.append(hop)
        if hop in visited:
            # Only malformed rows with duplicate entries can get here.
            return PathVerdict(flow, Status.LOOP, tuple(path))
        visited.add(hop)
        current = hop


def route_hoprule_flow(
    rule: HopRule, topo: Topology, flow: Flow, seed: int = 0
) -> PathVerdict:
    """Walk one flow under a stateless per-hop rule, watching for revisits."""
    src, dst = flow
    current = src
    path = [src]
    visited = {src}
    for _ in range(topo.n + 1):
        if topo.alive(current, dst):
            path.append(dst)
            return PathVerdict(flow, Status.DELIVERED, tuple(path))
        try:
            hop = rule.next_hop(current, dst, topo, seed)
        except NoNextHopError:
            return PathVerdict(flow, Status.DISCONNECTED, tuple(path))
        path.append(hop)
        if hop in visited:
            return PathVerdict(flow, Status.LOOP, tuple(path))
        visited.add(hop)
        current = hop
    # A simple path visits at most n nodes; exceeding it means a revisit
    # was somehow missed.
    raise AssertionError(f"walk exceeded {topo.n} hops without a verdict")


def route_flow(
    scheme: Scheme, topo: Topology, flow: Flow, seed: int = 0
) -> PathVerdict:
    if isinstance(scheme, FailoverMatrix):
        return route_matrix_flow(scheme, topo, flow)
    return route_hoprule_flow(scheme, topo, flow, seed)


@dataclass(frozen=True)
class SingleDest:
    """One unit of flow from every node to a fixed destination."""

    dst: int


@dataclass(frozen=True)
class AllToAll:
    """One unit of flow for every ordered node pair."""


Pattern = Union[SingleDest, AllToAll]


def pattern_flows(pattern: Pattern, n: int) -> list[Flow]:
    if isinstance(pattern, SingleDest):
        return [Flow(src, pattern.dst) for src in range(n) if src != pattern.dst]
    return [Flow(s, d) for s in range(n) for d in range(n) if s != d]


def _check_compatible(scheme: Scheme, pattern: Pattern) -> None:
    if not isinstance(scheme, FailoverMatrix):
        return
    if isinstance(pattern, AllToAll) and scheme.is_single_dest:
        raise ValueError("a single-destination matrix cannot serve all-to-all traffic")
    if isinstance(pattern, SingleDest) and scheme.is_single_dest:
        if scheme.dst != pattern.dst:
            raise ValueError(
                f"matrix destination {scheme.dst} does not match pattern "
                f"destination {pattern.dst}"
            )


@dataclass
class LoadReport:
    """Per-link flow counts over delivered paths, plus verdict tallies.

    Both directions of an undirected link accumulate onto one entry.
    ``per_node`` counts delivered flows that a node forwards in transit
    (interior of the path, endpoints excluded).
    """

    per_link: dict[Link, int] = field(default_factory=dict)
    per_node: dict[int, int] = field(default_factory=dict)
    loops: int = 0
    disconnected: int = 0
    delivered: int = 0

    @property
    def max_load(self) -> int:
        return max(self.per_link.values(), default=0)

    @property
    def max_node_load(self) -> int:
        return max(self.per_node.values(), default=0)

    def link_load(self, u: int, v: int) -> int:
        return self.per_link.get(make_link(u, v), 0)

    def node_load(self, v: int) -> int:
        return self.per_node.get(v, 0)

    def add_verdict(self, verdict: PathVerdict) -> None:
        if verdict.status is Status.LOOP:
            self.loops += 1
        elif verdict.status is Status.DISCONNECTED:
            self.disconnected += 1
        else:
            self.delivered += 1
            path = verdict.path
            for u, v in zip(path, path[1:]):
                link = make_link(u, v)
                self.per_link[link] = self.per_link.get(link, 0) + 1
            for v in path[1:-1]:
                self.per_node[v] = self.per_node.get(v, 0) + 1

    def to_csv(self) -> str:
        lines = ["link_a,link_b,load"]
        for (a, b), load in sorted(self.per_link.items()):
            lines.append(f"{a},{b},{load}")
        lines.append(
            f"summary,max_load={self.max_load},loops={self.loops},"
            f"disconnected={self.disconnected},delivered={self.delivered}"
        )
        return "\n".join(lines) + "\n"


def route_pattern(
    scheme: Scheme, topo: Topology, pattern: Pattern, seed: int = 0
) -> list[PathVerdict]:
    """Route every flow in the pattern independently."""
    _check_compatible(scheme, pattern)
    return [route_flow(scheme, topo, f, seed) for f in pattern_flows(pattern, topo.n)]


def evaluate(
    scheme: Scheme, topo: Topology, pattern: Pattern, seed: int = 0
) -> LoadReport:
    """Route the whole pattern and aggregate per-link loads."""
    report = LoadReport()
    for verdict in route_pattern(scheme, topo, pattern, seed):
        report.add_verdict(verdict)
    return report
