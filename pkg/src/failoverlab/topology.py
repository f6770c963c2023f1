"""Clique substrate, failure scenarios, and exact connectivity queries.

Nodes are integers 0..n-1. Links are undirected and stored as canonically
ordered pairs (a, b) with a < b; failing a link kills both directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

Link = tuple[int, int]

SCENARIO_SOURCES = (
    "Ran",
    "Ecl",
    "LoopForcer",
    "PrefixAttack",
    "ChainAttack",
    "Pigeonhole",
    "Manual",
    "BruteForce",
)


def make_link(a: int, b: int, n: Optional[int] = None) -> Link:
    """Canonical undirected link (smaller endpoint first)."""
    if a == b:
        raise ValueError(f"self-link ({a},{b}) is not a valid clique edge")
    if n is not None and not (0 <= a < n and 0 <= b < n):
        raise ValueError(f"link ({a},{b}) has an endpoint outside 0..{n - 1}")
    return (a, b) if a < b else (b, a)


def all_links(n: int) -> list[Link]:
    """All n(n-1)/2 clique links in lexicographic order."""
    return [(a, b) for a in range(n) for b in range(a + 1, n)]


def incident_links(n: int, v: int) -> list[Link]:
    """All n-1 clique links touching node v."""
    return [make_link(v, u) for u in range(n) if u != v]


@dataclass(frozen=True)
class FailureScenario:
    """An ordered set of failed links, with provenance for replay.

    The insertion order of ``links`` is preserved so adaptive adversaries
    (which fail links reactively) can be replayed step by step.
    """

    n: int
    links: tuple[Link, ...]
    source: str = "Manual"
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.source not in SCENARIO_SOURCES:
            raise ValueError(f"unknown scenario source tag {self.source!r}")
        seen: set[Link] = set()
        for a, b in self.links:
            link = make_link(a, b, self.n)
            if link != (a, b):
                raise ValueError(f"link ({a},{b}) is not canonically ordered")
            if link in seen:
                raise ValueError(f"duplicate link ({a},{b}) in scenario")
            seen.add(link)

    @property
    def phi(self) -> int:
        """Failure budget actually used: the number of failed links."""
        return len(self.links)

    @classmethod
    def manual(
        cls,
        n: int,
        links: Iterable[tuple[int, int]],
        source: str = "Manual",
        seed: Optional[int] = None,
    ) -> "FailureScenario":
        """Build a scenario from unordered pairs, canonicalizing each link."""
        return cls(n, tuple(make_link(a, b, n) for a, b in links), source, seed)

    def to_text(self) -> str:
        seed = "none" if self.seed is None else str(self.seed)
        lines = [f"n={self.n} source={self.source} seed={seed}"]
        lines.extend(f"{a} {b}" for a, b in self.links)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FailureScenario":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty scenario text")
        header = dict(item.split("=", 1) for item in lines[0].split())
        n = int(header["n"])
        seed = None if header["seed"] == "none" else int(header["seed"])
        links = []
        for ln in lines[1:]:
            a, b = ln.split()
            links.append((int(a), int(b)))
        return cls(n, tuple(links), header["source"], seed)


@dataclass(frozen=True)
class Topology:
    """A clique on n nodes minus a set of failed links. Immutable."""

    n: int
    failed: frozenset[Link] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError(f"clique size must be at least 3, got {self.n}")
        for a, b in self.failed:
            make_link(a, b, self.n)

    @classmethod
    def clique(cls, n: int) -> "Topology":
        """Full mesh on n nodes with no failures."""
        return cls(n)

    def alive(self, u: int, v: int) -> bool:
        """True if the link between u and v survives."""
        return make_link(u, v, self.n) not in self.failed

    def with_failures(self, scenario: FailureScenario) -> "Topology":
        """New topology with the scenario's links failed in addition."""
        if scenario.n != self.n:
            raise ValueError(
                f"scenario is for n={scenario.n}, topology has n={self.n}"
            )
        return Topology(self.n, self.failed | set(scenario.links))

    def incident_links(self, v: int) -> list[Link]:
        """Alive links at node v."""
        return [
            make_link(v, u)
            for u in range(self.n)
            if u != v and self.alive(v, u)
        ]

    def degree(self, v: int) -> int:
        return len(self.incident_links(v))

    def neighbors(self, v: int) -> list[int]:
        return [u for u in range(self.n) if u != v and self.alive(v, u)]

    def _flow_graph(self) -> csr_matrix:
        # Each undirected link becomes two unit-capacity arcs, so a max flow
        # equals the edge-disjoint path count between its endpoints.
        mat = np.ones((self.n, self.n), dtype=np.int32)
        np.fill_diagonal(mat, 0)
        for a, b in self.failed:
            mat[a, b] = 0
            mat[b, a] = 0
        return csr_matrix(mat)

    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in self.neighbors(u):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n

    def mincut(self) -> int:
        """Exact global minimum edge cut of the surviving graph (0 if split).

        The global cut separates node 0 from some other node, so it is the
        minimum over all s-t max flows with s fixed at 0.
        """
        if not self.is_connected():
            return 0
        graph = self._flow_graph()
        return min(
            int(maximum_flow(graph, 0, v).flow_value) for v in range(1, self.n)
        )

    def disjoint_paths(self, src: int, dst: int) -> int:
        """Maximum number of edge-disjoint src-dst paths (unit-capacity flow)."""
        if src == dst:
            raise ValueError("src and dst must differ")
        make_link(src, dst, self.n)
        return int(maximum_flow(self._flow_graph(), src, dst).flow_value)


def build_clique(n: int) -> Topology:
    """Full mesh on n nodes; every node has degree n-1."""
    return Topology.clique(n)


def apply_failures(topo: Topology, scenario: FailureScenario) -> Topology:
    """Union the scenario's failures into a new topology (inputs unchanged)."""
    return topo.with_failures(scenario)
