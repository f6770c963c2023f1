"""Failover scheme generators.

Matrix-form schemes map each flow to an ordered sequence of backup nodes:
the flow forwards directly to its destination when that link is alive and
otherwise walks the sequence. Two stateless per-hop rules (``bal`` and
``rob``) are provided for comparison; they pick the next hop from the
current node's identity alone and do not guarantee loop freedom.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Optional

from .topology import Topology

SCHEME_TAGS = ("RFS", "DFS", "Manual")

# Rerolling a permutation draw mixes the seed with this odd constant so
# successive attempts use unrelated generator states.
SEED_STRIDE = 0x9E3779B97F4A7C15


class Flow(NamedTuple):
    src: int
    dst: int


class NoNextHopError(RuntimeError):
    """A hop rule found no alive candidate link at the current node."""


@dataclass(frozen=True)
class FailoverMatrix:
    """Per-flow backup sequences.

    ``dst`` is the shared destination for single-destination matrices and
    ``None`` when the matrix carries one row per ordered node pair.
    """

    n: int
    dst: Optional[int]
    rows: Mapping[Flow, tuple[int, ...]]
    scheme: str = "Manual"
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.scheme not in SCHEME_TAGS:
            raise ValueError(f"unknown scheme tag {self.scheme!r}")
        if self.dst is not None and not 0 <= self.dst < self.n:
            raise ValueError(f"destination {self.dst} outside 0..{self.n - 1}")
        for flow, row in self.rows.items():
            if flow.src == flow.dst:
                raise ValueError(f"flow {flow} has identical endpoints")
            if self.dst is not None and flow.dst != self.dst:
                raise ValueError(f"row {flow} disagrees with dst={self.dst}")
            for e in row:
                if not 0 <= e < self.n:
                    raise ValueError(f"row {flow} entry {e} outside 0..{self.n - 1}")
            if flow.src in row:
                raise ValueError(f"row {flow} contains its own source")

    @property
    def is_single_dest(self) -> bool:
        return self.dst is not None

    def row(self, flow: Flow) -> tuple[int, ...]:
        try:
            return self.rows[flow]
        except KeyError:
            raise KeyError(f"matrix has no row for flow {flow}") from None

    def flows(self) -> list[Flow]:
        return sorted(self.rows)

    def to_text(self) -> str:
        mode = "allpairs" if self.dst is None else f"single:{self.dst}"
        seed = "none" if self.seed is None else str(self.seed)
        lines = [f"n={self.n} mode={mode} scheme={self.scheme} seed={seed}"]
        for flow in self.flows():
            key = str(flow.src) if self.is_single_dest else f"{flow.src},{flow.dst}"
            lines.append(f"{key}: " + " ".join(str(e) for e in self.rows[flow]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FailoverMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty matrix text")
        header = dict(item.split("=", 1) for item in lines[0].split())
        n = int(header["n"])
        mode = header["mode"]
        dst = None if mode == "allpairs" else int(mode.split(":", 1)[1])
        seed = None if header["seed"] == "none" else int(header["seed"])
        rows: dict[Flow, tuple[int, ...]] = {}
        for ln in lines[1:]:
            key, _, entries = ln.partition(":")
            if "," in key:
                src, row_dst = (int(x) for x in key.split(","))
            else:
                src, row_dst = int(key), dst
            if row_dst is None:
                raise ValueError(f"row {key!r} lacks a destination")
            rows[Flow(src, row_dst)] = tuple(int(e) for e in entries.split())
        return cls(n, dst, rows, header["scheme"], seed)


def _random_row(n: int, src: int, dst: int, rng: random.Random) -> tuple[int, ...]:
    pool = [v for v in range(n) if v != src and v != dst]
    rng.shuffle(pool)
    return tuple(pool)


def gen_rfs(n: int, dst: int, seed: int) -> FailoverMatrix:
    """Random failover scheme: each row is a uniform random permutation of
    the nodes other than the flow's endpoints. Deterministic in (n, dst, seed).
    """
    if n < 3:
        raise ValueError(f"need at least 3 nodes, got {n}")
    if not 0 <= dst < n:
        raise ValueError(f"destination {dst} outside 0..{n - 1}")
    rng = random.Random(seed)
    rows = {
        Flow(src, dst): _random_row(n, src, dst, rng)
        for src in range(n)
        if src != dst
    }
    return FailoverMatrix(n, dst, rows, "RFS", seed)


def gen_rfs_allpairs(n: int, seed: int) -> FailoverMatrix:
    """One random permutation row per ordered (src, dst) pair: n(n-1) rows.

    Rows are drawn in (src, dst) lexicographic order from a single seeded
    generator, so the full matrix replays exactly from the seed.
    """
    if n < 3:
        raise ValueError(f"need at least 3 nodes, got {n}")
    rng = random.Random(seed)
    rows = {
        Flow(src, dst): _random_row(n, src, dst, rng)
        for src in range(n)
        for dst in range(n)
        if src != dst
    }
    return FailoverMatrix(n, None, rows, "RFS", seed)


def dfs_row_length(n: int) -> int:
    return int(math.log2(n))


def gen_dfs(n: int, dst: int) -> FailoverMatrix:
    """Deterministic failover scheme for destination index n-1.

    Row for source index m holds (m + 2^k) mod n at position k, for
    k = 0..floor(log2 n)-1. Entries equal to the destination are stored
    as-is; the router skips them at forwarding time.
    """
    if n < 4:
        raise ValueError(f"need at least 4 nodes, got {n}")
    if dst != n - 1:
        raise ValueError(
            f"this scheme is defined for destination index {n - 1}, got {dst}"
        )
    length = dfs_row_length(n)
    rows = {
        Flow(m, dst): tuple((m + (1 << k)) % n for k in range(length))
        for m in range(n - 1)
    }
    return FailoverMatrix(n, dst, rows, "DFS")


@dataclass(frozen=True)
class VerifiedDraw:
    """A random matrix that passed an adversarial load check, with the
    number of rejected draws it took to find it."""

    matrix: FailoverMatrix
    redraws: int
    seed: int


class VerificationExhaustedError(RuntimeError):
    """No draw passed verification within the redraw cap.

    Carries the best (lowest adversarial load) matrix seen so far.
    """

    def __init__(self, message: str, best: FailoverMatrix, best_load: int):
        super().__init__(message)
        self.best = best
        self.best_load = best_load


def gen_rfs_verified(
    n: int,
    dst: int,
    seed: int,
    load_threshold: int,
    budget: Optional[int] = None,
    max_redraws: int = 64,
) -> VerifiedDraw:
    """Draw random matrices until one keeps the greedy attacker's load at or
    below ``load_threshold`` within ``budget`` failures.

    ``budget`` defaults to load_threshold**2, capped at the n-1 links that
    touch the destination. Draw k uses seed + k*SEED_STRIDE.
    """
    from .adversary import max_achievable_load

    if load_threshold < 1:
        raise ValueError("load threshold must be at least 1")
    if budget is None:
        budget = load_threshold * load_threshold
    budget = min(budget, n - 1)
    best: Optional[FailoverMatrix] = None
    best_load: Optional[int] = None
    for attempt in range(max_redraws + 1):
        draw_seed = (seed + attempt * SEED_STRIDE) % (1 << 64)
        matrix = gen_rfs(n, dst, draw_seed)
        load = max_achievable_load(matrix, dst, budget)
        if load <= load_threshold:
            return VerifiedDraw(matrix, attempt, draw_seed)
        if best_load is None or load < best_load:
            best, best_load = matrix, load
    assert best is not None and best_load is not None
    raise VerificationExhaustedError(
        f"no draw reached load <= {load_threshold} under budget {budget} "
        f"after {max_redraws + 1} attempts (best load {best_load})",
        best,
        best_load,
    )


def next_hop_bal(i: int, j: int, topo: Topology) -> int:
    """Deterministic balanced hop rule: start the candidate scan at
    (i+j+1) mod n when i > j, else at (i-j+1) mod n, and advance past
    failed links. The blocked neighbor j is the far end of a failed link
    at i. Candidates equal to i itself are skipped.
    """
    n = topo.n
    next_hop = (i + j + 1) % n if i > j else (i - j + 1) % n
    for _ in range(n):
        if next_hop != i and topo.alive(i, next_hop):
            return next_hop
        next_hop = (next_hop + 1) % n
    raise NoNextHopError(f"node {i} has no alive links")


def next_hop_rob(i: int, topo: Topology) -> int:
    """Lowest-identifier hop rule: first alive neighbor scanning
    (i+1), (i+2), ... mod n."""
    n = topo.n
    next_hop = (i + 1) % n
    for _ in range(n):
        if next_hop != i and topo.alive(i, next_hop):
            return next_hop
        next_hop = (next_hop + 1) % n
    raise NoNextHopError(f"node {i} has no alive links")


def next_hop_bal_random(i: int, j: int, topo: Topology, seed: int) -> int:
    """Randomized reading of the balanced rule: a uniform choice among the
    alive candidate ports, derived deterministically from (seed, node,
    blocked neighbor, local failure set) so runs replay exactly.
    """
    candidates = [u for u in topo.neighbors(i) if u != j]
    if not candidates:
        raise NoNextHopError(f"node {i} has no alive links besides {j}")
    local_failed = sorted(l for l in topo.failed if i in l)
    # String seeding is hashed stably (unlike tuple hashing, which varies
    # per process), so replays agree across runs and workers.
    rng = random.Random(f"{seed}:{i}:{j}:{local_failed}")
    return rng.choice(candidates)


class HopRule(enum.Enum):
    """Stateless per-hop failover rules."""

    BAL = "bal"
    ROB = "rob"
    BAL_RANDOM = "bal-random"

    def next_hop(self, node: int, dst: int, topo: Topology, seed: int = 0) -> int:
        if self is HopRule.BAL:
            return next_hop_bal(node, dst, topo)
        if self is HopRule.ROB:
            return next_hop_rob(node, topo)
        return next_hop_bal_random(node, dst, topo, seed)
