"""Failure-scenario generators: random failure models, constructive
adversaries that attack a scheme through route queries alone, and an
exhaustive brute-force oracle for small instances.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Optional, Sequence

from .routing import (
    AllToAll,
    LoadReport,
    Pattern,
    Scheme,
    SingleDest,
    Status,
    evaluate,
    route_flow,
)
from .schemes import FailoverMatrix, Flow
from .topology import (
    FailureScenario,
    Link,
    Topology,
    all_links,
    incident_links,
    make_link,
)


class ConstructionFailedError(RuntimeError):
    """A constructive adversary finished its full construction but the
    victim flow was still delivered. This should be impossible for any
    local failover scheme; treat it as a bug in the scheme under test or
    in the construction itself."""


class SearchSpaceTooLargeError(RuntimeError):
    """Brute-force enumeration would exceed the configured scenario cap."""


def check_budget(phi: int, n: int) -> None:
    if not 0 < phi < n:
        raise ValueError(f"failure budget must satisfy 0 < phi < n, got phi={phi}")


def adv_ran(n: int, phi: int, seed: int) -> FailureScenario:
    """phi distinct links drawn uniformly from all clique links."""
    links = all_links(n)
    if phi > len(links):
        raise ValueError(f"phi={phi} exceeds the {len(links)} links of a clique({n})")
    rng = random.Random(seed)
    chosen = rng.sample(links, phi)
    return FailureScenario(n, tuple(chosen), "Ran", seed)


def adv_ecl(n: int, phi: int, dst: int, seed: int) -> FailureScenario:
    """phi distinct links drawn uniformly from the n-1 links at the
    destination; at least one direct link must survive."""
    if phi > n - 2:
        raise ValueError(
            f"phi={phi} would isolate the destination; at most {n - 2} of its "
            f"{n - 1} links may fail"
        )
    rng = random.Random(seed)
    chosen = rng.sample(incident_links(n, dst), phi)
    return FailureScenario(n, tuple(chosen), "Ecl", seed)


def loop_forcer(scheme: Scheme, n: int, dst: int) -> FailureScenario:
    """Adaptive adversary that breaks the flow (node 0 -> dst) with at most
    n-1 failures while the surviving graph stays about n/2-connected.

    It repeatedly fails the current path's last link into the destination
    until the path has floor(n/2)-1 intermediate nodes, then cuts the last
    intermediate off from everything outside the path, leaving it only
    links that point backwards.
    """
    if dst == 0:
        raise ValueError("the victim flow runs from node 0; pick another dst")
    flow = Flow(0, dst)
    links: list[Link] = []
    failed: set[Link] = set()
    target = n // 2 - 1

    def scenario() -> FailureScenario:
        return FailureScenario(n, tuple(links), "LoopForcer")

    def fail(u: int, v: int) -> None:
        link = make_link(u, v, n)
        if link not in failed:
            failed.add(link)
            links.append(link)

    verdict = None
    for _ in range(n):
        verdict = route_flow(scheme, Topology(n, frozenset(failed)), flow)
        if verdict.status is not Status.DELIVERED:
            return scenario()
        if len(verdict.path) - 2 >= target:
            break
        fail(verdict.path[-2], dst)
    else:
        raise ConstructionFailedError(
            f"path to {dst} never accumulated {target} intermediate nodes"
        )

    assert verdict is not None
    v_k = verdict.path[-2]
    on_path = set(verdict.path[:-1])  # source and intermediates
    for u in range(n):
        if u != v_k and u not in on_path:
            fail(v_k, u)

    final = route_flow(scheme, Topology(n, frozenset(failed)), flow)
    if final.status is Status.DELIVERED:
        raise ConstructionFailedError(
            f"flow 0->{dst} was still delivered after the full construction "
            f"({len(links)} failures); this contradicts the impossibility bound"
        )
    return scenario()


@dataclass(frozen=True)
class AttackPlan:
    """A load attack: the node to overload, the rows redirected through it,
    and the failure set that does it.

    ``scenario.links`` are exactly the destination links of the chosen
    rows' sources plus the destination links of every distinct node that
    precedes the target inside a chosen row. ``achieved_load`` is measured
    by re-routing the whole traffic pattern under the scenario.
    """

    target_w: int
    chosen_rows: tuple[tuple[Flow, int], ...]  # (flow, strict prefix length)
    total_prefix_distinct: int
    scenario: FailureScenario
    achieved_load: int
    reached_target: bool

    def to_text(self) -> str:
        lines = [
            f"target_w={self.target_w}",
            f"achieved_load={self.achieved_load}",
            f"reached_target={str(self.reached_target).lower()}",
            f"total_prefix_distinct={self.total_prefix_distinct}",
            "rows:",
        ]
        for flow, k in self.chosen_rows:
            lines.append(f"{flow.src},{flow.dst} prefix_len={k}")
        lines.append("failures:")
        lines.append(self.scenario.to_text().rstrip("\n"))
        return "\n".join(lines) + "\n"


def _prefix_index(
    matrix: FailoverMatrix, dst: int
) -> dict[int, list[tuple[int, Flow, tuple[int, ...]]]]:
    """For every node w: the rows containing w, as (effective prefix length,
    flow, effective prefix) sorted by cheapest first. Entries equal to the
    destination are dropped, mirroring the router's skip rule."""
    index: dict[int, list[tuple[int, Flow, tuple[int, ...]]]] = {}
    for flow in matrix.flows():
        row = matrix.rows[flow]
        prefix: list[int] = []
        seen: set[int] = set()
        for e in row:
            if e == dst or e == flow.src or e in seen:
                continue
            index.setdefault(e, []).append((len(prefix), flow, tuple(prefix)))
            seen.add(e)
            prefix.append(e)
    for entries in index.values():
        entries.sort(key=lambda item: (item[0], item[1]))
    return index


def _greedy_rows_for_w(
    candidates: Sequence[tuple[int, Flow, tuple[int, ...]]],
    max_rows: Optional[int] = None,
    budget: Optional[int] = None,
) -> tuple[list[tuple[Flow, int]], set[int], int]:
    """Greedily pick rows minimizing the running number of distinct nodes
    whose destination links must fail. Returns (chosen rows, failed node
    set, total cost). Stops at max_rows, or when the cheapest addition
    would exceed the budget.
    """
    failed: set[int] = set()
    chosen: list[tuple[Flow, int]] = []
    taken: set[Flow] = set()
    while max_rows is None or len(chosen) < max_rows:
        best_key: Optional[tuple[int, int, int]] = None
        best: Optional[tuple[Flow, tuple[int, ...]]] = None
        for length, flow, prefix in candidates:
            if flow in taken:
                continue
            # Cheapest possible cost for this row even with full reuse;
            # the list is sorted by length, so later rows cost no less.
            if best_key is not None and length + 1 - len(failed) > best_key[0]:
                break
            need = {flow.src, *prefix} - failed
            key = (len(need), flow.src, flow.dst)
            if best_key is None or key < best_key:
                best_key, best = key, (flow, prefix)
        if best is None:
            break
        cost = best_key[0]
        if budget is not None and len(failed) + cost > budget:
            break
        flow, prefix = best
        failed.update(prefix)
        failed.add(flow.src)
        taken.add(flow)
        chosen.append((flow, len(prefix)))
    return chosen, failed, len(failed)


def _strict_prefix(
    row: Sequence[int], src: int, dst: int, w: int
) -> list[int]:
    """Entries of a row strictly before w, after routing-time skips."""
    prefix = []
    for e in row:
        if e == w:
            break
        if e != dst and e != src:
            prefix.append(e)
    return prefix


def _verify_plan(
    matrix: FailoverMatrix,
    dst: int,
    w: int,
    chosen: Sequence[tuple[Flow, int]],
    source: str,
) -> tuple[FailureScenario, int]:
    """Materialize the failure set of a greedy selection and measure the
    transit load it actually puts on w."""
    links: list[Link] = []
    seen: set[Link] = set()
    for flow, _ in chosen:
        nodes = [flow.src]
        nodes.extend(_strict_prefix(matrix.rows[flow], flow.src, dst, w))
        for p in nodes:
            link = make_link(p, dst, matrix.n)
            if link not in seen:
                seen.add(link)
                links.append(link)
    scenario = FailureScenario(matrix.n, tuple(links), source)
    topo = Topology.clique(matrix.n).with_failures(scenario)
    report = evaluate(matrix, topo, SingleDest(dst))
    return scenario, report.node_load(w)


def prefix_attack(
    matrix: FailoverMatrix, dst: int, target_load: int
) -> AttackPlan:
    """Pick the overload node w and the rows to redirect through it so
    that failing only destination links brings ``target_load`` flows to w
    as cheaply as the greedy selection manages.

    If no node appears in enough rows the best plan found is returned
    with ``reached_target`` false.
    """
    if not matrix.is_single_dest:
        raise ValueError("the prefix attack needs a single-destination matrix")
    if matrix.dst != dst:
        raise ValueError(f"matrix is for destination {matrix.dst}, not {dst}")
    if not 1 <= target_load <= matrix.n - 1:
        raise ValueError(f"target load must be in 1..{matrix.n - 1}")
    index = _prefix_index(matrix, dst)
    best: Optional[tuple[tuple[int, int, int], int, list[tuple[Flow, int]]]] = None
    for w in range(matrix.n):
        if w == dst:
            continue
        chosen, _, cost = _greedy_rows_for_w(
            index.get(w, ()), max_rows=target_load
        )
        # Rank: most rows first, then fewest failures, then smallest w.
        key = (-len(chosen), cost, w)
        if best is None or key < best[0]:
            best = (key, w, chosen)
    assert best is not None
    _, w, chosen = best
    scenario, achieved = _verify_plan(matrix, dst, w, chosen, "PrefixAttack")
    prefix_nodes = {
        e
        for flow, k in chosen
        for e in _strict_prefix(matrix.rows[flow], flow.src, dst, w)
    }
    return AttackPlan(
        target_w=w,
        chosen_rows=tuple(chosen),
        total_prefix_distinct=len(prefix_nodes),
        scenario=scenario,
        achieved_load=achieved,
        reached_target=len(chosen) >= target_load and achieved >= target_load,
    )


def max_achievable_load(matrix: FailoverMatrix, dst: int, budget: int) -> int:
    """Greedy lower bound on the worst transit load an adversary gets by
    failing at most ``budget`` destination links. Used to vet random draws.
    """
    if not matrix.is_single_dest or matrix.dst != dst:
        raise ValueError("need a single-destination matrix for this destination")
    if budget <= 0:
        return 0
    index = _prefix_index(matrix, dst)
    best: Optional[tuple[tuple[int, int, int], int, list[tuple[Flow, int]]]] = None
    for w in range(matrix.n):
        if w == dst:
            continue
        chosen, _, cost = _greedy_rows_for_w(index.get(w, ()), budget=budget)
        key = (-len(chosen), cost, w)
        if best is None or key < best[0]:
            best = (key, w, chosen)
    assert best is not None
    _, w, chosen = best
    if not chosen:
        return 0
    _, achieved = _verify_plan(matrix, dst, w, chosen, "PrefixAttack")
    return achieved


@dataclass(frozen=True)
class ChainAttackResult:
    """Outcome of the adaptive last-hop attack.

    ``completed`` is false when the victim flow looped or disconnected
    before the budget ran out (the scheme lost correctness first); the
    scenario then holds the failures applied up to that point.
    """

    scenario: FailureScenario
    budget: int
    rounds_completed: int
    final_status: Status

    @property
    def completed(self) -> bool:
        return self.rounds_completed == self.budget

    @property
    def broke_scheme(self) -> bool:
        return self.final_status is not Status.DELIVERED


def chain_attack(scheme: Scheme, n: int, dst: int, phi: int) -> ChainAttackResult:
    """Fail the last link of the victim flow's current path, phi times.

    Against a destination-based scheme every upstream node on the final
    path shares the same route, so the last link carries at least phi
    flows afterwards.
    """
    check_budget(phi, n)
    if dst == 0:
        raise ValueError("the victim flow runs from node 0; pick another dst")
    flow = Flow(0, dst)
    links: list[Link] = []
    failed: set[Link] = set()
    verdict = route_flow(scheme, Topology(n, frozenset(failed)), flow)
    rounds = 0
    while rounds < phi:
        if verdict.status is not Status.DELIVERED:
            break
        link = make_link(verdict.path[-2], dst, n)
        failed.add(link)
        links.append(link)
        rounds += 1
        verdict = route_flow(scheme, Topology(n, frozenset(failed)), flow)
    return ChainAttackResult(
        FailureScenario(n, tuple(links), "ChainAttack"),
        phi,
        rounds,
        verdict.status,
    )


def pigeonhole_attack(matrix: FailoverMatrix, phi: int) -> AttackPlan:
    """All-pairs attack: find the node most frequent in the first backup
    column and fail the direct link of phi rows that start with it; each
    failure marches one more flow through that node."""
    if matrix.is_single_dest:
        raise ValueError("the pigeonhole attack needs an all-pairs matrix")
    if not 0 < phi <= matrix.n - 1:
        raise ValueError(f"phi must be in 1..{matrix.n - 1}")
    counts: dict[int, int] = {}
    for flow in matrix.rows:
        first = matrix.rows[flow][0]
        counts[first] = counts.get(first, 0) + 1
    w = min(counts, key=lambda v: (-counts[v], v))
    chosen: list[tuple[Flow, int]] = []
    links: list[Link] = []
    seen: set[Link] = set()
    for flow in matrix.flows():
        if len(chosen) == phi:
            break
        if matrix.rows[flow][0] != w:
            continue
        link = make_link(flow.src, flow.dst, matrix.n)
        if link in seen:
            # The reverse pair shares this undirected link; its flow is
            # already redirected for free.
            continue
        seen.add(link)
        links.append(link)
        chosen.append((flow, 0))
    scenario = FailureScenario(matrix.n, tuple(links), "Pigeonhole")
    topo = Topology.clique(matrix.n).with_failures(scenario)
    report = evaluate(matrix, topo, AllToAll())
    return AttackPlan(
        target_w=w,
        chosen_rows=tuple(chosen),
        total_prefix_distinct=0,
        scenario=scenario,
        achieved_load=report.node_load(w),
        reached_target=len(chosen) == phi and report.node_load(w) >= phi,
    )


@dataclass(frozen=True)
class BruteForceResult:
    """Exhaustive worst case over every failure set up to the budget."""

    max_link_load: int
    max_link_scenario: FailureScenario
    max_link_report: LoadReport
    max_node_load: int
    max_node_scenario: FailureScenario
    min_break_budget: Optional[int]  # smallest size forcing a loop/disconnect
    scenarios_tested: int


def brute_force_worst_case(
    scheme: Scheme,
    n: int,
    dst: int,
    budget: int,
    restrict_to_dst_links: bool = True,
    cap: int = 10_000_000,
    pattern: Optional[Pattern] = None,
) -> BruteForceResult:
    """Try every failure set of size 0..budget and report the worst loads.

    The link-load winner is taken among scenarios that keep every flow
    delivered; node load is tracked across all scenarios. Refuses to run
    when the enumeration would exceed ``cap`` scenarios.
    """
    candidates = incident_links(n, dst) if restrict_to_dst_links else all_links(n)
    total = sum(comb(len(candidates), k) for k in range(budget + 1))
    if total > cap:
        raise SearchSpaceTooLargeError(
            f"{total} scenarios exceed the cap of {cap}; raise the cap or "
            f"shrink the budget"
        )
    if pattern is None:
        if isinstance(scheme, FailoverMatrix) and not scheme.is_single_dest:
            pattern = AllToAll()
        else:
            pattern = SingleDest(dst)
    best_link: Optional[tuple[int, FailureScenario, LoadReport]] = None
    best_node: Optional[tuple[int, FailureScenario]] = None
    min_break: Optional[int] = None
    tested = 0
    for k in range(budget + 1):
        for combo in combinations(candidates, k):
            tested += 1
            scenario = FailureScenario(n, combo, "BruteForce")
            topo = Topology(n, frozenset(combo))
            report = evaluate(scheme, topo, pattern)
            broken = report.loops + report.disconnected > 0
            if broken and min_break is None:
                min_break = k
            if not broken and (
                best_link is None or report.max_load > best_link[0]
            ):
                best_link = (report.max_load, scenario, report)
            if best_node is None or report.max_node_load > best_node[0]:
                best_node = (report.max_node_load, scenario)
    assert best_link is not None and best_node is not None
    return BruteForceResult(
        max_link_load=best_link[0],
        max_link_scenario=best_link[1],
        max_link_report=best_link[2],
        max_node_load=best_node[0],
        max_node_scenario=best_node[1],
        min_break_budget=min_break,
        scenarios_tested=tested,
    )
