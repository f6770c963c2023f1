"""Sweep harness: failure-count grids, seeded trials, CSV emission.

Per-trial randomness derives from the config's base seed as
``trial_seed = base_seed ^ trial``; scheme generation uses the trial seed
directly and scenario sampling uses ``trial_seed ^ SCENARIO_SALT`` so the
two streams never alias. Identical configs therefore reproduce identical
records byte for byte, and trials can run on any number of workers.
"""

from __future__ import annotations

import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from . import adversary as adv
from .routing import AllToAll, LoadReport, Pattern, Scheme, SingleDest, evaluate
from .schemes import FailoverMatrix, HopRule, gen_dfs, gen_rfs, gen_rfs_allpairs
from .topology import FailureScenario, Topology

SCENARIO_SALT = 0x5DEECE66D

SCHEME_NAMES = ("rfs", "dfs", "bal", "rob", "rfs-allpairs")
ADVERSARY_NAMES = ("ran", "ecl", "prefix", "chain", "loop-forcer")
PATTERN_NAMES = ("single", "all")

RECORD_FIELDS = (
    "scheme",
    "adversary",
    "pattern",
    "n",
    "num_failures",
    "trial",
    "seed",
    "max_load",
    "loops",
    "disconnected",
)


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    scheme: str
    adversary: str
    pattern: str
    failure_grid: tuple[int, ...]
    trials: int
    base_seed: int
    dst: Optional[int] = None  # defaults to n-1

    def __post_init__(self) -> None:
        if self.scheme not in SCHEME_NAMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.adversary not in ADVERSARY_NAMES:
            raise ValueError(f"unknown adversary {self.adversary!r}")
        if self.pattern not in PATTERN_NAMES:
            raise ValueError(f"unknown pattern {self.pattern!r}")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if list(self.failure_grid) != sorted(self.failure_grid):
            raise ValueError("failure grid must be ascending")
        if self.pattern == "all" and self.scheme in ("rfs", "dfs"):
            raise ValueError(
                f"{self.scheme} serves a single destination; use rfs-allpairs "
                f"or a hop rule for all-to-all traffic"
            )
        if self.scheme == "dfs" and self.resolved_dst != self.n - 1:
            raise ValueError("dfs requires the destination index n-1")
        if self.adversary == "prefix" and self.scheme in ("bal", "rob"):
            raise ValueError("the prefix adversary needs a matrix scheme")

    @property
    def resolved_dst(self) -> int:
        return self.n - 1 if self.dst is None else self.dst

    def to_file(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_text())

    def to_text(self) -> str:
        lines = [
            f"n={self.n}",
            f"scheme={self.scheme}",
            f"adversary={self.adversary}",
            f"pattern={self.pattern}",
            "failure_grid=" + ",".join(str(phi) for phi in self.failure_grid),
            f"trials={self.trials}",
            f"base_seed={self.base_seed}",
        ]
        if self.dst is not None:
            lines.append(f"dst={self.dst}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        fields: dict[str, str] = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
        try:
            return cls(
                n=int(fields["n"]),
                scheme=fields["scheme"],
                adversary=fields["adversary"],
                pattern=fields["pattern"],
                failure_grid=tuple(
                    int(x) for x in fields["failure_grid"].split(",") if x
                ),
                trials=int(fields["trials"]),
                base_seed=int(fields["base_seed"]),
                dst=int(fields["dst"]) if "dst" in fields else None,
            )
        except KeyError as missing:
            raise ValueError(f"config is missing the {missing} key") from None

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True)
class TrialRecord:
    scheme: str
    adversary: str
    pattern: str
    n: int
    num_failures: int
    trial: int
    seed: int
    max_load: int
    loops: int
    disconnected: int
    wall_time: float

    def csv_row(self) -> str:
        return ",".join(
            str(getattr(self, field)) for field in RECORD_FIELDS
        )


def trial_seed(base_seed: int, trial: int) -> int:
    return base_seed ^ trial


def scenario_seed(base_seed: int, trial: int) -> int:
    return trial_seed(base_seed, trial) ^ SCENARIO_SALT


def _build_scheme(cfg: ExperimentConfig, seed: int) -> Scheme:
    if cfg.scheme == "rfs":
        return gen_rfs(cfg.n, cfg.resolved_dst, seed)
    if cfg.scheme == "dfs":
        return gen_dfs(cfg.n, cfg.n - 1)
    if cfg.scheme == "rfs-allpairs":
        return gen_rfs_allpairs(cfg.n, seed)
    return HopRule.BAL if cfg.scheme == "bal" else HopRule.ROB


def _draw_scenario(
    cfg: ExperimentConfig, scheme: Scheme, phi: int, seed: int
) -> FailureScenario:
    dst = cfg.resolved_dst
    if cfg.adversary == "ran":
        return adv.adv_ran(cfg.n, phi, seed)
    if cfg.adversary == "ecl":
        return adv.adv_ecl(cfg.n, phi, dst, seed)
    if cfg.adversary == "chain":
        return adv.chain_attack(scheme, cfg.n, dst, phi).scenario
    if cfg.adversary == "prefix":
        if not isinstance(scheme, FailoverMatrix):
            raise ValueError("the prefix adversary needs a matrix scheme")
        # The grid value is the target load, not a link budget.
        return adv.prefix_attack(scheme, dst, phi).scenario
    return adv.loop_forcer(scheme, cfg.n, dst)  # grid value ignored


def run_trial(cfg: ExperimentConfig, phi: int, trial: int) -> TrialRecord:
    started = time.perf_counter()
    seed = trial_seed(cfg.base_seed, trial)
    scheme = _build_scheme(cfg, seed)
    scenario = _draw_scenario(cfg, scheme, phi, scenario_seed(cfg.base_seed, trial))
    topo = Topology.clique(cfg.n).with_failures(scenario)
    pattern: Pattern = (
        SingleDest(cfg.resolved_dst) if cfg.pattern == "single" else AllToAll()
    )
    report = evaluate(scheme, topo, pattern)
    return TrialRecord(
        scheme=cfg.scheme,
        adversary=cfg.adversary,
        pattern=cfg.pattern,
        n=cfg.n,
        num_failures=len(scenario.links),
        trial=trial,
        seed=seed,
        max_load=report.max_load,
        loops=report.loops,
        disconnected=report.disconnected,
        wall_time=time.perf_counter() - started,
    )


def _run_trial_task(args: tuple[ExperimentConfig, int, int]) -> TrialRecord:
    return run_trial(*args)


def run_sweep(cfg: ExperimentConfig, jobs: int = 1) -> list[TrialRecord]:
    """All (failure count, trial) cells, emitted in grid-then-trial order.

    Trials are independent; parallel runs return records in the same order
    because results are collected in task order.
    """
    tasks = [
        (cfg, phi, trial)
        for phi in cfg.failure_grid
        for trial in range(cfg.trials)
    ]
    if jobs <= 1:
        return [run_trial(cfg, phi, trial) for _, phi, trial in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_trial_task, tasks))


def records_to_csv(records: Sequence[TrialRecord]) -> str:
    lines = [",".join(RECORD_FIELDS)]
    lines.extend(r.csv_row() for r in records)
    return "\n".join(lines) + "\n"


def load_histogram(report: LoadReport, buckets: int = 1) -> dict[int, int]:
    """Counts of loaded links per load value.

    ``buckets`` is the bucket width; a key is its bucket's smallest load.
    Links carrying no flow are not counted, so the counts sum to the
    number of loaded links.
    """
    if buckets < 1:
        raise ValueError("bucket width must be at least 1")
    hist: dict[int, int] = {}
    for load in report.per_link.values():
        if load <= 0:
            continue
        key = ((load - 1) // buckets) * buckets + 1
        hist[key] = hist.get(key, 0) + 1
    return hist


def histogram_to_csv(hist: dict[int, int]) -> str:
    lines = ["load,link_count"]
    lines.extend(f"{load},{count}" for load, count in sorted(hist.items()))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SummaryRow:
    scheme: str
    adversary: str
    n: int
    num_failures: int
    min: int
    q1: float
    median: float
    q3: float
    max: int
    loop_rate: float
    disc_rate: float


def _flows_per_trial(pattern: str, n: int) -> int:
    return n - 1 if pattern == "single" else n * (n - 1)


def summarize(records: Sequence[TrialRecord]) -> list[SummaryRow]:
    """Quartile table of max load per (scheme, adversary, n, failure count),
    plus loop/disconnect rates as a fraction of routed flows."""
    if not records:
        raise ValueError("no records to summarize")
    groups: dict[tuple[str, str, int, int], list[TrialRecord]] = {}
    for r in records:
        groups.setdefault((r.scheme, r.adversary, r.n, r.num_failures), []).append(r)
    rows = []
    for (scheme, adversary, n, phi), recs in sorted(groups.items()):
        loads = sorted(r.max_load for r in recs)
        if len(loads) == 1:
            q1 = median = q3 = float(loads[0])
        else:
            q1, median, q3 = statistics.quantiles(loads, n=4, method="inclusive")
        flows = sum(_flows_per_trial(r.pattern, r.n) for r in recs)
        rows.append(
            SummaryRow(
                scheme=scheme,
                adversary=adversary,
                n=n,
                num_failures=phi,
                min=loads[0],
                q1=q1,
                median=median,
                q3=q3,
                max=loads[-1],
                loop_rate=sum(r.loops for r in recs) / flows,
                disc_rate=sum(r.disconnected for r in recs) / flows,
            )
        )
    return rows


def summary_to_csv(rows: Sequence[SummaryRow]) -> str:
    lines = ["scheme,adversary,n,num_failures,min,q1,median,q3,max,loop_rate,disc_rate"]
    for r in rows:
        lines.append(
            f"{r.scheme},{r.adversary},{r.n},{r.num_failures},{r.min},"
            f"{r.q1},{r.median},{r.q3},{r.max},{r.loop_rate},{r.disc_rate}"
        )
    return "\n".join(lines) + "\n"
