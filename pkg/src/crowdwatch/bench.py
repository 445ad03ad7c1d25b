"""Seeded random instances and solver benchmark sweeps.

Instances place cluster barycenters uniformly in a square arena with the
depot at the origin.  Risk scores are drawn as a uniform integer cluster
size in [3, 12] plus a uniform violating-pair ratio in [0, 1), matching
the magnitudes the scoring rule produces on real frames, where distance
costs dwarf priority costs by roughly two orders of magnitude.

Every (instance, solver) run yields one row with the tour order, cost,
wall time, and a validity flag.  Instance and solver seeds derive from
the sweep seed, so a sweep is reproducible end to end.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .planning import (DEFAULT_EXHAUSTIVE_CAP, SOLVERS, ClusterGraph,
                       is_valid_order, make_solver)

ARENA_SIDE = 100.0
RISK_SIZE_LOW = 3
RISK_SIZE_HIGH = 12

CSV_FIELDS = ("instance_id", "n_clusters", "solver", "alpha", "cost",
              "wall_time_s", "valid", "order")


def random_instance(n_clusters: int, alpha: float,
                    rng: np.random.Generator,
                    arena: float = ARENA_SIDE) -> ClusterGraph:
    """One random planning instance with the depot at the origin."""
    if n_clusters < 1:
        raise ValueError(f"need at least one cluster, got {n_clusters}")
    barycenters = [tuple(p) for p in rng.uniform(0.0, arena, size=(n_clusters, 2))]
    risks = [float(rng.integers(RISK_SIZE_LOW, RISK_SIZE_HIGH + 1) + rng.random())
             for _ in range(n_clusters)]
    return ClusterGraph.from_nodes((0.0, 0.0), barycenters, risks, alpha)


@dataclass(frozen=True)
class BenchRow:
    """One solver run on one instance."""

    instance: int
    n_clusters: int
    alpha: float
    solver: str
    cost: float
    wall_time: float
    order: tuple[int, ...]
    valid: bool

    def as_csv_row(self) -> dict:
        return {
            "instance_id": self.instance,
            "n_clusters": self.n_clusters,
            "solver": self.solver,
            "alpha": self.alpha,
            "cost": repr(self.cost),
            "wall_time_s": repr(self.wall_time),
            "valid": int(self.valid),
            "order": " ".join(str(v) for v in self.order),
        }


def run_benchmark(sizes: Sequence[int], n_instances: int, alpha: float,
                  seed: int = 0, solvers: Iterable[str] = tuple(SOLVERS),
                  exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP,
                  arena: float = ARENA_SIDE) -> tuple[list[BenchRow], list[str]]:
    """Run each solver over seeded instances cycling through the sizes.

    Instance k has ``sizes[k % len(sizes)]`` clusters.  The exhaustive
    solver is skipped (with a notice) on instances larger than its cap;
    all other solvers run everywhere.  Returns the rows and the notices.
    """
    if n_instances < 1:
        raise ValueError(f"need at least one instance, got {n_instances}")
    if not sizes:
        raise ValueError("need at least one instance size")
    solver_names = list(solvers)
    for name in solver_names:
        if name not in SOLVERS:
            raise ValueError(f"unknown solver {name!r}; choose from {sorted(SOLVERS)}")

    rows: list[BenchRow] = []
    notices: list[str] = []
    for k in range(n_instances):
        n_clusters = int(sizes[k % len(sizes)])
        instance_rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
        graph = random_instance(n_clusters, alpha, instance_rng, arena=arena)
        for si, name in enumerate(solver_names):
            if name == "exhaustive" and graph.n_nodes > exhaustive_cap:
                notices.append(f"instance {k}: exhaustive skipped "
                               f"({n_clusters} clusters exceeds cap {exhaustive_cap - 1})")
                continue
            solver_seed = int(np.random.SeedSequence([seed, k, si]).generate_state(1)[0])
            solver = make_solver(name, seed=solver_seed, exhaustive_cap=exhaustive_cap)
            tour = solver.solve(graph)
            rows.append(BenchRow(instance=k, n_clusters=n_clusters, alpha=alpha,
                                 solver=name, cost=tour.total_cost,
                                 wall_time=tour.wall_time, order=tour.order,
                                 valid=is_valid_order(graph, tour.order)))
    return rows, notices


def write_csv(rows: Sequence[BenchRow], stream: TextIO) -> None:
    writer = csv.DictWriter(stream, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_csv_row())
