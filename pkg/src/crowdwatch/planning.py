"""Cluster-visit tour planning over a weighted complete directed graph.

Node 0 is the depot (the vehicle's start and end position); nodes 1..K are
clusters with barycenter coordinates and risk scores.  Each directed edge
costs ``alpha * priority + (1 - alpha) * energy`` where energy is the
Euclidean distance between the endpoints and priority penalizes moving from
a lower-risk to a higher-risk cluster, ``max(0, risk[j] - risk[i])``, with
every edge leaving the depot free of priority cost.  The depot's risk is 0,
so returning home is priority-free as well.

Four solvers minimize the closed-tour cost under the usual
visit-each-cluster-once constraints: exhaustive enumeration (small graphs
only), best-improvement 2-opt local search with exact directed move deltas,
a genetic algorithm with rank selection, ordered crossover, swap mutation
and two-elitism, and an ant colony with pheromone/visibility construction.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_left
from dataclasses import dataclass
from enum import Enum
from time import perf_counter
from typing import ClassVar, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .clustering import Cluster

#: Guard for visibilities and fitness values on zero-cost edges and tours.
ZERO_COST_GUARD = 1e-9

#: Largest graph (nodes including the depot) enumerated exhaustively.
DEFAULT_EXHAUSTIVE_CAP = 11


class SolverKind(str, Enum):
    EXHAUSTIVE = "exhaustive"
    TWO_OPT = "two-opt"
    GA = "ga"
    ACO = "aco"


@dataclass(frozen=True, eq=False)
class ClusterGraph:
    """Complete directed graph over the depot and cluster barycenters."""

    coords: np.ndarray          # (n, 2), row 0 is the depot
    risks: np.ndarray           # (n,), risks[0] == 0
    alpha: float
    costs: np.ndarray           # (n, n) combined edge costs
    energy_costs: np.ndarray    # (n, n) symmetric distances
    priority_costs: np.ndarray  # (n, n) asymmetric risk penalties

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @classmethod
    def from_nodes(cls, depot: tuple[float, float],
                   barycenters: Sequence[tuple[float, float]],
                   risks: Sequence[float], alpha: float) -> "ClusterGraph":
        if not barycenters:
            raise ValueError("graph needs at least one cluster besides the depot")
        if len(barycenters) != len(risks):
            raise ValueError("one risk score per cluster required")
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
        if not all(math.isfinite(c) for c in depot):
            raise ValueError("depot coordinates must be finite")

        coords = np.vstack([np.asarray(depot, dtype=float),
                            np.asarray(barycenters, dtype=float)])
        lam = np.concatenate([[0.0], np.asarray(risks, dtype=float)])

        diff = coords[:, None, :] - coords[None, :, :]
        energy = np.sqrt((diff ** 2).sum(axis=2))
        priority = np.maximum(0.0, lam[None, :] - lam[:, None])
        priority[0, :] = 0.0  # edges leaving the depot carry no priority cost
        np.fill_diagonal(priority, 0.0)

        costs = alpha * priority + (1.0 - alpha) * energy
        return cls(coords=coords, risks=lam, alpha=alpha, costs=costs,
                   energy_costs=energy, priority_costs=priority)


def build_graph(clusters: Sequence[Cluster], depot: tuple[float, float],
                alpha: float) -> ClusterGraph:
    """Graph over :class:`Cluster` records; cluster ids must be 1..K in order."""
    if not clusters:
        raise ValueError("cannot build a graph from zero clusters")
    ids = [c.id for c in clusters]
    if ids != list(range(1, len(clusters) + 1)):
        raise ValueError(f"cluster ids must be 1..{len(clusters)} in order, got {ids}")
    return ClusterGraph.from_nodes(depot,
                                   [c.barycenter for c in clusters],
                                   [c.risk for c in clusters], alpha)


@dataclass(frozen=True)
class Tour:
    """A closed route: depot -> order[0] -> ... -> order[-1] -> depot."""

    order: tuple[int, ...]
    total_cost: float
    solver: SolverKind
    wall_time: float


def _check_order(graph: ClusterGraph, order: Sequence[int]) -> list[int]:
    order = [int(v) for v in order]
    if sorted(order) != list(range(1, graph.n_nodes)):
        raise ValueError(f"order must visit clusters 1..{graph.n_nodes - 1} "
                         f"exactly once, got {order}")
    return order


def tour_cost(graph: ClusterGraph, order: Sequence[int]) -> float:
    """Sum of directed edge costs around the closed tour."""
    order = _check_order(graph, order)
    costs = graph.costs
    total = 0.0
    prev = 0
    for node in order:
        total += costs[prev, node]
        prev = node
    total += costs[prev, 0]
    return float(total)


def is_valid_order(graph: ClusterGraph, order: Sequence[int]) -> bool:
    """Single-tour constraint check: every cluster entered and left once."""
    try:
        _check_order(graph, order)
    except ValueError:
        return False
    return True


def _cost_rows(graph: ClusterGraph) -> list[list[float]]:
    # Nested lists index noticeably faster than numpy scalars in the solver
    # inner loops.
    return graph.costs.tolist()


def _closed_cost(rows: list[list[float]], order: Sequence[int]) -> float:
    total = 0.0
    prev = 0
    for node in order:
        total += rows[prev][node]
        prev = node
    total += rows[prev][0]
    return total


class TourSolver(BaseEstimator):
    """Shared driver: time the run, validate the result, package the Tour."""

    kind: ClassVar[SolverKind]

    def solve(self, graph: ClusterGraph) -> Tour:
        if graph.n_nodes < 2:
            raise ValueError("graph must contain the depot and at least one cluster")
        start = perf_counter()
        order = self._solve(graph)
        elapsed = perf_counter() - start
        return Tour(order=tuple(int(v) for v in order),
                    total_cost=tour_cost(graph, order),
                    solver=self.kind,
                    wall_time=elapsed)

    def _solve(self, graph: ClusterGraph) -> list[int]:
        raise NotImplementedError


class ExhaustiveSolver(TourSolver):
    """Global optimum by enumerating every visiting order.

    Factorial cost; refuses graphs larger than ``max_nodes`` and ties are
    broken toward the lexicographically smallest order.
    """

    kind = SolverKind.EXHAUSTIVE

    def __init__(self, max_nodes: int = DEFAULT_EXHAUSTIVE_CAP):
        self.max_nodes = max_nodes

    def _solve(self, graph: ClusterGraph) -> list[int]:
        n = graph.n_nodes
        if n > self.max_nodes:
            raise ValueError(
                f"exhaustive search is capped at {self.max_nodes} nodes "
                f"({n} requested); use a heuristic solver (two-opt, ga, aco)")
        rows = _cost_rows(graph)
        best_order: tuple[int, ...] | None = None
        best_cost = math.inf
        for perm in itertools.permutations(range(1, n)):
            cost = _closed_cost(rows, perm)
            if cost < best_cost:
                best_cost = cost
                best_order = perm
        assert best_order is not None
        return list(best_order)


class TwoOptSolver(TourSolver):
    """Best-improvement 2-opt from a seeded random starting tour.

    Each move reverses a segment of the visiting order.  Because the cost
    matrix is asymmetric the move delta accounts for every reversed interior
    edge, not just the two boundary edges; the search stops when no reversal
    strictly improves the directed tour cost.

    After ``solve``, ``initial_cost_`` holds the starting tour's cost and
    ``n_moves_`` the number of accepted reversals.
    """

    kind = SolverKind.TWO_OPT

    def __init__(self, seed: int | None = None, tol: float = 1e-12):
        self.seed = seed
        self.tol = tol

    def _solve(self, graph: ClusterGraph) -> list[int]:
        rng = np.random.default_rng(self.seed)
        rows = _cost_rows(graph)
        order = [int(v) for v in rng.permutation(np.arange(1, graph.n_nodes))]
        self.initial_cost_ = _closed_cost(rows, order)
        self.n_moves_ = 0
        k = len(order)
        if k < 2:
            return order

        while True:
            best_delta = -self.tol
            best_move: tuple[int, int] | None = None
            for i in range(k - 1):
                prev = order[i - 1] if i > 0 else 0
                for j in range(i + 1, k):
                    nxt = order[j + 1] if j + 1 < k else 0
                    a, b = order[i], order[j]
                    delta = (rows[prev][b] + rows[a][nxt]
                             - rows[prev][a] - rows[b][nxt])
                    for m in range(i, j):
                        u, v = order[m], order[m + 1]
                        delta += rows[v][u] - rows[u][v]
                    if delta < best_delta:
                        best_delta = delta
                        best_move = (i, j)
            if best_move is None:
                break
            i, j = best_move
            order[i:j + 1] = reversed(order[i:j + 1])
            self.n_moves_ += 1
        return order


def reversal_improves(graph: ClusterGraph, order: Sequence[int],
                      tol: float = 1e-12) -> bool:
    """True if any single segment reversal lowers the directed tour cost."""
    order = _check_order(graph, order)
    base = tour_cost(graph, order)
    k = len(order)
    for i in range(k - 1):
        for j in range(i + 1, k):
            candidate = order[:i] + order[i:j + 1][::-1] + order[j + 1:]
            if tour_cost(graph, candidate) < base - tol:
                return True
    return False


class GeneticSolver(TourSolver):
    """Permutation GA: rank selection, ordered crossover, swap mutation.

    Population defaults to twice the node count; the top two tours are
    carried over unchanged each generation, so the best cost never worsens.
    ``best_cost_history_`` records the best cost per generation.
    """

    kind = SolverKind.GA

    def __init__(self, population_size: int | None = None, generations: int = 500,
                 mutation_rate: float = 0.10, elite_count: int = 2,
                 seed: int | None = None):
        self.population_size = population_size
        self.generations = generations
        self.mutation_rate = mutation_rate
        self.elite_count = elite_count
        self.seed = seed

    def _params(self, n_nodes: int) -> tuple[int, int]:
        pop = self.population_size if self.population_size is not None else 2 * n_nodes
        if pop < 2:
            raise ValueError(f"population size must be at least 2, got {pop}")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError(f"mutation rate must lie in [0, 1], got {self.mutation_rate}")
        elite = min(self.elite_count, pop)
        return pop, elite

    @staticmethod
    def _ordered_crossover(pa: list[int], pb: list[int], cut1: int, cut2: int) -> list[int]:
        k = len(pa)
        child: list[int] = [0] * k
        used = [False] * (k + 2)
        for m in range(cut1, cut2 + 1):
            child[m] = pa[m]
            used[pa[m] - 1] = True
        fill = [g for g in pb[cut2 + 1:] + pb[:cut2 + 1] if not used[g - 1]]
        pos = (cut2 + 1) % k
        for g in fill:
            while cut1 <= pos <= cut2:
                pos = (pos + 1) % k
            child[pos] = g
            pos = (pos + 1) % k
        return child

    def _solve(self, graph: ClusterGraph) -> list[int]:
        rng = np.random.default_rng(self.seed)
        rows = _cost_rows(graph)
        k = graph.n_nodes - 1
        pop_size, elite_count = self._params(graph.n_nodes)

        population = [[int(v) for v in rng.permutation(np.arange(1, k + 1))]
                      for _ in range(pop_size)]
        self.best_cost_history_ = []

        # Linear rank weights: best individual gets pop_size, worst gets 1.
        rank_weights = np.arange(pop_size, 0, -1, dtype=float)
        cum_weights = np.cumsum(rank_weights)
        total_weight = float(cum_weights[-1])
        cum_weights = cum_weights.tolist()

        for _ in range(self.generations):
            costs = [_closed_cost(rows, ind) for ind in population]
            ranked = sorted(range(pop_size), key=lambda i: costs[i])
            self.best_cost_history_.append(costs[ranked[0]])

            next_population = [list(population[i]) for i in ranked[:elite_count]]
            while len(next_population) < pop_size:
                u1, u2 = rng.random(2)
                pa = population[ranked[bisect_left(cum_weights, u1 * total_weight)]]
                pb = population[ranked[bisect_left(cum_weights, u2 * total_weight)]]
                if k >= 2:
                    c1, c2 = sorted(rng.integers(0, k, size=2))
                    child = self._ordered_crossover(pa, pb, int(c1), int(c2))
                    if rng.random() < self.mutation_rate:
                        m1, m2 = rng.choice(k, size=2, replace=False)
                        child[m1], child[m2] = child[m2], child[m1]
                else:
                    child = list(pa)
                next_population.append(child)
            population = next_population

        costs = [_closed_cost(rows, ind) for ind in population]
        best = min(range(len(population)), key=lambda i: costs[i])
        self.best_cost_history_.append(costs[best])
        return population[best]


class AntColonySolver(TourSolver):
    """Ant-system construction with pheromone evaporation and deposit.

    Each iteration a colony of ants walks a Hamiltonian cycle from the
    depot, choosing the next node with probability proportional to
    ``pheromone^delta * visibility^beta`` where visibility is the inverse
    edge cost.  Pheromone then evaporates by ``rho`` and each ant deposits
    ``q / tour_cost`` on the directed edges it used.  Returns the best tour
    seen across all iterations.

    Colony size defaults to ``ceil((n_nodes - 1) / 2)``.  After ``solve``,
    ``pheromone_`` holds the final matrix and ``pheromone_min_`` the
    smallest value observed over all iterations.
    """

    kind = SolverKind.ACO

    def __init__(self, colony_size: int | None = None, delta: float = 1.0,
                 beta: float = 5.0, q: float = 10.0, rho: float = 0.5,
                 n_iterations: int = 200, seed: int | None = None):
        self.colony_size = colony_size
        self.delta = delta
        self.beta = beta
        self.q = q
        self.rho = rho
        self.n_iterations = n_iterations
        self.seed = seed

    def _solve(self, graph: ClusterGraph) -> list[int]:
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"evaporation coefficient must lie in (0, 1), got {self.rho}")
        n = graph.n_nodes
        s = self.colony_size if self.colony_size is not None else max(1, math.ceil((n - 1) / 2))
        rng = np.random.default_rng(self.seed)
        rows = _cost_rows(graph)

        visibility = 1.0 / np.maximum(graph.costs, ZERO_COST_GUARD)
        vis_beta = (visibility ** self.beta).tolist()
        tau = np.ones((n, n), dtype=float)
        self.pheromone_min_ = 1.0

        best_order: list[int] | None = None
        best_cost = math.inf
        nodes = list(range(1, n))

        for _ in range(self.n_iterations):
            tau_rows = tau.tolist()
            colony: list[tuple[list[int], float]] = []
            for _ant in range(s):
                unvisited = nodes.copy()
                order: list[int] = []
                current = 0
                while unvisited:
                    weights = []
                    acc = 0.0
                    t_row = tau_rows[current]
                    v_row = vis_beta[current]
                    for j in unvisited:
                        acc += (t_row[j] ** self.delta) * v_row[j]
                        weights.append(acc)
                    pick = rng.random() * acc
                    idx = bisect_left(weights, pick)
                    if idx >= len(unvisited):
                        idx = len(unvisited) - 1
                    current = unvisited.pop(idx)
                    order.append(current)
                cost = _closed_cost(rows, order)
                colony.append((order, cost))
                if cost < best_cost:
                    best_cost = cost
                    best_order = order

            tau *= (1.0 - self.rho)
            for order, cost in colony:
                deposit = self.q / max(cost, ZERO_COST_GUARD)
                prev = 0
                for node in order:
                    tau[prev, node] += deposit
                    prev = node
                tau[prev, 0] += deposit
            self.pheromone_min_ = min(self.pheromone_min_, float(tau.min()))

        self.pheromone_ = tau
        assert best_order is not None
        return best_order


SOLVERS: dict[str, type[TourSolver]] = {
    SolverKind.EXHAUSTIVE.value: ExhaustiveSolver,
    SolverKind.TWO_OPT.value: TwoOptSolver,
    SolverKind.GA.value: GeneticSolver,
    SolverKind.ACO.value: AntColonySolver,
}


def make_solver(name: str, seed: int | None = None,
                exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP, **overrides) -> TourSolver:
    """Instantiate a solver by CLI name, wiring the seed where it applies."""
    try:
        cls = SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {sorted(SOLVERS)}") from None
    if cls is ExhaustiveSolver:
        return cls(max_nodes=overrides.pop("max_nodes", exhaustive_cap), **overrides)
    return cls(seed=seed, **overrides)
