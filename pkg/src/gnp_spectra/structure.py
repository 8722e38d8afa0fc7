"""Checks of the structural facts about sparse G(n, p) on a concrete graph.

Short cycles and distance-two neighbourhoods are counted with sparse
products of the adjacency matrix, whose cost is bounded by the number of
wedges ``sum_v deg(v)^2``; a work budget turns accidental dense inputs into
an explicit error instead of an out-of-memory.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .degree_model import MIN_REGIME_N, DeltaP
from .graph_core import Graph, VertexSet, components

__all__ = [
    "DEFAULT_BUDGET",
    "BudgetExceededError",
    "StructureReport",
    "dist2_highdeg_counts",
    "high_degree_set",
    "lemma_checks",
    "short_cycle_membership",
    "structure_report",
    "x_threshold",
]

DEFAULT_BUDGET = 10**9


class BudgetExceededError(RuntimeError):
    pass


def x_threshold(n: int, p: float, dp: DeltaP) -> float:
    """Degree above which a vertex counts as high: np(1 + 1/ln ln n) + Delta_p^{1/3}."""
    return n * p * (1.0 + 1.0 / math.log(math.log(n))) + dp.cube_root


def high_degree_set(g: Graph, threshold: float) -> VertexSet:
    """Vertices with degree strictly larger than ``threshold``."""
    return VertexSet(g.degrees > threshold)


def _wedge_work(g: Graph) -> int:
    d = g.degrees
    return int(np.dot(d, d))


def _check_budget(g: Graph, budget: int) -> None:
    work = _wedge_work(g)
    if work > budget:
        raise BudgetExceededError(
            f"{work} neighbour-pair operations exceed the budget of {budget}; graph too dense"
        )


def _int_adjacency(g: Graph) -> sp.csr_matrix:
    data = np.ones(len(g.indices), dtype=np.int64)
    return sp.csr_matrix((data, g.indices, g.indptr), shape=(g.n, g.n))


def short_cycle_membership(g: Graph, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Per vertex, the number of distinct 3- and 4-cycles through it.

    With ``c(v, w)`` the number of common neighbours, ``v`` lies in
    ``sum_{u ~ v} c(u, v) / 2`` triangles and ``sum_{w != v} C(c(v, w), 2)``
    four-cycles (``w`` is the vertex opposite ``v``).
    """
    _check_budget(g, budget)
    if g.m == 0:
        return np.zeros(g.n, dtype=np.int64)
    a = _int_adjacency(g)
    common = (a @ a).tocsr()
    triangles = np.asarray(common.multiply(a).sum(axis=1)).ravel() // 2
    common.setdiag(0)
    common.eliminate_zeros()
    c = common.data
    rows = np.repeat(np.arange(g.n), np.diff(common.indptr))
    squares = np.bincount(rows, weights=c * (c - 1) // 2, minlength=g.n).astype(np.int64)
    return triangles.astype(np.int64) + squares


def dist2_highdeg_counts(
    g: Graph, deg_threshold: float, budget: int = DEFAULT_BUDGET
) -> np.ndarray:
    """Per vertex v, how many other vertices of degree >= ``deg_threshold`` lie within distance 2."""
    _check_budget(g, budget)
    high = np.flatnonzero(g.degrees >= deg_threshold)
    if len(high) == 0 or g.m == 0:
        return np.zeros(g.n, dtype=np.int64)
    a = _int_adjacency(g)
    to_high = a[:, high]
    reach = (to_high + a @ to_high).tocsr()
    reach.eliminate_zeros()
    rows = np.repeat(np.arange(g.n), np.diff(reach.indptr))
    other = high[reach.indices] != rows
    return np.bincount(rows[other], minlength=g.n).astype(np.int64)


@dataclass(frozen=True)
class StructureReport:
    forest: bool
    max_component_size: int
    short_cycle_violations: int | None
    x_neighbor_max: int
    dist2_highdeg_max: int | None
    thresholds: dict

    def to_dict(self) -> dict:
        return {
            "forest": self.forest,
            "max_component_size": self.max_component_size,
            "short_cycle_violations": self.short_cycle_violations,
            "x_neighbor_max": self.x_neighbor_max,
            "dist2_highdeg_max": self.dist2_highdeg_max,
            "thresholds": dict(self.thresholds),
        }


def structure_report(
    g: Graph, dp: DeltaP, budget: int = DEFAULT_BUDGET, wedge_checks: bool = True
) -> StructureReport:
    """Evaluate every structural quantity for ``g`` with thresholds from ``dp``.

    ``wedge_checks=False`` skips the two counts that need distance-two scans
    (they are then reported as ``None``).
    """
    if dp.n != g.n:
        raise ValueError(f"Delta_p computed for n={dp.n}, graph has n={g.n}")
    if g.n < MIN_REGIME_N:
        raise ValueError(f"structure report needs n >= {MIN_REGIME_N}")
    dv = float(dp.value)
    thresholds = {
        "x_degree": x_threshold(g.n, dp.p, dp),
        "delta_p_3_4": dv**0.75,
        "delta_p_7_8": dv**0.875,
        "delta_p_1_3": dp.cube_root,
    }
    lab = components(g)
    in_x = high_degree_set(g, thresholds["x_degree"]).mask.astype(np.int64)
    x_nbrs = _int_adjacency(g) @ in_x if g.m else np.zeros(g.n, dtype=np.int64)
    violations = dist2 = None
    if wedge_checks:
        violations = int(np.count_nonzero(short_cycle_membership(g, budget) >= 2))
        dist2 = int(dist2_highdeg_counts(g, thresholds["delta_p_3_4"], budget).max())
    return StructureReport(
        forest=g.m == g.n - lab.count,
        max_component_size=int(lab.sizes.max()),
        short_cycle_violations=violations,
        x_neighbor_max=int(x_nbrs.max()),
        dist2_highdeg_max=dist2,
        thresholds=thresholds,
    )


def lemma_checks(report: StructureReport) -> dict:
    """Boolean outcome of each structural statement on this sample."""
    t = report.thresholds
    return {
        "forest": report.forest,
        "short_cycle_clean": None
        if report.short_cycle_violations is None
        else report.short_cycle_violations == 0,
        "x_neighbors_below": report.x_neighbor_max < t["delta_p_7_8"],
        "dist2_highdeg_below": None
        if report.dist2_highdeg_max is None
        else report.dist2_highdeg_max < t["delta_p_1_3"],
    }
