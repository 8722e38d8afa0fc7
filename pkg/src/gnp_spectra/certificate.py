"""Unconditional upper-bound certificates for lambda_1.

:func:`certify` splits a graph along the high-degree vertex sets of the
matching edge-probability regime, bounds each piece with an elementary
spectral inequality and combines the pieces: by summation over an edge
partition, by maximum over vertex-disjoint parts.

The structural facts that make each piece small hold only almost surely.  A
piece whose expected structure is missing on the actual graph (say, a part
that should be a forest but has a cycle) is bounded by a weaker rule that is
always valid, and the term is flagged; the total is a sound upper bound for
every input graph.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .degree_model import DENSE, MIDDLE, VERY_SPARSE, DeltaP, Regime, classify_regime
from .eigen import SpectralResult
from .graph_core import (
    Graph,
    VertexSet,
    bipartite_components,
    components,
    edge_subgraph,
    is_bipartite,
    is_forest,
)
from .structure import x_threshold

__all__ = [
    "BIPARTITE_PRODUCT",
    "EXACT_SMALL",
    "FOREST",
    "MAX_DEGREE",
    "STAR",
    "TRACE",
    "AssumptionError",
    "BoundTerm",
    "Certificate",
    "bound_bipartite",
    "bound_forest",
    "bound_max_degree",
    "bound_star",
    "bound_trace",
    "certificate_gap",
    "certify",
]

MAX_DEGREE = "MAX_DEGREE"
FOREST = "FOREST"
TRACE = "TRACE"
BIPARTITE_PRODUCT = "BIPARTITE_PRODUCT"
STAR = "STAR"
EXACT_SMALL = "EXACT_SMALL"

GAP_EPS = 1e-12


class AssumptionError(ValueError):
    """A bound's structural precondition fails on the given graph."""


@dataclass(frozen=True)
class BoundTerm:
    label: str
    rule: str
    value: float
    assumptions_held: bool
    fallback_used: bool

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "rule": self.rule,
            "value": self.value,
            "assumptions_held": self.assumptions_held,
            "fallback_used": self.fallback_used,
        }


@dataclass
class Certificate:
    regime: Regime
    terms: list[BoundTerm]
    combination: str
    upper_bound: float
    lower_bound: float
    all_assumptions_held: bool
    n: int
    # labelled edge-disjoint pieces (DENSE / MIDDLE only), on the original ids
    parts: dict[str, Graph] = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.tag,
            "terms": [t.to_dict() for t in self.terms],
            "upper_bound": self.upper_bound,
            "lower_bound": self.lower_bound,
            "all_assumptions_held": self.all_assumptions_held,
        }

    def term(self, label: str) -> BoundTerm:
        for t in self.terms:
            if t.label == label:
                return t
        raise KeyError(label)


# --------------------------------------------------------------------------
# bound library


def bound_max_degree(g: Graph) -> float:
    """lambda_1 <= max degree."""
    return float(g.max_degree)


def bound_trace(g: Graph) -> float:
    """From tr(A^2) = 2m: lambda_1 <= sqrt(2m), or sqrt(m) when bipartite.

    A bipartite spectrum is symmetric, so 2 lambda_1^2 <= tr(A^2).
    """
    return math.sqrt(g.m) if is_bipartite(g) else math.sqrt(2 * g.m)


def bound_forest(g: Graph) -> float:
    """For a forest: min(2 sqrt(max_deg - 1), sqrt(n' - 1)), n' = non-isolated vertices.

    The formula needs max degree >= 2; a matching (max degree 1) has
    lambda_1 = 1 exactly and an edgeless graph 0, which is returned instead.
    """
    if not is_forest(g):
        raise AssumptionError("graph has a cycle")
    d = g.max_degree
    if d <= 1:
        return float(d)
    touched = int(np.count_nonzero(g.degrees))
    return min(2.0 * math.sqrt(d - 1), math.sqrt(touched - 1))


def bound_bipartite(g: Graph, side: VertexSet) -> float:
    """sqrt(D1 * D2) for a bipartite graph whose sides have max degrees D1, D2."""
    if side.n != g.n:
        raise ValueError("vertex set and graph sizes differ")
    e = g.edges()
    if len(e) and np.any(side.mask[e[:, 0]] == side.mask[e[:, 1]]):
        raise AssumptionError("an edge does not cross the given bipartition")
    deg = g.degrees
    d1 = int(deg[side.mask].max(initial=0))
    d2 = int(deg[~side.mask].max(initial=0))
    return math.sqrt(d1 * d2)


def _is_star_forest(g: Graph) -> bool:
    if not is_forest(g):
        return False
    e = g.edges()
    deg = g.degrees
    return bool(np.all((deg[e[:, 0]] == 1) | (deg[e[:, 1]] == 1)))


def bound_star(g: Graph) -> float:
    """A disjoint union of stars has lambda_1 = sqrt(max degree) exactly."""
    if not _is_star_forest(g):
        raise AssumptionError("graph is not a disjoint union of stars")
    return math.sqrt(g.max_degree)


# --------------------------------------------------------------------------
# certificate assembly


def _fallback_term(label: str, part: Graph) -> BoundTerm:
    md, tr = bound_max_degree(part), bound_trace(part)
    rule, value = (MAX_DEGREE, md) if md <= tr else (TRACE, tr)
    return BoundTerm(label, rule, value, False, True)


def _term(label: str, part: Graph, rule: str, bound, expected: bool = True) -> BoundTerm:
    """Apply ``bound``; if its precondition fails, fall back to min(MAX_DEGREE, TRACE).

    ``expected`` records whether the remaining structural prediction for
    this piece (typically a degree cap) held on the sample.
    """
    try:
        value = bound(part)
    except AssumptionError:
        return _fallback_term(label, part)
    return BoundTerm(label, rule, float(value), bool(expected), False)


def _star_or_forest_term(label: str, part: Graph) -> BoundTerm:
    """STAR when the part is a star forest, else FOREST, else the fallback."""
    if _is_star_forest(part):
        return BoundTerm(label, STAR, bound_star(part), True, False)
    term = _term(label, part, FOREST, bound_forest)
    return BoundTerm(term.label, term.rule, term.value, False, term.fallback_used)


def _certify_very_sparse(g: Graph) -> tuple[list[BoundTerm], float]:
    lab = components(g)
    deg = g.degrees
    cmax = np.zeros(lab.count, dtype=np.int64)
    np.maximum.at(cmax, lab.labels, deg)
    bip = bipartite_components(g, lab)
    terms = []
    for c in np.flatnonzero(lab.edge_counts > 0):
        size, m_c, d = int(lab.sizes[c]), int(lab.edge_counts[c]), int(cmax[c])
        label = f"component:{c}"
        if size <= 2:
            terms.append(BoundTerm(label, EXACT_SMALL, 1.0, True, False))
        elif m_c == size - 1:
            value = float(d) if d <= 1 else min(2.0 * math.sqrt(d - 1), math.sqrt(size - 1))
            terms.append(BoundTerm(label, FOREST, value, True, False))
        else:
            tr = math.sqrt(m_c) if bip[c] else math.sqrt(2 * m_c)
            rule, value = (MAX_DEGREE, float(d)) if d <= tr else (TRACE, tr)
            terms.append(BoundTerm(label, rule, value, False, True))
    upper = max((t.value for t in terms), default=0.0)
    return terms, upper


def _certify_dense(g: Graph, dp: DeltaP) -> tuple[list[BoundTerm], float, dict]:
    thr = x_threshold(g.n, dp.p, dp)
    in_x = g.degrees > thr
    e = g.edges()
    eu, ev = in_x[e[:, 0]], in_x[e[:, 1]]
    parts = {
        "G1": edge_subgraph(g, eu & ev),
        "G2": edge_subgraph(g, ~eu & ~ev),
        "G3": edge_subgraph(g, eu != ev),
    }
    terms = [
        _term("G1", parts["G1"], FOREST, bound_forest),
        _term("G2", parts["G2"], MAX_DEGREE, bound_max_degree, parts["G2"].max_degree <= thr),
        _term("G3", parts["G3"], FOREST, bound_forest),
    ]
    return terms, sum(t.value for t in terms), parts


# vertex classes of the middle-range partition
_X1, _X2, _Y1, _Y2 = 0, 1, 2, 3


def _certify_middle(g: Graph, dp: DeltaP) -> tuple[list[BoundTerm], float, dict]:
    deg = g.degrees
    thr = x_threshold(g.n, dp.p, dp)
    d34 = float(dp.value) ** 0.75
    d78 = float(dp.value) ** 0.875
    d13 = dp.cube_root

    x1 = deg >= d34
    x2 = (deg > thr) & ~x1
    adj_x1 = (g.adjacency @ x1.astype(np.float64)) > 0
    y1 = ~(x1 | x2) & adj_x1
    cls = np.full(g.n, _Y2, dtype=np.int8)
    cls[x1], cls[x2], cls[y1] = _X1, _X2, _Y1

    e = g.edges()
    cu, cv = cls[e[:, 0]], cls[e[:, 1]]
    lo, hi = np.minimum(cu, cv), np.maximum(cu, cv)
    if np.any((lo == _X1) & (hi == _Y2)):
        raise AssertionError("edge between X1 and Y2 contradicts the definition of Y1")
    in_g6 = (lo == _X1) & (hi == _Y1)
    # T: vertices of Y1 with more than one neighbour in X1 (their G6 degree)
    g6_deg = np.bincount(np.where(cu == _Y1, e[:, 0], e[:, 1])[in_g6], minlength=g.n)
    in_t = y1 & (g6_deg > 1)
    y_end = np.where(cu == _Y1, e[:, 0], e[:, 1])
    in_h = in_g6 & in_t[y_end]

    masks = {
        "G1": hi <= _X2,
        "G2": (lo == _X2) & (hi >= _Y1),
        "G3": (lo == _Y1) & (hi == _Y1),
        "G4": (lo == _Y1) & (hi == _Y2),
        "G5": (lo == _Y2) & (hi == _Y2),
        "H": in_h,
        "G6-H": in_g6 & ~in_h,
    }
    parts = {k: edge_subgraph(g, m) for k, m in masks.items()}

    g4 = parts["G4"]
    y2_side = int(g4.degrees[cls == _Y2].max(initial=0))
    terms = [
        _term("G1", parts["G1"], FOREST, bound_forest, parts["G1"].max_degree < d78),
        _term("G2", parts["G2"], FOREST, bound_forest),
        _term("G3", parts["G3"], MAX_DEGREE, bound_max_degree, parts["G3"].max_degree <= d13),
        _term(
            "G4",
            g4,
            BIPARTITE_PRODUCT,
            lambda part: bound_bipartite(part, VertexSet(cls == _Y1)),
            y2_side <= d13,
        ),
        _term("G5", parts["G5"], MAX_DEGREE, bound_max_degree, parts["G5"].max_degree <= thr),
        _term("H", parts["H"], MAX_DEGREE, bound_max_degree, parts["H"].max_degree <= d13),
        _star_or_forest_term("G6-H", parts["G6-H"]),
    ]
    v = {t.label: t.value for t in terms}
    upper = v["G1"] + v["G2"] + v["G3"] + v["G4"] + max(v["G5"], v["H"] + v["G6-H"])
    return terms, upper, parts


_COMBINATION = {
    VERY_SPARSE: "max over connected components",
    DENSE: "G1 + G2 + G3 (edge partition)",
    MIDDLE: "G1 + G2 + G3 + G4 + max(G5, H + G6-H) (edge partition; G5 and G6 vertex-disjoint)",
}


def certify(g: Graph, dp: DeltaP) -> Certificate:
    """Upper-bound certificate for lambda_1(g) following the regime of ``(g.n, dp.p)``."""
    if dp.n != g.n:
        raise ValueError(f"Delta_p computed for n={dp.n}, graph has n={g.n}")
    regime = classify_regime(g.n, dp.p)
    parts: dict[str, Graph] = {}
    if regime.tag == VERY_SPARSE:
        terms, upper = _certify_very_sparse(g)
    elif regime.tag == DENSE:
        terms, upper, parts = _certify_dense(g, dp)
    else:
        terms, upper, parts = _certify_middle(g, dp)
    lower = max(math.sqrt(g.max_degree), 2.0 * g.m / g.n)
    return Certificate(
        regime=regime,
        terms=terms,
        combination=_COMBINATION[regime.tag],
        upper_bound=float(upper),
        lower_bound=lower,
        all_assumptions_held=all(t.assumptions_held for t in terms),
        n=g.n,
        parts=parts,
    )


def certificate_gap(cert: Certificate, spectral: SpectralResult) -> float:
    """upper_bound / lambda_1; at least 1 (up to rounding) for a sound certificate."""
    if cert.n != spectral.n:
        raise ValueError(f"certificate is for n={cert.n}, spectral result for n={spectral.n}")
    return cert.upper_bound / max(spectral.lambda1, GAP_EPS)
