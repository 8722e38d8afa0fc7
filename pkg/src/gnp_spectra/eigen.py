"""Largest adjacency eigenvalue of a sparse graph.

:func:`lambda1_power` iterates ``A + I`` on every connected component at once,
normalising each component's block separately, so one sparse product per step
serves all components.  :func:`lambda1_dense` is a cyclic Jacobi solver used
as an independent oracle on small graphs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .graph_core import Graph, components

__all__ = [
    "DEFAULT_MAX_ITER",
    "DEFAULT_TOL",
    "DENSE_MAX_N",
    "NonConvergenceError",
    "SpectralResult",
    "jacobi_eigenvalues",
    "lambda1_dense",
    "lambda1_power",
    "rayleigh",
]

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100_000
DENSE_MAX_N = 1024
# components at least this large get a Lanczos warm start
WARM_START_MIN = 100
# a component is pruned only if its upper bound is below the lower bound by this
# relative margin; a Rayleigh quotient may round above an exact upper bound
PRUNE_MARGIN = 1e-9

POWER = "POWER"
DENSE = "DENSE"


@dataclass
class SpectralResult:
    lambda1: float
    method: str
    residual: float
    iterations: int
    argmax_component: int
    n: int
    converged: bool = True
    per_component: list[float] | None = None
    vector: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "method": self.method,
            "residual": self.residual,
            "iterations": self.iterations,
            "argmax_component": self.argmax_component,
            "converged": self.converged,
        }


class NonConvergenceError(RuntimeError):
    """Power iteration hit ``max_iter``; ``result`` holds the best iterate."""

    def __init__(self, result: SpectralResult):
        super().__init__(
            f"power iteration did not converge in {result.iterations} iterations "
            f"(residual {result.residual:.3e}, estimate {result.lambda1:.12g})"
        )
        self.result = result


def rayleigh(g: Graph, v) -> float:
    """``v^T A v / v^T v``; never exceeds lambda_1."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (g.n,):
        raise ValueError(f"vector must have length {g.n}")
    vv = float(v @ v)
    if vv == 0.0:
        raise ValueError("Rayleigh quotient of the zero vector")
    return float(v @ (g.adjacency @ v)) / vv


def _component_upper_bounds(sizes, edge_counts, comp_maxdeg) -> np.ndarray:
    """Cheap per-component upper bounds on lambda_1 used only for pruning."""
    ub = np.minimum(comp_maxdeg.astype(np.float64), np.sqrt(2.0 * edge_counts))
    tree = (edge_counts == sizes - 1) & (comp_maxdeg >= 2)
    tree_ub = np.minimum(
        2.0 * np.sqrt(np.maximum(comp_maxdeg - 1, 0)), np.sqrt(np.maximum(sizes - 1, 0))
    )
    return np.where(tree, np.minimum(ub, tree_ub), ub)


def _krylov_start(a: sp.csr_matrix, v0: np.ndarray, tol: float) -> np.ndarray:
    """Nonnegative start vector from a Lanczos Ritz vector; falls back to ``v0``."""
    try:
        _, vec = eigsh(a, k=1, which="LA", v0=v0, tol=tol, maxiter=max(1000, a.shape[0] // 10))
    except ArpackNoConvergence as err:
        if err.eigenvectors is None or err.eigenvectors.shape[1] == 0:
            return v0
        vec = err.eigenvectors
    x = np.abs(vec[:, 0])
    return x if x.any() else v0


def lambda1_power(
    g: Graph,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    per_component: bool = False,
    check_every: int = 8,
    warm_start_min: int | None = WARM_START_MIN,
    raise_on_failure: bool = True,
) -> SpectralResult:
    """lambda_1 by shifted power iteration, solved per connected component.

    Every component's block of the iterate is multiplied by ``A + I`` and
    normalised separately.  A component is converged when
    ``||Av - rv|| / max(1, r) <= tol`` with ``r`` its Rayleigh quotient.

    Components whose cheap upper bound falls strictly below a proven lower
    bound on lambda_1(G) cannot hold the maximum and are dropped, unless
    ``per_component`` asks for every value.  Components with at least
    ``warm_start_min`` vertices start from a nonnegative Lanczos Ritz vector
    instead of the degree vector; the stopping rule is the same either way.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    n = g.n
    if n == 0:
        return SpectralResult(0.0, POWER, 0.0, 0, -1, 0, per_component=[] if per_component else None)

    lab = components(g)
    labels, count = lab.labels, lab.count
    deg = g.degrees
    comp_maxdeg = np.zeros(count, dtype=np.int64)
    np.maximum.at(comp_maxdeg, labels, deg)

    values = np.full(count, np.nan)
    residuals = np.zeros(count)
    # components on <= 2 vertices are K1 or K2
    tiny = lab.sizes <= 2
    values[tiny] = lab.edge_counts[tiny]

    lower = max(math.sqrt(g.max_degree), float(np.max(2.0 * lab.edge_counts / lab.sizes)))
    ub = _component_upper_bounds(lab.sizes, lab.edge_counts, comp_maxdeg)

    def hopeless(bound, low):
        return bound * (1.0 + PRUNE_MARGIN) + PRUNE_MARGIN < low

    active = ~tiny
    if not per_component:
        active &= ~hopeless(ub, lower)

    vector = deg.astype(np.float64)
    vector[tiny[labels]] = 1.0
    if warm_start_min is not None:
        for c in np.flatnonzero(active & (lab.sizes >= max(warm_start_min, 3))):
            idx = np.flatnonzero(labels == c)
            vector[idx] = _krylov_start(g.adjacency[idx][:, idx], vector[idx], tol / 10)

    iterations = 0
    converged = True
    while active.any():
        # working subgraph spanned by the still-active components
        comp_ids = np.flatnonzero(active)
        local_of_comp = np.full(count, -1, dtype=np.int64)
        local_of_comp[comp_ids] = np.arange(len(comp_ids))
        verts = np.flatnonzero(active[labels])
        wlab = local_of_comp[labels[verts]]
        k = len(comp_ids)
        shifted = (g.adjacency[verts][:, verts] + sp.identity(len(verts), format="csr")).tocsr()
        x = vector[verts]

        while True:
            x /= np.sqrt(np.bincount(wlab, x * x, minlength=k))[wlab]
            z = shifted @ x
            iterations += 1
            ax = z - x
            rq = np.bincount(wlab, x * ax, minlength=k)
            r = ax - rq[wlab] * x
            res = np.sqrt(np.bincount(wlab, r * r, minlength=k)) / np.maximum(1.0, rq)

            live = active[comp_ids]
            # a Rayleigh quotient is a proven lower bound on lambda_1(G)
            lower = max(lower, float(rq[live].max()))
            done = live & (res <= tol)
            dropped = done.copy()
            if not per_component:
                dropped |= live & hopeless(ub[comp_ids], lower)
            values[comp_ids[done]] = rq[done]
            residuals[comp_ids[done]] = res[done]
            active[comp_ids[dropped]] = False
            vector[verts] = x

            if not active.any():
                break
            if iterations >= max_iter:
                live &= ~dropped
                values[comp_ids[live]] = rq[live]
                residuals[comp_ids[live]] = res[live]
                active[:] = False
                converged = False
                break
            if np.count_nonzero(active[labels[verts]]) <= len(verts) // 2:
                break
            # unnormalised steps between checks: growth is at most (max_degree + 1)^check_every
            x = z
            steps = min(check_every - 1, max_iter - iterations - 1)
            for _ in range(steps):
                x = shifted @ x
            iterations += steps

    solved = np.flatnonzero(~np.isnan(values))
    best = int(solved[np.argmax(values[solved])])
    result = SpectralResult(
        lambda1=float(values[best]),
        method=POWER,
        residual=float(residuals[solved].max()),
        iterations=iterations,
        argmax_component=best,
        n=n,
        converged=converged,
        per_component=[float(v) for v in values] if per_component else None,
        vector=vector,
    )
    if not converged and raise_on_failure:
        raise NonConvergenceError(result)
    return result


# --------------------------------------------------------------------------
# dense oracle


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Rounds of disjoint index pairs covering every pair once (circle method)."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        ps, qs = [], []
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a >= 0 and b >= 0:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=np.int64), np.array(qs, dtype=np.int64)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigenvalues(a: np.ndarray, max_sweeps: int = 60) -> np.ndarray:
    """All eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.

    Each round of the tournament ordering annihilates a set of disjoint
    off-diagonal pairs simultaneously.  Iterates until the off-diagonal mass
    is at rounding level.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n <= 1:
        return np.diag(a).copy()
    rounds = _round_robin(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n)
    eps = np.finfo(np.float64).eps
    diag_mask = np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a[~diag_mask])
        if off <= eps * scale:
            break
        for p, q in rounds:
            apq = a[p, q]
            nz = np.abs(apq) > 1e-300
            if not nz.any():
                continue
            p, q, apq = p[nz], q[nz], apq[nz]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            # t = sign(theta) / (|theta| + sqrt(theta^2 + 1)) without overflow
            big = np.abs(theta) > 1e150
            th = np.where(big, 1.0, theta)
            t = np.where(
                big, 0.5 / np.where(big, theta, 1.0), np.sign(th) / (np.abs(th) + np.sqrt(th * th + 1.0))
            )
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # A <- J^T A J with J = [[c, s], [-s, c]] on each (p, q) plane:
            # rotate rows, transpose, rotate rows again (A stays symmetric)
            c, s = c[:, None], s[:, None]
            for _ in range(2):
                rp, rq = a[p], a[q]
                a[p] = c * rp - s * rq
                a[q] = s * rp + c * rq
                a = np.ascontiguousarray(a.T)
            a[p, q] = 0.0
            a[q, p] = 0.0
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.sort(np.diag(a))[::-1]


def lambda1_dense(g: Graph) -> SpectralResult:
    """lambda_1 from the full spectrum of each component's dense block."""
    if g.n > DENSE_MAX_N:
        raise ValueError(f"dense solver limited to n <= {DENSE_MAX_N}, got {g.n}")
    if g.n == 0:
        return SpectralResult(0.0, DENSE, 0.0, 0, -1, 0, per_component=[])
    lab = components(g)
    dense = g.adjacency.toarray()
    values = []
    for c in range(lab.count):
        if lab.edge_counts[c] == 0:
            values.append(0.0)
            continue
        idx = np.flatnonzero(lab.labels == c)
        values.append(max(float(jacobi_eigenvalues(dense[np.ix_(idx, idx)])[0]), 0.0))
    best = int(np.argmax(values))
    return SpectralResult(values[best], DENSE, 0.0, 0, best, g.n, per_component=values)
