"""Degree threshold Delta_p of G(n, p) and edge-probability regimes.

Delta_p is the largest k for which the expected number of vertices of
degree k is at least one,

    f(k) = ln n + ln C(n-1, k) + k ln p + (n-1-k) ln(1-p) >= 0,

evaluated in log space with ``math.lgamma``.  All logarithms are natural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "DENSE",
    "KNIFE_EDGE",
    "MIDDLE",
    "MIN_REGIME_N",
    "VERY_SPARSE",
    "DeltaP",
    "Regime",
    "classify_regime",
    "corollary_target",
    "delta_p",
    "log_expected_count",
    "theorem_target",
]

VERY_SPARSE = "VERY_SPARSE"
MIDDLE = "MIDDLE"
DENSE = "DENSE"

# ln ln n > 1 from here on, so 1/ln ln n and (ln ln n)^2 behave
MIN_REGIME_N = 20
# |f(k)| below this at the crossing may round either way across platforms
KNIFE_EDGE = 1e-9


@dataclass(frozen=True)
class DeltaP:
    n: int
    p: float
    value: int
    log_profile: tuple[float, ...]  # f(0), f(1), ... as scanned
    crossing_k: int
    knife_edge: bool

    @property
    def cube_root(self) -> float:
        return self.value ** (1.0 / 3.0)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "delta_p": self.value,
            "crossing_k": self.crossing_k,
            "knife_edge": self.knife_edge,
            "f_at_value": self.log_profile[self.value],
            "f_at_next": self.log_profile[self.value + 1] if self.value + 1 < len(self.log_profile) else None,
            "scanned": len(self.log_profile),
        }


@dataclass(frozen=True)
class Regime:
    tag: str
    n: int
    p: float
    very_sparse_threshold: float  # e^{-(ln ln n)^2} / n
    dense_threshold: float  # (ln n)^{1/2} / n


def _check_probability(p: float) -> None:
    if not (0.0 < p < 1.0):
        raise ValueError(f"edge probability must lie in (0, 1), got {p}")


def log_expected_count(n: int, p: float, k: int) -> float:
    """ln of n * C(n-1, k) * p^k * (1-p)^(n-1-k)."""
    return (
        math.log(n)
        + math.lgamma(n)
        - math.lgamma(k + 1)
        - math.lgamma(n - k)
        + k * math.log(p)
        + (n - 1 - k) * math.log1p(-p)
    )


def delta_p(n: int, p: float) -> DeltaP:
    """Largest k in 0..n-1 with ``log_expected_count(n, p, k) >= 0``.

    f is strictly concave in k, so the qualifying k form an interval; the scan
    runs upward from 0 and stops once f is falling and negative.
    """
    if n < 2:
        raise ValueError(f"delta_p needs n >= 2, got {n}")
    _check_probability(p)
    profile: list[float] = []
    best = -1
    for k in range(n):
        f = log_expected_count(n, p, k)
        profile.append(f)
        if f >= 0:
            best = k
        elif k > 0 and f < profile[-2] and best >= 0:
            break
    if best < 0:
        # every term rounded below zero; the peak is the only sensible answer
        best = max(range(len(profile)), key=profile.__getitem__)
    near = [profile[best]]
    if best + 1 < len(profile):
        near.append(profile[best + 1])
    knife = any(abs(f) < KNIFE_EDGE for f in near)
    return DeltaP(n, p, best, tuple(profile), best, knife)


def classify_regime(n: int, p: float) -> Regime:
    """VERY_SPARSE iff p <= e^{-(ln ln n)^2}/n, DENSE iff p >= sqrt(ln n)/n."""
    if n < MIN_REGIME_N:
        raise ValueError(f"regimes need n >= {MIN_REGIME_N}, got {n}")
    _check_probability(p)
    lnn = math.log(n)
    sparse_thr = math.exp(-math.log(lnn) ** 2) / n
    dense_thr = math.sqrt(lnn) / n
    if p <= sparse_thr:
        tag = VERY_SPARSE
    elif p >= dense_thr:
        tag = DENSE
    else:
        tag = MIDDLE
    return Regime(tag, n, p, sparse_thr, dense_thr)


def theorem_target(n: int, p: float, max_deg: int) -> float:
    """max(sqrt(max_deg), n p): the asymptotic value of lambda_1."""
    if max_deg < 0:
        raise ValueError("max degree must be nonnegative")
    return max(math.sqrt(max_deg), n * p)


def corollary_target(n: int) -> float:
    """sqrt(ln n / ln ln n), the asymptotic lambda_1 of G(n, c/n)."""
    if n < MIN_REGIME_N:
        raise ValueError(f"corollary target needs n >= {MIN_REGIME_N}, got {n}")
    lnn = math.log(n)
    return math.sqrt(lnn / math.log(lnn))
