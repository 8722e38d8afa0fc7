"""Seeded Monte-Carlo experiments over G(n, p).

A configuration names a grid of vertex counts, an edge-probability rule and
a number of trials.  Every trial samples one graph, computes lambda_1, the
degree threshold, the structural report and the certificate, checks the
exact lower/upper inequalities in-process and emits one JSON record.

Trial ``t`` at size ``n`` uses the seed

    SeedSequence([base_seed, n, t]).generate_state(1, uint64)[0]

so trials are independent of each other and of evaluation order.
"""
from __future__ import annotations

import csv
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .certificate import certificate_gap, certify
from .degree_model import MIN_REGIME_N, corollary_target, delta_p, theorem_target
from .eigen import DEFAULT_TOL, lambda1_power
from .graph_core import GENERATOR_VERSION, MAX_GNP_N, gen_gnp
from .structure import lemma_checks, structure_report

__all__ = [
    "ABS",
    "CALIBRATION",
    "C_OVER_N",
    "LOGPOW",
    "ConfigError",
    "ExperimentConfig",
    "InvariantViolation",
    "PSpec",
    "TrialRecord",
    "mix_seed",
    "run_experiment",
    "run_trial",
    "summarize",
    "write_csv",
    "write_jsonl",
]

ABS = "ABS"
C_OVER_N = "C_OVER_N"
LOGPOW = "LOGPOW"

INVARIANT_TOL = 1e-6
# distance-two scans above this many neighbour pairs are skipped (reported as null)
WEDGE_CHECK_LIMIT = 2 * 10**7

# acceptance bands: our calibration of the asymptotic (1 + o(1)) statements
CALIBRATION = {
    "ratio_theorem_dense_median": [1.0 - 1e-6, 1.35],
    "ratio_corollary_median": [0.8, 1.8],
    "corollary_c_spread": 0.25,
    "max_degree_over_delta_p_median": [0.6, 1.4],
    "forest_fraction_min": 0.95,
    "short_cycle_clean_fraction_min": 0.90,
}


class ConfigError(ValueError):
    pass


class InvariantViolation(AssertionError):
    """A sampled graph broke an inequality that holds for every graph."""


@dataclass(frozen=True)
class PSpec:
    kind: str
    value: float = 0.0
    c: float = 0.0
    a: float = 0.0
    b: float = 0.0

    @classmethod
    def from_dict(cls, d: dict) -> "PSpec":
        if not isinstance(d, dict) or "type" not in d:
            raise ConfigError("p_spec must be an object with a 'type' field")
        kind = d["type"]
        try:
            if kind == ABS:
                return cls(ABS, value=float(d["value"]))
            if kind == C_OVER_N:
                return cls(C_OVER_N, c=float(d["c"]))
            if kind == LOGPOW:
                return cls(LOGPOW, a=float(d["a"]), b=float(d["b"]))
        except (KeyError, TypeError, ValueError) as err:
            raise ConfigError(f"bad {kind} p_spec: {err}") from None
        raise ConfigError(f"unknown p_spec type {kind!r}; expected ABS, C_OVER_N or LOGPOW")

    def to_dict(self) -> dict:
        if self.kind == ABS:
            return {"type": ABS, "value": self.value}
        if self.kind == C_OVER_N:
            return {"type": C_OVER_N, "c": self.c}
        return {"type": LOGPOW, "a": self.a, "b": self.b}

    def p(self, n: int) -> float:
        if self.kind == ABS:
            return self.value
        if self.kind == C_OVER_N:
            return self.c / n
        return self.a * math.log(n) ** self.b / n


@dataclass(frozen=True)
class ExperimentConfig:
    n_list: tuple[int, ...]
    p_spec: PSpec
    trials: int
    base_seed: int = 0
    tol: float = DEFAULT_TOL
    out_path: str | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.n_list:
            raise ConfigError("n_list is empty")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not 0 <= self.base_seed < 2**64:
            raise ConfigError("base_seed must be a 64-bit unsigned integer")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        for n in self.n_list:
            if not MIN_REGIME_N <= n <= MAX_GNP_N:
                raise ConfigError(f"n={n} outside [{MIN_REGIME_N}, {MAX_GNP_N}]")
            p = self.p_spec.p(n)
            # p = 0 is accepted: it yields empty graphs with null ratios
            if not 0.0 <= p < 1.0:
                raise ConfigError(f"p={p} at n={n} is not a probability in [0, 1)")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"n_list", "p_spec", "trials", "base_seed", "tol", "out_path", "workers"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        for key in ("n_list", "p_spec", "trials"):
            if key not in d:
                raise ConfigError(f"missing config field {key!r}")
        try:
            n_list = tuple(_as_int(n, "n_list entry") for n in d["n_list"])
        except TypeError:
            raise ConfigError("n_list must be a list of integers") from None
        return cls(
            n_list=n_list,
            p_spec=PSpec.from_dict(d["p_spec"]),
            trials=_as_int(d["trials"], "trials"),
            base_seed=_as_int(d.get("base_seed", 0), "base_seed"),
            tol=float(d.get("tol", DEFAULT_TOL)),
            out_path=d.get("out_path"),
            workers=_as_int(d.get("workers", 1), "workers"),
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: invalid JSON ({err})") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "n_list": list(self.n_list),
            "p_spec": self.p_spec.to_dict(),
            "trials": self.trials,
            "base_seed": self.base_seed,
            "tol": self.tol,
            "out_path": self.out_path,
            "workers": self.workers,
        }


def _as_int(x, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{what} must be an integer, got {x!r}")
    return x


def mix_seed(base_seed: int, n: int, trial: int) -> int:
    """64-bit seed of one trial; distinct (base_seed, n, trial) give independent streams."""
    ss = np.random.SeedSequence([base_seed, n, trial])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class TrialRecord:
    n: int
    trial: int
    p: float
    seed: int
    generator_version: str
    m: int
    delta: int
    delta_p: int | None
    lambda1: float
    residual: float
    lower_bound: float
    cert_upper: float | None
    cert_gap: float | None
    cert_all_assumptions_held: bool | None
    regime: str | None
    ratio_theorem: float | None
    ratio_corollary: float | None
    ratio_theorem_deltap: float | None
    forest: bool
    max_component_size: int
    component_ratio: float | None
    short_cycle_violations: int | None
    x_neighbor_max: int | None
    dist2_highdeg_max: int | None
    lemmas: dict | None = field(default=None)
    wall_time_ms: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _ratio(num: float, den: float) -> float | None:
    return num / den if den > 0 and num > 0 else None


def _check_invariants(rec: TrialRecord) -> None:
    failures = []
    if rec.lambda1 < math.sqrt(rec.delta) - INVARIANT_TOL:
        failures.append("lambda1 < sqrt(max degree)")
    if rec.lambda1 < 2.0 * rec.m / rec.n - INVARIANT_TOL:
        failures.append("lambda1 < 2m/n")
    if rec.cert_upper is not None and rec.cert_upper < rec.lambda1 - INVARIANT_TOL:
        failures.append("certificate upper bound < lambda1")
    if failures:
        dump = json.dumps(rec.to_dict(), sort_keys=True)
        raise InvariantViolation(
            f"{'; '.join(failures)} for n={rec.n} p={rec.p!r} seed={rec.seed}: {dump}"
        )


def run_trial(n: int, p: float, trial: int, seed: int, tol: float, corollary: bool) -> TrialRecord:
    """Sample one graph and evaluate every statistic; raises on invariant failure."""
    start = time.perf_counter()
    g = gen_gnp(n, p, seed)
    spec = lambda1_power(g, tol=tol)
    deg = g.max_degree
    lam = spec.lambda1
    rec = TrialRecord(
        n=n,
        trial=trial,
        p=p,
        seed=seed,
        generator_version=GENERATOR_VERSION,
        m=g.m,
        delta=deg,
        delta_p=None,
        lambda1=lam,
        residual=spec.residual,
        lower_bound=max(math.sqrt(deg), 2.0 * g.m / n),
        cert_upper=None,
        cert_gap=None,
        cert_all_assumptions_held=None,
        regime=None,
        ratio_theorem=None,
        ratio_corollary=None,
        ratio_theorem_deltap=None,
        forest=g.m == 0,
        max_component_size=1,
        component_ratio=None,
        short_cycle_violations=None,
        x_neighbor_max=None,
        dist2_highdeg_max=None,
    )
    if p > 0:
        dp = delta_p(n, p)
        d = g.degrees.astype(np.int64)
        wedge = int(np.dot(d, d)) <= WEDGE_CHECK_LIMIT
        report = structure_report(g, dp, wedge_checks=wedge)
        cert = certify(g, dp)
        rec.delta_p = dp.value
        rec.cert_upper = cert.upper_bound
        rec.cert_gap = certificate_gap(cert, spec) if lam > 0 else None
        rec.cert_all_assumptions_held = cert.all_assumptions_held
        rec.regime = cert.regime.tag
        rec.ratio_theorem = _ratio(lam, theorem_target(n, p, deg))
        rec.ratio_theorem_deltap = _ratio(lam, max(math.sqrt(dp.value), n * p))
        if corollary:
            rec.ratio_corollary = _ratio(lam, corollary_target(n))
        rec.forest = report.forest
        rec.max_component_size = report.max_component_size
        rec.component_ratio = report.max_component_size / dp.value if dp.value > 0 else None
        rec.short_cycle_violations = report.short_cycle_violations
        rec.x_neighbor_max = report.x_neighbor_max
        rec.dist2_highdeg_max = report.dist2_highdeg_max
        rec.lemmas = lemma_checks(report)
    else:
        rec.max_component_size = 1 if n else 0
    _check_invariants(rec)
    rec.wall_time_ms = (time.perf_counter() - start) * 1000.0
    return rec


def _jobs(cfg: ExperimentConfig) -> list[tuple]:
    corollary = cfg.p_spec.kind == C_OVER_N
    return [
        (n, cfg.p_spec.p(n), t, mix_seed(cfg.base_seed, n, t), cfg.tol, corollary)
        for n in sorted(cfg.n_list)
        for t in range(cfg.trials)
    ]


def _run_job(job: tuple) -> TrialRecord:
    return run_trial(*job)


def run_experiment(cfg: ExperimentConfig) -> Iterator[TrialRecord]:
    """Yield one record per (n, trial), ordered by (n, trial) whatever ``cfg.workers`` is."""
    jobs = _jobs(cfg)
    if cfg.workers == 1:
        for job in jobs:
            yield _run_job(job)
        return
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        yield from pool.map(_run_job, jobs)


def _quantiles(values: list[float]) -> dict | None:
    if not values:
        return None
    arr = np.asarray(values, dtype=np.float64)
    return {
        "median": float(np.median(arr)),
        "mean": float(arr.mean()),
        "p05": float(np.quantile(arr, 0.05)),
        "p95": float(np.quantile(arr, 0.95)),
        "count": len(values),
    }


def _fraction(flags: list) -> float | None:
    flags = [f for f in flags if f is not None]
    return sum(bool(f) for f in flags) / len(flags) if flags else None


def _median(values: list) -> float | None:
    values = [v for v in values if v is not None]
    return float(statistics.median(values)) if values else None


def summarize(records: list[TrialRecord]) -> list[dict]:
    """Aggregate statistics per grid point (n, p); null-valued ratios are skipped."""
    groups: dict[tuple[int, float], list[TrialRecord]] = {}
    for r in records:
        groups.setdefault((r.n, r.p), []).append(r)
    out = []
    for (n, p), recs in sorted(groups.items()):
        dps = [r.delta / r.delta_p for r in recs if r.delta_p]
        out.append(
            {
                "n": n,
                "p": p,
                "trials": len(recs),
                "ratio_theorem": _quantiles([r.ratio_theorem for r in recs if r.ratio_theorem is not None]),
                "ratio_corollary": _quantiles(
                    [r.ratio_corollary for r in recs if r.ratio_corollary is not None]
                ),
                "forest_fraction": _fraction([r.forest for r in recs]),
                "short_cycle_clean_fraction": _fraction(
                    [None if r.short_cycle_violations is None else r.short_cycle_violations == 0 for r in recs]
                ),
                "median_lambda1": _median([r.lambda1 for r in recs]),
                "median_cert_gap": _median([r.cert_gap for r in recs]),
                "median_max_degree_over_delta_p": _median(dps),
                "all_assumptions_held_fraction": _fraction([r.cert_all_assumptions_held for r in recs]),
            }
        )
    return out


def record_line(rec: TrialRecord) -> str:
    return json.dumps(rec.to_dict(), sort_keys=False, separators=(",", ":"))


def write_jsonl(records, path) -> list[TrialRecord]:
    """Stream records to ``path`` as they are produced; returns them."""
    kept = []
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(record_line(rec) + "\n")
            fh.flush()
            kept.append(rec)
    return kept


def write_summary(cfg: ExperimentConfig, records: list[TrialRecord], path) -> dict:
    doc = {
        "config": cfg.to_dict(),
        "generator_version": GENERATOR_VERSION,
        "seed_mixing": "SeedSequence([base_seed, n, trial]).generate_state(1, uint64)[0]",
        "calibration": CALIBRATION,
        "grid": summarize(records),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return doc


CSV_FIELDS = [
    "n", "trial", "p", "seed", "generator_version", "m", "delta", "delta_p", "lambda1",
    "residual", "lower_bound", "cert_upper", "cert_gap", "cert_all_assumptions_held", "regime",
    "ratio_theorem", "ratio_corollary", "ratio_theorem_deltap", "forest", "max_component_size",
    "component_ratio", "short_cycle_violations", "x_neighbor_max", "dist2_highdeg_max",
    "wall_time_ms",
]  # fmt: skip


def write_csv(records: list[TrialRecord], path) -> None:
    """Scalar fields only; nulls become empty cells."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for rec in records:
            w.writerow({k: ("" if v is None else v) for k, v in rec.to_dict().items()})
