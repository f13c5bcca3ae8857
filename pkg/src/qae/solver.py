"""Lambda scan driving sub-QUBO sampling, merging and refinement.

For each lambda on a uniform grid and each repeat: partition the
perturbatively ordered coefficients into sub-QUBOs, sample each one, glue
the best sub-assignments together, run steepest descent on the complete
problem, decode and score with the Rayleigh quotient. The lowest score
over the whole scan wins.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .anneal import AnnealSchedule, get_sampler
from .ci import CiHamiltonian, perturbative_coefficients, perturbative_order
from .encoding import DEFAULT_MAX_SUBQUBO_VARS, EncodingConfig, decode, functional, partition_sub_qubos
from .errors import ConfigError, NoSolutionError
from .refine import rayleigh_energy, steepest_descent_encoded


@dataclass(frozen=True)
class QaeConfig:
    lambda_min: float
    lambda_max: float
    lambda_points: int = 51
    repeats: int = 3
    encoding: EncodingConfig = field(default_factory=EncodingConfig)
    schedule: AnnealSchedule = field(default_factory=AnnealSchedule)
    max_subqubo_vars: int = DEFAULT_MAX_SUBQUBO_VARS
    sampler: str = "sa"
    workers: int = 1

    def __post_init__(self):
        if not self.lambda_min < self.lambda_max:
            raise ConfigError(f"need lambda_min < lambda_max, got [{self.lambda_min}, {self.lambda_max}]")
        if self.lambda_points < 2:
            raise ConfigError("lambda_points must be >= 2")
        if self.repeats < 1 or self.workers < 1:
            raise ConfigError("repeats and workers must be >= 1")
        if self.max_subqubo_vars < self.encoding.k_bits:
            raise ConfigError(
                f"max_subqubo_vars={self.max_subqubo_vars} is smaller than k_bits={self.encoding.k_bits}")

    def lambda_grid(self) -> np.ndarray:
        return np.linspace(self.lambda_min, self.lambda_max, self.lambda_points)

    def to_dict(self) -> dict:
        return asdict(self)


class TraceRecord(NamedTuple):
    lambda_index: int
    lam: float
    repeat: int
    raw_xi: float
    raw_energy: Optional[float]
    refined_xi: float
    energy: Optional[float]
    flips: int
    degenerate: bool


@dataclass
class QaeResult:
    best_energy: float
    best_coefficients: np.ndarray
    best_lambda: float
    best_lambda_index: int
    best_repeat: int
    trace: list
    diagnostics: dict

    def to_dict(self) -> dict:
        return {
            "best_energy": self.best_energy,
            "best_lambda": self.best_lambda,
            "best_lambda_index": self.best_lambda_index,
            "best_repeat": self.best_repeat,
            "best_coefficients": [float(x) for x in self.best_coefficients],
            "diagnostics": self.diagnostics,
            "trace": [r._asdict() for r in self.trace],
        }

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TraceRecord._fields)
        for r in self.trace:
            w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in r])
        return buf.getvalue()


def derive_seed(seed: int, *keys: int) -> int:
    """``seed`` XOR a stable 64-bit hash of ``keys``."""
    words = np.random.SeedSequence(list(keys)).generate_state(2, dtype=np.uint32)
    return (seed ^ (int(words[0]) << 32 | int(words[1]))) & (2 ** 64 - 1)


def default_lambda_bracket(h: CiHamiltonian, margin: float = 0.05) -> tuple:
    """Interval guaranteed to contain the lowest eigenvalue (electronic part).

    The lower end is the smallest Gershgorin disc bound minus
    ``margin * |H_00|``; the upper end sits the same distance above the
    reference energy ``H_00``.
    """
    if margin <= 0:
        raise ConfigError("margin must be positive")
    m = h.matrix
    radius = np.abs(m).sum(axis=1) - np.abs(np.diag(m))
    pad = margin * abs(m[0, 0]) or margin
    lo = float(np.min(np.diag(m) - radius)) - pad
    hi = float(m[0, 0]) + pad
    return lo, hi


def _solve_point(h, cfg, order, lam, li, repeat, subs, sampler):
    k = cfg.encoding.k_bits
    n = h.size
    raw = np.zeros(n * k, dtype=np.int8)
    base = derive_seed(cfg.schedule.seed, li, repeat)
    for m, sub in enumerate(subs):
        sched = replace(cfg.schedule, seed=derive_seed(base, m))
        best = sampler.sample(sub.problem, sched).first
        sub.embed(best.assignment, raw)
    raw_c = decode(raw, k)
    raw_xi = functional(raw_c, h, lam)
    raw_energy = rayleigh_energy(raw_c, h) if np.any(raw_c) else None

    refined = steepest_descent_encoded(h, lam, cfg.encoding, raw)
    c = decode(refined.bits, k)
    xi = functional(c, h, lam)
    if not np.any(c):
        return TraceRecord(li, float(lam), repeat, raw_xi, raw_energy, xi, None, refined.flips, True), c
    e = rayleigh_energy(c, h)
    return TraceRecord(li, float(lam), repeat, raw_xi, raw_energy, xi, e, refined.flips, False), c


def run_qae(h: CiHamiltonian, cfg: QaeConfig) -> QaeResult:
    """Scan lambda, returning the lowest Rayleigh energy found.

    Raises ``NoSolutionError`` when every (lambda, repeat) point decodes to
    the zero vector.
    """
    if not h.is_symmetric():
        raise ConfigError("Hamiltonian matrix is not symmetric")
    order = perturbative_order(h)
    sampler = get_sampler(cfg.sampler)
    grid = cfg.lambda_grid()
    tasks = []
    for li, lam in enumerate(grid):
        subs = partition_sub_qubos(h, lam, cfg.encoding, order, cfg.max_subqubo_vars)
        tasks.extend((lam, li, r, subs) for r in range(cfg.repeats))

    def run(task):
        lam, li, r, subs = task
        return _solve_point(h, cfg, order, lam, li, r, subs, sampler)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    trace = [rec for rec, _ in results]
    best_i = None
    for i, rec in enumerate(trace):
        # tasks are ordered by (lambda index, repeat): strict < keeps the earliest tie
        if not rec.degenerate and (best_i is None or rec.energy < trace[best_i].energy):
            best_i = i
    n_sub = math.ceil(h.size / (cfg.max_subqubo_vars // cfg.encoding.k_bits))
    diagnostics = {
        "degenerate_points": sum(r.degenerate for r in trace),
        "points": len(trace),
        "n_coefficients": h.size,
        "n_sub_qubos": n_sub,
        "clamped_denominators": len(perturbative_coefficients(h).clamped),
        "coefficient_order": [int(i) for i in order],
    }
    if best_i is None:
        raise NoSolutionError(f"all {len(trace)} lambda points decoded to the zero vector")
    rec = trace[best_i]
    return QaeResult(rec.energy, results[best_i][1], rec.lam, rec.lambda_index, rec.repeat,
                     trace, diagnostics)


__all__ = ["QaeConfig", "QaeResult", "TraceRecord", "run_qae", "default_lambda_bracket", "derive_seed"]
