"""Classical samplers for :class:`~qae.encoding.QuboProblem`.

Two built-ins share the :class:`Sampler` protocol: seeded single-flip
Metropolis simulated annealing and exhaustive enumeration. A client for
real annealing hardware only has to provide ``sample(qubo, schedule)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Protocol

import numba
import numpy as np

from .encoding import QuboProblem
from .errors import CapacityError, ConfigError

BRUTE_FORCE_MAX_VARS = 24
_MASK32 = 0xFFFFFFFF


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric temperature schedule; ``None`` temperatures scale with the problem.

    The defaults resolve to ``t_start = max|coefficient|`` and
    ``t_end = 1e-3 * t_start``.
    """

    sweeps: int = 1000
    reads: int = 1000
    seed: int = 0
    t_start: Optional[float] = None
    t_end: Optional[float] = None

    def __post_init__(self):
        if self.sweeps < 1 or self.reads < 1:
            raise ConfigError("sweeps and reads must be >= 1")
        if self.t_start is not None and self.t_end is not None:
            if not self.t_start > self.t_end > 0:
                raise ConfigError("need t_start > t_end > 0")
        elif self.t_end is not None and self.t_end <= 0:
            raise ConfigError("t_end must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def temperatures(self, qubo: QuboProblem) -> np.ndarray:
        t0 = self.t_start
        if t0 is None:
            t0 = qubo.max_abs_coefficient() or 1.0
        t1 = self.t_end if self.t_end is not None else 1e-3 * t0
        if not t0 > t1 > 0:
            raise ConfigError(f"resolved temperatures t_start={t0}, t_end={t1} are not decreasing")
        if self.sweeps == 1:
            return np.array([t1])
        k = np.arange(self.sweeps) / (self.sweeps - 1)
        return t0 * (t1 / t0) ** k


def read_seed(seed: int, read_index: int) -> int:
    """32-bit generator seed for one read: ``seed XOR read_index`` folded to 32 bits."""
    s = (seed ^ read_index) & (2 ** 64 - 1)
    return (s ^ (s >> 32)) & _MASK32


class Sample(NamedTuple):
    assignment: np.ndarray
    energy: float
    occurrences: int


@dataclass
class SampleSet:
    """Distinct assignments sorted by ascending energy, ties lexicographic."""

    assignments: np.ndarray
    energies: np.ndarray
    occurrences: np.ndarray
    info: dict = field(default_factory=dict)

    @classmethod
    def from_reads(cls, qubo: QuboProblem, states: np.ndarray, info=None) -> "SampleSet":
        states = np.ascontiguousarray(states, dtype=np.int8)
        rows = states.view(np.dtype((np.void, states.shape[1])))[:, 0]
        _, first, counts = np.unique(rows, return_index=True, return_counts=True)
        uniq = states[first]
        x = uniq.astype(float)
        energies = x @ qubo.linear + ((x @ qubo.quadratic) * x).sum(axis=1) + qubo.offset
        order = np.argsort(energies, kind="stable")
        return cls(uniq[order], energies[order], counts[order], dict(info or {}))

    def __len__(self):
        return len(self.energies)

    def __iter__(self):
        for a, e, n in zip(self.assignments, self.energies, self.occurrences):
            yield Sample(a, float(e), int(n))

    @property
    def samples(self) -> list:
        return list(self)

    @property
    def first(self) -> Sample:
        return Sample(self.assignments[0], float(self.energies[0]), int(self.occurrences[0]))


@numba.njit(cache=True)
def _coprime_strides(n):
    out = []
    for b in range(1, max(n, 2)):
        a, c = b, n
        while c:
            a, c = c, a % c
        if a == 1:
            out.append(b)
    if not out:
        out.append(1)
    return np.array(out)


@numba.njit(cache=True, nogil=True)
def _anneal_kernel(linear, coupling, betas, seeds, check):
    n = linear.size
    reads = seeds.size
    states = np.zeros((reads, n), dtype=np.int8)
    max_dev = 0.0
    x = np.zeros(n)
    f = np.zeros(n)
    strides = _coprime_strides(n)
    for r in range(reads):
        np.random.seed(seeds[r])
        for u in range(n):
            x[u] = 1.0 if np.random.random() < 0.5 else 0.0
        energy = 0.0
        for u in range(n):
            acc = linear[u]
            for v in range(n):
                acc += coupling[u, v] * x[v]
            f[u] = acc
            energy += x[u] * (linear[u] + 0.5 * (acc - linear[u]))
        for k in range(betas.size):
            beta = betas[k]
            # visiting order u = (start + stride * t) mod n, redrawn every sweep
            start = np.random.randint(0, n)
            stride = strides[np.random.randint(0, strides.size)]
            u = start
            for t in range(n):
                if t:
                    u += stride
                    if u >= n:
                        u -= n
                step = 1.0 - 2.0 * x[u]
                delta = step * f[u]
                if delta <= 0.0 or np.random.random() < np.exp(-beta * delta):
                    x[u] += step
                    energy += delta
                    # coupling is symmetric, so row u doubles as column u
                    for v in range(n):
                        f[v] += coupling[u, v] * step
            if check:
                full = 0.0
                for u in range(n):
                    if x[u] != 0.0:
                        full += linear[u]
                        for v in range(u + 1, n):
                            full += coupling[u, v] * x[v]
                dev = abs(full - energy)
                if dev > max_dev:
                    max_dev = dev
        for u in range(n):
            states[r, u] = np.int8(x[u])
    return states, max_dev


class Sampler(Protocol):
    def sample(self, qubo: QuboProblem, schedule: AnnealSchedule) -> SampleSet: ...


class SimulatedAnnealingSampler:
    """Metropolis annealing; each read restarts from a random assignment.

    With ``check_energy=True`` the incrementally tracked energy is compared
    against a full re-evaluation after every sweep and the largest deviation
    is stored in ``info["max_energy_drift"]``.
    """

    name = "sa"

    def __init__(self, check_energy: bool = False):
        self.check_energy = check_energy

    def sample(self, qubo: QuboProblem, schedule: AnnealSchedule = AnnealSchedule()) -> SampleSet:
        temps = schedule.temperatures(qubo)
        seeds = np.array([read_seed(schedule.seed, r) for r in range(schedule.reads)], dtype=np.uint32)
        states, drift = _anneal_kernel(
            np.ascontiguousarray(qubo.linear), np.ascontiguousarray(qubo.couplings()),
            1.0 / temps, seeds, self.check_energy)
        info = {"sampler": self.name, "reads": schedule.reads, "sweeps": schedule.sweeps,
                "t_start": float(temps[0]), "t_end": float(temps[-1])}
        if self.check_energy:
            info["max_energy_drift"] = float(drift)
        return SampleSet.from_reads(qubo, states, info)


def _enumerate_chunk(qubo, start, stop, n):
    k = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    x = ((k[:, None] >> shifts[None, :]) & 1).astype(float)
    return x, x @ qubo.linear + np.einsum("ki,ij,kj->k", x, qubo.quadratic, x) + qubo.offset


def brute_force_minimum(qubo: QuboProblem, chunk: int = 1 << 15):
    """Exact minimum by enumeration; ties go to the lexicographically smallest assignment."""
    n = qubo.n_vars
    if n > BRUTE_FORCE_MAX_VARS:
        raise CapacityError(f"{n} variables exceeds brute-force limit {BRUTE_FORCE_MAX_VARS}")
    best_e, best_x = np.inf, None
    # variable 0 is the most significant bit, so integer order == lexicographic order
    for start in range(0, 1 << n, chunk):
        x, e = _enumerate_chunk(qubo, start, min(start + chunk, 1 << n), n)
        i = int(np.argmin(e))
        if e[i] < best_e:
            best_e, best_x = float(e[i]), x[i].astype(np.int8)
    return best_x, best_e


class BruteForceSampler:
    """Returns the exact minimum, reported as occurring in every read."""

    name = "brute"

    def sample(self, qubo: QuboProblem, schedule: AnnealSchedule = AnnealSchedule()) -> SampleSet:
        x, e = brute_force_minimum(qubo)
        return SampleSet(x[None, :], np.array([e]), np.array([schedule.reads]),
                         {"sampler": self.name, "reads": schedule.reads})


SAMPLERS = {"sa": SimulatedAnnealingSampler, "brute": BruteForceSampler}


def get_sampler(name: str) -> Sampler:
    try:
        return SAMPLERS[name]()
    except KeyError:
        raise ConfigError(f"unknown sampler {name!r}; choose from {sorted(SAMPLERS)}") from None


def sample(qubo: QuboProblem, schedule: AnnealSchedule = AnnealSchedule()) -> SampleSet:
    return SimulatedAnnealingSampler().sample(qubo, schedule)


__all__ = [
    "AnnealSchedule", "Sample", "SampleSet", "Sampler", "SimulatedAnnealingSampler",
    "BruteForceSampler", "brute_force_minimum", "sample", "get_sampler", "read_seed",
]
