"""Reference results that do not share code paths with the annealing pipeline.

* dense symmetric eigensolver (LAPACK through numpy)
* CI matrices built by literally applying creation/annihilation operators
  to occupation-number vectors
* QUBO minimum by plain itertools enumeration
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .ci import DEFAULT_BASIS_CAP, ActiveSpace, generate_fci_basis
from .errors import CapacityError
from .integrals import IntegralSet

BRUTE_FORCE_MAX_SPIN_ORBITALS = 8
QUBO_ENUMERATION_MAX_VARS = 16


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    ground_vector: np.ndarray


def _matrix(h):
    return np.asarray(getattr(h, "matrix", h), dtype=float), float(getattr(h, "scalar_offset", 0.0))


def spectrum(h, cap: int = DEFAULT_BASIS_CAP) -> Spectrum:
    """All eigenvalues (ascending, offset included) and the sign-fixed ground vector."""
    m, offset = _matrix(h)
    if m.shape[0] > cap:
        raise CapacityError(f"matrix dimension {m.shape[0]} exceeds cap {cap}")
    w, v = np.linalg.eigh(m)
    g = v[:, 0].copy()
    nz = np.flatnonzero(np.abs(g) > 1e-12)
    if nz.size and g[nz[0]] < 0:
        g = -g
    return Spectrum(w + offset, g)


def exact_ground(h, cap: int = DEFAULT_BASIS_CAP):
    """Lowest eigenvalue plus scalar offset, and its unit eigenvector."""
    s = spectrum(h, cap)
    return float(s.eigenvalues[0]), s.ground_vector


# --- occupation-number operator algebra -------------------------------------

def _annihilate(occ, p):
    if not occ[p]:
        return None, 0
    sign = -1 if sum(occ[:p]) % 2 else 1
    out = list(occ)
    out[p] = 0
    return tuple(out), sign


def _create(occ, p):
    if occ[p]:
        return None, 0
    sign = -1 if sum(occ[:p]) % 2 else 1
    out = list(occ)
    out[p] = 1
    return tuple(out), sign


def _apply(ops, occ):
    """Apply ``ops`` right to left; each op is ('+' or '-', orbital)."""
    sign = 1
    for kind, p in reversed(ops):
        occ, s = (_create if kind == "+" else _annihilate)(occ, p)
        if occ is None:
            return None, 0
        sign *= s
    return occ, sign


def _spin_integrals(ints: IntegralSet):
    m = 2 * ints.n_orbitals
    h = np.zeros((m, m))
    g = np.zeros((m, m, m, m))
    for p in range(m):
        for q in range(m):
            if p % 2 == q % 2:
                h[p, q] = ints.one_body[p // 2, q // 2]
    for p, q, r, s in product(range(m), repeat=4):
        if p % 2 == r % 2 and q % 2 == s % 2:
            # g_pqrs = <pq|rs> = (pr|qs)
            g[p, q, r, s] = ints.two_body[p // 2, r // 2, q // 2, s // 2]
    return h, g


def brute_force_hamiltonian(ints: IntegralSet, space: ActiveSpace,
                            basis: Optional[Sequence[int]] = None) -> np.ndarray:
    """``<i|H|j>`` from ``sum h_pq a+_p a_q + 1/2 sum g_pqrs a+_p a+_q a_s a_r``.

    Rows and columns follow ``basis`` (default: the CI module's FCI order);
    the core energy is not included.
    """
    m = space.n_spin_orbitals
    if m > BRUTE_FORCE_MAX_SPIN_ORBITALS:
        raise CapacityError(f"{m} spin orbitals exceeds the brute-force limit "
                            f"{BRUTE_FORCE_MAX_SPIN_ORBITALS}")
    if m != 2 * ints.n_orbitals:
        raise CapacityError("active space must span every orbital of the integral set")
    if basis is None:
        basis = generate_fci_basis(space)
    states = [tuple((d >> k) & 1 for k in range(m)) for d in basis]
    index = {s: i for i, s in enumerate(states)}
    h, g = _spin_integrals(ints)

    out = np.zeros((len(states), len(states)))
    for j, ket in enumerate(states):
        for p, q in product(range(m), repeat=2):
            if h[p, q] == 0.0:
                continue
            occ, sign = _apply([("+", p), ("-", q)], ket)
            if occ in index:
                out[index[occ], j] += sign * h[p, q]
        occupied = [k for k in range(m) if ket[k]]
        for r, s in product(occupied, repeat=2):
            if r == s:
                continue
            for p, q in product(range(m), repeat=2):
                if g[p, q, r, s] == 0.0:
                    continue
                occ, sign = _apply([("+", p), ("+", q), ("-", s), ("-", r)], ket)
                if occ in index:
                    out[index[occ], j] += 0.5 * sign * g[p, q, r, s]
    return out


def enumerate_qubo_minimum(qubo):
    """Minimum of a QUBO by walking ``itertools.product`` over the dict form.

    Ties keep the first assignment in lexicographic order.
    """
    n = qubo.n_vars
    if n > QUBO_ENUMERATION_MAX_VARS:
        raise CapacityError(f"{n} variables exceeds enumeration limit {QUBO_ENUMERATION_MAX_VARS}")
    linear, quadratic = qubo.to_dicts()
    best = None
    for x in product((0, 1), repeat=n):
        e = qubo.offset
        for u, v in linear.items():
            if x[u]:
                e += v
        for (u, v), val in quadratic.items():
            if x[u] and x[v]:
                e += val
        if best is None or e < best[1]:
            best = (x, e)
    return np.array(best[0], dtype=np.int8), best[1]


__all__ = ["Spectrum", "spectrum", "exact_ground", "brute_force_hamiltonian", "enumerate_qubo_minimum"]
