"""Fixed-point encoding of CI coefficients and the QUBO for xi(q, lambda).

Each coefficient uses ``K`` bits, bit ``alpha = 1..K-1`` weighted
``2**(alpha - K)`` and the last bit weighted ``-1``::

    c = sum_{alpha<K} 2**(alpha-K) q_alpha - q_K

so ``c`` lives on a grid over ``[-1, 1 - 2**(1-K)]`` with spacing
``2**(1-K)``. Variable ``i*K + (alpha-1)`` holds bit ``alpha`` of ``c_i``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DomainError

DEFAULT_K_BITS = 10
DEFAULT_MAX_SUBQUBO_VARS = 60


@dataclass(frozen=True)
class EncodingConfig:
    k_bits: int = DEFAULT_K_BITS

    def __post_init__(self):
        if self.k_bits < 2:
            raise ConfigError(f"k_bits must be >= 2, got {self.k_bits}")

    @property
    def resolution(self) -> float:
        return 2.0 ** (1 - self.k_bits)

    @property
    def value_range(self) -> tuple:
        return (-1.0, 1.0 - self.resolution)


def bit_weights(k_bits: int) -> np.ndarray:
    w = 2.0 ** (np.arange(1, k_bits) - k_bits)
    return np.append(w, -1.0)


def decode_coefficient(bits: Sequence[int]) -> float:
    """Value of one coefficient from its ``K`` bits (sign bit last)."""
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size < 2:
        raise DomainError("need at least two bits per coefficient")
    return float(bit_weights(bits.size) @ bits)


def decode(bits, k_bits: int) -> np.ndarray:
    """Coefficient vector from a flat ``N*K`` bit vector.

    Leading axes are kept, so a ``(B, N*K)`` batch decodes to ``(B, N)``.
    """
    bits = np.asarray(bits, dtype=float)
    if bits.ndim == 0 or bits.shape[-1] % k_bits:
        raise DomainError(f"{bits.shape[-1:]} bits is not a multiple of k_bits={k_bits}")
    return bits.reshape(*bits.shape[:-1], -1, k_bits) @ bit_weights(k_bits)


def encode(values, k_bits: int) -> np.ndarray:
    """Nearest grid point for each value, clipped to the representable range."""
    values = np.atleast_1d(np.asarray(values, dtype=float))
    res = 2.0 ** (1 - k_bits)
    # grid index m = (c + 1) / res, m in [0, 2**K - 1]
    m = np.clip(np.rint((values + 1.0) / res), 0, 2 ** k_bits - 1).astype(np.int64)
    # c = -1 + m*res  <=>  sign bit set and fraction m*res, or sign bit clear and fraction m*res - 1
    sign = m < 2 ** (k_bits - 1)
    frac = np.where(sign, m, m - 2 ** (k_bits - 1))
    out = np.zeros((values.size, k_bits), dtype=np.int8)
    for alpha in range(k_bits - 1):
        out[:, alpha] = (frac >> alpha) & 1
    out[:, -1] = sign
    return out.reshape(-1)


@dataclass(frozen=True)
class QuboProblem:
    """``E(q) = offset + sum_u linear[u] q_u + sum_{u<v} quadratic[u, v] q_u q_v``.

    ``quadratic`` is a dense strictly upper-triangular array.
    """

    linear: np.ndarray
    quadratic: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=float).reshape(-1)
        quad = np.asarray(self.quadratic, dtype=float)
        n = lin.size
        if quad.shape != (n, n):
            raise DomainError(f"quadratic has shape {quad.shape}, expected {(n, n)}")
        if np.any(np.tril(quad) != 0.0):
            raise DomainError("quadratic terms must be strictly upper-triangular")
        lin.setflags(write=False)
        quad.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "quadratic", quad)

    @property
    def n_vars(self) -> int:
        return self.linear.size

    @classmethod
    def from_dicts(cls, n_vars: int, linear=None, quadratic=None, offset=0.0) -> "QuboProblem":
        lin = np.zeros(n_vars)
        quad = np.zeros((n_vars, n_vars))
        for u, v in (linear or {}).items():
            lin[u] += v
        for (u, v), val in (quadratic or {}).items():
            if u == v:
                lin[u] += val
            else:
                quad[min(u, v), max(u, v)] += val
        return cls(lin, quad, float(offset))

    @classmethod
    def from_matrix(cls, m: np.ndarray, offset: float = 0.0) -> "QuboProblem":
        """Fold ``q^T M q`` into upper-triangular form using ``q*q = q``."""
        m = np.asarray(m, dtype=float)
        return cls(np.diag(m).copy(), np.triu(m + m.T, k=1), offset)

    def to_dicts(self):
        lin = {int(u): float(v) for u, v in enumerate(self.linear) if v != 0.0}
        us, vs = np.nonzero(self.quadratic)
        quad = {(int(u), int(v)): float(self.quadratic[u, v]) for u, v in zip(us, vs)}
        return lin, quad

    def couplings(self) -> np.ndarray:
        """Symmetric coupling matrix with zero diagonal."""
        return self.quadratic + self.quadratic.T

    def max_abs_coefficient(self) -> float:
        return float(max(np.max(np.abs(self.linear), initial=0.0),
                         np.max(np.abs(self.quadratic), initial=0.0)))

    def energy(self, bits) -> np.ndarray | float:
        """Energy of one assignment or of each row of a 2-D array."""
        x = np.asarray(bits, dtype=float)
        e = x @ self.linear + np.einsum("...i,ij,...j->...", x, self.quadratic, x) + self.offset
        return float(e) if x.ndim == 1 else e

    def to_triples(self) -> str:
        """Text export, one ``i j value`` line per nonzero term (``i == j`` for linear)."""
        lines = [f"# n_vars {self.n_vars} offset {float(self.offset)!r}"]
        for u, v in enumerate(self.linear):
            if v != 0.0:
                lines.append(f"{u} {u} {float(v)!r}")
        us, vs = np.nonzero(self.quadratic)
        for u, v in zip(us, vs):
            lines.append(f"{u} {v} {float(self.quadratic[u, v])!r}")
        return "\n".join(lines) + "\n"


def _shifted(h, lam) -> np.ndarray:
    m = np.asarray(getattr(h, "matrix", h), dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError("Hamiltonian must be square")
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-10:
        raise DomainError("Hamiltonian matrix is not symmetric")
    return m - lam * np.eye(m.shape[0])


def functional(c, h, lam) -> float:
    """``xi(c, lambda) = sum_ij c_i c_j (H_ij - lambda delta_ij)``."""
    c = np.asarray(c, dtype=float)
    return float(c @ _shifted(h, lam) @ c)


def build_qubo(h, lam: float, cfg: EncodingConfig = EncodingConfig()) -> QuboProblem:
    """QUBO whose energy equals ``xi(decode(q), lambda)`` for every ``q``.

    Substituting the encoding gives the dense ``NK x NK`` form
    ``(H - lambda I) kron (w w^T)``, which covers the fraction-fraction,
    fraction-sign and sign-sign products in one step; the diagonal is then
    folded into the linear terms.
    """
    a = _shifted(h, lam)
    w = bit_weights(cfg.k_bits)
    return QuboProblem.from_matrix(np.kron(a, np.outer(w, w)))


@dataclass(frozen=True)
class SubQubo:
    parent_coeff_indices: tuple
    problem: QuboProblem
    k_bits: int

    @property
    def var_map(self) -> list:
        """Local variable -> (coefficient index, bit position 0..K-1)."""
        return [(i, a) for i in self.parent_coeff_indices for a in range(self.k_bits)]

    def full_positions(self) -> np.ndarray:
        k = self.k_bits
        return np.array([i * k + a for i in self.parent_coeff_indices for a in range(k)], dtype=int)

    def restrict(self, full_bits) -> np.ndarray:
        return np.asarray(full_bits)[self.full_positions()]

    def embed(self, local_bits, full_bits: np.ndarray) -> np.ndarray:
        full_bits[self.full_positions()] = local_bits
        return full_bits


def partition_sub_qubos(h, lam: float, cfg: EncodingConfig, order: Iterable[int],
                        max_vars: int = DEFAULT_MAX_SUBQUBO_VARS) -> list:
    """Split the coefficients, taken in ``order``, into consecutive groups.

    Each group holds ``max_vars // K`` coefficients; couplings between
    groups are dropped from the sub-problems.
    """
    order = [int(i) for i in order]
    a = np.asarray(getattr(h, "matrix", h), dtype=float)
    n = a.shape[0]
    if sorted(order) != list(range(n)):
        raise DomainError("order must be a permutation of the coefficient indices")
    per_group = max_vars // cfg.k_bits
    if per_group < 1:
        raise ConfigError(f"max_vars={max_vars} cannot hold one coefficient of {cfg.k_bits} bits")
    subs = []
    for start in range(0, n, per_group):
        group = order[start:start + per_group]
        block = a[np.ix_(group, group)]
        subs.append(SubQubo(tuple(group), build_qubo(block, lam, cfg), cfg.k_bits))
    return subs


__all__ = [
    "EncodingConfig", "QuboProblem", "SubQubo", "bit_weights", "decode_coefficient",
    "decode", "encode", "build_qubo", "functional", "partition_sub_qubos",
    "DEFAULT_K_BITS", "DEFAULT_MAX_SUBQUBO_VARS",
]
