"""Determinant basis, Slater-Condon matrix elements and perturbative selection.

A determinant is a plain ``int`` bitmask over spin orbitals. Spin orbital
``2p`` is the alpha partner of spatial orbital ``p`` and ``2p + 1`` the beta
one. Fermionic phases follow ascending spin-orbital order inside each
determinant, i.e. ``|D> = a+_{i1} a+_{i2} ... |0>`` with ``i1 < i2 < ...``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import CapacityError, ConfigError, DomainError
from .integrals import IntegralSet

DEFAULT_BASIS_CAP = 4096
DENOMINATOR_FLOOR = 1e-8

Determinant = int


@dataclass(frozen=True)
class ActiveSpace:
    n_spin_orbitals: int
    n_electrons: int
    label: str = ""

    def __post_init__(self):
        if self.n_spin_orbitals < 1 or self.n_electrons < 0:
            raise DomainError("active space needs >= 1 spin orbital and >= 0 electrons")
        if self.n_electrons > self.n_spin_orbitals:
            raise DomainError(
                f"{self.n_electrons} electrons do not fit in {self.n_spin_orbitals} spin orbitals")

    @classmethod
    def from_label(cls, label: str) -> "ActiveSpace":
        """Parse ``"8o,3e"`` (8 spatial orbitals, 3 electrons)."""
        m = re.fullmatch(r"\s*\(?\s*(\d+)\s*o\s*,\s*(\d+)\s*e\s*\)?\s*", label, re.IGNORECASE)
        if not m:
            raise ConfigError(f"cannot parse active space {label!r}; expected e.g. '8o,3e'")
        n_orb, n_el = int(m.group(1)), int(m.group(2))
        return cls(2 * n_orb, n_el, f"{n_orb}o,{n_el}e")

    @property
    def n_orbitals(self) -> int:
        return self.n_spin_orbitals // 2

    @property
    def reference(self) -> Determinant:
        return (1 << self.n_electrons) - 1


@dataclass(frozen=True)
class FieldSpec:
    epsilon: float
    dipole_integrals: Optional[np.ndarray] = None

    def __post_init__(self):
        d = self.dipole_integrals
        if d is not None:
            d = np.asarray(d, dtype=float)
            if d.ndim != 2 or d.shape[0] != d.shape[1] or not np.allclose(d, d.T, atol=1e-12, rtol=0):
                raise DomainError("dipole integrals must be a symmetric square matrix")
            object.__setattr__(self, "dipole_integrals", d)


@dataclass(frozen=True)
class CiHamiltonian:
    matrix: np.ndarray
    basis: tuple = ()
    scalar_offset: float = 0.0
    n_spin_orbitals: int = 0
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DomainError(f"Hamiltonian must be a non-empty square matrix, got {m.shape}")
        if self.basis and len(self.basis) != m.shape[0]:
            raise DomainError("basis length does not match matrix dimension")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "basis", tuple(self.basis))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def is_symmetric(self, tol=1e-10) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.T), initial=0.0) <= tol)

    def permuted(self, order) -> "CiHamiltonian":
        order = np.asarray(order, dtype=int)
        basis = tuple(self.basis[i] for i in order) if self.basis else ()
        return CiHamiltonian(self.matrix[np.ix_(order, order)], basis,
                             self.scalar_offset, self.n_spin_orbitals, dict(self.diagnostics))


def occupied(det: Determinant) -> list:
    out = []
    i = 0
    while det:
        if det & 1:
            out.append(i)
        det >>= 1
        i += 1
    return out


def excitation_rank(det: Determinant, reference: Determinant) -> int:
    return (det & ~reference).bit_count()


def fci_basis_size(space: ActiveSpace) -> int:
    return comb(space.n_spin_orbitals, space.n_electrons)


def generate_fci_basis(space: ActiveSpace, cap: int = DEFAULT_BASIS_CAP) -> list:
    """Every determinant of the active space, reference first.

    Ordered by excitation rank relative to the Aufbau reference, then
    lexicographically by occupied spin-orbital list.
    """
    size = fci_basis_size(space)
    if size > cap:
        raise CapacityError(f"FCI basis of {size} determinants exceeds cap {cap}")
    ref = space.reference
    dets = []
    for occ in combinations(range(space.n_spin_orbitals), space.n_electrons):
        d = 0
        for i in occ:
            d |= 1 << i
        dets.append(d)
    # combinations() is already lexicographic; a stable sort keeps it within a rank
    dets.sort(key=lambda d: excitation_rank(d, ref))
    return dets


class SpinOrbitalIntegrals:
    """Spin-orbital one-body matrix and antisymmetrized ``<pq||rs>``."""

    def __init__(self, ints: IntegralSet, one_body: Optional[np.ndarray] = None):
        h = ints.one_body if one_body is None else one_body
        n = ints.n_orbitals
        m = 2 * n
        spatial = np.arange(m) // 2
        spin = np.arange(m) % 2
        same = spin[:, None] == spin[None, :]
        self.h = np.where(same, h[np.ix_(spatial, spatial)], 0.0)
        # <PQ|RS> = (PR|QS) * d(sP, sR) * d(sQ, sS)
        g = ints.two_body[np.ix_(spatial, spatial, spatial, spatial)]  # (PR|QS) indexed [P,R,Q,S]
        g = g * same[:, :, None, None] * same[None, None, :, :]
        phys = g.transpose(0, 2, 1, 3)  # [P,Q,R,S]
        self.g = phys - phys.transpose(0, 1, 3, 2)
        self.n_spin_orbitals = m
        self.core_energy = ints.core_energy


def _sign_annihilate(det, q):
    return (det & ((1 << q) - 1)).bit_count() & 1


def _single_phase(a, b, p, q):
    """<a| a+_p a_q |b> for a = b - q + p."""
    s = _sign_annihilate(b, q)
    s += _sign_annihilate(b ^ (1 << q), p)
    return -1.0 if s & 1 else 1.0


def _double_phase(b, p1, p2, q1, q2):
    """<a| a+_p1 a+_p2 a_q2 a_q1 |b>."""
    s = _sign_annihilate(b, q1)
    d = b ^ (1 << q1)
    s += _sign_annihilate(d, q2)
    d ^= 1 << q2
    s += _sign_annihilate(d, p2)
    d |= 1 << p2
    s += _sign_annihilate(d, p1)
    return -1.0 if s & 1 else 1.0


def _element(a, b, so):
    diff = a ^ b
    n_diff = diff.bit_count()
    if n_diff > 4:
        return 0.0
    h, g = so.h, so.g
    if n_diff == 0:
        return _diagonal_energy(occupied(a), so)
    if n_diff == 2:
        (p,) = occupied(a & diff)
        (q,) = occupied(b & diff)
        common = occupied(a & b)
        v = h[p, q] + sum(g[p, k, q, k] for k in common)
        return _single_phase(a, b, p, q) * float(v)
    p1, p2 = occupied(a & diff)
    q1, q2 = occupied(b & diff)
    return _double_phase(b, p1, p2, q1, q2) * float(g[p1, p2, q1, q2])


def _as_spin_integrals(ints) -> SpinOrbitalIntegrals:
    return ints if isinstance(ints, SpinOrbitalIntegrals) else SpinOrbitalIntegrals(ints)


def slater_condon_element(a: Determinant, b: Determinant,
                          ints: Union[IntegralSet, SpinOrbitalIntegrals]) -> float:
    """Electronic matrix element ``<a|H|b>`` (no core energy).

    Pass a prepared :class:`SpinOrbitalIntegrals` when evaluating many
    elements; an :class:`IntegralSet` is converted on every call.
    """
    if a.bit_count() != b.bit_count():
        raise DomainError(f"electron counts differ: {a.bit_count()} vs {b.bit_count()}")
    so = _as_spin_integrals(ints)
    limit = 1 << so.n_spin_orbitals
    if a >= limit or b >= limit or a < 0 or b < 0:
        raise DomainError("determinant occupies spin orbitals outside the integral set")
    return _element(a, b, so)


def _diagonal_energy(occ, so):
    idx = np.asarray(occ, dtype=int)
    return float(so.h[idx, idx].sum() + 0.5 * so.g[idx[:, None], idx[None, :], idx[:, None], idx[None, :]].sum())


def assemble_hamiltonian(basis: Sequence[Determinant], ints: IntegralSet,
                         field: Optional[FieldSpec] = None,
                         cap: int = DEFAULT_BASIS_CAP) -> CiHamiltonian:
    """Dense CI matrix over ``basis``; the core energy becomes ``scalar_offset``.

    With a field, the one-body integrals become ``h + epsilon * O`` before
    the Slater-Condon rules are applied. For field-dependent integral files
    call this once per file with ``field=None`` instead.
    """
    basis = list(basis)
    if not basis:
        raise DomainError("basis is empty")
    if len(basis) > cap:
        raise CapacityError(f"basis of {len(basis)} determinants exceeds cap {cap}")
    one_body = None
    if field is not None and field.epsilon != 0.0:
        if field.dipole_integrals is None:
            raise ConfigError("nonzero field strength requires dipole integrals "
                              "(or pre-perturbed integrals with field=None)")
        if field.dipole_integrals.shape != ints.one_body.shape:
            raise ConfigError("dipole integrals do not match the orbital count")
        one_body = ints.one_body + field.epsilon * field.dipole_integrals
    so = SpinOrbitalIntegrals(ints, one_body)

    n_el = basis[0].bit_count()
    limit = 1 << so.n_spin_orbitals
    for d in basis:
        if d.bit_count() != n_el:
            raise DomainError("determinants in a basis must share the electron count")
        if not 0 <= d < limit:
            raise DomainError("determinant occupies spin orbitals outside the integral set")

    n = len(basis)
    mat = np.zeros((n, n))
    for i, a in enumerate(basis):
        mat[i, i] = _diagonal_energy(occupied(a), so)
        for j in range(i):
            b = basis[j]
            if (a ^ b).bit_count() > 4:
                continue
            v = _element(a, b, so)
            mat[i, j] = v
            mat[j, i] = v
    return CiHamiltonian(mat, tuple(basis), float(ints.core_energy), so.n_spin_orbitals)


class PerturbativeEstimate(NamedTuple):
    coefficients: np.ndarray
    clamped: tuple


def perturbative_coefficients(h: CiHamiltonian) -> PerturbativeEstimate:
    """First-order coefficients ``H_i0 / (H_00 - H_ii)`` relative to basis[0].

    Denominators smaller than 1e-8 in magnitude are replaced by a
    sign-preserving 1e-8; their indices are reported in ``clamped``.
    """
    m = h.matrix
    denom = m[0, 0] - np.diag(m)
    small = np.abs(denom) < DENOMINATOR_FLOOR
    small[0] = False
    denom = np.where(small, np.copysign(DENOMINATOR_FLOOR, denom), denom)
    c = np.empty(h.size)
    c[0] = 1.0
    c[1:] = m[1:, 0] / denom[1:]
    return PerturbativeEstimate(c, tuple(int(i) for i in np.flatnonzero(small)))


def perturbative_order(h: CiHamiltonian) -> np.ndarray:
    """Reference first, then descending ``|c_i|``; ties keep basis order."""
    c = np.abs(perturbative_coefficients(h).coefficients)
    rest = sorted(range(1, h.size), key=lambda i: (-c[i], i))
    return np.array([0] + rest, dtype=int)


def select_determinants(h: CiHamiltonian, n_keep: int) -> CiHamiltonian:
    """Keep the reference and the ``n_keep - 1`` largest perturbative coefficients."""
    if not 1 <= n_keep <= h.size:
        raise DomainError(f"n_keep must lie in [1, {h.size}], got {n_keep}")
    est = perturbative_coefficients(h)
    order = perturbative_order(h)[:n_keep]
    sel = h.permuted(order)
    sel.diagnostics.update(clamped_denominators=len(est.clamped), n_full=h.size, n_keep=n_keep)
    return sel


__all__ = [
    "ActiveSpace", "FieldSpec", "CiHamiltonian", "Determinant", "SpinOrbitalIntegrals",
    "generate_fci_basis", "fci_basis_size", "slater_condon_element", "assemble_hamiltonian",
    "perturbative_coefficients", "perturbative_order", "select_determinants",
    "PerturbativeEstimate", "occupied", "excitation_rank",
]
