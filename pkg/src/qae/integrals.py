"""Electron-integral container and FCIDUMP reader/writer.

Integrals are stored densely over spatial orbitals in chemist notation
``(pq|rs)``. Files use 1-based orbital labels; everything in memory is
0-based, so the line ``v 1 2 1 2`` lands in ``two_body[0, 1, 0, 1]``.
"""
from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import TextIO, Union

import numpy as np

from .errors import ConflictError, ParseError

CONFLICT_TOL = 1e-10

_KEY_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=")


@dataclass(frozen=True)
class IntegralSet:
    n_orbitals: int
    n_electrons: int
    core_energy: float
    one_body: np.ndarray
    two_body: np.ndarray
    spin_restricted: bool = True
    ms2: int = 0
    orbsym: tuple = field(default=())

    def __post_init__(self):
        n = self.n_orbitals
        if self.one_body.shape != (n, n):
            raise ValueError(f"one_body has shape {self.one_body.shape}, expected {(n, n)}")
        if self.two_body.shape != (n, n, n, n):
            raise ValueError(f"two_body has shape {self.two_body.shape}, expected {(n,) * 4}")
        self.one_body.setflags(write=False)
        self.two_body.setflags(write=False)

    def _check(self, *idx):
        for i in idx:
            if not 0 <= i < self.n_orbitals:
                raise IndexError(f"orbital index {i} outside [0, {self.n_orbitals})")

    def get_one_body(self, p: int, q: int) -> float:
        self._check(p, q)
        return float(self.one_body[p, q])

    def get_two_body(self, p: int, q: int, r: int, s: int) -> float:
        """``(pq|rs)`` with 0-based indices; 0.0 for anything never stored."""
        self._check(p, q, r, s)
        return float(self.two_body[p, q, r, s])

    def with_one_body(self, one_body: np.ndarray) -> "IntegralSet":
        return IntegralSet(
            self.n_orbitals, self.n_electrons, self.core_energy,
            np.array(one_body, dtype=float), self.two_body.copy(),
            self.spin_restricted, self.ms2, self.orbsym,
        )

    @classmethod
    def from_arrays(cls, one_body, two_body, core_energy=0.0, n_electrons=0, symmetrize=False):
        h = np.array(one_body, dtype=float)
        g = np.array(two_body, dtype=float)
        if symmetrize:
            h = 0.5 * (h + h.T)
            g = symmetrize_eri(g)
        return cls(h.shape[0], int(n_electrons), float(core_energy), h, g)


def symmetrize_eri(g: np.ndarray) -> np.ndarray:
    """Average a 4-index array over the 8 real-orbital permutations.

    Done as three pairwise averages; since ``a + b == b + a`` in floating
    point, the result is exactly symmetric, not just to rounding.
    """
    g = 0.5 * (g + g.transpose(1, 0, 2, 3))
    g = 0.5 * (g + g.transpose(0, 1, 3, 2))
    return 0.5 * (g + g.transpose(2, 3, 0, 1))


def eri_images(p, q, r, s):
    """The (up to 8) index tuples equal to ``(pq|rs)`` for real orbitals."""
    return {(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
            (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)}


def random_integrals(n_orbitals, n_electrons, rng, scale=1.0) -> IntegralSet:
    """Random real integrals with the full 8-fold symmetry (for testing)."""
    n = n_orbitals
    h = rng.uniform(-scale, scale, (n, n))
    g = rng.uniform(-scale, scale, (n, n, n, n))
    return IntegralSet.from_arrays(h, g, core_energy=rng.uniform(-1, 1),
                                   n_electrons=n_electrons, symmetrize=True)


def _parse_header(lines):
    """Consume the namelist header; returns (fields, number of header lines)."""
    if not lines or not lines[0].lstrip().upper().startswith("&FCI"):
        raise ParseError("expected '&FCI' namelist header", 1)
    chunks = []
    end = None
    for i, line in enumerate(lines):
        text = line.strip()
        upper = text.upper()
        if i == 0:
            text = text[4:]
            upper = upper[4:]
        stop = None
        for marker in ("&END", "/"):
            j = upper.find(marker)
            if j >= 0 and (stop is None or j < stop):
                stop = j
        if stop is not None:
            chunks.append(text[:stop])
            end = i
            break
        chunks.append(text)
    if end is None:
        raise ParseError("namelist header is not terminated by '&END' or '/'", len(lines))

    body = " ".join(chunks)
    parts = _KEY_RE.split(body)
    if parts[0].strip(" ,"):
        raise ParseError(f"unexpected text in header: {parts[0].strip()!r}", 1)
    fields = {}
    for key, value in zip(parts[1::2], parts[2::2]):
        fields[key.upper()] = [v for v in (x.strip() for x in value.split(",")) if v]
    for key in ("NORB", "NELEC"):
        if key not in fields or len(fields[key]) != 1:
            raise ParseError(f"header does not declare {key}", 1)
    try:
        fields["NORB"] = int(fields["NORB"][0])
        fields["NELEC"] = int(fields["NELEC"][0])
        fields["MS2"] = int(fields.get("MS2", ["0"])[0])
        if "IUHF" in fields and int(fields["IUHF"][0]) != 0:
            raise ParseError("unrestricted (IUHF) integral files are not supported", 1)
    except ValueError as exc:
        raise ParseError(f"non-integer header value: {exc}", 1) from None
    if fields["NORB"] < 1 or fields["NELEC"] < 0:
        raise ParseError("NORB must be positive and NELEC non-negative", 1)
    return fields, end + 1


def _to_float(token, lineno):
    try:
        return float(token.replace("D", "E").replace("d", "e"))
    except ValueError:
        raise ParseError(f"cannot read value {token!r}", lineno) from None


def parse_fcidump(source: Union[str, bytes, TextIO]) -> IntegralSet:
    """Read FCIDUMP text (a string, bytes or an open text stream).

    Raises ``ParseError`` for a malformed header or body line,
    ``IndexError`` for orbital labels outside ``1..NORB`` and
    ``ConflictError`` when two symmetry-equivalent entries differ by more
    than 1e-10.
    """
    if isinstance(source, bytes):
        source = source.decode()
    if not isinstance(source, str):
        source = source.read()
    lines = source.splitlines()
    fields, start = _parse_header(lines)
    n = fields["NORB"]

    h = np.zeros((n, n))
    g = np.zeros((n, n, n, n))
    h_set = np.zeros((n, n), dtype=bool)
    g_set = np.zeros((n, n, n, n), dtype=bool)
    core = 0.0
    core_set = False

    def store(arr, mask, keys, value, lineno):
        for k in keys:
            if mask[k] and abs(arr[k] - value) > CONFLICT_TOL:
                raise ConflictError(
                    f"line {lineno}: value {value!r} conflicts with earlier {float(arr[k])!r} "
                    f"for integral {tuple(i + 1 for i in k)}")
        for k in keys:
            arr[k] = value
            mask[k] = True

    for lineno, line in enumerate(lines[start:], start=start + 1):
        tokens = line.split()
        if not tokens:
            continue
        if "(" in line or len(tokens) == 6:
            raise ParseError("complex integrals are not supported", lineno)
        if len(tokens) != 5:
            raise ParseError(f"expected 'value i j k l', got {len(tokens)} fields", lineno)
        value = _to_float(tokens[0], lineno)
        try:
            i, j, k, l = (int(t) for t in tokens[1:])
        except ValueError:
            raise ParseError("orbital labels must be integers", lineno) from None
        for label in (i, j, k, l):
            if not 0 <= label <= n:
                raise IndexError(f"line {lineno}: orbital label {label} outside [1, {n}]")
        if i == j == k == l == 0:
            if core_set and abs(core - value) > CONFLICT_TOL:
                raise ConflictError(f"line {lineno}: second core energy {value!r} != {core!r}")
            core, core_set = value, True
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                # orbital energies (value i 0 0 0) carry no Hamiltonian information
                continue
            p, q = i - 1, j - 1
            store(h, h_set, {(p, q), (q, p)}, value, lineno)
        else:
            if 0 in (i, j, k, l):
                raise ParseError("two-electron entry with a zero label", lineno)
            store(g, g_set, eri_images(i - 1, j - 1, k - 1, l - 1), value, lineno)

    orbsym = tuple(int(x) for x in fields.get("ORBSYM", []) if x.lstrip("-").isdigit())
    return IntegralSet(n, fields["NELEC"], core, h, g, True, fields["MS2"], orbsym)


def read_fcidump(path) -> IntegralSet:
    with open(path) as fh:
        return parse_fcidump(fh)


def write_fcidump(ints: IntegralSet, stream: TextIO | None = None, tol: float = 0.0) -> str:
    """Serialize with one entry per symmetry class; values printed round-trip exact."""
    out = stream if stream is not None else io.StringIO()
    n = ints.n_orbitals
    orbsym = ints.orbsym or (1,) * n
    out.write(f" &FCI NORB={n},NELEC={ints.n_electrons},MS2={ints.ms2},\n")
    out.write("  ORBSYM=" + ",".join(str(s) for s in orbsym) + ",\n")
    out.write("  ISYM=1,\n &END\n")
    g = ints.two_body
    for p in range(n):
        for q in range(p + 1):
            pq = p * (p + 1) // 2 + q
            for r in range(n):
                for s in range(r + 1):
                    if r * (r + 1) // 2 + s > pq:
                        continue
                    v = g[p, q, r, s]
                    if v != 0.0 and abs(v) > tol:
                        out.write(f"{float(v)!r} {p + 1} {q + 1} {r + 1} {s + 1}\n")
    for p in range(n):
        for q in range(p + 1):
            v = ints.one_body[p, q]
            if v != 0.0 and abs(v) > tol:
                out.write(f"{float(v)!r} {p + 1} {q + 1} 0 0\n")
    out.write(f"{float(ints.core_energy)!r} 0 0 0 0\n")
    return out.getvalue() if stream is None else ""


def parse_dipole_integrals(source: Union[str, TextIO], n_orbitals: int) -> np.ndarray:
    """Read ``value p q`` lines (1-based) into a symmetric matrix."""
    if not isinstance(source, str):
        source = source.read()
    d = np.zeros((n_orbitals, n_orbitals))
    seen = np.zeros_like(d, dtype=bool)
    for lineno, line in enumerate(source.splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        tokens = text.split()
        if len(tokens) != 3:
            raise ParseError(f"expected 'value p q', got {len(tokens)} fields", lineno)
        value = _to_float(tokens[0], lineno)
        try:
            p, q = int(tokens[1]) - 1, int(tokens[2]) - 1
        except ValueError:
            raise ParseError("orbital labels must be integers", lineno) from None
        if not (0 <= p < n_orbitals and 0 <= q < n_orbitals):
            raise IndexError(f"line {lineno}: orbital label outside [1, {n_orbitals}]")
        for k in {(p, q), (q, p)}:
            if seen[k] and abs(d[k] - value) > CONFLICT_TOL:
                raise ConflictError(f"line {lineno}: dipole integral conflicts with earlier entry")
            d[k] = value
            seen[k] = True
    return d


def freeze_core(ints: IntegralSet, n_frozen: int, n_active: int) -> IntegralSet:
    """Fold ``n_frozen`` doubly occupied orbitals into the core energy.

    Returns integrals over orbitals ``n_frozen .. n_frozen + n_active - 1``
    with the frozen-core mean field added to the one-body part.
    """
    if n_frozen < 0 or n_active < 1 or n_frozen + n_active > ints.n_orbitals:
        raise ValueError(
            f"cannot freeze {n_frozen} and keep {n_active} of {ints.n_orbitals} orbitals")
    h, g = ints.one_body, ints.two_body
    c = slice(0, n_frozen)
    a = slice(n_frozen, n_frozen + n_active)
    core = ints.core_energy
    if n_frozen:
        core += 2.0 * np.trace(h[c, c])
        gc = g[c, c, c, c]
        core += 2.0 * np.einsum("iijj->", gc) - np.einsum("ijji->", gc)
    h_eff = h[a, a].copy()
    if n_frozen:
        h_eff += 2.0 * np.einsum("pqii->pq", g[a, a, c, c]) - np.einsum("piiq->pq", g[a, c, c, a])
    g_eff = g[a, a, a, a].copy()
    n_el = ints.n_electrons - 2 * n_frozen
    if n_el < 0:
        raise ValueError("more frozen electrons than electrons")
    return IntegralSet(n_active, n_el, float(core), h_eff, g_eff,
                       ints.spin_restricted, ints.ms2,
                       ints.orbsym[a] if ints.orbsym else ())


__all__ = [
    "IntegralSet", "parse_fcidump", "read_fcidump", "write_fcidump",
    "parse_dipole_integrals", "freeze_core", "random_integrals", "symmetrize_eri",
    "eri_images",
]
