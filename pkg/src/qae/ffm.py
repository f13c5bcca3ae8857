"""Permanent dipole moments from field-dependent energies (finite-field method)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, TextIO, Union

from .errors import DomainError, ParseError

AU_TO_DEBYE = 2.541746473
ANGSTROM_TO_BOHR = 1.8897259886
DEFAULT_EPSILON = 1e-3

# nuclear charges of the elements appearing in the shipped fixtures
ATOMIC_NUMBERS = {"H": 1, "Be": 4, "F": 9, "Mg": 12, "Ca": 20, "Sr": 38, "Ba": 56}


@dataclass(frozen=True)
class FfmInput:
    e_plus: float
    e_minus: float
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError(f"field strength must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class Geometry:
    """Point nuclei on the z axis: ``(Z, z in bohr)`` pairs."""

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((int(z), float(r)) for z, r in self.atoms)
        for z, _ in atoms:
            if z < 1:
                raise DomainError(f"nuclear charge must be a positive integer, got {z}")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def diatomic(cls, z_origin: int, z_other: int, bond_angstrom: float) -> "Geometry":
        """First atom at the origin, second at ``+bond`` along z."""
        return cls(((z_origin, 0.0), (z_other, bond_angstrom * ANGSTROM_TO_BOHR)))

    def translated(self, dz_bohr: float) -> "Geometry":
        return Geometry(tuple((z, r + dz_bohr) for z, r in self.atoms))


@dataclass(frozen=True)
class DipoleResult:
    electronic_slope: float
    nuclear_term: float
    pdm_au: float
    pdm_debye: float

    def to_dict(self) -> dict:
        return {"electronic_slope": self.electronic_slope, "nuclear_term": self.nuclear_term,
                "pdm_au": self.pdm_au, "pdm_debye": self.pdm_debye}


def au_to_debye(x: float) -> float:
    return x * AU_TO_DEBYE


def debye_to_au(x: float) -> float:
    return x / AU_TO_DEBYE


def central_difference(inp: FfmInput) -> float:
    """``(E(+eps) - E(-eps)) / (2 eps)``, exact for energies quadratic in the field."""
    if inp.epsilon == 0:
        raise DomainError("field strength is zero")
    return (inp.e_plus - inp.e_minus) / (2.0 * inp.epsilon)


def nuclear_dipole_z(g: Geometry) -> float:
    return float(sum(z * r for z, r in g.atoms))


def assemble_pdm(inp: FfmInput, g: Geometry, signed: bool = False) -> DipoleResult:
    """Combine the electronic energy slope with the nuclear dipole.

    The moment is ``nuclear - slope``; by default its magnitude is reported
    (``signed=True`` keeps the sign). Both raw terms are kept in the result.
    """
    slope = central_difference(inp)
    nuc = nuclear_dipole_z(g) if g.atoms else 0.0
    mu = nuc - slope
    if not signed:
        mu = abs(mu)
    return DipoleResult(slope, nuc, mu, au_to_debye(mu))


def parse_geometry(source: Union[str, TextIO]) -> Geometry:
    """Lines of ``Z z_angstrom``; ``Z`` may also be an element symbol. ``#`` starts a comment."""
    if not isinstance(source, str):
        source = source.read()
    atoms = []
    for lineno, line in enumerate(source.splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        tokens = text.split()
        if len(tokens) != 2:
            raise ParseError("expected 'Z z_coordinate_angstrom'", lineno)
        label, coord = tokens
        if label in ATOMIC_NUMBERS:
            z = ATOMIC_NUMBERS[label]
        else:
            try:
                z = int(label)
            except ValueError:
                raise ParseError(f"unknown nuclear charge {label!r}", lineno) from None
        try:
            r = float(coord) * ANGSTROM_TO_BOHR
        except ValueError:
            raise ParseError(f"cannot read coordinate {coord!r}", lineno) from None
        atoms.append((z, r))
    if not atoms:
        raise ParseError("geometry file contains no atoms")
    return Geometry(tuple(atoms))


def read_geometry(path) -> Geometry:
    with open(path) as fh:
        return parse_geometry(fh)


def percentage_error(value: float, reference: float) -> float:
    return abs(value - reference) / abs(reference) * 100.0


__all__ = [
    "FfmInput", "Geometry", "DipoleResult", "central_difference", "nuclear_dipole_z",
    "assemble_pdm", "parse_geometry", "read_geometry", "au_to_debye", "debye_to_au",
    "percentage_error", "AU_TO_DEBYE", "ANGSTROM_TO_BOHR", "DEFAULT_EPSILON",
]
