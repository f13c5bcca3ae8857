"""Dipole-moment benchmark over the shipped reference energy tables.

The fixture directory holds ``energies.csv`` (ground-state energies at
``-eps`` and ``+eps`` for FCI, SA and QAE), ``pdm.csv`` (published dipole
moments), ``pdm_errors.csv`` (published percentage errors) and one
``geometries/<molecule>.geom`` file per molecule.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .ffm import DEFAULT_EPSILON, FfmInput, assemble_pdm, percentage_error, read_geometry

FIXTURE_ENV = "QAE_FIXTURE_ROOT"
METHODS = ("fci", "sa", "qae")
# published dipoles carry 3 decimals (+-5e-4 D); energies 6 decimals (~1e-3 D in the slope)
PDM_MISMATCH_TOL = 1e-2
PDM_ROUNDING = 5e-4


class FixtureError(FileNotFoundError):
    pass


def default_fixture_root() -> Path:
    env = os.environ.get(FIXTURE_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("qae") / "data"))


def _read_csv(path: Path) -> list:
    if not path.is_file():
        raise FixtureError(f"missing fixture {path}")
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@dataclass
class BenchmarkRow:
    molecule: str
    basis: str
    active_space: str
    pdm: dict            # method -> debye, computed from the energy table
    published_pdm: dict      # method -> debye as published (may be empty)
    err: dict            # method -> % error vs computed FCI pdm
    err_from_published: dict  # method -> % error recomputed from published pdms
    published_err: dict      # method -> published % error
    flags: list

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def load_fixtures(root: Optional[Path] = None):
    root = Path(root) if root is not None else default_fixture_root()
    if not root.is_dir():
        raise FixtureError(f"fixture directory {root} does not exist")
    energies = _read_csv(root / "energies.csv")
    if not energies:
        raise FixtureError(f"{root / 'energies.csv'} has no rows")
    pdm = {(r["molecule"], r["basis"], r["active_space"]): r for r in _read_csv(root / "pdm.csv")} \
        if (root / "pdm.csv").is_file() else {}
    errs = {(r["molecule"], r["basis"], r["active_space"]): r for r in _read_csv(root / "pdm_errors.csv")} \
        if (root / "pdm_errors.csv").is_file() else {}
    return root, energies, pdm, errs


def rounding_bound(value: float, reference: float, half_ulp: float = PDM_ROUNDING) -> float:
    """Largest change of ``percentage_error(value, reference)`` under rounding of both inputs."""
    f = abs(reference)
    return 100.0 * (2 * half_ulp / f + abs(value - reference) * half_ulp / (f * (f - half_ulp)))


def run_benchmark(root: Optional[Path] = None, epsilon: float = DEFAULT_EPSILON,
                  molecules=None, active_spaces=None) -> list:
    root, energies, pdm_table, err_table = load_fixtures(root)
    geoms = {}
    rows = []
    for rec in energies:
        mol, basis, act = rec["molecule"], rec["basis"], rec["active_space"]
        if molecules and mol not in molecules:
            continue
        if active_spaces and act not in active_spaces:
            continue
        if mol not in geoms:
            path = root / "geometries" / f"{mol}.geom"
            if not path.is_file():
                raise FixtureError(f"missing geometry {path}")
            geoms[mol] = read_geometry(path)
        pdm = {}
        for m in METHODS:
            inp = FfmInput(float(rec[f"{m}_plus"]), float(rec[f"{m}_minus"]), epsilon)
            pdm[m] = assemble_pdm(inp, geoms[mol]).pdm_debye
        printed = pdm_table.get((mol, basis, act), {})
        published_pdm = {m: float(printed[m]) for m in ("rccsd",) + METHODS if printed.get(m)}
        err = {m: percentage_error(pdm[m], pdm["fci"]) for m in ("sa", "qae")}
        err_pub = {}
        if "fci" in published_pdm:
            err_pub = {m: percentage_error(published_pdm[m], published_pdm["fci"])
                             for m in ("sa", "qae") if m in published_pdm}
        published = err_table.get((mol, basis, act), {})
        published_err = {m: float(published[f"err_{m}"]) for m in ("sa", "qae") if published.get(f"err_{m}")}
        flags = [f"pdm_{m}_mismatch" for m in METHODS
                 if m in published_pdm and abs(published_pdm[m] - pdm[m]) > PDM_MISMATCH_TOL]
        for m in published_err:
            if m in err_pub:
                bound = rounding_bound(published_pdm[m], published_pdm["fci"])
                if abs(err_pub[m] - published_err[m]) > bound:
                    flags.append(f"err_{m}_mismatch")
        rows.append(BenchmarkRow(mol, basis, act, pdm, published_pdm, err, err_pub, published_err, flags))
    if not rows:
        raise FixtureError("no benchmark rows matched the selection")
    return rows


def format_table(rows) -> str:
    """Dipoles in debye (computed, then published) and QAE/SA percentage errors.

    ``Err%`` uses dipoles computed from the energy table, ``fromPDM%`` the
    published dipoles, ``pub%`` the published error column.
    """
    head = (f"{'molecule':<8} {'basis':<10} {'space':<7} "
            f"{'FCI':>7} {'pFCI':>7} {'SA':>7} {'pSA':>7} {'QAE':>7} {'pQAE':>7} "
            f"{'QAE Err%':>9} {'fromPDM%':>8} {'pub%':>8} "
            f"{'SA Err%':>8} {'fromPDM%':>8} {'pub%':>8}  flags")
    lines = [head, "-" * len(head)]
    for r in rows:
        pp = r.published_pdm
        pe = r.published_err
        nan = float("nan")
        lines.append(
            f"{r.molecule:<8} {r.basis:<10} {r.active_space:<7} "
            f"{r.pdm['fci']:7.3f} {pp.get('fci', nan):7.3f} {r.pdm['sa']:7.3f} {pp.get('sa', nan):7.3f} "
            f"{r.pdm['qae']:7.3f} {pp.get('qae', nan):7.3f} "
            f"{r.err['qae']:9.3f} {r.err_from_published.get('qae', nan):8.3f} {pe.get('qae', nan):8.3f} "
            f"{r.err['sa']:8.3f} {r.err_from_published.get('sa', nan):8.3f} {pe.get('sa', nan):8.3f}  "
            f"{','.join(r.flags)}")
    return "\n".join(lines)


__all__ = ["run_benchmark", "format_table", "load_fixtures", "default_fixture_root",
           "BenchmarkRow", "FixtureError", "FIXTURE_ENV", "rounding_bound"]
