"""``qae`` command line: solve, pdm, exact and benchmark.

Exit codes: 0 on success, 2 for configuration or input errors, 3 when every
lambda point of a scan decodes to the zero vector.

``solve`` writes a result JSON that depends only on the inputs and options
(keys sorted, no timings), so two runs with the same manifest are
byte-identical. Timings, digests and the version go into the separate
manifest written by ``--manifest``; ``--replay`` reruns one.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from .anneal import SAMPLERS, AnnealSchedule
from .benchmark import FIXTURE_ENV, FixtureError, format_table, run_benchmark
from .ci import (ActiveSpace, CiHamiltonian, assemble_hamiltonian,
                 generate_fci_basis, select_determinants)
from .encoding import DEFAULT_MAX_SUBQUBO_VARS, EncodingConfig, build_qubo
from .errors import NoSolutionError, QaeError
from .ffm import DEFAULT_EPSILON, FfmInput, Geometry, assemble_pdm, read_geometry
from .integrals import freeze_core, parse_dipole_integrals, read_fcidump
from .oracle import spectrum
from .solver import QaeConfig, default_lambda_bracket, run_qae

EXIT_OK, EXIT_INPUT, EXIT_NO_SOLUTION = 0, 2, 3

# options of ``solve`` that determine the result; stored in the manifest
SOLVE_OPTIONS = (
    "matrix", "fcidump", "active_space", "n_keep", "epsilon", "dipole",
    "lambda_min", "lambda_max", "lambda_points", "margin", "repeats", "reads",
    "sweeps", "seed", "sampler", "k_bits", "max_subqubo_vars", "workers",
)
INPUT_OPTIONS = ("matrix", "fcidump", "dipole")


class InputError(Exception):
    """Bad command-line input; reported with exit code 2."""


def version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(text: str, path):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# --- Hamiltonian construction ------------------------------------------------

def load_matrix(path) -> CiHamiltonian:
    m = np.loadtxt(path, ndmin=2)
    if m.shape[0] != m.shape[1]:
        raise InputError(f"{path}: matrix is {m.shape[0]}x{m.shape[1]}, expected square")
    return CiHamiltonian(m)


def hamiltonian_from_fcidump(path, active_space=None, epsilon=0.0, dipole=None) -> CiHamiltonian:
    """CI matrix from an integral file, optionally in a reduced active space.

    A smaller active space freezes the lowest doubly occupied orbitals and
    drops the virtual ones above the window.
    """
    ints = read_fcidump(path)
    n_total = ints.n_orbitals
    if epsilon:
        if dipole is None:
            raise InputError("--epsilon needs --dipole integrals")
        with open(dipole) as fh:
            dip = parse_dipole_integrals(fh, n_total)
        # perturb before freezing so the frozen orbitals also feel the field
        ints = ints.with_one_body(ints.one_body + epsilon * dip)
    space = ActiveSpace(2 * n_total, ints.n_electrons)
    if active_space:
        space = ActiveSpace.from_label(active_space)
        n_core2 = ints.n_electrons - space.n_electrons
        if n_core2 < 0 or n_core2 % 2:
            raise InputError(f"active space {active_space} is incompatible with "
                             f"{ints.n_electrons} electrons")
        n_core = n_core2 // 2
        if n_core + space.n_orbitals > n_total:
            raise InputError(f"active space {active_space} needs more than {n_total} orbitals")
        if (n_core, space.n_orbitals) != (0, n_total):
            ints = freeze_core(ints, n_core, space.n_orbitals)
    return assemble_hamiltonian(generate_fci_basis(space), ints)


def build_hamiltonian(opts: dict) -> CiHamiltonian:
    if bool(opts.get("matrix")) == bool(opts.get("fcidump")):
        raise InputError("give exactly one of --matrix or --fcidump")
    for name in INPUT_OPTIONS:
        if opts.get(name) and not Path(opts[name]).is_file():
            raise InputError(f"input file {opts[name]} not found")
    if opts.get("matrix"):
        h = load_matrix(opts["matrix"])
    else:
        h = hamiltonian_from_fcidump(opts["fcidump"], opts.get("active_space"),
                                     opts.get("epsilon") or 0.0, opts.get("dipole"))
    if opts.get("n_keep"):
        h = select_determinants(h, opts["n_keep"])
    return h


def solve_config(h: CiHamiltonian, opts: dict) -> QaeConfig:
    lo, hi = opts.get("lambda_min"), opts.get("lambda_max")
    if lo is None or hi is None:
        blo, bhi = default_lambda_bracket(h, opts.get("margin", 0.05))
        lo = blo if lo is None else lo - h.scalar_offset
        hi = bhi if hi is None else hi - h.scalar_offset
    else:
        # user-facing lambdas are total energies; the scan works on the electronic matrix
        lo, hi = lo - h.scalar_offset, hi - h.scalar_offset
    return QaeConfig(
        lambda_min=lo, lambda_max=hi, lambda_points=opts["lambda_points"], repeats=opts["repeats"],
        encoding=EncodingConfig(opts["k_bits"]),
        schedule=AnnealSchedule(sweeps=opts["sweeps"], reads=opts["reads"], seed=opts["seed"]),
        max_subqubo_vars=opts["max_subqubo_vars"], sampler=opts["sampler"], workers=opts["workers"])


# --- commands ------------------------------------------------------------------

def _inputs_digest(opts: dict) -> dict:
    return {name: {"path": str(opts[name]), "sha256": sha256(opts[name])}
            for name in INPUT_OPTIONS if opts.get(name)}


def run_solve(opts: dict) -> tuple:
    """Returns ``(report, manifest, result)``; the report is free of timings."""
    timings = {}
    t0 = time.perf_counter()
    h = build_hamiltonian(opts)
    timings["hamiltonian"] = time.perf_counter() - t0
    cfg = solve_config(h, opts)

    if opts.get("export_qubo"):
        lam = 0.5 * (cfg.lambda_min + cfg.lambda_max)
        Path(opts["export_qubo"]).write_text(build_qubo(h, lam, cfg.encoding).to_triples())

    t0 = time.perf_counter()
    result = run_qae(h, cfg)
    timings["qae"] = time.perf_counter() - t0

    res = result.to_dict()
    offset = h.scalar_offset
    report = {
        "best_energy": result.best_energy,
        "electronic_energy": result.best_energy - offset,
        "scalar_offset": offset,
        "best_lambda": result.best_lambda + offset,
        "best_lambda_index": result.best_lambda_index,
        "best_repeat": result.best_repeat,
        "best_coefficients": res["best_coefficients"],
        "n_determinants": h.size,
        "lambda_bracket": [cfg.lambda_min + offset, cfg.lambda_max + offset],
        "diagnostics": res["diagnostics"],
        "config": cfg.to_dict(),
        "inputs": _inputs_digest(opts),
    }
    manifest = {
        "version": version(),
        "options": {k: opts.get(k) for k in SOLVE_OPTIONS},
        "config": cfg.to_dict(),
        "seeds": {"base": cfg.schedule.seed,
                  "derivation": "per (lambda index, repeat, sub-QUBO) via derive_seed"},
        "inputs": _inputs_digest(opts),
        "timings": timings,
    }
    return report, manifest, result


def _replay_options(path) -> dict:
    try:
        manifest = json.loads(Path(path).read_text())
        opts = dict(manifest["options"])
        inputs = manifest.get("inputs", {})
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read manifest {path}: {exc}") from None
    for name, rec in inputs.items():
        p = Path(rec["path"])
        if not p.is_file():
            raise InputError(f"manifest input {p} not found")
        if sha256(p) != rec["sha256"]:
            raise InputError(f"manifest input {p} changed since the manifest was written")
    return opts


def cmd_solve(args) -> int:
    opts = {k: getattr(args, k) for k in SOLVE_OPTIONS}
    if args.replay:
        opts = _replay_options(args.replay)
    opts["export_qubo"] = args.export_qubo
    report, manifest, result = run_solve(opts)
    _emit(dump_json(report), args.output)
    if args.trace_csv:
        Path(args.trace_csv).write_text(result.trace_csv())
    if args.manifest:
        Path(args.manifest).write_text(dump_json(manifest))
    return EXIT_OK


def cmd_exact(args) -> int:
    opts = {k: getattr(args, k, None) for k in SOLVE_OPTIONS}
    h = build_hamiltonian(opts)
    s = spectrum(h)
    n = min(args.states, h.size)
    report = {
        "ground_energy": float(s.eigenvalues[0]),
        "eigenvalues": [float(x) for x in s.eigenvalues[:n]],
        "ground_vector": [float(x) for x in s.ground_vector],
        "scalar_offset": h.scalar_offset,
        "n_determinants": h.size,
        "inputs": _inputs_digest(opts),
    }
    _emit(dump_json(report), args.output)
    return EXIT_OK


def cmd_pdm(args) -> int:
    if args.geometry:
        if not Path(args.geometry).is_file():
            raise InputError(f"geometry file {args.geometry} not found")
        geom = read_geometry(args.geometry)
    else:
        geom = Geometry(())
    res = assemble_pdm(FfmInput(args.e_plus, args.e_minus, args.epsilon), geom, signed=args.signed)
    out = res.to_dict()
    out.update(epsilon=args.epsilon, e_plus=args.e_plus, e_minus=args.e_minus)
    _emit(dump_json(out), args.output)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    rows = run_benchmark(args.fixtures, args.epsilon, args.molecule or None, args.active_space or None)
    if args.json:
        _emit(dump_json([r.to_dict() for r in rows]), args.output)
    else:
        _emit(format_table(rows) + "\n", args.output)
    return EXIT_OK


# --- parser --------------------------------------------------------------------

def _hamiltonian_args(p):
    src = p.add_argument_group("Hamiltonian source")
    src.add_argument("--matrix", help="whitespace-separated symmetric matrix")
    src.add_argument("--fcidump", "--integrals", dest="fcidump", help="FCIDUMP integral file")
    src.add_argument("--active-space", help="e.g. '4o,2e'; default: all orbitals and electrons")
    src.add_argument("--n-keep", type=int, help="keep this many determinants by perturbative weight")
    src.add_argument("--epsilon", type=float, default=0.0,
                     help="field strength added as epsilon * dipole integrals")
    src.add_argument("--dipole", help="dipole integral file ('value p q' lines, 1-based)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qae", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="annealer eigensolver on a CI matrix")
    _hamiltonian_args(p)
    scan = p.add_argument_group("lambda scan")
    scan.add_argument("--lambda-min", type=float, help="total energy; default from Gershgorin discs")
    scan.add_argument("--lambda-max", type=float, help="total energy; default just above H_00")
    scan.add_argument("--lambda-points", type=int, default=51)
    scan.add_argument("--margin", type=float, default=0.05, help="padding of the default bracket")
    scan.add_argument("--repeats", type=int, default=3)
    ann = p.add_argument_group("annealing")
    ann.add_argument("--reads", type=int, default=1000)
    ann.add_argument("--sweeps", type=int, default=1000)
    ann.add_argument("--seed", type=int, default=0)
    ann.add_argument("--sampler", choices=sorted(SAMPLERS), default="sa")
    ann.add_argument("--k-bits", type=int, default=10)
    ann.add_argument("--max-subqubo-vars", type=int, default=DEFAULT_MAX_SUBQUBO_VARS)
    ann.add_argument("--workers", type=int, default=1)
    out = p.add_argument_group("output")
    out.add_argument("--output", "-o", help="result JSON (default stdout)")
    out.add_argument("--trace-csv", help="per (lambda, repeat) trace")
    out.add_argument("--manifest", help="write config, seeds, digests and timings here")
    out.add_argument("--replay", help="rerun the options stored in a manifest")
    out.add_argument("--export-qubo", help="write the full QUBO at the bracket midpoint as 'i j value'")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("exact", help="dense diagonalization of the same Hamiltonian")
    _hamiltonian_args(p)
    p.add_argument("--states", type=int, default=5, help="number of eigenvalues to report")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("pdm", help="dipole moment from energies at +-epsilon")
    p.add_argument("--e-plus", type=float, required=True)
    p.add_argument("--e-minus", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--geometry", help="'Z z_angstrom' lines; omit for the electronic part only")
    p.add_argument("--signed", action="store_true", help="keep the sign of the moment")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_pdm)

    p = sub.add_parser("benchmark", help="dipole moments from the shipped energy tables")
    p.add_argument("--fixtures", help=f"fixture directory (default ${FIXTURE_ENV} or packaged data)")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--molecule", action="append")
    p.add_argument("--active-space", action="append")
    p.add_argument("--json", action="store_true")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NoSolutionError as exc:
        print(f"qae: no solution: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except (InputError, QaeError, FixtureError, OSError, ValueError, IndexError) as exc:
        print(f"qae: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
