import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import random_symmetric, relative_error, solve_checked
from qae.anneal import AnnealSchedule
from qae.ci import CiHamiltonian
from qae.encoding import EncodingConfig
from qae.errors import ConfigError, NoSolutionError
from qae.solver import QaeConfig, TraceRecord, default_lambda_bracket, derive_seed, run_qae

FAST = AnnealSchedule(sweeps=20, reads=50, seed=5)


def ci_like(n, rng, coupling=0.05):
    """Dominant reference determinant, weak couplings, spread diagonal."""
    m = rng.uniform(-coupling, coupling, (n, n))
    m = 0.5 * (m + m.T)
    np.fill_diagonal(m, np.concatenate([[-1.0], rng.uniform(-0.5, 0.5, n - 1)]))
    return CiHamiltonian(m, scalar_offset=-3.0)


def test_config_validation():
    with pytest.raises(ConfigError):
        QaeConfig(1.0, 0.0)
    with pytest.raises(ConfigError):
        QaeConfig(0.0, 1.0, lambda_points=1)
    with pytest.raises(ConfigError):
        QaeConfig(0.0, 1.0, repeats=0)
    with pytest.raises(ConfigError):
        QaeConfig(0.0, 1.0, encoding=EncodingConfig(10), max_subqubo_vars=9)
    cfg = QaeConfig(-1.0, 1.0, lambda_points=5)
    np.testing.assert_allclose(cfg.lambda_grid(), [-1, -0.5, 0, 0.5, 1])
    assert cfg.to_dict()["schedule"]["reads"] == 1000


def test_two_level_system():
    h = CiHamiltonian(np.array([[-0.8, 0.6], [0.6, 0.8]]))
    res, exact = solve_checked(h, QaeConfig(-1.5, -0.5, lambda_points=11, repeats=1, schedule=FAST))
    assert exact == pytest.approx(-1.0)
    assert res.best_energy == pytest.approx(-1.0, abs=1e-4)
    c = res.best_coefficients / np.linalg.norm(res.best_coefficients)
    assert abs(c @ np.array([3, -1]) / np.sqrt(10)) == pytest.approx(1.0, abs=1e-3)


def test_ci_like_matrix_reaches_small_error(rng):
    h = ci_like(8, rng)
    lo, hi = default_lambda_bracket(h)
    res, exact = solve_checked(h, QaeConfig(lo, hi, schedule=FAST))
    assert relative_error(res.best_energy, exact) < 1e-4


def test_trace_covers_every_point_and_best_is_minimum(rng):
    h = ci_like(5, rng)
    lo, hi = default_lambda_bracket(h)
    cfg = QaeConfig(lo, hi, lambda_points=7, repeats=2, schedule=FAST)
    res, _ = solve_checked(h, cfg)
    assert [(r.lambda_index, r.repeat) for r in res.trace] == [(i, r) for i in range(7) for r in range(2)]
    energies = [r.energy for r in res.trace if not r.degenerate]
    assert res.best_energy == min(energies)
    best = res.trace[res.best_lambda_index * 2 + res.best_repeat]
    assert best.energy == res.best_energy and best.lam == res.best_lambda
    for r in res.trace:
        assert r.refined_xi <= r.raw_xi + 1e-12
    assert res.diagnostics["points"] == 14
    assert res.diagnostics["n_sub_qubos"] == 1


def test_ties_go_to_earliest_point():
    # a diagonal matrix: every lambda above H_00 reaches the same energy
    h = CiHamiltonian(np.diag([-1.0, 1.0]))
    res, _ = solve_checked(h, QaeConfig(-0.9, -0.5, lambda_points=3, repeats=2,
                                        encoding=EncodingConfig(4), schedule=FAST))
    assert res.best_energy == -1.0
    assert (res.best_lambda_index, res.best_repeat) == (0, 0)


def test_all_degenerate_raises():
    # below the spectrum xi is positive definite and the optimum is c = 0
    with pytest.raises(NoSolutionError):
        run_qae(CiHamiltonian(np.eye(2)), QaeConfig(0.2, 0.8, lambda_points=3, repeats=1,
                                                    encoding=EncodingConfig(4), sampler="brute"))


def test_partial_degeneracy_is_counted():
    h = CiHamiltonian(np.diag([-1.0, 1.0]))
    res, _ = solve_checked(h, QaeConfig(-1.5, -0.5, lambda_points=5, repeats=1,
                                        encoding=EncodingConfig(4), sampler="brute"))
    assert res.diagnostics["degenerate_points"] == sum(r.degenerate for r in res.trace) > 0
    assert all(r.energy is None for r in res.trace if r.degenerate)


def test_deterministic_under_fixed_seed(rng):
    h = ci_like(6, rng)
    cfg = QaeConfig(*default_lambda_bracket(h), lambda_points=5, repeats=2, schedule=FAST)
    a, b = run_qae(h, cfg), run_qae(h, cfg)
    assert a.to_dict() == b.to_dict()
    assert a.trace_csv() == b.trace_csv()


def test_threads_do_not_change_the_result(rng):
    h = ci_like(6, rng)
    cfg = QaeConfig(*default_lambda_bracket(h), lambda_points=5, repeats=2, schedule=FAST)
    serial = run_qae(h, cfg)
    threaded = run_qae(h, QaeConfig(**{**cfg.__dict__, "workers": 3}))
    assert serial.to_dict() == threaded.to_dict()


def test_seed_changes_samples(rng):
    h = ci_like(10, rng)
    lo, hi = default_lambda_bracket(h)
    base = dict(lambda_min=lo, lambda_max=hi, lambda_points=3, repeats=1,
                max_subqubo_vars=20, encoding=EncodingConfig(6))
    a = run_qae(h, QaeConfig(**base, schedule=AnnealSchedule(sweeps=2, reads=3, seed=1)))
    b = run_qae(h, QaeConfig(**base, schedule=AnnealSchedule(sweeps=2, reads=3, seed=2)))
    assert [r.raw_xi for r in a.trace] != [r.raw_xi for r in b.trace]


def test_brute_sampler_on_small_groups(rng):
    h = ci_like(4, rng)
    cfg = QaeConfig(*default_lambda_bracket(h), lambda_points=9, repeats=1,
                    encoding=EncodingConfig(5), max_subqubo_vars=10, sampler="brute")
    res, exact = solve_checked(h, cfg)
    assert res.diagnostics["n_sub_qubos"] == 2
    assert relative_error(res.best_energy, exact) < 1e-2


def test_asymmetric_matrix_rejected():
    with pytest.raises(ConfigError):
        run_qae(CiHamiltonian(np.array([[0.0, 1.0], [0.5, 0.0]])), QaeConfig(-1.0, 1.0))


def test_trace_csv_roundtrip(rng):
    h = ci_like(3, rng)
    res = run_qae(h, QaeConfig(*default_lambda_bracket(h), lambda_points=3, repeats=1, schedule=FAST))
    rows = list(csv.DictReader(io.StringIO(res.trace_csv())))
    assert list(rows[0]) == list(TraceRecord._fields)
    assert len(rows) == 3
    assert float(rows[0]["lam"]) == res.trace[0].lam


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 10), offset=st.floats(-50, 50))
def test_default_bracket_contains_ground_energy(seed, n, offset):
    h = CiHamiltonian(random_symmetric(n, np.random.default_rng(seed)), scalar_offset=offset)
    lo, hi = default_lambda_bracket(h)
    e0 = np.linalg.eigvalsh(h.matrix)[0]
    assert lo < e0 < hi
    assert hi > h.matrix[0, 0]


def test_bracket_margin_validation():
    with pytest.raises(ConfigError):
        default_lambda_bracket(CiHamiltonian(np.eye(2)), margin=0.0)


def test_derive_seed_is_stable_and_spreads():
    assert derive_seed(7, 1, 2) == derive_seed(7, 1, 2)
    seeds = {derive_seed(7, i, r) for i in range(51) for r in range(3)}
    assert len(seeds) == 153
    assert all(0 <= s < 2 ** 64 for s in seeds)
    assert derive_seed(0, 3) ^ derive_seed(5, 3) == 5
