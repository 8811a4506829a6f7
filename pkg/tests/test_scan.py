"""Pipeline composition: determinism, decoupled limits, scan drivers, maps."""

import numpy as np
import pytest

from polaron_hhg.dynamics import PropagationConfig
from polaron_hhg.hilbert import BasisIndex, ModelParams
from polaron_hhg.pulse import LaserParams
from polaron_hhg.scan import (
    PointFailure,
    PointResult,
    ScanSpec,
    convergence_study,
    correlation_map,
    default_gamma_grid,
    gamma_scan,
    run_point,
    solve_eigenbasis,
    spectral_distance,
)

LASER = LaserParams()
SMALL = ModelParams(n_cells=1, phonon_cutoff=1)
CFG15 = PropagationConfig(n_steps=2**15, record_stride=2**15)


def test_default_gamma_grid():
    grid = default_gamma_grid()
    assert grid.shape == (26,)
    assert grid[0] == -0.05 and grid[-1] == 0.0
    assert np.allclose(np.diff(grid), 0.002, rtol=1e-12)


def test_run_point_deterministic():
    a = run_point(SMALL, LASER, CFG15)
    b = run_point(SMALL, LASER, CFG15)
    assert np.array_equal(a.spectrum.yield_norm, b.spectrum.yield_norm)
    assert np.array_equal(a.timeseries.dipole_full, b.timeseries.dipole_full)
    assert a.summary.eps_gs == b.summary.eps_gs


def test_decoupled_phonons_are_spectators():
    # with gamma = 0 the extra oscillator states carry no ground-state
    # coupling, so the spectrum collapses onto the phononless one; the
    # log-yield comparison is restricted to bins within ten decades of
    # the window peak, where it is conditioned well enough for 1e-8
    cfg = PropagationConfig(n_steps=2**16, record_stride=2**16)
    r1 = run_point(ModelParams(n_cells=1, phonon_cutoff=1, gamma=0.0), LASER, cfg, max_order=120.0)
    r2 = run_point(ModelParams(n_cells=1, phonon_cutoff=2, gamma=0.0), LASER, cfg, max_order=120.0)
    orders = r1.spectrum.orders
    window = (orders >= 0) & (orders <= 40)
    strong = window & (
        r1.spectrum.yield_raw >= r1.spectrum.yield_raw[window].max() - 10.0
    )
    diff = np.abs(r1.spectrum.yield_norm[strong] - r2.spectrum.yield_norm[strong])
    assert diff.max() <= 1e-8

    # structural side: the added states hold an integer number of quanta
    # and are exactly dark from the ground state
    model = ModelParams(n_cells=1, phonon_cutoff=2, gamma=0.0)
    eig = solve_eigenbasis(model, LASER.omega_l, max_order=120.0)
    total = BasisIndex(model).occupations.sum(axis=0)
    quanta = (eig.vectors**2 * total[:, None]).sum(axis=0)
    assert np.abs(quanta - np.rint(quanta)).max() <= 1e-12
    dark = np.rint(quanta) > 0
    assert np.abs(eig.gs_transition[dark]).max() <= 1e-12


def test_gamma_scan_records_failures_and_continues():
    spec = ScanSpec(
        model=SMALL, laser=LASER, propagation=CFG15, gamma_values=(-0.01, 0.5, 0.0)
    )
    results = gamma_scan(spec, workers=1)
    assert isinstance(results[0], PointResult)
    assert isinstance(results[1], PointFailure)
    assert "gamma" in results[1].label
    assert isinstance(results[2], PointResult)


def test_gamma_scan_worker_count_invariance():
    spec = ScanSpec(
        model=SMALL, laser=LASER, propagation=CFG15, gamma_values=(-0.02, -0.01, 0.0)
    )
    serial = gamma_scan(spec, workers=1)
    parallel = gamma_scan(spec, workers=2)
    for a, b in zip(serial, parallel):
        assert np.array_equal(a.spectrum.yield_norm, b.spectrum.yield_norm)
        assert a.summary.eps_gs == b.summary.eps_gs


def test_convergence_study_small():
    model = ModelParams(n_cells=1, phonon_cutoff=1)
    report = convergence_study((1, 2), model, LASER, CFG15)
    assert report.l_values == (1, 2)
    assert report.eps_gs[1] <= report.eps_gs[0] + 1e-12
    assert len(report.spectral_diffs) == 1
    assert np.isfinite(report.spectral_diffs[0])


def test_convergence_study_requires_ascending():
    with pytest.raises(ValueError):
        convergence_study((3, 1), SMALL, LASER, CFG15)


def test_spectral_distance_grid_mismatch():
    r1 = run_point(SMALL, LASER, CFG15)
    r2 = run_point(SMALL, LASER, PropagationConfig(n_steps=2**16, record_stride=2**16))
    with pytest.raises(ValueError):
        spectral_distance(r1.spectrum, r2.spectrum)


def test_correlation_map_vacuum_is_zero():
    model = ModelParams(n_cells=1, phonon_cutoff=3, gamma=0.0)
    eig = solve_eigenbasis(model, LASER.omega_l)
    grid = correlation_map(eig, BasisIndex(model), 0)
    assert grid.shape == (2, 2)
    assert np.abs(grid).max() <= 1e-24


def test_correlation_map_nonnegative_and_bounded(eig3, paper_model):
    basis = BasisIndex(paper_model)
    for m in (0, 1):
        grid = correlation_map(eig3, basis, m)
        assert (grid >= 0.0).all()
        # total quanta jointly with the electron at r cannot exceed the
        # full-lattice capacity times the electron weight there
        electron = np.array(
            [
                (eig3.vectors[:, m] ** 2 * (basis.electron_sites == r)).sum()
                for r in range(6)
            ]
        )
        capacity = (paper_model.phonon_cutoff - 1) * 6
        assert (grid.sum(axis=0) <= capacity * electron + 1e-12).all()


def test_correlation_map_ground_state_peaks_centrally(eig3, paper_model):
    grid = correlation_map(eig3, BasisIndex(paper_model), 0)
    f, r = np.unravel_index(grid.argmax(), grid.shape)
    assert f in (2, 3) and r in (2, 3)


def test_correlation_map_index_range(eig3, paper_model):
    with pytest.raises(ValueError):
        correlation_map(eig3, BasisIndex(paper_model), eig3.nr)
