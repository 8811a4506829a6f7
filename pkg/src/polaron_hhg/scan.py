"""End-to-end pipeline runs, coupling scans and cutoff convergence studies.

``run_point`` composes the full chain — basis, sparse assembly,
eigensolve, state selection, propagation, spectrum — for one parameter
set.  The scan drivers map it over coupling grids or cutoff lists,
recording per-point failures instead of aborting, and gather results by
point index so the output is independent of worker count and execution
order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import PropagationConfig, TimeSeries, propagate
from .hilbert import BasisIndex, ModelParams
from .operators import build_hamiltonian, build_position
from .pulse import LaserParams
from .spectral import (
    DENSE_THRESHOLD_DEFAULT,
    EigenBasis,
    eigensolve_lowest,
    select_nr,
    state_relevance,
    with_transition,
)
from .spectrum import SpectrumResult, acceleration, yield_spectrum

_INITIAL_COUNT = 64


def default_gamma_grid(n_points: int = 26) -> np.ndarray:
    """Uniform coupling grid over [-0.05, 0], weakest coupling last."""
    return np.linspace(-0.05, 0.0, n_points)


@dataclass(frozen=True)
class ScanSpec:
    """Grids and shared base configuration for the scan drivers."""

    model: ModelParams
    laser: LaserParams
    propagation: PropagationConfig
    gamma_values: tuple[float, ...] = field(default_factory=lambda: tuple(default_gamma_grid()))
    l_values: tuple[int, ...] = (1, 3, 5, 6)
    max_order: float = 45.0
    nr_override: int | None = None
    dense_threshold: int = DENSE_THRESHOLD_DEFAULT


@dataclass(frozen=True)
class PointSummary:
    """Cheap per-point diagnostics kept alongside the heavy arrays."""

    eps_gs: float
    nr: int
    energies: np.ndarray = field(repr=False)
    relevance: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class PointResult:
    model: ModelParams
    summary: PointSummary
    timeseries: TimeSeries = field(repr=False)
    spectrum: SpectrumResult = field(repr=False)


@dataclass(frozen=True)
class PointFailure:
    label: str
    message: str


def solve_eigenbasis(
    model: ModelParams,
    omega_l: float,
    max_order: float = 45.0,
    nr_override: int | None = None,
    dense_threshold: int = DENSE_THRESHOLD_DEFAULT,
    initial_count: int = _INITIAL_COUNT,
) -> EigenBasis:
    """Diagonalize, grow the Krylov block until the order window is covered,
    then truncate to the selected state count and attach the transition matrix.
    """
    basis = BasisIndex(model)
    h = build_hamiltonian(model, basis)
    x = build_position(model, basis)
    dim = basis.dim

    if dim <= dense_threshold:
        count = dim
        eig = eigensolve_lowest(h, count, dense_threshold)
    else:
        count = min(dim - 1, max(initial_count, nr_override or 1))
        while True:
            eig = eigensolve_lowest(h, count, dense_threshold)
            covered = (eig.energies[-1] - eig.energies[0]) / omega_l
            if nr_override is not None and count >= nr_override:
                break
            if covered >= max_order or count >= dim - 1:
                break
            count = min(2 * count, dim - 1)

    nr = select_nr(eig.energies, omega_l, max_order, nr_override)
    return with_transition(eig.truncated(nr), x)


def run_point(
    model: ModelParams,
    laser: LaserParams,
    cfg: PropagationConfig,
    max_order: float = 45.0,
    nr_override: int | None = None,
    dense_threshold: int = DENSE_THRESHOLD_DEFAULT,
) -> PointResult:
    """Deterministic end-to-end run for one parameter set."""
    basis = BasisIndex(model)
    eig = solve_eigenbasis(
        model, laser.omega_l, max_order, nr_override, dense_threshold
    )
    ts = propagate(eig, basis, laser, cfg)
    spec = yield_spectrum(acceleration(ts.dipole_full, ts.dt), ts.dt, laser.omega_l)
    summary = PointSummary(
        eps_gs=float(eig.energies[0]),
        nr=eig.nr,
        energies=eig.energies.copy(),
        relevance=state_relevance(eig, laser.omega_l),
    )
    return PointResult(model=model, summary=summary, timeseries=ts, spectrum=spec)


def _gamma_point(args):
    spec, gamma = args
    label = f"gamma={gamma:.15g}"
    try:
        model = replace(spec.model, gamma=gamma)
        result = run_point(
            model,
            spec.laser,
            spec.propagation,
            spec.max_order,
            spec.nr_override,
            spec.dense_threshold,
        )
        return result
    except Exception as exc:  # recorded, scan continues
        return PointFailure(label=label, message=f"{type(exc).__name__}: {exc}")


def gamma_scan(spec: ScanSpec, workers: int = 1) -> list[PointResult | PointFailure]:
    """One pipeline run per coupling value; failures recorded in place.

    Results come back ordered by grid index whatever the worker count.
    """
    tasks = [(spec, float(g)) for g in spec.gamma_values]
    if workers <= 1:
        return [_gamma_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_gamma_point, tasks))


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-cutoff results and consecutive spectral distances."""

    l_values: tuple[int, ...]
    points: tuple[PointResult | PointFailure, ...] = field(repr=False)
    eps_gs: tuple[float, ...] = ()
    # max |Y_N(L_i) - Y_N(L_{i+1})| over the comparison window, per consecutive pair
    spectral_diffs: tuple[float, ...] = ()
    window: tuple[float, float] = (2.0, 40.0)


def spectral_distance(
    a: SpectrumResult, b: SpectrumResult, window: tuple[float, float] = (2.0, 40.0)
) -> float:
    """Max-abs difference of the normalized yields over an order window."""
    if a.orders.shape != b.orders.shape or np.abs(a.orders - b.orders).max() > 1e-9:
        raise ValueError("spectra live on different grids")
    sel = (a.orders >= window[0]) & (a.orders <= window[1])
    return float(np.abs(a.yield_norm[sel] - b.yield_norm[sel]).max())


def convergence_study(
    l_values,
    model: ModelParams,
    laser: LaserParams,
    cfg: PropagationConfig,
    max_order: float = 45.0,
    nr_override: int | None = None,
    dense_threshold: int = DENSE_THRESHOLD_DEFAULT,
    window: tuple[float, float] = (2.0, 40.0),
) -> ConvergenceReport:
    """Run the pipeline per phonon cutoff and report ground energies plus
    max-abs normalized-yield differences between consecutive cutoffs."""
    l_values = tuple(int(l) for l in l_values)
    if list(l_values) != sorted(l_values):
        raise ValueError(f"l_values must be ascending, got {l_values}")
    points: list[PointResult | PointFailure] = []
    for l in l_values:
        try:
            points.append(
                run_point(
                    replace(model, phonon_cutoff=l),
                    laser,
                    cfg,
                    max_order,
                    nr_override,
                    dense_threshold,
                )
            )
        except Exception as exc:
            points.append(PointFailure(label=f"L={l}", message=f"{type(exc).__name__}: {exc}"))
    eps = tuple(
        p.summary.eps_gs if isinstance(p, PointResult) else float("nan") for p in points
    )
    diffs = []
    for a, b in zip(points, points[1:]):
        if isinstance(a, PointResult) and isinstance(b, PointResult):
            diffs.append(spectral_distance(a.spectrum, b.spectrum, window))
        else:
            diffs.append(float("nan"))
    return ConvergenceReport(
        l_values=l_values,
        points=tuple(points),
        eps_gs=eps,
        spectral_diffs=tuple(diffs),
        window=window,
    )


def correlation_map(eig: EigenBasis, basis: BasisIndex, m: int) -> np.ndarray:
    """Joint phonon-site/electron-site occupation of eigenstate ``m``.

    Entry [f, r] is <m| n_ph,f n_e,r |m>; both operators are diagonal in
    the site basis, so this is a weighted histogram of the squared
    eigenvector amplitudes.  All entries are non-negative.
    """
    if not 0 <= m < eig.nr:
        raise ValueError(f"state index {m} outside [0, {eig.nr})")
    prob = eig.vectors[:, m] ** 2
    ns = basis.n_sites
    sites = basis.electron_sites
    out = np.empty((ns, ns))
    for f in range(ns):
        out[f] = np.bincount(sites, weights=prob * basis.occupations[f], minlength=ns)
    return out


def export_heatmap(results, gamma_values, fh, header_lines=(), max_order: float = 50.0) -> None:
    """Long-format (gamma, harmonic_order, Y_N) rows; failed points skipped."""
    for line in header_lines:
        fh.write(f"# {line}\n")
    fh.write("# gamma\tharmonic_order\tyield_norm\n")
    for g, res in zip(gamma_values, results):
        if isinstance(res, PointFailure):
            continue
        sel = res.spectrum.orders <= max_order
        for o, y in zip(res.spectrum.orders[sel], res.spectrum.yield_norm[sel]):
            fh.write(f"{g:.15g}\t{o:.15g}\t{y:.15g}\n")


def export_relevance(results, gamma_values, fh, header_lines=(), max_order: float = 50.0) -> None:
    """Long-format (gamma, harmonic_order, log10_Tgs2) eigenstate overlay."""
    for line in header_lines:
        fh.write(f"# {line}\n")
    fh.write("# gamma\tharmonic_order\tlog10_Tgs2\n")
    for g, res in zip(gamma_values, results):
        if isinstance(res, PointFailure):
            continue
        for order, log_t in res.summary.relevance:
            if order <= max_order:
                fh.write(f"{g:.15g}\t{order:.15g}\t{log_t:.15g}\n")


def export_convergence(report: ConvergenceReport, fh, header_lines=()) -> None:
    """Tabulate ground energies and consecutive spectral distances per cutoff."""
    for line in header_lines:
        fh.write(f"# {line}\n")
    lo, hi = report.window
    fh.write(f"# comparison window: orders [{lo:g}, {hi:g}]\n")
    fh.write("# L\teps_gs\tnr\tmax_abs_diff_to_next\n")
    for i, l in enumerate(report.l_values):
        point = report.points[i]
        nr = point.summary.nr if isinstance(point, PointResult) else -1
        diff = report.spectral_diffs[i] if i < len(report.spectral_diffs) else float("nan")
        fh.write(f"{l}\t{report.eps_gs[i]:.15g}\t{nr}\t{diff:.15g}\n")
    for point in report.points:
        if isinstance(point, PointFailure):
            fh.write(f"# FAILED {point.label}: {point.message}\n")
