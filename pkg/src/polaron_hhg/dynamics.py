"""Time propagation of the amplitude vector in the truncated eigenbasis.

The equations of motion  i da_m/dt = e_m a_m + E(t) sum_n T_mn a_n  are
integrated with classic fixed-step RK4.  Internally the energies are
shifted by the ground-state energy (a global phase), which keeps the
accumulated phases small; amplitudes are returned in the original
frame and all observables are invariant under the shift.

Observable operators are rotated once into the eigenbasis (dense
nr x nr), so each recorded sample costs O(nr^2) regardless of the full
space dimension.  The dipole is additionally recorded at every step —
it is a free by-product of the first RK4 stage — so the downstream
spectral analysis always sees the full-resolution series no matter how
sparsely densities are sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import BasisIndex
from .pulse import LaserParams, electric_field
from .spectral import EigenBasis

_STABILITY_LIMIT = 0.1
_NORM_DIVERGENCE = 1e-4
_HERMITICITY_TOL = 1e-10


class PropagationDivergedError(RuntimeError):
    """Norm drift exceeded the divergence threshold during propagation."""


class HermiticityError(RuntimeError):
    """Quadratic form of a rotated observable came out measurably complex."""


@dataclass(frozen=True)
class PropagationConfig:
    """Step count and observable sampling stride.

    n_steps        RK4 steps over [0, t_final]; a power of two keeps the
                   FFT grid aligned (default 2**16)
    record_stride  steps between density/norm samples (1 = every step);
                   must divide n_steps
    """

    n_steps: int = 2**16
    record_stride: int = 1

    def __post_init__(self):
        if self.n_steps < 4:
            raise ValueError(f"n_steps must be >= 4, got {self.n_steps}")
        if self.record_stride < 1:
            raise ValueError(f"record_stride must be >= 1, got {self.record_stride}")
        if self.n_steps % self.record_stride:
            raise ValueError(
                f"record_stride {self.record_stride} must divide n_steps {self.n_steps}"
            )


@dataclass(frozen=True)
class TimeSeries:
    """Sampled observables plus the full-resolution dipole.

    The sample grid is t_i = i * record_stride * dt for i = 0 .. n_samples-1,
    covering [0, t_final); ``dipole_full`` holds every step on the same
    convention and feeds the FFT stage.  ``a_final`` are the amplitudes
    at t_final in the unshifted frame.
    """

    times: np.ndarray = field(repr=False)
    amplitudes_norm: np.ndarray = field(repr=False)
    dipole: np.ndarray = field(repr=False)
    electron_density: np.ndarray = field(repr=False)
    phonon_density: np.ndarray = field(repr=False)
    dipole_full: np.ndarray = field(repr=False)
    dt: float = 0.0
    a_final: np.ndarray = field(default=None, repr=False)
    norm_final: float = 0.0


def rhs(a: np.ndarray, t: float, eig: EigenBasis, laser: LaserParams) -> np.ndarray:
    """Right-hand side -i (e ∘ a + E(t) T a) with the raw energies."""
    if eig.transition is None:
        raise ValueError("transition matrix not attached")
    return -1j * (eig.energies * a + electric_field(t, laser) * (eig.transition @ a))


def rotate_operator(eig: EigenBasis, op) -> np.ndarray:
    """Dense eigenbasis representation V^T O V of a site-basis operator."""
    return eig.vectors.T @ (op.matrix @ eig.vectors)


def density_expectation(a: np.ndarray, rotated_op: np.ndarray) -> float:
    """Real quadratic form a^dag M a; rejects a measurable imaginary part."""
    val = np.vdot(a, rotated_op @ a)
    if abs(val.imag) > _HERMITICITY_TOL:
        raise HermiticityError(f"imaginary residue {val.imag:.3e}")
    return float(val.real)


def _rotated_densities(eig: EigenBasis, basis: BasisIndex) -> np.ndarray:
    """Stack of rotated site-occupation operators, shape (2*2N, nr, nr).

    The first 2N slices are the electron projectors, the rest the phonon
    number operators.  All are diagonal in the site basis, so each
    rotation is a masked or weighted Gram matrix of the eigenvectors.
    """
    v = eig.vectors
    ns = basis.n_sites
    ops = np.empty((2 * ns, eig.nr, eig.nr))
    sites = basis.electron_sites
    for r in range(ns):
        block = v[sites == r, :]
        ops[r] = block.T @ block
    occ = basis.occupations
    for f in range(ns):
        ops[ns + f] = v.T @ (occ[f, :, None] * v)
    return ops


def propagate(
    eig: EigenBasis,
    basis: BasisIndex,
    laser: LaserParams,
    cfg: PropagationConfig,
    a0: np.ndarray | None = None,
) -> TimeSeries:
    """RK4 propagation from ``a0`` (default: ground state) over one pulse.

    Raises ValueError if the step violates the accuracy guard
    dt * max|e_m - e_gs| <= 0.1, and :class:`PropagationDivergedError`
    if the norm drifts by more than 1e-4 at any step.
    """
    if eig.transition is None:
        raise ValueError("transition matrix not attached")
    nr = eig.nr
    tf = laser.t_final()
    dt = tf / cfg.n_steps

    eps = eig.energies - eig.energies[eig.gs_index]
    spread = np.abs(eps).max()
    if dt * spread > _STABILITY_LIMIT:
        raise ValueError(
            f"stability guard violated: dt*max|e-e_gs| = {dt * spread:.3f} > {_STABILITY_LIMIT}"
        )

    if a0 is None:
        a = np.zeros(nr, dtype=np.complex128)
        a[eig.gs_index] = 1.0
    else:
        a = np.asarray(a0, dtype=np.complex128).copy()
        if a.shape != (nr,):
            raise ValueError(f"a0 shape {a.shape} != ({nr},)")
        if abs(np.vdot(a, a).real - 1.0) > 1e-8:
            raise ValueError("a0 is not normalized")

    t_mat = eig.transition.astype(np.complex128)
    dens_ops = _rotated_densities(eig, basis)
    ns = basis.n_sites

    # E(t) on the half-step grid: index 2i -> t_i, 2i+1 -> t_i + dt/2.
    e_grid = electric_field(np.arange(2 * cfg.n_steps + 1) * (0.5 * dt), laser)

    n_samples = cfg.n_steps // cfg.record_stride
    times = np.arange(n_samples) * (cfg.record_stride * dt)
    norms = np.empty(n_samples)
    dipole = np.empty(n_samples)
    e_dens = np.empty((n_samples, ns))
    p_dens = np.empty((n_samples, ns))
    dipole_full = np.empty(cfg.n_steps)

    half = 0.5 * dt
    sixth = dt / 6.0
    for i in range(cfg.n_steps):
        ta = t_mat @ a
        dip = np.vdot(a, ta).real
        dipole_full[i] = dip

        if i % cfg.record_stride == 0:
            s = i // cfg.record_stride
            norm = np.vdot(a, a).real
            norms[s] = norm
            dipole[s] = dip
            z = dens_ops @ a
            vals = z @ a.conj()
            if np.abs(vals.imag).max() > _HERMITICITY_TOL:
                raise HermiticityError(
                    f"imaginary residue {np.abs(vals.imag).max():.3e} at sample {s}"
                )
            e_dens[s] = vals.real[:ns]
            p_dens[s] = vals.real[ns:]

        k1 = -1j * (eps * a + e_grid[2 * i] * ta)
        a2 = a + half * k1
        k2 = -1j * (eps * a2 + e_grid[2 * i + 1] * (t_mat @ a2))
        a3 = a + half * k2
        k3 = -1j * (eps * a3 + e_grid[2 * i + 1] * (t_mat @ a3))
        a4 = a + dt * k3
        k4 = -1j * (eps * a4 + e_grid[2 * i + 2] * (t_mat @ a4))
        a = a + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        norm = np.vdot(a, a).real
        if abs(norm - 1.0) > _NORM_DIVERGENCE:
            raise PropagationDivergedError(
                f"norm drifted to {norm:.6f} at step {i + 1}; "
                "reduce dt or retain fewer/more states"
            )

    # undo the internal gauge shift: a_m(t) = a_shifted_m(t) * exp(-i e_gs t)
    a_final = a * np.exp(-1j * eig.energies[eig.gs_index] * tf)
    return TimeSeries(
        times=times,
        amplitudes_norm=norms,
        dipole=dipole,
        electron_density=e_dens,
        phonon_density=p_dens,
        dipole_full=dipole_full,
        dt=dt,
        a_final=a_final,
        norm_final=float(np.vdot(a, a).real),
    )


def export_timeseries(
    ts: TimeSeries, laser: LaserParams, fh, header_lines=()
) -> None:
    """Columnar dump: t, E(t), dipole, norm, electron densities, phonon densities."""
    ns = ts.electron_density.shape[1]
    for line in header_lines:
        fh.write(f"# {line}\n")
    cols = (
        ["t", "E", "dipole", "norm"]
        + [f"n_e_{r}" for r in range(ns)]
        + [f"n_ph_{r}" for r in range(ns)]
    )
    fh.write("# " + "\t".join(cols) + "\n")
    e_vals = electric_field(ts.times, laser)
    for s in range(ts.times.shape[0]):
        row = [ts.times[s], e_vals[s], ts.dipole[s], ts.amplitudes_norm[s]]
        row.extend(ts.electron_density[s])
        row.extend(ts.phonon_density[s])
        fh.write("\t".join(f"{x:.15g}" for x in row) + "\n")
