"""Lowest eigenpairs of the field-free Hamiltonian and the dipole transition matrix.

Small problems are diagonalized densely (LAPACK, lowest-``count``
subset); large ones go through ARPACK's implicitly restarted Lanczos
with full reorthogonalization.  Both paths return ascending energies,
orthonormal vectors with a fixed sign convention, and verified
residuals.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
import scipy.sparse.linalg
from scipy.sparse.linalg import ArpackNoConvergence

from .operators import SparseOperator

logger = logging.getLogger(__name__)

DENSE_THRESHOLD_DEFAULT = 5000

_RESIDUAL_TOL = 1e-8
_ORTHO_TOL = 1e-10
_DEGENERACY_TOL = 1e-9


class EigensolveError(RuntimeError):
    """Eigensolver failed to converge; carries the residual norms seen."""

    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True)
class EigenBasis:
    """Lowest eigenpairs, optionally completed with the transition matrix.

    energies        ascending eigenvalues, shape (nr,)
    vectors         orthonormal columns in the site basis, shape (dim, nr)
    transition      dipole matrix T_mn = <m|x|n>, shape (nr, nr), or None
    gs_transition   row of ``transition`` at the ground-state index, or None
    """

    energies: np.ndarray = field(repr=False)
    vectors: np.ndarray = field(repr=False)
    transition: np.ndarray | None = field(default=None, repr=False)
    gs_transition: np.ndarray | None = field(default=None, repr=False)
    gs_index: int = 0

    @property
    def nr(self) -> int:
        return self.energies.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def truncated(self, nr: int) -> "EigenBasis":
        """Keep the lowest ``nr`` states (transition matrix sliced if present)."""
        if not 1 <= nr <= self.nr:
            raise ValueError(f"nr {nr} outside [1, {self.nr}]")
        t = self.transition[:nr, :nr] if self.transition is not None else None
        g = self.gs_transition[:nr] if self.gs_transition is not None else None
        return replace(self, energies=self.energies[:nr],
                       vectors=self.vectors[:, :nr], transition=t, gs_transition=g)


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of each column positive."""
    lead = np.abs(vectors).argmax(axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _verify(h, energies: np.ndarray, vectors: np.ndarray) -> None:
    resid = h @ vectors - vectors * energies
    norms = np.linalg.norm(resid, axis=0)
    bound = _RESIDUAL_TOL * np.maximum(1.0, np.abs(energies))
    if np.any(norms > bound):
        raise EigensolveError(
            f"eigenpair residuals up to {norms.max():.3e} exceed tolerance",
            residuals=norms,
        )
    gram = vectors.T @ vectors
    off = np.abs(gram - np.eye(gram.shape[0])).max()
    if off > _ORTHO_TOL:
        raise EigensolveError(f"orthonormality defect {off:.3e}", residuals=norms)


def eigensolve_lowest(
    op: SparseOperator,
    count: int,
    dense_threshold: int = DENSE_THRESHOLD_DEFAULT,
    max_iterations: int | None = None,
) -> EigenBasis:
    """Lowest ``count`` eigenpairs of a symmetric operator, ascending.

    Dense LAPACK below ``dense_threshold`` (and whenever ARPACK cannot be
    used, i.e. count >= dim - 1); Lanczos with reorthogonalization above.
    Raises :class:`EigensolveError` on non-convergence or bad residuals.
    """
    dim = op.dim
    if not 1 <= count <= dim:
        raise ValueError(f"count {count} outside [1, {dim}]")

    if dim <= dense_threshold or count >= dim - 1:
        dense = op.to_dense()
        energies, vectors = scipy.linalg.eigh(
            dense, subset_by_index=(0, count - 1), check_finite=False
        )
    else:
        try:
            energies, vectors = scipy.sparse.linalg.eigsh(
                op.matrix, k=count, which="SA", tol=1e-10, maxiter=max_iterations
            )
        except ArpackNoConvergence as exc:
            res = None
            if exc.eigenvalues is not None and len(exc.eigenvalues):
                res = np.linalg.norm(
                    op.matrix @ exc.eigenvectors - exc.eigenvectors * exc.eigenvalues,
                    axis=0,
                )
            raise EigensolveError(
                f"Lanczos did not converge for k={count}, dim={dim}", residuals=res
            ) from exc

    order = np.argsort(energies, kind="stable")
    energies = np.ascontiguousarray(energies[order])
    vectors = _fix_phases(np.ascontiguousarray(vectors[:, order]))
    _verify(op.matrix, energies, vectors)

    if len(energies) > 1 and energies[1] - energies[0] < _DEGENERACY_TOL:
        logger.warning(
            "near-degenerate ground state: e1 - e0 = %.3e", energies[1] - energies[0]
        )
    return EigenBasis(energies=energies, vectors=vectors)


def transition_matrix(eig: EigenBasis, x_op: SparseOperator) -> np.ndarray:
    """T_mn = <m| x |n> over the retained states; verified symmetric."""
    if x_op.dim != eig.dim:
        raise ValueError(f"operator dim {x_op.dim} != basis dim {eig.dim}")
    t = eig.vectors.T @ (x_op.matrix @ eig.vectors)
    asym = np.abs(t - t.T).max() if t.size else 0.0
    if asym > 1e-12:
        raise ValueError(f"transition matrix asymmetry {asym:.3e}")
    return t


def with_transition(eig: EigenBasis, x_op: SparseOperator) -> EigenBasis:
    """Return a copy of ``eig`` completed with T and its ground-state row."""
    t = transition_matrix(eig, x_op)
    return replace(eig, transition=t, gs_transition=t[eig.gs_index].copy())


def harmonic_order(energy: float, energy_gs: float, omega_l: float):
    """Map an energy to laser-frequency units, (e - e_gs) / omega_l."""
    if omega_l <= 0:
        raise ValueError(f"omega_l must be > 0, got {omega_l}")
    return (energy - energy_gs) / omega_l


def select_nr(
    energies: np.ndarray,
    omega_l: float,
    max_order: float = 45.0,
    override: int | None = None,
) -> int:
    """Smallest state count whose top energy reaches ``max_order``.

    Clamps to the number of available energies; an explicit ``override``
    wins (also clamped).
    """
    n = len(energies)
    if n == 0:
        raise ValueError("no energies given")
    if override is not None:
        return max(1, min(int(override), n))
    orders = harmonic_order(np.asarray(energies), energies[0], omega_l)
    idx = int(np.searchsorted(orders, max_order, side="left"))
    return min(idx + 1, n)


def state_relevance(eig: EigenBasis, omega_l: float) -> np.ndarray:
    """Per-state (harmonic_order, log10 T_gs^2) pairs, shape (nr, 2).

    States with an exactly zero ground-state coupling get -inf.
    """
    if eig.gs_transition is None:
        raise ValueError("transition matrix not attached")
    orders = harmonic_order(eig.energies, eig.energies[eig.gs_index], omega_l)
    tgs2 = eig.gs_transition**2
    with np.errstate(divide="ignore"):
        logs = np.log10(tgs2)
    return np.column_stack([orders, logs])


def degenerate_clusters(energies: np.ndarray, tol: float = _DEGENERACY_TOL):
    """Group indices of energies lying within ``tol`` of their neighbor.

    Individual eigenvectors inside such a cluster are gauge-dependent;
    comparisons of T entries should aggregate over these groups.
    """
    clusters = []
    current = [0]
    for i in range(1, len(energies)):
        if energies[i] - energies[i - 1] < tol:
            current.append(i)
        else:
            clusters.append(current)
            current = [i]
    clusters.append(current)
    return clusters


def export_levels(eig: EigenBasis, omega_l: float, fh, header_lines=()) -> None:
    """Write the (index, energy, harmonic_order, log10_Tgs2) level table."""
    rel = state_relevance(eig, omega_l)
    for line in header_lines:
        fh.write(f"# {line}\n")
    fh.write("# index\tenergy\tharmonic_order\tlog10_Tgs2\n")
    for m in range(eig.nr):
        fh.write(
            f"{m}\t{eig.energies[m]:.15g}\t{rel[m, 0]:.15g}\t{rel[m, 1]:.15g}\n"
        )
