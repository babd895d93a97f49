"""Biorthogonal eigendecomposition of non-Hermitian matrices.

Provides the eigensystem (right vectors of H, left vectors of H^dag,
biorthonormalized), the positive-definite inner-product metric W built
from the left vectors, and the gauge bookkeeping (smooth gauge fixing
along parameter paths, explicit gauge transformations) that downstream
geometric quantities rely on.

Normalization convention: right vectors have unit 2-norm with their
largest-magnitude component real positive; left vectors are rescaled so
that <Phi_n|Psi_n> = 1 exactly. Eigenvalues are sorted by (Re E, Im E)
ascending.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import (
    AmbiguousMatching,
    DefectiveMatrix,
    NonFinite,
    NotPositiveDefinite,
    ZeroScale,
)

__all__ = [
    "HamiltonianFamily",
    "BiorthoEigensystem",
    "MetricOperator",
    "biortho_eig",
    "build_W",
    "gauge_fix",
    "gauge_transform",
]


@dataclass(frozen=True)
class HamiltonianFamily:
    """A smooth map from a real d-dimensional parameter point to an NxN matrix.

    Parameters
    ----------
    dim_hilbert : int
        Matrix size N.
    dim_param : int
        Number of real parameters d.
    evaluate : callable
        ``evaluate(lam) -> (N, N) complex ndarray`` for a length-d point.
    derivative : callable, optional
        ``derivative(lam, mu) -> (N, N) complex ndarray`` giving the
        analytic partial derivative along direction ``mu``. When absent,
        consumers fall back to central differences of ``evaluate``.
    """

    dim_hilbert: int
    dim_param: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    derivative: Optional[Callable[[np.ndarray, int], np.ndarray]] = None

    def __post_init__(self):
        if self.dim_hilbert < 1 or self.dim_param < 1:
            raise ValueError("dimensions must be positive")

    def __call__(self, lam) -> np.ndarray:
        return np.asarray(self.evaluate(np.asarray(lam, dtype=float)), dtype=complex)

    def deriv(self, lam, mu: int, step: float = 1e-6) -> np.ndarray:
        """Partial derivative of the matrix along direction ``mu``."""
        lam = np.asarray(lam, dtype=float)
        if self.derivative is not None:
            return np.asarray(self.derivative(lam, mu), dtype=complex)
        e = np.zeros_like(lam)
        e[mu] = step
        return (self(lam + e) - self(lam - e)) / (2.0 * step)


@dataclass(frozen=True)
class BiorthoEigensystem:
    """Eigenvalues with paired right/left eigenvectors, biorthonormalized.

    ``right[:, n]`` is Psi_n with H Psi_n = E_n Psi_n; ``left[:, n]`` is
    Phi_n with H^dag Phi_n = E_n^* Phi_n and <Phi_m|Psi_n> = delta_mn.
    """

    energies: np.ndarray
    right: np.ndarray
    left: np.ndarray
    unbroken: bool
    tol_real: float = 1e-9

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    def overlap_matrix(self) -> np.ndarray:
        """<Phi_m|Psi_n>; identity for a valid eigensystem."""
        return self.left.conj().T @ self.right


@dataclass(frozen=True)
class MetricOperator:
    """Positive-definite W with W H = H^dag W, defining the inner product."""

    matrix: np.ndarray
    source: str = "from_eigensystem"  # or "user_supplied"


def _cluster_indices(values: np.ndarray, tol: float):
    """Group indices of sorted complex values whose neighbours lie within tol."""
    groups = []
    current = [0]
    for i in range(1, len(values)):
        if abs(values[i] - values[i - 1]) <= tol:
            current.append(i)
        else:
            groups.append(current)
            current = [i]
    groups.append(current)
    return groups


def biortho_eig(
    h,
    tol_degenerate: float | None = None,
    tol_real: float = 1e-9,
) -> BiorthoEigensystem:
    """Biorthogonal eigendecomposition of a square complex matrix.

    Parameters
    ----------
    h : array_like, shape (N, N)
    tol_degenerate : float, optional
        Eigenvalue-distance threshold below which coalescing eigenvectors
        are treated as defective. Defaults to ``1e-8 * spectral_radius``.
    tol_real : float
        Relative tolerance on ``|Im E|`` for the ``unbroken`` flag.

    Raises
    ------
    NonFinite
        On NaN/Inf entries.
    DefectiveMatrix
        When nearly-equal eigenvalues come with a singular eigenvector
        overlap (an exceptional point).
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h.view(float))):
        raise NonFinite("matrix contains NaN or Inf entries")

    w, vl, vr = scipy.linalg.eig(h, left=True, right=True)
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    vr = vr[:, order]
    vl = vl[:, order]

    radius = float(np.max(np.abs(w))) if w.size else 0.0
    # Scale on the matrix norm, not the spectral radius: at an exceptional
    # point all eigenvalues can sit near zero while the matrix does not.
    norm_scale = float(np.linalg.norm(h)) / np.sqrt(h.shape[0])
    scale = max(radius, norm_scale) or 1.0
    if tol_degenerate is None:
        tol_degenerate = 1e-8 * scale

    # Exceptional-point detection: eigenvalue clusters whose right vectors
    # span less than the cluster size.
    for group in _cluster_indices(w, tol_degenerate):
        if len(group) < 2:
            continue
        s = scipy.linalg.svdvals(vr[:, group])
        if s[-1] <= 1e-8 * s[0]:
            raise DefectiveMatrix(
                f"eigenvalues near {w[group[0]]:.6g} have coalescing eigenvectors"
            )
        # Degenerate but diagonalizable: LAPACK's left/right pairing is not
        # biorthogonal within the cluster, so re-pair explicitly.
        sub = vl[:, group].conj().T @ vr[:, group]
        vl[:, group] = vl[:, group] @ np.linalg.inv(sub).conj().T

    # Phase/norm fix on right vectors.
    norms = np.linalg.norm(vr, axis=0)
    if np.any(norms == 0):
        raise DefectiveMatrix("zero right eigenvector returned by solver")
    vr = vr / norms
    lead = np.argmax(np.abs(vr), axis=0)
    phases = vr[lead, np.arange(vr.shape[1])]
    vr = vr * (np.abs(phases) / phases)

    # Rescale left vectors for <Phi_n|Psi_n> = 1.
    diag = np.einsum("in,in->n", vl.conj(), vr)
    if np.any(np.abs(diag) < 1e-13 * np.linalg.norm(vl, axis=0) * 1.0):
        raise DefectiveMatrix("left/right eigenvector overlap numerically singular")
    vl = vl / diag.conj()

    im_max = float(np.max(np.abs(w.imag))) if w.size else 0.0
    unbroken = im_max <= tol_real * scale

    return BiorthoEigensystem(
        energies=w, right=vr, left=vl, unbroken=unbroken, tol_real=tol_real
    )


def build_W(eig: BiorthoEigensystem) -> MetricOperator:
    """Inner-product metric W = sum_n |Phi_n><Phi_n| from the left vectors.

    With this W the right vectors are orthonormal in the W inner product:
    <Psi_m|W|Psi_n> = delta_mn.
    """
    w = eig.left @ eig.left.conj().T
    w = 0.5 * (w + w.conj().T)
    evals = np.linalg.eigvalsh(w)
    if evals[0] <= 0:
        raise NotPositiveDefinite(
            f"smallest eigenvalue of W is {evals[0]:.3e}; eigensystem is broken"
        )
    return MetricOperator(matrix=w, source="from_eigensystem")


def gauge_fix(prev: BiorthoEigensystem, cur: BiorthoEigensystem) -> BiorthoEigensystem:
    """Align ``cur`` with ``prev``: reorder by maximal overlap, remove phases.

    After the fix, <Phi_n^prev|Psi_n^cur> is real positive for every n and
    <Phi_n|Psi_n> = 1 is preserved. Raises AmbiguousMatching when the
    greedy overlap assignment is not a permutation (a degeneracy was
    crossed between the two parameter points).
    """
    overlaps = prev.left.conj().T @ cur.right  # M[n, m] = <Phi_n^prev | Psi_m^cur>
    assign = np.argmax(np.abs(overlaps), axis=1)
    if len(set(assign.tolist())) != prev.dim:
        raise AmbiguousMatching("overlap matching is not a permutation")

    energies = cur.energies[assign]
    right = cur.right[:, assign]
    left = cur.left[:, assign]

    matched = overlaps[np.arange(prev.dim), assign]
    if np.any(np.abs(matched) < 1e-12):
        raise AmbiguousMatching("matched overlap is numerically zero")
    # Unit phase s makes <Phi^prev|s Psi^cur> real positive; scaling both
    # Psi and Phi by s keeps <Phi|Psi> = 1.
    s = matched.conj() / np.abs(matched)
    right = right * s
    left = left * s

    return BiorthoEigensystem(
        energies=energies,
        right=right,
        left=left,
        unbroken=cur.unbroken,
        tol_real=cur.tol_real,
    )


def gauge_transform(eig: BiorthoEigensystem, f) -> BiorthoEigensystem:
    """Scale Psi_n by f_n and Phi_n by 1/f_n^*; biorthonormality is exact."""
    f = np.asarray(f, dtype=complex)
    if f.shape != (eig.dim,):
        raise ValueError(f"expected {eig.dim} scale factors, got shape {f.shape}")
    if np.any(f == 0):
        raise ZeroScale("gauge scale factors must be nonzero")
    return BiorthoEigensystem(
        energies=eig.energies,
        right=eig.right * f,
        left=eig.left / f.conj(),
        unbroken=eig.unbroken,
        tol_real=eig.tol_real,
    )
