"""Thermal modes: eigen-decomposition of the Jacobian.

The eigenproblem is solved for ``A = C^{1/2} J C^{-1/2}``, which is symmetric
for the heuristic Jacobians and nearly symmetric for the exact one, so its
eigenvectors are well conditioned.  Modes are mapped back with
``P = C^{-1/2} O`` and scaled so that ``diag(P^t C P) = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpectralError
from .linearization import as_matrix, similarity_transform

REALNESS_TOL = 1e-6
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ModeBasis:
    """Eigenvalues (sorted by decreasing magnitude) and mode matrix ``P``.

    Column ``a`` of ``mode_matrix`` is the eigenvector for ``eigenvalues[a]``;
    the last column is the slowest (Perron) mode.
    """

    eigenvalues: np.ndarray
    mode_matrix: np.ndarray
    capacitance: np.ndarray
    normalization_error: float
    max_imag_part: float
    residual: float

    @property
    def relaxation_times(self) -> np.ndarray:
        return 1.0 / np.abs(self.eigenvalues)

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.mode_matrix)

    def to_dict(self) -> dict:
        tau = self.relaxation_times
        return {
            "eigenvalues_per_s": self.eigenvalues.tolist(),
            "relaxation_times_s": tau.tolist(),
            "relaxation_times_min": (tau / 60.0).tolist(),
            "normalization_error": self.normalization_error,
            "max_imag_part": self.max_imag_part,
        }


def _real_basis(w: np.ndarray, V: np.ndarray):
    """Turn a LAPACK eigen-solution with tiny imaginary parts into a real one."""
    w_re = w.real.copy()
    V_re = np.empty(V.shape)
    done = np.zeros(w.size, dtype=bool)
    for a in range(w.size):
        if done[a]:
            continue
        v = V[:, a]
        if w[a].imag == 0.0 and not np.any(v.imag):
            V_re[:, a] = v.real
            done[a] = True
            continue
        # conjugate partner, if present: span{Re v, Im v} is a real invariant subspace
        partner = [b for b in range(a + 1, w.size)
                   if not done[b] and np.isclose(w[b], np.conj(w[a]), rtol=0, atol=abs(w[a].imag) * 1e-6 + 1e-300)]
        if partner:
            b = partner[0]
            basis, _ = np.linalg.qr(np.column_stack([v.real, v.imag]))
            V_re[:, a], V_re[:, b] = basis[:, 0], basis[:, 1]
            w_re[a] = w_re[b] = w[a].real
            done[a] = done[b] = True
        else:
            k = np.argmax(np.abs(v))
            V_re[:, a] = (v * np.conj(v[k]) / abs(v[k])).real
            done[a] = True
    return w_re, V_re


def _orthogonalize_degenerate(w: np.ndarray, O: np.ndarray) -> np.ndarray:
    O = O.copy()
    scale = np.abs(w).max()
    a = 0
    while a < w.size:
        b = a + 1
        while b < w.size and abs(w[b] - w[a]) <= DEGENERACY_TOL * scale:
            b += 1
        if b - a > 1:
            O[:, a:b], _ = np.linalg.qr(O[:, a:b])
        a = b
    return O


def decompose(J, C) -> ModeBasis:
    """Full eigen-decomposition of ``J`` in the capacitance metric.

    Raises:
        SpectralError: eigenvalues have imaginary parts beyond ``1e-6`` of
            the spectral radius, or the eigenvector matrix is singular
            (defective ``J``).
    """
    mat = as_matrix(J)
    C = np.asarray(C, dtype=float)
    A = similarity_transform(mat, C)
    w, V = np.linalg.eig(A)
    scale = np.abs(w).max()
    max_imag = float(np.abs(w.imag).max())
    if scale > 0 and max_imag / scale >= REALNESS_TOL:
        raise SpectralError(f"Jacobian has complex eigenvalues (max |Im| / max |lambda| = "
                            f"{max_imag / scale:.3e}); model is outside the supported regime")
    w, O = _real_basis(w, V)

    order = np.argsort(-np.abs(w), kind="stable")
    w, O = w[order], O[:, order]
    O /= np.linalg.norm(O, axis=0)
    # checked before orthogonalizing, which would hide parallel eigenvectors
    if np.linalg.cond(O) > 1e12:
        raise SpectralError("Jacobian is defective: eigenvectors are linearly dependent")
    O = _orthogonalize_degenerate(w, O)

    # sign convention: Perron mode positive, others with positive largest entry
    for a in range(w.size - 1):
        k = np.argmax(np.abs(O[:, a]))
        if O[k, a] < 0:
            O[:, a] = -O[:, a]
    if O[:, -1].sum() < 0:
        O[:, -1] = -O[:, -1]

    P = O / np.sqrt(C)[:, None]
    gram = P.T @ (C[:, None] * P)
    norm_err = float(np.abs(gram - np.eye(w.size)).max())
    res = np.linalg.norm(mat @ P - P * w[None, :], axis=0) / np.linalg.norm(P, axis=0)
    residual = float(res.max() / max(np.linalg.norm(mat), 1e-300))
    return ModeBasis(w, P, C, norm_err, max_imag, residual)


def perron_mode(basis: ModeBasis, normalization: str = "euclidean"):
    """Slowest mode ``(eigenvalue, eigenvector)`` with a strictly positive vector.

    Args:
        basis: Output of :func:`decompose`.
        normalization: ``"euclidean"`` for a unit-length vector or
            ``"capacitance"`` for ``p^t C p = 1``.

    Raises:
        SpectralError: some component is not strictly positive.
    """
    lam = float(basis.eigenvalues[-1])
    p = basis.mode_matrix[:, -1].copy()
    if normalization == "euclidean":
        p /= np.linalg.norm(p)
    elif normalization == "capacitance":
        p /= np.sqrt(p @ (basis.capacitance * p))
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    bad = np.flatnonzero(p <= 0)
    if bad.size:
        raise SpectralError(f"Perron mode not strictly positive at nodes {(bad + 1).tolist()}; "
                            "the coupling graph may be reducible")
    return lam, p


def symmetric_split(J, C):
    """Split ``C^{1/2} J C^{-1/2}`` into symmetric and antisymmetric parts."""
    A = similarity_transform(J, C)
    return (A + A.T) / 2.0, (A - A.T) / 2.0


def antisymmetric_eigen_shift(J, C) -> np.ndarray:
    """First-order eigenvalue shifts caused by the antisymmetric part.

    With ``e_a`` the orthonormal eigenvectors of the symmetric part ``S``,
    returns ``e_a^t dA e_a`` for each mode, which vanishes identically.
    Ordered like the eigenvalues of ``S`` (ascending).
    """
    S, dA = symmetric_split(J, C)
    _, E = np.linalg.eigh(S)
    return np.einsum("ia,ij,ja->a", E, dA, E)


def symmetric_part_eigenvalues(J, C) -> np.ndarray:
    """Eigenvalues of the symmetric part, sorted by decreasing magnitude."""
    S, _ = symmetric_split(J, C)
    w = np.linalg.eigvalsh(S)
    return w[np.argsort(-np.abs(w), kind="stable")]
