"""Jacobians of the nodal energy balance and their structural diagnostics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import ThermalModel

EXACT = "exact"
HEURISTIC_ONE_SIDED = "heuristic_one_sided"
HEURISTIC_SYMMETRIZED = "heuristic_symmetrized"
VARIANTS = (EXACT, HEURISTIC_ONE_SIDED, HEURISTIC_SYMMETRIZED)


@dataclass(frozen=True, eq=False)
class JacobianBundle:
    """Linearized system matrix ``J`` (1/s) with its provenance.

    ``radiation_conductances`` and ``env_conductances`` (W/K) are only set for
    the heuristic variants, where radiation is replaced by effective linear
    conductances.
    """

    matrix: np.ndarray
    variant: str
    reference_T: np.ndarray
    radiation_conductances: Optional[np.ndarray] = None
    env_conductances: Optional[np.ndarray] = None

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def as_matrix(J) -> np.ndarray:
    """Accept either a :class:`JacobianBundle` or a plain square array."""
    mat = J.matrix if isinstance(J, JacobianBundle) else np.asarray(J, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"Jacobian must be square, got shape {mat.shape}")
    return mat


def _check_T(model: ThermalModel, T) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    if T.shape != (model.node_count,):
        raise ValueError(f"temperature vector must have length {model.node_count}, got shape {T.shape}")
    if np.any(T <= 0):
        raise ValueError("temperatures must be positive")
    return T


def jacobian_exact(model: ThermalModel, T) -> JacobianBundle:
    """Exact Jacobian of the energy balance at temperatures ``T``.

    ``J_ij = (K_ij + 4 R_ij T_j^3) / C_i`` off the diagonal and
    ``J_ii = -[sum_k (K_ik + 4 R_ik T_i^3) + 4 R_i T_i^3] / C_i``.
    """
    T = _check_T(model, T)
    K, R, C = model.conduction, model.radiation, model.capacitance
    T3 = T ** 3
    J = (K + 4.0 * R * T3[None, :]) / C[:, None]
    diag = -(K.sum(axis=1) + 4.0 * R.sum(axis=1) * T3 + 4.0 * model.env_radiation * T3) / C
    np.fill_diagonal(J, diag)
    return JacobianBundle(J, EXACT, T)


def radiation_conductances(model: ThermalModel, T_ref, symmetrized: bool = False):
    """Effective linear conductances replacing the radiation couplings.

    Returns the symmetric matrix ``K^R_ij`` and the environment vector
    ``K^R_i = 4 R_i T_i^3`` (both W/K).
    """
    T = _check_T(model, T_ref)
    R = model.radiation
    Ti, Tj = T[:, None], T[None, :]
    if symmetrized:
        KR = 2.0 * R * (Ti ** 3 + Tj ** 3)
    else:
        KR = R * (Ti + Tj) * (Ti ** 2 + Tj ** 2)
    np.fill_diagonal(KR, 0.0)
    return KR, 4.0 * model.env_radiation * T ** 3


def jacobian_heuristic(model: ThermalModel, T_ref, symmetrized: bool = False) -> JacobianBundle:
    """Jacobian of the conduction-only network obtained with radiation conductances."""
    T = _check_T(model, T_ref)
    KR, KRenv = radiation_conductances(model, T, symmetrized)
    total = model.conduction + KR
    C = model.capacitance
    J = total / C[:, None]
    np.fill_diagonal(J, -(total.sum(axis=1) + KRenv) / C)
    variant = HEURISTIC_SYMMETRIZED if symmetrized else HEURISTIC_ONE_SIDED
    return JacobianBundle(J, variant, T, KR, KRenv)


def jacobian(model: ThermalModel, T, variant: str = EXACT) -> JacobianBundle:
    if variant == EXACT:
        return jacobian_exact(model, T)
    if variant == HEURISTIC_ONE_SIDED:
        return jacobian_heuristic(model, T, symmetrized=False)
    if variant == HEURISTIC_SYMMETRIZED:
        return jacobian_heuristic(model, T, symmetrized=True)
    raise ValueError(f"unknown Jacobian variant {variant!r}; choose from {VARIANTS}")


def similarity_transform(J, C) -> np.ndarray:
    """``C^{1/2} J C^{-1/2}``; symmetric whenever ``C J`` is."""
    s = np.sqrt(np.asarray(C, dtype=float))
    return s[:, None] * as_matrix(J) / s[None, :]


@dataclass(frozen=True)
class StructureReport:
    """Sign-pattern, dominance and spectral diagnostics of a Jacobian.

    ``diagonal_dominance`` checks plain row dominance ``|J_ii| >= sum |J_ij|``;
    models can fail it and still be similar to a dominant matrix through a
    positive diagonal scaling, which is not tested here.
    """

    z_matrix: bool
    diagonal_dominance: tuple
    max_real_eigenvalue: float
    stable: bool
    antisymmetry_ratio: float

    @property
    def all_rows_dominant(self) -> bool:
        return all(self.diagonal_dominance)

    def to_dict(self) -> dict:
        return {
            "z_matrix": self.z_matrix,
            "diagonal_dominance": list(self.diagonal_dominance),
            "all_rows_dominant": self.all_rows_dominant,
            "max_real_eigenvalue": self.max_real_eigenvalue,
            "stable": self.stable,
            "antisymmetry_ratio": self.antisymmetry_ratio,
        }


def antisymmetry_ratio(J, C) -> float:
    A = similarity_transform(J, C)
    return float(np.linalg.norm((A - A.T) / 2.0) / np.linalg.norm(A))


def structure_report(J, C) -> StructureReport:
    mat = as_matrix(J)
    off = mat - np.diag(np.diag(mat))
    z_matrix = bool(np.all(off >= 0) and np.all(np.diag(mat) < 0))
    # rows with no radiation escape are dominant with equality; allow rounding
    dominance = tuple(bool(abs(mat[i, i]) * (1 + 1e-12) >= np.abs(off[i]).sum())
                      for i in range(mat.shape[0]))
    eig = np.linalg.eigvals(similarity_transform(mat, C))
    max_re = float(eig.real.max())
    return StructureReport(
        z_matrix=z_matrix,
        diagonal_dominance=dominance,
        max_real_eigenvalue=max_re,
        stable=bool(max_re < -1e-15 * np.linalg.norm(mat)),
        antisymmetry_ratio=antisymmetry_ratio(mat, C),
    )
