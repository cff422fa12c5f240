"""Nonlinear energy-balance residual and the averaged steady-state problem."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, SingularJacobianError
from .linearization import jacobian_exact
from .model import HeatProfile, ThermalModel, total_load

log = logging.getLogger(__name__)

KELVIN_OFFSET = 273.15
MIN_TEMPERATURE = 1.0  # K, iteration clamp


def balance_rhs(model: ThermalModel, T, qdot) -> np.ndarray:
    """Temperature rates ``dT_i/dt`` (K/s) of the nodal energy balance.

    Args:
        model: Thermal network.
        T: Node temperatures (K), shape ``(N,)`` or ``(..., N)``.
        qdot: Heat inputs (W), broadcastable against ``T``.
    """
    T = np.asarray(T, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    n = model.node_count
    if T.shape[-1] != n or qdot.shape[-1] != n:
        raise ValueError(f"expected vectors of length {n}, got {T.shape} and {qdot.shape}")
    K, R = model.conduction, model.radiation
    T4 = T ** 4
    # sum_j K_ij (T_i - T_j) = T_i * rowsum_i - (K T)_i
    cond = T * K.sum(axis=1) - T @ K
    rad = T4 * R.sum(axis=1) - T4 @ R
    env = model.env_radiation * (T4 - model.env_temperature ** 4)
    return (qdot - cond - rad - env) / model.capacitance


@dataclass(frozen=True, eq=False)
class SteadyState:
    temperatures: np.ndarray
    residual_norm: float
    iterations: int
    inputs_used: np.ndarray
    clamped: bool = False

    @property
    def celsius(self) -> np.ndarray:
        return self.temperatures - KELVIN_OFFSET

    def to_dict(self) -> dict:
        return {
            "temperatures_K": self.temperatures.tolist(),
            "temperatures_C": self.celsius.tolist(),
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
        }


def solve_steady(model: ThermalModel, qdot, init=None, tol: float = 1e-9,
                 max_iter: int = 100, max_halvings: int = 30) -> SteadyState:
    """Solve ``balance_rhs(T) = 0`` for constant inputs by damped Newton.

    The step is halved (up to ``max_halvings`` times) while the max-norm of
    the residual does not decrease.  Temperatures are clamped at 1 K.

    Raises:
        ConvergenceError: ``max_iter`` reached; carries the last iterate.
        SingularJacobianError: Newton system could not be solved.
    """
    qdot = np.asarray(qdot, dtype=float)
    n = model.node_count
    if qdot.shape != (n,):
        raise ValueError(f"qdot must have length {n}, got shape {qdot.shape}")
    T = np.full(n, 300.0) if init is None else np.array(init, dtype=float).reshape(n)
    T = np.maximum(T, MIN_TEMPERATURE)
    clamped = False

    r = balance_rhs(model, T, qdot)
    rnorm = np.abs(r).max()
    it = 0
    while rnorm > tol:
        if it >= max_iter:
            raise ConvergenceError(f"steady state not converged after {max_iter} iterations "
                                   f"(residual {rnorm:.3e} K/s)", last_iterate=T, residual=rnorm)
        J = jacobian_exact(model, T).matrix
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError(f"singular Jacobian at iteration {it}") from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobianError(f"non-finite Newton step at iteration {it}")
        alpha = 1.0
        for _ in range(max_halvings + 1):
            trial = T + alpha * step
            low = trial < MIN_TEMPERATURE
            if low.any():
                trial = np.where(low, MIN_TEMPERATURE, trial)
            r_trial = balance_rhs(model, trial, qdot)
            trial_norm = np.abs(r_trial).max()
            if trial_norm < rnorm:
                break
            alpha *= 0.5
        else:
            raise ConvergenceError(f"Newton stagnated at iteration {it} (residual {rnorm:.3e} K/s)",
                                   last_iterate=T, residual=rnorm)
        if low.any():
            clamped = True
            log.debug("temperature clamp active at nodes %s", np.flatnonzero(low) + 1)
        T, r, rnorm = trial, r_trial, trial_norm
        it += 1
    return SteadyState(T, float(rnorm), it, qdot.copy(), clamped)


@dataclass(frozen=True)
class HotColdCases:
    hot: SteadyState
    cold: SteadyState
    hot_position: int
    cold_position: int

    def __iter__(self):
        return iter((self.hot, self.cold))


def hot_cold_cases(model: ThermalModel, profile: HeatProfile, tol: float = 1e-9) -> HotColdCases:
    """Steady states at the orbit positions of maximum and minimum total load.

    Ties resolve to the earliest sample index.
    """
    load = total_load(profile)
    hot_k, cold_k = int(np.argmax(load)), int(np.argmin(load))
    hot = solve_steady(model, profile.samples[hot_k], tol=tol)
    cold = solve_steady(model, profile.samples[cold_k], tol=tol)
    return HotColdCases(hot, cold, hot_k, cold_k)


def steady_from_profile(model: ThermalModel, profile: HeatProfile, **kwargs) -> SteadyState:
    return solve_steady(model, profile.means, **kwargs)
