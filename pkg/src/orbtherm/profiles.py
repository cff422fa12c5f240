"""Synthetic eclipse-like heat-input profiles.

Stand-in for orbital heat loads computed by a radiative tool: each external
node sees a trapezoidal sunlit pulse on top of a constant baseline and the
result is rescaled so that every column keeps its reference mean.
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .errors import ProfileError
from .model import HeatProfile, ThermalModel


def eclipse_pulse(u, duty: float, ramp: float, hard_steps: bool = False) -> np.ndarray:
    """Sunlit indicator over orbit phase ``u`` (fraction of period).

    The sunlit arc is ``[0, duty)``.  Soft pulses ramp linearly over a phase
    width ``ramp`` centred on each transition.
    """
    u = np.mod(u, 1.0)
    inside = u < duty
    d = np.where(inside, np.minimum(u, duty - u), -np.minimum(u - duty, 1.0 - u))
    if hard_steps or ramp <= 0:
        return (d >= 0).astype(float)
    return np.clip(0.5 + d / ramp, 0.0, 1.0)


def synthetic_eclipse_profile(model: ThermalModel, means: Optional[Sequence[float]] = None,
                              n: int = 111, period: float = 6660.0, duty: float = 0.7,
                              baseline: float = 0.2, hard_steps: bool = False,
                              ramp: float = 0.04, stagger: float = 0.05, seed: int = 0,
                              modulated: Optional[Sequence[bool]] = None) -> HeatProfile:
    """Deterministic eclipse-like profile whose column means equal ``means``.

    Args:
        model: Thermal model; supplies capacitances and default means.
        means: Orbit-mean inputs per node (W); defaults to ``model.mean_inputs``.
        n: Number of samples over one period.
        period: Orbit period (s).
        duty: Sunlit fraction of the orbit, in (0, 1).
        baseline: Eclipse input as a fraction of the sunlit input, in [0, 1).
        hard_steps: Use discontinuous eclipse entry and exit.
        ramp: Transition width (fraction of period) for soft pulses.
        stagger: Spread of per-node pulse phases (fraction of period).
        seed: Seed for the small per-node phase jitter.
        modulated: Which nodes receive the pulse; by default those with a
            radiative link to the environment.  The rest stay constant.
    """
    if not 0.0 < duty < 1.0:
        raise ProfileError(f"duty must lie in (0, 1), got {duty}")
    if not 0.0 <= baseline < 1.0:
        raise ProfileError(f"baseline must lie in [0, 1), got {baseline}")
    if n < 8:
        raise ProfileError(f"need at least 8 samples, got {n}")
    if not period > 0:
        raise ProfileError(f"period must be positive, got {period}")
    if means is None:
        if model.mean_inputs is None:
            raise ProfileError("model file has no mean_inputs block; pass the means explicitly")
        means = model.mean_inputs
    means = np.asarray(means, dtype=float)
    N = model.node_count
    if means.shape != (N,):
        raise ProfileError(f"expected {N} mean inputs, got {means.shape}")
    mask = model.env_radiation > 0 if modulated is None else np.asarray(modulated, dtype=bool)

    rng = np.random.default_rng(seed)
    jitter = rng.uniform(-0.005, 0.005, size=N)
    phases = -duty / 2.0 + stagger * np.arange(N) / N + jitter  # t = 0 sits mid-daylight

    u = np.arange(n)[:, None] / n - phases[None, :]
    pulse = eclipse_pulse(u, duty, ramp, hard_steps)
    shape = baseline + (1.0 - baseline) * pulse
    shape = shape / shape.mean(axis=0)
    samples = np.where(mask[None, :], means[None, :] * shape, means[None, :])
    return HeatProfile(period, samples, model.capacitance)


def cosine_profile(model: ThermalModel, means: Sequence[float], amplitudes: Sequence[float],
                   n: int = 64, period: float = 6660.0, harmonic: int = 1,
                   phases: Optional[Sequence[float]] = None) -> HeatProfile:
    """``Qdot_i(t) = mean_i + amp_i cos(2 pi h t / P + phase_i)``; band-limited test input."""
    t = np.arange(n) * period / n
    ph = np.zeros(model.node_count) if phases is None else np.asarray(phases, dtype=float)
    samples = (np.asarray(means, dtype=float)[None, :]
               + np.asarray(amplitudes, dtype=float)[None, :]
               * np.cos(2 * np.pi * harmonic * t[:, None] / period + ph[None, :]))
    return HeatProfile(period, samples, model.capacitance)
