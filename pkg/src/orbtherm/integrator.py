"""Direct integration of the nonlinear nodal equations.

Adaptive Dormand-Prince 5(4) with a PI step-size controller.  The heat
input between profile samples is linear with periodic wraparound (or, on
request, the band-limited trigonometric interpolant of the samples).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceError, IntegrationError
from .model import HeatProfile, ThermalModel
from .periodic import PeriodicSolution, signed_harmonics
from .steady import balance_rhs, solve_steady

log = logging.getLogger(__name__)

LINEAR = "linear"
FOURIER = "fourier"

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_A_MAT = np.zeros((7, 7))
for _s, _row in enumerate(_A):
    _A_MAT[_s, :len(_row)] = _row
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_LOW = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B_LOW

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_PI_ALPHA = 0.7 / 5
_PI_BETA = 0.4 / 5


class HeatInput:
    """Periodic heat input ``Qdot(t)`` reconstructed from profile samples."""

    def __init__(self, profile: HeatProfile, interpolation: str = LINEAR):
        if interpolation not in (LINEAR, FOURIER):
            raise ValueError(f"unknown interpolation {interpolation!r}")
        self.period = profile.period
        self.samples = profile.samples
        self.n = profile.sample_count
        self.interpolation = interpolation
        if interpolation == FOURIER:
            n = self.n
            coef = np.fft.fft(self.samples, axis=0) / n
            m = signed_harmonics(n)
            keep = m >= 0
            w = np.where(m[keep] == 0, 1.0, 2.0)
            if n % 2 == 0:
                w[-1] = 1.0  # Nyquist term is a real cosine
            self._m = m[keep]
            self._coef = coef[keep] * w[:, None]

    def __call__(self, t: float) -> np.ndarray:
        if self.interpolation == LINEAR:
            x = (t / self.period) * self.n
            k = np.floor(x)
            frac = x - k
            i = int(k) % self.n
            j = (i + 1) % self.n
            return (1.0 - frac) * self.samples[i] + frac * self.samples[j]
        phase = np.exp(2j * np.pi * self._m * (t / self.period))
        return (phase @ self._coef).real


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    accepted_steps: int
    rejected_steps: int
    min_step: float
    max_step: float

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _error_norm(err, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def integrate(model: ThermalModel, profile: HeatProfile, T0, t_span, rtol: float = 1e-8,
              atol: float = 1e-6, t_eval=None, interpolation: str = LINEAR,
              first_step: Optional[float] = None, max_steps: int = 1_000_000) -> Trajectory:
    """Integrate the nonlinear energy balance from ``T0`` over ``t_span``.

    Steps are shortened to land exactly on every time in ``t_eval``, so the
    returned states are not interpolated.  Without ``t_eval`` every accepted
    step is recorded.

    Raises:
        IntegrationError: step size underflow, step budget exhausted, or a
            non-finite / non-positive temperature.
    """
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    y = np.array(T0, dtype=float)
    if y.shape != (model.node_count,) or np.any(y <= 0):
        raise ValueError("T0 must be a positive vector with one entry per node")
    qdot = HeatInput(profile, interpolation)

    def f(t, T):
        return balance_rhs(model, T, qdot(t))

    if t_eval is None:
        targets = np.array([t1])
        record_all = True
    else:
        targets = np.asarray(t_eval, dtype=float)
        if np.any(np.diff(targets) <= 0) or targets[0] < t0 or targets[-1] > t1:
            raise ValueError("t_eval must be increasing and inside t_span")
        record_all = False

    out_t, out_y = [], []
    if targets[0] == t0:
        out_t.append(t0)
        out_y.append(y.copy())
        ti = 1
    else:
        ti = 0
    if record_all:
        out_t, out_y = [t0], [y.copy()]

    t = t0
    k1 = f(t, y)
    if first_step is None:
        # keep the first step inside the fastest local time scale
        d0 = np.linalg.norm(y / (atol + rtol * np.abs(y)))
        d1 = np.linalg.norm(k1 / (atol + rtol * np.abs(y)))
        h = 0.01 * d0 / d1 if d1 > 1e-12 else 1.0
        h = min(h, (t1 - t0))
    else:
        h = first_step
    err_prev = 1e-4
    accepted = rejected = 0
    h_min, h_max = np.inf, 0.0
    stages = np.empty((7, y.size))

    while ti < targets.size:
        if accepted + rejected >= max_steps:
            raise IntegrationError(f"step budget of {max_steps} exhausted at t={t:.6g}")
        target = targets[ti]
        h_eff = min(h, target - t)
        landing = h_eff >= target - t
        if h_eff <= 1e-12 * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t={t:.6g}; review stiff couplings")
        stages[0] = k1
        for s in range(1, 7):
            ys = y + h_eff * (_A_MAT[s, :s] @ stages[:s])
            stages[s] = f(t + _C[s] * h_eff, ys)
        y_new = y + h_eff * (_B @ stages)
        err = _error_norm(h_eff * (_E @ stages), y, y_new, rtol, atol)

        if err <= 1.0 and np.all(np.isfinite(y_new)):
            if np.any(y_new <= 0):
                raise IntegrationError(f"non-positive temperature at t={t + h_eff:.6g}")
            t = target if landing else t + h_eff
            y = y_new
            k1 = stages[6].copy()  # first-same-as-last
            accepted += 1
            h_min, h_max = min(h_min, h_eff), max(h_max, h_eff)
            err = max(err, 1e-10)
            factor = _SAFETY * err ** -_PI_ALPHA * err_prev ** _PI_BETA
            err_prev = err
            h_next = h_eff * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            # a step clipped to hit an output time should not shrink the controller's step
            h = max(h_next, h) if landing else h_next
            if record_all:
                out_t.append(t)
                out_y.append(y.copy())
            if landing:
                if not record_all:
                    out_t.append(t)
                    out_y.append(y.copy())
                ti += 1
        else:
            if not np.isfinite(err):
                h = h_eff * _MIN_FACTOR
            else:
                h = h_eff * max(_MIN_FACTOR, _SAFETY * err ** -0.2)
            rejected += 1

    return Trajectory(np.array(out_t), np.array(out_y), accepted, rejected,
                      float(h_min) if accepted else 0.0, float(h_max))


@dataclass(frozen=True, eq=False)
class CyclicResult:
    """Converged periodic orbit sampled at the profile's sample times."""

    times: np.ndarray
    orbit: np.ndarray
    periods_used: int
    mismatches: tuple
    accepted_steps: int
    rejected_steps: int

    @property
    def contraction_ratios(self) -> np.ndarray:
        d = np.asarray(self.mismatches)
        return d[1:] / d[:-1]

    def contraction_ratio(self, tail: int = 3) -> float:
        """Geometric mean of the last ``tail`` per-period mismatch ratios."""
        r = self.contraction_ratios
        if r.size == 0:
            return float("nan")
        r = r[-tail:]
        return float(np.exp(np.mean(np.log(r))))


def cyclic_solve(model: ThermalModel, profile: HeatProfile, cycle_tol: float = 1e-3,
                 max_periods: int = 50, rtol: float = 1e-8, atol: float = 1e-6,
                 init=None, interpolation: str = LINEAR) -> CyclicResult:
    """Integrate whole periods until start and end temperatures agree.

    Starts from the averaged steady state unless ``init`` is given.  The
    mismatch is the max-norm (K) of ``T(m P) - T((m - 1) P)``.

    Raises:
        ConvergenceError: ``max_periods`` reached; carries the last mismatch.
    """
    if init is None:
        init = solve_steady(model, profile.means).temperatures
    y = np.array(init, dtype=float)
    P = profile.period
    times = profile.times
    t_eval = np.append(times, P)
    mismatches = []
    acc = rej = 0
    for m in range(1, max_periods + 1):
        traj = integrate(model, profile, y, (0.0, P), rtol=rtol, atol=atol, t_eval=t_eval,
                         interpolation=interpolation)
        acc += traj.accepted_steps
        rej += traj.rejected_steps
        end = traj.states[-1]
        d = float(np.abs(end - y).max())
        mismatches.append(d)
        log.debug("period %d: mismatch %.3e K", m, d)
        if d <= cycle_tol:
            return CyclicResult(times, traj.states[:-1], m, tuple(mismatches), acc, rej)
        y = end
    raise ConvergenceError(f"no cyclic convergence in {max_periods} periods "
                           f"(last mismatch {mismatches[-1]:.3e} K)", last_iterate=y,
                           residual=mismatches[-1])


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    """Deviation ``oracle - linear`` at every sample and node (K)."""

    times: np.ndarray
    delta: np.ndarray

    @property
    def max_abs(self) -> np.ndarray:
        return np.abs(self.delta).max(axis=0)

    @property
    def argmax_positions(self) -> np.ndarray:
        return np.abs(self.delta).argmax(axis=0)

    def worst_positions(self, count: int = 2) -> list:
        """Sample indices of the ``count`` largest ``|delta|`` over all nodes, as (k, node)."""
        flat = np.abs(self.delta).ravel()
        order = np.argsort(-flat, kind="stable")[:count]
        N = self.delta.shape[1]
        return [(int(i // N), int(i % N)) for i in order]

    def summary(self) -> dict:
        worst = self.worst_positions(5)
        return {
            "max_abs_K": self.max_abs.tolist(),
            "argmax_sample": self.argmax_positions.tolist(),
            "overall_max_abs_K": float(np.abs(self.delta).max()),
            "worst": [{"sample": k, "node": i + 1, "time_s": float(self.times[k]),
                       "delta_K": float(self.delta[k, i])} for k, i in worst],
        }


def compare(linear, oracle, times=None) -> ComparisonReport:
    """Compare a linear periodic solution with a sampled nonlinear orbit.

    Args:
        linear: :class:`PeriodicSolution` or an ``(n, N)`` temperature array.
        oracle: :class:`CyclicResult` or an ``(n, N)`` temperature array.
        times: Sample times, when neither argument carries them.

    Raises:
        ValueError: the two sample grids differ.
    """
    lin_t = orc_t = None
    if isinstance(linear, PeriodicSolution):
        lin_t, linear = linear.times, linear.total
    if isinstance(oracle, CyclicResult):
        orc_t, oracle = oracle.times, oracle.orbit
    linear = np.asarray(linear, dtype=float)
    oracle = np.asarray(oracle, dtype=float)
    if linear.shape != oracle.shape:
        raise ValueError(f"sample grids differ: {linear.shape} vs {oracle.shape}")
    if lin_t is not None and orc_t is not None and not np.allclose(lin_t, orc_t, rtol=1e-12, atol=1e-9):
        raise ValueError("sample times differ between linear solution and oracle")
    t = next((x for x in (times, lin_t, orc_t) if x is not None), np.arange(linear.shape[0], dtype=float))
    delta = oracle - linear
    if not np.all(np.isfinite(delta)):
        raise ValueError("comparison produced non-finite values")
    return ComparisonReport(np.asarray(t, dtype=float), delta)


def step_positions(profile: HeatProfile, rel_jump: float = 0.05) -> np.ndarray:
    """Sample indices ``k`` where some input jumps between samples ``k`` and ``k+1``.

    A jump counts when it exceeds ``rel_jump`` of that node's input range.
    The last sample wraps around to the first.
    """
    Q = profile.samples
    jump = np.abs(np.roll(Q, -1, axis=0) - Q)
    span = Q.max(axis=0) - Q.min(axis=0)
    big = (span > 0)[None, :] & (jump > rel_jump * span[None, :])
    return np.flatnonzero(big.any(axis=1))


def step_distance(positions, steps, n: int) -> np.ndarray:
    """Circular distance in samples from each position to the nearest step.

    A step between samples ``k`` and ``k+1`` is at distance 0 from both.
    """
    pos = np.atleast_1d(np.asarray(positions, dtype=float))
    steps = np.asarray(steps, dtype=float)
    if steps.size == 0:
        return np.full(pos.shape, np.inf)
    def circular(a):
        a = np.mod(a, n)
        return np.minimum(a, n - a)
    diff = pos[:, None] - steps[None, :]
    d = np.minimum(circular(diff), circular(diff - 1))
    return d.min(axis=1)


def range_overshoot(reconstruction, reference, mask=None) -> np.ndarray:
    """Per-node excursion (K) of ``reconstruction`` beyond the range of ``reference``.

    This is the classical Gibbs overshoot: how far a series reconstruction
    rises above the true maximum or falls below the true minimum.  ``mask``
    restricts the reconstruction samples considered (e.g. to windows around
    the steps); the reference range is always taken over the full period.
    """
    rec = np.asarray(reconstruction, dtype=float)
    ref = np.asarray(reference, dtype=float)
    if mask is not None:
        rec = rec[np.asarray(mask, dtype=bool)]
    above = np.maximum(rec.max(axis=0) - ref.max(axis=0), 0.0)
    below = np.maximum(ref.min(axis=0) - rec.min(axis=0), 0.0)
    return np.maximum(above, below)
