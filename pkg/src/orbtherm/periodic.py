"""Stationary periodic solution of the linearized thermal equations.

The first-order response to a zero-mean driving ``F`` is computed either
harmonic by harmonic through the resolvent ``(i w_m I - J)^{-1}`` or from the
period-folded convolution integral

    T1(t) = [I - exp(P J)]^{-1} \\int_0^P exp(s J) F(t - s) ds

with ``P`` the orbit period.  The second-order correction solves the same
linear problem with a driving quadratic in the first-order response.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .errors import ProfileError, SingularJacobianError
from .linearization import EXACT, as_matrix, jacobian
from .model import HeatProfile, ThermalModel
from .modes import ModeBasis, decompose
from .steady import SteadyState, solve_steady

FOURIER = "fourier"
INTEGRAL = "integral"
METHODS = (FOURIER, INTEGRAL)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Discrete Fourier coefficients ``F^(m)``, ``m = 0..n-1``, per node."""

    coefficients: np.ndarray
    period: float

    @property
    def sample_count(self) -> int:
        return self.coefficients.shape[0]

    @property
    def harmonics(self) -> np.ndarray:
        return signed_harmonics(self.sample_count)

    @property
    def frequencies(self) -> np.ndarray:
        """Angular frequency (rad/s) attached to each stored coefficient."""
        return 2.0 * np.pi * self.harmonics / self.period


def signed_harmonics(n: int) -> np.ndarray:
    """Map storage index ``m`` to its signed harmonic number.

    Indices above ``n/2`` stand for negative harmonics ``m - n``.  For even
    ``n`` the Nyquist index ``n/2`` keeps the positive sign; it is treated as a
    real cosine wherever it matters.
    """
    m = np.arange(n)
    return np.where(m <= n // 2, m, m - n)


def _nyquist(n: int) -> Optional[int]:
    return n // 2 if n % 2 == 0 else None


def dft_forward(driving, period: float, mean_tol: float = 1e-9) -> Spectrum:
    """``F^(m) = (1/n) sum_k F(k P/n) exp(-2 pi i m k / n)`` for any ``n >= 2``.

    The driving must be zero-mean per column (relative ``mean_tol``); the
    ``m = 0`` coefficient is then set to exactly zero.
    """
    F = np.asarray(driving, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    n = F.shape[0]
    if n < 2:
        raise ProfileError("need at least 2 samples")
    # relative to the largest driving anywhere: constant columns carry only rounding noise
    scale = max(np.abs(F).max(), np.finfo(float).tiny)
    mean = F.mean(axis=0)
    bad = np.flatnonzero(np.abs(mean) > mean_tol * scale)
    if bad.size:
        raise ProfileError(f"driving is not zero-mean at nodes {(bad + 1).tolist()}")
    coef = np.fft.fft(F, axis=0) / n
    coef[0] = 0.0
    return Spectrum(coef, float(period))


def _resolvent_factors(J: np.ndarray, spectrum: Spectrum) -> np.ndarray:
    # R[m] = (i w_m I - J)^{-1}; Nyquist uses the real part (cosine response)
    n, N = spectrum.sample_count, J.shape[0]
    w = spectrum.frequencies
    A = 1j * w[:, None, None] * np.eye(N)[None] - J[None].astype(complex)
    try:
        R = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise SingularJacobianError("resolvent is singular; Jacobian has an eigenvalue on the "
                                    "imaginary axis") from exc
    nyq = _nyquist(n)
    if nyq is not None:
        R[nyq] = R[nyq].real
    return R


def response_spectrum(J, spectrum: Spectrum) -> np.ndarray:
    """Fourier coefficients of the periodic response, shape ``(n, N)``."""
    R = _resolvent_factors(as_matrix(J), spectrum)
    return np.einsum("mab,mb->ma", R, spectrum.coefficients)


def cesaro_weights(n: int) -> np.ndarray:
    """Fejer weights ``1 - |m| / M`` with ``M = (n + 1) / 2``, per storage index."""
    M = (n + 1) / 2.0
    return 1.0 - np.abs(signed_harmonics(n)) / M


def synthesize(coefficients, period: float, times=None, weights=None) -> np.ndarray:
    """Evaluate a real trigonometric sum from its stored coefficients.

    With ``times=None`` the values at the ``n`` sample times come from the
    inverse DFT; otherwise the finite sum is evaluated at the given times.
    """
    X = np.asarray(coefficients)
    if weights is not None:
        X = X * np.asarray(weights)[:, None]
    n = X.shape[0]
    if times is None:
        return (np.fft.ifft(X, axis=0) * n).real
    t = np.atleast_1d(np.asarray(times, dtype=float))
    nyq = _nyquist(n)
    top = (n - 1) // 2
    m = np.arange(1, top + 1)
    phase = np.exp(2j * np.pi * np.outer(t, m) / period)
    out = X[0].real[None, :] + 2.0 * (phase @ X[1:top + 1]).real
    if nyq is not None:
        out = out + np.cos(2.0 * np.pi * nyq * t / period)[:, None] * X[nyq].real[None, :]
    return out


def first_order_fourier(J, spectrum: Spectrum, times=None, cesaro: bool = False) -> np.ndarray:
    """Periodic first-order response from the resolvent at each harmonic.

    Args:
        J: Jacobian (bundle or array) with eigenvalues in the left half plane.
        spectrum: Output of :func:`dft_forward`.
        times: ``None`` for the ``n`` sample times, else arbitrary times (s).
        cesaro: apply Fejer weights to damp Gibbs oscillations.
    """
    X = response_spectrum(J, spectrum)
    weights = cesaro_weights(spectrum.sample_count) if cesaro else None
    return synthesize(X, spectrum.period, times, weights)


def cesaro_smooth(J, spectrum: Spectrum, times=None) -> np.ndarray:
    """Fejer-summed reconstruction of the first-order response."""
    return first_order_fourier(J, spectrum, times, cesaro=True)


def trig_upsample(samples, factor: int) -> np.ndarray:
    """Band-limited interpolation of periodic samples onto a grid ``factor`` times finer."""
    F = np.asarray(samples, dtype=float)
    n = F.shape[0]
    if factor == 1:
        return F.copy()
    M = n * factor
    coef = np.fft.fft(F, axis=0) / n
    Y = np.zeros((M,) + F.shape[1:], dtype=complex)
    m = signed_harmonics(n)
    nyq = _nyquist(n)
    regular = np.arange(n) != (nyq if nyq is not None else -1)
    Y[m[regular] % M] = coef[regular]
    if nyq is not None:
        Y[nyq] += coef[nyq] / 2.0
        Y[M - nyq] += coef[nyq] / 2.0
    return (np.fft.ifft(Y, axis=0) * M).real


def _integral_pass(J: np.ndarray, F: np.ndarray, period: float, refine: int) -> np.ndarray:
    n, N = F.shape
    M = n * refine
    h = period / M
    Fr = trig_upsample(F, refine)

    # Van Loan block exponential: I1 = int_0^h e^{sJ} ds, I2 = int_0^h e^{sJ} (h - s) ds
    Z = np.zeros((3 * N, 3 * N))
    Z[:N, :N] = J
    Z[:N, N:2 * N] = np.eye(N)
    Z[N:2 * N, 2 * N:] = np.eye(N)
    blk = expm(h * Z)
    E_h, I1, I2 = blk[:N, :N], blk[:N, N:2 * N], blk[:N, 2 * N:]
    # F linear on each sub-interval: weights of the near and far endpoint samples
    A_near = I2 / h
    A_far = I1 - I2 / h

    powers = np.empty((M, N, N))
    powers[0] = np.eye(N)
    for j in range(1, M):
        powers[j] = powers[j - 1] @ E_h
    E_period = powers[-1] @ E_h

    U = powers @ A_near
    V = powers @ A_far
    U[1:] += V[:-1]
    U[0] += V[-1]  # last sub-interval reaches s = P, where F(t - P) = F(t)

    idx = (refine * np.arange(n)[:, None] - np.arange(M)[None, :]) % M
    gathered = Fr[idx].reshape(n, M * N)
    kernel = U.transpose(1, 0, 2).reshape(N, M * N)
    S = gathered @ kernel.T
    return np.linalg.solve(np.eye(N) - E_period, S.T).T


def first_order_integral(J, driving, period: float, refine: int = 32,
                         richardson: bool = True) -> np.ndarray:
    """Periodic response at the sample times from the period-folded integral.

    The integrand ``exp(sJ) F(t - s)`` is integrated exactly for ``F``
    linear between grid points (product trapezoidal rule).  With
    ``refine > 1`` the samples are first interpolated onto a finer grid by
    their trigonometric interpolant; ``richardson`` combines grids ``refine``
    and ``2 * refine`` to cancel the leading ``O(h^2)`` error.  ``refine=1``
    with ``richardson=False`` uses the raw samples only.

    The driving need not be zero-mean: a constant ``c`` yields ``-J^{-1} c``.
    """
    mat = as_matrix(J)
    F = np.asarray(driving, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if refine < 1:
        raise ValueError("refine must be >= 1")
    out = _integral_pass(mat, F, period, refine)
    if richardson:
        fine = _integral_pass(mat, F, period, 2 * refine)
        out = (4.0 * fine - out) / 3.0
    if not np.all(np.isfinite(out)):
        raise SingularJacobianError("integral evaluation produced non-finite values")
    return out


def second_order_driving(model: ThermalModel, base_T, first_order) -> np.ndarray:
    """Driving of the second-order equation, K/s, one row per sample.

    ``G_i = sum_j 6 R_ij Tb_j^2 T1_j^2 / C_i - 6 (sum_j R_ij + R_i) Tb_i^2 T1_i^2 / C_i``
    """
    Tb = np.asarray(base_T, dtype=float)
    X = np.asarray(first_order, dtype=float)
    q = 6.0 * (Tb ** 2)[None, :] * X ** 2
    R = model.radiation
    loss = (R.sum(axis=1) + model.env_radiation)[None, :] * q
    return (q @ R.T - loss) / model.capacitance[None, :]


def second_order_shift(J, G) -> np.ndarray:
    """Static part ``-J^{-1} <G>`` of the second-order correction."""
    return -np.linalg.solve(as_matrix(J), np.asarray(G).mean(axis=0))


def second_order_solve(J, G, period: float, method: str = FOURIER, cesaro: bool = False,
                       times=None) -> np.ndarray:
    """Second-order correction: periodic response to ``G`` plus its static shift."""
    G = np.asarray(G, dtype=float)
    shift = second_order_shift(J, G)
    osc = G - G.mean(axis=0)
    if method == FOURIER:
        resp = first_order_fourier(J, dft_forward(osc, period), times, cesaro)
    elif method == INTEGRAL:
        if cesaro or times is not None:
            raise ValueError("cesaro and arbitrary times need the fourier method")
        resp = first_order_integral(J, osc, period)
    else:
        raise ValueError(f"unknown method {method!r}")
    return resp + shift[None, :]


def mode_truncated(basis: ModeBasis, spectrum: Spectrum, keep: int, asymptotic: bool = False,
                   times=None, cesaro: bool = False) -> np.ndarray:
    """First-order response built from the ``keep`` slowest modes.

    With ``asymptotic`` the discarded fast modes still contribute their
    quasi-static value ``F_a(t) / (-lambda_a)``.
    """
    N = basis.size
    if not 0 <= keep <= N:
        raise ValueError(f"keep must be in 0..{N}")
    lam = basis.eigenvalues
    P = basis.mode_matrix
    modal = np.linalg.solve(P, spectrum.coefficients.T).T  # (n, N) modal coefficients
    w = spectrum.frequencies
    denom = 1j * w[:, None] - lam[None, :]
    factor = 1.0 / denom
    nyq = _nyquist(spectrum.sample_count)
    if nyq is not None:
        factor[nyq] = factor[nyq].real
    dropped = np.arange(N) < N - keep  # basis is ordered fastest first
    if asymptotic:
        factor[:, dropped] = 1.0 / (-lam[dropped])[None, :]
    else:
        factor[:, dropped] = 0.0
    X = (modal * factor) @ P.T
    weights = cesaro_weights(spectrum.sample_count) if cesaro else None
    return synthesize(X, spectrum.period, times, weights)


@dataclass(frozen=True, eq=False)
class PeriodicSolution:
    """Sampled periodic thermal state ``base + first_order + second_order`` (K)."""

    times: np.ndarray
    base: np.ndarray
    first_order: np.ndarray
    second_order: np.ndarray
    static_shift: np.ndarray
    method: str
    order: int
    modes_kept: Optional[int] = None
    asymptotic: bool = False
    cesaro: bool = False

    @property
    def total(self) -> np.ndarray:
        return self.base[None, :] + self.first_order + self.second_order

    @property
    def first_order_total(self) -> np.ndarray:
        return self.base[None, :] + self.first_order

    def summary(self) -> dict:
        tot = self.total
        return {
            "method": self.method,
            "order": self.order,
            "modes_kept": self.modes_kept,
            "asymptotic": self.asymptotic,
            "cesaro": self.cesaro,
            "base_K": self.base.tolist(),
            "min_K": tot.min(axis=0).tolist(),
            "max_K": tot.max(axis=0).tolist(),
            "min_C": (tot.min(axis=0) - 273.15).tolist(),
            "max_C": (tot.max(axis=0) - 273.15).tolist(),
            "first_order_max_abs_K": np.abs(self.first_order).max(axis=0).tolist(),
            "second_order_max_abs_K": np.abs(self.second_order).max(axis=0).tolist(),
            "second_order_static_shift_K": self.static_shift.tolist(),
        }


def solve_periodic(model: ThermalModel, profile: HeatProfile, order: int = 2,
                   method: str = FOURIER, keep: Optional[int] = None, asymptotic: bool = False,
                   cesaro: bool = False, variant: str = EXACT,
                   steady: Optional[SteadyState] = None) -> PeriodicSolution:
    """Full pipeline: steady state, Jacobian, first and optional second order."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if method == INTEGRAL and (cesaro or keep is not None):
        raise ValueError("mode truncation and cesaro summation need the fourier method")
    if profile.capacitance is None:
        profile = profile.with_model(model)
    steady = steady or solve_steady(model, profile.means)
    Tb = steady.temperatures
    J = jacobian(model, Tb, variant)
    F = profile.driving
    P = profile.period

    if method == FOURIER:
        spec = dft_forward(F, P)
        if keep is not None:
            basis = decompose(J, model.capacitance)
            T1 = mode_truncated(basis, spec, keep, asymptotic, cesaro=cesaro)
        else:
            T1 = first_order_fourier(J, spec, cesaro=cesaro)
    else:
        T1 = first_order_integral(J, F, P)

    n, N = F.shape
    T2 = np.zeros((n, N))
    shift = np.zeros(N)
    if order == 2:
        G = second_order_driving(model, Tb, T1)
        shift = second_order_shift(J, G)
        T2 = second_order_solve(J, G, P, method, cesaro)
    return PeriodicSolution(profile.times, Tb, T1, T2, shift, method, order, keep,
                            asymptotic, cesaro)
