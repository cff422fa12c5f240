"""Small model builders shared by the test modules."""
import numpy as np

from orbtherm import HeatProfile, ThermalModel

PERIOD = 6660.0
REFERENCE_MEANS = np.array([15.18, 2.30, 15.17, 14.80, 3.91, 0.63, 0.0, 1.70, 4.35, 6.15])
REFERENCE_TEMPS_C = np.array([2.6, 3.6, 2.6, 2.3, 0.2, 2.2, 6.3, 4.7, 15.9, 11.1])


def single_node(C=100.0, R=2e-9, T0=0.0):
    return ThermalModel([C], [[0.0]], [[0.0]], [R], env_temperature=T0)


def random_model(rng, N=3, dense=True):
    """Fully coupled random model in a spacecraft-like parameter range."""
    C = rng.uniform(50.0, 500.0, N)
    K = np.zeros((N, N))
    R = np.zeros((N, N))
    iu = np.triu_indices(N, 1)
    K[iu] = rng.uniform(0.05, 0.5, iu[0].size)
    R[iu] = rng.uniform(1e-10, 5e-10, iu[0].size)
    if not dense:
        K[iu] *= rng.random(iu[0].size) < 0.6
        R[iu] *= rng.random(iu[0].size) < 0.6
    K, R = K + K.T, R + R.T
    Ri = rng.uniform(0.5e-9, 3e-9, N)
    return ThermalModel(C, K, R, Ri)


def two_harmonic_profile(model, means, rng, n=32, period=PERIOD, rel1=0.6, rel2=0.2):
    """Band-limited driving with random phases; exact under the DFT at this ``n``."""
    N = model.node_count
    t = np.arange(n) * period / n
    ph = rng.uniform(0.0, 2 * np.pi, (2, N))
    w = 2 * np.pi / period
    q = (means + rel1 * means * np.cos(w * t[:, None] + ph[0])
         + rel2 * means * np.cos(2 * w * t[:, None] + ph[1]))
    return HeatProfile(period, q, model.capacitance)

# PASS/FAIL lines from test_acceptance, printed in the terminal summary
ACCEPTANCE = []
