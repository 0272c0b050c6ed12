"""Independent reference computations used to freeze expected values.

Nothing here imports the package's closed forms: Fisher information comes
from numerical quadrature of the squared score, with the score obtained by a
complex-step derivative of the Gaussian log-density.
"""
import math

import numpy as np
from scipy.integrate import quad


def ref_variance(r, n_th, phi):
    return (2 * n_th + 1) * (np.exp(-2 * r) * np.cos(phi) ** 2 + np.exp(2 * r) * np.sin(phi) ** 2)


def ref_log_density(x, phi, r, n_th):
    v = ref_variance(r, n_th, phi)
    return -0.5 * np.log(2 * np.pi * v) - x * x / (2 * v)


def quadrature_fisher(r, n_th, phi, h=1e-20):
    """Integral of (d/dphi ln p)^2 p dx over the real line."""
    s = math.sqrt(ref_variance(r, n_th, phi))

    def integrand(x):
        score = np.imag(ref_log_density(x, phi + 1j * h, r, n_th)) / h
        return score**2 * math.exp(ref_log_density(x, phi, r, n_th))

    return quad(integrand, -40 * s, 40 * s, epsabs=0, epsrel=1e-12, limit=200)[0]


def brute_log_weights(samples, phis, r, n_th):
    """Sample-by-sample log-likelihood sum at every phase (O(M G) memory)."""
    samples = np.asarray(samples, dtype=float)
    return np.array([math.fsum(ref_log_density(samples, phi, r, n_th).tolist()) for phi in phis])
