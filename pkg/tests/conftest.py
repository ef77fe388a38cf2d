"""Shared geometry helpers for the test suite."""

import numpy as np
import pytest

from zfmm.cgeom import complex_distance


def lipschitz_cloud(rng, n, dim, center, radius, lipschitz, phase=0.0):
    """Points whose imaginary parts are a smooth Lipschitz map of the reals.

    The map is psi(x) = (L/|a|) * sin(a.x + phase) * e_pattern with unit
    direction a, whose Jacobian norm is exactly bounded by L.
    """
    re = np.asarray(center, float) + radius * (2.0 * rng.random((n, dim)) - 1.0) / np.sqrt(dim)
    a = np.arange(1, dim + 1, dtype=float)
    a /= np.linalg.norm(a)
    ph = re @ a + phase
    pattern = np.zeros((n, dim))
    pattern[:, 0] = np.sin(ph)
    if dim == 3:
        pattern[:, 2] = 0.5 * np.cos(ph)
        pattern /= np.sqrt(1.25)
    return re + 1j * lipschitz * pattern


def direct_sum(kernel_fn, sources, charges, targets):
    d = complex_distance(
        np.asarray(targets)[:, None, :], np.asarray(sources)[None, :, :]
    )
    return kernel_fn(d) @ np.asarray(charges, complex)


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)
