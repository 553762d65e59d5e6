"""Shared helpers for the test suite: deterministic random data generators."""

import math

import numpy as np
import pytest

from lagsol import PeriodicSpec, SolitonParams


def make_orbit_spec(rng, lambdas, alpha, *, frac=None, alpha_range=(0.5, 3.0)):
    """A feasible oscillating spec: base radii in alpha_range, A a fraction of
    the first-integral ceiling at the base point."""
    lambdas = tuple(float(l) for l in lambdas)
    n = len(lambdas)
    alphas = tuple(float(a) for a in np.exp(
        rng.uniform(math.log(alpha_range[0]), math.log(alpha_range[1]), size=n)))
    params = SolitonParams(lambdas, 1.0, float(alpha))
    probe = PeriodicSpec(params, alphas, 1e-8)
    ceiling = math.exp(0.5 * probe.log_G(0.0))
    if frac is None:
        frac = float(rng.uniform(0.3, 0.9))
    return PeriodicSpec(params, alphas, frac * ceiling)


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)
