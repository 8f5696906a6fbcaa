"""Seeded spectral sampling shared by the verification drivers."""

import math

import numpy as np

DEFAULT_SEED = 0x5EED


def log_annulus_points(count, rng, rmin=0.5, rmax=2.0):
    """Logarithms of points log-uniform in modulus on rmin <= |z| <= rmax, uniform phase."""
    radius = rng.uniform(math.log(rmin), math.log(rmax), size=count)
    phase = rng.uniform(-math.pi, math.pi, size=count)
    return radius + 1j * phase


def resampled(evaluate, count, rng, skip=(), max_tries=None, points=1, **annulus):
    """Evaluate ``evaluate(*logs)`` on ``count`` accepted samples.

    Draws ``points`` log-spectral values per sample and redraws whenever the
    evaluation raises one of ``skip`` (pole hits).  Returns the list of
    (logs, value) pairs in draw order.
    """
    max_tries = max_tries or 20 * count
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError("too many rejected samples")
        logs = tuple(log_annulus_points(points, rng, **annulus))
        try:
            value = evaluate(*logs)
        except skip:
            continue
        out.append((logs, value))
    return out


def make_rng(seed=DEFAULT_SEED):
    return np.random.default_rng(seed)
