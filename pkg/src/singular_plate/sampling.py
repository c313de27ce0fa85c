"""Seeded point samplers shared by the solver and the verification checks."""
import numpy as np


def uniform_ball(rng, count, n, radius=1.0):
    g = rng.standard_normal((count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / n)
    return g * r[:, None]


def ball_points_at_depth(rng, delta, n):
    """Random directions at radius 1 - delta."""
    g = rng.standard_normal((len(delta), n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (1.0 - np.asarray(delta))[:, None]


def stratified_depths(count, seed=0, delta_min=1e-6, band=0.1):
    """Distances to the sphere: half stratified uniformly in r on [0, 1 - band],
    half log-stratified in delta on [delta_min, band]; one jittered sample per stratum."""
    rng = np.random.default_rng(seed)
    n_bulk = count // 2
    n_band = count - n_bulk
    u = (np.arange(n_bulk) + rng.random(n_bulk)) / max(n_bulk, 1)
    bulk = 1.0 - u * (1.0 - band)  # delta in (band, 1]
    v = (np.arange(n_band) + rng.random(n_band)) / max(n_band, 1)
    edge = delta_min * (band / delta_min) ** v
    return np.sort(np.concatenate([bulk, edge]))
