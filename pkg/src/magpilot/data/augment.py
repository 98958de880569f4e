"""Photometric augmentation of occupancy grids.

Brightness factor in [0.85, 1.15] applied with probability 0.5; contrast in
[0.90, 1.10] about the 0.5 midpoint with probability 0.3. Feature vectors,
action labels and prompts are never touched.
"""

import numpy as np

from magpilot.sim.observe import Observation


def augment_grid(grid: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # draw everything up front so the rng stream shape is input-independent
    coin_b = rng.random()
    fac_b = rng.uniform(0.85, 1.15)
    coin_c = rng.random()
    fac_c = rng.uniform(0.90, 1.10)
    brightness = fac_b if coin_b < 0.5 else 1.0
    contrast = fac_c if coin_c < 0.3 else 1.0
    if brightness == 1.0 and contrast == 1.0:
        return grid
    return np.clip(((grid - 0.5) * contrast + 0.5) * brightness, 0.0, 1.0)


def augment_observation(obs: Observation, rng: np.random.Generator) -> Observation:
    if obs.grid is None:
        raise ValueError("augment_observation requires a grid observation")
    return Observation(features=obs.features, grid=augment_grid(obs.grid, rng))
