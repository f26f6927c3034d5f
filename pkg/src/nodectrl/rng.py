"""Deterministic random-stream derivation.

One master 64-bit seed drives every experiment. Each consumer derives its own
generator from (master, purpose, *indices) so adding an experiment or changing
the number of draws in one place never perturbs another's stream. The composite
key feeds numpy's SeedSequence directly.

Purpose ids (stable; append only):
  1  ensemble initial data
  2  surrogate node placement
  3  Monte-Carlo loss sampling
  4  particle push-forward sampling
  5  randomized property-test instances
"""

import numpy as np

ENSEMBLE = 1
NODES = 2
MC_LOSS = 3
PARTICLES = 4
TESTS = 5


def derive(master_seed, *key):
    """Generator for the stream (master_seed, *key)."""
    return np.random.default_rng([int(master_seed), *map(int, key)])


def derive_key(master_seed, *key):
    """Composite key tuple, for APIs that derive further sub-streams."""
    return (int(master_seed), *map(int, key))
