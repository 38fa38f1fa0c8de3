"""Seeding helpers.

Every stochastic operation in the package takes an explicit
``numpy.random.Generator``.  All generators are built here on top of the
Philox counter-based bit generator so that trials running in parallel get
independent, bitwise-reproducible streams.
"""

from __future__ import annotations

import numpy as np


def make_rng(*entropy: int) -> np.random.Generator:
    """Build a Generator from one or more integer seed components.

    Components are combined through a SeedSequence, so ``make_rng(7)`` and
    ``make_rng(7, 1)`` are independent streams.
    """
    if not entropy:
        raise ValueError("at least one seed component is required")
    seq = np.random.SeedSequence([int(e) & 0xFFFFFFFFFFFFFFFF for e in entropy])
    return np.random.Generator(np.random.Philox(seq))


def spawn_seeds(master: int, n: int) -> list[int]:
    """Derive n child seeds from a master seed (stable across runs)."""
    children = np.random.SeedSequence([int(master) & 0xFFFFFFFFFFFFFFFF]).spawn(n)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def digest_stream(digest: str) -> int:
    """Map a hyperparameter digest string to a 64-bit stream id."""
    if not digest:
        return 0
    return int(digest[:16], 16)
