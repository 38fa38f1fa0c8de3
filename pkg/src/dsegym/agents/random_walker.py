"""Random walker: uniform sampling with a random number generator as policy."""

from __future__ import annotations

import numpy as np

from ..spaces import DesignPoint, sample_uniform_batch
from .base import Agent

_BLOCK = 512


class RandomWalker(Agent):
    agent_type = "RW"
    DEFAULTS: dict = {}

    def __init__(self, space, hyperparams=None):
        super().__init__(space, hyperparams)
        self._buffer: list[DesignPoint] = []

    def propose(self, rng: np.random.Generator) -> DesignPoint:
        # draw in blocks so long trials stay cheap; the stream is still a
        # pure function of the generator state
        if not self._buffer:
            self._buffer = sample_uniform_batch(self.space, rng, _BLOCK)
            self._buffer.reverse()
        return self._buffer.pop()
