"""Ant-colony optimization over categorical/grid parameter values.

The policy is one pheromone vector per parameter.  Each ant picks a value
per parameter with probability proportional to pheromone^beta (or
uniformly with probability epsilon); after `ants` evaluations the trail
evaporates multiplicatively, is floored at tau_min, and every visited
value receives a bounded deposit Q * r / (1 + r).

Fitness must be non-negative.  Budget-distance scores go negative, so the
orchestrator configures fitness_transform="exp" to lift them into (0, inf)
before squashing.
"""

from __future__ import annotations

import math

import numpy as np

from ..spaces import DesignPoint
from .base import Agent


def deposit_amount(scale: float, fitness: float) -> float:
    """Bounded pheromone deposit: scale * fitness / (1 + fitness)."""
    if fitness < 0:
        raise ValueError(
            f"negative fitness {fitness}; budget-style scores need fitness_transform='exp'"
        )
    return scale * fitness / (1.0 + fitness)


def evaporate(pheromone: list[np.ndarray], rho: float, tau_min: float) -> None:
    for tau in pheromone:
        np.maximum(tau * (1.0 - rho), tau_min, out=tau)


class AntColony(Agent):
    agent_type = "ACO"
    DEFAULTS = {
        "evaporation": 0.2,
        "deposit": 1.0,
        "epsilon": 0.1,
        "beta": 1.0,
        "tau_min": 0.01,
        "ants": 8,
        "fitness_transform": "identity",
    }

    def __init__(self, space, hyperparams=None):
        super().__init__(space, hyperparams)
        hp = self._hyperparams
        if not 0.0 < hp["evaporation"] < 1.0:
            raise ValueError(f"evaporation must lie in (0, 1), got {hp['evaporation']}")
        if hp["deposit"] <= 0:
            raise ValueError(f"deposit must be positive, got {hp['deposit']}")
        if not 0.0 <= hp["epsilon"] <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {hp['epsilon']}")
        if hp["beta"] < 0:
            raise ValueError(f"beta must be >= 0, got {hp['beta']}")
        if hp["tau_min"] <= 0:
            raise ValueError(f"tau_min must be positive, got {hp['tau_min']}")
        if hp["ants"] < 1:
            raise ValueError(f"ants must be >= 1, got {hp['ants']}")
        if hp["fitness_transform"] not in ("identity", "exp"):
            raise ValueError(f"unknown fitness_transform {hp['fitness_transform']!r}")
        self.pheromone = [np.ones(s) for s in space.sizes]
        self._batch: list[tuple[DesignPoint, float]] = []

    def propose(self, rng: np.random.Generator) -> DesignPoint:
        hp = self._hyperparams
        indices = []
        for tau in self.pheromone:
            if hp["epsilon"] > 0 and rng.random() < hp["epsilon"]:
                indices.append(int(rng.integers(0, len(tau))))
                continue
            weights = tau ** hp["beta"]
            cum = np.cumsum(weights)
            draw = rng.random() * cum[-1]
            indices.append(int(np.searchsorted(cum, draw, side="right")))
        return DesignPoint(tuple(indices))

    def _fitness(self, reward: float) -> float:
        if self._hyperparams["fitness_transform"] == "exp":
            return math.exp(min(reward, 700.0))
        return reward

    def _on_observe(self, point: DesignPoint, reward: float) -> None:
        self._batch.append((point, self._fitness(reward)))
        if len(self._batch) >= self._hyperparams["ants"]:
            self.update(self._batch)
            self._batch = []

    def update(self, evaluated: list[tuple[DesignPoint, float]]) -> None:
        """Evaporate, floor at tau_min, then deposit for every ant."""
        hp = self._hyperparams
        for _, fitness in evaluated:
            if fitness < 0:
                raise ValueError(
                    f"negative fitness {fitness}; budget-style scores need "
                    "fitness_transform='exp'"
                )
        evaporate(self.pheromone, hp["evaporation"], hp["tau_min"])
        for point, fitness in evaluated:
            amount = deposit_amount(hp["deposit"], fitness)
            for tau, k in zip(self.pheromone, point.indices):
                tau[k] += amount
