"""The five search agents and their hyperparameter fixtures."""

from __future__ import annotations

import itertools
from importlib import resources
from typing import Mapping

import yaml

from ..spaces import ParameterSpace
from .ant_colony import AntColony
from .base import Agent, HyperparamSet
from .bayesian import BayesOpt, GaussianProcess, expected_improvement
from .genetic import GeneticAlgorithm, Individual
from .random_walker import RandomWalker
from .reinforce import Reinforce

AGENT_CLASSES: dict[str, type[Agent]] = {
    cls.agent_type: cls
    for cls in (RandomWalker, GeneticAlgorithm, AntColony, BayesOpt, Reinforce)
}

AGENT_TYPES = tuple(sorted(AGENT_CLASSES))

_FIXTURE_FILES = {"RW": "rw.yaml", "GA": "ga.yaml", "ACO": "aco.yaml", "BO": "bo.yaml", "RL": "rl.yaml"}


def make_agent(
    agent_type: str, space: ParameterSpace, hyperparams: Mapping | None = None
) -> Agent:
    if agent_type not in AGENT_CLASSES:
        raise ValueError(f"unknown agent type {agent_type!r} (have {sorted(AGENT_CLASSES)})")
    return AGENT_CLASSES[agent_type](space, hyperparams)


def load_agent_fixture(agent_type: str) -> dict:
    if agent_type not in _FIXTURE_FILES:
        raise ValueError(f"unknown agent type {agent_type!r}")
    ref = resources.files("dsegym.agents") / "fixtures" / _FIXTURE_FILES[agent_type]
    with ref.open(encoding="utf-8") as f:
        return yaml.safe_load(f)


def expand_grid(grid: Mapping) -> list[dict]:
    """Cartesian product of per-hyperparameter value lists."""
    if not grid:
        return [{}]
    keys = sorted(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def sweep_configs(agent_type: str, grid: Mapping | None = None) -> list[dict]:
    """Hyperparameter configs for a sweep: the shipped grid unless overridden."""
    if grid is None:
        grid = load_agent_fixture(agent_type).get("sweep_grid") or {}
    return expand_grid(grid)


__all__ = [
    "AGENT_CLASSES",
    "AGENT_TYPES",
    "Agent",
    "AntColony",
    "BayesOpt",
    "GaussianProcess",
    "GeneticAlgorithm",
    "HyperparamSet",
    "Individual",
    "RandomWalker",
    "Reinforce",
    "expand_grid",
    "expected_improvement",
    "load_agent_fixture",
    "make_agent",
    "sweep_configs",
]
