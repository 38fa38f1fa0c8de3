"""Parameter spaces: the action vocabulary of every environment.

A space is an ordered list of named parameters, each either categorical
(a set of string labels) or numeric (a finite stepped grid ``min + k*step``).
Design points are stored as per-parameter grid indices; helpers convert to
and from the concrete label/value form used in trajectory records and in
the subprocess protocol.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np
import yaml

# Tolerance used when deciding whether a value sits on the step grid and
# whether max is an exact multiple of step away from min.
_GRID_RTOL = 1e-9


class SpaceTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class Categorical:
    values: tuple[str, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("categorical parameter needs at least one value")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"duplicate categorical values: {self.values}")

    @property
    def size(self) -> int:
        return len(self.values)

    def value(self, k: int):
        return self.values[k]

    def index_of(self, value) -> int:
        try:
            return self.values.index(value)
        except ValueError:
            raise ValueError(f"label {value!r} not in {self.values}") from None


@dataclass(frozen=True)
class Numeric:
    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"numeric bounds inverted: ({self.lo}, {self.hi})")
        if self.step <= 0:
            raise ValueError(f"step must be positive, got {self.step}")

    @property
    def size(self) -> int:
        span = (self.hi - self.lo) / self.step
        return int(np.floor(span + _GRID_RTOL * max(1.0, abs(span)))) + 1

    def value(self, k: int):
        # int lo/step stay int, so integer grids export as ints
        return self.lo + k * self.step

    def index_of(self, value) -> int:
        k = int(round((value - self.lo) / self.step))
        if k < 0 or k >= self.size:
            raise ValueError(f"value {value} outside grid ({self.lo}, {self.hi}, {self.step})")
        grid = self.value(k)
        if abs(value - grid) > _GRID_RTOL * max(1.0, abs(grid)):
            raise ValueError(f"value {value} not on step grid ({self.lo}, {self.hi}, {self.step})")
        return k


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    kind: Categorical | Numeric

    @property
    def size(self) -> int:
        return self.kind.size

    def value(self, k: int):
        return self.kind.value(k)

    def index_of(self, value) -> int:
        return self.kind.index_of(value)


@dataclass(frozen=True)
class DesignPoint:
    """One concrete assignment, stored as per-parameter grid indices."""

    indices: tuple[int, ...]

    def values(self, space: "ParameterSpace") -> list:
        """Index for categorical parameters, grid value for numeric ones."""
        out = []
        for spec, k in zip(space.parameters, self.indices):
            out.append(k if isinstance(spec.kind, Categorical) else spec.value(k))
        return out


@dataclass(frozen=True)
class ParameterSpace:
    parameters: tuple[ParameterSpec, ...]

    def __post_init__(self):
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names: {names}")

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.parameters]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(p.size for p in self.parameters)

    def __len__(self) -> int:
        return len(self.parameters)

    def validate_point(self, point: DesignPoint) -> None:
        if len(point.indices) != len(self.parameters):
            raise ValueError(
                f"point has {len(point.indices)} values, space has {len(self.parameters)}"
            )
        for spec, k in zip(self.parameters, point.indices):
            if not 0 <= k < spec.size:
                raise ValueError(f"index {k} out of range for parameter {spec.name!r}")


def cardinality(space: ParameterSpace) -> int:
    """Exact number of points (arbitrary-precision integer)."""
    n = 1
    for p in space.parameters:
        n *= p.size
    return n


def sample_uniform(space: ParameterSpace, rng: np.random.Generator) -> DesignPoint:
    return DesignPoint(tuple(int(rng.integers(0, s)) for s in space.sizes))


def sample_uniform_batch(
    space: ParameterSpace, rng: np.random.Generator, n: int
) -> list[DesignPoint]:
    """Draw n points with one vectorized call per parameter."""
    cols = [rng.integers(0, s, size=n) for s in space.sizes]
    return [DesignPoint(tuple(int(c[i]) for c in cols)) for i in range(n)]


def enumerate_points(space: ParameterSpace, limit: int) -> Iterator[DesignPoint]:
    """Every point exactly once, first parameter varying slowest."""
    if cardinality(space) > limit:
        raise SpaceTooLargeError(
            f"space too large to enumerate: {cardinality(space)} > limit {limit}"
        )
    for combo in itertools.product(*(range(s) for s in space.sizes)):
        yield DesignPoint(combo)


def encode_dim(space: ParameterSpace) -> int:
    return sum(p.size if isinstance(p.kind, Categorical) else 1 for p in space.parameters)


def encode(space: ParameterSpace, point: DesignPoint) -> np.ndarray:
    """One-hot per categorical parameter, min-max scalar per numeric one."""
    space.validate_point(point)
    out = np.zeros(encode_dim(space))
    pos = 0
    for spec, k in zip(space.parameters, point.indices):
        if isinstance(spec.kind, Categorical):
            out[pos + k] = 1.0
            pos += spec.size
        else:
            span = spec.kind.hi - spec.kind.lo
            out[pos] = 0.0 if span == 0 else (spec.value(k) - spec.kind.lo) / span
            pos += 1
    return out


def decode(space: ParameterSpace, vector: Sequence[float]) -> DesignPoint:
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (encode_dim(space),):
        raise ValueError(f"expected vector of length {encode_dim(space)}, got {vector.shape}")
    indices = []
    pos = 0
    for spec in space.parameters:
        if isinstance(spec.kind, Categorical):
            indices.append(int(np.argmax(vector[pos : pos + spec.size])))
            pos += spec.size
        else:
            span = spec.kind.hi - spec.kind.lo
            k = int(round(vector[pos] * span / spec.kind.step)) if span else 0
            indices.append(min(max(k, 0), spec.size - 1))
            pos += 1
    point = DesignPoint(tuple(indices))
    space.validate_point(point)
    return point


def resample_position(
    space: ParameterSpace, point: DesignPoint, pos: int, rng: np.random.Generator
) -> DesignPoint:
    """Resample one position uniformly over its domain excluding the current value."""
    size = space.parameters[pos].size
    if size == 1:
        return point
    new = int(rng.integers(0, size - 1))
    if new >= point.indices[pos]:
        new += 1
    indices = list(point.indices)
    indices[pos] = new
    return DesignPoint(tuple(indices))


def neighbor(space: ParameterSpace, point: DesignPoint, rng: np.random.Generator) -> DesignPoint:
    """Copy of point with exactly one uniformly chosen parameter resampled."""
    space.validate_point(point)
    pos = int(rng.integers(0, len(space.parameters)))
    return resample_position(space, point, pos, rng)


def design_map(space: ParameterSpace, point: DesignPoint) -> dict:
    """Name -> concrete value view used in records and wire formats."""
    out = {}
    for spec, k in zip(space.parameters, point.indices):
        out[spec.name] = spec.value(k)
    return out


def point_from_map(space: ParameterSpace, values: Mapping) -> DesignPoint:
    indices = []
    for spec in space.parameters:
        if spec.name not in values:
            raise ValueError(f"missing parameter {spec.name!r}")
        indices.append(spec.index_of(values[spec.name]))
    point = DesignPoint(tuple(indices))
    space.validate_point(point)
    return point


# ---------------------------------------------------------------------------
# Space definition files


def space_from_config(config: Sequence[Mapping]) -> ParameterSpace:
    """Build a space from the parameter-list schema used in fixture files.

    Each entry is either
      {name: ..., kind: categorical, values: [...]}
    or
      {name: ..., kind: numeric, min: ..., max: ..., step: ...}
    (`kind` may be omitted; it is inferred from the keys.)
    """
    params = []
    for entry in config:
        name = entry["name"]
        kind = entry.get("kind")
        if kind is None:
            kind = "categorical" if "values" in entry else "numeric"
        if kind == "categorical":
            params.append(ParameterSpec(name, Categorical(tuple(str(v) for v in entry["values"]))))
        elif kind == "numeric":
            params.append(ParameterSpec(name, Numeric(entry["min"], entry["max"], entry["step"])))
        else:
            raise ValueError(f"unknown parameter kind {kind!r} for {name!r}")
    return ParameterSpace(tuple(params))


def space_to_config(space: ParameterSpace) -> list[dict]:
    out = []
    for p in space.parameters:
        if isinstance(p.kind, Categorical):
            out.append({"name": p.name, "kind": "categorical", "values": list(p.kind.values)})
        else:
            out.append(
                {
                    "name": p.name,
                    "kind": "numeric",
                    "min": p.kind.lo,
                    "max": p.kind.hi,
                    "step": p.kind.step,
                }
            )
    return out


def load_space(path) -> ParameterSpace:
    with open(path, encoding="utf-8") as f:
        doc = yaml.safe_load(f)
    if isinstance(doc, dict):
        doc = doc["parameters"]
    return space_from_config(doc)
