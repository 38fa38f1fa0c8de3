"""Trajectory datasets: logging, loading, merging, mixing, splitting.

One agent<->environment exchange is one TrajectoryRecord; one trial writes
one UTF-8 file with one JSON record per line (schema_version 1).  Reals
round-trip bit-exactly because json serializes floats with shortest
round-trip precision.  Aggregation across trials is an explicit merge of
per-trial files, never concurrent writes to one file.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

SCHEMA_VERSION = 1

_FIELDS = (
    "schema_version",
    "experiment_id",
    "env_id",
    "workload_id",
    "agent_type",
    "hyperparam_digest",
    "seed",
    "step_index",
    "design",
    "observation",
    "reward",
    "wall_time_ms",
)


@dataclass(frozen=True)
class TrajectoryRecord:
    """One logged agent<->environment exchange."""

    experiment_id: str
    env_id: str
    workload_id: str
    agent_type: str
    hyperparam_digest: str
    seed: int
    step_index: int
    design: dict
    observation: dict
    reward: float
    wall_time_ms: int
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.step_index < 0:
            raise ValueError(f"step_index must be >= 0, got {self.step_index}")
        if not math.isfinite(self.reward):
            raise ValueError(f"reward must be finite, got {self.reward}")

    def to_json(self) -> str:
        data = {name: getattr(self, name) for name in _FIELDS}
        return json.dumps(data, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "TrajectoryRecord":
        data = json.loads(line)
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {data.get('schema_version')!r}")
        kwargs = {name: data[name] for name in _FIELDS if name != "schema_version"}
        return cls(**kwargs)


class TrajectoryWriter:
    """Append-only single-writer sink for one trial's records.

    Opening for append truncates a partial trailing line left by a crashed
    writer, so the file always ends on a record boundary.
    """

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        _truncate_partial_tail(self.path)
        self._file = open(self.path, "a", encoding="utf-8")

    def append(self, record: TrajectoryRecord) -> None:
        self._file.write(record.to_json() + "\n")
        self._file.flush()

    def close(self) -> None:
        self._file.close()

    def __enter__(self) -> "TrajectoryWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _truncate_partial_tail(path: Path) -> None:
    if not path.exists() or path.stat().st_size == 0:
        return
    with open(path, "rb+") as f:
        f.seek(-1, os.SEEK_END)
        if f.read(1) == b"\n":
            return
        # walk back to the last newline and cut there
        size = f.seek(0, os.SEEK_END)
        keep = 0
        f.seek(0)
        for chunk_start in range(0, size, 1 << 20):
            chunk = f.read(min(1 << 20, size - chunk_start))
            pos = chunk.rfind(b"\n")
            if pos >= 0:
                keep = chunk_start + pos + 1
        f.truncate(keep)
        warnings.warn(f"truncated partial trailing line in {path}")


@dataclass
class Dataset:
    """Ordered record collection plus provenance counts."""

    records: list[TrajectoryRecord] = field(default_factory=list)
    provenance: Counter = field(default_factory=Counter)

    @classmethod
    def from_records(cls, records: Iterable[TrajectoryRecord]) -> "Dataset":
        records = list(records)
        prov = Counter((r.agent_type, r.experiment_id) for r in records)
        return cls(records=records, provenance=prov)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def env_id(self) -> str | None:
        return self.records[0].env_id if self.records else None

    def agent_counts(self) -> Counter:
        counts: Counter = Counter()
        for (agent_type, _), n in self.provenance.items():
            counts[agent_type] += n
        return counts

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            for record in self.records:
                f.write(record.to_json() + "\n")


def load_dataset(path, validate: bool = True) -> Dataset:
    """Load a trajectory file, recovering from a truncated final line."""
    path = Path(path)
    records = []
    with open(path, encoding="utf-8") as f:
        raw = f.read()
    lines = raw.split("\n")
    ends_clean = raw.endswith("\n") or raw == ""
    if lines and lines[-1] == "":
        lines.pop()
    for i, line in enumerate(lines):
        try:
            records.append(TrajectoryRecord.from_json(line))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            if i == len(lines) - 1 and not ends_clean:
                warnings.warn(f"dropping partial trailing line in {path}")
                break
            raise ValueError(f"{path}:{i + 1}: corrupt record: {exc}") from exc
    if validate:
        _validate_records(records, path)
    return Dataset.from_records(records)


def _validate_records(records: list[TrajectoryRecord], path) -> None:
    next_step: dict[str, int] = {}
    for r in records:
        expected = next_step.get(r.experiment_id, 0)
        if r.step_index != expected:
            raise ValueError(
                f"{path}: experiment {r.experiment_id!r} step_index {r.step_index} "
                f"(expected {expected}; indices must be dense from 0)"
            )
        next_step[r.experiment_id] = expected + 1


def merge(datasets: list[Dataset]) -> Dataset:
    """Concatenate datasets from the same environment; provenance sums."""
    if not datasets:
        raise ValueError("nothing to merge")
    env_ids = {d.env_id for d in datasets if d.env_id is not None}
    if len(env_ids) > 1:
        raise ValueError(f"cannot merge across environments: {sorted(env_ids)}")
    versions = {r.schema_version for d in datasets for r in d.records}
    if len(versions) > 1:
        raise ValueError(f"cannot merge across schema versions: {sorted(versions)}")
    merged = Dataset()
    for d in datasets:
        merged.records.extend(d.records)
        merged.provenance.update(d.provenance)
    return merged


def sample_mixture(
    per_agent: Mapping[str, Dataset],
    proportions: Mapping[str, float],
    size: int,
    rng: np.random.Generator,
) -> Dataset:
    """Without-replacement sample of round(p*size) records per agent, shuffled.

    The rounding residue lands on the largest-proportion source.
    """
    if abs(sum(proportions.values()) - 1.0) > 1e-9:
        raise ValueError(f"proportions must sum to 1, got {sum(proportions.values())}")
    agents = sorted(proportions)
    counts = {a: int(math.floor(proportions[a] * size + 0.5)) for a in agents}
    residue_agent = max(agents, key=lambda a: proportions[a])
    counts[residue_agent] += size - sum(counts.values())
    picked: list[TrajectoryRecord] = []
    for agent in agents:
        if agent not in per_agent:
            raise ValueError(f"no source dataset for agent {agent!r}")
        source = per_agent[agent]
        if counts[agent] > len(source):
            raise ValueError(
                f"insufficient records from {agent!r}: need {counts[agent]}, "
                f"have {len(source)}"
            )
        idx = rng.choice(len(source), size=counts[agent], replace=False)
        picked.extend(source.records[int(i)] for i in idx)
    order = rng.permutation(len(picked))
    return Dataset.from_records([picked[int(i)] for i in order])


def split(
    dataset: Dataset, test_fraction: float, rng: np.random.Generator
) -> tuple[Dataset, Dataset]:
    """Disjoint uniform split into (train, test); union is the input multiset."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n = len(dataset)
    n_test = int(math.floor(test_fraction * n + 0.5))
    perm = rng.permutation(n)
    test_idx = sorted(int(i) for i in perm[:n_test])
    train_idx = sorted(int(i) for i in perm[n_test:])
    return (
        Dataset.from_records([dataset.records[i] for i in train_idx]),
        Dataset.from_records([dataset.records[i] for i in test_idx]),
    )


# ---------------------------------------------------------------------------
# Manifest files


def write_manifest(path, files: list[str], dataset: Dataset, partial: list[dict] | None = None) -> None:
    """Record member files plus provenance counts for an aggregated dataset."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "env_id": dataset.env_id,
        "record_count": len(dataset),
        "files": sorted(files),
        "provenance": [
            {"agent_type": a, "experiment_id": e, "count": c}
            for (a, e), c in sorted(dataset.provenance.items())
        ],
        "partial_trials": partial or [],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def read_manifest(path) -> dict:
    with open(path, encoding="utf-8") as f:
        return json.load(f)
