"""Adapter that drives an external simulator process over stdin/stdout.

Wire protocol (one JSON record per line, UTF-8):

  handshake   child -> {"protocol": 1, "metrics": [names]}
  request     parent -> {"id": n, "design": {param: value}, "workload": id}
  response    child -> {"id": n, "metrics": {name: number}, "valid": bool}

The adapter owns exactly one child; requests are strictly serialized.  On
timeout the child is killed and (up to max_restarts times) relaunched; the
timed-out request still fails.
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading

from ..core import Environment, Observation, RewardSpec, StepResult, score
from ..spaces import DesignPoint, ParameterSpace, design_map
from .base import WorkloadSpec

PROTOCOL_VERSION = 1


class SimulatorTimeout(RuntimeError):
    def __init__(self, msg: str = "simulator timeout"):
        super().__init__(msg)


class SimulatorProtocolError(RuntimeError):
    def __init__(self, msg: str = "protocol error", raw: str = ""):
        super().__init__(msg)
        self.info = {"raw": raw}


class SimulatorCrashed(RuntimeError):
    def __init__(self, msg: str = "simulator crashed", returncode: int | None = None):
        super().__init__(msg)
        self.info = {"returncode": str(returncode)}


class AdapterConfig:
    def __init__(self, command: list[str], timeout_s: float = 10.0, max_restarts: int = 0):
        if timeout_s <= 0:
            raise ValueError(f"timeout must be positive, got {timeout_s}")
        if max_restarts < 0:
            raise ValueError(f"max_restarts must be >= 0, got {max_restarts}")
        self.command = list(command)
        self.timeout_s = timeout_s
        self.max_restarts = max_restarts


class _Child:
    """One simulator process plus a reader thread feeding a line queue."""

    def __init__(self, command: list[str]):
        self.proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        self.lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self):
        for line in self.proc.stdout:
            self.lines.put(line)
        self.lines.put(None)  # EOF marker

    def read_line(self, timeout_s: float) -> str:
        try:
            line = self.lines.get(timeout=timeout_s)
        except queue.Empty:
            raise SimulatorTimeout() from None
        if line is None:
            code = self.proc.wait()
            raise SimulatorCrashed(f"simulator crashed (exit code {code})", returncode=code)
        return line

    def write_line(self, line: str) -> None:
        try:
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError):
            code = self.proc.poll()
            raise SimulatorCrashed(f"simulator crashed (exit code {code})", returncode=code)

    def kill(self) -> None:
        if self.proc.poll() is None:
            self.proc.kill()
            self.proc.wait()


class ExternalSimulatorEnv(Environment):
    """EnvironmentContract over a subprocess cost model."""

    def __init__(
        self,
        config: AdapterConfig,
        space: ParameterSpace,
        workload: WorkloadSpec,
        reward_spec: RewardSpec,
        episode_length: int = 1,
    ):
        self.config = config
        self._space = space
        self._workload = workload
        self.reward_spec = reward_spec
        self.episode_length = episode_length
        self.delay_s = 0.0
        self._steps_in_episode = 0
        self._restarts_used = 0
        self._next_id = 0
        self._child: _Child | None = None
        self.metric_names: list[str] = []
        self._launch()

    def _launch(self) -> None:
        self._child = _Child(self.config.command)
        line = self._child.read_line(self.config.timeout_s)
        try:
            handshake = json.loads(line)
        except json.JSONDecodeError:
            raise SimulatorProtocolError("protocol error: bad handshake", raw=line) from None
        if handshake.get("protocol") != PROTOCOL_VERSION:
            raise SimulatorProtocolError(
                f"protocol error: unsupported protocol {handshake.get('protocol')!r}",
                raw=line,
            )
        self.metric_names = list(handshake.get("metrics", []))

    def _handle_timeout(self) -> None:
        self._child.kill()
        self._child = None
        if self._restarts_used < self.config.max_restarts:
            self._restarts_used += 1
            self._launch()

    # -- contract ----------------------------------------------------------

    def space(self) -> ParameterSpace:
        return self._space

    def workload(self) -> WorkloadSpec:
        return self._workload

    def reset(self) -> Observation:
        self._steps_in_episode = 0
        return Observation(metrics={})

    def step(self, point: DesignPoint) -> StepResult:
        self._space.validate_point(point)
        if self._child is None:
            raise SimulatorCrashed("simulator crashed (not running)")
        request_id = self._next_id
        self._next_id += 1
        self._child.write_line(
            json.dumps(
                {
                    "id": request_id,
                    "design": design_map(self._space, point),
                    "workload": self._workload.id,
                },
                separators=(",", ":"),
            )
        )
        try:
            line = self._child.read_line(self.config.timeout_s)
        except SimulatorTimeout:
            self._handle_timeout()
            raise
        try:
            response = json.loads(line)
            metrics = {str(k): float(v) for k, v in response["metrics"].items()}
            valid = bool(response["valid"])
            if response["id"] != request_id:
                raise SimulatorProtocolError(
                    f"protocol error: response id {response['id']} != request id {request_id}",
                    raw=line,
                )
            obs = (
                Observation(metrics=metrics, valid=True)
                if valid
                else Observation(metrics={}, valid=False)
            )
        except SimulatorProtocolError:
            raise
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise SimulatorProtocolError(f"protocol error: {exc}", raw=line) from None
        reward = score(self.reward_spec, obs)
        self._steps_in_episode += 1
        done = self._steps_in_episode >= self.episode_length
        info = {} if valid else {"invalid": "reported by simulator"}
        return StepResult(observation=obs, reward=reward, done=done, info=info)

    def close(self) -> None:
        if self._child is not None:
            self._child.kill()
            self._child = None

    def __enter__(self) -> "ExternalSimulatorEnv":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
