import math
import time

import pytest

from dsegym.core import RewardMode, score
from dsegym.envs import (
    ENV_IDS,
    get_objective,
    get_space,
    get_workload,
    golden_metrics,
    list_objectives,
    list_workloads,
    make_env,
)
from dsegym.envs.base import WorkloadSpec
from dsegym.rng import make_rng
from dsegym.spaces import cardinality, design_map, enumerate_points, point_from_map, sample_uniform

SMALL_IDS = [e for e in ENV_IDS if e.endswith("-small")]


class TestRegistry:
    def test_env_ids(self):
        assert set(ENV_IDS) == {
            "dram", "dram-small", "accel", "accel-small", "soc", "soc-small",
        }

    def test_unknown_workload_rejected(self):
        with pytest.raises(ValueError, match="unknown workload"):
            make_env("dram", "does-not-exist")

    def test_unknown_objective_rejected(self):
        with pytest.raises(ValueError, match="no objective"):
            make_env("dram", "stream", "maximal-vibes")

    def test_small_spaces_are_brute_forceable(self):
        for env_id in SMALL_IDS:
            assert cardinality(get_space(env_id)) <= 4096


class TestGoldenObservations:
    """Reference designs pinned against the fixture-tabulated metrics."""

    @pytest.mark.parametrize(
        "env_id", ["dram", "dram-small", "accel", "accel-small", "soc", "soc-small"]
    )
    def test_reference_matches_golden(self, env_id):
        for workload in list_workloads(env_id):
            env = make_env(env_id, workload, list_objectives(env_id, workload)[0])
            obs = env.observe(env.reference_point())
            golden = golden_metrics(env_id, workload)
            assert obs.valid
            assert set(obs.metrics) == set(golden)
            for name, value in golden.items():
                assert obs.metrics[name] == value, (env_id, workload, name)


class TestDramEnv:
    def test_energy_is_latency_times_power(self):
        env = make_env("dram-small", "cloud-1")
        rng = make_rng(1)
        for _ in range(50):
            obs = env.observe(sample_uniform(env.space(), rng))
            assert obs.metrics["energy"] == obs.metrics["latency"] * obs.metrics["power"]

    def test_deterministic(self):
        env = make_env("dram", "cloud-2")
        rng = make_rng(2)
        p = sample_uniform(env.space(), rng)
        assert env.step(p).observation.metrics == env.step(p).observation.metrics

    def test_scheduler_buffer_interaction(self):
        # reorder-capable scheduler loses to Fifo at tiny buffers, wins at large
        env = make_env("dram", "stream")
        space = env.space()
        base = dict(design_map(space, env.reference_point()))

        def latency(sched, buf):
            d = {**base, "Scheduler": sched, "RequestBufferSize": buf}
            return env.observe(point_from_map(space, d)).metrics["latency"]

        assert latency("Fifo", 1) < latency("FrFcFs", 1)
        assert latency("FrFcFs", 16) < latency("Fifo", 16)


class TestAccelEnv:
    def _env(self, workload="large_cnn"):
        return make_env("accel", workload)

    def _metrics(self, env, **overrides):
        space = env.space()
        base = dict(design_map(space, env.reference_point()))
        base.update(overrides)
        return env.observe(point_from_map(space, base)).metrics

    def test_compute_bound_doubling_pes_halves_latency(self):
        env = self._env("large_cnn")  # high flops/byte keeps small PE counts compute-bound
        lat_14 = self._metrics(env, NumPEs=14)["latency"]
        lat_28 = self._metrics(env, NumPEs=28)["latency"]
        assert lat_28 == pytest.approx(lat_14 / 2, rel=1e-12)

    def test_memory_bound_latency_independent_of_pes(self):
        env = self._env("mobile_cnn")  # low intensity goes memory-bound at high PE counts
        lat_a = self._metrics(env, NumPEs=280, L1BufferKiB=16)["latency"]
        lat_b = self._metrics(env, NumPEs=336, L1BufferKiB=16)["latency"]
        assert lat_a == lat_b

    def test_area_strictly_increases_with_pes(self):
        env = self._env()
        areas = [self._metrics(env, NumPEs=n)["area"] for n in (14, 28, 140, 336)]
        assert all(a < b for a, b in zip(areas, areas[1:]))

    def test_buffer_budget_infeasible(self):
        env = self._env("small_cnn")
        result = env.step(
            point_from_map(
                env.space(),
                {"NumPEs": 112, "L1BufferKiB": 256, "L2BufferKiB": 2048,
                 "Dataflow": "WeightStationary", "Precision": "int8"},
            )
        )
        assert not result.observation.valid
        assert result.observation.metrics == {}
        assert result.reward == 0.0
        assert result.info["invalid"] == "buffer budget exceeded"

    def test_small_space_contains_infeasible_and_feasible_points(self):
        env = make_env("accel-small", "small_cnn")
        flags = [env.observe(p).valid for p in enumerate_points(env.space(), 4096)]
        assert any(flags) and not all(flags)


class TestSocEnv:
    def _metrics(self, env, **overrides):
        space = env.space()
        base = dict(design_map(space, env.reference_point()))
        base.update(overrides)
        return env.observe(point_from_map(space, base)).metrics

    def test_single_task_runs_on_fastest_pe(self):
        env = make_env("soc", "single_task")
        m = self._metrics(env, PE0Type="DSP", PE1Type="None", PE2Type="None")
        # solo task: 200 Mops of filter work on the DSP at 2600 Mops/s
        assert m["performance"] == pytest.approx(200 / 2600, rel=1e-12)

    def test_unused_pe_costs_area_and_power_only(self):
        env = make_env("soc", "single_task")
        alone = self._metrics(env, PE0Type="DSP", PE1Type="None", PE2Type="None")
        padded = self._metrics(env, PE0Type="DSP", PE1Type="LittleCore", PE2Type="None")
        assert padded["performance"] == alone["performance"]
        assert padded["power"] > alone["power"]
        assert padded["area"] > alone["area"]

    def test_budget_matching_reference_scores_zero(self):
        env = make_env("soc", "edge_detection", "budget")
        assert score(env.reward_spec, env.observe(env.reference_point())) == 0.0

    def test_budget_mode_wired(self):
        assert get_objective("soc", "edge_detection", "budget").mode is RewardMode.BUDGET_DISTANCE


class TestEpisodeSemantics:
    def test_done_after_every_step_by_default(self):
        env = make_env("dram-small", "stream")
        rng = make_rng(4)
        for _ in range(3):
            assert env.step(sample_uniform(env.space(), rng)).done

    def test_multi_step_episode(self):
        env = make_env("dram-small", "stream", episode_length=3)
        rng = make_rng(4)
        env.reset()
        dones = [env.step(sample_uniform(env.space(), rng)).done for _ in range(3)]
        assert dones == [False, False, True]

    def test_reset_after_done_returns_initial_observation(self):
        env = make_env("dram-small", "stream")
        initial = env.reset().metrics
        env.step(sample_uniform(env.space(), make_rng(5)))
        assert env.reset().metrics == initial

    def test_reset_equivalent_to_fresh_instance(self):
        rng = make_rng(6)
        point = sample_uniform(get_space("dram-small"), rng)
        used = make_env("dram-small", "stream")
        for _ in range(4):
            used.step(point)
        used.reset()
        fresh = make_env("dram-small", "stream")
        fresh.reset()
        assert used.step(point).reward == fresh.step(point).reward

    def test_step_delay_applies(self):
        env = make_env("dram-small", "stream", delay_ms=30.0)
        rng = make_rng(7)
        t0 = time.perf_counter()
        env.step(sample_uniform(env.space(), rng))
        assert time.perf_counter() - t0 >= 0.03


class TestWorkloadSpec:
    def test_fraction_bounds_enforced(self):
        with pytest.raises(ValueError, match="read_fraction"):
            WorkloadSpec("w", {"read_fraction": 1.5})

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            WorkloadSpec("w", {"flops": math.inf})

    def test_registry_traits(self):
        wl = get_workload("dram", "stream")
        assert wl.id == "stream"
        assert wl["access_locality"] == 0.9
