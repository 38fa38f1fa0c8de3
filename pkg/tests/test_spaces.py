import numpy as np
import pytest
from hypothesis import given, settings
from scipy.stats import chisquare

from dsegym.rng import make_rng
from dsegym.spaces import (
    Categorical,
    DesignPoint,
    Numeric,
    ParameterSpace,
    ParameterSpec,
    SpaceTooLargeError,
    cardinality,
    decode,
    design_map,
    encode,
    encode_dim,
    enumerate_points,
    neighbor,
    point_from_map,
    sample_uniform,
    sample_uniform_batch,
    space_from_config,
    space_to_config,
)

from .strategies import spaces, spaces_with_points


def make_space(*specs):
    return ParameterSpace(tuple(specs))


TWO_BY_TWO = make_space(
    ParameterSpec("A", Categorical(("x", "y"))),
    ParameterSpec("B", Numeric(1, 2, 1)),
)


class TestCardinality:
    def test_numeric_grid_enumerated(self):
        # oracle: count the grid values directly
        space = make_space(ParameterSpec("NumPEs", Numeric(14, 336, 14)))
        grid = [14 + 14 * k for k in range(1000) if 14 + 14 * k <= 336]
        assert len(grid) == 24
        assert cardinality(space) == 24

    def test_categorical_count(self):
        space = make_space(ParameterSpec("S", Categorical(("Fifo", "FrFcFs", "FrFcFsGrp"))))
        assert cardinality(space) == 3

    def test_full_memory_controller_space_matches_documented_total(self):
        from dsegym.envs import get_space

        assert f"{cardinality(get_space('dram')):.1e}" == "1.9e+07"

    def test_non_multiple_span_truncates(self):
        assert cardinality(make_space(ParameterSpec("n", Numeric(0, 10, 3)))) == 4  # 0,3,6,9

    @given(spaces())
    @settings(max_examples=60)
    def test_matches_enumeration_length(self, space):
        n = cardinality(space)
        if n <= 10_000:
            assert n == sum(1 for _ in enumerate_points(space, 10_000))


class TestSampleUniform:
    def test_single_value_space(self):
        space = make_space(ParameterSpec("A", Categorical(("x",))))
        rng = make_rng(0)
        assert all(sample_uniform(space, rng).indices == (0,) for _ in range(10))

    def test_deterministic_per_seed(self):
        points = [sample_uniform(TWO_BY_TWO, make_rng(42)) for _ in range(2)]
        assert points[0] == points[1]

    def test_uniform_frequencies_chi_square(self):
        space = make_space(ParameterSpec("n", Numeric(14, 336, 14)))
        rng = make_rng(7)
        draws = [sample_uniform(space, rng).indices[0] for _ in range(24_000)]
        counts = np.bincount(draws, minlength=24)
        # 3 sigma for one cell is ~3*sqrt(1000*(1-1/24)) ~ 94; chi-square is stricter
        assert chisquare(counts).pvalue > 1e-4
        assert np.all(np.abs(counts - 1000) < 3 * np.sqrt(1000 * (1 - 1 / 24)) + 1e-9)

    @given(spaces())
    @settings(max_examples=30)
    def test_samples_always_valid(self, space):
        rng = make_rng(3)
        for _ in range(50):
            space.validate_point(sample_uniform(space, rng))

    def test_batch_matches_domain(self):
        rng = make_rng(5)
        for p in sample_uniform_batch(TWO_BY_TWO, rng, 100):
            TWO_BY_TWO.validate_point(p)


class TestEnumerate:
    def test_product_order(self):
        points = list(enumerate_points(TWO_BY_TWO, 10))
        as_values = [tuple(design_map(TWO_BY_TWO, p).values()) for p in points]
        assert as_values == [("x", 1), ("x", 2), ("y", 1), ("y", 2)]

    def test_exceeding_limit_raises(self):
        space = make_space(ParameterSpec("n", Numeric(14, 336, 14)))
        with pytest.raises(SpaceTooLargeError, match="space too large to enumerate"):
            list(enumerate_points(space, 10))

    def test_no_duplicates(self):
        space = make_space(
            ParameterSpec("a", Categorical(("1", "2", "3"))),
            ParameterSpec("b", Numeric(0, 4, 2)),
        )
        points = list(enumerate_points(space, 100))
        assert len(set(points)) == len(points) == cardinality(space)


class TestEncode:
    def test_one_hot(self):
        space = make_space(ParameterSpec("A", Categorical(("x", "y"))))
        assert encode(space, DesignPoint((0,))).tolist() == [1.0, 0.0]

    def test_numeric_min_max_scaling(self):
        space = make_space(ParameterSpec("n", Numeric(0, 10, 5)))
        assert encode(space, DesignPoint((1,))).tolist() == [0.5]

    def test_dimension(self):
        space = make_space(
            ParameterSpec("A", Categorical(("x", "y", "z"))),
            ParameterSpec("B", Numeric(0, 10, 5)),
        )
        assert encode_dim(space) == 4

    def test_invalid_point_rejected(self):
        with pytest.raises(ValueError):
            encode(TWO_BY_TWO, DesignPoint((2, 0)))

    @given(spaces_with_points())
    @settings(max_examples=100)
    def test_decode_round_trip(self, space_point):
        space, point = space_point
        assert decode(space, encode(space, point)) == point


class TestNeighbor:
    def test_single_value_space_returns_same_point(self):
        space = make_space(ParameterSpec("A", Categorical(("x",))))
        point = DesignPoint((0,))
        assert neighbor(space, point, make_rng(0)) == point

    def test_changes_at_most_one_position(self):
        space = make_space(
            ParameterSpec("a", Categorical(("1", "2", "3"))),
            ParameterSpec("b", Numeric(0, 8, 1)),
            ParameterSpec("c", Categorical(("u", "v"))),
        )
        rng = make_rng(11)
        point = sample_uniform(space, rng)
        for _ in range(200):
            new = neighbor(space, point, rng)
            diffs = sum(a != b for a, b in zip(new.indices, point.indices))
            assert diffs == 1  # every domain here has >= 2 values

    def test_position_choice_is_uniform(self):
        space = make_space(
            ParameterSpec("a", Categorical(("1", "2"))),
            ParameterSpec("b", Categorical(("1", "2"))),
            ParameterSpec("c", Categorical(("1", "2"))),
        )
        rng = make_rng(13)
        point = DesignPoint((0, 0, 0))
        hits = np.zeros(3)
        n = 10_000
        for _ in range(n):
            new = neighbor(space, point, rng)
            hits[[a != b for a, b in zip(new.indices, point.indices)].index(True)] += 1
        sigma = np.sqrt(n * (1 / 3) * (2 / 3))
        assert np.all(np.abs(hits - n / 3) < 3 * sigma)


class TestGridSemantics:
    def test_max_included_iff_exact_multiple(self):
        exact = Numeric(0, 9, 3)
        assert exact.value(exact.size - 1) == 9
        truncated = Numeric(0, 10, 3)
        assert truncated.value(truncated.size - 1) == 9 <= 10

    def test_float_step_no_drift(self):
        kind = Numeric(0.0, 0.3, 0.1)
        assert kind.size == 4
        assert kind.index_of(kind.value(3)) == 3

    def test_off_grid_value_rejected(self):
        with pytest.raises(ValueError, match="not on step grid"):
            Numeric(1, 16, 1).index_of(4.5)


class TestDesignMaps:
    def test_round_trip(self):
        point = DesignPoint((1, 0))
        mapping = design_map(TWO_BY_TWO, point)
        assert mapping == {"A": "y", "B": 1}
        assert point_from_map(TWO_BY_TWO, mapping) == point

    def test_missing_parameter(self):
        with pytest.raises(ValueError, match="missing parameter"):
            point_from_map(TWO_BY_TWO, {"A": "x"})

    def test_integer_grid_values_stay_integers(self):
        assert design_map(TWO_BY_TWO, DesignPoint((0, 1)))["B"] == 2
        assert isinstance(design_map(TWO_BY_TWO, DesignPoint((0, 1)))["B"], int)


class TestSpaceConfig:
    def test_yaml_round_trip(self, tmp_path):
        import yaml

        config = space_to_config(TWO_BY_TWO)
        path = tmp_path / "space.yaml"
        path.write_text(yaml.safe_dump({"parameters": config}), encoding="utf-8")
        from dsegym.spaces import load_space

        assert load_space(path) == TWO_BY_TWO

    def test_kind_inferred(self):
        space = space_from_config(
            [{"name": "A", "values": ["x"]}, {"name": "B", "min": 0, "max": 1, "step": 1}]
        )
        assert isinstance(space.parameters[0].kind, Categorical)
        assert isinstance(space.parameters[1].kind, Numeric)

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError, match="duplicate parameter names"):
            space_from_config([{"name": "A", "values": ["x"]}, {"name": "A", "values": ["y"]}])
