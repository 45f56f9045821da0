import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nucleartrace.measure_grid import (
    Axis,
    InvalidPartitionError,
    ProductGrid,
    SampledFunction,
    WeightFunction,
    box_partition,
    integrate,
    interval_grid,
    load_function,
    save_function,
    torus_grid,
    triple_is_sigma_finite,
)
from nucleartrace.mixed_norm import ExponentTuple

from conftest import random_complex


def test_indicator_of_unit_torus_integrates_to_one():
    g = torus_grid(37)
    assert integrate(SampledFunction.constant(g, 1.0)) == pytest.approx(1.0, abs=1e-15)


def test_zero_integrates_to_zero():
    assert integrate(SampledFunction.constant(torus_grid(8, 2), 0.0)) == 0


def test_trapezoid_exact_for_low_trig_polynomial():
    g = torus_grid(64)
    f = SampledFunction.from_callable(g, lambda x: np.cos(2 * np.pi * x))
    assert abs(integrate(f)) < 1e-14


@given(st.integers(0, 2 ** 31), st.floats(-5, 5), st.floats(-5, 5))
@settings(max_examples=50, deadline=None)
def test_integrate_is_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    g = ProductGrid((Axis.periodic_uniform(7), Axis.uniform(0, 2, 5)))
    f = SampledFunction(g, random_complex(rng, g.shape))
    h = SampledFunction(g, random_complex(rng, g.shape))
    lhs = integrate(a * f + b * h) - a * integrate(f) - b * integrate(h)
    scale = abs(a) * np.abs(f.values).max() + abs(b) * np.abs(h.values).max()
    assert abs(lhs) < 1e-12 * max(scale, 1.0)


def test_partition_one_axis():
    boxes = box_partition(torus_grid(8), [2])
    assert [b.ranges for b in boxes] == [((0, 4),), ((4, 8),)]


def test_partition_trivial_counts_give_whole_grid():
    g = torus_grid(6, 2)
    (box,) = box_partition(g, [1, 1])
    assert box.ranges == ((0, 6), (0, 6))


@pytest.mark.parametrize("counts", [(2, 4), (1, 8), (8, 8), (4, 2)])
def test_partition_disjoint_and_covering(counts):
    g = torus_grid(8, 2)
    hits = np.zeros(g.shape, dtype=int)
    for b in box_partition(g, counts):
        hits[b.slices()] += 1
    assert np.all(hits == 1)
    assert len(box_partition(g, counts)) == counts[0] * counts[1]


def test_partition_rejects_non_divisor():
    with pytest.raises(InvalidPartitionError):
        box_partition(torus_grid(8), [3])


def test_weight_rejects_nonpositive():
    g = torus_grid(4)
    with pytest.raises(ValueError):
        WeightFunction(g, [1.0, 0.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        WeightFunction(g, [1.0, -2.0, 1.0, 1.0])


def test_weight_checks_product_bound():
    g = torus_grid(4, 2)
    with pytest.raises(ValueError):
        WeightFunction(g, np.full(g.shape, 3.0), factors=[np.ones(4), np.ones(4)])
    WeightFunction.bracket_product(g, [1.0, 2.0])
    WeightFunction.polynomial(interval_grid(-3, 3, 6, dim=2), 1.5)


def test_sampled_function_rejects_nonfinite():
    with pytest.raises(ValueError):
        SampledFunction(torus_grid(3), [1.0, np.nan, 0.0])


def test_axis_invariants():
    with pytest.raises(ValueError):
        Axis([0.0, 0.5, 0.4], [1, 1, 1])
    with pytest.raises(ValueError):
        Axis([0.0, 1.0], [1, 1], periodic=True, extent=1.0)


def test_sigma_finite_single_box_unit_torus():
    g = torus_grid(16)
    ok, vals = triple_is_sigma_finite(g, WeightFunction.constant(g), ExponentTuple((1,)), box_partition(g, [1]))
    assert ok and vals[0] == pytest.approx(1.0, abs=1e-14)
    ok, vals = triple_is_sigma_finite(g, WeightFunction.constant(g), ExponentTuple((2,)), box_partition(g, [1]))
    assert vals[0] == pytest.approx(1.0, abs=1e-14)


def test_sigma_finite_bracket_weight_matches_integral():
    # int_0^1 (1 + x) dx = 1.5; midpoint rule is exact for affine integrands
    g = interval_grid(0.0, 1.0, 200)
    w = WeightFunction.bracket_product(g, [1.0])
    ok, vals = triple_is_sigma_finite(g, w, ExponentTuple((1,)), box_partition(g, [1]))
    assert vals[0] == pytest.approx(1.5, abs=1e-12)
    ok, vals = triple_is_sigma_finite(g, w, ExponentTuple((1,)), box_partition(g, [4]))
    assert ok and sum(vals) == pytest.approx(1.5, abs=1e-12)


@pytest.mark.parametrize("fmt", ["csv", "bin"])
def test_function_roundtrip(tmp_path, rng, fmt):
    g = ProductGrid((Axis.periodic_uniform(5), Axis.uniform(-1, 1, 3)))
    f = SampledFunction(g, random_complex(rng, g.shape))
    p = save_function(f, tmp_path / "f", fmt=fmt, header={"note": "x"})
    desc = json.loads(p.read_text())
    assert desc["byte_order"] == "little" and desc["grid"]["counts"] == [5, 3]
    back = load_function(p)
    assert back.grid == g
    np.testing.assert_array_equal(back.values, f.values)


def test_binary_layout_is_interleaved_little_endian(tmp_path):
    g = torus_grid(2)
    f = SampledFunction(g, [1 + 2j, 3 - 4j])
    save_function(f, tmp_path / "f", fmt="bin")
    raw = np.fromfile(tmp_path / "f.bin", dtype="<f8")
    np.testing.assert_array_equal(raw, [1, 2, 3, -4])
