"""Python smoke tests for the compiled module (run via ctest)."""

import json

import numpy as np
import pytest

import subit


def make_blobs():
    img = np.zeros((64, 64), dtype=np.uint8)
    img[5:15, 5:15] = 1
    img[30:40, 20:34] = 1
    img[50:58, 45:55] = 1
    return img


def test_count_components_and_subitize_agree():
    img = make_blobs()
    assert subit.count_components(img) == 3
    assert subit.count_holes(img) == 0
    assert subit.subitize(img) == 3


def test_shrink_trace_reaches_isolated_fixed_point():
    img = make_blobs()
    trace = subit.shrink(img)
    assert trace.pixels_removed[-1] == 0
    fp = trace.fixed_point
    assert fp.sum() == 3
    # survivors are isolated
    ys, xs = np.nonzero(fp)
    for y, x in zip(ys, xs):
        patch = fp[max(0, y - 1) : y + 2, max(0, x - 1) : x + 2]
        assert patch.sum() == 1


def test_sampled_scenes_match_oracle():
    for n in range(1, 7):
        arr, scene_json = subit.sample_scene(n, "mixed_solid_shapes", seed=100 + n)
        assert subit.count_components(arr) == n
        assert subit.subitize(arr) == n
        spec = json.loads(scene_json)
        assert spec["label"] == n
        # json spec re-rasterizes to the same image
        again = subit.rasterize_scene(scene_json)
        assert np.array_equal(arr, again)


def test_polarity_and_boundary():
    arr, _ = subit.sample_scene(2, "baseline_circles", seed=9)
    inverted = (1 - arr).astype(np.uint8)
    normalized = subit.polarity_normalize(inverted)
    assert np.array_equal(normalized, arr)
    boundary = subit.to_boundary(arr)
    assert subit.count_components(boundary) == 2
    # boundary pixels all touch background 4-neighbors
    interior = subit.erode_one_layer(arr)
    assert not np.any(np.logical_and(boundary, interior))


def test_strict_mode_rejects_rings():
    arr, _ = subit.sample_scene(1, "exp4_rings", seed=4)
    assert subit.count_holes(arr) >= 1
    with pytest.raises(Exception):
        subit.subitize(arr, strict=True)


def test_default_bank_verifies():
    result = subit.verify_bank(randomized=40)
    assert result["local_ok"]
    assert result["exhaustive_ok"]
    assert result["randomized_ok"]
    assert result["exhaustive_checked"] == 65536


def test_prune_cycle_preserves_components():
    rng = np.random.default_rng(5)
    for _ in range(20):
        img = (rng.random((48, 48)) < 0.35).astype(np.uint8)
        before = subit.count_components(img)
        after = subit.count_components(subit.prune_cycle(img))
        assert before == after
