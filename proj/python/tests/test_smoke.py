"""End-to-end smoke tests for the python bindings."""

import numpy as np
import pytest

geospark = pytest.importorskip("geospark", reason="geospark not installed (pip install -e .)")


@pytest.fixture(scope="module")
def scene():
    return geospark.generate_scene(seed=3, density=10.0)


def test_scene_shapes(scene):
    n = scene["coords"].shape[0]
    assert n > 200
    assert scene["coords"].shape == (n, 3)
    assert scene["colors"].shape == (n, 3)
    assert scene["labels"].shape == (n,)
    assert scene["object_ids"].shape == (n,)
    assert scene["labels"].min() >= 0
    assert scene["labels"].max() < geospark.num_scene_classes


def test_scene_deterministic(scene):
    again = geospark.generate_scene(seed=3, density=10.0)
    np.testing.assert_array_equal(scene["coords"], again["coords"])
    np.testing.assert_array_equal(scene["labels"], again["labels"])


def test_features_range(scene):
    feats = geospark.geometric_features(scene["coords"], k=10)
    assert feats.shape == (scene["coords"].shape[0], 4)
    assert np.all(feats >= 0.0)
    assert np.all(feats <= 1.0)
    assert np.all(np.isfinite(feats))


def test_partition_pipeline(scene):
    feats = geospark.geometric_features(scene["coords"], k=10)
    comp, energy = geospark.partition(scene["coords"], feats, k_adj=10, lam=0.5)
    n = scene["coords"].shape[0]
    assert comp.shape == (n,)
    m = comp.max() + 1
    # dense component ids covering [0, m), far fewer components than points
    assert set(np.unique(comp)) == set(range(m))
    assert 1 <= m < n
    assert energy >= 0.0


def test_fps_properties(scene):
    coords = scene["coords"][:500]
    keep = geospark.fps(coords, 50, seed_index=7)
    assert keep.shape == (50,)
    assert keep[0] == 7
    assert len(set(keep.tolist())) == 50
    # min pairwise distance of the sample exceeds that of the prefix + next pick
    sel = coords[keep]
    d = np.linalg.norm(sel[:, None] - sel[None, :], axis=-1)
    assert d[np.triu_indices(50, 1)].min() > 0.0


def test_evaluate_perfect_and_disjoint():
    perfect = geospark.evaluate([0, 1, 2, 1], [0, 1, 2, 1], 3)
    assert perfect["miou"] == pytest.approx(1.0)
    assert perfect["oa"] == pytest.approx(1.0)
    wrong = geospark.evaluate([1, 1, 1], [0, 0, 0], 2)
    assert wrong["miou"] == pytest.approx(0.0)
    assert wrong["oa"] == pytest.approx(0.0)


def test_config_preset_roundtrip():
    text = geospark.config_preset("toy")
    pairs = {
        k.strip(): v.strip()
        for k, v in (line.split("=", 1) for line in text.strip().splitlines())
    }
    assert pairs["num_classes"] == "6"
    assert int(pairs["epochs"]) > 0
