from __future__ import annotations

import jax.numpy as jnp
import numpy as np
import pytest

from relcont.errors import ConfigError, UnknownSceneError
from relcont.models import DerivativeMode, SceneConfig
from relcont.scenes import SCENES, build_scene, get_scene_spec, list_scenes, resolve_parameters

EXPECTED_SCENES = {
    "minkowski_dust", "boosted_dust", "frw_dust", "frw_perfect_fluid", "schwarzschild_exterior",
    "constant_density_star", "elastic_block_static", "elastic_block_stretched", "euclidean_sphere",
    "random_smooth",
}


def test_registry_lists_every_scene_sorted():
    names = [spec.name for spec in list_scenes()]
    assert set(names) == EXPECTED_SCENES
    assert names == sorted(names)


def test_unknown_scene_is_rejected():
    with pytest.raises(UnknownSceneError):
        get_scene_spec("wormhole")
    with pytest.raises(UnknownSceneError):
        build_scene(SceneConfig(name="wormhole"))


def test_overrides_are_coerced_to_the_default_type():
    spec = get_scene_spec("constant_density_star")
    parameters = resolve_parameters(spec, {"exterior_mass_scale": "1.1", "derivative_mode": "fd"})
    assert parameters["exterior_mass_scale"] == 1.1
    assert parameters["derivative_mode"] == "fd"
    assert parameters["mass"] == SCENES["constant_density_star"].defaults["mass"]


@pytest.mark.parametrize("overrides", [{"bogus": 1}, {"mass": "heavy"}, {"mass": "nan"},
                                       {"derivative_mode": "symbolic"}],
                         ids=["unknown", "not-a-number", "not-finite", "bad-mode"])
def test_bad_overrides_are_config_errors(overrides):
    with pytest.raises(ConfigError):
        resolve_parameters(get_scene_spec("constant_density_star"), overrides)


def test_unknown_stored_energy_family_is_rejected():
    with pytest.raises(ConfigError):
        build_scene(SceneConfig(name="elastic_block_static", parameters={"stored_energy": "rubber"}))


def test_scene_file_can_specialise_a_registered_scene():
    scene = build_scene(SceneConfig(name="heavy_star", base="constant_density_star", nodes=4,
                                    parameters={"mass": 0.3}, checks=["junction_metric"]))
    assert scene.name == "heavy_star"
    assert scene.checks == ["junction_metric"]
    assert scene.nodes == 4
    assert scene.star.mass == 0.3
    assert scene.matched is not None


def test_random_smooth_is_deterministic_in_the_seed():
    point = jnp.array([0.3, 0.4, 0.5, 0.6])
    first = build_scene(SceneConfig(name="random_smooth", seed=7))
    again = build_scene(SceneConfig(name="random_smooth", seed=7))
    other = build_scene(SceneConfig(name="random_smooth", seed=8))
    assert np.array_equal(np.asarray(first.metric(point)), np.asarray(again.metric(point)))
    assert not np.allclose(first.metric(point), other.metric(point))


def test_fd_mode_hides_the_metric_behind_a_black_box():
    scene = build_scene(SceneConfig(name="minkowski_dust", parameters={"derivative_mode": "fd"}))
    assert scene.mode == DerivativeMode.FD
    assert not scene.metric.differentiable
    assert scene.state_metric.differentiable
    assert not scene.fields.exact


def test_scene_points_are_images_of_the_body_grid():
    scene = build_scene(SceneConfig(name="boosted_dust", grid=2))
    points = scene.points()
    assert points.shape == (16, 4)
    assert np.allclose(scene.tube.inverse(points[3]), scene.body_points(2)[3], atol=1e-9)


def test_memo_builds_once():
    scene = build_scene(SceneConfig(name="euclidean_sphere"))
    calls = []
    build = lambda: calls.append(1) or len(calls)
    assert scene.memo("key", build) == 1
    assert scene.memo("key", build) == 1
    assert len(calls) == 1
