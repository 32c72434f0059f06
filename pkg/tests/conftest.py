"""Shared fixtures: a fast desk-scale candidate store and scene sampling."""

import numpy as np
import pytest

from certipose.errors import BehindCamera
from certipose.geometry import CameraParams, Pose, render
from certipose.partition import PartitionConfig, PoseSpace, precompute_store
from certipose.sets import Interval
from certipose.targets import builtin_target

CAM = CameraParams(125.0, 100, 100)

SMALL_SPACE = PoseSpace(Interval(
    np.array([-10.0, -10.0, 70.0, 0.05, np.deg2rad(-2.0), np.deg2rad(-2.0)]),
    np.array([10.0, 10.0, 140.0, 0.50, np.deg2rad(2.0), np.deg2rad(2.0)]),
))


@pytest.fixture(scope="session")
def cam100():
    return CAM


@pytest.fixture(scope="session")
def small_store():
    """Compact stripes store used by estimator/partition/CLI tests."""
    return precompute_store(builtin_target("stripes"), CAM, SMALL_SPACE,
                            PartitionConfig(epsilon_rate=0.4, max_depth=4))


def sample_scene(rng, store, max_tries=1000):
    """(pose, image) with a visible target, drawn from the store's space."""
    lo, hi = store.pose_space.lo, store.pose_space.hi
    for _ in range(max_tries):
        p = Pose.from_array(rng.uniform(lo, hi))
        try:
            img = render(store.camera, p, store.target)
        except BehindCamera:
            continue
        if img.count() > 0:
            return p, img
    raise RuntimeError("no visible pose found")
