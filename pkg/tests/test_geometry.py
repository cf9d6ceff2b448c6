import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from connkit.geometry import (
    RigidTransform,
    geodesic_distance,
    minimal_rotation_between,
    quaternions_to_matrices,
    random_rotation,
    random_rotations,
    rotation_about_axis,
    smallest_perpendicular,
)
from _oracles import geodesic_oracle


def random_transform(rng):
    return RigidTransform(random_rotation(rng), rng.normal(size=3))


def test_identity_is_neutral():
    rng = np.random.default_rng(0)
    t = random_transform(rng)
    assert t.compose(RigidTransform.identity()).allclose(t)
    assert RigidTransform.identity().compose(t).allclose(t)


def test_inverse_cancels():
    rng = np.random.default_rng(1)
    for _ in range(20):
        t = random_transform(rng)
        assert t.compose(t.inverse()).allclose(RigidTransform.identity(), atol=1e-12)
        assert t.inverse().compose(t).allclose(RigidTransform.identity(), atol=1e-12)


def test_compose_matches_pointwise_application():
    rng = np.random.default_rng(2)
    a, b = random_transform(rng), random_transform(rng)
    pts = rng.normal(size=(7, 3))
    np.testing.assert_allclose(a.compose(b).apply(pts), a.apply(b.apply(pts)), atol=1e-12)


def test_apply_direction_ignores_translation():
    rng = np.random.default_rng(3)
    t = random_transform(rng)
    d = np.array([0.0, 0.0, 1.0])
    np.testing.assert_allclose(t.apply_direction(d), t.rotation @ d, atol=1e-15)


def test_transform_arrays_are_read_only():
    t = RigidTransform.identity()
    with pytest.raises(ValueError):
        t.rotation[0, 0] = 2.0


def test_dict_round_trip():
    rng = np.random.default_rng(4)
    t = random_transform(rng)
    back = RigidTransform.from_dict(t.to_dict())
    assert back.allclose(t, atol=1e-15)


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=25, deadline=None)
def test_random_rotations_are_proper(seed):
    r = random_rotation(np.random.default_rng(seed))
    np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
    assert math.isclose(float(np.linalg.det(r)), 1.0, abs_tol=1e-12)


def test_rotation_about_axis_known_values():
    rz = rotation_about_axis([0, 0, 1], np.pi / 2)
    np.testing.assert_allclose(rz @ np.array([1.0, 0, 0]), [0, 1, 0], atol=1e-15)
    # full turn comes back to identity
    np.testing.assert_allclose(rotation_about_axis([1, 2, 2], 2 * np.pi), np.eye(3), atol=1e-14)


def test_rotation_about_axis_rejects_zero_axis():
    with pytest.raises(ValueError):
        rotation_about_axis([0.0, 0.0, 0.0], 1.0)


def test_geodesic_distance_matches_quaternion_oracle():
    rng = np.random.default_rng(5)
    for _ in range(50):
        ra, rb = random_rotation(rng), random_rotation(rng)
        assert geodesic_distance(ra, rb) == pytest.approx(geodesic_oracle(ra, rb), abs=1e-9)


def test_geodesic_distance_endpoints():
    r = rotation_about_axis([0, 1, 0], 0.3)
    assert geodesic_distance(r, r) == pytest.approx(0.0, abs=1e-12)
    flip = rotation_about_axis([1, 0, 0], np.pi)
    assert geodesic_distance(np.eye(3), flip) == pytest.approx(np.pi, abs=1e-12)


def test_smallest_perpendicular_is_unit_and_orthogonal():
    rng = np.random.default_rng(6)
    for _ in range(50):
        u = rng.normal(size=3)
        p = smallest_perpendicular(u)
        assert np.linalg.norm(p) == pytest.approx(1.0, abs=1e-12)
        assert abs(float(np.dot(p, u / np.linalg.norm(u)))) < 1e-9


def test_smallest_perpendicular_axis_aligned():
    np.testing.assert_allclose(smallest_perpendicular([1, 0, 0]), [0, -1, 0], atol=1e-15)
    np.testing.assert_allclose(smallest_perpendicular([0, 0, 1]), [-1, 0, 0], atol=1e-15)


def test_minimal_rotation_maps_u_to_v():
    rng = np.random.default_rng(7)
    for _ in range(50):
        u, v = rng.normal(size=3), rng.normal(size=3)
        r = minimal_rotation_between(u, v)
        np.testing.assert_allclose(r @ (u / np.linalg.norm(u)), v / np.linalg.norm(v), atol=1e-9)


def test_minimal_rotation_parallel_is_identity():
    np.testing.assert_allclose(minimal_rotation_between([0, 0, 2], [0, 0, 5]), np.eye(3), atol=1e-12)


def test_minimal_rotation_antiparallel_is_half_turn():
    u = np.array([0.0, 0.0, 1.0])
    r = minimal_rotation_between(u, -u)
    np.testing.assert_allclose(r @ u, -u, atol=1e-12)
    assert geodesic_distance(np.eye(3), r) == pytest.approx(np.pi, abs=1e-12)
    # deterministic choice of flip axis: the smallest perpendicular
    np.testing.assert_allclose(r @ np.array([-1.0, 0, 0]), [-1.0, 0, 0], atol=1e-12)


def test_minimal_rotation_angle_is_minimal():
    rng = np.random.default_rng(8)
    for _ in range(20):
        u = rng.normal(size=3)
        v = rng.normal(size=3)
        r = minimal_rotation_between(u, v)
        angle = geodesic_distance(np.eye(3), r)
        uu = u / np.linalg.norm(u)
        vv = v / np.linalg.norm(v)
        expected = math.acos(max(-1.0, min(1.0, float(np.dot(uu, vv)))))
        assert angle == pytest.approx(expected, abs=1e-9)


def test_quaternions_to_matrices_identity():
    m = quaternions_to_matrices(np.array([[1.0, 0.0, 0.0, 0.0]]))
    np.testing.assert_allclose(m[0], np.eye(3), atol=1e-15)


def test_random_rotations_batch_shape_and_determinism():
    a = random_rotations(5, np.random.default_rng(42))
    b = random_rotations(5, np.random.default_rng(42))
    assert a.shape == (5, 3, 3)
    np.testing.assert_array_equal(a, b)
