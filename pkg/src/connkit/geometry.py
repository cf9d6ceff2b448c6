"""Rigid-body geometry helpers used across the toolkit."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_EPS = 1e-12


def _as_unit(v, tol: float = 1e-9) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n < tol:
        raise ValueError("zero-length vector where a direction was expected")
    return v / n


@dataclass(frozen=True)
class RigidTransform:
    """A proper rigid transform (rotation plus translation).

    ``rotation`` is a 3x3 matrix with determinant +1, ``translation`` a
    3-vector. Arrays are stored read-only so instances can be shared freely.
    """

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        r = np.array(self.rotation, dtype=float).reshape(3, 3)
        t = np.array(self.translation, dtype=float).reshape(3)
        r.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform()

    def is_valid(self, tol: float = 1e-8) -> bool:
        r = self.rotation
        if not np.allclose(r.T @ r, np.eye(3), atol=tol):
            return False
        return abs(float(np.linalg.det(r)) - 1.0) <= tol

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Return self o other (apply ``other`` first)."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)

    def apply(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    def apply_direction(self, dirs) -> np.ndarray:
        d = np.asarray(dirs, dtype=float)
        return d @ self.rotation.T

    def allclose(self, other: "RigidTransform", atol: float = 1e-9) -> bool:
        return np.allclose(self.rotation, other.rotation, atol=atol) and np.allclose(
            self.translation, other.translation, atol=atol
        )

    def to_dict(self) -> dict:
        return {
            "rotation": [[float(x) for x in row] for row in self.rotation],
            "translation": [float(x) for x in self.translation],
        }

    @staticmethod
    def from_dict(d: dict) -> "RigidTransform":
        return RigidTransform(np.asarray(d["rotation"], float), np.asarray(d["translation"], float))

    def __eq__(self, other):
        if not isinstance(other, RigidTransform):
            return NotImplemented
        return bool(np.array_equal(self.rotation, other.rotation) and np.array_equal(self.translation, other.translation))

    def __hash__(self):
        return hash((self.rotation.tobytes(), self.translation.tobytes()))


def rotation_about_axis(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for a rotation of ``angle`` about ``axis``."""
    u = _as_unit(axis)
    k = np.array([[0.0, -u[2], u[1]], [u[2], 0.0, -u[0]], [-u[1], u[0], 0.0]])
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def geodesic_distance(r_a: np.ndarray, r_b: np.ndarray) -> float:
    """Angle in radians of the relative rotation between two rotation matrices."""
    c = (float(np.trace(np.asarray(r_a).T @ np.asarray(r_b))) - 1.0) / 2.0
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def smallest_perpendicular(u) -> np.ndarray:
    """Lexicographically smallest unit vector perpendicular to ``u``.

    Among the circle of unit vectors orthogonal to ``u`` this picks the one
    minimising (x, y, z) in lexicographic order, which makes constructions
    that need "some perpendicular axis" deterministic.
    """
    u = _as_unit(u)
    ex = np.array([1.0, 0.0, 0.0])
    p = ex - np.dot(u, ex) * u
    n = float(np.linalg.norm(p))
    if n > 1e-9:
        return -p / n
    # u is along +-x; the perpendicular circle lies in the yz plane and the
    # lexicographic minimum there is -y.
    return np.array([0.0, -1.0, 0.0])


def minimal_rotation_between(u, v) -> np.ndarray:
    """Smallest-angle rotation mapping direction ``u`` onto direction ``v``.

    The antiparallel case needs a half-turn whose axis is otherwise free; it
    is resolved by rotating about the lexicographically smallest unit vector
    perpendicular to ``u``.
    """
    u = _as_unit(u)
    v = _as_unit(v)
    c = float(np.dot(u, v))
    if c >= 1.0 - _EPS:
        return np.eye(3)
    if c <= -1.0 + _EPS:
        return rotation_about_axis(smallest_perpendicular(u), np.pi)
    axis = np.cross(u, v)
    return rotation_about_axis(axis, float(np.arctan2(np.linalg.norm(axis), c)))


def quaternions_to_matrices(q: np.ndarray) -> np.ndarray:
    """Convert an (n, 4) array of unit quaternions (w, x, y, z) to matrices."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    m = np.empty((q.shape[0], 3, 3))
    m[:, 0, 0] = 1 - 2 * (y * y + z * z)
    m[:, 0, 1] = 2 * (x * y - w * z)
    m[:, 0, 2] = 2 * (x * z + w * y)
    m[:, 1, 0] = 2 * (x * y + w * z)
    m[:, 1, 1] = 1 - 2 * (x * x + z * z)
    m[:, 1, 2] = 2 * (y * z - w * x)
    m[:, 2, 0] = 2 * (x * z - w * y)
    m[:, 2, 1] = 2 * (y * z + w * x)
    m[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return m


def random_rotations(n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample ``n`` rotation matrices uniformly over the rotation group."""
    u1 = rng.random(n)
    u2 = rng.random(n) * 2.0 * np.pi
    u3 = rng.random(n) * 2.0 * np.pi
    a = np.sqrt(1.0 - u1)
    b = np.sqrt(u1)
    q = np.stack([a * np.sin(u2), a * np.cos(u2), b * np.sin(u3), b * np.cos(u3)], axis=1)
    return quaternions_to_matrices(q)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    return random_rotations(1, rng)[0]
