"""SO(3)/SE(3) primitives: algebra maps, distances, exponential, pose composition.

All operations are pure functions over numpy arrays and plain value types,
safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotAntisymmetric

ORTHOGONALITY_TOL = 1e-9
_SERIES_ANGLE = 1e-8  # below this, closed-form sin/cos coefficients lose precision
_EYE3 = np.eye(3)
_EYE3.setflags(write=False)


def _det3(m) -> float:
    return (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )


def skew(b) -> np.ndarray:
    """Antisymmetric matrix of b, so that skew(b) @ w == cross(b, w)."""
    b = np.asarray(b, dtype=float)
    return np.array(
        [
            [0.0, -b[2], b[1]],
            [b[2], 0.0, -b[0]],
            [-b[1], b[0], 0.0],
        ]
    )


def vex(m) -> np.ndarray:
    """Extract b from skew(b).

    Raises NotAntisymmetric if ||m + m^T|| exceeds 1e-9 (Frobenius).
    """
    m = np.asarray(m, dtype=float)
    d = m + m.T
    defect = math.sqrt(float((d * d).sum()))
    if defect > ORTHOGONALITY_TOL:
        raise NotAntisymmetric(f"matrix is not antisymmetric (defect {defect:.3e})")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def pa(m) -> np.ndarray:
    """Antisymmetric projection (m - m^T) / 2."""
    m = np.asarray(m, dtype=float)
    return 0.5 * (m - m.T)


def dist_so3(r) -> float:
    """Normalized distance of a rotation from identity: (1/4) Tr{I - R}.

    0 at the identity, 1 at any half-turn; clipped to [0, 1] against roundoff.
    """
    r = np.asarray(r, dtype=float)
    d = 0.25 * (3.0 - float(np.trace(r)))
    return min(max(d, 0.0), 1.0)


def so3_exp(phi) -> np.ndarray:
    """Rotation matrix for the rotation vector phi (axis * angle)."""
    phi = np.asarray(phi, dtype=float)
    angle = math.sqrt(float(phi @ phi))
    k = skew(phi)
    if angle < _SERIES_ANGLE:
        # second-order series; relative error below 1e-12 at this angle
        return _EYE3 + k + 0.5 * (k @ k)
    a = math.sin(angle) / angle
    b = (1.0 - math.cos(angle)) / (angle * angle)
    return _EYE3 + a * k + b * (k @ k)


def rodriguez_map(rho) -> np.ndarray:
    """Rotation matrix parameterized by a Rodriguez vector rho."""
    rho = np.asarray(rho, dtype=float)
    n2 = float(rho @ rho)
    return ((1.0 - n2) * np.eye(3) + 2.0 * np.outer(rho, rho) + 2.0 * skew(rho)) / (1.0 + n2)


def rotation_defect(r) -> float:
    """Frobenius distance of r^T r from the identity; NaN input gives NaN."""
    r = np.asarray(r, dtype=float)
    with np.errstate(invalid="ignore"):
        d = r.T @ r - _EYE3
        return math.sqrt(float((d * d).sum()))


def assert_rotation(r) -> None:
    """Raise ValueError unless r is orthogonal with det +1 within 1e-9.

    Non-finite entries poison the defect, so the inverted comparisons below
    also reject NaN/Inf matrices.
    """
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {r.shape}")
    defect = rotation_defect(r)
    if not defect <= ORTHOGONALITY_TOL:
        raise ValueError(f"matrix is not orthogonal (defect {defect:.3e})")
    det = _det3(r)
    if not abs(det - 1.0) <= ORTHOGONALITY_TOL:
        raise ValueError(f"matrix is not a proper rotation (det {det:.12f})")


def project_rotation(m) -> np.ndarray:
    """Nearest proper rotation to m (polar projection via SVD)."""
    m = np.asarray(m, dtype=float)
    u, _, vt = np.linalg.svd(m)
    d = float(np.linalg.det(u) * np.linalg.det(vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


def euler_zyx(r) -> np.ndarray:
    """Roll/pitch/yaw of a rotation matrix, ZYX convention.

    Pitch is kept in [-pi/2, pi/2]; at gimbal lock yaw is pinned to 0.
    """
    r = np.asarray(r, dtype=float)
    sp = min(1.0, max(-1.0, -float(r[2, 0])))
    pitch = math.asin(sp)
    if abs(sp) > 1.0 - 1e-12:
        # roll and yaw are degenerate; report their combination as roll
        yaw = 0.0
        if sp > 0.0:
            roll = math.atan2(r[0, 1], r[1, 1])
        else:
            roll = math.atan2(-r[0, 1], r[1, 1])
    else:
        roll = math.atan2(float(r[2, 1]), float(r[2, 2]))
        yaw = math.atan2(float(r[1, 0]), float(r[0, 0]))
    return np.array([roll, pitch, yaw])


@dataclass(frozen=True)
class Twist:
    """Body-frame group velocity: angular rate omega (rad/s) and velocity v (m/s)."""

    omega: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if omega.shape != (3,) or v.shape != (3,):
            raise ValueError("twist components must be 3-vectors")
        if not (np.isfinite(omega).all() and np.isfinite(v).all()):
            raise ValueError("twist entries must be finite")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "v", v)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.omega, self.v])

    @staticmethod
    def from_vector(y) -> "Twist":
        y = np.asarray(y, dtype=float)
        return Twist(omega=y[:3], v=y[3:])


def wedge(y: Twist) -> np.ndarray:
    """4x4 twist matrix: skew(omega) in the top-left block, v in the last column."""
    out = np.zeros((4, 4))
    out[:3, :3] = skew(y.omega)
    out[:3, 3] = y.v
    return out


@dataclass(frozen=True)
class Pose:
    """Rigid-body pose: rotation matrix r and position p (meters)."""

    r: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if p.shape != (3,):
            raise ValueError("position must be a 3-vector")
        if not np.isfinite(p).all():
            raise ValueError("pose entries must be finite")
        assert_rotation(r)  # also rejects non-finite rotation entries
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "p", p)

    @staticmethod
    def identity() -> "Pose":
        return Pose(r=np.eye(3), p=np.zeros(3))

    def as_matrix(self) -> np.ndarray:
        out = np.eye(4)
        out[:3, :3] = self.r
        out[:3, 3] = self.p
        return out

    @staticmethod
    def from_matrix(m) -> "Pose":
        m = np.asarray(m, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"homogeneous matrix must be 4x4, got {m.shape}")
        if np.abs(m[3] - np.array([0.0, 0.0, 0.0, 1.0])).max() > 1e-12:
            raise ValueError("bottom row must be [0, 0, 0, 1]")
        return Pose(r=m[:3, :3], p=m[:3, 3])


def compose(a: Pose, b: Pose) -> Pose:
    """Homogeneous-matrix product of two poses."""
    return Pose(r=a.r @ b.r, p=a.r @ b.p + a.p)


def inverse(a: Pose) -> Pose:
    """Pose inverse: (R, p) -> (R^T, -R^T p)."""
    rt = a.r.T
    return Pose(r=rt, p=-(rt @ a.p))
