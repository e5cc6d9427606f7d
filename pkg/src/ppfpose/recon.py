"""Body-frame measurement synthesis and pose reconstruction.

The attitude is recovered from weighted unit-vector pairs by the SVD solution
of the least-squares attitude problem; the position follows from landmark
measurements once the attitude is known.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CollinearInputs, DegenerateGeometry, ZeroVector
from .liegroup import Pose

_COLLINEAR_TOL = 1e-6
_SINGULAR_TOL = 1e-9


@dataclass(frozen=True)
class ReferenceSet:
    """Known inertial-frame directions and landmark positions with weights."""

    inertial_vectors: tuple
    landmarks: tuple
    vector_weights: tuple
    landmark_weights: tuple

    def __post_init__(self):
        vectors = tuple(np.asarray(v, dtype=float) for v in self.inertial_vectors)
        landmarks = tuple(np.asarray(v, dtype=float) for v in self.landmarks)
        vw = tuple(float(w) for w in self.vector_weights)
        lw = tuple(float(w) for w in self.landmark_weights)
        if len(vectors) != len(vw) or len(landmarks) != len(lw):
            raise ValueError("weights must match vector/landmark counts")
        for v in vectors + landmarks:
            if v.shape != (3,) or not np.isfinite(v).all():
                raise ValueError("reference entries must be finite 3-vectors")
        if any(w <= 0.0 for w in vw + lw):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "inertial_vectors", vectors)
        object.__setattr__(self, "landmarks", landmarks)
        object.__setattr__(self, "vector_weights", vw)
        object.__setattr__(self, "landmark_weights", lw)


@dataclass(frozen=True)
class MeasurementBiases:
    """Constant additive biases of the body-frame vector/landmark measurements."""

    vectors: tuple
    landmarks: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "vectors", tuple(np.asarray(b, dtype=float) for b in self.vectors)
        )
        object.__setattr__(
            self, "landmarks", tuple(np.asarray(b, dtype=float) for b in self.landmarks)
        )


@dataclass(frozen=True)
class MeasurementNoise:
    """Per-measurement Gaussian noise standard deviations (per component)."""

    vector_stds: tuple
    landmark_stds: tuple

    def __post_init__(self):
        object.__setattr__(self, "vector_stds", tuple(float(s) for s in self.vector_stds))
        object.__setattr__(self, "landmark_stds", tuple(float(s) for s in self.landmark_stds))
        if any(s < 0.0 for s in self.vector_stds + self.landmark_stds):
            raise ValueError("noise standard deviations must be non-negative")


@dataclass(frozen=True)
class BodyMeasurements:
    """One time step of body-frame measurements plus the realized bias/noise."""

    body_vectors: tuple
    body_landmarks: tuple
    vector_biases: tuple
    landmark_biases: tuple
    vector_noise: tuple
    landmark_noise: tuple


def validate_observability(refs: ReferenceSet) -> None:
    """Check the pose is extractable: enough non-collinear vectors, a landmark.

    With exactly two vectors the third is obtained by augmentation, so the two
    must be non-collinear; with three or more, every pair must be.
    """
    vectors = refs.inertial_vectors
    if len(vectors) < 2:
        raise DegenerateGeometry("at least two reference vectors are required")
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            if np.linalg.norm(np.cross(vectors[i], vectors[j])) <= _COLLINEAR_TOL:
                raise CollinearInputs(f"reference vectors {i} and {j} are collinear")
    if len(refs.landmarks) < 1:
        raise DegenerateGeometry("at least one landmark is required")


def synthesize_measurements(
    truth: Pose,
    refs: ReferenceSet,
    biases: MeasurementBiases,
    noise: MeasurementNoise,
    rng: np.random.Generator,
) -> BodyMeasurements:
    """Generate body-frame measurements of the reference set from the true pose.

    Vectors map as R^T v + b + w, landmarks as R^T (v - P) + b + w, with w
    drawn i.i.d. zero-mean Gaussian per component from the caller's generator.
    """
    if len(biases.vectors) != len(refs.inertial_vectors) or len(
        noise.vector_stds
    ) != len(refs.inertial_vectors):
        raise ValueError("bias/noise specs must match the reference vector count")
    if len(biases.landmarks) != len(refs.landmarks) or len(noise.landmark_stds) != len(
        refs.landmarks
    ):
        raise ValueError("bias/noise specs must match the landmark count")
    rt = truth.r.T
    body_vectors = []
    vector_noise = []
    for v, b, s in zip(refs.inertial_vectors, biases.vectors, noise.vector_stds):
        w = s * rng.standard_normal(3)
        vector_noise.append(w)
        body_vectors.append(rt @ v + b + w)
    body_landmarks = []
    landmark_noise = []
    for v, b, s in zip(refs.landmarks, biases.landmarks, noise.landmark_stds):
        w = s * rng.standard_normal(3)
        landmark_noise.append(w)
        body_landmarks.append(rt @ (v - truth.p) + b + w)
    return BodyMeasurements(
        body_vectors=tuple(body_vectors),
        body_landmarks=tuple(body_landmarks),
        vector_biases=biases.vectors,
        landmark_biases=biases.landmarks,
        vector_noise=tuple(vector_noise),
        landmark_noise=tuple(landmark_noise),
    )


def augment_third_vector(refs: ReferenceSet, meas: BodyMeasurements):
    """Append the cross product of two reference vectors on both frames.

    Only defined for exactly two vectors.  The synthetic third carries unit
    weight and zero recorded bias/noise (its error is implied by the inputs).
    """
    if len(refs.inertial_vectors) != 2:
        raise ValueError("augmentation requires exactly two reference vectors")
    v3_inertial = np.cross(refs.inertial_vectors[0], refs.inertial_vectors[1])
    if np.linalg.norm(v3_inertial) < _COLLINEAR_TOL:
        raise CollinearInputs("reference vectors are collinear; cannot span a third")
    v3_body = np.cross(meas.body_vectors[0], meas.body_vectors[1])
    zero = np.zeros(3)
    refs_out = ReferenceSet(
        inertial_vectors=refs.inertial_vectors + (v3_inertial,),
        landmarks=refs.landmarks,
        vector_weights=refs.vector_weights + (1.0,),
        landmark_weights=refs.landmark_weights,
    )
    meas_out = BodyMeasurements(
        body_vectors=meas.body_vectors + (v3_body,),
        body_landmarks=meas.body_landmarks,
        vector_biases=meas.vector_biases + (zero,),
        landmark_biases=meas.landmark_biases,
        vector_noise=meas.vector_noise + (zero,),
        landmark_noise=meas.landmark_noise,
    )
    return refs_out, meas_out


def normalize_pairs(refs: ReferenceSet, meas: BodyMeasurements):
    """Unit-vector pairs (inertial, body) for the attitude solve."""
    pairs = []
    for v_i, v_b in zip(refs.inertial_vectors, meas.body_vectors):
        n_i = np.linalg.norm(v_i)
        n_b = np.linalg.norm(v_b)
        if n_i < 1e-12 or n_b < 1e-12:
            raise ZeroVector("cannot normalize a zero vector")
        pairs.append((v_i / n_i, v_b / n_b))
    return pairs


def wahba_svd(pairs, weights) -> np.ndarray:
    """Attitude from weighted unit-vector pairs, SVD least-squares solution.

    Minimizes sum_j w_j ||body_j - R^T inertial_j||^2 over rotations: builds
    H = sum_j w_j inertial_j body_j^T, takes H = U S V^T and returns
    U diag(1, 1, det(U) det(V)) V^T, which is always a proper rotation.
    """
    if len(pairs) < 3:
        raise DegenerateGeometry("attitude solve needs at least three vector pairs")
    h = np.zeros((3, 3))
    for (v_i, v_b), w in zip(pairs, weights):
        h += w * np.outer(v_i, v_b)
    u, s, vt = np.linalg.svd(h)
    if s[1] < _SINGULAR_TOL:
        raise DegenerateGeometry(
            f"vector geometry is rank deficient (singular values {s})"
        )
    d = float(np.linalg.det(u) * np.linalg.det(vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


def position_from_landmarks(
    r_y: np.ndarray, refs: ReferenceSet, meas: BodyMeasurements
) -> np.ndarray:
    """Weighted landmark position estimate given the reconstructed attitude."""
    if len(refs.landmarks) < 1:
        raise DegenerateGeometry("position reconstruction needs a landmark")
    total = 0.0
    acc = np.zeros(3)
    for v_i, v_b, w in zip(refs.landmarks, meas.body_landmarks, refs.landmark_weights):
        acc += w * (v_i - r_y @ v_b)
        total += w
    return acc / total


def reconstruct_pose(refs: ReferenceSet, meas: BodyMeasurements) -> Pose:
    """Full pose from one step of body measurements.

    Augments a third vector when only two are available, normalizes the pairs,
    solves the attitude by SVD, then reconstructs the position from landmarks.
    """
    if len(refs.landmarks) < 1:
        raise DegenerateGeometry("position reconstruction needs a landmark")
    if len(refs.inertial_vectors) == 2:
        refs, meas = augment_third_vector(refs, meas)
    pairs = normalize_pairs(refs, meas)
    r_y = wahba_svd(pairs, refs.vector_weights)
    p_y = position_from_landmarks(r_y, refs, meas)
    return Pose(r=r_y, p=p_y)
