"""Self-contained numerical property suites.

Each suite draws its own seeded samples, checks one identity or behavior the
rest of the package relies on, and reports trial/failure counts.  The CLI
`verify` subcommand runs them and the test suite reuses them directly.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass

import numpy as np

from .filter import FilterGains
from .liegroup import dist_so3, pa, skew, so3_exp, vex
from .ppf import PpfChannelConfig, mu, ppf_eval, smooth_z, transform_error
from .recon import (
    MeasurementBiases,
    MeasurementNoise,
    reconstruct_pose,
    synthesize_measurements,
)


@dataclass
class SuiteResult:
    name: str
    trials: int
    failures: int
    max_err: float
    elapsed_s: float

    @property
    def passed(self) -> bool:
        return self.failures == 0


def lemma1_suite(trials: int = 100_000, seed: int = 0) -> SuiteResult:
    """||vex(Pa(R))||^2 == 4 (1 - d) d with d = dist_so3(R), within 1e-10."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    phis = rng.uniform(-np.pi, np.pi, size=(trials, 3))
    failures = 0
    max_err = 0.0
    for phi in phis:
        r = so3_exp(phi)
        d = dist_so3(r)
        v = vex(pa(r))
        err = abs(float(v @ v) - 4.0 * (1.0 - d) * d)
        max_err = max(max_err, err)
        if err > 1e-10:
            failures += 1
    return SuiteResult("lemma1", trials, failures, max_err, time.perf_counter() - t0)


def trace_identity_suite(trials: int = 10_000, seed: int = 0) -> SuiteResult:
    """Tr{A skew(b)} == -2 vex(Pa(A))^T b, within 1e-10 (1 + |A||b|)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    mats = rng.normal(scale=3.0, size=(trials, 3, 3))
    vecs = rng.normal(scale=3.0, size=(trials, 3))
    failures = 0
    max_err = 0.0
    for a, b in zip(mats, vecs):
        lhs = float(np.trace(a @ skew(b)))
        rhs = -2.0 * float(vex(pa(a)) @ b)
        scale = 1.0 + float(np.linalg.norm(a)) * float(np.linalg.norm(b))
        err = abs(lhs - rhs) / scale
        max_err = max(max_err, err)
        if abs(lhs - rhs) > 1e-10 * scale:
            failures += 1
    return SuiteResult("trace-identity", trials, failures, max_err, time.perf_counter() - t0)


def transform_roundtrip_suite(trials: int = 10_000, seed: int = 0) -> SuiteResult:
    """Transform bijection and derivative consistency on random channels.

    Round-trips e = xi * Z(E) back through the log transform within 1e-10 and
    compares a central finite difference of the transform against mu within
    relative 1e-5 (step 1e-6 * xi).
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    failures = 0
    max_err = 0.0
    for _ in range(trials):
        delta = rng.uniform(0.5, 6.0)
        cfg = PpfChannelConfig(
            xi0=rng.uniform(0.5, 6.0) + 0.5,
            xi_inf=rng.uniform(0.05, 0.4),
            ell=rng.uniform(0.5, 6.0),
            delta_bar=delta,
            delta_under=delta,
        )
        st = ppf_eval(cfg, rng.uniform(0.0, 3.0))
        e_trans = rng.uniform(-5.0, 5.0)
        e_raw = st.xi * smooth_z(e_trans, cfg)
        back = transform_error(e_raw, st, cfg)
        rt_err = abs(back - e_trans)
        # derivative check away from the band edge, where a fixed-step central
        # difference can resolve the transform slope to the stated precision
        e_fd = rng.uniform(-0.99, 0.99) * delta * st.xi
        h = 1e-6 * st.xi
        fd = (
            transform_error(e_fd + h, st, cfg) - transform_error(e_fd - h, st, cfg)
        ) / (2.0 * h)
        mu_val = mu(e_fd, st, cfg)
        fd_err = abs(fd - mu_val) / mu_val
        max_err = max(max_err, rt_err, fd_err)
        if rt_err > 1e-10 or fd_err > 1e-5:
            failures += 1
    return SuiteResult(
        "transform-roundtrip", trials, failures, max_err, time.perf_counter() - t0
    )


def wahba_suite(trials: int = 100, seed: int = 0) -> SuiteResult:
    """Noise-free pose reconstruction against the forward synthesis oracle.

    Uses the built-in scenario geometry (two vectors plus one landmark) with
    random true poses; requires the reconstructed pose within 1e-9.
    """
    from .liegroup import Pose
    from .sim import paper_scenario

    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    refs = paper_scenario().refs
    n_vec = len(refs.inertial_vectors)
    n_lm = len(refs.landmarks)
    biases = MeasurementBiases(
        vectors=tuple(np.zeros(3) for _ in range(n_vec)),
        landmarks=tuple(np.zeros(3) for _ in range(n_lm)),
    )
    noise = MeasurementNoise(vector_stds=(0.0,) * n_vec, landmark_stds=(0.0,) * n_lm)
    failures = 0
    max_err = 0.0
    for _ in range(trials):
        truth = Pose(
            r=so3_exp(rng.uniform(-np.pi, np.pi, size=3)),
            p=rng.uniform(-5.0, 5.0, size=3),
        )
        meas = synthesize_measurements(truth, refs, biases, noise, rng)
        t_y = reconstruct_pose(refs, meas)
        r_err = float(np.linalg.norm(t_y.r - truth.r))
        p_err = float(np.linalg.norm(t_y.p - truth.p))
        max_err = max(max_err, r_err, p_err)
        if r_err > 1e-9 or p_err > 1e-9:
            failures += 1
    return SuiteResult("wahba", trials, failures, max_err, time.perf_counter() - t0)


def lyapunov_suite(trials: int = 1, seed: int = 0) -> SuiteResult:
    """Monotone Lyapunov decrease on the noise-free reference run.

    Runs the built-in scenario with velocity biases active and all measurement
    noise and vector/landmark biases zeroed; counts steps where the recorded
    Lyapunov value increases by more than 1e-6.
    """
    from .sim import paper_scenario, run_scenario

    t0 = time.perf_counter()
    cfg = paper_scenario(seed=seed, noise_free=True)
    refs = cfg.refs
    cfg = dataclasses.replace(
        cfg,
        measurement_biases=MeasurementBiases(
            vectors=tuple(np.zeros(3) for _ in refs.inertial_vectors),
            landmarks=tuple(np.zeros(3) for _ in refs.landmarks),
        ),
    )
    failures = 0
    max_err = 0.0
    for _ in range(trials):
        rec = run_scenario(cfg)
        dv = np.diff(rec.lyapunov)
        max_err = max(max_err, float(dv.max()))
        failures += int((dv > 1e-6).sum())
    return SuiteResult(
        "lyapunov", trials * (rec.rows - 1), failures, max_err, time.perf_counter() - t0
    )


SUITES = {
    "lemma1": lemma1_suite,
    "trace-identity": trace_identity_suite,
    "transform-roundtrip": transform_roundtrip_suite,
    "wahba": wahba_suite,
    "lyapunov": lyapunov_suite,
}


def run_suites(names=None, trials: int | None = None, seed: int = 0):
    """Run the named suites (all by default) and return their results."""
    results = []
    for name in names or SUITES:
        fn = SUITES[name]
        results.append(fn(trials, seed) if trials is not None else fn(seed=seed))
    return results
