"""Scenario configuration files: a flat key/value text format.

Each non-comment line is ``section.key = value`` where the value is one or
more whitespace-separated numbers.  Unknown keys are rejected so that typos
cannot silently fall back to defaults.  Numbers are emitted with 17
significant digits, which round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError
from .filter import FilterGains
from .liegroup import Pose, project_rotation, rotation_defect
from .ppf import PpfChannelConfig
from .recon import MeasurementBiases, MeasurementNoise, ReferenceSet
from .sim import ScenarioConfig, paper_scenario

SCENARIOS = {"paper": paper_scenario}

_SCALAR_KEYS = (
    "run.duration",
    "run.dt",
    "run.seed",
    "run.strict",
    "gains.k_w",
    "gains.gamma",
    "noise.omega",
    "noise.velocity",
)
_VEC4_KEYS = ("ppf.xi0", "ppf.xi_inf", "ppf.ell", "ppf.delta_bar", "ppf.delta_under")
_FIXED_KEYS = _SCALAR_KEYS + _VEC4_KEYS + (
    "bias.omega",
    "bias.velocity",
    "init.truth",
    "init.estimate",
    "init.bias_estimate",
)
_INDEXED_PREFIXES = (
    "refs.vector.",
    "refs.vector_weight.",
    "refs.landmark.",
    "refs.landmark_weight.",
    "bias.vector.",
    "bias.landmark.",
    "noise.vector.",
    "noise.landmark.",
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_seq(values) -> str:
    return " ".join(_fmt(v) for v in np.asarray(values, dtype=float).ravel())


def dump_config(cfg: ScenarioConfig) -> str:
    """Serialize a scenario to the flat text format."""
    lines = [
        f"run.duration = {_fmt(cfg.duration)}",
        f"run.dt = {_fmt(cfg.dt)}",
        f"run.seed = {int(cfg.seed)}",
        f"run.strict = {1 if cfg.strict else 0}",
        f"gains.k_w = {_fmt(cfg.gains.k_w)}",
        f"gains.gamma = {_fmt(cfg.gains.gamma)}",
        f"ppf.xi0 = {_fmt_seq([c.xi0 for c in cfg.channels])}",
        f"ppf.xi_inf = {_fmt_seq([c.xi_inf for c in cfg.channels])}",
        f"ppf.ell = {_fmt_seq([c.ell for c in cfg.channels])}",
        f"ppf.delta_bar = {_fmt_seq([c.delta_bar for c in cfg.channels])}",
        f"ppf.delta_under = {_fmt_seq([c.delta_under for c in cfg.channels])}",
    ]
    for i, v in enumerate(cfg.refs.inertial_vectors, start=1):
        lines.append(f"refs.vector.{i} = {_fmt_seq(v)}")
        lines.append(f"refs.vector_weight.{i} = {_fmt(cfg.refs.vector_weights[i - 1])}")
    for i, v in enumerate(cfg.refs.landmarks, start=1):
        lines.append(f"refs.landmark.{i} = {_fmt_seq(v)}")
        lines.append(f"refs.landmark_weight.{i} = {_fmt(cfg.refs.landmark_weights[i - 1])}")
    for i, b in enumerate(cfg.measurement_biases.vectors, start=1):
        lines.append(f"bias.vector.{i} = {_fmt_seq(b)}")
    for i, b in enumerate(cfg.measurement_biases.landmarks, start=1):
        lines.append(f"bias.landmark.{i} = {_fmt_seq(b)}")
    for i, s in enumerate(cfg.measurement_noise.vector_stds, start=1):
        lines.append(f"noise.vector.{i} = {_fmt(s)}")
    for i, s in enumerate(cfg.measurement_noise.landmark_stds, start=1):
        lines.append(f"noise.landmark.{i} = {_fmt(s)}")
    lines.append(f"bias.omega = {_fmt_seq(cfg.velocity_bias[:3])}")
    lines.append(f"bias.velocity = {_fmt_seq(cfg.velocity_bias[3:])}")
    lines.append(f"noise.omega = {_fmt(cfg.omega_noise_std)}")
    lines.append(f"noise.velocity = {_fmt(cfg.velocity_noise_std)}")
    lines.append(f"init.truth = {_fmt_seq(cfg.truth0.as_matrix())}")
    lines.append(f"init.estimate = {_fmt_seq(cfg.estimate0.as_matrix())}")
    lines.append(f"init.bias_estimate = {_fmt_seq(cfg.bias_estimate0)}")
    return "\n".join(lines) + "\n"


def _parse_lines(text: str) -> dict:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            entries[key] = tuple(float(tok) for tok in value.split())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad number in {raw!r}") from exc
        if not entries[key]:
            raise ConfigError(f"line {lineno}: key {key!r} has no value")
    return entries


def _indexed(entries: dict, prefix: str, width: int):
    """Collect prefix.1, prefix.2, ... as arrays of the given width."""
    found = {}
    for key, val in entries.items():
        if key.startswith(prefix):
            tail = key[len(prefix):]
            if not tail.isdigit() or int(tail) < 1:
                raise ConfigError(f"bad index in key {key!r}")
            found[int(tail)] = val
    if sorted(found) != list(range(1, len(found) + 1)):
        raise ConfigError(f"indices of {prefix}* must be 1..N without gaps")
    out = []
    for i in range(1, len(found) + 1):
        if len(found[i]) != width:
            raise ConfigError(f"{prefix}{i} must have {width} value(s)")
        out.append(np.array(found[i]) if width > 1 else found[i][0])
    return out


def parse_config(text: str) -> ScenarioConfig:
    """Build a ScenarioConfig from config text, rejecting unknown keys."""
    entries = _parse_lines(text)

    known = set(_FIXED_KEYS)
    unknown = [
        k
        for k in entries
        if k not in known and not any(k.startswith(p) for p in _INDEXED_PREFIXES)
    ]
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
    missing = [k for k in _FIXED_KEYS if k not in entries]
    if missing:
        raise ConfigError(f"missing configuration keys: {', '.join(missing)}")

    def scalar(key):
        if len(entries[key]) != 1:
            raise ConfigError(f"{key} must be a single value")
        return entries[key][0]

    def vec(key, n):
        if len(entries[key]) != n:
            raise ConfigError(f"{key} must have {n} values")
        return np.array(entries[key])

    xi0 = vec("ppf.xi0", 4)
    xi_inf = vec("ppf.xi_inf", 4)
    ell = vec("ppf.ell", 4)
    d_bar = vec("ppf.delta_bar", 4)
    d_under = vec("ppf.delta_under", 4)
    try:
        channels = tuple(
            PpfChannelConfig(
                xi0=xi0[i],
                xi_inf=xi_inf[i],
                ell=ell[i],
                delta_bar=d_bar[i],
                delta_under=d_under[i],
            )
            for i in range(4)
        )
        gains = FilterGains(k_w=scalar("gains.k_w"), gamma=scalar("gains.gamma"))
        refs = ReferenceSet(
            inertial_vectors=tuple(_indexed(entries, "refs.vector.", 3)),
            landmarks=tuple(_indexed(entries, "refs.landmark.", 3)),
            vector_weights=tuple(_indexed(entries, "refs.vector_weight.", 1)),
            landmark_weights=tuple(_indexed(entries, "refs.landmark_weight.", 1)),
        )
        biases = MeasurementBiases(
            vectors=tuple(_indexed(entries, "bias.vector.", 3)),
            landmarks=tuple(_indexed(entries, "bias.landmark.", 3)),
        )
        noise = MeasurementNoise(
            vector_stds=tuple(_indexed(entries, "noise.vector.", 1)),
            landmark_stds=tuple(_indexed(entries, "noise.landmark.", 1)),
        )
        truth0 = _pose_from_flat(vec("init.truth", 16))
        estimate0 = _pose_from_flat(vec("init.estimate", 16))
        return ScenarioConfig(
            duration=scalar("run.duration"),
            dt=scalar("run.dt"),
            seed=int(scalar("run.seed")),
            gains=gains,
            channels=channels,
            refs=refs,
            measurement_biases=biases,
            measurement_noise=noise,
            velocity_bias=np.concatenate([vec("bias.omega", 3), vec("bias.velocity", 3)]),
            omega_noise_std=scalar("noise.omega"),
            velocity_noise_std=scalar("noise.velocity"),
            truth0=truth0,
            estimate0=estimate0,
            bias_estimate0=vec("init.bias_estimate", 6),
            strict=bool(int(scalar("run.strict"))),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _pose_from_flat(values: np.ndarray) -> Pose:
    m = values.reshape(4, 4)
    if np.abs(m[3] - np.array([0.0, 0.0, 0.0, 1.0])).max() > 1e-12:
        raise ConfigError("pose matrix bottom row must be [0, 0, 0, 1]")
    r = m[:3, :3]
    # quoted matrices may be orthogonal only to a few decimals
    if rotation_defect(r) > 1e-9:
        r = project_rotation(r)
    return Pose(r=r, p=m[:3, 3])


def load_config_file(path) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text)


def configs_equal(a: ScenarioConfig, b: ScenarioConfig) -> bool:
    """Field-by-field equality, comparing arrays exactly."""
    if (
        a.duration != b.duration
        or a.dt != b.dt
        or a.seed != b.seed
        or a.strict != b.strict
        or a.gains != b.gains
        or a.channels != b.channels
        or a.omega_noise_std != b.omega_noise_std
        or a.velocity_noise_std != b.velocity_noise_std
    ):
        return False
    arr_pairs = [
        (a.velocity_bias, b.velocity_bias),
        (a.bias_estimate0, b.bias_estimate0),
        (a.truth0.as_matrix(), b.truth0.as_matrix()),
        (a.estimate0.as_matrix(), b.estimate0.as_matrix()),
    ]
    arr_pairs += list(zip(a.refs.inertial_vectors, b.refs.inertial_vectors))
    arr_pairs += list(zip(a.refs.landmarks, b.refs.landmarks))
    arr_pairs += list(zip(a.measurement_biases.vectors, b.measurement_biases.vectors))
    arr_pairs += list(zip(a.measurement_biases.landmarks, b.measurement_biases.landmarks))
    if len(a.refs.inertial_vectors) != len(b.refs.inertial_vectors):
        return False
    if len(a.refs.landmarks) != len(b.refs.landmarks):
        return False
    if a.refs.vector_weights != b.refs.vector_weights:
        return False
    if a.refs.landmark_weights != b.refs.landmark_weights:
        return False
    if a.measurement_noise != b.measurement_noise:
        return False
    return all(np.array_equal(x, y) for x, y in arr_pairs)
