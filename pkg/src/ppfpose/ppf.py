"""Prescribed-performance envelopes and the constrained/unconstrained error transform.

Each error channel carries an exponentially decaying envelope xi(t) and a pair
of band fractions (delta_bar above, delta_under below).  While the normalized
error e/xi stays strictly inside (-delta_under, delta_bar), the log-ratio
transform maps it to an unconstrained value whose boundedness is equivalent to
the envelope being respected.

Measured errors can brush the band boundary under sensor noise, where the
transform and its gain mu diverge.  By default the normalized error is clamped
just inside the band (margin 1e-6 * delta_bar) before the transform; strict
mode disables the clamp and raises EnvelopeViolation instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EnvelopeViolation

CLAMP_FRACTION = 1e-6  # clamp margin as a fraction of delta_bar
_Z_SATURATION = 30.0  # |transformed error| beyond which Z sits on its asymptote


@dataclass(frozen=True)
class PpfChannelConfig:
    """Envelope parameters of one error channel.

    xi0 is the initial bound, xi_inf the residual bound, ell the decay rate,
    and delta_bar/delta_under the upper/lower band fractions.
    """

    xi0: float
    xi_inf: float
    ell: float
    delta_bar: float
    delta_under: float

    def __post_init__(self):
        if not (self.xi0 > self.xi_inf > 0.0):
            raise ValueError("need xi0 > xi_inf > 0")
        if self.ell <= 0.0:
            raise ValueError("decay rate ell must be positive")
        if self.delta_bar <= 0.0 or self.delta_under <= 0.0:
            raise ValueError("band fractions must be positive")
        if self.delta_under > self.delta_bar:
            raise ValueError("need delta_under <= delta_bar")


@dataclass(frozen=True)
class PpfState:
    """Envelope value xi, its derivative, and their ratio at one instant."""

    xi: float
    xi_dot: float
    ratio: float


@dataclass(frozen=True)
class TransformedError:
    """Transformed error of all four channels plus the transform gains.

    e_r is the attitude channel, e_p the three position channels; mu1 and
    m_diag are the corresponding transform derivatives d(transformed)/d(error).
    """

    e_r: float
    e_p: np.ndarray
    mu1: float
    m_diag: np.ndarray


def ppf_eval(cfg: PpfChannelConfig, t: float) -> PpfState:
    """Evaluate the envelope (xi0 - xi_inf) e^(-ell t) + xi_inf at time t >= 0."""
    if t < 0.0:
        raise ValueError("time must be non-negative")
    decay = math.exp(-cfg.ell * t)
    xi = (cfg.xi0 - cfg.xi_inf) * decay + cfg.xi_inf
    xi_dot = -cfg.ell * (cfg.xi0 - cfg.xi_inf) * decay
    return PpfState(xi=xi, xi_dot=xi_dot, ratio=xi_dot / xi)


def _admissible_ratio(e_i: float, st: PpfState, cfg: PpfChannelConfig, strict: bool) -> float:
    """Normalized error e/xi, clamped into the open transform band.

    Strict mode raises EnvelopeViolation instead of clamping.
    """
    ratio = e_i / st.xi
    margin = CLAMP_FRACTION * cfg.delta_bar
    lo = -cfg.delta_under + margin
    hi = cfg.delta_bar - margin
    if ratio < lo or ratio > hi:
        if strict:
            raise EnvelopeViolation(
                f"normalized error {ratio:.6g} outside ({-cfg.delta_under:.6g}, "
                f"{cfg.delta_bar:.6g}) beyond clamp margin"
            )
        ratio = min(max(ratio, lo), hi)
    return ratio


def within_transform_domain(e_i: float, st: PpfState, cfg: PpfChannelConfig) -> bool:
    """True when e/xi needs no clamping before the transform."""
    ratio = e_i / st.xi
    margin = CLAMP_FRACTION * cfg.delta_bar
    return -cfg.delta_under + margin <= ratio <= cfg.delta_bar - margin


def transform_error(
    e_i: float, st: PpfState, cfg: PpfChannelConfig, *, strict: bool = False
) -> float:
    """Log-ratio transform of one error channel.

    Returns 0.5 * ln[(delta_under + e/xi) / (delta_bar - e/xi)], which is zero
    at e = 0 for symmetric bands and diverges as e/xi approaches either band
    edge.
    """
    ratio = _admissible_ratio(e_i, st, cfg, strict)
    return 0.5 * math.log((cfg.delta_under + ratio) / (cfg.delta_bar - ratio))


def smooth_z(e_trans: float, cfg: PpfChannelConfig) -> float:
    """Inverse transform core: strictly increasing, bounded in (-delta_under, delta_bar)."""
    if e_trans > _Z_SATURATION:
        return cfg.delta_bar
    if e_trans < -_Z_SATURATION:
        return -cfg.delta_under
    a = math.exp(e_trans)
    b = math.exp(-e_trans)
    return (cfg.delta_bar * a - cfg.delta_under * b) / (a + b)


def mu(e_i: float, st: PpfState, cfg: PpfChannelConfig, *, strict: bool = False) -> float:
    """Transform derivative d(transformed error)/d(error); strictly positive."""
    ratio = _admissible_ratio(e_i, st, cfg, strict)
    return (1.0 / (2.0 * st.xi)) * (
        1.0 / (cfg.delta_under + ratio) + 1.0 / (cfg.delta_bar - ratio)
    )


def envelope_holds(
    e_i: float, st: PpfState, cfg: PpfChannelConfig, sign0: float = 1.0
) -> bool:
    """Envelope condition on the raw error.

    With delta = delta_under / delta_bar: requires -delta*xi < e < xi when the
    initial error was non-negative, and -xi < e < delta*xi otherwise.
    """
    delta = cfg.delta_under / cfg.delta_bar
    if sign0 >= 0.0:
        return -delta * st.xi < e_i < st.xi
    return -st.xi < e_i < delta * st.xi
