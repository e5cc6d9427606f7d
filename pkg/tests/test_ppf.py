import math

import numpy as np
import pytest

from ppfpose.errors import EnvelopeViolation
from ppfpose.ppf import (
    PpfChannelConfig,
    envelope_holds,
    mu,
    ppf_eval,
    smooth_z,
    transform_error,
)


@pytest.fixture
def channel1():
    # attitude channel of the built-in scenario
    return PpfChannelConfig(xi0=1.3, xi_inf=0.07, ell=4.0, delta_bar=1.3, delta_under=1.3)


def sym_channel(delta, xi0=2.0, xi_inf=0.1, ell=1.0):
    return PpfChannelConfig(xi0=xi0, xi_inf=xi_inf, ell=ell, delta_bar=delta, delta_under=delta)


class TestConfigInvariants:
    def test_rejects_bad_ordering(self):
        with pytest.raises(ValueError):
            PpfChannelConfig(xi0=0.1, xi_inf=0.2, ell=1.0, delta_bar=1.0, delta_under=1.0)
        with pytest.raises(ValueError):
            PpfChannelConfig(xi0=1.0, xi_inf=0.1, ell=-1.0, delta_bar=1.0, delta_under=1.0)
        with pytest.raises(ValueError):
            PpfChannelConfig(xi0=1.0, xi_inf=0.1, ell=1.0, delta_bar=0.5, delta_under=0.9)


class TestPpfEval:
    def test_initial_value(self, channel1):
        assert ppf_eval(channel1, 0.0).xi == pytest.approx(1.3, abs=1e-15)

    def test_limit(self, channel1):
        assert ppf_eval(channel1, 50.0).xi == pytest.approx(0.07, abs=1e-12)

    def test_frozen_midpoint(self, channel1):
        st = ppf_eval(channel1, 0.5)
        assert st.xi == pytest.approx(0.23646239838103364, abs=1e-15)
        assert st.xi_dot == pytest.approx(-0.6658495935241345, abs=1e-15)
        assert st.ratio == pytest.approx(st.xi_dot / st.xi, abs=1e-15)

    def test_monotone_decrease_and_limit(self, channel1):
        times = np.linspace(0.0, 20.0 / channel1.ell, 400)
        xis = [ppf_eval(channel1, t).xi for t in times]
        assert all(b < a for a, b in zip(xis, xis[1:]))
        # residual at t = 20/ell is (xi0 - xi_inf) e^-20 exactly
        assert abs(xis[-1] - channel1.xi_inf) <= (1.3 - 0.07) * math.exp(-20.0) + 1e-15
        small = sym_channel(1.0, xi0=0.4, xi_inf=0.05)
        assert abs(ppf_eval(small, 20.0 / small.ell).xi - small.xi_inf) <= 1e-9

    def test_rejects_negative_time(self, channel1):
        with pytest.raises(ValueError):
            ppf_eval(channel1, -0.1)


class TestTransform:
    def test_zero_error(self):
        cfg = sym_channel(1.0)
        st = ppf_eval(cfg, 0.3)
        assert transform_error(0.0, st, cfg) == 0.0

    def test_frozen_half(self):
        cfg = sym_channel(1.0, xi0=2.0)
        st = ppf_eval(cfg, 0.0)
        # e/xi = 0.5 with unit bands
        assert transform_error(0.5 * st.xi, st, cfg) == pytest.approx(
            0.5493061443340549, abs=1e-15
        )

    def test_monotone_growth_toward_pole(self):
        cfg = sym_channel(1.0)
        st = ppf_eval(cfg, 0.0)
        ratios = [0.9, 0.99, 0.999, 0.999999]
        values = [transform_error(r * st.xi, st, cfg) for r in ratios]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert values[-1] > 6.0

    def test_sign_matches_error(self):
        cfg = sym_channel(2.5)
        st = ppf_eval(cfg, 1.0)
        for e in (-1.2, -0.2, 0.2, 1.2):
            assert math.copysign(1.0, transform_error(e, st, cfg)) == math.copysign(1.0, e)

    def test_strict_mode_raises_outside_band(self):
        cfg = sym_channel(1.0)
        st = ppf_eval(cfg, 0.0)
        with pytest.raises(EnvelopeViolation):
            transform_error(1.5 * st.xi, st, cfg, strict=True)

    def test_clamp_mode_saturates(self):
        cfg = sym_channel(1.0)
        st = ppf_eval(cfg, 0.0)
        at_edge = transform_error(5.0 * st.xi, st, cfg)
        assert math.isfinite(at_edge)
        assert at_edge == transform_error(50.0 * st.xi, st, cfg)


class TestSmoothZ:
    def test_symmetric_zero(self):
        assert smooth_z(0.0, sym_channel(1.0)) == 0.0

    def test_asymptotes(self):
        cfg = PpfChannelConfig(xi0=1.0, xi_inf=0.1, ell=1.0, delta_bar=2.0, delta_under=1.5)
        assert smooth_z(40.0, cfg) == cfg.delta_bar
        assert smooth_z(-40.0, cfg) == -cfg.delta_under
        assert abs(smooth_z(29.0, cfg) - cfg.delta_bar) < 1e-13

    def test_strictly_increasing_and_bounded(self):
        cfg = PpfChannelConfig(xi0=1.0, xi_inf=0.1, ell=1.0, delta_bar=2.0, delta_under=0.5)
        xs = np.linspace(-31.0, 31.0, 801)
        ys = [smooth_z(x, cfg) for x in xs]
        assert all(b >= a for a, b in zip(ys, ys[1:]))
        assert all(-cfg.delta_under <= y <= cfg.delta_bar for y in ys)

    def test_round_trip(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            cfg = sym_channel(rng.uniform(0.5, 6.0))
            st = ppf_eval(cfg, rng.uniform(0.0, 2.0))
            e_trans = rng.uniform(-5.0, 5.0)
            back = transform_error(st.xi * smooth_z(e_trans, cfg), st, cfg)
            assert back == pytest.approx(e_trans, abs=1e-10)


class TestMu:
    def test_symmetric_zero_error(self):
        cfg = sym_channel(0.8, xi0=2.5)
        st = ppf_eval(cfg, 0.0)
        assert mu(0.0, st, cfg) == pytest.approx(1.0 / (st.xi * 0.8), abs=1e-14)

    def test_scenario_channel_value(self):
        cfg = PpfChannelConfig(xi0=1.3, xi_inf=0.07, ell=4.0, delta_bar=1.3, delta_under=1.3)
        st = ppf_eval(cfg, 0.0)
        assert mu(0.0, st, cfg) == pytest.approx(0.5917159763313609, abs=1e-14)

    def test_pole_growth(self):
        cfg = sym_channel(1.0)
        st = ppf_eval(cfg, 0.0)
        m1 = mu(0.9 * st.xi, st, cfg)
        m2 = mu(0.9999 * st.xi, st, cfg)
        assert m2 > 100.0 * m1

    def test_positive_everywhere(self):
        rng = np.random.default_rng(12)
        for _ in range(500):
            cfg = sym_channel(rng.uniform(0.5, 6.0))
            st = ppf_eval(cfg, rng.uniform(0.0, 2.0))
            e = rng.uniform(-0.999, 0.999) * cfg.delta_bar * st.xi
            assert mu(e, st, cfg) > 0.0

    def test_derivative_consistency(self):
        rng = np.random.default_rng(13)
        for _ in range(500):
            cfg = sym_channel(rng.uniform(0.5, 6.0))
            st = ppf_eval(cfg, rng.uniform(0.0, 2.0))
            e = rng.uniform(-0.9, 0.9) * cfg.delta_bar * st.xi
            h = 1e-6 * st.xi
            fd = (transform_error(e + h, st, cfg) - transform_error(e - h, st, cfg)) / (2 * h)
            assert fd == pytest.approx(mu(e, st, cfg), rel=1e-5)


class TestEnvelopeHolds:
    def test_zero_error(self):
        cfg = sym_channel(1.0)
        st = ppf_eval(cfg, 0.0)
        assert envelope_holds(0.0, st, cfg, sign0=1.0)
        assert envelope_holds(0.0, st, cfg, sign0=-1.0)

    def test_strict_upper_bound(self):
        cfg = sym_channel(1.0)
        st = ppf_eval(cfg, 0.0)
        assert not envelope_holds(st.xi, st, cfg)

    def test_inside_band(self):
        cfg = sym_channel(1.0)
        st = ppf_eval(cfg, 0.0)
        assert envelope_holds(-0.5 * st.xi, st, cfg, sign0=1.0)

    def test_asymmetric_bands(self):
        cfg = PpfChannelConfig(xi0=1.0, xi_inf=0.1, ell=1.0, delta_bar=2.0, delta_under=1.0)
        st = ppf_eval(cfg, 0.0)
        # delta = 0.5: negative-start band is (-xi, 0.5 xi)
        assert envelope_holds(0.4 * st.xi, st, cfg, sign0=-1.0)
        assert not envelope_holds(0.6 * st.xi, st, cfg, sign0=-1.0)
        assert envelope_holds(-0.6 * st.xi, st, cfg, sign0=-1.0)
        assert not envelope_holds(-0.6 * st.xi, st, cfg, sign0=1.0)


class TestProposition:
    def test_zero_iff_zero_on_grid(self):
        cfg = sym_channel(1.3)
        st = ppf_eval(cfg, 0.2)
        for e in np.linspace(-0.9, 0.9, 37) * cfg.delta_bar * st.xi:
            val = transform_error(float(e), st, cfg)
            if e == 0.0:
                assert val == 0.0
            else:
                assert val != 0.0
