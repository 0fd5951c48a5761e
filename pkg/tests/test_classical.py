"""Relay and PID building blocks plus their closed-loop wrappers."""

import math

import numpy as np
import pytest

from aquactl.classical import (
    BangBangConfig,
    BangBangController,
    ConstantFeedController,
    PidConfig,
    PidController,
    PidState,
    bang_bang,
    pid_step,
)
from aquactl.engine import (
    ChannelSpec,
    EnvProfile,
    SimConfig,
    reference_trajectory,
    simulate,
)
from aquactl.errors import ParamError
from aquactl.growth import Individual


def test_bang_bang_switches_on_sign():
    cfg = BangBangConfig(setpoint=30.0, on_value=1.0, off_value=0.0)
    assert bang_bang(25.0, cfg) == (True, 1.0)
    assert bang_bang(35.0, cfg) == (False, 0.0)
    # without a deadband the relay is off at zero error
    assert bang_bang(30.0, cfg) == (False, 0.0)
    assert bang_bang(30.0, cfg, was_on=True) == (False, 0.0)


def test_bang_bang_deadband_holds_state():
    cfg = BangBangConfig(setpoint=30.0, on_value=1.0, off_value=0.0,
                         deadband=2.0)
    assert bang_bang(28.5, cfg, was_on=False)[0] is True   # e = 1.5 > 1
    assert bang_bang(29.5, cfg, was_on=True)[0] is True    # inside band
    assert bang_bang(29.5, cfg, was_on=False)[0] is False  # inside band
    assert bang_bang(31.5, cfg, was_on=True)[0] is False   # e = -1.5 < -1


def test_pid_integral_trapezoid():
    cfg = PidConfig(ki=1.0)
    s = PidState()
    u1, s = pid_step(0.1, 1.0, s, cfg)
    assert u1 == pytest.approx(0.05, abs=1e-15)  # 0.5 * (0.1 + 0)
    u2, s = pid_step(0.1, 1.0, s, cfg)
    assert u2 == pytest.approx(0.15, abs=1e-15)  # 0.05 + 0.5 * (0.1 + 0.1)


def test_pid_derivative_on_jump():
    cfg = PidConfig(kd=1.0)
    s = PidState()
    u, s = pid_step(0.1, 0.5, s, cfg)
    assert u == pytest.approx(0.2, abs=1e-15)  # (0.1 - 0) / 0.5
    # a filtered derivative averages with the previous one
    cfg_f = PidConfig(kd=1.0, derivative_filter=True)
    s = PidState()
    u, s = pid_step(0.1, 0.5, s, cfg_f)
    assert u == pytest.approx(0.1, abs=1e-15)  # 0.5 * 0 + 0.5 * 0.2
    u, s = pid_step(0.1, 0.5, s, cfg_f)
    assert u == pytest.approx(0.05, abs=1e-15)


def test_pid_proportional_only():
    cfg = PidConfig(kp=2.0)
    u, _ = pid_step(0.3, 1.0, PidState(), cfg)
    assert u == pytest.approx(0.6, abs=1e-15)


def test_pid_saturation_freezes_integral():
    cfg = PidConfig(ki=1.0, u_max=0.08, u_min=-0.08)
    s = PidState()
    u1, s = pid_step(0.1, 1.0, s, cfg)
    assert u1 == pytest.approx(0.05, abs=1e-15)
    u2, s = pid_step(0.1, 1.0, s, cfg)
    assert u2 == 0.08                       # clipped
    assert s.integral == pytest.approx(0.05, abs=1e-15)  # not wound up
    u3, s = pid_step(0.1, 1.0, s, cfg)
    assert u3 == 0.08
    assert s.integral == pytest.approx(0.05, abs=1e-15)


def test_pid_integral_limit_clamps():
    cfg = PidConfig(ki=1.0, integral_limit=0.07)
    s = PidState()
    _, s = pid_step(0.1, 1.0, s, cfg)
    u, s = pid_step(0.1, 1.0, s, cfg)
    assert s.integral == 0.07
    assert u == pytest.approx(0.07, abs=1e-15)


def test_pid_config_validation():
    with pytest.raises(ParamError):
        PidConfig(u_min=1.0, u_max=0.0)
    with pytest.raises(ParamError):
        PidConfig(integral_limit=0.0)
    with pytest.raises(ParamError):
        pid_step(0.1, 0.0, PidState(), PidConfig())


CALM = EnvProfile.constant(T=28.0, DO=6.0, UIA=0.01)


def test_constant_controller_env_follow_and_override():
    cfg = SimConfig(state0=Individual(100.0), env=CALM, tf=5.0)
    traj = simulate(cfg, ConstantFeedController(f=0.4))
    acts = [r.action for r in traj.records if r.action]
    assert all(a.f == 0.4 and a.T == 28.0 and a.DO == 6.0 for a in acts)
    traj = simulate(cfg, ConstantFeedController(f=0.4, T=33.0, DO=7.0))
    acts = [r.action for r in traj.records if r.action]
    assert all(a.T == 33.0 and a.DO == 7.0 for a in acts)


def test_bangbang_controller_regulates_temperature():
    swing = EnvProfile(T=ChannelSpec(kind="sinusoid", value=30.0,
                                     amplitude=6.0, period=10.0),
                       DO=ChannelSpec(value=6.0),
                       UIA=ChannelSpec(value=0.01),
                       rho=ChannelSpec(value=1.0))
    cfg = SimConfig(state0=Individual(100.0), env=swing, tf=20.0)
    relay = BangBangConfig(setpoint=31.0, on_value=34.0, off_value=26.0,
                           deadband=1.0)
    ctl = BangBangController(relay, channel="T", measure="T",
                             base=(0.5, None, None))
    traj = simulate(cfg, ctl)
    temps = {r.action.T for r in traj.records if r.action}
    assert temps <= {34.0, 26.0}
    assert len(temps) == 2  # the relay actually toggled


def test_pid_controller_tracks_reference_weight():
    cfg = SimConfig(state0=Individual(100.0), env=CALM, tf=40.0)
    ref = reference_trajectory(cfg, f_ref=0.7)
    ctl = PidController(PidConfig(kp=0.01, ki=0.002, u_min=0.0, u_max=1.0),
                        channel="f", measure="w", base=(0.5, None, None))
    traj = simulate(cfg, ctl, ref=ref)
    base = simulate(cfg, ConstantFeedController(f=0.5))
    err_pid = np.sqrt(np.mean((traj.weights() - ref.weights()) ** 2))
    err_base = np.sqrt(np.mean((base.weights() - ref.weights()) ** 2))
    assert err_pid < err_base
    feeds = traj.feeds()
    assert np.all((feeds >= 0.0) & (feeds <= 1.0))


def test_pid_controller_fixed_setpoint():
    cfg = SimConfig(state0=Individual(100.0), env=CALM, tf=30.0)
    ctl = PidController(PidConfig(kp=0.05, u_min=0.0, u_max=1.0),
                        channel="f", measure="w", setpoint=150.0,
                        track_reference=False, base=(0.5, None, None))
    traj = simulate(cfg, ctl)
    # once past the setpoint the proportional term pins the feed at zero
    above = [r for r in traj.records
             if r.action is not None and r.state.w > 170.0]
    assert all(r.action.f == 0.0 for r in above)


def test_pid_controller_requires_reference_when_tracking():
    cfg = SimConfig(state0=Individual(100.0), env=CALM, tf=5.0)
    ctl = PidController(PidConfig(kp=0.01), channel="f", measure="w",
                        base=(0.5, None, None))
    with pytest.raises(ParamError):
        simulate(cfg, ctl)


def test_controller_rejects_unknown_channel():
    cfg = SimConfig(state0=Individual(100.0), env=CALM, tf=2.0)
    relay = BangBangConfig(setpoint=1.0, on_value=1.0, off_value=0.0)
    ctl = BangBangController(relay, channel="flow", measure="T")
    with pytest.raises(ParamError):
        simulate(cfg, ctl)
