"""Classical feedback controllers: on/off switching and discrete PID.

The relay controller switches on exactly when the error e = setpoint -
measurement is positive (off at e = 0); an optional symmetric deadband
holds the previous output inside the band to suppress chattering.

The PID accumulates its integral with the trapezoid rule, differentiates
the error by backward difference, clamps the output to actuator limits
and freezes the integral while the output is saturated.
"""

import math
from dataclasses import dataclass, replace

from aquactl.errors import ParamError
from aquactl.growth import ControlAction, Individual
from aquactl.engine import Controller


def _require(cond, key, message):
    if not cond:
        raise ParamError(key, message)


@dataclass(frozen=True)
class BangBangConfig:
    setpoint: float
    on_value: float
    off_value: float
    deadband: float = 0.0

    def __post_init__(self):
        _require(math.isfinite(self.setpoint), "setpoint", "must be finite")
        _require(self.deadband >= 0.0, "deadband", "must be non-negative")


def bang_bang(measurement, cfg, was_on=False):
    """Relay decision for one sample.

    Returns:
        (on, output) where on is the new relay state and output the
        applied value.  With a deadband the previous state is held while
        |e| <= deadband / 2.
    """
    e = cfg.setpoint - measurement
    half = 0.5 * cfg.deadband
    if e > half:
        on = True
    elif e < -half:
        on = False
    else:
        on = was_on if cfg.deadband > 0.0 else False
    return on, (cfg.on_value if on else cfg.off_value)


@dataclass(frozen=True)
class PidConfig:
    kp: float = 0.0
    ki: float = 0.0
    kd: float = 0.0
    u_min: float = -math.inf
    u_max: float = math.inf
    integral_limit: float = math.inf
    derivative_filter: bool = False

    def __post_init__(self):
        _require(self.u_min < self.u_max, "u_min", "must be below u_max")
        _require(self.integral_limit > 0.0, "integral_limit",
                 "must be positive")


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0
    prev_derivative: float = 0.0


def pid_step(error, dt, state, cfg):
    """One discrete PID update.

    Returns:
        (u, new_state).  The integral is held at its previous value when
        the unsaturated output leaves [u_min, u_max] (conditional
        integration), and is clamped to +-integral_limit.
    """
    _require(dt > 0.0, "dt", "must be positive")
    d_raw = (error - state.prev_error) / dt
    if cfg.derivative_filter:
        d = 0.5 * state.prev_derivative + 0.5 * d_raw
    else:
        d = d_raw
    cand = state.integral + 0.5 * dt * (error + state.prev_error)
    if cand > cfg.integral_limit:
        cand = cfg.integral_limit
    elif cand < -cfg.integral_limit:
        cand = -cfg.integral_limit
    u = cfg.kp * error + cfg.ki * cand + cfg.kd * d
    if u > cfg.u_max:
        u = cfg.u_max
        integral = state.integral
    elif u < cfg.u_min:
        u = cfg.u_min
        integral = state.integral
    else:
        integral = cand
    return u, PidState(integral=integral, prev_error=error,
                       prev_derivative=d)


def _measure(name, ctx, k, state, prev_action):
    """Measured value for a feedback loop."""
    if name == "w":
        return state.w if isinstance(state, Individual) else state.xi
    if name == "T":
        return prev_action.T if prev_action is not None else float(ctx.env.T[k])
    if name == "DO":
        return prev_action.DO if prev_action is not None else float(ctx.env.DO[k])
    if name == "UIA":
        return float(ctx.env.UIA[k])
    raise ParamError("measure", f"unknown measurement source {name!r}")


def _emit(channel, value, base, ctx, k):
    """Full action with one channel driven by the loop, others from base."""
    f, T, DO = base
    if T is None:
        T = float(ctx.env.T[k])
    if DO is None:
        DO = float(ctx.env.DO[k])
    if channel == "f":
        f = min(max(value, 0.0), 1.0)
    elif channel == "T":
        T = value
    elif channel == "DO":
        DO = max(value, 0.0)
    else:
        raise ParamError("channel", f"unknown actuator channel {channel!r}")
    return ControlAction(f=f, T=T, DO=DO)


class ConstantFeedController(Controller):
    """Fixed feeding rate; temperature and oxygen follow the environment
    unless overridden."""

    name = "constant"

    def __init__(self, f, T=None, DO=None):
        _require(0.0 <= f <= 1.0, "f", "must lie in [0, 1]")
        self.f = f
        self.T = T
        self.DO = DO

    def act(self, ctx, k, state):
        T = self.T if self.T is not None else float(ctx.env.T[k])
        DO = self.DO if self.DO is not None else float(ctx.env.DO[k])
        return ControlAction(f=self.f, T=T, DO=DO), None


class BangBangController(Controller):
    """Single-loop relay controller bound to one actuator channel."""

    name = "bangbang"

    def __init__(self, cfg, channel="T", measure="T", base=(0.5, None, None)):
        self.cfg = cfg
        self.channel = channel
        self.measure = measure
        self.base = base
        self._on = False
        self._prev_action = None

    def start(self, ctx):
        self._on = False
        self._prev_action = None

    def act(self, ctx, k, state):
        y = _measure(self.measure, ctx, k, state, self._prev_action)
        self._on, value = bang_bang(y, self.cfg, self._on)
        action = _emit(self.channel, value, self.base, ctx, k)
        self._prev_action = action
        return action, None


class PidController(Controller):
    """Single-loop PID; reference is a target trajectory or a setpoint."""

    name = "pid"

    def __init__(self, cfg, channel="f", measure="w", setpoint=None,
                 track_reference=True, base=(0.5, None, None)):
        _require(track_reference or setpoint is not None, "setpoint",
                 "needed when not tracking the reference trajectory")
        self.cfg = cfg
        self.channel = channel
        self.measure = measure
        self.setpoint = setpoint
        self.track_reference = track_reference
        self.base = base
        self._state = PidState()
        self._prev_action = None

    def start(self, ctx):
        self._state = PidState()
        self._prev_action = None
        if self.track_reference:
            _require(ctx.ref is not None, "reference",
                     "run provides no reference trajectory to track")
            self._ref_w = ctx.ref.weights()

    def act(self, ctx, k, state):
        y = _measure(self.measure, ctx, k, state, self._prev_action)
        target = self._ref_w[k] if self.track_reference else self.setpoint
        u, self._state = pid_step(target - y, ctx.cfg.dt, self._state,
                                  self.cfg)
        action = _emit(self.channel, u, self.base, ctx, k)
        self._prev_action = action
        return action, None
