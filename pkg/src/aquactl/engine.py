"""Deterministic simulation engine.

Environments are profiles (constant, sinusoidal or table-driven per
channel, with optional seeded Gaussian perturbation) realized once per run
on the step grid.  Controlled channels (f, T, DO) come from the controller
action each step; UIA and rho always come from the profile.  Fish counts
drop by whole deaths once per simulated day regardless of dt.

All randomness flows from a single 64-bit scenario seed through named
streams, so adding a consumer never disturbs the others.
"""

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from aquactl import kernels
from aquactl.errors import ParamError, SimulationError
from aquactl.growth import (
    DEFAULT_PARAMS,
    NO_STOCKING,
    ControlAction,
    EnvState,
    Individual,
    Population,
    _population_dxi,
    daily_deaths,
)

_STEP_TOL = 1e-9


def _require(cond, key, message):
    if not cond:
        raise ParamError(key, message)


class SeedStreams:
    """Named independent RNG streams derived from one 64-bit seed."""

    def __init__(self, seed):
        _require(isinstance(seed, int) and 0 <= seed < 2 ** 64, "seed",
                 "must be an integer in [0, 2^64)")
        self.seed = seed
        self._gens = {}

    def get(self, name):
        if name not in self._gens:
            key = int.from_bytes(hashlib.sha256(name.encode()).digest()[:8],
                                 "little")
            seq = np.random.SeedSequence([self.seed, key])
            self._gens[name] = np.random.default_rng(seq)
        return self._gens[name]


@dataclass(frozen=True)
class ChannelSpec:
    """One environment channel over time.

    kind "constant" holds ``value``; "sinusoid" is value + amplitude *
    sin(2 pi (t - phase) / period); "table" holds the latest sample at or
    before t (zero-order hold, first sample before the series starts).
    Gaussian noise with ``noise_std`` is added per step when positive.
    """

    kind: str = "constant"
    value: float = 0.0
    amplitude: float = 0.0
    period: float = 365.0
    phase: float = 0.0
    times: tuple = ()
    values: tuple = ()
    noise_std: float = 0.0

    def __post_init__(self):
        _require(self.kind in ("constant", "sinusoid", "table"), "kind",
                 f"unknown channel kind {self.kind!r}")
        _require(self.noise_std >= 0.0, "noise_std", "must be non-negative")
        if self.kind == "sinusoid":
            _require(self.period > 0.0, "period", "must be positive")
        if self.kind == "table":
            _require(len(self.times) >= 1, "times", "need at least one sample")
            _require(len(self.times) == len(self.values), "values",
                     "must match times in length")
            _require(all(b > a for a, b in zip(self.times, self.times[1:])),
                     "times", "must be strictly increasing")

    def base(self, t):
        if self.kind == "constant":
            return self.value
        if self.kind == "sinusoid":
            return self.value + self.amplitude * math.sin(
                2.0 * math.pi * (t - self.phase) / self.period)
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        if idx < 0:
            idx = 0
        return self.values[idx]


@dataclass(frozen=True)
class EnvProfile:
    """Uncontrolled environment: one ChannelSpec per channel."""

    T: ChannelSpec = ChannelSpec(value=28.0)
    DO: ChannelSpec = ChannelSpec(value=6.0)
    UIA: ChannelSpec = ChannelSpec(value=0.01)
    rho: ChannelSpec = ChannelSpec(value=1.0)

    @staticmethod
    def constant(T=28.0, DO=6.0, UIA=0.01, rho=1.0):
        return EnvProfile(T=ChannelSpec(value=T), DO=ChannelSpec(value=DO),
                          UIA=ChannelSpec(value=UIA),
                          rho=ChannelSpec(value=rho))

    def realize(self, t_grid, rng):
        """Sample every channel on the grid; noise drawn in fixed order."""
        n = len(t_grid)
        out = {}
        for name in ("T", "DO", "UIA", "rho"):
            spec = getattr(self, name)
            vals = np.array([spec.base(t) for t in t_grid], dtype=np.float64)
            if spec.noise_std > 0.0:
                vals = vals + rng.normal(0.0, spec.noise_std, n)
            out[name] = vals
        out["DO"] = np.maximum(out["DO"], 0.0)
        out["UIA"] = np.maximum(out["UIA"], 0.0)
        out["rho"] = np.clip(out["rho"], 1e-9, 2.0 - 1e-9)
        return EnvTable(t=np.asarray(t_grid, dtype=np.float64), **out)


@dataclass(frozen=True)
class EnvTable:
    """Realized environment on the run grid."""

    t: np.ndarray
    T: np.ndarray
    DO: np.ndarray
    UIA: np.ndarray
    rho: np.ndarray

    def window(self, k, n):
        """Length-n forecast starting at step k, holding the last value."""
        idx = np.minimum(np.arange(k, k + n), len(self.t) - 1)
        return (self.T[idx], self.DO[idx], self.UIA[idx], self.rho[idx])


@dataclass(frozen=True)
class SimConfig:
    """One run: initial state, environment, grid and integrator."""

    state0: object
    env: EnvProfile
    params: object = DEFAULT_PARAMS
    t0: float = 0.0
    tf: float = 60.0
    dt: float = 1.0
    integrator: str = "rk4"
    seed: int = 0
    stocking: object = NO_STOCKING
    mortality: bool = True

    def __post_init__(self):
        _require(isinstance(self.state0, (Individual, Population)), "state0",
                 "must be an Individual or Population")
        _require(self.dt > 0.0, "dt", "must be positive")
        _require(self.tf >= self.t0, "tf", "must not precede t0")
        span = (self.tf - self.t0) / self.dt
        _require(abs(span - round(span)) < _STEP_TOL, "dt",
                 "span tf - t0 must be a whole number of steps")
        _require(self.integrator in ("euler", "rk4"), "integrator",
                 "must be 'euler' or 'rk4'")
        _require(isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64,
                 "seed", "must be an integer in [0, 2^64)")
        if isinstance(self.state0, Population):
            per_day = 1.0 / self.dt
            _require(self.dt <= 1.0 + _STEP_TOL
                     and abs(per_day - round(per_day)) < _STEP_TOL, "dt",
                     "population runs need a whole number of steps per day")

    @property
    def n_steps(self):
        return int(round((self.tf - self.t0) / self.dt))

    def t_grid(self):
        return self.t0 + self.dt * np.arange(self.n_steps + 1)


@dataclass(frozen=True)
class Record:
    """One trajectory row: state at t plus what was applied during [t, t+dt)."""

    t: float
    state: object
    action: ControlAction | None = None
    uia: float | None = None
    tau: float | None = None
    sigma: float | None = None
    v: float | None = None
    k1: float | None = None
    reward: float | None = None
    j_mpc: float | None = None
    chosen_by: str | None = None


@dataclass
class Trajectory:
    """Ordered records; the last one is terminal (state only)."""

    records: list

    def __len__(self):
        return len(self.records)

    def times(self):
        return np.array([r.t for r in self.records])

    def weights(self):
        """Main scalar per record: w for individuals, xi for populations."""
        first = self.records[0].state
        if isinstance(first, Individual):
            return np.array([r.state.w for r in self.records])
        return np.array([r.state.xi for r in self.records])

    def feeds(self):
        return np.array([r.action.f for r in self.records
                         if r.action is not None])

    def rewards(self):
        return [r.reward for r in self.records if r.reward is not None]

    @property
    def terminal_state(self):
        return self.records[-1].state


@dataclass
class RunContext:
    """Everything a controller may consult during one run."""

    cfg: SimConfig
    env: EnvTable
    t_grid: np.ndarray
    streams: SeedStreams
    ref: Trajectory | None = None
    extra: dict = field(default_factory=dict)

    @property
    def params(self):
        return self.cfg.params

    @property
    def n_steps(self):
        return self.cfg.n_steps


class Controller:
    """Base controller: act() returns (ControlAction, extras dict or None)."""

    name = "controller"

    def start(self, ctx):
        """Called once before the first step."""

    def act(self, ctx, k, state):
        raise NotImplementedError

    def observe(self, ctx, k, next_state):
        """Called after each step; may return extras merged into the record."""
        return None


class ConstantController(Controller):
    """Applies one fixed action every step."""

    name = "constant"

    def __init__(self, action):
        self.action = action

    def act(self, ctx, k, state):
        return self.action, None


def _step_individual(w, env, dt, rk4, pv):
    return kernels.step_w(w, env.f, env.T, env.DO, env.UIA, env.rho,
                          dt, rk4, pv)


def _step_biomass(xi, p, env, stocking, params, k1, dt, rk4):
    # stage combination mirrors kernels.step_w so the degenerate
    # single-fish tank reproduces the individual model bit for bit
    if rk4:
        s1 = _population_dxi(xi, p, env, stocking, params, k1)
        s2 = _population_dxi(xi + 0.5 * dt * s1, p, env, stocking, params, k1)
        s3 = _population_dxi(xi + 0.5 * dt * s2, p, env, stocking, params, k1)
        s4 = _population_dxi(xi + dt * s3, p, env, stocking, params, k1)
        return xi + dt * (s1 + 2.0 * s2 + 2.0 * s3 + s4) / 6.0
    return xi + dt * _population_dxi(xi, p, env, stocking, params, k1)


def simulate(cfg, controller, ref=None):
    """Run the closed loop and return the trajectory.

    Raises SimulationError (with the failing step index) if the state
    leaves its physical range or stops being finite.
    """
    params = cfg.params
    pv = params.packed()
    streams = SeedStreams(cfg.seed)
    t_grid = cfg.t_grid()
    env = cfg.env.realize(t_grid, streams.get("environment"))
    ctx = RunContext(cfg=cfg, env=env, t_grid=t_grid, streams=streams, ref=ref)
    controller.start(ctx)

    rk4 = cfg.integrator == "rk4"
    n = cfg.n_steps
    steps_per_day = int(round(1.0 / cfg.dt)) if cfg.dt <= 1.0 else 1
    state = cfg.state0
    records = []
    pending_deaths = 0

    for k in range(n):
        t = float(t_grid[k])
        action, extras = controller.act(ctx, k, state)
        extras = dict(extras) if extras else {}
        applied = EnvState(f=action.f, T=action.T, DO=action.DO,
                           UIA=float(env.UIA[k]), rho=float(env.rho[k]))
        if cfg.mortality:
            k1 = kernels.k1_mortality(applied.UIA, pv)
        else:
            k1 = 0.0

        if isinstance(state, Individual):
            w2 = _step_individual(state.w, applied, cfg.dt, rk4, pv)
            if not (math.isfinite(w2) and w2 > 0.0):
                raise SimulationError(k, f"weight left (0, inf): {w2}")
            new_state = Individual(w2)
        else:
            if k % steps_per_day == 0:
                pending_deaths = daily_deaths(state.p, k1)
            xi2 = _step_biomass(state.xi, state.p, applied, cfg.stocking,
                                params, k1, cfg.dt, rk4)
            p2 = state.p
            if (k + 1) % steps_per_day == 0:
                p2 = state.p + cfg.stocking.p_s - pending_deaths
            if not math.isfinite(xi2):
                raise SimulationError(k, f"biomass not finite: {xi2}")
            if p2 > 0 and xi2 <= 0.0:
                raise SimulationError(k, f"biomass exhausted: {xi2}")
            if p2 <= 0:
                p2, xi2 = 0, 0.0
            new_state = Population(xi=xi2, p=p2)

        post = controller.observe(ctx, k, new_state)
        if post:
            extras.update(post)
        records.append(Record(
            t=t, state=state, action=action,
            uia=applied.UIA,
            tau=kernels.tau(applied.T, pv),
            sigma=kernels.sigma_do(applied.DO, pv),
            v=kernels.v_uia(applied.UIA, pv),
            k1=k1,
            reward=extras.get("reward"),
            j_mpc=extras.get("j_mpc"),
            chosen_by=extras.get("chosen_by"),
        ))
        state = new_state

    records.append(Record(t=float(t_grid[n]), state=state))
    return Trajectory(records)


def reference_trajectory(cfg, f_ref):
    """Nominal growth target: optimal constant environment at feed f_ref."""
    _require(0.0 <= f_ref <= 1.0, "f_ref", "must lie in [0, 1]")
    params = cfg.params
    nominal = EnvProfile.constant(T=params.T_opt, DO=params.do_hi,
                                  UIA=0.0, rho=1.0)
    ref_cfg = replace(cfg, env=nominal)
    action = ControlAction(f=f_ref, T=params.T_opt, DO=params.do_hi)
    return simulate(ref_cfg, ConstantController(action))
