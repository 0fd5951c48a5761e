"""Receding-horizon predictive feed control.

Each step solves a finite-horizon input-selection problem on the growth
model with a certainty-equivalent environment forecast: candidate input
sequences are scored by the left-endpoint Riemann sum of a stage cost
(quadratic tracking of a reference weight, or negative profit), plus a
large additive penalty of ``penalty`` per step whose predicted weight
leaves the state box.  A sequence is feasible only if penalty-free.

The search is seeded cross-entropy sampling: truncated-Gaussian proposals
over the first M steps (inputs are held at the step-M value beyond the
control horizon), elites refit the proposal, and the previous solution,
shifted by one step, both warm-starts the mean and is injected as a
candidate.  With a feed lattice configured the feed channel is sampled
categorically; ``exhaustive`` switches to full enumeration of the lattice,
which small problems use as their own optimality certificate.  Ties break
toward the earliest candidate in enumeration order.

The first input of the solution is applied; on an infeasible solve the
controller holds the previous action and flags the record.
"""

import math
from dataclasses import dataclass

import numpy as np

from aquactl import kernels
from aquactl.errors import InfeasibleHorizon, ParamError
from aquactl.growth import ControlAction, Individual
from aquactl.engine import Controller

_COST_KINDS = ("tracking", "economic")


def _require(cond, key, message):
    if not cond:
        raise ParamError(key, message)


@dataclass(frozen=True)
class MpcConfig:
    horizon: int = 10
    control_horizon: int | None = None
    u_min: tuple = (0.0, 0.0, 0.0)
    u_max: tuple = (1.0, 45.0, 20.0)
    control_T: bool = False
    control_DO: bool = False
    w_min: float = 1e-6
    w_max: float = 1e12
    cost: str = "tracking"
    q_w: float = 1.0
    r_f: float = 0.0
    rate_weight: float = 0.0
    price: float = 1.0
    feed_cost: float = 0.1
    samples: int = 64
    elites: int = 8
    iterations: int = 4
    init_std_frac: float = 0.25
    std_floor_frac: float = 0.01
    lattice_f: tuple = ()
    exhaustive: bool = False
    penalty: float = 1e9

    def __post_init__(self):
        _require(isinstance(self.horizon, int) and self.horizon >= 1,
                 "horizon", "must be a positive integer")
        m = self.control_horizon
        if m is not None:
            _require(isinstance(m, int) and 1 <= m <= self.horizon,
                     "control_horizon", "must satisfy 1 <= M <= horizon")
        _require(len(self.u_min) == 3 and len(self.u_max) == 3, "u_min",
                 "bounds are (f, T, DO) triples")
        for lo, hi, name in zip(self.u_min, self.u_max, ("f", "T", "DO")):
            _require(lo <= hi, f"u_min.{name}", "must not exceed u_max")
        _require(0.0 <= self.u_min[0] and self.u_max[0] <= 1.0, "u_min.f",
                 "feed bounds must lie inside [0, 1]")
        _require(0.0 < self.w_min < self.w_max, "w_min",
                 "must satisfy 0 < w_min < w_max")
        _require(self.cost in _COST_KINDS, "cost",
                 f"must be one of {_COST_KINDS}")
        _require(self.q_w >= 0.0, "q_w", "must be non-negative")
        _require(self.r_f >= 0.0, "r_f", "must be non-negative")
        _require(self.rate_weight >= 0.0, "rate_weight",
                 "must be non-negative")
        _require(self.samples >= 2, "samples", "need at least 2")
        _require(1 <= self.elites <= self.samples, "elites",
                 "must lie in [1, samples]")
        _require(self.iterations >= 1, "iterations", "must be positive")
        _require(self.init_std_frac > 0.0, "init_std_frac",
                 "must be positive")
        _require(self.std_floor_frac >= 0.0, "std_floor_frac",
                 "must be non-negative")
        _require(self.penalty > 0.0, "penalty", "must be positive")
        if self.lattice_f:
            _require(all(0.0 <= x <= 1.0 for x in self.lattice_f),
                     "lattice_f", "levels must lie in [0, 1]")
            _require(list(self.lattice_f) == sorted(self.lattice_f),
                     "lattice_f", "levels must be ascending")
        if self.exhaustive:
            _require(bool(self.lattice_f), "exhaustive",
                     "requires a feed lattice")
            _require(not self.control_T and not self.control_DO,
                     "exhaustive", "enumerates the feed channel only")
            count = len(self.lattice_f) ** self.M
            _require(count <= 200000, "exhaustive",
                     f"lattice^M = {count} is too large to enumerate")

    @property
    def N(self):
        return self.horizon

    @property
    def M(self):
        return self.horizon if self.control_horizon is None \
            else self.control_horizon


@dataclass
class MpcSolution:
    """Optimized input sequence with its predicted path and exact cost."""

    actions: list
    w_path: np.ndarray
    J: float
    feasible: bool = True


def stage_cost(w, w_ref, action, prev_action, cfg, params, uia=0.0, rho=1.0):
    """Stage cost at one step (before the dt factor), kernel-identical."""
    if prev_action is None:
        prev_action = action
    kind = 0 if cfg.cost == "tracking" else 1
    return kernels.stage_cost(
        w, w_ref, action.f, action.T, action.DO, uia, rho,
        prev_action.f, prev_action.T, prev_action.DO,
        kind, cfg.q_w, cfg.r_f, cfg.rate_weight, cfg.price, cfg.feed_cost,
        params.packed())


def _decision_channels(cfg):
    """(channel index, lo, hi) per decision channel; f is always first."""
    chans = [(0, cfg.u_min[0], cfg.u_max[0])]
    if cfg.control_T:
        chans.append((1, cfg.u_min[1], cfg.u_max[1]))
    if cfg.control_DO:
        chans.append((2, cfg.u_min[2], cfg.u_max[2]))
    return chans


def _assemble(cfg, decisions, forecast):
    """Full (S, N) input arrays from (S, M, n_dec) decision blocks."""
    s_count = decisions.shape[0]
    n, m = cfg.N, cfg.M
    t_env, do_env = forecast[0], forecast[1]
    chans = _decision_channels(cfg)
    full = {}
    held = np.concatenate([np.arange(m), np.full(n - m, m - 1)])
    planes = decisions[:, held, :]
    for j, (ci, _, _) in enumerate(chans):
        full[ci] = np.ascontiguousarray(planes[:, :, j])
    if 1 not in full:
        full[1] = np.broadcast_to(
            np.clip(t_env, cfg.u_min[1], cfg.u_max[1]), (s_count, n)).copy()
    if 2 not in full:
        full[2] = np.broadcast_to(
            np.clip(do_env, cfg.u_min[2], cfg.u_max[2]), (s_count, n)).copy()
    return full[0], full[1], full[2]


def _exact_cost(w0, F, Tc, Dc, uia, rho, w_ref, prev, dt, rk4, cfg, pv):
    """Re-walk one sequence with scalar kernels: exact J and weight path."""
    kind = 0 if cfg.cost == "tracking" else 1
    n = len(F)
    w_path = np.empty(n + 1)
    w = w0
    w_path[0] = w
    total = 0.0
    pf, pT, pD = prev
    for k in range(n):
        total += kernels.stage_cost(
            w, w_ref[k], F[k], Tc[k], Dc[k], uia[k], rho[k], pf, pT, pD,
            kind, cfg.q_w, cfg.r_f, cfg.rate_weight, cfg.price,
            cfg.feed_cost, pv) * dt
        w = kernels.step_w(w, F[k], Tc[k], Dc[k], uia[k], rho[k], dt, rk4, pv)
        w_path[k + 1] = w
        pf, pT, pD = F[k], Tc[k], Dc[k]
    return total, w_path


def solve_horizon(w0, forecast, w_ref, cfg, params, rng, warm=None,
                  prev_action=None, dt=1.0, rk4=True):
    """Optimize the next N inputs from weight w0.

    forecast is (T, DO, UIA, rho) arrays of length N; w_ref is the
    reference weight over the same window (ignored for the economic cost).
    warm is the previous solve's decision block shifted by one step.
    Raises InfeasibleHorizon when every candidate hits a state bound.
    """
    _require(w0 > 0.0 and math.isfinite(w0), "w0",
             "must be positive and finite")
    n, m = cfg.N, cfg.M
    t_env, do_env, uia, rho = (np.asarray(a, dtype=np.float64)
                               for a in forecast)
    _require(len(t_env) == n, "forecast", f"needs length {n}")
    w_ref = np.zeros(n) if w_ref is None \
        else np.asarray(w_ref, dtype=np.float64)
    _require(len(w_ref) == n, "w_ref", f"needs length {n}")
    pv = params.packed()
    chans = _decision_channels(cfg)
    n_dec = len(chans)
    lo = np.array([c[1] for c in chans])
    hi = np.array([c[2] for c in chans])
    span = hi - lo

    lat = np.asarray(cfg.lattice_f, dtype=np.float64)
    # the rate penalty at the first step measures against the previous
    # applied input; with none yet, against the first candidate's own start
    # (pinned once so search and the exact recompute agree)
    hold = {"p0": None if prev_action is None
            else (prev_action.f, prev_action.T, prev_action.DO)}

    def evaluate(decisions):
        F, Tc, Dc = _assemble(cfg, decisions, (t_env, do_env))
        s_count = F.shape[0]
        if hold["p0"] is None:
            hold["p0"] = (float(F[0, 0]), float(Tc[0, 0]), float(Dc[0, 0]))
        p0 = hold["p0"]
        J = np.empty(s_count)
        viol = np.empty(s_count, dtype=np.int64)
        kind = 0 if cfg.cost == "tracking" else 1
        kernels.horizon_costs(
            w0, F, Tc, Dc, uia, rho, w_ref, p0[0], p0[1], p0[2], dt, rk4,
            kind, cfg.q_w, cfg.r_f, cfg.rate_weight, cfg.price,
            cfg.feed_cost, cfg.w_min, cfg.w_max, cfg.penalty, pv, J, viol)
        J = np.where(np.isnan(J), np.inf, J)
        return F, Tc, Dc, J, viol, p0

    if cfg.exhaustive:
        grids = np.meshgrid(*([lat] * m), indexing="ij")
        decisions = np.stack([g.reshape(-1) for g in grids], axis=1)
        decisions = decisions[:, :, None]
        F, Tc, Dc, J, viol, p0 = evaluate(decisions)
        best = int(np.argmin(J))
    else:
        mean = np.empty((m, n_dec))
        if warm is not None:
            mean[:] = np.clip(warm, lo, hi)
        else:
            mean[:] = 0.5 * (lo + hi)
        std = np.where(span > 0.0, cfg.init_std_frac * span, 0.0)
        std = np.broadcast_to(std, (m, n_dec)).copy()
        floor = cfg.std_floor_frac * span
        best = None
        best_J = math.inf
        best_viol = None
        best_dec = None
        for _ in range(cfg.iterations):
            draws = rng.standard_normal((cfg.samples - 1, m, n_dec))
            cand = np.clip(mean[None, :, :] + std[None, :, :] * draws, lo, hi)
            if lat.size:
                snapped = lat[np.argmin(
                    np.abs(cand[:, :, 0][:, :, None] - lat[None, None, :]),
                    axis=2)]
                cand[:, :, 0] = snapped
            inject = best_dec if best_dec is not None \
                else np.clip(mean, lo, hi)
            decisions = np.concatenate([inject[None, :, :], cand], axis=0)
            F, Tc, Dc, J, viol, p0 = evaluate(decisions)
            idx = int(np.argmin(J))
            if J[idx] < best_J:
                best_J = float(J[idx])
                best_viol = int(viol[idx])
                best_dec = decisions[idx].copy()
                best_F, best_T, best_D = F[idx], Tc[idx], Dc[idx]
            order = np.argsort(J, kind="stable")[:cfg.elites]
            elite = decisions[order]
            mean = elite.mean(axis=0)
            std = np.maximum(elite.std(axis=0), floor)
        if best_dec is None:
            raise InfeasibleHorizon("no finite-cost candidate found")
        F = best_F[None, :]
        Tc = best_T[None, :]
        Dc = best_D[None, :]
        J = np.array([best_J])
        viol = np.array([best_viol])
        best = 0

    if viol[best] > 0:
        raise InfeasibleHorizon(
            f"best candidate violates state bounds at {int(viol[best])} "
            f"of {n} steps")
    j_exact, w_path = _exact_cost(
        w0, F[best], Tc[best], Dc[best], uia, rho, w_ref, p0, dt, rk4,
        cfg, pv)
    actions = [ControlAction(f=float(F[best, k]), T=float(Tc[best, k]),
                             DO=float(Dc[best, k])) for k in range(n)]
    return MpcSolution(actions=actions, w_path=w_path, J=j_exact,
                       feasible=True)


def _decision_block(cfg, actions):
    """Decision block (M, n_dec) back out of a solution's action list."""
    chans = _decision_channels(cfg)
    m = cfg.M
    block = np.empty((m, len(chans)))
    for k in range(m):
        vals = (actions[k].f, actions[k].T, actions[k].DO)
        for j, (ci, _, _) in enumerate(chans):
            block[k, j] = vals[ci]
    return block


def shift_warm(block):
    """Shift a decision block one step, repeating the last row."""
    return np.concatenate([block[1:], block[-1:]], axis=0)


class MpcController(Controller):
    """Applies the first input of each receding-horizon solve."""

    name = "mpc"

    def __init__(self, cfg):
        self.cfg = cfg
        self._warm = None
        self._prev_action = None

    def start(self, ctx):
        _require(isinstance(ctx.cfg.state0, Individual), "state0",
                 "predictive control supports the individual model only")
        self._rng = ctx.streams.get("mpc")
        self._warm = None
        self._prev_action = None
        self._ref_w = None
        if self.cfg.cost == "tracking":
            _require(ctx.ref is not None, "reference",
                     "tracking cost needs a reference trajectory")
            self._ref_w = ctx.ref.weights()

    def _ref_window(self, k):
        if self._ref_w is None:
            return None
        idx = np.minimum(np.arange(k, k + self.cfg.N), len(self._ref_w) - 1)
        return self._ref_w[idx]

    def act(self, ctx, k, state):
        forecast = ctx.env.window(k, self.cfg.N)
        try:
            sol = solve_horizon(
                state.w, forecast, self._ref_window(k), self.cfg,
                ctx.params, self._rng, warm=self._warm,
                prev_action=self._prev_action, dt=ctx.cfg.dt,
                rk4=ctx.cfg.integrator == "rk4")
        except InfeasibleHorizon:
            if self._prev_action is not None:
                action = self._prev_action
            else:
                action = ControlAction(
                    f=self.cfg.u_min[0],
                    T=float(np.clip(forecast[0][0], self.cfg.u_min[1],
                                    self.cfg.u_max[1])),
                    DO=float(np.clip(forecast[1][0], self.cfg.u_min[2],
                                     self.cfg.u_max[2])))
            self._prev_action = action
            return action, {"chosen_by": "hold"}
        self._warm = shift_warm(_decision_block(self.cfg, sol.actions))
        action = sol.actions[0]
        self._prev_action = action
        return action, {"j_mpc": sol.J, "chosen_by": "mpc"}
