"""Hybrid control: Q-learning guided by receding-horizon solves.

The horizon cost J plays the role of a negative value estimate.  After
applying an action at state s_k and landing at s_{k+1}, the reward is the
drop in horizon cost,

    r_{k+1} = -(J_{k+1} - J_k)

so rewards telescope: their sum over an episode equals J_0 - J_T exactly.
The discount is tied to the horizon geometry, gamma = 1 - M/N, computed
from the configured horizons rather than set by hand.

Each step the solver's first move is applied with the guided-exploration
probability; otherwise the greedy lattice action is applied, after a
one-step state-bound check (failing that, the solver's move is used).
The Q index of the applied action is its nearest lattice point.  The
solve at the post-step state is cached and reused as the next step's J_k,
so consecutive rewards share one solve and the telescoping identity holds
to float precision.  A step whose solve is infeasible applies the greedy
feasible lattice action and skips the Q update.
"""

import math
from dataclasses import dataclass

import numpy as np

from aquactl import kernels
from aquactl.errors import InfeasibleHorizon, ParamError, UndefinedReward
from aquactl.growth import ControlAction, Individual
from aquactl.engine import Controller
from aquactl.mpc import MpcConfig, solve_horizon, shift_warm, _decision_block
from aquactl.qlearn import QTable, td_update


def _require(cond, key, message):
    if not cond:
        raise ParamError(key, message)


def hybrid_discount(control_horizon, horizon):
    """Discount factor 1 - M/N tied to the horizon geometry."""
    _require(isinstance(control_horizon, int) and control_horizon >= 1,
             "control_horizon", "must be a positive integer")
    _require(isinstance(horizon, int) and horizon >= control_horizon,
             "horizon", "must be >= control_horizon")
    return 1.0 - control_horizon / horizon

def hybrid_reward(j_k, j_next):
    """Reward -(J_{k+1} - J_k); undefined when either solve failed."""
    if j_k is None or j_next is None:
        raise UndefinedReward("an adjacent solve was infeasible")
    return -(j_next - j_k)


@dataclass(frozen=True)
class RlMpcConfig:
    """Hybrid controller settings; gamma is derived, never configured."""

    mpc: MpcConfig = MpcConfig()
    alpha: float = 0.5
    guide0: float = 1.0
    t_guide: float = 50.0
    guide_min: float = 0.1
    w_lo: float = 1.0
    w_hi: float = 5000.0
    n_bins: int = 64
    f_levels: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)

    def __post_init__(self):
        _require(0.0 < self.alpha <= 1.0, "alpha", "must lie in (0, 1]")
        _require(0.0 <= self.guide0 <= 1.0, "guide0", "must lie in [0, 1]")
        _require(self.t_guide > 0.0, "t_guide", "must be positive")
        _require(0.0 <= self.guide_min <= self.guide0, "guide_min",
                 "must lie in [0, guide0]")
        _require(0.0 < self.w_lo < self.w_hi, "w_lo",
                 "must satisfy 0 < w_lo < w_hi")
        _require(isinstance(self.n_bins, int) and self.n_bins >= 2,
                 "n_bins", "need at least 2 bins")
        _require(len(self.f_levels) >= 1, "f_levels", "need at least one")
        _require(all(0.0 <= x <= 1.0 for x in self.f_levels), "f_levels",
                 "levels must lie in [0, 1]")
        _require(list(self.f_levels) == sorted(set(self.f_levels)),
                 "f_levels", "levels must be ascending and distinct")
        lo, hi = self.mpc.u_min[0], self.mpc.u_max[0]
        _require(all(lo <= x <= hi for x in self.f_levels), "f_levels",
                 "levels must respect the feed bounds")

    @property
    def gamma(self):
        return hybrid_discount(self.mpc.M, self.mpc.N)

    def guide_probability(self, episode):
        """Guided-exploration probability at the given episode index."""
        val = self.guide0 * math.exp(-episode / self.t_guide)
        return min(max(val, self.guide_min), self.guide0) \
            if self.guide0 > 0.0 else 0.0


def nearest_level(f, levels):
    """Index of the closest lattice level; ties go to the lower index."""
    best = 0
    best_d = abs(f - levels[0])
    for i in range(1, len(levels)):
        d = abs(f - levels[i])
        if d < best_d:
            best = i
            best_d = d
    return best


def constraint_audit(traj, mpc_cfg):
    """Box-bound and state-bound violations over a trajectory.

    Returns a list of (step, kind) tuples; empty means every applied
    action respected the input box and the weight stayed in its range.
    """
    out = []
    lo, hi = mpc_cfg.u_min, mpc_cfg.u_max
    for k, rec in enumerate(traj.records):
        st = rec.state
        if isinstance(st, Individual) \
                and not (mpc_cfg.w_min <= st.w <= mpc_cfg.w_max):
            out.append((k, "state"))
        a = rec.action
        if a is None:
            continue
        for val, l, h, name in ((a.f, lo[0], hi[0], "f"),
                                (a.T, lo[1], hi[1], "T"),
                                (a.DO, lo[2], hi[2], "DO")):
            if not (l <= val <= h):
                out.append((k, f"input.{name}"))
    return out


class RlMpcController(Controller):
    """One closed-loop episode of solver-guided Q-learning."""

    name = "rlmpc"

    def __init__(self, cfg, episode=0, table=None):
        self.cfg = cfg
        self.episode = episode
        self.table = table if table is not None \
            else QTable(cfg.n_bins, len(cfg.f_levels))

    def start(self, ctx):
        _require(isinstance(ctx.cfg.state0, Individual), "state0",
                 "hybrid control supports the individual model only")
        self._rng_mpc = ctx.streams.get("mpc")
        self._rng_rl = ctx.streams.get("rl")
        self._warm = None
        self._prev_action = None
        self._cached = None          # (step, J, solution) for that step's act
        self._pending = None         # (s_bin, a_idx, J_k) awaiting update
        self._ref_w = None
        self._pv = ctx.params.packed()
        self.j_history = []          # J of every solve, in order, None if infeasible
        if self.cfg.mpc.cost == "tracking":
            _require(ctx.ref is not None, "reference",
                     "tracking cost needs a reference trajectory")
            self._ref_w = ctx.ref.weights()

    def _bin(self, w):
        x = (math.log(w) - math.log(self.cfg.w_lo)) \
            / (math.log(self.cfg.w_hi) - math.log(self.cfg.w_lo))
        return min(max(int(math.floor(x * self.cfg.n_bins)), 0),
                   self.cfg.n_bins - 1)

    def _ref_window(self, k):
        if self._ref_w is None:
            return None
        idx = np.minimum(np.arange(k, k + self.cfg.mpc.N),
                         len(self._ref_w) - 1)
        return self._ref_w[idx]

    def _solve(self, ctx, k, w):
        forecast = ctx.env.window(k, self.cfg.mpc.N)
        try:
            sol = solve_horizon(w, forecast, self._ref_window(k),
                                self.cfg.mpc, ctx.params, self._rng_mpc,
                                warm=self._warm,
                                prev_action=self._prev_action, dt=ctx.cfg.dt,
                                rk4=ctx.cfg.integrator == "rk4")
        except InfeasibleHorizon:
            self.j_history.append(None)
            raise
        self._warm = shift_warm(_decision_block(self.cfg.mpc, sol.actions))
        self.j_history.append(sol.J)
        return sol

    def _lattice_action(self, ctx, k, idx):
        mc = self.cfg.mpc
        T = float(np.clip(ctx.env.T[k], mc.u_min[1], mc.u_max[1]))
        DO = float(np.clip(ctx.env.DO[k], mc.u_min[2], mc.u_max[2]))
        return ControlAction(f=self.cfg.f_levels[idx], T=T, DO=DO)

    def _greedy_feasible(self, ctx, k, w):
        """Greedy lattice action passing the one-step state-bound check."""
        mc = self.cfg.mpc
        s = self._bin(w)
        order = np.argsort(-self.table.q[s], kind="stable")
        for idx in order:
            act = self._lattice_action(ctx, k, int(idx))
            w2 = kernels.step_w(w, act.f, act.T, act.DO,
                                float(ctx.env.UIA[k]), float(ctx.env.rho[k]),
                                ctx.cfg.dt, ctx.cfg.integrator == "rk4",
                                self._pv)
            if mc.w_min <= w2 <= mc.w_max:
                return int(idx), act
        return int(order[0]), self._lattice_action(ctx, k, int(order[0]))

    def act(self, ctx, k, state):
        w = state.w
        if self._cached is not None and self._cached[0] == k:
            j_k, sol = self._cached[1], self._cached[2]
        else:
            try:
                sol = self._solve(ctx, k, w)
                j_k = sol.J
            except InfeasibleHorizon:
                sol = None
                j_k = None
        if sol is None:
            a_idx, action = self._greedy_feasible(ctx, k, w)
            chosen = "q"
        else:
            g = self.cfg.guide_probability(self.episode)
            if self._rng_rl.random() < g:
                action = sol.actions[0]
                chosen = "mpc"
            else:
                s = self._bin(w)
                a_idx = int(np.argmax(self.table.q[s]))
                cand = self._lattice_action(ctx, k, a_idx)
                mc = self.cfg.mpc
                w2 = kernels.step_w(w, cand.f, cand.T, cand.DO,
                                    float(ctx.env.UIA[k]),
                                    float(ctx.env.rho[k]), ctx.cfg.dt,
                                    ctx.cfg.integrator == "rk4", self._pv)
                if mc.w_min <= w2 <= mc.w_max:
                    action = cand
                    chosen = "q"
                else:
                    action = sol.actions[0]
                    chosen = "mpc"
            a_idx = nearest_level(action.f, self.cfg.f_levels)
        self._prev_action = action
        if j_k is None:
            self._pending = None
        else:
            self._pending = (self._bin(w), a_idx, j_k)
        return action, {"j_mpc": j_k, "chosen_by": chosen}

    def observe(self, ctx, k, next_state):
        try:
            sol = self._solve(ctx, k + 1, next_state.w)
            j_next = sol.J
            self._cached = (k + 1, j_next, sol)
        except InfeasibleHorizon:
            j_next = None
            self._cached = (k + 1, None, None)
        if self._pending is None or j_next is None:
            self._pending = None
            return None
        s, a_idx, j_k = self._pending
        r = hybrid_reward(j_k, j_next)
        td_update(self.table, s, a_idx, r, self._bin(next_state.w),
                  False, self.cfg.alpha, self.cfg.gamma)
        self._pending = None
        return {"reward": r}
