"""Tabular Q-learning on a binned weight state space.

The fish-feeding task discretizes log weight into uniform bins (weight
spans decades, so log spacing keeps resolution even) with an optional
day dimension, and offers a finite lattice of feeding actions.  The
per-step reward is energy gain minus feed expense,

    r = (w' - w) - c_f * f * r_frac * w    (+ bonus B on reaching xi_d)

Training follows the classic loop: initialize Q to zero, roll
epsilon-greedy episodes, update Q from each transition with the one-step
temporal difference

    Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))

bootstrapping zero at terminal states, and stop once the greedy policy
has been unchanged for ``patience`` consecutive episodes.  Exploration
anneals per episode; the default schedule decays the exploration
probability exponentially, while the "ramp" variant ramps it up by
annealing the exploitation probability as
clamp(1 - eps0 * exp(i / t_eps), 0, 1).

``value_iteration`` solves small deterministic problems to fixed point
and is the independent check that training lands on the same Q.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from aquactl import kernels
from aquactl.errors import ParamError
from aquactl.growth import ControlAction, DEFAULT_PARAMS
from aquactl.engine import Controller
from aquactl import traj_io


def _require(cond, key, message):
    if not cond:
        raise ParamError(key, message)


@dataclass(frozen=True)
class MdpSpec:
    """Discretization and reward shaping of the growth task."""

    w_lo: float = 1.0
    w_hi: float = 5000.0
    n_bins: int = 64
    actions: tuple = ()
    xi_d: float = 400.0
    t_f: float = 60.0
    feed_cost: float = 0.1
    terminal_bonus: float = 0.0
    day_bins: int = 0

    def __post_init__(self):
        _require(0.0 < self.w_lo < self.w_hi, "w_lo",
                 "must satisfy 0 < w_lo < w_hi")
        _require(isinstance(self.n_bins, int) and self.n_bins >= 2,
                 "n_bins", "need at least 2 bins")
        _require(len(self.actions) >= 1, "actions", "need at least one")
        _require(all(isinstance(a, ControlAction) for a in self.actions),
                 "actions", "must be ControlAction instances")
        _require(self.xi_d > 0.0, "xi_d", "must be positive")
        _require(self.t_f > 0.0, "t_f", "must be positive")
        _require(self.feed_cost >= 0.0, "feed_cost", "must be non-negative")
        _require(isinstance(self.day_bins, int) and self.day_bins >= 0,
                 "day_bins", "must be a non-negative integer")

    @property
    def n_states(self):
        return self.n_bins * max(self.day_bins, 1)


def weight_bin(w, spec):
    """Uniform bin index of log(w), clamped to the grid."""
    _require(w > 0.0, "w", "must be positive")
    x = (math.log(w) - math.log(spec.w_lo)) \
        / (math.log(spec.w_hi) - math.log(spec.w_lo))
    return min(max(int(math.floor(x * spec.n_bins)), 0), spec.n_bins - 1)


def state_index(w, day, spec):
    """Flat state index; the day axis is used only when day_bins > 0."""
    b = weight_bin(w, spec)
    if spec.day_bins == 0:
        return b
    d = min(max(int(day), 0), spec.day_bins - 1)
    return d * spec.n_bins + b


def step_reward(w, f, w_next, reached_target, spec,
                params=DEFAULT_PARAMS):
    """Energy gain minus feed expense, plus the terminal bonus if earned."""
    r = (w_next - w) - spec.feed_cost * f * params.r_frac * w
    if reached_target:
        r += spec.terminal_bonus
    return r


@dataclass(frozen=True)
class QLearningConfig:
    alpha: float = 0.1
    gamma: float = 0.95
    eps0: float = 0.9
    t_eps: float = 100.0
    eps_min: float = 0.01
    annealing: str = "decay"
    episodes: int = 500
    patience: int = 10
    max_steps: int = 10000
    reward_clip: tuple | None = None

    def __post_init__(self):
        _require(0.0 < self.alpha <= 1.0, "alpha", "must lie in (0, 1]")
        _require(0.0 < self.gamma < 1.0, "gamma", "must lie in (0, 1)")
        _require(0.0 < self.eps0 <= 1.0, "eps0", "must lie in (0, 1]")
        _require(self.t_eps > 0.0, "t_eps", "must be positive")
        _require(0.0 <= self.eps_min <= 1.0, "eps_min",
                 "must lie in [0, 1]")
        _require(self.annealing in ("decay", "ramp"), "annealing",
                 "must be 'decay' or 'ramp'")
        _require(self.episodes >= 1, "episodes", "must be positive")
        _require(self.patience >= 1, "patience", "must be positive")
        _require(self.max_steps >= 1, "max_steps", "must be positive")
        if self.reward_clip is not None:
            _require(len(self.reward_clip) == 2
                     and self.reward_clip[0] < self.reward_clip[1],
                     "reward_clip", "must be an increasing (lo, hi) pair")


def epsilon(i, cfg):
    """Annealing schedule value at episode i.

    decay mode: exploration probability eps0 * exp(-i / t_eps) clamped to
    [eps_min, 1].  ramp mode: exploitation probability
    clamp(1 - eps0 * exp(i / t_eps), 0, 1), so exploration rises to 1.
    """
    _require(i >= 0, "i", "episode index must be non-negative")
    if cfg.annealing == "decay":
        val = cfg.eps0 * math.exp(-i / cfg.t_eps)
        return min(max(val, cfg.eps_min), 1.0)
    return min(max(1.0 - cfg.eps0 * math.exp(i / cfg.t_eps), 0.0), 1.0)


def explore_probability(i, cfg):
    """Probability of taking a uniformly random action at episode i."""
    if cfg.annealing == "decay":
        return epsilon(i, cfg)
    return 1.0 - epsilon(i, cfg)


class QTable:
    """Dense Q values plus visit counts, with CSV persistence."""

    def __init__(self, n_states, n_actions):
        _require(n_states >= 1, "n_states", "must be positive")
        _require(n_actions >= 1, "n_actions", "must be positive")
        self.q = np.zeros((n_states, n_actions))
        self.visits = np.zeros((n_states, n_actions), dtype=np.int64)

    @property
    def n_states(self):
        return self.q.shape[0]

    @property
    def n_actions(self):
        return self.q.shape[1]

    def greedy_policy(self):
        """Greedy action per state; ties break to the lowest index."""
        return np.argmax(self.q, axis=1)

    def save(self, path):
        traj_io.write_qtable(path, self.q, self.visits)

    @staticmethod
    def load(path):
        q, visits = traj_io.read_qtable(path)
        table = QTable(q.shape[0], q.shape[1])
        table.q = q
        table.visits = visits
        return table


def td_update(table, s, a, r, s_next, terminal, alpha, gamma):
    """One temporal-difference backup; returns the new Q(s, a)."""
    boot = 0.0 if terminal else gamma * float(np.max(table.q[s_next]))
    newq = table.q[s, a] + alpha * (r + boot - table.q[s, a])
    table.q[s, a] = newq
    table.visits[s, a] += 1
    return float(newq)


def q_update(table, s, a, r, s_next, terminal, cfg):
    """Config-driven wrapper around td_update."""
    return td_update(table, s, a, r, s_next, terminal, cfg.alpha, cfg.gamma)


@dataclass
class TrainResult:
    table: QTable
    policy: np.ndarray
    episodes_run: int
    converged: bool
    episode_returns: list = field(default_factory=list)


def train(env, cfg, rng, trace=None):
    """Epsilon-greedy tabular training loop.

    ``env`` provides n_states, n_actions, reset() -> s and
    step(a) -> (s_next, r, terminal).  Stops when the greedy policy is
    unchanged for ``patience`` consecutive episodes; ``converged`` is
    False when the episode budget runs out first.  ``trace`` (a list, if
    given) records the loop phases in order.
    """
    table = QTable(env.n_states, env.n_actions)
    policy = table.greedy_policy()
    if trace is not None:
        trace.append(("initialize", env.n_states, env.n_actions))
    stable = 0
    converged = False
    episodes_run = 0
    returns = []
    clip = cfg.reward_clip
    for i in range(cfg.episodes):
        p_explore = explore_probability(i, cfg)
        if trace is not None:
            trace.append(("improve", i, p_explore))
        s = env.reset()
        total = 0.0
        n_updates = 0
        for _ in range(cfg.max_steps):
            if rng.random() < p_explore:
                a = int(rng.integers(env.n_actions))
            else:
                a = int(np.argmax(table.q[s]))
            s_next, r, terminal = env.step(a)
            if clip is not None:
                r = min(max(r, clip[0]), clip[1])
            q_update(table, s, a, r, s_next, terminal, cfg)
            total += r
            n_updates += 1
            s = s_next
            if terminal:
                break
        episodes_run = i + 1
        returns.append(total)
        if trace is not None:
            trace.append(("update", i, n_updates))
        new_policy = table.greedy_policy()
        changed = not np.array_equal(new_policy, policy)
        stable = 0 if changed else stable + 1
        policy = new_policy
        if trace is not None:
            trace.append(("stopping-check", i, changed, stable))
        if stable >= cfg.patience:
            converged = True
            break
    if trace is not None:
        trace.append(("stop", episodes_run, converged))
    return TrainResult(table=table, policy=policy, episodes_run=episodes_run,
                       converged=converged, episode_returns=returns)


def value_iteration(next_state, reward, terminal, gamma, tol=1e-12,
                    max_sweeps=1000000):
    """Exact Q for a deterministic finite problem, to residual <= tol.

    next_state, reward and terminal are (n_states, n_actions) arrays;
    terminal marks transitions that end the episode (no bootstrap).
    """
    next_state = np.asarray(next_state)
    reward = np.asarray(reward, dtype=np.float64)
    terminal = np.asarray(terminal, dtype=bool)
    n_states, n_actions = next_state.shape
    q = np.zeros((n_states, n_actions))
    for _ in range(max_sweeps):
        v_next = np.max(q, axis=1)[next_state]
        q_new = reward + gamma * np.where(terminal, 0.0, v_next)
        residual = float(np.max(np.abs(q_new - q)))
        q = q_new
        if residual <= tol:
            return q
    raise RuntimeError(f"value iteration did not reach {tol} "
                       f"in {max_sweeps} sweeps")


class GrowthMdp:
    """The growth task as a finite-state environment for train().

    The environment must be constant in time unless the day dimension is
    enabled, otherwise the binned weight alone is not a sufficient state.
    """

    def __init__(self, spec, w0, env_state, params=DEFAULT_PARAMS,
                 dt=1.0, rk4=True):
        _require(w0 > 0.0, "w0", "must be positive")
        _require(dt > 0.0, "dt", "must be positive")
        self.spec = spec
        self.w0 = w0
        self.env = env_state
        self.params = params
        self.dt = dt
        self.rk4 = rk4
        self._pv = params.packed()
        self.n_states = spec.n_states
        self.n_actions = len(spec.actions)
        self.w = w0
        self.t = 0.0

    def reset(self):
        self.w = self.w0
        self.t = 0.0
        return state_index(self.w, 0, self.spec)

    def step(self, a_idx):
        act = self.spec.actions[a_idx]
        w_next = kernels.step_w(self.w, act.f, act.T, act.DO, self.env.UIA,
                                self.env.rho, self.dt, self.rk4, self._pv)
        reached = w_next >= self.spec.xi_d
        t_next = self.t + self.dt
        timeout = t_next >= self.spec.t_f - 1e-9
        starved = not (w_next > 0.0 and math.isfinite(w_next))
        r = step_reward(self.w, act.f, max(w_next, 1e-12), reached,
                        self.spec, self.params)
        self.w = max(w_next, 1e-12)
        self.t = t_next
        s = state_index(self.w, int(t_next // 1.0), self.spec)
        return s, r, bool(reached or timeout or starved)


class QPolicyController(Controller):
    """Greedy policy lookup from a trained table (individual model)."""

    name = "qlearning"

    def __init__(self, table, spec):
        _require(table.n_actions == len(spec.actions), "actions",
                 "table and spec disagree on the action count")
        self.table = table
        self.spec = spec

    def act(self, ctx, k, state):
        day = int(float(ctx.t_grid[k]) // 1.0)
        s = state_index(state.w, day, self.spec)
        a = int(np.argmax(self.table.q[s]))
        return self.spec.actions[a], None
