"""CSV persistence for trajectories, environment tables and Q tables.

Floats are written with 17 significant digits so a read-back is exact;
absent quantities are empty fields.  Files use LF line endings and end
with a newline, which keeps byte-identity checks straightforward.
"""

from aquactl.errors import ConfigError
from aquactl.growth import ControlAction, Individual, Population
from aquactl.engine import Record, Trajectory

TRAJECTORY_COLUMNS = (
    "t_day", "w_kcal", "xi_kcal", "p_count", "f", "T_c", "DO_mgL",
    "UIA_mgL", "tau", "sigma", "v", "k1", "reward", "J_mpc", "chosen_by",
)
ENV_COLUMNS = ("t_day", "T_c", "DO_mgL", "UIA_mgL", "rho")
QTABLE_COLUMNS = ("state_bin", "action_idx", "q_value", "visits")
RETURNS_COLUMNS = ("episode", "return")


def _fmt(x):
    if x is None:
        return ""
    return format(float(x), ".17g")


def _parse(s):
    return None if s == "" else float(s)


def trajectory_lines(traj):
    lines = [",".join(TRAJECTORY_COLUMNS)]
    for r in traj.records:
        if isinstance(r.state, Individual):
            w, xi, p = _fmt(r.state.w), "", ""
        else:
            w, xi, p = "", _fmt(r.state.xi), str(r.state.p)
        if r.action is not None:
            f, T, DO = _fmt(r.action.f), _fmt(r.action.T), _fmt(r.action.DO)
        else:
            f, T, DO = "", "", ""
        lines.append(",".join((
            _fmt(r.t), w, xi, p, f, T, DO, _fmt(r.uia),
            _fmt(r.tau), _fmt(r.sigma), _fmt(r.v), _fmt(r.k1),
            _fmt(r.reward), _fmt(r.j_mpc),
            r.chosen_by if r.chosen_by is not None else "",
        )))
    return lines


def write_trajectory(path, traj):
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(trajectory_lines(traj)) + "\n")


def read_trajectory(path):
    with open(path, "r", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != ",".join(TRAJECTORY_COLUMNS):
        raise ConfigError(str(path), "not a trajectory CSV (bad header)")
    records = []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != len(TRAJECTORY_COLUMNS):
            raise ConfigError(str(path), f"bad column count: {line!r}")
        (t, w, xi, p, f, T, DO, uia, tau, sigma, v, k1,
         reward, j_mpc, chosen_by) = parts
        if w != "":
            state = Individual(float(w))
        else:
            state = Population(xi=float(xi), p=int(p))
        action = None
        if f != "":
            action = ControlAction(f=float(f), T=float(T), DO=float(DO))
        records.append(Record(
            t=float(t), state=state, action=action, uia=_parse(uia),
            tau=_parse(tau), sigma=_parse(sigma), v=_parse(v), k1=_parse(k1),
            reward=_parse(reward), j_mpc=_parse(j_mpc),
            chosen_by=chosen_by if chosen_by != "" else None,
        ))
    return Trajectory(records)


def write_env_table(path, t, T, DO, UIA, rho):
    lines = [",".join(ENV_COLUMNS)]
    for row in zip(t, T, DO, UIA, rho):
        lines.append(",".join(_fmt(x) for x in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_env_table(path):
    """Environment series as a dict of float lists keyed by column."""
    with open(path, "r", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != ",".join(ENV_COLUMNS):
        raise ConfigError(str(path), "not an environment CSV (bad header)")
    cols = {name: [] for name in ENV_COLUMNS}
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != len(ENV_COLUMNS):
            raise ConfigError(str(path), f"bad column count: {line!r}")
        for name, val in zip(ENV_COLUMNS, parts):
            cols[name].append(float(val))
    return cols


def write_qtable(path, q, visits):
    lines = [",".join(QTABLE_COLUMNS)]
    n_states, n_actions = q.shape
    for s in range(n_states):
        for a in range(n_actions):
            lines.append(",".join((str(s), str(a), _fmt(q[s, a]),
                                   str(int(visits[s, a])))))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_returns(path, returns):
    """Per-episode training returns, one row per episode in order."""
    lines = [",".join(RETURNS_COLUMNS)]
    for i, r in enumerate(returns):
        lines.append(f"{i},{_fmt(r)}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_returns(path):
    with open(path, "r", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != ",".join(RETURNS_COLUMNS):
        raise ConfigError(str(path), "not a returns CSV (bad header)")
    returns = []
    for i, line in enumerate(lines[1:]):
        ep, val = line.split(",")
        if int(ep) != i:
            raise ConfigError(str(path), "episode column must count from 0")
        returns.append(float(val))
    return returns


def read_qtable(path):
    """Q values and visit counts as dense arrays."""
    import numpy as np

    with open(path, "r", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != ",".join(QTABLE_COLUMNS):
        raise ConfigError(str(path), "not a Q-table CSV (bad header)")
    rows = []
    for line in lines[1:]:
        s, a, qv, vis = line.split(",")
        rows.append((int(s), int(a), float(qv), int(vis)))
    n_states = max(r[0] for r in rows) + 1
    n_actions = max(r[1] for r in rows) + 1
    q = np.zeros((n_states, n_actions))
    visits = np.zeros((n_states, n_actions), dtype=np.int64)
    for s, a, qv, vis in rows:
        q[s, a] = qv
        visits[s, a] = vis
    return q, visits
