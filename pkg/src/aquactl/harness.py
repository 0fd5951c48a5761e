"""Scenario assembly and benchmark runs.

A parsed config dict (see config.py) is turned into model parameters, an
environment profile, a run setup and a controller, then executed.  The
same scenario seed drives every controller in a comparison, so runs
differ only in the control law.  Metric files never contain wall-clock
times; those go in the text report only, keeping the CSV outputs
byte-identical across repeated runs.
"""

import os
import time
from dataclasses import dataclass

import numpy as np

from aquactl import traj_io
from aquactl.classical import (
    BangBangConfig,
    BangBangController,
    ConstantFeedController,
    PidConfig,
    PidController,
)
from aquactl.engine import (
    ChannelSpec,
    ConstantController,
    EnvProfile,
    SeedStreams,
    SimConfig,
    reference_trajectory,
    simulate,
)
from aquactl.errors import ConfigError, DegenerateGain, ParamError
from aquactl.growth import (
    ControlAction,
    EnvState,
    GrowthParams,
    Individual,
    Population,
    StockingPolicy,
    fcr,
    sgr,
)
from aquactl.mpc import MpcConfig, MpcController
from aquactl.qlearn import (
    GrowthMdp,
    MdpSpec,
    QLearningConfig,
    QPolicyController,
    train,
)
from aquactl.rlmpc import RlMpcConfig, RlMpcController

CONTROLLER_TYPES = ("constant", "bangbang", "pid", "mpc", "qlearning",
                    "rlmpc")

METRIC_NAMES = ("terminal_weight", "gain", "sgr", "fcr", "total_feed",
                "tracking_rmse", "survival", "episode_return")


def _rewrap(section, exc):
    return ConfigError(f"{section}.{exc.key}", str(exc).split(": ", 1)[-1])


def build_params(cfg):
    try:
        return GrowthParams(**cfg["model"])
    except ParamError as exc:
        raise _rewrap("model", exc) from None


def _build_channel(section_cfg, section):
    try:
        return ChannelSpec(**section_cfg)
    except ParamError as exc:
        raise _rewrap(section, exc) from None


def build_env(cfg):
    return EnvProfile(
        T=_build_channel(cfg["environment.T"], "environment.T"),
        DO=_build_channel(cfg["environment.DO"], "environment.DO"),
        UIA=_build_channel(cfg["environment.UIA"], "environment.UIA"),
        rho=_build_channel(cfg["environment.rho"], "environment.rho"),
    )


def build_sim(cfg, params=None, env=None):
    params = build_params(cfg) if params is None else params
    env = build_env(cfg) if env is None else env
    run = cfg["run"]
    if run["model"] not in ("individual", "population"):
        raise ConfigError("run.model",
                          "must be 'individual' or 'population'")
    try:
        if run["model"] == "individual":
            state0 = Individual(run["w0"])
            stocking = StockingPolicy()
        else:
            state0 = Population(xi=run["xi0"], p=run["p0"])
            stocking = StockingPolicy(p_s=run["p_s"], xi_i=run["xi_i"])
        return SimConfig(
            state0=state0, env=env, params=params,
            t0=run["t0"], tf=run["tf"], dt=run["dt"],
            integrator=run["integrator"], seed=run["seed"],
            stocking=stocking, mortality=run["mortality"])
    except ParamError as exc:
        raise _rewrap("run", exc) from None


def _base_triple(sec):
    return (sec["base_f"], sec["base_T"], sec["base_DO"])


def _q_actions(sec):
    return tuple(ControlAction(f=f, T=sec["action_T"], DO=sec["action_DO"])
                 for f in sec["f_levels"])


def _mdp_spec(sec):
    return MdpSpec(w_lo=sec["w_lo"], w_hi=sec["w_hi"], n_bins=sec["n_bins"],
                   actions=_q_actions(sec), xi_d=sec["xi_d"],
                   t_f=sec["t_f"], feed_cost=sec["feed_cost"],
                   terminal_bonus=sec["terminal_bonus"],
                   day_bins=sec["day_bins"])


def build_mpc_config(cfg):
    try:
        return MpcConfig(**cfg["controller.mpc"])
    except ParamError as exc:
        raise _rewrap("controller.mpc", exc) from None


def train_q(cfg, sim_cfg=None):
    """Train tabular Q on the scenario's constant-environment task."""
    sim_cfg = build_sim(cfg) if sim_cfg is None else sim_cfg
    sec = cfg["controller.qlearning"]
    section = "controller.qlearning"
    if not isinstance(sim_cfg.state0, Individual):
        raise ConfigError("run.model",
                          "Q-learning training uses the individual model")
    try:
        spec = _mdp_spec(sec)
        qcfg = QLearningConfig(
            alpha=sec["alpha"], gamma=sec["gamma"], eps0=sec["eps0"],
            t_eps=sec["t_eps"], eps_min=sec["eps_min"],
            annealing=sec["annealing"], episodes=sec["episodes"],
            patience=sec["patience"], max_steps=sec["max_steps"])
    except ParamError as exc:
        raise _rewrap(section, exc) from None
    # training sees the profile's value at t0 held constant; time-varying
    # profiles need the day dimension to stay Markov
    profile = build_env(cfg)
    t0 = sim_cfg.t0
    env_state = EnvState(
        f=0.0, T=profile.T.base(t0), DO=profile.DO.base(t0),
        UIA=profile.UIA.base(t0), rho=profile.rho.base(t0))
    mdp = GrowthMdp(spec, sim_cfg.state0.w, env_state,
                    params=sim_cfg.params, dt=sim_cfg.dt,
                    rk4=sim_cfg.integrator == "rk4")
    rng = SeedStreams(sim_cfg.seed).get("rl")
    result = train(mdp, qcfg, rng)
    return result, spec


def build_controller(kind, cfg, sim_cfg):
    """Controller instance for one scenario; may train first."""
    if kind == "constant":
        sec = cfg["controller.constant"]
        return ConstantFeedController(f=sec["f"], T=sec["T"], DO=sec["DO"])
    if kind == "bangbang":
        sec = cfg["controller.bangbang"]
        try:
            bb = BangBangConfig(setpoint=sec["setpoint"],
                                on_value=sec["on_value"],
                                off_value=sec["off_value"],
                                deadband=sec["deadband"])
        except ParamError as exc:
            raise _rewrap("controller.bangbang", exc) from None
        return BangBangController(bb, channel=sec["channel"],
                                  measure=sec["measure"],
                                  base=_base_triple(sec))
    if kind == "pid":
        sec = cfg["controller.pid"]
        try:
            pc = PidConfig(kp=sec["kp"], ki=sec["ki"], kd=sec["kd"],
                           u_min=sec["u_min"], u_max=sec["u_max"],
                           integral_limit=sec["integral_limit"],
                           derivative_filter=sec["derivative_filter"])
        except ParamError as exc:
            raise _rewrap("controller.pid", exc) from None
        return PidController(pc, channel=sec["channel"],
                             measure=sec["measure"],
                             setpoint=sec["setpoint"],
                             track_reference=sec["track_reference"],
                             base=_base_triple(sec))
    if kind == "mpc":
        return MpcController(build_mpc_config(cfg))
    if kind == "qlearning":
        result, spec = train_q(cfg, sim_cfg)
        return QPolicyController(result.table, spec)
    if kind == "rlmpc":
        sec = cfg["controller.rlmpc"]
        try:
            rcfg = RlMpcConfig(
                mpc=build_mpc_config(cfg), alpha=sec["alpha"],
                guide0=sec["guide0"], t_guide=sec["t_guide"],
                guide_min=sec["guide_min"], w_lo=sec["w_lo"],
                w_hi=sec["w_hi"], n_bins=sec["n_bins"],
                f_levels=sec["f_levels"])
        except ParamError as exc:
            raise _rewrap("controller.rlmpc", exc) from None
        return RlMpcController(rcfg)
    raise ConfigError("controller.type",
                      f"must be one of {CONTROLLER_TYPES}")


def _needs_reference(kind, cfg):
    if kind in ("mpc", "rlmpc"):
        return cfg["controller.mpc"]["cost"] == "tracking"
    if kind == "pid":
        sec = cfg["controller.pid"]
        return sec["track_reference"] and sec["setpoint"] is None
    return False


def compute_metrics(traj, dt, params, ref=None):
    """Standard scenario metrics; absent ones map to None."""
    w = traj.weights()
    w0, wt = float(w[0]), float(w[-1])
    gain = wt - w0
    days = float(traj.times()[-1] - traj.times()[0])
    feeds = traj.feeds()
    total_feed = float(np.sum(feeds * params.r_frac * w[:-1] * dt)) \
        if len(feeds) else 0.0
    out = {
        "terminal_weight": wt,
        "gain": gain,
        "sgr": sgr(w0, wt, days) if days > 0 and w0 > 0 and wt > 0 else None,
        "total_feed": total_feed,
    }
    try:
        out["fcr"] = fcr(total_feed, gain)
    except DegenerateGain:
        out["fcr"] = None
    if ref is not None:
        rw = ref.weights()
        n = min(len(w), len(rw))
        out["tracking_rmse"] = float(np.sqrt(np.mean((w[:n] - rw[:n]) ** 2)))
    else:
        out["tracking_rmse"] = None
    first = traj.records[0].state
    if isinstance(first, Population):
        p0 = first.p
        pt = traj.terminal_state.p
        out["survival"] = pt / p0 if p0 > 0 else None
    else:
        out["survival"] = 1.0
    rews = traj.rewards()
    out["episode_return"] = float(sum(rews)) if rews else None
    return out


@dataclass
class ScenarioResult:
    kind: str
    trajectory: object
    reference: object
    metrics: dict
    wall_seconds: float


def run_scenario(cfg, kind=None, episodes=None):
    """Execute one scenario end to end and collect metrics.

    For the hybrid controller, ``episodes`` closed-loop episodes share one
    Q table (the config's count by default); the last one is returned.
    """
    kind = cfg["controller"]["type"] if kind is None else kind
    if kind not in CONTROLLER_TYPES:
        raise ConfigError("controller.type",
                          f"must be one of {CONTROLLER_TYPES}")
    sim_cfg = build_sim(cfg)
    ref = None
    if _needs_reference(kind, cfg):
        ref = reference_trajectory(sim_cfg, cfg["run"]["f_ref"])
    t_start = time.perf_counter()
    if kind == "rlmpc":
        n_ep = cfg["controller.rlmpc"]["episodes"] \
            if episodes is None else episodes
        if n_ep < 1:
            raise ConfigError("controller.rlmpc.episodes",
                              "must be positive")
        controller = build_controller(kind, cfg, sim_cfg)
        for ep in range(n_ep):
            controller.episode = ep
            traj = simulate(sim_cfg, controller, ref=ref)
    else:
        controller = build_controller(kind, cfg, sim_cfg)
        traj = simulate(sim_cfg, controller, ref=ref)
    wall = time.perf_counter() - t_start
    metrics = compute_metrics(traj, sim_cfg.dt, sim_cfg.params, ref=ref)
    return ScenarioResult(kind=kind, trajectory=traj, reference=ref,
                          metrics=metrics, wall_seconds=wall)


def write_metrics_csv(path, results):
    """controller,metric,value rows in fixed order (no timing data)."""
    lines = ["controller,metric,value"]
    for res in results:
        for name in METRIC_NAMES:
            val = res.metrics.get(name)
            txt = "" if val is None else format(float(val), ".17g")
            lines.append(f"{res.kind},{name},{txt}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_metrics_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "controller,metric,value":
        raise ConfigError(str(path), "not a metrics file")
    out = {}
    for line in lines[1:]:
        kind, name, txt = line.split(",")
        out.setdefault(kind, {})[name] = float(txt) if txt else None
    return out


def text_report(results):
    """Aligned comparison table; includes wall-clock time."""
    width = max(len("controller"),
                max((len(r.kind) for r in results), default=0))
    cols = METRIC_NAMES + ("wall_s",)
    header = "controller".ljust(width) + "".join(
        f"  {c:>15}" for c in cols)
    lines = [header, "-" * len(header)]
    for res in results:
        row = res.kind.ljust(width)
        for name in METRIC_NAMES:
            val = res.metrics.get(name)
            row += f"  {'-':>15}" if val is None else f"  {val:>15.6g}"
        row += f"  {res.wall_seconds:>15.3f}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def compare(cfg, kinds, out_dir):
    """Run several controllers on one scenario and write the artifacts.

    Every run uses the scenario seed from the config, so the realized
    environment is identical across controllers.  Writes one trajectory
    CSV per controller plus metrics.csv and report.txt.
    """
    os.makedirs(out_dir, exist_ok=True)
    results = []
    for kind in kinds:
        res = run_scenario(cfg, kind=kind)
        traj_io.write_trajectory(
            os.path.join(out_dir, f"traj_{kind}.csv"), res.trajectory)
        results.append(res)
    write_metrics_csv(os.path.join(out_dir, "metrics.csv"), results)
    with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(text_report(results))
    return results
