"""Figure builders over persisted CSV columns.

Every builder returns the matplotlib Figure together with a payload
dict holding exactly the numbers that were drawn, lifted verbatim from
the input files.  Nothing here recomputes model quantities; when a CSV
says tau was 1 at T = 33, that is what the panel shows, and the payload
is how the tests check it.  Output is deterministic: fixed styles, a
pinned SVG hash salt, and no embedded dates.
"""

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib
from matplotlib.figure import Figure

from report_plots.schema import (
    METRICS_COLUMNS,
    RETURNS_COLUMNS,
    TRAJECTORY_COLUMNS,
    floats,
    paired,
    read_columns,
)

KINDS = ("growth", "actions", "effects", "learning-curve", "comparison")

# fixed cycle so figure bytes do not depend on ambient rc state
CYCLE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_SAVE_RC = {"svg.hashsalt": "report-plots", "svg.fonttype": "path"}


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    inputs: tuple
    out: str
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def _labelled(ax, spec, xlabel, ylabel):
    ax.set_xlabel(spec.xlabel or xlabel)
    ax.set_ylabel(spec.ylabel or ylabel)


def _build_growth(spec):
    fig = Figure(figsize=(7.0, 4.5))
    ax = fig.add_subplot(1, 1, 1)
    series = []
    for i, path in enumerate(spec.inputs):
        cols = read_columns(path, ("t_day", "w_kcal", "xi_kcal"))
        t = floats(cols["t_day"])
        w = floats(cols["w_kcal"])
        if all(v is None for v in w):
            w = floats(cols["xi_kcal"])
        t, w = paired(t, w)
        label = Path(path).stem
        ax.plot(t, w, color=CYCLE[i % len(CYCLE)], label=label)
        series.append((label, t, w))
    ax.legend(loc="best")
    _labelled(ax, spec, "time (days)", "weight (kcal)")
    ax.set_title(spec.title or "growth")
    return fig, {"series": series}


def _build_actions(spec):
    path = spec.inputs[0]
    cols = read_columns(path, ("t_day", "f", "T_c", "DO_mgL"))
    t_all = floats(cols["t_day"])
    t, f = paired(t_all, floats(cols["f"]))
    t_T, T = paired(t_all, floats(cols["T_c"]))
    t_D, DO = paired(t_all, floats(cols["DO_mgL"]))

    fig = Figure(figsize=(7.0, 5.5))
    ax_f = fig.add_subplot(2, 1, 1)
    ax_f.step(t, f, where="post", color=CYCLE[0])
    ax_f.set_ylabel(spec.ylabel or "feed fraction")
    ax_f.set_title(spec.title or "applied inputs")
    ax_env = fig.add_subplot(2, 1, 2, sharex=ax_f)
    ax_env.step(t_T, T, where="post", color=CYCLE[1], label="T (C)")
    twin = ax_env.twinx()
    twin.step(t_D, DO, where="post", color=CYCLE[2], label="DO (mg/L)")
    ax_env.set_xlabel(spec.xlabel or "time (days)")
    ax_env.set_ylabel("T (C)")
    twin.set_ylabel("DO (mg/L)")
    return fig, {"t": t, "f": f, "T": (t_T, T), "DO": (t_D, DO)}


def _sorted_pair(xs, ys):
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    return [xs[i] for i in order], [ys[i] for i in order]


def _build_effects(spec):
    path = spec.inputs[0]
    cols = read_columns(
        path, ("T_c", "DO_mgL", "UIA_mgL", "tau", "sigma", "v", "k1"))
    T = floats(cols["T_c"])
    DO = floats(cols["DO_mgL"])
    UIA = floats(cols["UIA_mgL"])
    panels = {
        "tau": _sorted_pair(*paired(T, floats(cols["tau"]))),
        "sigma": _sorted_pair(*paired(DO, floats(cols["sigma"]))),
        "v": _sorted_pair(*paired(UIA, floats(cols["v"]))),
        "k1": _sorted_pair(*paired(UIA, floats(cols["k1"]))),
    }
    fig = Figure(figsize=(8.0, 6.0))
    labels = (("tau", "T (C)"), ("sigma", "DO (mg/L)"),
              ("v", "UIA (mg/L)"), ("k1", "UIA (mg/L)"))
    payload = dict(panels)
    for i, (name, xlabel) in enumerate(labels):
        ax = fig.add_subplot(2, 2, i + 1)
        xs, ys = panels[name]
        ax.plot(xs, ys, color=CYCLE[i], marker=".", markersize=3)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(name)
        if name == "tau" and ys:
            peak = max(range(len(ys)), key=lambda j: (ys[j], -j))
            payload["tau_peak"] = (xs[peak], ys[peak])
            ax.plot([xs[peak]], [ys[peak]], "o", color="black",
                    markersize=5, fillstyle="none")
            ax.annotate(f"peak ({xs[peak]:.6g}, {ys[peak]:.6g})",
                        (xs[peak], ys[peak]),
                        textcoords="offset points", xytext=(5, -10))
    if spec.title:
        fig.suptitle(spec.title)
    return fig, payload


def _build_learning_curve(spec):
    path = spec.inputs[0]
    cols = read_columns(path, RETURNS_COLUMNS)
    ep = [int(v) for v in cols["episode"]]
    ret = floats(cols["return"])
    fig = Figure(figsize=(7.0, 4.5))
    ax = fig.add_subplot(1, 1, 1)
    ax.plot(ep, ret, color=CYCLE[0])
    _labelled(ax, spec, "episode", "return")
    ax.set_title(spec.title or "training returns")
    return fig, {"episode": ep, "return": ret}


def _build_comparison(spec):
    path = spec.inputs[0]
    cols = read_columns(path, METRICS_COLUMNS)
    rows = list(zip(cols["controller"], cols["metric"],
                    floats(cols["value"])))
    by_metric = {}
    for controller, metric, value in rows:
        by_metric.setdefault(metric, []).append((controller, value))
    drawn = {m: vals for m, vals in by_metric.items()
             if any(v is not None for _, v in vals)}

    n = max(len(drawn), 1)
    ncols = min(n, 3)
    nrows = math.ceil(n / ncols)
    fig = Figure(figsize=(3.2 * ncols, 2.8 * nrows))
    for i, (metric, vals) in enumerate(drawn.items()):
        ax = fig.add_subplot(nrows, ncols, i + 1)
        names = [c for c, v in vals if v is not None]
        heights = [v for _, v in vals if v is not None]
        ax.bar(range(len(heights)), heights,
               color=[CYCLE[j % len(CYCLE)] for j in range(len(heights))])
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
        ax.set_title(metric, fontsize=9)
    if spec.title:
        fig.suptitle(spec.title)
    fig.subplots_adjust(hspace=0.6, wspace=0.4, bottom=0.18)
    return fig, {"metrics": by_metric}


_BUILDERS = {
    "growth": _build_growth,
    "actions": _build_actions,
    "effects": _build_effects,
    "learning-curve": _build_learning_curve,
    "comparison": _build_comparison,
}


def build(spec):
    """Figure plus the payload of plotted values, not yet written."""
    return _BUILDERS[spec.kind](spec)


def _metadata_for(out):
    # suppress the writer's embedded timestamp / version stamp so the
    # same inputs give the same bytes
    suffix = Path(out).suffix.lower()
    if suffix == ".svg":
        return {"Date": None}
    if suffix == ".png":
        return {"Software": None}
    if suffix == ".pdf":
        return {"CreationDate": None}
    return None


def render(spec):
    """Build and write the figure; returns the payload."""
    fig, payload = build(spec)
    with matplotlib.rc_context(_SAVE_RC):
        fig.savefig(spec.out, metadata=_metadata_for(spec.out))
    return payload
