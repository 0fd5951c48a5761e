"""Scenario files: INI text in, typed section dicts out, and back.

A scenario is a flat two-level structure (sections of scalar keys), which
plain INI expresses without any nesting tricks; dotted section names such
as ``controller.mpc`` group the per-controller settings.  Every key has a
typed default, unknown sections or keys are rejected, and error paths are
dotted (``controller.mpc.horizon``) so a failure points at one line of
the file.

``dump_config`` is canonical: fixed section and key order, floats via
repr.  Exporting the defaults, parsing the text and exporting again
yields byte-identical output, which keeps scenario files diffable.
"""

import configparser
import io

from aquactl.errors import ConfigError

# type tags: how a raw string becomes a value and back
F = "float"
I = "int"
B = "bool"
S = "str"
FL = "floats"     # comma-separated floats -> tuple
OF = "optfloat"   # empty string -> None
OI = "optint"
OS = "optstr"

_CHANNEL = (
    ("kind", S, "constant"),
    ("value", F, 0.0),
    ("amplitude", F, 0.0),
    ("period", F, 365.0),
    ("phase", F, 0.0),
    ("times", FL, ()),
    ("values", FL, ()),
    ("noise_std", F, 0.0),
)


def _channel(value):
    return tuple((k, t, value if k == "value" else d) for k, t, d in _CHANNEL)


# section -> ordered (key, type, default); this is the whole file format
SCHEMA = (
    ("model", (
        ("m", F, 0.67),
        ("n", F, 0.81),
        ("b", F, 0.62),
        ("a", F, 0.53),
        ("h", F, 0.8),
        ("k_min", F, 0.00133),
        ("j", F, 0.0132),
        ("kappa", F, 4.6),
        ("T_opt", F, 33.0),
        ("T_min", F, 24.0),
        ("T_max", F, 40.0),
        ("uia_crit", F, 0.06),
        ("uia_max", F, 1.4),
        ("do_lo", F, 0.3),
        ("do_hi", F, 1.0),
        ("Z", F, 99.41),
        ("beta", F, 10.36),
        ("eta", F, 0.8),
        ("mortality_scale", F, 0.01),
        ("r_frac", F, 0.1),
    )),
    ("environment.T", _channel(28.0)),
    ("environment.DO", _channel(6.0)),
    ("environment.UIA", _channel(0.01)),
    ("environment.rho", _channel(1.0)),
    ("run", (
        ("model", S, "individual"),
        ("w0", F, 100.0),
        ("xi0", F, 100.0),
        ("p0", I, 1),
        ("t0", F, 0.0),
        ("tf", F, 60.0),
        ("dt", F, 1.0),
        ("integrator", S, "rk4"),
        ("seed", I, 0),
        ("mortality", B, True),
        ("p_s", I, 0),
        ("xi_i", F, 1.0),
        ("f_ref", F, 0.6),
        ("out", OS, None),
    )),
    ("controller", (
        ("type", S, "constant"),
    )),
    ("controller.constant", (
        ("f", F, 0.5),
        ("T", OF, None),
        ("DO", OF, None),
    )),
    ("controller.bangbang", (
        ("setpoint", F, 30.0),
        ("on_value", F, 1.0),
        ("off_value", F, 0.0),
        ("deadband", F, 0.0),
        ("channel", S, "T"),
        ("measure", S, "T"),
        ("base_f", OF, 0.5),
        ("base_T", OF, None),
        ("base_DO", OF, None),
    )),
    ("controller.pid", (
        ("kp", F, 0.001),
        ("ki", F, 0.0),
        ("kd", F, 0.0),
        ("u_min", F, 0.0),
        ("u_max", F, 1.0),
        ("integral_limit", F, 1e18),
        ("derivative_filter", B, False),
        ("channel", S, "f"),
        ("measure", S, "w"),
        ("setpoint", OF, None),
        ("track_reference", B, True),
        ("base_f", OF, 0.5),
        ("base_T", OF, None),
        ("base_DO", OF, None),
    )),
    ("controller.mpc", (
        ("horizon", I, 10),
        ("control_horizon", OI, None),
        ("u_min", FL, (0.0, 0.0, 0.0)),
        ("u_max", FL, (1.0, 45.0, 20.0)),
        ("control_T", B, False),
        ("control_DO", B, False),
        ("w_min", F, 1e-6),
        ("w_max", F, 1e12),
        ("cost", S, "tracking"),
        ("q_w", F, 1.0),
        ("r_f", F, 0.0),
        ("rate_weight", F, 0.0),
        ("price", F, 1.0),
        ("feed_cost", F, 0.1),
        ("samples", I, 64),
        ("elites", I, 8),
        ("iterations", I, 4),
        ("init_std_frac", F, 0.25),
        ("std_floor_frac", F, 0.01),
        ("lattice_f", FL, ()),
        ("exhaustive", B, False),
        ("penalty", F, 1e9),
    )),
    ("controller.qlearning", (
        ("w_lo", F, 1.0),
        ("w_hi", F, 5000.0),
        ("n_bins", I, 64),
        ("f_levels", FL, (0.0, 0.25, 0.5, 0.75, 1.0)),
        ("action_T", F, 33.0),
        ("action_DO", F, 1.0),
        ("xi_d", F, 400.0),
        ("t_f", F, 60.0),
        ("feed_cost", F, 0.1),
        ("terminal_bonus", F, 0.0),
        ("day_bins", I, 0),
        ("alpha", F, 0.1),
        ("gamma", F, 0.95),
        ("eps0", F, 0.9),
        ("t_eps", F, 100.0),
        ("eps_min", F, 0.01),
        ("annealing", S, "decay"),
        ("episodes", I, 500),
        ("patience", I, 10),
        ("max_steps", I, 10000),
    )),
    ("controller.rlmpc", (
        ("alpha", F, 0.5),
        ("guide0", F, 1.0),
        ("t_guide", F, 50.0),
        ("guide_min", F, 0.1),
        ("w_lo", F, 1.0),
        ("w_hi", F, 5000.0),
        ("n_bins", I, 64),
        ("f_levels", FL, (0.0, 0.25, 0.5, 0.75, 1.0)),
        ("episodes", I, 1),
    )),
)

_SECTIONS = {name: fields for name, fields in SCHEMA}


def default_config():
    """The full scenario with every key at its default."""
    return {name: {k: d for k, _, d in fields} for name, fields in SCHEMA}


def _parse_value(raw, kind, path):
    raw = raw.strip()
    try:
        if kind == F:
            return float(raw)
        if kind == I:
            return int(raw)
        if kind == B:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == S:
            return raw
        if kind == FL:
            if not raw:
                return ()
            return tuple(float(p) for p in raw.split(","))
        if kind == OF:
            return None if not raw else float(raw)
        if kind == OI:
            return None if not raw else int(raw)
        if kind == OS:
            return None if not raw else raw
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None
    raise ConfigError(path, f"unknown type tag {kind!r}")


def _format_value(value, kind):
    if value is None:
        return ""
    if kind in (F, OF):
        return repr(float(value))
    if kind in (I, OI):
        return str(int(value))
    if kind == B:
        return "true" if value else "false"
    if kind == FL:
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


def parse_config(text):
    """Typed config dict from INI text; rejects anything off-schema."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case-sensitive (T_opt, DO, ...)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("file", f"malformed INI: {exc}") from None
    cfg = default_config()
    types = {name: {k: t for k, t, _ in fields} for name, fields in SCHEMA}
    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(section, "unknown section")
        for key, raw in cp.items(section):
            path = f"{section}.{key}"
            if key not in types[section]:
                raise ConfigError(path, "unknown key")
            cfg[section][key] = _parse_value(raw, types[section][key], path)
    return cfg


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read: {exc}") from None
    return parse_config(text)


def dump_config(cfg):
    """Canonical INI text: schema order, repr floats, LF endings."""
    buf = io.StringIO()
    first = True
    for name, fields in SCHEMA:
        if not first:
            buf.write("\n")
        first = False
        buf.write(f"[{name}]\n")
        section = cfg.get(name, {})
        for key, kind, default in fields:
            value = section.get(key, default)
            buf.write(f"{key} = {_format_value(value, kind)}\n")
    return buf.getvalue()


def save_config(cfg, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_config(cfg))
