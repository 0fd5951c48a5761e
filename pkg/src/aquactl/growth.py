"""Bioenergetic fish growth model.

Individual growth follows a net-energy balance between anabolism and
fasting catabolism:

    dw/dt = psi(f, T, DO) * v(UIA) * w^m - k(T) * w^n

where w is fish weight in kcal, f is the relative feeding rate in [0, 1],
and the environment enters through four effect functions:

    tau(T)    temperature factor, 1 at T_opt with quartic-exponential
              falloff toward T_min and T_max
    sigma(DO) dissolved-oxygen factor, linear ramp between do_lo and do_hi
    v(UIA)    unionized-ammonia factor, linear ramp between uia_crit and
              uia_max
    k(T)      catabolism coefficient k_min * exp(j * (T - T_min))

The anabolism coefficient is psi = h * rho * f * b * (1 - a) * tau * sigma,
with b the food conversion efficiency, a the fraction of assimilated food
lost to wastes, h the feeding-catabolism coefficient, and rho a photoperiod
multiplier.

Tank-level (population) state is total biomass xi (kcal) and fish count p.
Biomass follows the same balance plus stocking inflow and mortality
outflow; the count drops by the integer part of p * k1(UIA) once per day,
where k1 is a logistic function of unionized ammonia.

All arithmetic is delegated to the kernel backends so the compiled and
pure-Python paths are numerically identical.
"""

import math
from dataclasses import dataclass, fields

import numpy as np

from aquactl import kernels
from aquactl.errors import DegenerateGain, ParamError


def _require(cond, key, message):
    if not cond:
        raise ParamError(key, message)


@dataclass(frozen=True)
class GrowthParams:
    """Model constants; defaults are the Nile tilapia calibration.

    Weight exponents must satisfy 0 < m < n < 1 so a positive fixed point
    exists under constant conditions.
    """

    m: float = 0.67
    n: float = 0.81
    b: float = 0.62
    a: float = 0.53
    h: float = 0.8
    k_min: float = 0.00133
    j: float = 0.0132
    kappa: float = 4.6
    T_opt: float = 33.0
    T_min: float = 24.0
    T_max: float = 40.0
    uia_crit: float = 0.06
    uia_max: float = 1.4
    do_lo: float = 0.3
    do_hi: float = 1.0
    Z: float = 99.41
    beta: float = 10.36
    eta: float = 0.80
    mortality_scale: float = 0.01
    r_frac: float = 0.1

    def __post_init__(self):
        _require(0.0 < self.m < 1.0, "m", "must lie in (0, 1)")
        _require(0.0 < self.n < 1.0, "n", "must lie in (0, 1)")
        _require(self.m < self.n, "m", "must be smaller than n")
        _require(0.0 < self.b <= 1.0, "b", "must lie in (0, 1]")
        _require(0.0 <= self.a < 1.0, "a", "must lie in [0, 1)")
        _require(self.h > 0.0, "h", "must be positive")
        _require(self.k_min > 0.0, "k_min", "must be positive")
        _require(self.j > 0.0, "j", "must be positive")
        _require(self.kappa > 0.0, "kappa", "must be positive")
        _require(self.T_min < self.T_opt < self.T_max, "T_opt",
                 "must lie strictly between T_min and T_max")
        _require(0.0 <= self.uia_crit < self.uia_max, "uia_crit",
                 "must satisfy 0 <= uia_crit < uia_max")
        _require(0.0 <= self.do_lo < self.do_hi, "do_lo",
                 "must satisfy 0 <= do_lo < do_hi")
        _require(self.Z > 0.0, "Z", "must be positive")
        _require(self.beta > 0.0, "beta", "must be positive")
        _require(self.eta > 0.0, "eta", "must be positive")
        _require(self.mortality_scale > 0.0, "mortality_scale",
                 "must be positive")
        _require(0.0 < self.r_frac <= 1.0, "r_frac", "must lie in (0, 1]")
        pv = np.array([getattr(self, name) for name in kernels.PARAM_LAYOUT],
                      dtype=np.float64)
        pv.flags.writeable = False
        object.__setattr__(self, "_pv", pv)

    def packed(self):
        """Read-only parameter vector in the kernel backend layout."""
        return self._pv


DEFAULT_PARAMS = GrowthParams()


@dataclass(frozen=True)
class EnvState:
    """Instantaneous environment seen by one fish (or one tank)."""

    f: float
    T: float
    DO: float
    UIA: float
    rho: float = 1.0

    def __post_init__(self):
        _require(0.0 <= self.f <= 1.0, "f", "must lie in [0, 1]")
        _require(math.isfinite(self.T), "T", "must be finite")
        _require(self.DO >= 0.0, "DO", "must be non-negative")
        _require(self.UIA >= 0.0, "UIA", "must be non-negative")
        _require(0.0 < self.rho < 2.0, "rho", "must lie in (0, 2)")


@dataclass(frozen=True)
class ControlAction:
    """Manipulated inputs: feeding rate, water temperature, oxygen."""

    f: float
    T: float
    DO: float

    def __post_init__(self):
        _require(0.0 <= self.f <= 1.0, "f", "must lie in [0, 1]")
        _require(math.isfinite(self.T), "T", "must be finite")
        _require(self.DO >= 0.0, "DO", "must be non-negative")


@dataclass(frozen=True)
class Individual:
    """State of a single fish: weight in kcal."""

    w: float

    def __post_init__(self):
        _require(self.w > 0.0 and math.isfinite(self.w), "w",
                 "must be positive and finite")


@dataclass(frozen=True)
class Population:
    """Tank state: total biomass xi (kcal) and fish count p."""

    xi: float
    p: int

    def __post_init__(self):
        _require(self.xi >= 0.0 and math.isfinite(self.xi), "xi",
                 "must be non-negative and finite")
        _require(isinstance(self.p, int) and self.p >= 0, "p",
                 "must be a non-negative integer")
        if self.p == 0:
            _require(self.xi == 0.0, "xi", "must be 0 when p = 0")


@dataclass(frozen=True)
class StockingPolicy:
    """Stocking inflow: p_s fish per day, each weighing xi_i kcal."""

    p_s: int = 0
    xi_i: float = 1.0

    def __post_init__(self):
        _require(isinstance(self.p_s, int) and self.p_s >= 0, "p_s",
                 "must be a non-negative integer")
        _require(self.xi_i > 0.0, "xi_i", "must be positive")


NO_STOCKING = StockingPolicy()


def tau_temperature(T, params=DEFAULT_PARAMS):
    """Temperature effect tau(T) in [0, 1], equal to 1 at T_opt."""
    _require(math.isfinite(T), "T", "must be finite")
    return kernels.tau(T, params.packed())


def v_ammonia(UIA, params=DEFAULT_PARAMS):
    """Unionized-ammonia effect v(UIA) in [0, 1]."""
    _require(UIA >= 0.0, "UIA", "must be non-negative")
    return kernels.v_uia(UIA, params.packed())


def sigma_oxygen(DO, params=DEFAULT_PARAMS):
    """Dissolved-oxygen effect sigma(DO) in [0, 1]."""
    _require(DO >= 0.0, "DO", "must be non-negative")
    return kernels.sigma_do(DO, params.packed())


def catabolism_k(T, params=DEFAULT_PARAMS):
    """Fasting catabolism coefficient k(T), equal to k_min at T_min."""
    _require(math.isfinite(T), "T", "must be finite")
    return kernels.kcat(T, params.packed())


def anabolism_psi(env, params=DEFAULT_PARAMS):
    """Anabolism coefficient psi for the given environment."""
    return kernels.psi(env.f, env.T, env.DO, env.rho, params.packed())


def mortality_k1(UIA, params=DEFAULT_PARAMS):
    """Per-day mortality fraction k1(UIA), a scaled logistic in UIA."""
    _require(UIA >= 0.0, "UIA", "must be non-negative")
    return kernels.k1_mortality(UIA, params.packed())


def individual_rhs(w, env, params=DEFAULT_PARAMS):
    """Growth rate dw/dt of a single fish at weight w under env."""
    _require(w > 0.0 and math.isfinite(w), "w", "must be positive and finite")
    return kernels.rhs(w, env.f, env.T, env.DO, env.UIA, env.rho,
                       params.packed())


def _population_dxi(xi, p, env, stocking, params, k1):
    """Biomass rate for raw (xi, p); total in xi so integrator stages are safe."""
    pv = params.packed()
    if xi > 0.0:
        anab = kernels.psi(env.f, env.T, env.DO, env.rho, pv) \
            * kernels.v_uia(env.UIA, pv) * math.pow(xi, params.m)
        catab = kernels.kcat(env.T, pv) * math.pow(xi, params.n)
        if p > 0:
            xi_a = xi / p
            mort = p * k1 * xi_a
        else:
            mort = 0.0
    else:
        anab = 0.0
        catab = 0.0
        mort = 0.0
    return stocking.p_s * stocking.xi_i + anab - catab - mort


def daily_deaths(p, k1):
    """Whole-fish deaths per day: floor(p * k1), never exceeding p."""
    return min(math.floor(p * k1), p)


def population_rhs(state, env, stocking=NO_STOCKING, params=DEFAULT_PARAMS,
                   k1_override=None):
    """Tank balance: biomass rate dxi/dt and count rate dp/dt.

    The count rate uses the floored integer deaths floor(p * k1), applied
    by the engine once per whole day.  k1_override replaces the
    ammonia-derived mortality fraction when given (0 disables mortality).

    Returns:
        (dxi_dt, dp_per_day) tuple.
    """
    xi = state.xi
    p = state.p
    if p == 0 and xi > 0.0:
        raise ParamError("p", "count is 0 but biomass is positive")
    if k1_override is None:
        k1 = kernels.k1_mortality(env.UIA, params.packed())
    else:
        _require(k1_override >= 0.0, "k1_override", "must be non-negative")
        k1 = k1_override
    dxi = _population_dxi(xi, p, env, stocking, params, k1)
    dp = stocking.p_s - daily_deaths(p, k1)
    return dxi, dp


def fcr(total_feed, weight_gain):
    """Feed conversion ratio: feed consumed per unit of weight gained.

    Raises DegenerateGain when the gain is zero or negative.
    """
    _require(total_feed >= 0.0, "total_feed", "must be non-negative")
    if weight_gain <= 0.0:
        raise DegenerateGain(
            f"weight gain {weight_gain} is not positive; ratio undefined")
    return total_feed / weight_gain


def sgr(w0, wf, days):
    """Specific growth rate in percent per day over the given span."""
    _require(w0 > 0.0, "w0", "must be positive")
    _require(wf > 0.0, "wf", "must be positive")
    _require(days > 0.0, "days", "must be positive")
    return 100.0 * (math.log(wf) - math.log(w0)) / days
