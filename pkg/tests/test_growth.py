"""Effect functions, rate terms and parameter validation."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aquactl.errors import DegenerateGain, ParamError
from aquactl.growth import (
    DEFAULT_PARAMS,
    ControlAction,
    EnvState,
    GrowthParams,
    Individual,
    Population,
    StockingPolicy,
    anabolism_psi,
    catabolism_k,
    daily_deaths,
    fcr,
    individual_rhs,
    mortality_k1,
    population_rhs,
    sgr,
    sigma_oxygen,
    tau_temperature,
    v_ammonia,
)

P = DEFAULT_PARAMS

# high-precision evaluations of the documented formulas at probe points,
# frozen to 17 digits; kernel results may differ by float rounding only
EXP_M46 = 0.010051835744633583          # exp(-4.6)
TAU_30 = 0.944792338309811              # exp(-4.6 * (3/9)^4)
TAU_36 = 0.8562564646809102             # exp(-4.6 * (3/7)^4)
K_33 = 0.0014977724068846873            # 0.00133 * exp(0.0132 * 9)
K_40 = 0.0016427619517689596            # 0.00133 * exp(0.0132 * 16)
K1_0 = 0.0002499701720218215            # 0.9941 / (1 + exp(8.288))
K1_2 = 0.9940960346699387               # 0.9941 / (1 + exp(-12.432))
ANAB_100 = 2.550054948875599            # psi(f=0.5) * 100^0.67
CATAB_100 = 0.06243754598368999         # k(33) * 100^0.81
RHS_100 = 2.487617402891909


def test_tau_peak_is_exact_one():
    assert tau_temperature(33.0) == 1.0


def test_tau_endpoints_match_closed_form():
    assert abs(tau_temperature(24.0) - EXP_M46) <= 1e-12
    assert abs(tau_temperature(40.0) - EXP_M46) <= 1e-12


def test_tau_interior_values():
    assert abs(tau_temperature(30.0) - TAU_30) <= 1e-14
    assert abs(tau_temperature(36.0) - TAU_36) <= 1e-14


def test_tau_sides_are_independent_scales():
    # 3 degrees below uses the 9-degree span, 3 above the 7-degree span
    assert tau_temperature(30.0) != tau_temperature(36.0)


def test_v_plateau_ramp_and_cutoff():
    assert v_ammonia(0.0) == 1.0
    assert v_ammonia(0.0599) == 1.0
    assert abs(v_ammonia(0.73) - 0.5) <= 1e-12
    assert v_ammonia(1.4) == 0.0
    assert v_ammonia(5.0) == 0.0


def test_sigma_cutoff_ramp_and_plateau():
    assert sigma_oxygen(0.0) == 0.0
    assert sigma_oxygen(0.3) == 0.0
    assert abs(sigma_oxygen(0.65) - 0.5) <= 1e-12
    assert abs(sigma_oxygen(0.5) - 0.2857142857142857) <= 1e-15
    assert sigma_oxygen(1.0) == 1.0
    assert sigma_oxygen(8.0) == 1.0


def test_catabolism_reference_points():
    assert catabolism_k(24.0) == 0.00133  # exp(0) factor is exact
    assert abs(catabolism_k(33.0) - K_33) <= 1e-16
    assert abs(catabolism_k(40.0) - K_40) <= 1e-16


def test_mortality_logistic_points():
    assert abs(mortality_k1(0.0) - K1_0) / K1_0 <= 1e-13
    # at the midpoint the sigmoid denominator is exactly 2
    assert mortality_k1(0.8) == 0.01 * 99.41 / 2.0
    assert abs(mortality_k1(2.0) - K1_2) <= 1e-14


def test_anabolism_composition():
    env = EnvState(f=0.5, T=33.0, DO=2.0, UIA=0.0)
    assert abs(anabolism_psi(env) - 0.11656) <= 1e-15
    env = EnvState(f=1.0, T=40.0, DO=6.0, UIA=0.0)
    assert abs(anabolism_psi(env) - 0.0023432839487889804) <= 1e-14


def test_rhs_at_reference_weight():
    env = EnvState(f=0.5, T=33.0, DO=6.0, UIA=0.0)
    got = individual_rhs(100.0, env)
    assert abs(got - RHS_100) / RHS_100 <= 1e-13
    # and the two contributions separately
    assert abs(anabolism_psi(env) * 100.0 ** 0.67 - ANAB_100) <= 1e-12
    assert abs(catabolism_k(33.0) * 100.0 ** 0.81 - CATAB_100) <= 1e-14


def test_rhs_rejects_nonpositive_weight():
    env = EnvState(f=0.5, T=28.0, DO=6.0, UIA=0.0)
    with pytest.raises(ParamError):
        individual_rhs(0.0, env)
    with pytest.raises(ParamError):
        individual_rhs(-1.0, env)


@given(st.floats(min_value=-10.0, max_value=60.0,
                 allow_nan=False, allow_infinity=False))
def test_tau_bounded(T):
    assert 0.0 <= tau_temperature(T) <= 1.0


@given(st.floats(min_value=0.0, max_value=10.0,
                 allow_nan=False, allow_infinity=False))
def test_v_bounded(uia):
    assert 0.0 <= v_ammonia(uia) <= 1.0


@given(st.floats(min_value=0.0, max_value=30.0,
                 allow_nan=False, allow_infinity=False))
def test_sigma_bounded(do):
    assert 0.0 <= sigma_oxygen(do) <= 1.0


@given(st.floats(min_value=0.0, max_value=10.0, allow_nan=False),
       st.floats(min_value=0.0, max_value=10.0, allow_nan=False))
def test_v_nonincreasing(a, b):
    lo, hi = min(a, b), max(a, b)
    assert v_ammonia(lo) >= v_ammonia(hi)


@given(st.floats(min_value=0.0, max_value=30.0, allow_nan=False),
       st.floats(min_value=0.0, max_value=30.0, allow_nan=False))
def test_sigma_nondecreasing(a, b):
    lo, hi = min(a, b), max(a, b)
    assert sigma_oxygen(lo) <= sigma_oxygen(hi)


@given(st.floats(min_value=-20.0, max_value=60.0, allow_nan=False),
       st.floats(min_value=-20.0, max_value=60.0, allow_nan=False))
def test_catabolism_increasing_in_temperature(a, b):
    lo, hi = min(a, b), max(a, b)
    assert catabolism_k(lo) <= catabolism_k(hi)
    assert catabolism_k(lo) > 0.0


@given(st.floats(min_value=0.0, max_value=5.0, allow_nan=False),
       st.floats(min_value=0.0, max_value=5.0, allow_nan=False))
def test_mortality_increasing_and_bounded(a, b):
    lo, hi = min(a, b), max(a, b)
    assert mortality_k1(lo) <= mortality_k1(hi)
    # the logistic saturates to the asymptote exactly once exp underflows
    assert 0.0 < mortality_k1(lo) <= 0.01 * 99.41


@given(st.floats(min_value=0.01, max_value=1.0, allow_nan=False),
       st.floats(min_value=0.1, max_value=1.9, allow_nan=False))
@settings(max_examples=50)
def test_psi_linear_in_feed_and_density(f, rho):
    base = EnvState(f=1.0, T=30.0, DO=6.0, UIA=0.0, rho=1.0)
    scaled = EnvState(f=f, T=30.0, DO=6.0, UIA=0.0, rho=rho)
    assert anabolism_psi(scaled) == pytest.approx(
        anabolism_psi(base) * f * rho, rel=1e-12)


@given(st.floats(min_value=1e-3, max_value=1e6, allow_nan=False))
@settings(max_examples=200)
def test_rhs_below_equilibrium_positive_above_negative(w):
    # at full ration and optimal environment the balance point is huge,
    # so any farm-scale weight grows; with zero feed it always shrinks
    grow = EnvState(f=1.0, T=33.0, DO=6.0, UIA=0.0)
    starve = EnvState(f=0.0, T=33.0, DO=6.0, UIA=0.0)
    assert individual_rhs(w, grow) > 0.0
    assert individual_rhs(w, starve) < 0.0


def test_param_validation_rejects_out_of_range():
    bad = [
        dict(m=0.0), dict(m=1.0), dict(n=1.2), dict(b=0.0), dict(a=1.0),
        dict(h=-0.1), dict(k_min=0.0), dict(j=0.0), dict(kappa=0.0),
        dict(T_opt=50.0),              # above T_max
        dict(T_min=40.0),              # at T_opt boundary collapse
        dict(uia_crit=2.0),            # above uia_max
        dict(do_lo=1.5),               # above do_hi
        dict(Z=0.0), dict(beta=0.0), dict(eta=-1.0),
        dict(mortality_scale=-0.01), dict(r_frac=0.0),
    ]
    for kwargs in bad:
        with pytest.raises(ParamError):
            GrowthParams(**kwargs)


def test_param_error_carries_key():
    with pytest.raises(ParamError) as exc:
        GrowthParams(m=2.0)
    assert exc.value.key == "m"


def test_packed_layout_matches_fields():
    pv = P.packed()
    assert pv[0] == P.m and pv[1] == P.n
    assert pv[8] == P.T_opt
    assert pv[19] == P.r_frac
    assert len(pv) == 20
    with pytest.raises(ValueError):
        pv[0] = 99.0  # packed vector is frozen


def test_env_state_validation():
    with pytest.raises(ParamError):
        EnvState(f=-0.1, T=28.0, DO=6.0, UIA=0.0)
    with pytest.raises(ParamError):
        EnvState(f=1.1, T=28.0, DO=6.0, UIA=0.0)
    with pytest.raises(ParamError):
        EnvState(f=0.5, T=28.0, DO=-1.0, UIA=0.0)
    with pytest.raises(ParamError):
        EnvState(f=0.5, T=28.0, DO=6.0, UIA=-0.2)
    with pytest.raises(ParamError):
        EnvState(f=0.5, T=28.0, DO=6.0, UIA=0.0, rho=2.0)


def test_state_types_validate():
    with pytest.raises(ParamError):
        Individual(0.0)
    with pytest.raises(ParamError):
        Individual(float("nan"))
    with pytest.raises(ParamError):
        Population(xi=-1.0, p=10)
    with pytest.raises(ParamError):
        Population(xi=5.0, p=0)  # empty tank cannot carry biomass
    Population(xi=0.0, p=0)


def test_daily_deaths_floor_and_cap():
    assert daily_deaths(1000, 0.49705) == 497
    assert daily_deaths(1000, 0.0) == 0
    assert daily_deaths(3, 0.9) == 2
    assert daily_deaths(3, 2.0) == 3  # never more deaths than fish


def test_population_rhs_mortality_and_stocking():
    env = EnvState(f=0.5, T=28.0, DO=6.0, UIA=0.0)
    state = Population(xi=500.0, p=100)
    stock = StockingPolicy(p_s=5, xi_i=2.0)
    dxi, dp = population_rhs(state, env, stocking=stock)
    # biomass change includes the stocking inflow and the mortality drain
    k1 = mortality_k1(0.0)
    base_dxi, _ = population_rhs(state, env, stocking=stock, k1_override=0.0)
    assert dxi == pytest.approx(base_dxi - 100 * k1 * (500.0 / 100), rel=1e-12)
    assert dp == 5 - daily_deaths(100, k1)


def test_population_rhs_degenerate_matches_individual():
    env = EnvState(f=0.5, T=28.0, DO=6.0, UIA=0.0)
    w = 123.456
    dxi, dp = population_rhs(Population(xi=w, p=1), env, k1_override=0.0)
    assert dxi == individual_rhs(w, env)
    assert dp == 0


def test_fcr_and_sgr():
    assert fcr(30.0, 20.0) == 1.5
    with pytest.raises(DegenerateGain):
        fcr(10.0, 0.0)
    with pytest.raises(DegenerateGain):
        fcr(10.0, -3.0)
    assert abs(sgr(100.0, 200.0, 70.0) - 0.9902102579427791) <= 1e-13
    assert abs(sgr(50.0, 500.0, 100.0) - 2.302585092994046) <= 1e-13


def test_params_accept_custom_ranges():
    p = GrowthParams(T_opt=30.0, T_min=20.0, T_max=38.0)
    assert tau_temperature(30.0, p) == 1.0
    assert abs(tau_temperature(20.0, p) - math.exp(-4.6)) <= 1e-12


def test_control_action_fields():
    a = ControlAction(f=0.5, T=28.0, DO=6.0)
    assert (a.f, a.T, a.DO) == (0.5, 28.0, 6.0)
