"""Pure-Python numeric kernels.

This module is the reference backend: every expression is written in the
exact evaluation order that the compiled twin (``_core.pyx``) uses, so the
two backends produce bit-identical float64 results.  Parameters arrive as a
packed float64 vector (see ``PARAM_LAYOUT``); packing is done once per call
site by the caller.
"""

import math

BACKEND = "python"

# Index layout of the packed parameter vector.  Order is a fixed contract
# between both backends and the packing code in growth.py.
PARAM_LAYOUT = (
    "m", "n", "b", "a", "h", "k_min", "j", "kappa",
    "T_opt", "T_min", "T_max", "uia_crit", "uia_max", "do_lo", "do_hi",
    "Z", "beta", "eta", "mortality_scale", "r_frac",
)

_M = 0
_N = 1
_B = 2
_A = 3
_H = 4
_K_MIN = 5
_J = 6
_KAPPA = 7
_T_OPT = 8
_T_MIN = 9
_T_MAX = 10
_UIA_CRIT = 11
_UIA_MAX = 12
_DO_LO = 13
_DO_HI = 14
_Z = 15
_BETA = 16
_ETA = 17
_MORT_SCALE = 18
_R_FRAC = 19


def tau(T, pv):
    """Temperature growth factor, 1 at T_opt, quartic-exponential falloff."""
    t_opt = pv[_T_OPT]
    if T == t_opt:
        return 1.0
    if T > t_opt:
        x = (T - t_opt) / (pv[_T_MAX] - t_opt)
    else:
        x = (t_opt - T) / (t_opt - pv[_T_MIN])
    x2 = x * x
    return math.exp(-pv[_KAPPA] * x2 * x2)


def v_uia(UIA, pv):
    """Ammonia growth factor: 1 below the critical level, linear ramp to 0."""
    uc = pv[_UIA_CRIT]
    um = pv[_UIA_MAX]
    if UIA < uc:
        return 1.0
    if UIA <= um:
        return (um - UIA) / (um - uc)
    return 0.0


def sigma_do(DO, pv):
    """Dissolved-oxygen growth factor: 0 below do_lo, linear ramp, 1 above do_hi."""
    lo = pv[_DO_LO]
    hi = pv[_DO_HI]
    if DO >= hi:
        return 1.0
    if DO > lo:
        return (DO - lo) / (hi - lo)
    return 0.0


def kcat(T, pv):
    """Fasting catabolism coefficient k(T) = k_min * exp(j * (T - T_min))."""
    return pv[_K_MIN] * math.exp(pv[_J] * (T - pv[_T_MIN]))


def k1_mortality(UIA, pv):
    """Per-day ammonia mortality fraction (scaled logistic)."""
    return pv[_MORT_SCALE] * pv[_Z] / (1.0 + math.exp(-pv[_BETA] * (UIA - pv[_ETA])))


def psi(f, T, DO, rho, pv):
    """Anabolism coefficient h * rho * f * b * (1 - a) * tau(T) * sigma(DO)."""
    return pv[_H] * rho * f * pv[_B] * (1.0 - pv[_A]) * tau(T, pv) * sigma_do(DO, pv)


def rhs(w, f, T, DO, UIA, rho, pv):
    """Growth rate dw/dt = psi * v * w^m - k * w^n (total: w <= 0 gives 0 powers)."""
    if w > 0.0:
        wm = math.pow(w, pv[_M])
        wn = math.pow(w, pv[_N])
    else:
        wm = 0.0
        wn = 0.0
    return psi(f, T, DO, rho, pv) * v_uia(UIA, pv) * wm - kcat(T, pv) * wn


def step_w(w, f, T, DO, UIA, rho, dt, rk4, pv):
    """One integrator step for the individual weight ODE (euler or rk4)."""
    if rk4:
        s1 = rhs(w, f, T, DO, UIA, rho, pv)
        s2 = rhs(w + 0.5 * dt * s1, f, T, DO, UIA, rho, pv)
        s3 = rhs(w + 0.5 * dt * s2, f, T, DO, UIA, rho, pv)
        s4 = rhs(w + dt * s3, f, T, DO, UIA, rho, pv)
        return w + dt * (s1 + 2.0 * s2 + 2.0 * s3 + s4) / 6.0
    return w + dt * rhs(w, f, T, DO, UIA, rho, pv)


def stage_cost(w, w_ref, f, T, DO, UIA, rho, prev_f, prev_T, prev_DO,
               cost_kind, q_w, r_f, rate_w, price, feed_cost, pv):
    """Stage cost at one horizon step, before multiplication by dt.

    cost_kind 0 tracks w_ref quadratically; cost_kind 1 is negative profit
    (growth revenue minus feed expense).  A quadratic input-rate term with
    weight rate_w is added in both modes.
    """
    if cost_kind == 0:
        e = w - w_ref
        cost = q_w * e * e + r_f * f * f
    else:
        dw = rhs(w, f, T, DO, UIA, rho, pv)
        cost = -(price * dw - feed_cost * f * pv[_R_FRAC] * w)
    if rate_w != 0.0:
        df = f - prev_f
        dT = T - prev_T
        dD = DO - prev_DO
        cost += rate_w * (df * df + dT * dT + dD * dD)
    return cost


def rollout(w0, f_seq, T_seq, DO_seq, UIA_seq, rho_seq, dt, rk4, pv, w_out):
    """Roll the weight ODE along an input sequence, filling w_out[0..N]."""
    n = len(f_seq)
    w = w0
    w_out[0] = w
    for i in range(n):
        w = step_w(w, f_seq[i], T_seq[i], DO_seq[i], UIA_seq[i], rho_seq[i],
                   dt, rk4, pv)
        w_out[i + 1] = w
    return w


def horizon_costs(w0, F, Tc, Dc, UIA_seq, rho_seq, w_ref,
                  prev_f, prev_T, prev_DO, dt, rk4,
                  cost_kind, q_w, r_f, rate_w, price, feed_cost,
                  w_lo, w_hi, penalty, pv, J_out, viol_out):
    """Cost of S candidate input sequences over an N-step horizon.

    F, Tc, Dc are S x N input arrays; J_out[s] receives the left-endpoint
    Riemann objective plus ``penalty`` per state-bound violation, and
    viol_out[s] the violation count (0 means feasible).
    """
    n_cand = F.shape[0]
    n_steps = F.shape[1]
    for s in range(n_cand):
        w = w0
        total = 0.0
        nviol = 0
        pf = prev_f
        pT = prev_T
        pD = prev_DO
        for k in range(n_steps):
            f = F[s, k]
            T = Tc[s, k]
            D = Dc[s, k]
            ua = UIA_seq[k]
            rh = rho_seq[k]
            total += stage_cost(w, w_ref[k], f, T, D, ua, rh, pf, pT, pD,
                                cost_kind, q_w, r_f, rate_w, price,
                                feed_cost, pv) * dt
            w = step_w(w, f, T, D, ua, rh, dt, rk4, pv)
            if not (w_lo <= w <= w_hi):
                nviol += 1
                total += penalty
            pf = f
            pT = T
            pD = D
        J_out[s] = total
        viol_out[s] = nviol
