# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels.

Expression-for-expression mirror of ``_reference.py``; both backends call
the same libm functions in the same order, so results match bit for bit.
Compiled with -ffp-contract=off so no fused multiply-adds sneak in.
"""

from libc.math cimport exp, pow

BACKEND = "compiled"

PARAM_LAYOUT = (
    "m", "n", "b", "a", "h", "k_min", "j", "kappa",
    "T_opt", "T_min", "T_max", "uia_crit", "uia_max", "do_lo", "do_hi",
    "Z", "beta", "eta", "mortality_scale", "r_frac",
)

cdef enum:
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


cdef inline double _tau(double T, const double[::1] pv) noexcept nogil:
    cdef double t_opt = pv[_T_OPT]
    cdef double x, x2
    if T == t_opt:
        return 1.0
    if T > t_opt:
        x = (T - t_opt) / (pv[_T_MAX] - t_opt)
    else:
        x = (t_opt - T) / (t_opt - pv[_T_MIN])
    x2 = x * x
    return exp(-pv[_KAPPA] * x2 * x2)


cdef inline double _v_uia(double UIA, const double[::1] pv) noexcept nogil:
    cdef double uc = pv[_UIA_CRIT]
    cdef double um = pv[_UIA_MAX]
    if UIA < uc:
        return 1.0
    if UIA <= um:
        return (um - UIA) / (um - uc)
    return 0.0


cdef inline double _sigma_do(double DO, const double[::1] pv) noexcept nogil:
    cdef double lo = pv[_DO_LO]
    cdef double hi = pv[_DO_HI]
    if DO >= hi:
        return 1.0
    if DO > lo:
        return (DO - lo) / (hi - lo)
    return 0.0


cdef inline double _kcat(double T, const double[::1] pv) noexcept nogil:
    return pv[_K_MIN] * exp(pv[_J] * (T - pv[_T_MIN]))


cdef inline double _k1(double UIA, const double[::1] pv) noexcept nogil:
    return pv[_MORT_SCALE] * pv[_Z] / (1.0 + exp(-pv[_BETA] * (UIA - pv[_ETA])))


cdef inline double _psi(double f, double T, double DO, double rho,
                        const double[::1] pv) noexcept nogil:
    return pv[_H] * rho * f * pv[_B] * (1.0 - pv[_A]) * _tau(T, pv) * _sigma_do(DO, pv)


cdef inline double _rhs(double w, double f, double T, double DO, double UIA,
                        double rho, const double[::1] pv) noexcept nogil:
    cdef double wm, wn
    if w > 0.0:
        wm = pow(w, pv[_M])
        wn = pow(w, pv[_N])
    else:
        wm = 0.0
        wn = 0.0
    return _psi(f, T, DO, rho, pv) * _v_uia(UIA, pv) * wm - _kcat(T, pv) * wn


cdef inline double _step_w(double w, double f, double T, double DO, double UIA,
                           double rho, double dt, bint rk4,
                           const double[::1] pv) noexcept nogil:
    cdef double s1, s2, s3, s4
    if rk4:
        s1 = _rhs(w, f, T, DO, UIA, rho, pv)
        s2 = _rhs(w + 0.5 * dt * s1, f, T, DO, UIA, rho, pv)
        s3 = _rhs(w + 0.5 * dt * s2, f, T, DO, UIA, rho, pv)
        s4 = _rhs(w + dt * s3, f, T, DO, UIA, rho, pv)
        return w + dt * (s1 + 2.0 * s2 + 2.0 * s3 + s4) / 6.0
    return w + dt * _rhs(w, f, T, DO, UIA, rho, pv)


cdef inline double _stage_cost(double w, double w_ref, double f, double T,
                               double DO, double UIA, double rho,
                               double prev_f, double prev_T, double prev_DO,
                               int cost_kind, double q_w, double r_f,
                               double rate_w, double price, double feed_cost,
                               const double[::1] pv) noexcept nogil:
    cdef double e, cost, dw, df, dT, dD
    if cost_kind == 0:
        e = w - w_ref
        cost = q_w * e * e + r_f * f * f
    else:
        dw = _rhs(w, f, T, DO, UIA, rho, pv)
        cost = -(price * dw - feed_cost * f * pv[_R_FRAC] * w)
    if rate_w != 0.0:
        df = f - prev_f
        dT = T - prev_T
        dD = DO - prev_DO
        cost += rate_w * (df * df + dT * dT + dD * dD)
    return cost


def tau(double T, const double[::1] pv):
    """Temperature growth factor, 1 at T_opt, quartic-exponential falloff."""
    return _tau(T, pv)


def v_uia(double UIA, const double[::1] pv):
    """Ammonia growth factor: 1 below the critical level, linear ramp to 0."""
    return _v_uia(UIA, pv)


def sigma_do(double DO, const double[::1] pv):
    """Dissolved-oxygen growth factor: 0 below do_lo, linear ramp, 1 above do_hi."""
    return _sigma_do(DO, pv)


def kcat(double T, const double[::1] pv):
    """Fasting catabolism coefficient k(T) = k_min * exp(j * (T - T_min))."""
    return _kcat(T, pv)


def k1_mortality(double UIA, const double[::1] pv):
    """Per-day ammonia mortality fraction (scaled logistic)."""
    return _k1(UIA, pv)


def psi(double f, double T, double DO, double rho, const double[::1] pv):
    """Anabolism coefficient h * rho * f * b * (1 - a) * tau(T) * sigma(DO)."""
    return _psi(f, T, DO, rho, pv)


def rhs(double w, double f, double T, double DO, double UIA, double rho,
        const double[::1] pv):
    """Growth rate dw/dt = psi * v * w^m - k * w^n (total: w <= 0 gives 0 powers)."""
    return _rhs(w, f, T, DO, UIA, rho, pv)


def step_w(double w, double f, double T, double DO, double UIA, double rho,
           double dt, bint rk4, const double[::1] pv):
    """One integrator step for the individual weight ODE (euler or rk4)."""
    return _step_w(w, f, T, DO, UIA, rho, dt, rk4, pv)


def stage_cost(double w, double w_ref, double f, double T, double DO,
               double UIA, double rho, double prev_f, double prev_T,
               double prev_DO, int cost_kind, double q_w, double r_f,
               double rate_w, double price, double feed_cost,
               const double[::1] pv):
    """Stage cost at one horizon step, before multiplication by dt."""
    return _stage_cost(w, w_ref, f, T, DO, UIA, rho, prev_f, prev_T, prev_DO,
                       cost_kind, q_w, r_f, rate_w, price, feed_cost, pv)


def rollout(double w0, const double[::1] f_seq, const double[::1] T_seq,
            const double[::1] DO_seq, const double[::1] UIA_seq,
            const double[::1] rho_seq, double dt, bint rk4,
            const double[::1] pv, double[::1] w_out):
    """Roll the weight ODE along an input sequence, filling w_out[0..N]."""
    cdef Py_ssize_t n = f_seq.shape[0]
    cdef Py_ssize_t i
    cdef double w = w0
    w_out[0] = w
    for i in range(n):
        w = _step_w(w, f_seq[i], T_seq[i], DO_seq[i], UIA_seq[i], rho_seq[i],
                    dt, rk4, pv)
        w_out[i + 1] = w
    return w


def horizon_costs(double w0, const double[:, ::1] F, const double[:, ::1] Tc,
                  const double[:, ::1] Dc, const double[::1] UIA_seq,
                  const double[::1] rho_seq, const double[::1] w_ref,
                  double prev_f, double prev_T, double prev_DO,
                  double dt, bint rk4, int cost_kind, double q_w, double r_f,
                  double rate_w, double price, double feed_cost,
                  double w_lo, double w_hi, double penalty,
                  const double[::1] pv, double[::1] J_out, long[::1] viol_out):
    """Cost of S candidate input sequences over an N-step horizon."""
    cdef Py_ssize_t n_cand = F.shape[0]
    cdef Py_ssize_t n_steps = F.shape[1]
    cdef Py_ssize_t s, k
    cdef double w, total, pf, pT, pD, f, T, D, ua, rh
    cdef long nviol
    with nogil:
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
                total += _stage_cost(w, w_ref[k], f, T, D, ua, rh, pf, pT, pD,
                                     cost_kind, q_w, r_f, rate_w, price,
                                     feed_cost, pv) * dt
                w = _step_w(w, f, T, D, ua, rh, dt, rk4, pv)
                if not (w_lo <= w <= w_hi):
                    nviol += 1
                    total += penalty
                pf = f
                pT = T
                pD = D
            J_out[s] = total
            viol_out[s] = nviol
