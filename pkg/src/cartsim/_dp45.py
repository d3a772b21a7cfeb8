"""Dormand-Prince 5(4) stepper specialized to the three-population model.

Hand-rolled and JIT-compiled so that year-long solves cost well under a
millisecond: sweeps and sensitivity runs need tens of thousands of them.
The kernel carries the standard DP pair with its quartic dense-output
interpolant, detects local maxima of L through the sign change of
g(t) = rho_L - alpha*C(t) (the growth factor in dL/dt = L*g), refines
events by bisection on the dense output, guards against divergence with
a component cap, and stores decimated samples so multi-year runs stay
small.

Termination statuses: 0 = TimeEnd, 1 = Blowup, 2 = Tolerance.
"""

import numpy as np
from numba import njit

STATUS_TIME_END = 0
STATUS_BLOWUP = 1
STATUS_TOLERANCE = 2

# Butcher tableau of the Dormand-Prince 5(4) pair.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
        [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
    ]
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# Difference between the 5th- and 4th-order weights (error estimate).
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# Dense-output polynomial: y(t+theta*h) = y + h * (K^T P) @ (theta..theta^4).
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
         -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
         87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
         -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
         701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883,
         -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


@njit(cache=True, inline="always")
def _f(c, l, b, rho_c, inv_tau_c, rho_l, alpha, src, i0, inv_tau_b):
    dc = c * (rho_c * (l + b + i0) - inv_tau_c)
    dl = l * (rho_l - alpha * c)
    db = src - b * (alpha * c + inv_tau_b)
    return dc, dl, db


@njit(cache=True, inline="always")
def _dense(y0, h, q, comp, theta):
    # Quartic interpolant for one component over the accepted step.
    acc = q[comp, 3]
    acc = acc * theta + q[comp, 2]
    acc = acc * theta + q[comp, 1]
    acc = acc * theta + q[comp, 0]
    return y0[comp] + h * theta * acc


@njit(cache=True)
def dp45_run(rho_c, tau_c, rho_l, alpha, i0, tau_i, tau_b,
             c0, l0, b0, t0, t_end,
             rtol, atol, cap, min_step, max_step,
             max_peaks, stop_after_peaks, l3, floor_rel,
             max_samples):
    """Integrate from (c0, l0, b0) at t0 to t_end.

    Returns (status, ts, ys, peak_t, peak_states, blow_t) with ts/ys the
    decimated accepted-step samples (ys rows are (C, L, B)), peak_t the
    refined times of local maxima of L, peak_states the states there,
    and blow_t the refined first cap-exceedance time (NaN if none).
    Peak collection stops at ``max_peaks`` or, when ``floor_rel`` > 0
    and ``l3`` > 0, once |peak - l3| < floor_rel*l3; if
    ``stop_after_peaks`` the whole run stops there too.
    """
    inv_tau_c = 1.0 / tau_c
    inv_tau_b = 1.0 / tau_b
    src = i0 / tau_i

    ts = np.empty(max_samples + 2)
    ys = np.empty((max_samples + 2, 3))
    peak_t = np.empty(max_peaks)
    peak_states = np.empty((max_peaks, 3))
    n_peaks = 0
    blow_t = np.nan

    k = np.empty((7, 3))
    yt = np.empty(3)
    y = np.empty(3)
    y_new = np.empty(3)
    q = np.empty((3, 4))

    y[0], y[1], y[2] = c0, l0, b0
    t = t0
    ts[0] = t0
    ys[0, 0], ys[0, 1], ys[0, 2] = c0, l0, b0
    n_stored = 1
    stride = 1
    since_last = 0

    dc, dl, db = _f(y[0], y[1], y[2], rho_c, inv_tau_c, rho_l, alpha, src,
                    i0, inv_tau_b)
    k[0, 0], k[0, 1], k[0, 2] = dc, dl, db

    # Initial step size from the scaled magnitudes of y and f.
    d0 = 0.0
    d1 = 0.0
    for i in range(3):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (k[0, i] / sc) ** 2
    d0 = np.sqrt(d0 / 3.0)
    d1 = np.sqrt(d1 / 3.0)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    for i in range(3):
        yt[i] = y[i] + h0 * k[0, i]
    dc, dl, db = _f(yt[0], yt[1], yt[2], rho_c, inv_tau_c, rho_l, alpha, src,
                    i0, inv_tau_b)
    sc0 = atol + rtol * abs(y[0])
    sc1 = atol + rtol * abs(y[1])
    sc2 = atol + rtol * abs(y[2])
    d2 = np.sqrt((((dc - k[0, 0]) / sc0) ** 2 + ((dl - k[0, 1]) / sc1) ** 2
                  + ((db - k[0, 2]) / sc2) ** 2) / 3.0) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    h = min(100.0 * h0, h1)
    if h > max_step:
        h = max_step
    if h > t_end - t0:
        h = t_end - t0

    status = STATUS_TIME_END
    rejected_last = False
    peaks_done = max_peaks == 0
    floor_on = floor_rel > 0.0 and l3 > 0.0
    # With I0 above 1/(tau_C*rho_C), dC/dt > 0 everywhere in the
    # nonnegative octant, so C crosses rho_L/alpha upward exactly once:
    # after the first peak no further one can exist.
    c_monotone = i0 * rho_c * tau_c > 1.0

    while t < t_end:
        last = False
        if h > max_step:
            h = max_step
        # Once L sits below the absolute-tolerance floor it no longer
        # constrains the step, yet its mode g = rho_L - alpha*C can put
        # g*h far outside the pair's stability region; a deep crash
        # would then bottom out at tolerance-level garbage instead of
        # the true exponential depth, and the regrowth that follows
        # would exit hundreds of days early.  Keep |g|*h <= 1 while L
        # is positive; the extra steps are bounded by the number of
        # e-foldings down to underflow.
        if y[1] > 0.0:
            gl = rho_l - alpha * y[0]
            if gl != 0.0 and h * abs(gl) > 1.0:
                h = 1.0 / abs(gl)
        if t + h >= t_end:
            h = t_end - t
            last = True
        if h < min_step and not last:
            status = STATUS_TOLERANCE
            break

        # Stages 2..6 then the FSAL stage at t + h.
        for s in range(1, 6):
            for i in range(3):
                acc = 0.0
                for j in range(s):
                    acc += _A[s, j] * k[j, i]
                yt[i] = y[i] + h * acc
            dc, dl, db = _f(yt[0], yt[1], yt[2], rho_c, inv_tau_c, rho_l,
                            alpha, src, i0, inv_tau_b)
            k[s, 0], k[s, 1], k[s, 2] = dc, dl, db
        for i in range(3):
            acc = 0.0
            for j in range(6):
                acc += _B[j] * k[j, i]
            y_new[i] = y[i] + h * acc
        dc, dl, db = _f(y_new[0], y_new[1], y_new[2], rho_c, inv_tau_c,
                        rho_l, alpha, src, i0, inv_tau_b)
        k[6, 0], k[6, 1], k[6, 2] = dc, dl, db

        err = 0.0
        for i in range(3):
            acc = 0.0
            for j in range(7):
                acc += _E[j] * k[j, i]
            sc = atol + rtol * max(abs(y[i]), abs(y_new[i]))
            err += (h * acc / sc) ** 2
        err = np.sqrt(err / 3.0)

        if not np.isfinite(err):
            h *= _MIN_FACTOR
            rejected_last = True
            continue
        if err > 1.0:
            fac = _SAFETY * err ** -0.2
            if fac < _MIN_FACTOR:
                fac = _MIN_FACTOR
            h *= fac
            rejected_last = True
            continue

        t_new = t_end if last else t + h

        need_dense = False
        g_old = rho_l - alpha * y[0]
        g_new = rho_l - alpha * y_new[0]
        hit_peak = (not peaks_done) and g_old > 0.0 and g_new <= 0.0
        blowing = (abs(y_new[0]) > cap or abs(y_new[1]) > cap
                   or abs(y_new[2]) > cap)
        if hit_peak or blowing:
            for i in range(3):
                for m in range(4):
                    acc = 0.0
                    for j in range(7):
                        acc += k[j, i] * _P[j, m]
                    q[i, m] = acc
            need_dense = True

        theta_blow = 2.0
        if blowing:
            lo = 0.0
            hi = 1.0
            for _ in range(80):
                if (hi - lo) * h <= 1e-6:
                    break
                mid = 0.5 * (lo + hi)
                over = False
                for i in range(3):
                    if abs(_dense(y, h, q, i, mid)) > cap:
                        over = True
                        break
                if over:
                    hi = mid
                else:
                    lo = mid
            theta_blow = hi

        if hit_peak:
            lo = 0.0
            hi = 1.0
            for _ in range(80):
                if (hi - lo) * h <= 1e-6:
                    break
                mid = 0.5 * (lo + hi)
                if rho_l - alpha * _dense(y, h, q, 0, mid) > 0.0:
                    lo = mid
                else:
                    hi = mid
            theta_pk = 0.5 * (lo + hi)
            if theta_pk <= theta_blow:
                l_pk = _dense(y, h, q, 1, theta_pk)
                if l_pk > 0.0 and n_peaks < max_peaks:
                    peak_t[n_peaks] = t + theta_pk * h
                    peak_states[n_peaks, 0] = _dense(y, h, q, 0, theta_pk)
                    peak_states[n_peaks, 1] = l_pk
                    peak_states[n_peaks, 2] = _dense(y, h, q, 2, theta_pk)
                    n_peaks += 1
                    if n_peaks >= max_peaks:
                        peaks_done = True
                    if floor_on and abs(l_pk - l3) < floor_rel * l3:
                        peaks_done = True

        if blowing:
            blow_t = t + theta_blow * h
            ts[n_stored] = blow_t
            for i in range(3):
                ys[n_stored, i] = _dense(y, h, q, i, theta_blow)
            n_stored += 1
            status = STATUS_BLOWUP
            break

        since_last += 1
        if since_last >= stride:
            since_last = 0
            if n_stored >= max_samples:
                kept = 0
                for idx in range(0, n_stored, 2):
                    ts[kept] = ts[idx]
                    ys[kept, 0] = ys[idx, 0]
                    ys[kept, 1] = ys[idx, 1]
                    ys[kept, 2] = ys[idx, 2]
                    kept += 1
                n_stored = kept
                stride *= 2
            ts[n_stored] = t_new
            for i in range(3):
                ys[n_stored, i] = y_new[i]
            n_stored += 1

        t = t_new
        for i in range(3):
            y[i] = y_new[i]
            k[0, i] = k[6, i]

        if stop_after_peaks:
            if peaks_done:
                status = STATUS_TIME_END
                break
            # No further peak is reachable: C can only keep growing, or
            # L has underflowed to exactly zero (and stays there).
            if n_peaks >= 1 and c_monotone and rho_l - alpha * y[0] < 0.0:
                status = STATUS_TIME_END
                break
            if y[1] == 0.0:
                status = STATUS_TIME_END
                break

        if err == 0.0:
            fac = _MAX_FACTOR
        else:
            fac = _SAFETY * err ** -0.2
            if fac > _MAX_FACTOR:
                fac = _MAX_FACTOR
        if rejected_last and fac > 1.0:
            fac = 1.0
        rejected_last = False
        h *= fac

    # The final accepted point may have fallen between storage strides.
    if ts[n_stored - 1] != t:
        ts[n_stored] = t
        for i in range(3):
            ys[n_stored, i] = y[i]
        n_stored += 1

    return (status, ts[:n_stored].copy(), ys[:n_stored].copy(),
            peak_t[:n_peaks].copy(), peak_states[:n_peaks].copy(), blow_t)
