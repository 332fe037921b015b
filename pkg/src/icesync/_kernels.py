"""Compiled hot loops for the forced oscillator.

Everything here works on plain floats and arrays so numba can compile it.
Forcing is always passed as harmonic coefficient arrays (omega, s, c) plus
a scale, see :meth:`icesync.forcing.ForcingModel.coefficients`. Potentials
are integer coded: 0 cubic, 1 quintic.
"""
import numpy as np
from numba import njit

CUBIC = 0
QUINTIC = 1

# |x| or |y| beyond this is treated as a blow-up.
BLOWUP = 1e12


@njit(cache=True)
def forcing_value(t, omega, s, c, scale):
    acc = 0.0
    for i in range(omega.shape[0]):
        acc += s[i] * np.sin(omega[i] * t) + c[i] * np.cos(omega[i] * t)
    return acc * scale


@njit(cache=True)
def dphi(y, pot):
    if pot == CUBIC:
        return y * y * y / 3.0 - y
    return (y + 1.7) * (y + 1.58) * (y + 0.8) * y * (y - 0.5)


@njit(cache=True)
def d2phi(y, pot):
    if pot == CUBIC:
        return y * y - 1.0
    # product rule over the five linear factors
    r = (1.7, 1.58, 0.8, 0.0, -0.5)
    total = 0.0
    for i in range(5):
        p = 1.0
        for j in range(5):
            if j != i:
                p *= y + r[j]
        total += p
    return total


@njit(cache=True)
def _rhs(x, y, f, alpha, beta, gamma, tau, pot):
    return -(y + beta - gamma * f) / tau, -alpha * (dphi(y, pot) - x) / tau


@njit(cache=True)
def _bad(x, y):
    return not (abs(x) < BLOWUP and abs(y) < BLOWUP)


@njit(cache=True)
def n_steps(t0, t1, h):
    if t1 <= t0:
        return 0
    n = int(np.ceil((t1 - t0) / h - 1e-9))
    return max(n, 1)


@njit(cache=True)
def rk4_ensemble(x0, y0, t0, t1, h, alpha, beta, gamma, tau, pot, omega, s, c, scale):
    """Advance many initial conditions from t0 to t1 with classical RK4.

    The last step is shortened to land on t1. Returns final (x, y) and the
    index of the step at which each member diverged (-1 if it did not);
    a diverged member is frozen at its last finite state.
    """
    m = x0.shape[0]
    x = x0.copy()
    y = y0.copy()
    bad = np.full(m, -1, dtype=np.int64)
    n = n_steps(t0, t1, h)
    for k in range(n):
        t = t0 + k * h
        hh = h if k < n - 1 else t1 - t
        f0 = forcing_value(t, omega, s, c, scale)
        f1 = forcing_value(t + 0.5 * hh, omega, s, c, scale)
        f2 = forcing_value(t + hh, omega, s, c, scale)
        for i in range(m):
            if bad[i] >= 0:
                continue
            xi = x[i]
            yi = y[i]
            k1x, k1y = _rhs(xi, yi, f0, alpha, beta, gamma, tau, pot)
            k2x, k2y = _rhs(xi + 0.5 * hh * k1x, yi + 0.5 * hh * k1y, f1, alpha, beta, gamma, tau, pot)
            k3x, k3y = _rhs(xi + 0.5 * hh * k2x, yi + 0.5 * hh * k2y, f1, alpha, beta, gamma, tau, pot)
            k4x, k4y = _rhs(xi + hh * k3x, yi + hh * k3y, f2, alpha, beta, gamma, tau, pot)
            xn = xi + hh / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            yn = yi + hh / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            if _bad(xn, yn):
                bad[i] = k
            else:
                x[i] = xn
                y[i] = yn
    return x, y, bad


@njit(cache=True)
def rk4_path(x, y, t0, t1, h, alpha, beta, gamma, tau, pot, omega, s, c, scale):
    """Single trajectory with every step recorded.

    Returns (t, x, y, n_good): arrays of length n+1 where only the first
    n_good entries are meaningful if the run diverged.
    """
    n = n_steps(t0, t1, h)
    T = np.empty(n + 1)
    X = np.empty(n + 1)
    Y = np.empty(n + 1)
    T[0] = t0
    X[0] = x
    Y[0] = y
    for k in range(n):
        t = t0 + k * h
        hh = h if k < n - 1 else t1 - t
        f0 = forcing_value(t, omega, s, c, scale)
        f1 = forcing_value(t + 0.5 * hh, omega, s, c, scale)
        f2 = forcing_value(t + hh, omega, s, c, scale)
        k1x, k1y = _rhs(x, y, f0, alpha, beta, gamma, tau, pot)
        k2x, k2y = _rhs(x + 0.5 * hh * k1x, y + 0.5 * hh * k1y, f1, alpha, beta, gamma, tau, pot)
        k3x, k3y = _rhs(x + 0.5 * hh * k2x, y + 0.5 * hh * k2y, f1, alpha, beta, gamma, tau, pot)
        k4x, k4y = _rhs(x + hh * k3x, y + hh * k3y, f2, alpha, beta, gamma, tau, pot)
        xn = x + hh / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        yn = y + hh / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        if _bad(xn, yn):
            return T, X, Y, k + 1
        x = xn
        y = yn
        T[k + 1] = t + hh
        X[k + 1] = x
        Y[k + 1] = y
    return T, X, Y, n + 1


@njit(cache=True)
def _tan(y, u, v, alpha, tau, pot):
    # J = -[[0, 1], [-alpha, alpha * phi''(y)]] / tau
    return -v / tau, (alpha * u - alpha * d2phi(y, pot) * v) / tau


@njit(cache=True)
def rk4_tangent(x, y, t0, t1, h, alpha, beta, gamma, tau, pot, omega, s, c, scale,
                frame, gsr_every):
    """Trajectory plus tangent frame, Gram-Schmidt every ``gsr_every`` steps.

    ``frame`` is (k, 2) with k in {1, 2}; each tangent vector is advanced by
    RK4 on dZ/dt = J(y(t)) dZ using the same stage values of y as the base
    trajectory. A final reorthonormalization is done at t1.

    Returns (x, y, frame, log_norms, trace_integral, gsr_times, gsr_x,
    gsr_y, gsr_log_norms, status) where ``gsr_log_norms[i]`` holds the
    cumulative log stretches after the i-th reorthonormalization, taken at
    the base point (gsr_x[i], gsr_y[i]), and status is -1 on success or the
    failing step index.
    """
    k_vec = frame.shape[0]
    Q = frame.copy()
    S = np.zeros(k_vec)
    n = n_steps(t0, t1, h)
    n_gsr_max = n // gsr_every + 2
    gt = np.empty(n_gsr_max)
    gS = np.empty((n_gsr_max, k_vec))
    gx = np.empty(n_gsr_max)
    gy = np.empty(n_gsr_max)
    ng = 0
    trace_int = 0.0
    status = -1
    for k in range(n):
        t = t0 + k * h
        hh = h if k < n - 1 else t1 - t
        f0 = forcing_value(t, omega, s, c, scale)
        f1 = forcing_value(t + 0.5 * hh, omega, s, c, scale)
        f2 = forcing_value(t + hh, omega, s, c, scale)
        y1 = y
        k1x, k1y = _rhs(x, y1, f0, alpha, beta, gamma, tau, pot)
        x2 = x + 0.5 * hh * k1x
        y2 = y + 0.5 * hh * k1y
        k2x, k2y = _rhs(x2, y2, f1, alpha, beta, gamma, tau, pot)
        x3 = x + 0.5 * hh * k2x
        y3 = y + 0.5 * hh * k2y
        k3x, k3y = _rhs(x3, y3, f1, alpha, beta, gamma, tau, pot)
        x4 = x + hh * k3x
        y4 = y + hh * k3y
        k4x, k4y = _rhs(x4, y4, f2, alpha, beta, gamma, tau, pot)
        for j in range(k_vec):
            u = Q[j, 0]
            v = Q[j, 1]
            a1u, a1v = _tan(y1, u, v, alpha, tau, pot)
            a2u, a2v = _tan(y2, u + 0.5 * hh * a1u, v + 0.5 * hh * a1v, alpha, tau, pot)
            a3u, a3v = _tan(y3, u + 0.5 * hh * a2u, v + 0.5 * hh * a2v, alpha, tau, pot)
            a4u, a4v = _tan(y4, u + hh * a3u, v + hh * a3v, alpha, tau, pot)
            Q[j, 0] = u + hh / 6.0 * (a1u + 2.0 * a2u + 2.0 * a3u + a4u)
            Q[j, 1] = v + hh / 6.0 * (a1v + 2.0 * a2v + 2.0 * a3v + a4v)
        tr = (d2phi(y1, pot) + 2.0 * d2phi(y2, pot) + 2.0 * d2phi(y3, pot) + d2phi(y4, pot)) / 6.0
        trace_int += -alpha * tr / tau * hh
        xn = x + hh / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        yn = y + hh / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        if _bad(xn, yn):
            status = k
            break
        x = xn
        y = yn
        if (k + 1) % gsr_every == 0 or k == n - 1:
            for j in range(k_vec):
                for i in range(j):
                    d = Q[j, 0] * Q[i, 0] + Q[j, 1] * Q[i, 1]
                    Q[j, 0] -= d * Q[i, 0]
                    Q[j, 1] -= d * Q[i, 1]
                nrm = np.sqrt(Q[j, 0] * Q[j, 0] + Q[j, 1] * Q[j, 1])
                Q[j, 0] /= nrm
                Q[j, 1] /= nrm
                S[j] += np.log(nrm)
            gt[ng] = t + hh
            gx[ng] = x
            gy[ng] = y
            for j in range(k_vec):
                gS[ng, j] = S[j]
            ng += 1
    return x, y, Q, S, trace_int, gt[:ng], gx[:ng], gy[:ng], gS[:ng], status


@njit(cache=True)
def em_path(x, y, t0, h, alpha, beta, gamma, tau, pot, omega, s, c, scale, b, z):
    """Euler-Maruyama with additive noise b dW on the fast variable.

    ``z`` holds one standard normal per step; the run has len(z) steps.
    Returns (x_path, y_path, n_good) with len(z)+1 recorded states.
    """
    n = z.shape[0]
    X = np.empty(n + 1)
    Y = np.empty(n + 1)
    X[0] = x
    Y[0] = y
    sh = np.sqrt(h)
    for k in range(n):
        t = t0 + k * h
        f = forcing_value(t, omega, s, c, scale)
        dx, dy = _rhs(x, y, f, alpha, beta, gamma, tau, pot)
        xn = x + h * dx
        yn = y + h * dy + b * sh * z[k]
        if _bad(xn, yn):
            return X, Y, k + 1
        x = xn
        y = yn
        X[k + 1] = x
        Y[k + 1] = y
    return X, Y, n + 1


@njit(cache=True)
def rk4_ensemble_path(x0, y0, t0, n, h, alpha, beta, gamma, tau, pot, omega, s, c, scale):
    """Fixed-step RK4 for a few trajectories with every step recorded."""
    m = x0.shape[0]
    X = np.empty((n + 1, m))
    Y = np.empty((n + 1, m))
    X[0] = x0
    Y[0] = y0
    x = x0.copy()
    y = y0.copy()
    for k in range(n):
        t = t0 + k * h
        f0 = forcing_value(t, omega, s, c, scale)
        f1 = forcing_value(t + 0.5 * h, omega, s, c, scale)
        f2 = forcing_value(t + h, omega, s, c, scale)
        for i in range(m):
            xi = x[i]
            yi = y[i]
            k1x, k1y = _rhs(xi, yi, f0, alpha, beta, gamma, tau, pot)
            k2x, k2y = _rhs(xi + 0.5 * h * k1x, yi + 0.5 * h * k1y, f1, alpha, beta, gamma, tau, pot)
            k3x, k3y = _rhs(xi + 0.5 * h * k2x, yi + 0.5 * h * k2y, f1, alpha, beta, gamma, tau, pot)
            k4x, k4y = _rhs(xi + h * k3x, yi + h * k3y, f2, alpha, beta, gamma, tau, pot)
            x[i] = xi + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            y[i] = yi + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        X[k + 1] = x
        Y[k + 1] = y
    return X, Y
