"""Lyapunov exponents of the forced oscillator.

Long-term spectra use the coupled trajectory + tangent integration with
periodic Gram-Schmidt reorthonormalization. Short-term (finite horizon)
exponents follow one continuously evolving, renormalized tangent vector
along the trajectory; the exponent over [t, t+H] is the log stretch
accumulated over that window divided by H.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .forcing import ForcingModel
from .integrator import (IntegratorConfig, TangentBundle, integrate, integrate_with_tangent,
                         tangent_flow)
from .oscillator import OscillatorParams, SystemState

__all__ = [
    "NotConverged",
    "LyapunovRecord",
    "ShortTermSeries",
    "long_term_spectrum",
    "finite_time_rates",
    "short_term_lle",
    "desync_episodes",
    "lorenz63_spectrum",
    "TABLE_WINDOW",
]

#: Time span over which the insolation series was fitted, kyr.
TABLE_WINDOW = (-1000.0, 0.0)


class NotConverged(UserWarning):
    """The running exponent still drifts over the last tenth of the run."""


@dataclass
class LyapunovRecord:
    spectrum: list[float]
    t_total: float
    transient_skipped: float
    convergence_trace: list[tuple[float, ...]] = field(default_factory=list)
    trace_average: float = float("nan")
    converged: bool = True
    metadata: dict = field(default_factory=dict)

    @property
    def lambda_max(self) -> float:
        return self.spectrum[0]

    def to_dict(self) -> dict:
        return {
            "spectrum": list(self.spectrum),
            "lambda_max": self.lambda_max,
            "sum": float(sum(self.spectrum)),
            "trace_average": self.trace_average,
            "t_total": self.t_total,
            "transient_skipped": self.transient_skipped,
            "converged": self.converged,
            "metadata": self.metadata,
            "convergence_trace": [list(r) for r in self.convergence_trace],
        }


@dataclass
class ShortTermSeries:
    H: float
    t: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        if not self.H > 0:
            raise ValueError("H must be > 0")
        self.t = np.asarray(self.t, dtype=float)
        self.lam = np.asarray(self.lam, dtype=float)
        if self.t.shape != self.lam.shape:
            raise ValueError("t and lam must have equal length")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("samples must be strictly time ordered")

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.lam.tolist()))

    def __len__(self):
        return len(self.t)


def _outside_table(forcing: ForcingModel | None, t0: float, t1: float) -> bool:
    if forcing is None or forcing.kind != "series":
        return False
    return t0 < TABLE_WINDOW[0] or t1 > TABLE_WINDOW[1]


def _drifting(trace: np.ndarray, rel: float = 0.05, floor: float = 1e-3) -> bool:
    """Compare the running estimate at 90% of the run with the final one."""
    if len(trace) < 10:
        return False
    final = trace[-1]
    mid = trace[int(0.9 * (len(trace) - 1))]
    return bool(abs(final - mid) > rel * abs(final) + floor)


def long_term_spectrum(params: OscillatorParams, forcing: ForcingModel | None = None,
                       ic: SystemState | tuple = (-0.24, -0.27), t_total: float = 3000.0,
                       transient: float = 500.0, config: IntegratorConfig | None = None,
                       frame=None, trace_every: float = 10.0) -> LyapunovRecord:
    """Both Lyapunov exponents of the oscillator.

    The trajectory and frame are first run through ``transient`` kyr, then
    the log stretches are reset and accumulated over the remaining
    ``t_total - transient`` kyr. ``ic`` may be a SystemState or (x, y) at t=0.
    """
    config = config or IntegratorConfig()
    if not t_total > transient >= 0:
        raise ValueError("need t_total > transient >= 0")
    if not isinstance(ic, SystemState):
        ic = SystemState(float(ic[0]), float(ic[1]), 0.0)
    t0 = ic.t
    b = TangentBundle.start(ic, k=2, frame=frame)
    if transient > 0:
        b = integrate_with_tangent(b, params, forcing, t0 + transient, config)
        b = TangentBundle(b.base, b.frame)
    span = t_total - transient
    b = integrate_with_tangent(b, params, forcing, t0 + t_total, config)
    spectrum = b.log_norms / span
    order = np.argsort(-spectrum)

    # running estimates sampled every trace_every kyr of the accumulation
    el = b.gsr_times - (t0 + transient)
    running = b.gsr_log_norms / el[:, None]
    k = max(1, int(round(trace_every / config.gsr_interval)))
    idx = np.arange(k - 1, len(el), k)
    trace = [(float(b.gsr_times[i]),) + tuple(float(v) for v in running[i, order]) for i in idx]
    converged = not _drifting(np.array([r[1] for r in trace]))
    if not converged:
        warnings.warn(f"largest exponent has not settled after {span:g} kyr", NotConverged,
                      stacklevel=2)
    meta = {
        "h": config.h,
        "gsr_interval": config.gsr_interval,
        "ic": [ic.x, ic.y, ic.t],
        "forcing": (forcing.describe() if forcing is not None else {"kind": "zero"}),
        "forcing_extrapolated": _outside_table(forcing, t0, t0 + t_total),
    }
    return LyapunovRecord(
        spectrum=[float(v) for v in spectrum[order]],
        t_total=float(t_total),
        transient_skipped=float(transient),
        convergence_trace=trace,
        trace_average=float(b.trace_integral / span),
        converged=converged,
        metadata=meta,
    )


def finite_time_rates(times, cum_log, H: float, t_from: float | None = None,
                      t_to: float | None = None) -> ShortTermSeries:
    """Finite-horizon exponents from a cumulative log stretch S(t).

    lambda^H(t) = (S(t+H) - S(t)) / H at every sample time t with t+H inside
    the record (and t within [t_from, t_to] if given).
    """
    times = np.asarray(times, dtype=float)
    cum_log = np.asarray(cum_log, dtype=float)
    if not H > 0:
        raise ValueError("H must be > 0")
    lo = times[0] if t_from is None else t_from
    hi = times[-1] - H if t_to is None else min(t_to, times[-1] - H)
    eps = 1e-9 * max(1.0, abs(H))
    sel = (times >= lo - eps) & (times <= hi + eps)
    t = times[sel]
    lam = (np.interp(t + H, times, cum_log) - cum_log[sel]) / H
    return ShortTermSeries(H=float(H), t=t, lam=lam)


def short_term_lle(params: OscillatorParams, forcing: ForcingModel | None,
                   attracting_ic: SystemState, window: tuple[float, float], H: float = 50.0,
                   config: IntegratorConfig | None = None, spinup: float = 20.0) -> ShortTermSeries:
    """lambda^H along the trajectory through ``attracting_ic``.

    One tangent vector is started ``spinup`` kyr before ``window[0]`` so it
    is aligned with the most unstable direction, then carried (renormalized
    every ``config.gsr_interval``) to ``window[1] + H``. Samples are spaced
    by the GSR interval.
    """
    config = config or IntegratorConfig()
    t0, t1 = float(window[0]), float(window[1])
    if not t1 >= t0:
        raise ValueError("window must satisfy t0 <= t1")
    if not H > 0:
        raise ValueError("H must be > 0")
    start = t0 - spinup
    if attracting_ic.t > start:
        raise ValueError(f"attracting_ic must be given at t <= {start} (window start minus spin-up)")
    state = integrate(attracting_ic, params, forcing, start, config) if attracting_ic.t < start \
        else attracting_ic
    b = TangentBundle.start(state, k=1, frame=[[1.0, 1.0]])
    b = integrate_with_tangent(b, params, forcing, t1 + H, config)
    times = np.concatenate([[start], b.gsr_times])
    S = np.concatenate([[0.0], b.gsr_log_norms[:, 0]])
    return finite_time_rates(times, S, H, t0, t1)


def desync_episodes(series: ShortTermSeries) -> list[tuple[float, float]]:
    """Maximal runs with lambda^H > 0, endpoints linearly interpolated."""
    t, lam = series.t, series.lam
    if len(t) == 0:
        raise ValueError("empty series")
    pos = lam > 0
    out = []
    i, n = 0, len(t)
    while i < n:
        if not pos[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and pos[j + 1]:
            j += 1
        a = t[i] if i == 0 else t[i - 1] + (t[i] - t[i - 1]) * (-lam[i - 1]) / (lam[i] - lam[i - 1])
        e = t[j] if j == n - 1 else t[j] + (t[j + 1] - t[j]) * lam[j] / (lam[j] - lam[j + 1])
        out.append((float(a), float(e)))
        i = j + 1
    return out


def lorenz63_spectrum(sigma: float = 10.0, r: float = 28.0, b: float = 8.0 / 3.0,
                      t_total: float = 220.0, transient: float = 20.0, h: float = 0.01,
                      gsr_every: int = 10, z0=(1.0, 1.0, 1.0)) -> LyapunovRecord:
    """Lyapunov spectrum of the Lorenz-63 system, a validation fixture."""
    def f(t, z):
        return np.array([sigma * (z[1] - z[0]), z[0] * (r - z[2]) - z[1], z[0] * z[1] - b * z[2]])

    def jac(t, z):
        return np.array([[-sigma, sigma, 0.0], [r - z[2], -1.0, -z[0]], [z[1], z[0], -b]])

    z, Q, _, _ = tangent_flow(f, jac, z0, 0.0, transient, h, gsr_every=gsr_every)
    span = t_total - transient
    z, Q, S, tr = tangent_flow(f, jac, z, 0.0, span, h, frame=Q, gsr_every=gsr_every)
    lam = np.sort(S / span)[::-1]
    return LyapunovRecord(spectrum=[float(v) for v in lam], t_total=t_total,
                          transient_skipped=transient, trace_average=float(tr / span),
                          metadata={"system": "lorenz63", "sigma": sigma, "r": r, "b": b, "h": h})
