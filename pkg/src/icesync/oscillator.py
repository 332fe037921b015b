"""The modified van der Pol ice-age oscillator.

    tau dx/dt = -(y + beta - gamma F(t))
    tau dy/dt = -alpha (phi'(y) - x)

``x`` is the slow ice-volume variable and ``y`` the slow-fast variable.
The cubic potential derivative is phi'(y) = y^3/3 - y; a quintic variant is
available as a robustness fixture.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels as K
from .forcing import ForcingModel, zero

__all__ = [
    "POTENTIALS",
    "NoLimitCycle",
    "OscillatorParams",
    "SystemState",
    "potential_derivative",
    "potential_second_derivative",
    "vector_field",
    "jacobian",
    "instantaneous_lle",
    "unforced_period",
    "tau_for_period",
    "slow_manifold_residence",
]

POTENTIALS = {"cubic": K.CUBIC, "quintic": K.QUINTIC}

_QUINTIC_ROOTS = (-1.7, -1.58, -0.8, 0.0, 0.5)


class NoLimitCycle(ValueError):
    """The unforced system settles on an equilibrium (|beta| >= 1)."""


@dataclass(frozen=True)
class OscillatorParams:
    alpha: float = 11.11
    beta: float = 0.25
    gamma: float = 0.0
    tau: float = 35.09
    potential: str = "cubic"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.potential not in POTENTIALS:
            raise ValueError(f"unknown potential {self.potential!r}")
        for name in ("alpha", "beta", "gamma", "tau"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def pot_code(self) -> int:
        return POTENTIALS[self.potential]

    def with_(self, **kw) -> "OscillatorParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class SystemState:
    x: float
    y: float
    t: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.t)):
            raise ValueError(f"non-finite state {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


def potential_derivative(y, potential: str = "cubic"):
    y = np.asarray(y, dtype=float)
    if potential == "cubic":
        out = y ** 3 / 3.0 - y
    elif potential == "quintic":
        out = np.ones_like(y)
        for r in _QUINTIC_ROOTS:
            out = out * (y - r)
    else:
        raise ValueError(f"unknown potential {potential!r}")
    return out[()] if out.ndim == 0 else out


def potential_second_derivative(y, potential: str = "cubic"):
    y = np.asarray(y, dtype=float)
    if potential == "cubic":
        out = y * y - 1.0
    elif potential == "quintic":
        out = np.zeros_like(y)
        for i in range(5):
            term = np.ones_like(y)
            for j, r in enumerate(_QUINTIC_ROOTS):
                if j != i:
                    term = term * (y - r)
            out = out + term
    else:
        raise ValueError(f"unknown potential {potential!r}")
    return out[()] if out.ndim == 0 else out


def vector_field(state: SystemState, params: OscillatorParams,
                 forcing: ForcingModel | None = None) -> tuple[float, float]:
    forcing = forcing or zero()
    f = forcing.eval(state.t)
    dx = -(state.y + params.beta - params.gamma * f) / params.tau
    dy = -params.alpha * (potential_derivative(state.y, params.potential) - state.x) / params.tau
    return float(dx), float(dy)


def jacobian(y: float, params: OscillatorParams) -> np.ndarray:
    """2x2 Jacobian [1/kyr]; it depends on y only."""
    a = params.alpha
    p2 = float(potential_second_derivative(y, params.potential))
    return -np.array([[0.0, 1.0], [-a, a * p2]]) / params.tau


def instantaneous_lle(y, params: OscillatorParams):
    """Largest real part of the Jacobian eigenvalues, in closed form.

    trace = -alpha phi''(y)/tau and det = alpha/tau^2 > 0, so the real part
    is trace/2 for a complex pair and (trace + sqrt(trace^2 - 4 det))/2
    otherwise.
    """
    tr = -params.alpha * np.asarray(potential_second_derivative(y, params.potential)) / params.tau
    det = params.alpha / params.tau ** 2
    disc = tr * tr - 4.0 * det
    out = np.where(disc >= 0, 0.5 * (tr + np.sqrt(np.maximum(disc, 0.0))), 0.5 * tr)
    return float(out) if out.ndim == 0 else out


def _upward_crossings(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    idx = np.nonzero((y[:-1] < 0.0) & (y[1:] >= 0.0))[0]
    # linear interpolation inside the step
    return t[idx] + (t[idx + 1] - t[idx]) * (-y[idx]) / (y[idx + 1] - y[idx])


def unforced_period(params: OscillatorParams, transient_cycles: int = 5,
                    measured_cycles: int = 10, steps_per_tau: int = 2000,
                    ic: tuple[float, float] = (-0.24, -0.27)) -> tuple[float, float]:
    """Period of the unforced limit cycle and its angular velocity.

    Upward zero crossings of y are located by linear interpolation; the
    first ``transient_cycles`` cycles are discarded. The step is tied to tau
    (h = tau / steps_per_tau) so the result scales exactly with tau.
    Returns (T_ULC, omega_ULC).
    """
    if abs(params.beta) >= 1.0:
        raise NoLimitCycle(f"|beta| = {abs(params.beta)} >= 1: the unforced system has a stable equilibrium")
    h = params.tau / steps_per_tau
    empty = np.zeros(0)
    need = transient_cycles + measured_cycles + 1
    span = 4.0 * params.tau * need
    for _ in range(4):
        t, _, y, n_good = K.rk4_path(ic[0], ic[1], 0.0, span, h, params.alpha, params.beta, 0.0,
                                     params.tau, params.pot_code, empty, empty, empty, 0.0)
        cr = _upward_crossings(t[:n_good], y[:n_good])
        if len(cr) >= need:
            break
        span *= 2.0
    else:
        raise NoLimitCycle("no sustained oscillation of y found")
    cr = cr[transient_cycles:need]
    period = (cr[-1] - cr[0]) / (len(cr) - 1)
    return float(period), 2.0 * math.pi / float(period)


def tau_for_period(target: float, alpha: float = 11.11, beta: float = 0.25,
                   potential: str = "cubic") -> float:
    """Slow timescale giving an unforced period of ``target`` kyr.

    Uses T_ULC(tau) = tau * T_ULC(1), a pure time rescaling.
    """
    if not target > 0:
        raise ValueError("target period must be > 0")
    base, _ = unforced_period(OscillatorParams(alpha=alpha, beta=beta, gamma=0.0, tau=1.0,
                                               potential=potential))
    return target / base


def slow_manifold_residence(params: OscillatorParams, tol: float = 0.1,
                            steps_per_tau: int = 2000) -> dict:
    """Time budget of one unforced cycle.

    ``branch_fraction`` is the share of the period spent in the y-range of
    the two stable branches of x = phi'(y) (where phi''(y) > 0);
    ``near_fraction`` additionally requires |x - phi'(y)| < tol. Also
    returns the durations with x growing (glaciation) and shrinking
    (deglaciation).
    """
    period, _ = unforced_period(params, steps_per_tau=steps_per_tau)
    h = params.tau / steps_per_tau
    empty = np.zeros(0)
    # settle onto the cycle first
    t, x, y, n = K.rk4_path(-0.24, -0.27, 0.0, 10 * period, h, params.alpha, params.beta, 0.0,
                            params.tau, params.pot_code, empty, empty, empty, 0.0)
    t, x, y, n = K.rk4_path(x[n - 1], y[n - 1], 0.0, period, h, params.alpha, params.beta, 0.0,
                            params.tau, params.pot_code, empty, empty, empty, 0.0)
    x, y = x[:n], y[:n]
    on_branch = potential_second_derivative(y, params.potential) > 0
    near = on_branch & (np.abs(x - potential_derivative(y, params.potential)) < tol)
    growing = -(y + params.beta) > 0
    return {
        "period": period,
        "branch_fraction": float(on_branch[:-1].mean()),
        "near_fraction": float(near[:-1].mean()),
        "glaciation": float(growing[:-1].sum() * h),
        "deglaciation": float((~growing[:-1]).sum() * h),
    }
