"""Fixed-step integration of the forced oscillator.

Classical RK4 is used for deterministic runs (with the last step shortened to
land on ``t_end``), RK4 on the coupled trajectory + tangent system for
Lyapunov work, and Euler-Maruyama for runs with additive noise on ``y``.
The heavy loops live in :mod:`icesync._kernels`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels as K
from .forcing import ForcingModel, zero
from .oscillator import OscillatorParams, SystemState

__all__ = [
    "DivergedError",
    "IntegratorConfig",
    "TangentBundle",
    "Trajectory",
    "forcing_args",
    "model_args",
    "integrate",
    "trajectory",
    "integrate_ensemble",
    "integrate_with_tangent",
    "integrate_sde",
    "sde_path",
    "noise_stream",
    "gram_schmidt",
    "tangent_flow",
]


class DivergedError(RuntimeError):
    """A state became non-finite; ``last_state`` is the last good one."""

    def __init__(self, message: str, last_state: SystemState | None = None):
        super().__init__(message)
        self.last_state = last_state


@dataclass(frozen=True)
class IntegratorConfig:
    h: float = 0.05
    gsr_interval: float = 1.0
    noise_b: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError(f"h must be > 0, got {self.h}")
        if not self.gsr_interval >= self.h:
            raise ValueError(f"gsr_interval ({self.gsr_interval}) must be >= h ({self.h})")
        if not self.noise_b >= 0:
            raise ValueError(f"noise_b must be >= 0, got {self.noise_b}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def gsr_every(self) -> int:
        """GSR interval in steps."""
        return max(1, int(round(self.gsr_interval / self.h)))


@dataclass(eq=False)
class TangentBundle:
    """A base point plus k orthonormal tangent vectors (rows of ``frame``)."""

    base: SystemState
    frame: np.ndarray
    log_norms: np.ndarray = None
    trace_integral: float = 0.0
    # history of reorthonormalizations from the last integration
    gsr_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    gsr_x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    gsr_y: np.ndarray = field(default_factory=lambda: np.zeros(0))
    gsr_log_norms: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def __post_init__(self):
        self.frame = np.atleast_2d(np.asarray(self.frame, dtype=float))
        if self.frame.shape[1] != 2 or self.frame.shape[0] not in (1, 2):
            raise ValueError(f"frame must be (k, 2) with k in {{1, 2}}, got {self.frame.shape}")
        if self.log_norms is None:
            self.log_norms = np.zeros(self.frame.shape[0])
        self.log_norms = np.asarray(self.log_norms, dtype=float)

    @classmethod
    def start(cls, state: SystemState, k: int = 2, frame=None) -> "TangentBundle":
        if frame is None:
            frame = np.eye(2)[:k]
        return cls(base=state, frame=gram_schmidt(np.asarray(frame, dtype=float))[0])

    @property
    def k(self) -> int:
        return self.frame.shape[0]


@dataclass(eq=False)
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    lognorms: np.ndarray | None = None

    def __len__(self):
        return len(self.t)

    def rows(self):
        if self.lognorms is None:
            return zip(self.t, self.x, self.y)
        return (tuple(r) for r in np.column_stack([self.t, self.x, self.y, self.lognorms]))

    @property
    def header(self) -> list[str]:
        cols = ["t", "x", "y"]
        if self.lognorms is not None:
            cols += [f"lognorm{i + 1}" for i in range(self.lognorms.shape[1])]
        return cols

    def to_csv(self, path, provenance: dict | None = None) -> None:
        from .provenance import write_csv
        write_csv(path, self.header, self.rows(), provenance)

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        from .provenance import read_csv
        header, rows = read_csv(path)
        a = np.array(rows, dtype=float).reshape(-1, len(header))
        ln = a[:, 3:] if a.shape[1] > 3 else None
        return cls(a[:, 0], a[:, 1], a[:, 2], ln)


def forcing_args(forcing: ForcingModel | None):
    forcing = forcing or zero()
    om, s, c = forcing.coefficients()
    return om, s, c, float(forcing.scale)


def model_args(params: OscillatorParams):
    return params.alpha, params.beta, params.gamma, params.tau, params.pot_code


def _check_span(t0: float, t_end: float):
    if not t_end >= t0:
        raise ValueError(f"t_end ({t_end}) must be >= start time ({t0})")


def integrate(state: SystemState, params: OscillatorParams, forcing: ForcingModel | None,
              t_end: float, config: IntegratorConfig | None = None,
              observer: Callable[[SystemState], None] | None = None) -> SystemState:
    """RK4 from ``state.t`` to ``t_end``; ``observer`` sees every step."""
    config = config or IntegratorConfig()
    _check_span(state.t, t_end)
    if observer is not None:
        tr = trajectory(state, params, forcing, t_end, config)
        for t, x, y in zip(tr.t, tr.x, tr.y):
            observer(SystemState(float(x), float(y), float(t)))
        return SystemState(float(tr.x[-1]), float(tr.y[-1]), float(t_end))
    x, y, bad = K.rk4_ensemble(np.array([state.x]), np.array([state.y]), state.t, t_end, config.h,
                               *model_args(params), *forcing_args(forcing))
    if bad[0] >= 0:
        t_fail = state.t + bad[0] * config.h
        raise DivergedError(f"diverged at t={t_fail:.4f}",
                            SystemState(float(x[0]), float(y[0]), t_fail))
    return SystemState(float(x[0]), float(y[0]), float(t_end))


def trajectory(state: SystemState, params: OscillatorParams, forcing: ForcingModel | None,
               t_end: float, config: IntegratorConfig | None = None,
               every: int = 1) -> Trajectory:
    """Recorded RK4 path; keeps every ``every``-th step plus the endpoint."""
    config = config or IntegratorConfig()
    _check_span(state.t, t_end)
    t, x, y, n = K.rk4_path(state.x, state.y, state.t, t_end, config.h,
                            *model_args(params), *forcing_args(forcing))
    if n < len(t):
        raise DivergedError(f"diverged at t={t[n - 1] + config.h:.4f}",
                            SystemState(float(x[n - 1]), float(y[n - 1]), float(t[n - 1])))
    idx = np.arange(0, len(t), max(1, every))
    if idx[-1] != len(t) - 1:
        idx = np.append(idx, len(t) - 1)
    return Trajectory(t[idx], x[idx], y[idx])


def integrate_ensemble(x0, y0, t0: float, t_end: float, params: OscillatorParams,
                       forcing: ForcingModel | None, config: IntegratorConfig | None = None):
    """Advance many ICs at once. Returns (x, y, diverged_mask)."""
    config = config or IntegratorConfig()
    _check_span(t0, t_end)
    x0 = np.ascontiguousarray(x0, dtype=float).ravel()
    y0 = np.ascontiguousarray(y0, dtype=float).ravel()
    if x0.shape != y0.shape:
        raise ValueError("x0 and y0 must have the same length")
    x, y, bad = K.rk4_ensemble(x0, y0, t0, t_end, config.h, *model_args(params),
                               *forcing_args(forcing))
    return x, y, bad >= 0


def integrate_with_tangent(bundle: TangentBundle, params: OscillatorParams,
                           forcing: ForcingModel | None, t_end: float,
                           config: IntegratorConfig | None = None) -> TangentBundle:
    """Advance the base point and tangent frame together.

    Log stretches are added to ``bundle.log_norms``; the trace of the
    Jacobian integrated along the path is added to ``trace_integral``.
    """
    config = config or IntegratorConfig()
    b = bundle.base
    _check_span(b.t, t_end)
    x, y, Q, S, tr, gt, gx, gy, gS, status = K.rk4_tangent(
        b.x, b.y, b.t, t_end, config.h, *model_args(params), *forcing_args(forcing),
        np.ascontiguousarray(bundle.frame), config.gsr_every)
    if status >= 0:
        raise DivergedError(f"diverged at t={b.t + status * config.h:.4f}",
                            SystemState(float(x), float(y), b.t + status * config.h))
    return TangentBundle(
        base=SystemState(float(x), float(y), float(t_end)),
        frame=Q,
        log_norms=bundle.log_norms + S,
        trace_integral=bundle.trace_integral + tr,
        gsr_times=gt, gsr_x=gx, gsr_y=gy,
        gsr_log_norms=gS + bundle.log_norms,
    )


def noise_stream(seed: int, n: int, stream: int = 0) -> np.ndarray:
    """n standard normals for (seed, stream); streams are independent."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(stream)]))
    return rng.standard_normal(n)


def _em_grid(t0: float, t_end: float, h: float):
    n = int(K.n_steps(t0, t_end, h))
    # uniform step that lands exactly on t_end
    return n, ((t_end - t0) / n if n else h)


def sde_path(state: SystemState, params: OscillatorParams, forcing: ForcingModel | None,
             t_end: float, config: IntegratorConfig, stream: int = 0) -> Trajectory:
    """Euler-Maruyama path with b sqrt(h) xi added to y each step.

    The step is adjusted to (t_end - t0)/ceil((t_end - t0)/h) so the grid
    lands on t_end. Normals come from ``noise_stream(config.seed, n, stream)``.
    """
    _check_span(state.t, t_end)
    n, h = _em_grid(state.t, t_end, config.h)
    z = noise_stream(config.seed, n, stream) if config.noise_b > 0 else np.zeros(n)
    X, Y, ng = K.em_path(state.x, state.y, state.t, h, *model_args(params),
                         *forcing_args(forcing), config.noise_b, z)
    t = state.t + h * np.arange(n + 1)
    if n:
        t[-1] = t_end
    if ng < n + 1:
        raise DivergedError(f"diverged at t={t[ng]:.4f}",
                            SystemState(float(X[ng - 1]), float(Y[ng - 1]), float(t[ng - 1])))
    return Trajectory(t, X, Y)


def integrate_sde(state: SystemState, params: OscillatorParams, forcing: ForcingModel | None,
                  t_end: float, config: IntegratorConfig, stream: int = 0) -> SystemState:
    p = sde_path(state, params, forcing, t_end, config, stream)
    return SystemState(float(p.x[-1]), float(p.y[-1]), float(t_end))


# generic tangent integration, used for the Lorenz-63 fixture and test doubles

def gram_schmidt(frame: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormalize the rows of ``frame`` in order; returns (Q, norms)."""
    Q = np.array(frame, dtype=float, copy=True)
    norms = np.empty(Q.shape[0])
    for j in range(Q.shape[0]):
        for i in range(j):
            Q[j] -= (Q[j] @ Q[i]) * Q[i]
        norms[j] = np.linalg.norm(Q[j])
        if norms[j] == 0.0:
            raise ValueError("degenerate tangent frame")
        Q[j] /= norms[j]
    return Q, norms


def tangent_flow(f: Callable, jac: Callable, z0, t0: float, t1: float, h: float,
                 frame=None, gsr_every: int = 1):
    """RK4 on dz/dt = f(t, z) with tangent rows dV/dt = V J(t, z)^T.

    Returns (z, Q, log_norms, trace_integral). The trace integral uses the
    RK4 weights over the stage states, like the compiled kernel.
    """
    z = np.array(z0, dtype=float)
    d = z.size
    Q = np.eye(d) if frame is None else gram_schmidt(np.asarray(frame, float))[0]
    S = np.zeros(Q.shape[0])
    tr_int = 0.0
    n = int(K.n_steps(t0, t1, h))
    for k in range(n):
        t = t0 + k * h
        hh = h if k < n - 1 else t1 - t
        k1 = f(t, z)
        z2 = z + 0.5 * hh * k1
        k2 = f(t + 0.5 * hh, z2)
        z3 = z + 0.5 * hh * k2
        k3 = f(t + 0.5 * hh, z3)
        z4 = z + hh * k3
        k4 = f(t + hh, z4)
        J1, J2, J3, J4 = jac(t, z), jac(t + 0.5 * hh, z2), jac(t + 0.5 * hh, z3), jac(t + hh, z4)
        a1 = Q @ J1.T
        a2 = (Q + 0.5 * hh * a1) @ J2.T
        a3 = (Q + 0.5 * hh * a2) @ J3.T
        a4 = (Q + hh * a3) @ J4.T
        Q = Q + hh / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        tr_int += hh / 6.0 * (np.trace(J1) + 2 * np.trace(J2) + 2 * np.trace(J3) + np.trace(J4))
        z = z + hh / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(z)):
            raise DivergedError(f"diverged at t={t + hh:.4f}")
        if (k + 1) % gsr_every == 0 or k == n - 1:
            Q, nr = gram_schmidt(Q)
            S += np.log(nr)
    return z, Q, S, tr_int
