"""Basins of attraction of the attracting trajectories (ATs).

A grid of initial conditions released at t0 is integrated to a target time
and each cell is labelled with the AT whose capture circle it ends up in.
The capture radius is a quarter of the smallest distance between two ATs,
so the circles never overlap. Cells that reach no circle stay unresolved
(label -1). ATs are followed through time by integrating their positions
deterministically, which keeps labels consistent from one frame to the next.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from . import _kernels as K
from .attractors import default_t0, grid_ics, locate_attractors
from .forcing import ForcingModel
from .integrator import (IntegratorConfig, _em_grid, forcing_args, integrate_ensemble,
                         model_args, sde_path)
from .oscillator import OscillatorParams, SystemState

__all__ = [
    "UNRESOLVED",
    "DegenerateAttractors",
    "GridSpec",
    "BasinMap",
    "Jump",
    "capture_radius",
    "continue_attractors",
    "classify_grid",
    "basin_areas",
    "basin_sequence",
    "track_path",
    "jump_detect",
]

UNRESOLVED = -1


class DegenerateAttractors(ValueError):
    """Two ATs are too close to be told apart."""


@dataclass(frozen=True)
class GridSpec:
    nx: int = 201
    ny: int = 121
    xlim: tuple[float, float] = (-1.5, 1.5)
    ylim: tuple[float, float] = (-2.5, 2.5)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one cell per axis")
        if not (self.xlim[1] > self.xlim[0] and self.ylim[1] > self.ylim[0]):
            raise ValueError("grid ranges must be increasing")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.xlim[0], self.xlim[1], self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.ylim[0], self.ylim[1], self.ny)

    @property
    def spacing(self) -> tuple[float, float]:
        dx = (self.xlim[1] - self.xlim[0]) / max(self.nx - 1, 1)
        dy = (self.ylim[1] - self.ylim[0]) / max(self.ny - 1, 1)
        return dx, dy

    def points(self) -> np.ndarray:
        """(ny*nx, 2) cell centres, x varying fastest."""
        return grid_ics(self.nx, self.xlim[0], self.xlim[1], ny=self.ny,
                        ylo=self.ylim[0], yhi=self.ylim[1])

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(factor * (self.nx - 1) + 1, factor * (self.ny - 1) + 1, self.xlim, self.ylim)

    def to_dict(self) -> dict:
        return {"nx": self.nx, "ny": self.ny, "xlim": list(self.xlim), "ylim": list(self.ylim)}


@dataclass(eq=False)
class BasinMap:
    t0: float
    t_target: float
    grid: GridSpec
    labels: np.ndarray  # (ny, nx)
    at_points: np.ndarray  # AT positions at t_target
    capture_radius: float
    at_points_t0: np.ndarray | None = None
    boundary_proximate: list[bool] = field(default_factory=list)

    @property
    def n_basins(self) -> int:
        return len(self.at_points)

    @property
    def resolved_fraction(self) -> float:
        return float(np.mean(self.labels != UNRESOLVED))

    def rows(self):
        xs, ys = self.grid.xs, self.grid.ys
        for iy in range(self.grid.ny):
            for ix in range(self.grid.nx):
                yield ix, iy, float(xs[ix]), float(ys[iy]), int(self.labels[iy, ix])

    def sidecar(self) -> dict:
        return {
            "t0": self.t0,
            "t_target": self.t_target,
            "grid": self.grid.to_dict(),
            "at_points": self.at_points.tolist(),
            "at_points_t0": None if self.at_points_t0 is None else self.at_points_t0.tolist(),
            "capture_radius": self.capture_radius,
            "areas": basin_areas(self).tolist() if np.any(self.labels >= 0) else None,
            "unresolved_fraction": 1.0 - self.resolved_fraction,
            "boundary_proximate": list(self.boundary_proximate),
        }

    def save(self, csv_path, provenance: dict | None = None) -> None:
        from .provenance import write_csv, write_json
        write_csv(csv_path, ("ix", "iy", "x0", "y0", "label"), self.rows(), provenance)
        write_json(str(csv_path).rsplit(".", 1)[0] + ".json", self.sidecar(), provenance)


@dataclass(frozen=True)
class Jump:
    t: float
    from_at: int
    to_at: int


def capture_radius(at_points, min_sep: float = 1e-6) -> float:
    """A quarter of the smallest pairwise AT distance (inf for a single AT)."""
    pts = np.asarray(at_points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("need at least one AT")
    if len(pts) == 1:
        return float("inf")
    d = float(pdist(pts).min())
    if d < min_sep:
        raise DegenerateAttractors(f"two ATs are only {d:.3g} apart")
    return 0.25 * d


def continue_attractors(at_points, t_from: float, times, params: OscillatorParams,
                        forcing: ForcingModel | None, config: IntegratorConfig | None = None) -> list[np.ndarray]:
    """AT positions at each of ``times`` (>= t_from), by forward integration."""
    pts = np.asarray(at_points, dtype=float).reshape(-1, 2)
    out, t_cur = [], t_from
    order = np.argsort(times)
    res = [None] * len(times)
    cur = pts.copy()
    for i in order:
        t = float(times[i])
        if t < t_cur:
            raise ValueError("times must not precede t_from")
        x, y, bad = integrate_ensemble(cur[:, 0], cur[:, 1], t_cur, t, params, forcing, config)
        if bad.any():
            raise DegenerateAttractors("an AT diverged during continuation")
        cur = np.column_stack([x, y])
        t_cur = t
        res[i] = cur.copy()
    out.extend(res)
    return out


def _boundary_flags(grid: GridSpec, labels: np.ndarray, at_t0: np.ndarray, cells: float = 2.0) -> list[bool]:
    dx, dy = grid.spacing
    X, Y = np.meshgrid(grid.xs, grid.ys)
    flags = []
    for k, p in enumerate(at_t0):
        other = (labels != k) & (labels != UNRESOLVED)
        if not other.any():
            flags.append(False)
            continue
        d = np.hypot((X[other] - p[0]) / dx, (Y[other] - p[1]) / dy)
        flags.append(bool(d.min() < cells))
    return flags


def classify_grid(params: OscillatorParams, forcing: ForcingModel | None, grid: GridSpec,
                  t0: float, t_target: float, at_points, config: IntegratorConfig | None = None,
                  at_points_t0=None) -> BasinMap:
    """Label each grid IC by the AT capture circle it reaches at t_target.

    ``at_points`` are the AT positions at t_target. If their positions at
    t0 are also given, each AT is flagged when an opposing-label cell lies
    within two grid cells of it.
    """
    ats = np.asarray(at_points, dtype=float).reshape(-1, 2)
    r = capture_radius(ats)
    P = grid.points()
    x, y, bad = integrate_ensemble(P[:, 0], P[:, 1], t0, t_target, params, forcing, config)
    end = np.column_stack([x, y])
    d = np.hypot(end[:, None, 0] - ats[None, :, 0], end[:, None, 1] - ats[None, :, 1])
    k = d.argmin(axis=1)
    lab = np.where(d[np.arange(len(k)), k] < r, k, UNRESOLVED)
    lab[bad] = UNRESOLVED
    labels = lab.reshape(grid.ny, grid.nx)
    at0 = None if at_points_t0 is None else np.asarray(at_points_t0, dtype=float).reshape(-1, 2)
    flags = _boundary_flags(grid, labels, at0) if at0 is not None else []
    return BasinMap(t0=float(t0), t_target=float(t_target), grid=grid, labels=labels,
                    at_points=ats, capture_radius=r, at_points_t0=at0, boundary_proximate=flags)


def basin_areas(bmap: BasinMap) -> np.ndarray:
    """Fraction of resolved cells in each basin (sums to 1)."""
    res = bmap.labels[bmap.labels != UNRESOLVED]
    if res.size == 0:
        raise ValueError("every cell is unresolved")
    n = max(bmap.n_basins, int(res.max()) + 1)
    return np.bincount(res, minlength=n) / res.size


def basin_sequence(params: OscillatorParams, forcing: ForcingModel | None, grid: GridSpec,
                   t0_list, config: IntegratorConfig | None = None, horizon: float = 600.0,
                   locate_gap: float | None = None, d_T: float = 0.1, ics=None) -> list[BasinMap]:
    """One basin map per release time, with ATs carried forward by continuation.

    The ATs are located once at the earliest release time (ensemble released
    ``locate_gap`` earlier, by default the attractor-count convention) and
    then integrated to every t0 and t0 + horizon.
    """
    t0s = [float(t) for t in t0_list]
    if not t0s:
        return []
    t_first = min(t0s)
    gap = (t_first - default_t0(forcing, t_first)) if locate_gap is None else locate_gap
    ats = locate_attractors(params, forcing, ics=ics, t0=t_first - gap, t_section=t_first,
                            d_T=d_T, config=config)
    times = t0s + [t + horizon for t in t0s]
    pos = continue_attractors(ats.points, t_first, times, params, forcing, config)
    n = len(t0s)
    return [classify_grid(params, forcing, grid, t0s[i], t0s[i] + horizon, pos[n + i], config,
                          at_points_t0=pos[i]) for i in range(n)]


def track_path(at_points, t0: float, t1: float, params: OscillatorParams,
               forcing: ForcingModel | None, config: IntegratorConfig):
    """AT positions on the Euler-Maruyama time grid of [t0, t1].

    Returns (t, X, Y) with X, Y of shape (n+1, n_AT).
    """
    pts = np.asarray(at_points, dtype=float).reshape(-1, 2)
    n, h = _em_grid(t0, t1, config.h)
    X, Y = K.rk4_ensemble_path(pts[:, 0].copy(), pts[:, 1].copy(), t0, n, h,
                               *model_args(params), *forcing_args(forcing))
    return t0 + h * np.arange(n + 1), X, Y


def _first_dwell(mask: np.ndarray, need: int, start: int) -> int:
    """First index >= start opening a run of at least ``need`` True values."""
    run = 0
    for k in range(start, len(mask)):
        run = run + 1 if mask[k] else 0
        if run >= need:
            return k - need + 1
    return -1


def jump_detect(params: OscillatorParams, forcing: ForcingModel | None, config: IntegratorConfig,
                ic: SystemState, t_end: float, at_points, dwell: float = 50.0,
                stream: int = 0, tracks=None) -> list[Jump]:
    """Noise-induced switches between ATs along one stochastic path.

    ``at_points`` are AT positions at ``ic.t``; they are carried forward
    deterministically. A jump to AT j is recorded at the time the path
    enters AT j's capture circle (radius a quarter of the current minimum
    AT distance) and then stays inside it for at least ``dwell`` kyr.
    ``tracks`` may pass a precomputed :func:`track_path` result.
    """
    if config.noise_b == 0:
        return []
    t, X, Y = tracks if tracks is not None else track_path(at_points, ic.t, t_end, params,
                                                           forcing, config)
    path = sde_path(ic, params, forcing, t_end, config, stream=stream)
    m = X.shape[1]
    if m < 2:
        return []
    d = np.hypot(path.x[:, None] - X, path.y[:, None] - Y)
    iu = np.triu_indices(m, 1)
    sep = np.hypot(X[:, :, None] - X[:, None, :], Y[:, :, None] - Y[:, None, :])[:, iu[0], iu[1]]
    inside = d < 0.25 * sep.min(axis=1)[:, None]
    h = t[1] - t[0] if len(t) > 1 else config.h
    need = max(1, int(round(dwell / h)))
    current = int(d[0].argmin())
    jumps, k = [], 0
    while True:
        best, to = -1, -1
        for j in range(m):
            if j == current:
                continue
            s = _first_dwell(inside[:, j], need, k)
            if s >= 0 and (best < 0 or s < best):
                best, to = s, j
        if best < 0:
            return jumps
        jumps.append(Jump(t=float(t[best]), from_at=current, to_at=to))
        current, k = to, best + need
