"""Parameter-space maps of the largest Lyapunov exponent and of N.

Every cell is an independent task; cells are spread over a process pool
whose size comes from ``ICESYNC_WORKERS`` (default: all cores, serial when
1). The ``tulc`` axis is realized through :func:`tau_for_period`.
"""
from __future__ import annotations

import logging
import os
import struct
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .attractors import count_clusters, default_t0, evolve_section, grid_ics
from .forcing import ForcingModel
from .integrator import DivergedError, IntegratorConfig
from .lyapunov import NotConverged, long_term_spectrum
from .oscillator import NoLimitCycle, OscillatorParams, unforced_period

__all__ = [
    "AXIS_NAMES",
    "WORKERS_ENV",
    "AxisSpec",
    "SweepGrid",
    "parse_axis",
    "cell_seed",
    "sweep_lle",
    "sweep_count",
    "worker_count",
]

log = logging.getLogger(__name__)

AXIS_NAMES = ("tulc", "tau", "gamma", "beta", "alpha")
WORKERS_ENV = "ICESYNC_WORKERS"


@dataclass(frozen=True)
class AxisSpec:
    name: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"unknown axis {self.name!r}; expected one of {AXIS_NAMES}")
        if len(self.values) == 0:
            raise ValueError(f"axis {self.name} has no values")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @classmethod
    def linspace(cls, name: str, lo: float, hi: float, n: int) -> "AxisSpec":
        return cls(name, tuple(np.linspace(lo, hi, int(n))))

    def __len__(self):
        return len(self.values)


def parse_axis(text: str) -> AxisSpec:
    """``name:lo:hi:n`` (inclusive linspace) or ``name:v1,v2,...``."""
    parts = text.split(":")
    try:
        if len(parts) == 4:
            return AxisSpec.linspace(parts[0], float(parts[1]), float(parts[2]), int(parts[3]))
        if len(parts) == 2:
            return AxisSpec(parts[0], tuple(float(v) for v in parts[1].split(",") if v))
    except ValueError as e:
        raise ValueError(f"bad axis spec {text!r}: {e}") from None
    raise ValueError(f"bad axis spec {text!r}; use name:lo:hi:n or name:v1,v2,...")


@dataclass(eq=False)
class SweepGrid:
    kind: str
    x_axis: AxisSpec
    y_axis: AxisSpec
    values: np.ndarray  # (ny, nx)
    status: np.ndarray  # (ny, nx) of str
    seed: int = 0
    config: dict = field(default_factory=dict)

    def cell(self, x: float, y: float) -> tuple[float, str]:
        """Value and status of the cell nearest to (x, y)."""
        ix = int(np.abs(np.array(self.x_axis.values) - x).argmin())
        iy = int(np.abs(np.array(self.y_axis.values) - y).argmin())
        return float(self.values[iy, ix]), str(self.status[iy, ix])

    def rows(self):
        for iy, yv in enumerate(self.y_axis.values):
            for ix, xv in enumerate(self.x_axis.values):
                yield xv, yv, float(self.values[iy, ix]), str(self.status[iy, ix])

    def sidecar(self) -> dict:
        return {"kind": self.kind, "x_param": self.x_axis.name, "x_values": list(self.x_axis.values),
                "y_param": self.y_axis.name, "y_values": list(self.y_axis.values),
                "seed": self.seed, "config": self.config}

    def save(self, csv_path, provenance: dict | None = None) -> None:
        from .provenance import write_csv, write_json
        write_csv(csv_path, ("x_param", "y_param", "value", "status"), self.rows(), provenance)
        write_json(str(csv_path).rsplit(".", 1)[0] + ".json", self.sidecar(), provenance)


def worker_count() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1")
        return n
    return os.cpu_count() or 1


def _bits(v: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(v)))[0]


def cell_seed(seed: int, x: float, y: float) -> int:
    """Per-cell seed mixed from the global seed and the cell coordinates.

    Keyed on parameter values rather than indices, so refining a grid keeps
    the seed of every cell it shares with the coarser one.
    """
    ss = np.random.SeedSequence([int(seed), _bits(x), _bits(y)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@lru_cache(maxsize=64)
def _base_period(alpha: float, beta: float, potential: str) -> float:
    return unforced_period(OscillatorParams(alpha=alpha, beta=beta, tau=1.0, potential=potential))[0]


def _cell_params(fixed: OscillatorParams, names, values, gamma_scale: float) -> OscillatorParams:
    kw = {}
    tulc = None
    for n, v in zip(names, values):
        if n == "tulc":
            tulc = v
        elif n == "gamma":
            kw["gamma"] = v * gamma_scale
        else:
            kw[n] = v
    p = fixed.with_(**kw)
    if tulc is not None:
        p = p.with_(tau=tulc / _base_period(p.alpha, p.beta, p.potential))
    return p


def _lle_task(args):
    params, forcing, config, t_total, transient, ic = args
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NotConverged)
            rec = long_term_spectrum(params, forcing, ic=ic, t_total=t_total, transient=transient,
                                     config=config)
        return rec.lambda_max, "ok"
    except DivergedError:
        return float("nan"), "diverged"


def _count_task(args):
    params, forcing, config, t_section, t0, ics, d_T, min_size = args
    sec = evolve_section(ics, t0, t_section, params, forcing, config)
    rep = count_clusters(sec.points, d_T, min_size=min_size, index=sec.index)
    return float(rep.N), ("saturated" if rep.saturated else "ok")


def _run(kind, task, x_axis, y_axis, fixed, forcing, make_args, seed, gamma_scale, workers,
         snapshot, progress):
    if x_axis.name == y_axis.name:
        raise ValueError("x and y axes must differ")
    jobs, keys = [], []
    status = np.full((len(y_axis), len(x_axis)), "failed", dtype=object)
    values = np.full((len(y_axis), len(x_axis)), np.nan)
    for iy, yv in enumerate(y_axis.values):
        for ix, xv in enumerate(x_axis.values):
            try:
                p = _cell_params(fixed, (x_axis.name, y_axis.name), (xv, yv), gamma_scale)
            except (NoLimitCycle, ValueError) as e:
                log.warning("cell (%g, %g) skipped: %s", xv, yv, e)
                continue
            jobs.append(make_args(p, cell_seed(seed, xv, yv)))
            keys.append((iy, ix))
    workers = worker_count() if workers is None else workers
    t_start = time.time()
    if workers <= 1:
        results = []
        for i, j in enumerate(jobs):
            results.append(task(j))
            if progress:
                progress(i + 1, len(jobs))
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = []
            for i, r in enumerate(ex.map(task, jobs, chunksize=max(1, len(jobs) // (8 * workers)))):
                results.append(r)
                if progress:
                    progress(i + 1, len(jobs))
    for (iy, ix), (v, st) in zip(keys, results):
        values[iy, ix] = v
        status[iy, ix] = st
    snapshot = dict(snapshot, fixed=asdict(fixed), gamma_scale=gamma_scale,
                    forcing=(forcing.describe() if forcing is not None else {"kind": "zero"}),
                    elapsed_s=round(time.time() - t_start, 3), workers=workers)
    return SweepGrid(kind=kind, x_axis=x_axis, y_axis=y_axis, values=values,
                     status=status.astype(str), seed=seed, config=snapshot)


def sweep_lle(x_axis: AxisSpec, y_axis: AxisSpec, fixed: OscillatorParams,
              forcing: ForcingModel | None, config: IntegratorConfig | None = None,
              t_total: float = 3000.0, transient: float = 500.0, seed: int = 0,
              gamma_scale: float = 1.0, ic=(-0.24, -0.27), workers: int | None = None,
              progress=None) -> SweepGrid:
    """lambda_max per cell from a long-term spectrum.

    The gamma axis is in model units times ``gamma_scale``.
    """
    config = config or IntegratorConfig()

    def make(p, s):
        return (p, forcing, config, t_total, transient, tuple(ic))

    snap = {"t_total": t_total, "transient": transient, "integrator": asdict(config), "ic": list(ic)}
    return _run("lle", _lle_task, x_axis, y_axis, fixed, forcing, make, seed, gamma_scale,
                workers, snap, progress)


def sweep_count(x_axis: AxisSpec, y_axis: AxisSpec, fixed: OscillatorParams,
                forcing: ForcingModel | None, config: IntegratorConfig | None = None,
                d_T: float = 0.1, t_section: float = 0.0, t0: float | None = None,
                ics=None, min_size: int = 2, seed: int = 0, gamma_scale: float = 1.0,
                workers: int | None = None, progress=None) -> SweepGrid:
    """N per cell: 7x7 IC grid, release at the default t0, cluster at t_section."""
    config = config or IntegratorConfig()
    ics = grid_ics() if ics is None else np.asarray(ics, dtype=float)
    t0 = default_t0(forcing, t_section) if t0 is None else t0

    def make(p, s):
        return (p, forcing, config, t_section, t0, ics, d_T, min_size)

    snap = {"d_T": d_T, "t_section": t_section, "t0": t0, "n_ics": len(ics), "min_size": min_size,
            "integrator": asdict(config)}
    return _run("count", _count_task, x_axis, y_axis, fixed, forcing, make, seed, gamma_scale,
                workers, snap, progress)
