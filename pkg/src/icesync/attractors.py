"""Counting attracting trajectories by clustering a fixed-time section.

An ensemble of initial conditions is released at t0 and integrated up to a
section time. If the forced system has N attracting trajectories the
section points pile up in N tight groups, which are found by single-linkage
threshold clustering: two points share a cluster iff a chain of pairwise
distances <= d_T connects them.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .forcing import ForcingModel
from .integrator import IntegratorConfig, integrate_ensemble
from .oscillator import OscillatorParams

__all__ = [
    "N_CAP",
    "NSaturated",
    "SectionPoints",
    "Cluster",
    "ClusterReport",
    "AttractorSet",
    "grid_ics",
    "random_ics",
    "default_t0",
    "evolve_section",
    "count_clusters",
    "locate_attractors",
]

log = logging.getLogger(__name__)

#: N is reported as 6 when there are no clusters or more than five.
N_CAP = 6


class NSaturated(RuntimeError):
    """No well-defined set of attracting trajectories (N hit the cap)."""

    def __init__(self, message: str, report: "ClusterReport | None" = None):
        super().__init__(message)
        self.report = report


@dataclass(eq=False)
class SectionPoints:
    t0: float
    t_section: float
    points: np.ndarray
    index: np.ndarray
    diverged: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def __len__(self):
        return len(self.points)


@dataclass(eq=False)
class Cluster:
    centroid: np.ndarray
    members: np.ndarray
    diameter: float

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(eq=False)
class ClusterReport:
    N: int
    clusters: list[Cluster]
    d_T: float
    n_raw: int = 0
    min_size: int = 1
    stragglers: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def saturated(self) -> bool:
        return self.N >= N_CAP

    @property
    def centroids(self) -> np.ndarray:
        return np.array([c.centroid for c in self.clusters]).reshape(-1, 2)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "saturated": self.saturated,
            "d_T": self.d_T,
            "min_size": self.min_size,
            "n_clusters_found": self.n_raw,
            "clusters": [{"centroid": c.centroid.tolist(), "members": c.members.tolist(),
                          "diameter": c.diameter} for c in self.clusters],
            "stragglers": self.stragglers.tolist(),
        }


@dataclass(eq=False)
class AttractorSet:
    points: np.ndarray
    t: float
    min_distance: float
    report: ClusterReport
    section: SectionPoints


def grid_ics(n: int = 7, lo: float = -2.2, hi: float = 2.2, ny: int | None = None,
             ylo: float | None = None, yhi: float | None = None) -> np.ndarray:
    """n x ny grid of (x, y) initial conditions, x varying fastest."""
    ny = n if ny is None else ny
    xs = np.linspace(lo, hi, n)
    ys = np.linspace(lo if ylo is None else ylo, hi if yhi is None else yhi, ny)
    X, Y = np.meshgrid(xs, ys)
    return np.column_stack([X.ravel(), Y.ravel()])


def random_ics(n: int, seed: int = 0, lo: float = -2.2, hi: float = 2.2) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(lo, hi, size=(n, 2))


def default_t0(forcing: ForcingModel | None, t_section: float = 0.0) -> float:
    """Release time: 40 forcing periods back for periodic forcing, else 1600 kyr."""
    if forcing is not None and forcing.kind == "sinusoid":
        return t_section - 40.0 * forcing.period
    return t_section - 1600.0


def evolve_section(ics, t0: float, t_section: float, params: OscillatorParams,
                   forcing: ForcingModel | None, config: IntegratorConfig | None = None) -> SectionPoints:
    ics = np.asarray(ics, dtype=float).reshape(-1, 2)
    if not t_section >= t0:
        raise ValueError("t_section must be >= t0")
    x, y, bad = integrate_ensemble(ics[:, 0], ics[:, 1], t0, t_section, params, forcing, config)
    idx = np.arange(len(ics))
    if bad.any():
        log.warning("%d of %d initial conditions diverged", int(bad.sum()), len(ics))
    return SectionPoints(t0=t0, t_section=t_section, points=np.column_stack([x, y])[~bad],
                         index=idx[~bad], diverged=idx[bad])


def _components(points: np.ndarray, d_T: float) -> np.ndarray:
    """Connected components of the graph with edges |p_i - p_j| <= d_T."""
    n = len(points)
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in cKDTree(points).query_pairs(r=d_T):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    return np.array([find(i) for i in range(n)])


def count_clusters(points, d_T: float = 0.1, cap: int = N_CAP, min_size: int = 1,
                   index=None) -> ClusterReport:
    """Single-linkage threshold clustering of section points.

    Clusters smaller than ``min_size`` are listed as stragglers and do not
    count. N saturates at ``cap``: it is ``cap`` when no cluster qualifies
    or when ``cap`` or more do. Clusters are ordered by decreasing size,
    then by centroid, so the report does not depend on point order.
    """
    if not d_T > 0:
        raise ValueError("d_T must be > 0")
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    index = np.arange(len(points)) if index is None else np.asarray(index)
    if len(points) == 0:
        return ClusterReport(N=0, clusters=[], d_T=d_T, min_size=min_size)
    roots = _components(points, d_T)
    clusters, strag = [], []
    for r in np.unique(roots):
        sel = roots == r
        members = np.sort(index[sel])
        if sel.sum() < min_size:
            strag.extend(members.tolist())
            continue
        p = points[sel]
        diam = float(pdist(p).max()) if len(p) > 1 else 0.0
        clusters.append(Cluster(centroid=p.mean(axis=0), members=members, diameter=diam))
    clusters.sort(key=lambda c: (-c.size, round(c.centroid[0], 9), round(c.centroid[1], 9)))
    n = len(clusters)
    N = cap if (n == 0 or n >= cap) else n
    return ClusterReport(N=N, clusters=clusters, d_T=d_T, n_raw=n, min_size=min_size,
                         stragglers=np.array(sorted(strag), dtype=int))


def locate_attractors(params: OscillatorParams, forcing: ForcingModel | None, ics=None,
                      t0: float | None = None, t_section: float = 0.0, d_T: float = 0.1,
                      config: IntegratorConfig | None = None, min_size: int = 2) -> AttractorSet:
    """Positions of the attracting trajectories at ``t_section``.

    Raises NSaturated when the count hits the cap.
    """
    ics = grid_ics() if ics is None else ics
    t0 = default_t0(forcing, t_section) if t0 is None else t0
    sec = evolve_section(ics, t0, t_section, params, forcing, config)
    rep = count_clusters(sec.points, d_T, min_size=min_size, index=sec.index)
    if rep.saturated:
        raise NSaturated(f"found {rep.n_raw} clusters of size >= {min_size}; "
                         f"no well-defined attractor set", rep)
    pts = rep.centroids
    md = float(pdist(pts).min()) if len(pts) > 1 else float("inf")
    return AttractorSet(points=pts, t=t_section, min_distance=md, report=rep, section=sec)
