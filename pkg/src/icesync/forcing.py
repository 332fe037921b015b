"""External forcing of the ice-age oscillator.

Three kinds of scalar forcing are supported: no forcing, a pure sinusoid and
the 35-term harmonic series for the summer-solstice insolation anomaly at
65N. Every model also carries a dimensionless ``scale`` multiplier; the
insolation is normally divided by the amplitude of its leading obliquity
term so the model can be driven with a dimensionless signal.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "A_EPS1",
    "CSV_HEADER",
    "INSOLATION_TABLE",
    "HarmonicTerm",
    "ForcingModel",
    "zero",
    "sinusoid",
    "series",
    "insolation",
    "load_csv",
    "dump_csv",
    "rms_amplitude",
    "spectrum_table",
    "parse_forcing",
]

#: Amplitude of the leading obliquity harmonic (41 kyr), W/m^2.
A_EPS1 = 11.77
#: Removed mean of the insolation series, W/m^2 (kept for reference only).
INSOLATION_MEAN = 494.2447

CSV_HEADER = ("omega_rad_per_kyr", "s_W_per_m2", "c_W_per_m2")

# (omega [rad/kyr], s [W/m^2], c [W/m^2]); 15 obliquity rows then 20 precession rows.
INSOLATION_TABLE: tuple[tuple[float, float, float], ...] = (
    # obliquity
    (0.153249478547167, -11.2287376815124, 3.51682075211241),
    (0.158148666238883, -3.82499371467540, -0.761851750263805),
    (0.117190147169570, 2.28814805956066, 1.80233702684623),
    (0.155061775112933, -1.29770081956440, -0.635152963728496),
    (0.217333905941751, 0.380973541305497, -1.46301711999210),
    (0.150162587421217, 1.54904176353302, -0.0883941912769817),
    (0.211709630908568, -0.810768209286259, -0.577980646565494),
    (0.156336369673117, -0.918358442095885, 0.196083726889428),
    (0.148350290855451, 0.256895610735773, -0.524697312305024),
    (0.206924898030688, -0.335783913402678, -0.0194792150128644),
    (0.212525165090383, 0.267659228540196, 0.128915417116900),
    (0.229992875969202, 0.0696189733188958, 0.0746231714061285),
    (0.306498957094334, 0.0247349748169616, 0.0140464395340974),
    (0.311398144786051, 0.0138353727621181, 0.0304736668840422),
    (0.004899187691716, -0.160479848721994, 0.0594077968934257),
    # precession
    (0.264933601588513, -15.5490493322904, -9.70406287110532),
    (0.280151350350945, 15.4319556361701, 4.75247271131525),
    (0.331110950251899, 9.0992249352734, -10.6115244887390),
    (0.328024059125949, -7.87065384013669, 6.61544246063503),
    (0.326211762560183, 0.813786144754451, -4.52641408099246),
    (0.269742342439881, 0.0690448504314857, -3.31639260969558),
    (0.332923246817665, 1.44050770785967, 1.06339286050120),
    (0.371638925683567, 0.925324276580528, -1.02066758672154),
    (0.275366617473065, 0.997628846513796, -0.362906496840039),
    (0.323124871434233, -0.378637986107629, 0.527217891742183),
    (0.259396912994958, 0.339477750517033, -0.560509461538342),
    (0.324937167999999, -0.576082669762308, 1.18669572739338),
    (0.334197841377850, 0.346906064369828, -0.648189701487285),
    (0.274551083291250, -0.441772417569753, 0.289576210423804),
    (0.418183080135680, -0.0184884064645011, 0.109632390175297),
    (0.111684123041346, -0.428006728186239, 0.357006342316690),
    (0.433400828898112, -0.0049199219454561, -0.106148873639336),
    (0.126901871803777, 0.257509918217341, -0.377639794223366),
    (0.336010137943616, -0.421809264016129, 0.324327509437558),
    (0.177861471704732, -0.161827722328271, -0.362683869407858),
)

N_OBLIQUITY = 15
N_PRECESSION = 20


@dataclass(frozen=True)
class HarmonicTerm:
    omega: float
    s: float
    c: float

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError(f"omega must be positive and finite, got {self.omega!r}")
        if not (math.isfinite(self.s) and math.isfinite(self.c)):
            raise ValueError("harmonic coefficients must be finite")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def power(self) -> float:
        return self.s * self.s + self.c * self.c


@dataclass(frozen=True)
class ForcingModel:
    """Tagged description of a scalar forcing F(t).

    ``kind`` is one of ``"zero"``, ``"sinusoid"`` or ``"series"``. Sinusoids
    use ``amplitude``, ``period`` [kyr] and ``phase`` [kyr]; series use
    ``terms``. The value is always multiplied by ``scale``.
    """

    kind: str
    scale: float = 1.0
    amplitude: float = 0.0
    period: float = 0.0
    phase: float = 0.0
    terms: tuple[HarmonicTerm, ...] = field(default=())
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("zero", "sinusoid", "series"):
            raise ValueError(f"unknown forcing kind {self.kind!r}")
        if not math.isfinite(self.scale):
            raise ValueError("scale must be finite")
        if self.kind == "sinusoid" and not self.period > 0:
            raise ValueError("sinusoid period must be > 0")
        if self.kind == "series" and not self.terms:
            raise ValueError("series forcing needs at least one harmonic term")

    # -- evaluation -------------------------------------------------------
    def __call__(self, t):
        return self.eval(t)

    def eval(self, t):
        """Evaluate F(t); ``t`` may be a float or an array of times in kyr."""
        scalar = np.ndim(t) == 0
        tt = np.asarray(t, dtype=float)
        if self.kind == "zero":
            out = np.zeros_like(tt)
        elif self.kind == "sinusoid":
            out = self.amplitude * np.sin(2.0 * np.pi * (tt - self.phase) / self.period)
        else:
            omega, s, c = self.coefficients()
            out = np.zeros_like(tt)
            for w, si, ci in zip(omega, s, c):
                out = out + (si * np.sin(w * tt) + ci * np.cos(w * tt))
        out = out * self.scale
        return float(out) if scalar else out

    def coefficients(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Harmonic (omega, s, c) arrays equivalent to this model, unscaled.

        The compiled integrators consume every forcing in this form. A
        sinusoid maps onto a single term; zero forcing onto empty arrays.
        """
        if self.kind == "series":
            arr = np.array([(h.omega, h.s, h.c) for h in self.terms], dtype=float)
            return arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy()
        if self.kind == "sinusoid":
            w = 2.0 * math.pi / self.period
            phi = w * self.phase
            return (np.array([w]), np.array([self.amplitude * math.cos(phi)]),
                    np.array([-self.amplitude * math.sin(phi)]))
        empty = np.zeros(0)
        return empty, empty.copy(), empty.copy()

    @property
    def is_periodic(self) -> bool:
        return self.kind == "sinusoid"

    def describe(self) -> dict:
        d = {"kind": self.kind, "scale": self.scale}
        if self.kind == "sinusoid":
            d.update(amplitude=self.amplitude, period=self.period, phase=self.phase)
        elif self.kind == "series":
            d.update(n_terms=len(self.terms), label=self.label)
        return d


def zero() -> ForcingModel:
    return ForcingModel("zero")


def sinusoid(amplitude: float = 1.0, period: float = 41.0, phase: float = 0.0,
             scale: float = 1.0) -> ForcingModel:
    return ForcingModel("sinusoid", scale=scale, amplitude=amplitude, period=period, phase=phase)


def series(terms: Iterable, scale: float = 1.0, label: str = "") -> ForcingModel:
    hs = tuple(t if isinstance(t, HarmonicTerm) else HarmonicTerm(*map(float, t)) for t in terms)
    return ForcingModel("series", scale=scale, terms=hs, label=label)


def insolation(normalized: bool = True, table: Sequence | None = None) -> ForcingModel:
    """The 35-term insolation anomaly.

    With ``normalized=True`` (the model default) the signal is divided by
    :data:`A_EPS1`; otherwise it is returned in W/m^2.
    """
    rows = INSOLATION_TABLE if table is None else table
    if len(rows) != N_OBLIQUITY + N_PRECESSION:
        raise ValueError(f"insolation series needs {N_OBLIQUITY + N_PRECESSION} terms, got {len(rows)}")
    scale = 1.0 / A_EPS1 if normalized else 1.0
    return series(rows, scale=scale, label="insolation-65N" + ("/a_eps1" if normalized else ""))


def load_csv(path: str | Path | None = None) -> list[HarmonicTerm]:
    """Read harmonic coefficients; without a path, the bundled table is used."""
    if path is None:
        text = resources.files("icesync.data").joinpath("insolation35.csv").read_text()
    else:
        text = Path(path).read_text()
    reader = csv.reader(ln for ln in io.StringIO(text) if not ln.startswith("#"))
    header = tuple(h.strip() for h in next(reader))
    if header != CSV_HEADER:
        raise ValueError(f"unexpected coefficient header {header!r}")
    return [HarmonicTerm(float(w), float(s), float(c)) for w, s, c in reader if w.strip()]


def dump_csv(terms: Iterable[HarmonicTerm], path: str | Path, provenance: dict | None = None) -> None:
    from .provenance import write_csv
    write_csv(path, CSV_HEADER, ((h.omega, h.s, h.c) for h in terms), provenance)


def rms_amplitude(model: ForcingModel, window: tuple[float, float] = (-1000.0, 0.0),
                  samples: int = 10_000) -> float:
    """Discrete RMS of the forcing over a uniformly sampled window.

    The right endpoint is left out, so a window of whole sinusoid periods
    does not count one phase twice and one period gives exactly sqrt(2)/2.
    """
    t0, t1 = window
    if not t1 > t0:
        raise ValueError("rms window needs t1 > t0")
    if samples < 2:
        raise ValueError("rms needs at least 2 samples")
    t = np.linspace(t0, t1, samples, endpoint=False)
    f = np.asarray(model.eval(t))
    return float(np.sqrt(np.mean(f * f)))


def spectrum_table(model: ForcingModel) -> list[tuple[float, float]]:
    """Rows of (period [kyr], power a^2 = s^2 + c^2) sorted by decreasing power."""
    if model.kind != "series":
        raise ValueError("spectrum_table needs a series forcing")
    rows = [(h.period, h.power) for h in model.terms]
    return sorted(rows, key=lambda r: -r[1])


def parse_forcing(spec: str) -> ForcingModel:
    """Parse the CLI forcing notation.

    ``insol`` (dimensionless, divided by a_eps1), ``insol-wm2`` (W/m^2),
    ``sine`` / ``sine:T`` / ``sine:T:A`` and ``zero``.
    """
    spec = spec.strip().lower()
    if spec in ("insol", "insolation", "astro"):
        return insolation(normalized=True)
    if spec in ("insol-wm2", "insol-raw"):
        return insolation(normalized=False)
    if spec == "zero" or spec == "none":
        return zero()
    if spec.startswith("sine"):
        parts = spec.split(":")[1:]
        period = float(parts[0]) if parts else 41.0
        amp = float(parts[1]) if len(parts) > 1 else 1.0
        return sinusoid(amplitude=amp, period=period)
    raise ValueError(f"unknown forcing {spec!r}; expected insol, insol-wm2, sine[:T[:A]] or zero")
