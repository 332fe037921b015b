"""Run configuration stored as an INI-style text file.

    [model]       alpha, beta, gamma, tau, potential
    [forcing]     spec (see forcing.parse_forcing)
    [integrator]  h, gsr_interval, noise_b, seed
    [options]     free-form experiment options
    [outputs]     named output paths

Floats are written with repr so a save/load round trip is lossless.
"""
from __future__ import annotations

import configparser
import io
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .forcing import parse_forcing
from .integrator import IntegratorConfig
from .oscillator import OscillatorParams

__all__ = ["ConfigError", "RunConfig", "REQUIRED"]

REQUIRED = {
    "model": ("alpha", "beta", "gamma", "tau"),
    "forcing": ("spec",),
}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


def _num(section: str, key: str, raw: str, kind=float):
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r} as {kind.__name__}",
                          f"{section}.{key}") from None


@dataclass
class RunConfig:
    params: OscillatorParams = field(default_factory=OscillatorParams)
    forcing: str = "insol"
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    options: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def __post_init__(self):
        try:
            parse_forcing(self.forcing)
        except ValueError as e:
            raise ConfigError(f"forcing.spec: {e}", "forcing.spec") from None

    @property
    def seed(self) -> int:
        return self.integrator.seed

    def forcing_model(self):
        return parse_forcing(self.forcing)

    def to_dict(self) -> dict:
        return {"model": asdict(self.params), "forcing": {"spec": self.forcing},
                "integrator": asdict(self.integrator), "options": dict(self.options),
                "outputs": dict(self.outputs)}

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        for sec, body in self.to_dict().items():
            cp[sec] = {k: (repr(v) if isinstance(v, float) else str(v)) for k, v in body.items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def save(self, path) -> None:
        Path(path).write_text(self.to_ini())

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as e:
            raise ConfigError(f"unreadable config: {e}") from None
        missing = [f"{s}.{k}" for s, keys in REQUIRED.items() for k in keys
                   if not cp.has_option(s, k)]
        if missing:
            raise ConfigError("missing required fields: " + ", ".join(missing), missing[0])
        m = cp["model"]
        try:
            params = OscillatorParams(
                alpha=_num("model", "alpha", m["alpha"]),
                beta=_num("model", "beta", m["beta"]),
                gamma=_num("model", "gamma", m["gamma"]),
                tau=_num("model", "tau", m["tau"]),
                potential=m.get("potential", "cubic"),
            )
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"model: {e}", "model") from None
        ik = {}
        if cp.has_section("integrator"):
            names = {f.name: f.type for f in fields(IntegratorConfig)}
            for k, v in cp["integrator"].items():
                if k not in names:
                    raise ConfigError(f"integrator.{k}: unknown key", f"integrator.{k}")
                ik[k] = _num("integrator", k, v, int if k == "seed" else float)
        try:
            integ = IntegratorConfig(**ik)
        except ValueError as e:
            raise ConfigError(f"integrator: {e}", "integrator") from None
        opts = dict(cp["options"]) if cp.has_section("options") else {}
        outs = dict(cp["outputs"]) if cp.has_section("outputs") else {}
        return cls(params=params, forcing=cp["forcing"]["spec"], integrator=integ,
                   options=opts, outputs=outs)

    @classmethod
    def load(cls, path) -> "RunConfig":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file {path} not found", "config")
        return cls.from_ini(p.read_text())
