"""Experiment configuration: physical and protocol parameters plus file round-trip.

The config file format is flat ``key = value`` text, one field per line.
Angles are in degrees, powers in normalized units, gamma2_dB in dB.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum


class ConfigError(ValueError):
    pass


class Scheme(Enum):
    SCHEME_I = "SchemeI"
    SCHEME_II = "SchemeII"


def _default_targets():
    return [(30.0, 0.2 + 0.1j)]


@dataclass
class ScenarioConfig:
    """All parameters of one coexistence experiment.

    Defaults mirror the desk-scale simulation setup: L=32 symbols,
    sigma_C2=0.01, P_t=L, gamma2_dB=-30, rho2=1000*L/M_tR,
    sigma_alpha2=1e-3, sigma1_2=sigma2_2=0.1, one target at 30 degrees.
    sigma_R2 defaults to None, meaning it is derived from snr_dB against
    the noiseless radar return at synthesis time.
    """

    M_tR: int = 4
    M_rR: int = 8
    M_tC: int = 8
    M_rC: int = 4
    L: int = 32
    P_t: float | None = None          # defaults to L
    C: float = 12.0                   # bits/symbol
    sigma_C2: float = 0.01
    sigma_R2: float | None = None     # derived from snr_dB when None
    snr_dB: float = 25.0
    sigma1_2: float = 0.1
    sigma2_2: float = 0.1
    gamma2_dB: float = -30.0
    rho2: float | None = None         # defaults to 1000*L/M_tR
    sigma_alpha2: float = 1e-3
    p: float = 1.0
    scheme: Scheme = Scheme.SCHEME_I
    targets: list = field(default_factory=_default_targets)
    seed: int = 0
    radar_rate: float = 1.0
    comm_rate: float = 1.0

    def __post_init__(self):
        for name in ("M_tR", "M_rR", "M_tC", "M_rC", "L"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.P_t is None:
            self.P_t = float(self.L)
        if self.rho2 is None:
            self.rho2 = 1000.0 * self.L / self.M_tR
        if isinstance(self.scheme, str):
            self.scheme = Scheme(self.scheme)
        self.validate()

    def validate(self):
        for name in ("M_tR", "M_rR", "M_tC", "M_rC", "L"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not (0.0 < self.p <= 1.0):
            raise ConfigError("p must be in (0, 1]")
        if self.P_t <= 0:
            raise ConfigError("P_t must be positive")
        if self.C < 0:
            raise ConfigError("C must be nonnegative")
        for name in ("sigma_C2", "sigma1_2", "sigma2_2", "sigma_alpha2"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        if self.sigma_R2 is not None and self.sigma_R2 < 0:
            raise ConfigError("sigma_R2 must be nonnegative")
        if self.rho2 <= 0:
            raise ConfigError("rho2 must be positive")
        if self.radar_rate <= 0 or self.comm_rate <= 0:
            raise ConfigError("symbol rates must be positive")

    @property
    def gamma(self) -> float:
        """Amplitude path-loss factor, gamma = 10^(gamma2_dB/20)."""
        return 10.0 ** (self.gamma2_dB / 20.0)

    @property
    def rho(self) -> float:
        """Radar transmit amplitude, rho = sqrt(rho2)."""
        return float(self.rho2) ** 0.5

    def replace(self, **kwargs) -> "ScenarioConfig":
        return dataclasses.replace(self, **kwargs)


def _format_value(name, value):
    if name == "scheme":
        return value.value
    if name == "targets":
        return ";".join(f"{ang!r}:{coef!r}" for ang, coef in value)
    return repr(value)


def _parse_targets(text):
    targets = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        ang, coef = part.split(":")
        targets.append((float(ang), complex(coef.strip("()"))))
    return targets


_FIELD_NAMES = [f.name for f in dataclasses.fields(ScenarioConfig)]


def format_config(cfg: ScenarioConfig) -> str:
    lines = [f"{name} = {_format_value(name, getattr(cfg, name))}" for name in _FIELD_NAMES]
    return "\n".join(lines) + "\n"


def parse_config(text: str, extra_keys=()) -> tuple[ScenarioConfig, dict]:
    """Parse flat key/value text into a ScenarioConfig.

    Keys listed in extra_keys are collected verbatim into the returned dict
    instead of being treated as config fields (the harness uses this for
    experiment-level settings).
    """
    values = {}
    extras = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in extra_keys:
            extras[key] = val
            continue
        if key not in _FIELD_NAMES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = val

    kwargs = {}
    for key, val in values.items():
        if key == "scheme":
            kwargs[key] = Scheme(val)
        elif key == "targets":
            kwargs[key] = _parse_targets(val)
        elif key in ("M_tR", "M_rR", "M_tC", "M_rC", "L", "seed"):
            kwargs[key] = int(val)
        elif val == "None":
            kwargs[key] = None
        else:
            kwargs[key] = float(val)
    return ScenarioConfig(**kwargs), extras


def save_config(cfg: ScenarioConfig, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_config(cfg))


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        cfg, _ = parse_config(fh.read())
    return cfg
