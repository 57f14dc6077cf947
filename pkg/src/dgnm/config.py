"""Experiment configuration: dataclass plus strict INI parsing.

Example::

    [experiment]
    name = harnack_sweep
    resolutions = 32, 64
    fields = scalar_checkerboard@0.5
    lambdas = 1, 2, 4, 8, 16
    seeds = 0, 1, 2, 3, 4

    [constants]
    C_H = 1.0

Unknown sections or keys are errors. A field token is ``kind`` or
``kind@width`` where ``width`` is the physical tile width; the tile period in
cells is ``round(width / h)``, so one token describes the same field at every
resolution.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .fields import KINDS
from .kernels import ConstantsConfig
from .solver import SCHEMES

EXPERIMENTS = (
    "harnack_sweep",
    "weak_harnack",
    "crossover",
    "degiorgi",
    "moser",
    "jn_check",
    "chain_check",
    "cacc_check",
    "extension_check",
    "holder_decay",
)
C_POLICIES = ("fixed", "proportional")
EPS_POLICIES = ("scaled", "zero")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FieldChoice:
    kind: str
    tile_width: float = 0.25

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown field kind {self.kind!r}")
        if not self.tile_width > 0:
            raise ConfigError("tile width must be positive")

    @property
    def token(self) -> str:
        return f"{self.kind}@{self.tile_width:g}"

    @classmethod
    def parse(cls, token: str) -> "FieldChoice":
        kind, _, width = token.strip().partition("@")
        return cls(kind.strip(), float(width) if width else 0.25)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    d: int = 3
    resolutions: tuple[int, ...] = (32,)
    scheme: str = "fv_tpfa"
    fields: tuple[FieldChoice, ...] = (FieldChoice("scalar_checkerboard", 0.25),)
    lambdas: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    q: float = 0.5
    p0: float = 2.0
    moser_steps: int = 3
    c_policy: str = "proportional"
    c_value: float = 0.5
    eps_policy: str = "scaled"
    tol: float = 1e-10
    g_offset: float = 1.0
    bump_height: float = 1.0
    bump_width: float = 0.5
    level: float = 1.25
    degiorgi_steps: int = 6
    bmo_levels: int = 3
    jn_thresholds: int = 12
    holder_levels: int = 4
    chain_samples: int = 1_000_000
    constants: ConstantsConfig = field(default_factory=ConstantsConfig)
    out: str = "reports"

    def __post_init__(self):
        # canonical types, so configs built in code and parsed from INI serialise alike
        for name, kind in (("resolutions", int), ("seeds", int), ("lambdas", float)):
            object.__setattr__(self, name, tuple(kind(v) for v in getattr(self, name)))
        object.__setattr__(self, "fields", tuple(self.fields))
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if self.d not in (2, 3):
            raise ConfigError("d must be 2 or 3")
        if not self.resolutions or any(n < 4 for n in self.resolutions):
            raise ConfigError("resolutions must be a nonempty list of integers >= 4")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if not self.fields:
            raise ConfigError("at least one field is required")
        if not self.lambdas or any(L < 1 for L in self.lambdas):
            raise ConfigError("lambdas must be a nonempty list of values >= 1")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if not 0 < self.q < 1:
            raise ConfigError("q must lie in (0, 1)")
        if not self.p0 > 1:
            raise ConfigError("p0 must exceed 1")
        if self.c_policy not in C_POLICIES:
            raise ConfigError(f"c_policy must be one of {C_POLICIES}")
        if self.eps_policy not in EPS_POLICIES:
            raise ConfigError(f"eps_policy must be one of {EPS_POLICIES}")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.bump_height < 0 or not self.bump_width > 0:
            raise ConfigError("bump height must be >= 0 and width > 0")
        if self.d != self.constants.dim:
            raise ConfigError("constants are configured for a different dimension")
        if self.experiment in ("weak_harnack", "moser") and self.d < 3:
            raise ConfigError(f"{self.experiment} needs d >= 3")
        if self.experiment == "chain_check" and self.d != 3:
            raise ConfigError("chain_check needs d = 3")

    def with_seeds(self, seeds) -> "ExperimentConfig":
        return dataclasses.replace(self, seeds=tuple(int(s) for s in seeds))

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "fields":
                value = [c.token for c in value]
            elif f.name == "constants":
                value = dataclasses.asdict(value)
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        data["fields"] = tuple(FieldChoice.parse(t) for t in data["fields"])
        data["constants"] = ConstantsConfig(**data["constants"])
        for key in ("resolutions", "seeds"):
            data[key] = tuple(int(x) for x in data[key])
        data["lambdas"] = tuple(float(x) for x in data["lambdas"])
        return cls(**data)


def _split_list(raw: str) -> list[str]:
    return [t.strip() for t in raw.split(",") if t.strip()]


_CONVERTERS = {
    "resolutions": lambda s: tuple(int(t) for t in _split_list(s)),
    "seeds": lambda s: tuple(int(t) for t in _split_list(s)),
    "lambdas": lambda s: tuple(float(t) for t in _split_list(s)),
    "fields": lambda s: tuple(FieldChoice.parse(t) for t in _split_list(s)),
}


def _convert(name: str, raw: str, default):
    if name in _CONVERTERS:
        return _CONVERTERS[name](raw)
    if isinstance(default, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw.strip()


def parse_config(text: str) -> ExperimentConfig:
    """Strict INI parse; every malformed input raises ConfigError."""
    try:
        return _parse(text)
    except ConfigError:
        raise
    except (configparser.Error, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def _parse(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser.read_string(text)
    unknown = set(parser.sections()) - {"experiment", "constants"}
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    if not parser.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    defaults = {f.name: f.default for f in dataclasses.fields(ExperimentConfig)}
    kwargs = {}
    for key, raw in parser.items("experiment"):
        name = "experiment" if key == "name" else key
        if name not in defaults or name == "constants":
            raise ConfigError(f"unknown key {key!r} in [experiment]")
        try:
            kwargs[name] = _convert(name, raw, defaults[name])
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None
    if "experiment" not in kwargs:
        raise ConfigError("[experiment] needs a name")
    if parser.has_section("constants"):
        cdefaults = {f.name: f.default for f in dataclasses.fields(ConstantsConfig)}
        ckw = {}
        for key, raw in parser.items("constants"):
            if key not in cdefaults:
                raise ConfigError(f"unknown key {key!r} in [constants]")
            ckw[key] = int(raw) if key == "dim" else float(raw)
        kwargs["constants"] = ConstantsConfig(**ckw)
    elif "d" in kwargs:
        kwargs["constants"] = ConstantsConfig(dim=kwargs["d"])
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def format_config(cfg: ExperimentConfig) -> str:
    """INI text that parses back to ``cfg``."""
    lines = ["[experiment]", f"name = {cfg.experiment}"]
    for f in dataclasses.fields(cfg):
        if f.name in ("experiment", "constants"):
            continue
        value = getattr(cfg, f.name)
        if f.name == "fields":
            text = ", ".join(c.token for c in value)
        elif isinstance(value, tuple):
            text = ", ".join(repr(v) for v in value)
        else:
            text = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{f.name} = {text}")
    lines += ["", "[constants]"]
    for f in dataclasses.fields(cfg.constants):
        lines.append(f"{f.name} = {getattr(cfg.constants, f.name)!r}")
    return "\n".join(lines) + "\n"
