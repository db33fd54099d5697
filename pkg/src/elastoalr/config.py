"""INI run configuration: parsing with line-numbered diagnostics, canonical hashing."""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import re
from dataclasses import asdict, dataclass, field

import numpy as np

from .mode_solver import SOURCE_FAMILIES, SourceSpectrum
from .params import ALT_FAMILY, SHEAR_FAMILY, LameParameters, RadialProfile
from .resonance_lab import default_delta_grid, scan_truncation, tuned_source, unit_gamma_source

GENERATORS = ("single-mode", "unit-gamma", "tuned-nonresonant", "explicit")
OUTPUT_ENV = "ELASTOALR_OUTPUT_DIR"

_SCHEMA = {
    "lame": {"lambda": True, "mu": True},
    "profile": {"core_radius": False, "R": True, "family": False, "c": False},
    "source": {
        "q": True,
        "generator": False,
        "k": False,
        "mode_family": False,
        "amplitude": False,
        "K": False,
        "beta": False,
        "gamma": False,
        "xi": False,
        "eta": False,
    },
    "sweep": {"delta_min": False, "delta_max": False, "points": False, "workers": False},
    "scan": {"q_min": False, "q_max": False, "q_step": False},
    "threed": {"n_values": False, "samples": False, "seed": False},
    "field": {"kind": False, "k": False, "delta": False, "r_max": False, "nr": False, "ntheta": False},
    "output": {"dir": False},
}


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class RunConfig:
    lam: float
    mu: float
    R: float
    q: float
    core_radius: float = 0.0
    family: str = SHEAR_FAMILY
    c: float | None = None
    generator: str = "single-mode"
    k: int = 3
    mode_family: str = "F2"
    amplitude: float = 1.0
    K: int | None = None
    coefficients: dict = field(default_factory=dict)
    delta_min: float = 1e-8
    delta_max: float = 1e-1
    points: int = 8
    workers: int = 1
    q_min: float = 2.1
    q_max: float = 3.5
    q_step: float = 0.1
    n_values: tuple = (2, 3, 4)
    samples: int = 50
    seed: int = 0
    field_kind: str = "perfect-wave"
    field_k: int = 3
    field_delta: float = 1e-2
    r_max: float | None = None
    nr: int = 21
    ntheta: int = 36
    output_dir: str | None = None

    @property
    def params(self) -> LameParameters:
        return LameParameters(self.lam, self.mu)

    def profile(self, delta: float | None = None) -> RadialProfile:
        d = self.delta_max if delta is None else delta
        return RadialProfile.plasmonic(
            self.params, self.R, d, core_radius=self.core_radius, family=self.family, c=self.c
        )

    def delta_grid(self) -> np.ndarray:
        return default_delta_grid(self.delta_max, self.delta_min, self.points)

    def q_grid(self) -> list[float]:
        n = int(round((self.q_max - self.q_min) / self.q_step))
        return [round(self.q_min + i * self.q_step, 10) for i in range(n + 1)]

    def truncation(self) -> int:
        return self.K if self.K is not None else scan_truncation(self.R, self.delta_min)

    def source(self, q: float | None = None) -> SourceSpectrum:
        q = self.q if q is None else q
        if self.generator == "single-mode":
            return SourceSpectrum.single(q, self.mode_family, self.k, self.amplitude)
        if self.generator == "unit-gamma":
            return unit_gamma_source(q, self.truncation())
        if self.generator == "tuned-nonresonant":
            beta = self.coefficients.get("beta")
            if beta:
                from .variational import make_nonresonant_source

                return make_nonresonant_source(self.params, q, self.R, beta)
            return tuned_source(self.params, q, self.R, self.truncation())
        return SourceSpectrum.from_lists(q, **{n: self.coefficients.get(n, ()) for n in SOURCE_FAMILIES})

    def canonical(self) -> dict:
        """Result-determining settings only (no output paths or worker counts)."""
        d = asdict(self)
        for key in ("output_dir", "workers"):
            d.pop(key)
        d["n_values"] = list(d["n_values"])
        d["coefficients"] = {k: list(v) for k, v in sorted(d["coefficients"].items())}
        return d

    def config_hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"), default=repr)
        return hashlib.sha256(text.encode()).hexdigest()


_KEY_RE = re.compile(r"^\s*([^=:\s\[][^=:]*?)\s*[=:]")
_SEC_RE = re.compile(r"^\s*\[([^\]]+)\]")


def _line_index(text: str) -> dict:
    where, section = {}, None
    for i, line in enumerate(text.splitlines(), start=1):
        m = _SEC_RE.match(line)
        if m:
            section = m.group(1).strip()
            where.setdefault((section, None), i)
            continue
        m = _KEY_RE.match(line)
        if m and section is not None and not line.lstrip().startswith(("#", ";")):
            where.setdefault((section, m.group(1).strip()), i)
    return where


def parse_config(text: str, overrides: list[str] | tuple = ()) -> RunConfig:
    """Parse INI text (sections lame, profile, source, sweep, ...) into a validated config.

    ``overrides`` are ``section.key=value`` strings applied after parsing.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None)) from exc
    where = _line_index(text)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        lhs, value = item.split("=", 1)
        sec, key = lhs.strip().split(".", 1)
        if not cp.has_section(sec):
            cp.add_section(sec)
        cp.set(sec, key.strip(), value.strip())

    for sec in cp.sections():
        if sec not in _SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", where.get((sec, None)))
        for key in cp[sec]:
            if key not in _SCHEMA[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]", where.get((sec, key)))
    for sec, keys in _SCHEMA.items():
        for key, required in keys.items():
            if required and not (cp.has_section(sec) and key in cp[sec]):
                raise ConfigError(f"missing required key {key!r} in [{sec}]", where.get((sec, None)))

    def get(sec, key, conv, default=None):
        if not (cp.has_section(sec) and key in cp[sec]):
            return default
        raw = cp[sec][key]
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {sec}.{key}: {raw!r} ({exc})", where.get((sec, key))) from exc

    def floats(raw):
        return tuple(float(x) for x in raw.replace(",", " ").split())

    def ints(raw):
        return tuple(int(x) for x in raw.replace(",", " ").split())

    cfg = RunConfig(
        lam=get("lame", "lambda", float),
        mu=get("lame", "mu", float),
        R=get("profile", "R", float),
        q=get("source", "q", float),
        core_radius=get("profile", "core_radius", float, 0.0),
        family=get("profile", "family", str, SHEAR_FAMILY),
        c=get("profile", "c", float),
        generator=get("source", "generator", str, "single-mode"),
        k=get("source", "k", int, 3),
        mode_family=get("source", "mode_family", str, "F2"),
        amplitude=get("source", "amplitude", float, 1.0),
        K=get("source", "K", int),
        coefficients={n: get("source", n, floats) for n in SOURCE_FAMILIES if get("source", n, floats)},
        delta_min=get("sweep", "delta_min", float, 1e-8),
        delta_max=get("sweep", "delta_max", float, 1e-1),
        points=get("sweep", "points", int, 8),
        workers=get("sweep", "workers", int, 1),
        q_min=get("scan", "q_min", float, 2.1),
        q_max=get("scan", "q_max", float, 3.5),
        q_step=get("scan", "q_step", float, 0.1),
        n_values=get("threed", "n_values", ints, (2, 3, 4)),
        samples=get("threed", "samples", int, 50),
        seed=get("threed", "seed", int, 0),
        field_kind=get("field", "kind", str, "perfect-wave"),
        field_k=get("field", "k", int, 3),
        field_delta=get("field", "delta", float, 1e-2),
        r_max=get("field", "r_max", float),
        nr=get("field", "nr", int, 21),
        ntheta=get("field", "ntheta", int, 36),
        output_dir=get("output", "dir", str),
    )
    _validate(cfg, where)
    return cfg


def _validate(cfg: RunConfig, where: dict) -> None:
    at = lambda sec, key: where.get((sec, key))
    if not (cfg.mu > 0 and 2 * cfg.lam + 2 * cfg.mu > 0):
        raise ConfigError(
            f"Lame pair (lambda={cfg.lam}, mu={cfg.mu}) violates strong convexity: need mu > 0 and 2 lambda + 2 mu > 0",
            at("lame", "mu") if cfg.mu <= 0 else at("lame", "lambda"),
        )
    if not (math.isfinite(cfg.R) and cfg.R > 0):
        raise ConfigError("R must be positive", at("profile", "R"))
    if cfg.family not in (SHEAR_FAMILY, ALT_FAMILY):
        raise ConfigError(f"family must be {SHEAR_FAMILY!r} or {ALT_FAMILY!r}", at("profile", "family"))
    if not 0 <= cfg.core_radius < cfg.R:
        raise ConfigError("core_radius must satisfy 0 <= core_radius < R", at("profile", "core_radius"))
    if cfg.c is not None and cfg.c >= 0:
        raise ConfigError("an explicit plasmonic amplitude c must be negative", at("profile", "c"))
    if not cfg.q > cfg.R:
        raise ConfigError(f"source radius q={cfg.q} must exceed the shell radius R={cfg.R}", at("source", "q"))
    if cfg.generator not in GENERATORS:
        raise ConfigError(f"generator must be one of {', '.join(GENERATORS)}", at("source", "generator"))
    if cfg.generator == "single-mode":
        if cfg.mode_family not in SOURCE_FAMILIES.values():
            raise ConfigError("mode_family must be F1, F2, F3 or F4", at("source", "mode_family"))
        if cfg.k < 1:
            raise ConfigError("k must be >= 1", at("source", "k"))
    if cfg.generator == "tuned-nonresonant" and cfg.core_radius != 1.0:
        raise ConfigError("the tuned-nonresonant source requires core_radius = 1", at("profile", "core_radius"))
    if cfg.generator == "explicit" and not cfg.coefficients:
        raise ConfigError("explicit generator needs at least one of beta/gamma/xi/eta", at("source", "generator"))
    if cfg.K is not None and cfg.K < 1:
        raise ConfigError("K must be >= 1", at("source", "K"))
    if not 0 < cfg.delta_min < cfg.delta_max < 1:
        raise ConfigError("need 0 < delta_min < delta_max < 1", at("sweep", "delta_min"))
    if cfg.points < 4:
        raise ConfigError("a sweep needs at least 4 points", at("sweep", "points"))
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1", at("sweep", "workers"))
    if not (cfg.q_step > 0 and cfg.q_max > cfg.q_min):
        raise ConfigError("need q_step > 0 and q_max > q_min", at("scan", "q_step"))
    if cfg.samples < 20 or any(n < 2 for n in cfg.n_values):
        raise ConfigError("need samples >= 20 and every n >= 2", at("threed", "samples"))
    if cfg.nr < 2 or cfg.ntheta < 1:
        raise ConfigError("need nr >= 2 and ntheta >= 1", at("field", "nr"))
    try:
        cfg.source()
    except ValueError as exc:
        raise ConfigError(f"invalid source: {exc}", at("source", None)) from exc


DEFAULT_CONFIG = """\
[lame]
lambda = 1.0
mu = 1.0

[profile]
core_radius = 0.0
R = 2.0

[source]
q = 3.0
generator = single-mode
k = 3
mode_family = F2
amplitude = 1.0

[sweep]
delta_min = 1e-7
delta_max = 1e-1
points = 7
"""
