"""Analysis configuration: an INI document with function, gradient and analysis sections.

Example::

    [function]
    name = bowl
    dimension = 2
    value = x1^2 + 3*x2^2
    domain = -2:2, -2:2

    [gradient]
    g1 = 2*x1
    g2 = 6*x2

    [analysis]
    seed = 7
    modes = necessary, sufficient, oracles
    format = json

A config may instead name a built-in fixture (``fixture = ex3.5``).  The
function sections are then optional; if present (as in exported fixture
files) they must match the fixture's sources.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import ConfigError
from .model import FunctionSpec
from .settings import DEFAULT_TOLERANCES, Tolerances

MODES = ("necessary", "sufficient", "oracles", "subdiff-only")
FORMATS = ("json", "markdown")
TOLERANCE_KEYS = ("eps_strict", "eps_set", "eps_memb", "eps_crit")


@dataclass(frozen=True)
class AnalysisConfig:
    seed: int
    fixture: Optional[str] = None
    name: Optional[str] = None
    dimension: Optional[int] = None
    value: Optional[str] = None
    gradient: tuple = ()
    domain: Optional[tuple] = None
    grad_lipschitz: Optional[float] = None
    grid_density: Optional[int] = None
    pair_count: int = 2000
    direction_count: Optional[int] = None
    tolerance_overrides: dict = field(default_factory=dict)
    format: str = "json"
    modes: tuple = ("necessary", "sufficient", "oracles")

    def __post_init__(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError("seed must be an integer")
        if self.fixture is None and self.value is None:
            raise ConfigError("config needs either a fixture name or a [function] section")
        if self.fixture is not None and self.value is not None:
            raise ConfigError("give either a fixture or an inline function, not both")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
        bad = [m for m in self.modes if m not in MODES]
        if bad:
            raise ConfigError(f"unknown mode(s) {bad}; expected a subset of {', '.join(MODES)}")
        if self.grid_density is not None and self.grid_density < 2:
            raise ConfigError("grid_density must be >= 2")
        if self.pair_count < 1:
            raise ConfigError("pair_count must be positive")
        if self.direction_count is not None and self.direction_count < 1:
            raise ConfigError("direction_count must be positive")
        for k, v in self.tolerance_overrides.items():
            if k not in TOLERANCE_KEYS:
                raise ConfigError(f"unknown tolerance {k!r}")
            if not v > 0:
                raise ConfigError(f"tolerance {k} must be positive")

    @property
    def tolerances(self) -> Tolerances:
        return DEFAULT_TOLERANCES.with_overrides(**self.tolerance_overrides)

    def with_cli(self, fixture=None, seed=None, format=None, modes=None) -> "AnalysisConfig":
        kw = {}
        if fixture is not None:
            kw.update(fixture=fixture, value=None, gradient=(), name=None, dimension=None,
                      domain=None, grad_lipschitz=None)
        if seed is not None:
            kw["seed"] = seed
        if format is not None:
            kw["format"] = format
        if modes is not None:
            kw["modes"] = parse_modes(modes)
        return replace(self, **kw)

    def build_function(self) -> FunctionSpec:
        if self.fixture is not None:
            from .fixtures import get_fixture
            try:
                return get_fixture(self.fixture).spec
            except KeyError as exc:
                raise ConfigError(str(exc.args[0])) from None
        return FunctionSpec.from_sources(
            self.name or "user", self.value, list(self.gradient), self.dimension,
            self.domain, self.grad_lipschitz)

    def echo(self) -> dict:
        """Config as it enters the report."""
        return {
            "seed": self.seed,
            "fixture": self.fixture,
            "name": self.name,
            "dimension": self.dimension,
            "value": self.value,
            "gradient": list(self.gradient),
            "domain": None if self.domain is None else [list(iv) for iv in self.domain],
            "grad_lipschitz": self.grad_lipschitz,
            "grid_density": self.grid_density,
            "pair_count": self.pair_count,
            "direction_count": self.direction_count,
            "tolerance_overrides": dict(sorted(self.tolerance_overrides.items())),
            "format": self.format,
            "modes": list(self.modes),
        }


def parse_modes(text) -> tuple:
    if isinstance(text, (list, tuple)):
        items = [str(t).strip() for t in text]
    else:
        items = [t.strip() for t in str(text).split(",")]
    items = [t for t in items if t]
    if items == ["all"]:
        return MODES[:3]
    if items == ["none"]:
        return ()
    bad = [t for t in items if t not in MODES]
    if bad:
        raise ConfigError(f"unknown mode(s) {bad}; expected a subset of {', '.join(MODES)}")
    return tuple(m for m in MODES if m in items)


def _domain(text: str) -> tuple:
    out = []
    for part in text.split(","):
        bits = part.strip().split(":")
        if len(bits) != 2:
            raise ConfigError(f"domain interval {part.strip()!r} is not of the form lo:hi")
        try:
            out.append((float(bits[0]), float(bits[1])))
        except ValueError:
            raise ConfigError(f"domain interval {part.strip()!r} is not numeric") from None
    return tuple(out)


def _int(section, key, default=None):
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from None


def _float(section, key):
    raw = section.get(key)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {raw!r}") from None


def _check_fixture_sources(name: str, cp) -> None:
    """An exported fixture config carries its sources; they must still match."""
    from .fixtures import get_fixture
    try:
        spec = get_fixture(name).spec
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    fn = cp["function"]
    grads = cp["gradient"] if cp.has_section("gradient") else {}
    given = (fn.get("value", "").strip(),
             tuple(grads.get(f"g{i + 1}", "").strip() for i in range(spec.dimension)))
    expected = (spec.value_source.strip(), tuple(g.strip() for g in spec.gradient_sources))
    if given != expected:
        raise ConfigError(f"[function] does not match fixture {name!r}; drop one of them")


def parse_config(text: str) -> AnalysisConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    known = {"function", "gradient", "analysis"}
    extra = set(cp.sections()) - known
    if extra:
        raise ConfigError(f"unknown section(s): {sorted(extra)}")
    if not cp.has_section("analysis"):
        raise ConfigError("missing [analysis] section")
    an = cp["analysis"]
    if "seed" not in an:
        raise ConfigError("seed is mandatory in [analysis]")

    kw = dict(
        seed=_int(an, "seed"),
        fixture=an.get("fixture") or None,
        grid_density=_int(an, "grid_density"),
        pair_count=_int(an, "pair_count", 2000),
        direction_count=_int(an, "direction_count"),
        format=an.get("format", "json").strip(),
        tolerance_overrides={k: _float(an, k) for k in TOLERANCE_KEYS if k in an},
    )
    if "modes" in an:
        kw["modes"] = parse_modes(an["modes"])

    if cp.has_section("function"):
        fn = cp["function"]
        if kw["fixture"] is not None:
            _check_fixture_sources(kw["fixture"], cp)
            return AnalysisConfig(**kw)
        if "value" not in fn:
            raise ConfigError("[function] needs a value expression")
        dim = _int(fn, "dimension")
        grads = cp["gradient"] if cp.has_section("gradient") else {}
        if dim is None:
            dim = len(grads)
        names = [f"g{i + 1}" for i in range(dim)]
        missing = [g for g in names if g not in grads]
        if missing or len(grads) != dim:
            raise ConfigError(f"[gradient] must define exactly {', '.join(names)}")
        kw.update(
            name=fn.get("name", "user"),
            dimension=dim,
            value=fn["value"],
            gradient=tuple(grads[g] for g in names),
            domain=_domain(fn["domain"]) if "domain" in fn else None,
            grad_lipschitz=_float(fn, "grad_lipschitz"),
        )
    elif cp.has_section("gradient"):
        raise ConfigError("[gradient] given without [function]")
    return AnalysisConfig(**kw)


def load_config(path) -> AnalysisConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
