"""Reference functions with closed-form second-order subdifferentials at 0."""

from __future__ import annotations

import enum
import math
import os
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .model import FunctionSpec
from .types import Property, Witness, WitnessKind


class SetKind(str, enum.Enum):
    EMPTY = "EMPTY"
    SINGLETON = "SINGLETON"
    INTERVAL = "INTERVAL"
    FINITE_SET = "FINITE_SET"


@dataclass(frozen=True)
class ExactSet:
    """Closed-form 1-D set: ``values`` holds the point(s) or ``(lo, hi)``."""

    kind: SetKind
    values: tuple = ()

    def __post_init__(self):
        if self.kind is SetKind.EMPTY and self.values:
            raise ValueError("EMPTY carries no values")
        if self.kind is SetKind.SINGLETON and len(self.values) != 1:
            raise ValueError("SINGLETON carries exactly one value")
        if self.kind is SetKind.INTERVAL and (len(self.values) != 2 or self.values[0] > self.values[1]):
            raise ValueError("INTERVAL needs lo <= hi")
        if self.kind is SetKind.FINITE_SET and not self.values:
            raise ValueError("FINITE_SET must be nonempty")

    @classmethod
    def empty(cls):
        return cls(SetKind.EMPTY)

    @classmethod
    def point(cls, v):
        return cls(SetKind.SINGLETON, (float(v),))

    @classmethod
    def interval(cls, a, b):
        lo, hi = sorted((float(a), float(b)))
        if lo == hi:
            return cls.point(lo)
        return cls(SetKind.INTERVAL, (lo, hi))

    @classmethod
    def points(cls, *vs):
        vals = tuple(sorted({float(v) for v in vs}))
        return cls.point(vals[0]) if len(vals) == 1 else cls(SetKind.FINITE_SET, vals)

    @property
    def is_empty(self) -> bool:
        return self.kind is SetKind.EMPTY

    def intervals(self) -> list[tuple[float, float]]:
        if self.kind is SetKind.INTERVAL:
            return [self.values]
        return [(v, v) for v in self.values]

    @property
    def width(self) -> float:
        if self.is_empty:
            return 0.0
        return max(self.values) - min(self.values)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "values": list(self.values)}


SetMap = Callable[[np.ndarray, np.ndarray], Optional[ExactSet]]


@dataclass(frozen=True, eq=False)
class Fixture:
    name: str
    spec: FunctionSpec
    expected: dict
    frechet_at_zero: Callable[[float], ExactSet]
    mordukhovich_at_zero: Callable[[float], ExactSet]
    known_witnesses: tuple = ()
    note: str = ""

    def exact_frechet2(self, x, u) -> Optional[ExactSet]:
        return self._at(self.frechet_at_zero, x, u)

    def exact_mordukhovich2(self, x, u) -> Optional[ExactSet]:
        return self._at(self.mordukhovich_at_zero, x, u)

    @staticmethod
    def _at(fn, x, u):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        u = float(np.atleast_1d(np.asarray(u, dtype=float))[0])
        if x.shape != (1,) or x[0] != 0.0:
            return None
        if u == 0.0:
            return ExactSet.point(0.0)
        return fn(u)


def _flags(qc, sqc, pc, spc) -> dict:
    return {
        Property.QUASICONVEX: qc,
        Property.STRICT_QUASICONVEX: sqc,
        Property.PSEUDOCONVEX: pc,
        Property.STRICT_PSEUDOCONVEX: spc,
    }


def flags_consistent(flags: dict) -> bool:
    P = Property
    imp = [
        (P.STRICT_QUASICONVEX, P.QUASICONVEX),
        (P.STRICT_PSEUDOCONVEX, P.PSEUDOCONVEX),
        (P.PSEUDOCONVEX, P.QUASICONVEX),
    ]
    return all(not flags[a] or flags[b] for a, b in imp)


def _spec(name, value, gradient, half_width=2.0):
    return FunctionSpec.from_sources(name, value, [gradient], dimension=1,
                                     domain_box=((-half_width, half_width),))


def _in_x(integrand: str) -> str:
    return re.sub(r"\bt\b", "x1", integrand)


def _sym(u):
    return ExactSet.interval(-abs(u), abs(u))


_OSC_POS = "2*t^2 + t^2*sin(1/t)"


def _build() -> list[Fixture]:
    pi = math.pi
    out = []

    out.append(Fixture(
        name="ex3.3",
        spec=_spec(
            "ex3.3",
            f"integral0(piecewise(t > 0 -> {_OSC_POS}, else -> 0), abs(x1))",
            "piecewise(x1 > 0 -> 2*x1^2 + x1^2*sin(1/x1), "
            "x1 < 0 -> -(2*x1^2 + x1^2*sin(-1/x1)), else -> 0)",
        ),
        expected=_flags(True, True, True, True),
        frechet_at_zero=lambda u: ExactSet.point(0.0),
        mordukhovich_at_zero=_sym,
        note="even function, strictly increasing in |x|; gradient is O(x^2) at 0",
    ))

    out.append(Fixture(
        name="ex3.5",
        # wider box so the gradient identity can be probed at x = -3
        spec=_spec("ex3.5", "0.5 * x1^2 * sign(x1)", "abs(x1)", half_width=4.0),
        expected=_flags(True, True, False, False),
        frechet_at_zero=lambda u: ExactSet.interval(-u, u) if u >= 0 else ExactSet.empty(),
        # g = u|y|; for u < 0 this is a concave kink with limiting set {u, -u}
        mordukhovich_at_zero=lambda u: _sym(u) if u >= 0 else ExactSet.points(u, -u),
        known_witnesses=(
            Witness.make(0.0, u=1.0, z=-1.0, inner_product=-1.0,
                         kind=WitnessKind.NEC_VIOLATION, context="NEC_PC_3.4"),
        ),
    ))

    osc_a = "piecewise(t > 0 -> -2*t^2 + t^2*sin(1/t), t < 0 -> 2*t^2 + t^2*sin(1/t), else -> 0)"
    out.append(Fixture(
        name="ex4.3a",
        spec=_spec("ex4.3a", f"integral0({osc_a}, x1)", _in_x(osc_a)),
        expected=_flags(False, False, False, False),
        frechet_at_zero=lambda u: ExactSet.point(0.0),
        mordukhovich_at_zero=_sym,
        known_witnesses=(
            Witness.make(1 / pi, y=-1 / pi, inner_product=4 / pi ** 3,
                         kind=WitnessKind.DEFINITION_VIOLATION, context="CROUZEIX",
                         reverse_product=4 / pi ** 3),
        ),
        note="0 is a strict local maximum",
    ))

    osc_b = "piecewise(t = 0 -> 0, else -> -2*t - t*sin(log(abs(t))))"
    r2 = math.sqrt(2.0)
    out.append(Fixture(
        name="ex4.3b",
        spec=_spec("ex4.3b", f"integral0({osc_b}, x1)", _in_x(osc_b)),
        expected=_flags(False, False, False, False),
        frechet_at_zero=lambda u: ExactSet.empty(),
        mordukhovich_at_zero=lambda u: ExactSet.interval((-2 - r2) * u, (-2 + r2) * u),
        known_witnesses=(
            Witness.make(0.0, y=1.0, inner_product=-2.0,
                         kind=WitnessKind.DEFINITION_VIOLATION, context="GRADIENT_PAIRING",
                         forward_product=0.0),
        ),
        note="0 is a strict local maximum",
    ))

    out.append(Fixture(
        name="ex4.8",
        spec=_spec("ex4.8", "piecewise(x1 > 0 -> 3*x1^2, else -> 0.5*x1^2)",
                   "piecewise(x1 > 0 -> 6*x1, else -> x1)"),
        expected=_flags(True, True, True, True),
        frechet_at_zero=lambda u: ExactSet.interval(u, 6 * u) if u >= 0 else ExactSet.empty(),
        mordukhovich_at_zero=lambda u: (
            ExactSet.interval(u, 6 * u) if u >= 0 else ExactSet.points(u, 6 * u)
        ),
        known_witnesses=(
            Witness.make(0.0, u=-1.0, inner_product=0.0,
                         kind=WitnessKind.SUF_VIOLATION, context="SUF_SPC_4.6"),
        ),
    ))

    osc_c = ("piecewise(t >= 1/pi -> 1/(2*pi), t <= -1/pi -> -1/(2*pi), t = 0 -> 0, "
             "else -> t/2 + t^2*sin(1/t))")
    out.append(Fixture(
        name="ex4.9",
        spec=_spec("ex4.9", f"integral0({osc_c}, x1)", _in_x(osc_c)),
        expected=_flags(True, True, True, True),
        frechet_at_zero=lambda u: ExactSet.point(0.5 * u),
        mordukhovich_at_zero=lambda u: ExactSet.interval(-0.5 * u, 1.5 * u),
        known_witnesses=(
            Witness.make(0.0, u=1.0, z=-0.5, inner_product=-0.5,
                         kind=WitnessKind.SUF_VIOLATION, context="SUF_SPC_4.2"),
        ),
    ))
    return out


_FIXTURES: Optional[list] = None


def load_fixtures() -> list[Fixture]:
    global _FIXTURES
    if _FIXTURES is None:
        _FIXTURES = _build()
    return list(_FIXTURES)


def get_fixture(name: str) -> Fixture:
    for fx in load_fixtures():
        if fx.name == name:
            return fx
    raise KeyError(f"unknown fixture {name!r}; known: {', '.join(fixture_names())}")


def fixture_names() -> list[str]:
    return [fx.name for fx in load_fixtures()]


def fixture_config_text(fx: Fixture, seed: int = 7) -> str:
    spec = fx.spec
    lines = [
        "[function]",
        f"name = {spec.name}",
        f"dimension = {spec.dimension}",
        f"value = {spec.value_source}",
        "domain = " + ", ".join(f"{lo!r}:{hi!r}" for lo, hi in spec.domain_box),
        "",
        "[gradient]",
    ]
    lines += [f"g{i + 1} = {src}" for i, src in enumerate(spec.gradient_sources)]
    lines += ["", "[analysis]", f"fixture = {fx.name}", f"seed = {seed}", ""]
    return "\n".join(lines)


def export_fixtures(directory) -> list[str]:
    """Write one config file per fixture into ``directory``; returns the paths."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for fx in load_fixtures():
        path = os.path.join(directory, f"{fx.name}.ini")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(fixture_config_text(fx))
        paths.append(path)
    return paths
