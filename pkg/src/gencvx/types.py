"""Verdict enums and the witness record shared across modules."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class ConditionStatus(str, enum.Enum):
    HOLDS_SAMPLED = "HOLDS_SAMPLED"
    FAILS = "FAILS"
    INCONCLUSIVE = "INCONCLUSIVE"


class OracleStatus(str, enum.Enum):
    CONSISTENT_SAMPLED = "CONSISTENT_SAMPLED"
    VIOLATED = "VIOLATED"


class Membership(str, enum.Enum):
    VERIFIED = "VERIFIED"
    REJECTED = "REJECTED"
    INCONCLUSIVE = "INCONCLUSIVE"


class WitnessKind(str, enum.Enum):
    NEC_VIOLATION = "NEC_VIOLATION"
    SUF_VIOLATION = "SUF_VIOLATION"
    DEFINITION_VIOLATION = "DEFINITION_VIOLATION"


class Consistency(str, enum.Enum):
    CONSISTENT = "CONSISTENT"
    PAPER_CONTRADICTION = "PAPER_CONTRADICTION"
    INCONCLUSIVE = "INCONCLUSIVE"


class Property(str, enum.Enum):
    QUASICONVEX = "QUASICONVEX"
    STRICT_QUASICONVEX = "STRICT_QUASICONVEX"
    PSEUDOCONVEX = "PSEUDOCONVEX"
    STRICT_PSEUDOCONVEX = "STRICT_PSEUDOCONVEX"


def _vec(v):
    if v is None:
        return None
    return tuple(float(c) for c in np.atleast_1d(np.asarray(v, dtype=float)))


@dataclass(frozen=True)
class Witness:
    """A concrete counterexample.

    ``x``/``u``/``z`` are the point, direction and subgradient of a condition
    failure.  Definition-level witnesses use ``x``, ``y`` and optionally
    ``lam``; ``inner_product`` then holds the quantity that decided the
    violation (a gradient pairing or a value gap, see ``context``).
    """

    x: tuple
    u: Optional[tuple]
    z: Optional[tuple]
    inner_product: float
    kind: WitnessKind
    context: str
    y: Optional[tuple] = None
    lam: Optional[float] = None
    margin: Optional[float] = None
    extra: dict = field(default_factory=dict, compare=False)

    @classmethod
    def make(cls, x, u=None, z=None, inner_product=0.0, kind=WitnessKind.NEC_VIOLATION,
             context="", y=None, lam=None, margin=None, **extra):
        return cls(
            x=_vec(x), u=_vec(u), z=_vec(z), inner_product=float(inner_product),
            kind=WitnessKind(kind), context=context, y=_vec(y),
            lam=None if lam is None else float(lam),
            margin=None if margin is None else float(margin),
            extra={k: (float(v) if isinstance(v, (int, float, np.floating)) else v)
                   for k, v in extra.items()},
        )

    def to_dict(self) -> dict:
        d = {
            "x": list(self.x),
            "u": None if self.u is None else list(self.u),
            "z": None if self.z is None else list(self.z),
            "inner_product": self.inner_product,
            "kind": self.kind.value,
            "context": self.context,
        }
        if self.y is not None:
            d["y"] = list(self.y)
        if self.lam is not None:
            d["lam"] = self.lam
        if self.margin is not None:
            d["margin"] = self.margin
        if self.extra:
            d["extra"] = dict(sorted(self.extra.items()))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Witness":
        return cls.make(
            d["x"], d.get("u"), d.get("z"), d["inner_product"], d["kind"], d.get("context", ""),
            y=d.get("y"), lam=d.get("lam"), margin=d.get("margin"), **d.get("extra", {}),
        )
