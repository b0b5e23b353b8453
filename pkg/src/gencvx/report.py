"""Pipeline orchestration and report emission (JSON / markdown)."""

from __future__ import annotations

import json
import math
from importlib import resources
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import conditions as C
from .config import AnalysisConfig
from .fixtures import get_fixture
from .model import FunctionSpec, check_gradient
from .oracles import crouzeix_first_order_check, crouzeix_products, guided_pairs, run_oracles
from .settings import DEFAULT_SAMPLING
from .subdiff import SetEstimator, frechet_membership, scalarize
from .types import ConditionStatus, Consistency, Membership, OracleStatus, Property, Witness

SCHEMA_VERSION = "1.0"
MAX_CRITICAL_DUMPS = 5

# condition id -> (property the oracle checks, necessary?)
IMPLICATIONS = {
    C.NEC_QC: (Property.QUASICONVEX, True),
    C.NEC_PC: (Property.PSEUDOCONVEX, True),
    C.SUF_SPC_M: (Property.STRICT_PSEUDOCONVEX, False),
    C.SUF_SQC: (Property.STRICT_QUASICONVEX, False),
    C.SUF_SPC_F: (Property.STRICT_PSEUDOCONVEX, False),
    C.VARIANT: (Property.QUASICONVEX, False),
}

_IMPLIED = {
    C.SUF_SPC_M: "strictly pseudoconvex (sampled evidence)",
    C.SUF_SQC: "strictly quasiconvex (sampled evidence)",
    C.SUF_SPC_F: "strictly pseudoconvex (sampled evidence)",
}
_REFUTED = {
    C.NEC_QC: "not quasiconvex (necessary condition fails)",
    C.NEC_PC: "not pseudoconvex (necessary condition fails)",
}

EXIT_OK, EXIT_USAGE, EXIT_INCONCLUSIVE, EXIT_CONTRADICTION = 0, 1, 2, 3


@dataclass
class ConsistencyEntry:
    condition_id: str
    property: Property
    status: Consistency
    evaluated: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "condition_id": self.condition_id,
            "property": self.property.value,
            "status": self.status.value,
            "evaluated": self.evaluated,
            "detail": self.detail,
            "sufficient": self.condition_id in C.SUFFICIENT and self.condition_id != C.VARIANT,
        }


@dataclass
class AnalysisReport:
    config: AnalysisConfig
    function: FunctionSpec
    gradient_check: float
    critical_points: list = field(default_factory=list)
    conditions: dict = field(default_factory=dict)
    oracles: dict = field(default_factory=dict)
    crouzeix: Optional[object] = None
    set_estimates: list = field(default_factory=list)
    known_witnesses: list = field(default_factory=list)
    consistency: dict = field(default_factory=dict)
    classification: list = field(default_factory=list)

    @property
    def exit_status(self) -> int:
        states = {e.status for e in self.consistency.values()}
        if Consistency.PAPER_CONTRADICTION in states:
            return EXIT_CONTRADICTION
        if Consistency.INCONCLUSIVE in states:
            return EXIT_INCONCLUSIVE
        return EXIT_OK

    def to_dict(self) -> dict:
        f = self.function
        return _clean({
            "schema_version": SCHEMA_VERSION,
            "function": {
                "name": f.name,
                "dimension": f.dimension,
                "value": f.value_source,
                "gradient": list(f.gradient_sources),
                "domain_box": [list(iv) for iv in f.domain_box],
                "fixture": self.config.fixture,
            },
            "config": self.config.echo(),
            "gradient_check_ratio": self.gradient_check,
            "critical_points": [list(map(float, p)) for p in self.critical_points],
            "conditions": [v.to_dict() for v in self.conditions.values()],
            "oracles": [v.to_dict() for v in self.oracles.values()],
            "crouzeix": None if self.crouzeix is None else self.crouzeix.to_dict(),
            "set_estimates": self.set_estimates,
            "known_witnesses": self.known_witnesses,
            "consistency": {k: v.to_dict() for k, v in self.consistency.items()},
            "classification": list(self.classification),
            "exit_status": self.exit_status,
        })


def _clean(obj):
    """Plain JSON types; non-finite floats become strings so the output stays strict JSON."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


# --------------------------------------------------------------------------
# pipeline
# --------------------------------------------------------------------------

def _condition_ids(modes) -> list:
    ids = []
    if "necessary" in modes:
        ids += list(C.NECESSARY)
    if "sufficient" in modes:
        ids += list(C.SUFFICIENT)
    return ids


def _axes(n: int) -> list:
    eye = np.eye(n)
    return [s * eye[k] for k in range(n) for s in (1.0, -1.0)]


def _set_dumps(est: SetEstimator, points: list) -> list:
    out = []
    for x in points[:MAX_CRITICAL_DUMPS]:
        for u in _axes(len(x)):
            a = est.analyse(x, u)
            out.append({
                "x": [float(c) for c in x],
                "u": [float(c) for c in u],
                "frechet": a.frechet.to_dict(),
                "mordukhovich": a.mordukhovich.to_dict(),
            })
    return out


def replay_known(f: FunctionSpec, w: Witness, est: SetEstimator) -> dict:
    """Recompute a recorded witness; returns the observed quantities."""
    ctx = w.context
    rec = {"context": ctx, "witness": w.to_dict()}
    if ctx in ("CROUZEIX", "GRADIENT_PAIRING"):
        fwd, rev = crouzeix_products(f, w.x, w.y)
        d = np.array(w.y) - np.array(w.x)
        gy = f.gradients(np.array(w.y)[None, :])[0]
        rec.update(forward_product=fwd, reverse_product=rev, gradient_y_dot_y_minus_x=float(gy @ d))
        if ctx == "CROUZEIX":
            observed = fwd
            reproduced = fwd > 0 and rev > 0
        else:
            observed = float(gy @ d)
            reproduced = abs(fwd) <= 1e-9 and observed < 0
        rec.update(observed=observed, reproduced=bool(reproduced))
        return rec

    x, u = np.array(w.x), np.array(w.u)
    if ctx == C.NEC_PC:
        z = np.array(w.z)
        m = frechet_membership(scalarize(f, u), x, z, seed=est.seed, tol=est.tol, sampling=est.sampling)
        observed = float(z @ u)
        rec.update(observed=observed, membership=m.status.value,
                   reproduced=bool(m.status is Membership.VERIFIED and observed < 0))
        return rec
    cell = C.evaluate_cell(est, x, u, ctx)
    rec["status"] = cell.status.value
    reproduced = cell.status is ConditionStatus.FAILS
    if w.z is not None:
        cloud = est.mordukhovich(x, u).cloud
        z = np.array(w.z)
        dist = float(np.min(np.linalg.norm(cloud - z, axis=1))) if len(cloud) else math.inf
        rec["distance_to_estimate"] = dist
        rec["observed"] = float(z @ u)
        reproduced = reproduced and dist <= 1e-2 * (1 + float(np.linalg.norm(z)))
    else:
        rec["certified_empty"] = bool(est.frechet(x, u).is_certified_empty)
        rec["observed"] = 0.0
    rec["reproduced"] = bool(reproduced)
    return rec


def _consistency(f, verdicts: dict, oracles: dict, seed, tol) -> dict:
    out = {}
    for cid, (prop, necessary) in IMPLICATIONS.items():
        v = verdicts.get(cid)
        o = oracles.get(prop)
        if v is None or o is None:
            out[cid] = ConsistencyEntry(cid, prop, Consistency.CONSISTENT, False,
                                        "not evaluated in the selected modes")
            continue
        if cid == C.VARIANT:
            out[cid] = ConsistencyEntry(cid, prop, Consistency.CONSISTENT, True,
                                        C.NOTES[C.VARIANT])
            continue
        consistent = o.status is OracleStatus.CONSISTENT_SAMPLED
        if necessary:
            if v.status is ConditionStatus.FAILS and consistent:
                if C.replay_witness(f, v.witness, cid, seed, tol):
                    out[cid] = ConsistencyEntry(
                        cid, prop, Consistency.PAPER_CONTRADICTION, True,
                        "necessary condition fails with a replayable witness on a function "
                        "the definition oracle finds consistent")
                else:
                    out[cid] = ConsistencyEntry(cid, prop, Consistency.INCONCLUSIVE, True,
                                                "failure witness did not replay")
            elif v.status is ConditionStatus.INCONCLUSIVE and consistent:
                out[cid] = ConsistencyEntry(cid, prop, Consistency.INCONCLUSIVE, True,
                                            "condition inconclusive at some sampled cell")
            else:
                out[cid] = ConsistencyEntry(cid, prop, Consistency.CONSISTENT, True)
        else:
            if v.status is ConditionStatus.HOLDS_SAMPLED and not consistent:
                out[cid] = ConsistencyEntry(
                    cid, prop, Consistency.PAPER_CONTRADICTION, True,
                    "sufficient condition holds but the oracle found a definition violation")
            elif v.status is ConditionStatus.INCONCLUSIVE and not consistent:
                out[cid] = ConsistencyEntry(cid, prop, Consistency.INCONCLUSIVE, True,
                                            "condition inconclusive while the oracle reports a violation")
            else:
                out[cid] = ConsistencyEntry(cid, prop, Consistency.CONSISTENT, True)
    return out


def _classify(verdicts: dict, oracles: dict) -> list:
    out = []
    for cid, v in verdicts.items():
        if v.status is ConditionStatus.HOLDS_SAMPLED and cid in _IMPLIED:
            out.append(f"{cid}: {_IMPLIED[cid]}")
        if v.status is ConditionStatus.FAILS and cid in _REFUTED:
            out.append(f"{cid}: {_REFUTED[cid]}")
    for prop, o in oracles.items():
        if o.status is OracleStatus.VIOLATED:
            out.append(f"oracle: not {prop.value.lower().replace('_', ' ')} (definition witness)")
    return out


def run_analysis(config: AnalysisConfig) -> AnalysisReport:
    """Run the configured checks.

    Raises:
        ConfigError, ParseError: invalid configuration or expression.
        GradientMismatch: the supplied gradient disagrees with finite differences.
    """
    f = config.build_function()
    ratio = check_gradient(f, seed=config.seed)
    tol = config.tolerances
    rep = AnalysisReport(config, f, ratio)
    modes = set(config.modes)
    if not modes:
        rep.consistency = _consistency(f, {}, {}, config.seed, tol)
        return rep

    points = C.scan_points(f, config.grid_density, config.seed, tol)
    crit = [p.point for p in points if p.is_critical]
    rep.critical_points = crit
    est = SetEstimator(f, config.seed, tol, DEFAULT_SAMPLING)

    ids = _condition_ids(modes)
    if ids:
        run = C.run_conditions(f, ids, seed=config.seed, direction_count=config.direction_count,
                               tol=tol, points=points, estimator=est)
        rep.conditions = run.verdicts
    if "oracles" in modes:
        # necessary-condition failures point at short segments worth testing
        guided = []
        for cid in C.NECESSARY:
            v = rep.conditions.get(cid)
            if v is not None and v.witness is not None:
                guided += guided_pairs(f, v.witness.x, v.witness.u)
        rep.oracles = run_oracles(f, config.pair_count, seed=config.seed, critical_points=crit,
                                  tol=tol, extra_pairs=guided)
        rep.crouzeix = crouzeix_first_order_check(f, config.pair_count, config.seed, crit, tol)
        # a sufficient condition that holds next to a definition violation is
        # re-examined at the cells the violating pair suggests
        for cid, v in list(rep.conditions.items()):
            prop, necessary = IMPLICATIONS[cid]
            o = rep.oracles.get(prop)
            if necessary or v.status is not ConditionStatus.HOLDS_SAMPLED or o is None or o.witness is None:
                continue
            cells = C.targeted_cells(f, o.witness.x, o.witness.y, tol)
            rep.conditions[cid] = C.refine_verdict(v, est, cells)
    rep.set_estimates = _set_dumps(est, crit)
    if config.fixture is not None:
        fx = get_fixture(config.fixture)
        rep.known_witnesses = [replay_known(f, w, est) for w in fx.known_witnesses]
    rep.consistency = _consistency(f, rep.conditions, rep.oracles, config.seed, tol)
    rep.classification = _classify(rep.conditions, rep.oracles)
    return rep


# --------------------------------------------------------------------------
# emitters
# --------------------------------------------------------------------------

def schema_path() -> str:
    return str(resources.files("gencvx") / "schema" / "report.schema.json")


def load_schema() -> dict:
    return json.loads((resources.files("gencvx") / "schema" / "report.schema.json").read_text("utf-8"))


def to_json(report: AnalysisReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_fmt(c) for c in v) + ")"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _witness_md(w: Optional[dict]) -> str:
    if not w:
        return "-"
    parts = [f"x={_fmt(w['x'])}"]
    for key in ("y", "u", "z", "lam"):
        if w.get(key) is not None:
            parts.append(f"{key}={_fmt(w[key])}")
    parts.append(f"product={_fmt(w['inner_product'])}")
    for k, v in (w.get("extra") or {}).items():
        if isinstance(v, float):
            parts.append(f"{k}={_fmt(v)}")
    return ", ".join(parts)


def to_markdown(report: AnalysisReport) -> str:
    d = report.to_dict()
    fn = d["function"]
    lines = [f"# Analysis of `{fn['name']}`", ""]
    lines += [f"- value: `{fn['value']}`"]
    lines += [f"- gradient: " + ", ".join(f"`{g}`" for g in fn["gradient"])]
    lines += [f"- domain: {_fmt([tuple(iv) for iv in fn['domain_box']])}"]
    lines += [f"- seed: {d['config']['seed']}, modes: {', '.join(d['config']['modes']) or 'none'}"]
    lines += [f"- critical points: {', '.join(_fmt(p) for p in d['critical_points']) or 'none'}", ""]

    if d["conditions"]:
        lines += ["## Conditions", "", "| condition | status | witness | note |", "|---|---|---|---|"]
        for v in d["conditions"]:
            lines.append(f"| {v['condition_id']} | {v['status']} | {_witness_md(v['witness'])} | "
                         f"{v['note'] or ''} |")
        lines.append("")
    if d["oracles"]:
        lines += ["## Definition oracles", "", "| property | status | witness |", "|---|---|---|"]
        for v in d["oracles"]:
            lines.append(f"| {v['property']} | {v['status']} | {_witness_md(v['witness'])} |")
        c = d["crouzeix"]
        if c is not None:
            lines.append(f"| first-order pair test | {c['status']} | {_witness_md(c['witness'])} |")
        lines.append("")
    if d["known_witnesses"]:
        lines += ["## Recorded witnesses", ""]
        for k in d["known_witnesses"]:
            extra = []
            for key in ("forward_product", "reverse_product", "gradient_y_dot_y_minus_x",
                        "observed", "membership", "status", "certified_empty"):
                if key in k:
                    extra.append(f"{key}={_fmt(k[key])}")
            lines.append(f"- {k['context']}: {_witness_md(k['witness'])}; " + ", ".join(extra)
                         + f"; reproduced: {'yes' if k['reproduced'] else 'NO'}")
        lines.append("")
    if d["set_estimates"]:
        lines += ["## Second-order set estimates at critical points", "",
                  "| x | u | Frechet | limiting |", "|---|---|---|---|"]
        for s in d["set_estimates"]:
            lines.append(f"| {_fmt(s['x'])} | {_fmt(s['u'])} | {_set_md(s['frechet'])} | "
                         f"{_set_md(s['mordukhovich'])} |")
        lines.append("")
    if d["consistency"]:
        lines += ["## Consistency", "", "| condition | property | status | detail |", "|---|---|---|---|"]
        for cid, e in d["consistency"].items():
            lines.append(f"| {cid} | {e['property']} | {e['status']} | {e['detail']} |")
        lines.append("")
    if d["classification"]:
        lines += ["## Classification", ""] + [f"- {c}" for c in d["classification"]] + [""]
    lines.append(f"exit status: {d['exit_status']}")
    return "\n".join(lines) + "\n"


def _set_md(s: dict) -> str:
    if s["size"] == 0:
        return "empty (certified)" if s["certified_empty"] else "empty"
    if s["hull_1d"] is not None:
        lo, hi = s["hull_1d"]
        return f"{s['size']} pts in [{lo:.6g}, {hi:.6g}]"
    return f"{s['size']} pts"


def emit(report: AnalysisReport, format: str = "json") -> str:
    if format == "json":
        return to_json(report)
    if format == "markdown":
        return to_markdown(report)
    raise ValueError(f"unknown format {format!r}")
