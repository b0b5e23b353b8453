import hashlib
import json
import math
import pathlib
import re

import jsonschema
import pytest

from gencvx.config import AnalysisConfig, parse_config
from gencvx.fixtures import fixture_names
from gencvx.report import emit, load_schema, run_analysis, schema_path, to_json, to_markdown
from gencvx.types import Consistency

GOLDEN = pathlib.Path(__file__).parent / "golden"
# frozen once from the implementation (tools/regen_goldens.py)
GOLDEN_DIGESTS = {
    "ex3.3": "e035ce16b32e5763aa9b9b6f61c03c22c7d551887d81331bae23772fc298cf96",
}

_cache = {}


def report(name, **kw):
    key = (name, tuple(sorted(kw.items())))
    if key not in _cache:
        _cache[key] = run_analysis(AnalysisConfig(seed=kw.pop("seed", 7), fixture=name, **kw))
    return _cache[key]


def _status(rep, cid):
    return rep.conditions[cid].status.value


@pytest.mark.parametrize("name", fixture_names())
def test_golden_reports(name):
    text = to_json(report(name))
    assert text == (GOLDEN / f"{name}.json").read_text(encoding="utf-8")
    digest = hashlib.sha256(text.encode()).hexdigest()
    if name in GOLDEN_DIGESTS:
        assert digest == GOLDEN_DIGESTS[name]


@pytest.mark.parametrize("name", fixture_names())
def test_reports_validate(name):
    doc = json.loads(to_json(report(name)))
    jsonschema.validate(doc, load_schema())
    assert doc["schema_version"] == "1.0"
    assert doc["exit_status"] == 0
    assert set(doc["consistency"]) == {"NEC_QC_3.2", "NEC_PC_3.4", "SUF_SPC_4.2", "SUF_SQC_4.4",
                                       "SUF_SPC_4.6", "VARIANT_11"}


def test_schema_file_ships():
    assert pathlib.Path(schema_path()).is_file()


def test_ex35_report():
    rep = report("ex3.5")
    w = rep.conditions["NEC_PC_3.4"].witness
    assert _status(rep, "NEC_PC_3.4") == "FAILS"
    assert (w.u, w.z, w.inner_product) == ((1.0,), (-1.0,), -1.0)
    assert _status(rep, "SUF_SQC_4.4") == "HOLDS_SAMPLED"
    oracles = {p.value: v.status.value for p, v in rep.oracles.items()}
    assert oracles["QUASICONVEX"] == "CONSISTENT_SAMPLED"
    assert all(k["reproduced"] for k in rep.known_witnesses)


def test_ex48_report():
    rep = report("ex4.8")
    assert _status(rep, "SUF_SPC_4.2") == "HOLDS_SAMPLED"
    assert _status(rep, "SUF_SPC_4.6") == "FAILS"
    assert rep.conditions["SUF_SPC_4.6"].witness.u == (-1.0,)


def test_inline_square():
    cfg = parse_config("[function]\nvalue = x1^2\n[gradient]\ng1 = 2*x1\n[analysis]\nseed = 1\n")
    rep = run_analysis(cfg)
    for cid in ("NEC_QC_3.2", "NEC_PC_3.4"):
        assert _status(rep, cid) == "HOLDS_SAMPLED"
    assert {v.status.value for v in rep.oracles.values()} == {"CONSISTENT_SAMPLED"}
    assert all(e.status is Consistency.CONSISTENT for e in rep.consistency.values())
    assert rep.exit_status == 0
    jsonschema.validate(json.loads(to_json(rep)), load_schema())


def test_empty_modes_is_metadata_only():
    rep = report("ex4.9", modes=())
    doc = json.loads(to_json(rep))
    jsonschema.validate(doc, load_schema())
    assert doc["conditions"] == [] and doc["oracles"] == [] and doc["crouzeix"] is None
    assert doc["set_estimates"] == [] and doc["critical_points"] == []
    assert all(not e["evaluated"] for e in doc["consistency"].values())
    assert doc["exit_status"] == 0


def test_subdiff_only_mode():
    doc = json.loads(to_json(report("ex4.8", modes=("subdiff-only",))))
    jsonschema.validate(doc, load_schema())
    assert doc["conditions"] == [] and doc["set_estimates"]


def test_markdown_ex43a():
    md = to_markdown(report("ex4.3a"))
    nums = [float(m) for m in re.findall(r"-?\d+\.\d+(?:e-?\d+)?", md)]

    def has(v):
        return any(abs(n - v) <= 1e-9 for n in nums)

    assert has(1 / math.pi) and has(-1 / math.pi) and has(4 / math.pi ** 3)
    assert md.startswith("# Analysis of `ex4.3a`")


def test_emit_formats():
    rep = report("ex3.3")
    assert emit(rep, "json") == to_json(rep)
    assert emit(rep, "markdown") == to_markdown(rep)
    json.loads(emit(rep, "json"))


def test_reproducible_bytes():
    a = to_json(run_analysis(AnalysisConfig(seed=11, fixture="ex4.9")))
    b = to_json(run_analysis(AnalysisConfig(seed=11, fixture="ex4.9")))
    assert a == b


def test_non_finite_numbers_are_strings():
    from gencvx.report import _clean
    assert _clean({"a": float("inf"), "b": [float("nan"), 1.5]}) == {"a": "inf", "b": ["nan", 1.5]}
