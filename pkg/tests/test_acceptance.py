"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (visible without ``-s``).  Run
directly with ``python3 tests/test_acceptance.py`` for just the summary.
"""

import math
import os
import sys
import time

import numpy as np
import pytest
from scipy.linalg import null_space

sys.path.insert(0, os.path.dirname(__file__))

from _gen import lipschitz_scalar, polynomial_sources, quadratic  # noqa: E402
from fuzz import fuzz_parser  # noqa: E402
from gencvx.conditions import CONDITION_IDS, NECESSARY, evaluate_cell, run_conditions  # noqa: E402
from gencvx.config import AnalysisConfig  # noqa: E402
from gencvx.expr import parse, to_source  # noqa: E402
from gencvx.fixtures import SetKind, fixture_names, get_fixture, load_fixtures  # noqa: E402
from gencvx.oracles import (  # noqa: E402
    MeanValueStatus, crouzeix_products, mean_value_check, segment_max_witness,
)
from gencvx.report import run_analysis, to_json  # noqa: E402
from gencvx.subdiff import (  # noqa: E402
    ScalarFunction, SetEstimator, frechet_membership, hausdorff_1d, scalarize,
)
from gencvx.types import ConditionStatus, Consistency, Membership, Property  # noqa: E402

SEED = 7
N_POLY = 20
N_QUAD = 50
N_LIP = 100
DIRECTIONS = (-2.0, -1.0, 1.0, 2.0)


def _report(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}"
    return ok, line


def _emit(capsys, line):
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)


# -- shared runs ------------------------------------------------------------------

_runs = {}


def fixture_reports():
    if "fixtures" not in _runs:
        _runs["fixtures"] = {n: run_analysis(AnalysisConfig(seed=SEED, fixture=n))
                             for n in fixture_names()}
    return _runs["fixtures"]


def polynomial_config(seed):
    n, value, grads = polynomial_sources(seed)
    return AnalysisConfig(seed=seed, name=f"poly{seed}", dimension=n, value=value, gradient=grads,
                          domain=tuple((-1.0, 1.0) for _ in range(n)),
                          grid_density=5 if n == 2 else None)


def polynomial_reports():
    if "poly" not in _runs:
        _runs["poly"] = [run_analysis(polynomial_config(s)) for s in range(N_POLY)]
    return _runs["poly"]


# -- criteria ---------------------------------------------------------------------

def _estimate_intervals(est, exact_kind):
    if est.is_empty:
        return []
    if exact_kind is SetKind.INTERVAL:
        return [est.hull_1d]
    return [(float(v), float(v)) for v in est.cloud[:, 0]]


def criterion_1():
    worst, bad = 0.0, []
    for fx in load_fixtures():
        est = SetEstimator(fx.spec, seed=SEED)
        for u in DIRECTIONS:
            for kind, exact, got in (
                ("frechet", fx.exact_frechet2(0.0, u), est.frechet([0.0], [u])),
                ("limiting", fx.exact_mordukhovich2(0.0, u), est.mordukhovich([0.0], [u])),
            ):
                tag = f"{fx.name} u={u:+g} {kind}"
                if exact.is_empty:
                    if not got.is_certified_empty:
                        bad.append(f"{tag}: emptiness not certified")
                    continue
                if kind == "frechet" and got.is_certified_empty:
                    bad.append(f"{tag}: certified empty but exact set is not")
                    continue
                d = hausdorff_1d(_estimate_intervals(got, exact.kind), exact.intervals())
                limit = 1e-2 * (1 + exact.width)
                worst = max(worst, d / limit)
                if not d <= limit:
                    bad.append(f"{tag}: Hausdorff {d:.3g} > {limit:.3g}")
    return _report(1, not bad, "; ".join(bad) or f"48 sets, worst distance {worst:.2f} of tolerance")


def criterion_2():
    bad = []
    f35 = get_fixture("ex3.5").spec
    res = frechet_membership(scalarize(f35, [1.0]), [0.0], [-1.0], seed=SEED)
    rep = fixture_reports()["ex3.5"].conditions["NEC_PC_3.4"]
    w = rep.witness
    if res.status is not Membership.VERIFIED:
        bad.append("ex3.5: z=-1 not verified in the Frechet set for u=1")
    if w is None or w.u != (1.0,) or w.z != (-1.0,) or abs(w.inner_product + 1.0) > 1e-9:
        bad.append(f"ex3.5: reported witness {w}")
    a, b = crouzeix_products(get_fixture("ex4.3a").spec, [1 / math.pi], [-1 / math.pi])
    if abs(a - 4 / math.pi ** 3) > 1e-9 or not b > 0:
        bad.append(f"ex4.3a: products {a!r}, {b!r}")
    g = float(get_fixture("ex4.3b").spec.gradient_at([1.0]) @ np.array([1.0]))
    if abs(g + 2.0) > 1e-6:
        bad.append(f"ex4.3b: <grad(1), 1> = {g!r}")
    detail = "; ".join(bad) or f"products -1, {a:.15g} (4/pi^3), {g:.12g}"
    return _report(2, not bad, detail)


def criterion_3():
    bad = []
    reps = list(fixture_reports().items()) + [(f"poly{s}", r) for s, r in
                                              enumerate(polynomial_reports())]
    for name, rep in reps:
        for cid, e in rep.consistency.items():
            if e.status is Consistency.PAPER_CONTRADICTION:
                bad.append(f"{name} {cid}: {e.detail}")
    return _report(3, not bad, "; ".join(bad) or f"{len(reps)} functions, no contradictions")


_QUAD_DENSITY = {1: 9, 2: 4, 3: 3}


def _restricted_eigs(A, g):
    gn = np.linalg.norm(g)
    B = np.eye(len(g)) if gn <= 1e-12 else null_space(g[None, :])
    return np.linalg.eigvalsh(B.T @ A @ B)


def criterion_4():
    bad, cells_seen = [], 0
    delta = 1e-3
    for seed in range(N_QUAD):
        n = 1 + seed % 3
        f, A, b = quadratic(seed, n)
        run = run_conditions(f, grid_density=_QUAD_DENSITY[n], seed=seed)
        est = run.estimator
        by_point = {}
        for x, u in run.cells:
            cells_seen += 1
            target = A @ u
            for kind in ("frechet", "mordukhovich"):
                cloud = getattr(est, kind)(x, u).cloud
                err = float(np.max(np.linalg.norm(cloud - target, axis=1))) if len(cloud) else np.inf
                if not err <= 1e-4:
                    bad.append(f"quad{seed} {kind} at {x}: off by {err:.3g}")
            q = float(u @ A @ u)
            statuses = {cid: evaluate_cell(est, x, u, cid).status for cid in CONDITION_IDS}
            by_point.setdefault(tuple(x), []).append(statuses)
            if abs(q) > delta:
                want = ConditionStatus.HOLDS_SAMPLED if q > 0 else ConditionStatus.FAILS
                wrong = [c for c, s in statuses.items() if s is not want]
                if wrong:
                    bad.append(f"quad{seed} x={x} u={u}: <Au,u>={q:.3g} but {wrong}")
        # restricted eigenvalue sign test per scanned point
        for p in run.points:
            rows = by_point.get(tuple(p.point))
            if not rows:
                continue
            lam = _restricted_eigs(A, A @ p.point + b)
            nec_fail = any(r[c] is ConditionStatus.FAILS for r in rows for c in NECESSARY)
            if lam.min() > delta and nec_fail:
                bad.append(f"quad{seed} x={p.point}: restricted A > 0 but a necessary check fails")
            if lam.max() < -delta and not nec_fail:
                bad.append(f"quad{seed} x={p.point}: restricted A < 0 but necessary checks hold")
        if bad:
            break
    return _report(4, not bad, "; ".join(bad[:3]) or f"{N_QUAD} quadratics, {cells_seen} cells")


def _fixture_scalars():
    for fx in load_fixtures():
        f = fx.spec
        yield fx.name, ScalarFunction(f.values, f.gradients, 1, None, fx.name)
        for u in (-1.0, 1.0):
            yield f"{fx.name} u={u:+g}", scalarize(f, [u])


def criterion_5():
    bad, total = [], 0
    for seed in range(N_LIP):
        g, a, b = lipschitz_scalar(seed)
        total += 1
        if mean_value_check(g, [a], [b], seed=seed).status is not MeanValueStatus.FOUND:
            bad.append(f"lip{seed} on [{a:.3f}, {b:.3f}]")
    ends = [(-1.0, 1.0), (1 / math.pi, -1 / math.pi), (0.0, 1.0), (-0.5, 0.3), (0.7, -1.5)]
    for name, g in _fixture_scalars():
        for a, b in ends:
            total += 1
            if mean_value_check(g, [a], [b], seed=SEED).status is not MeanValueStatus.FOUND:
                bad.append(f"{name} on [{a:.3f}, {b:.3f}]")
    return _report(5, not bad, "; ".join(bad) or f"{total} intervals, all FOUND")


def criterion_6():
    bad, seen = [], 0
    pairs = [(get_fixture(n).spec, r) for n, r in fixture_reports().items()]
    pairs += [(polynomial_config(s).build_function(), r) for s, r in enumerate(polynomial_reports())]
    for f, rep in pairs:
        v = rep.oracles.get(Property.STRICT_QUASICONVEX)
        if v is None or not v.violated:
            continue
        seen += 1
        w = v.witness
        sm = segment_max_witness(f, w.x, w.y)
        if sm is None or not 0 < sm.t0 < 1 or abs(sm.directional_derivative) > 1e-5:
            bad.append(f"{f.name}: {sm}")
    return _report(6, not bad and seen > 0, "; ".join(bad) or f"{seen} violations, all round trip")


def criterion_7():
    first = {n: to_json(r) for n, r in fixture_reports().items()}
    second = {n: to_json(run_analysis(AnalysisConfig(seed=SEED, fixture=n))) for n in fixture_names()}
    diff = [n for n in first if first[n] != second[n]]
    return _report(7, not diff, f"differing: {diff}" if diff else "6 reports byte-identical")


def criterion_8():
    stats = fuzz_parser(10_000, seed=SEED)
    bad = [f"{s!r}: {e}" for s, e in stats["bad"][:3]]
    corpus = 0
    for fx in load_fixtures():
        for src in (fx.spec.value_source, *fx.spec.gradient_sources):
            corpus += 1
            e = parse(src)
            if parse(to_source(e)) != e:
                bad.append(f"round trip failed for {src!r}")
    detail = "; ".join(bad) or (f"10000 fuzz cases ({stats['ok']} parsed, {stats['parse_error']} "
                                f"ParseError), {corpus} corpus expressions round-trip")
    return _report(8, not bad, detail)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8]


@pytest.mark.parametrize("k", range(1, 9))
def test_criterion(k, capsys):
    ok, line = CRITERIA[k - 1]()
    _emit(capsys, line)
    assert ok, line


if __name__ == "__main__":
    start = time.perf_counter()
    results = [c() for c in CRITERIA]
    for _, line in results:
        print(line)
    print(f"{sum(ok for ok, _ in results)}/8 passed in {time.perf_counter() - start:.1f} s")
    sys.exit(0 if all(ok for ok, _ in results) else 1)
