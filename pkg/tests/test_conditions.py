import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gencvx.conditions import (
    CONDITION_IDS, NEC_PC, NEC_QC, SUF_SPC_F, SUF_SPC_M, SUF_SQC, VARIANT,
    check_necessary_pseudoconvex, check_necessary_quasiconvex, check_sufficient_frechet_exists,
    check_sufficient_frechet_union, check_sufficient_mordukhovich, check_variant_11,
    evaluate_cell, orth_directions, replay_witness, run_conditions, scan_points,
)
from gencvx.fixtures import get_fixture
from gencvx.model import FunctionSpec
from gencvx.subdiff import SetEstimator
from gencvx.types import ConditionStatus

H, F, I = ConditionStatus.HOLDS_SAMPLED, ConditionStatus.FAILS, ConditionStatus.INCONCLUSIVE

neg_sq = FunctionSpec.from_sources("negsq", "-x1^2", ["-2*x1"], 1, ((-1, 1),))
bowl = FunctionSpec.from_sources("bowl", "x1^2 + 0.5*x2^2", ["2*x1", "x2"], 2)
saddle = FunctionSpec.from_sources("saddle", "x1^2 - x2^2", ["2*x1", "-2*x2"], 2, ((-1, 1), (-1, 1)))


def test_scan_finds_kink_critical_point():
    pts = scan_points(get_fixture("ex3.5").spec)
    crit = [p.point for p in pts if p.is_critical]
    assert len(crit) == 1 and crit[0][0] == pytest.approx(0.0, abs=1e-9)
    assert pts[0].is_critical


def test_scan_monotone_has_no_critical_points():
    f = FunctionSpec.from_sources("mono", "x1 + x1^3", ["1 + 3*x1^2"], 1)
    assert not any(p.is_critical for p in scan_points(f))


def test_scan_refines_off_lattice_root():
    f = FunctionSpec.from_sources("shift", "(x1 - 0.3)^2", ["2*(x1 - 0.3)"], 1)
    crit = [p.point[0] for p in scan_points(f, grid_density=6) if p.is_critical]
    assert crit == [pytest.approx(0.3, abs=1e-8)]


def test_scan_points_stay_inside_box():
    for p in scan_points(saddle, grid_density=5, seed=4):
        assert saddle.contains(p.point)


def test_scan_is_seeded():
    a = [p.point for p in scan_points(bowl, seed=2)]
    b = [p.point for p in scan_points(bowl, seed=2)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    with pytest.raises(ValueError):
        scan_points(bowl, grid_density=1)


@given(st.integers(2, 5), st.integers(0, 1000), st.integers(1, 20))
@settings(max_examples=60)
def test_orth_directions_are_orthogonal_units(n, seed, count):
    g = np.random.default_rng(seed).normal(size=n)
    dirs = orth_directions(g, count, seed)
    assert len(dirs) >= count
    for u in dirs:
        assert np.linalg.norm(u) == pytest.approx(1.0)
        assert abs(u @ g) <= 1e-9 * np.linalg.norm(g)


def test_orth_directions_special_cases():
    assert orth_directions([0.5], 8) == []
    crit = orth_directions([0.0], 8)
    assert sorted(float(u[0]) for u in crit) == [-1.0, 1.0]
    full = orth_directions([0.0, 0.0, 0.0], 10)
    assert len(full) >= 10
    with pytest.raises(ValueError):
        orth_directions([1.0, 0.0], 0)


def test_concave_parabola():
    assert check_necessary_quasiconvex(neg_sq).status is F
    assert check_variant_11(neg_sq).status is F
    assert check_necessary_pseudoconvex(neg_sq).status is F
    w = check_necessary_quasiconvex(neg_sq).witness
    assert w.x == (0.0,) and w.inner_product == pytest.approx(-2.0, abs=1e-3)


def test_convex_bowl_holds_everywhere():
    run = run_conditions(bowl, grid_density=4, seed=1)
    assert all(v.status is H for v in run.verdicts.values())
    assert run.verdicts[VARIANT].note.startswith("diagnostic only")
    assert run.verdicts[SUF_SQC].cells == len(run.cells)


def test_saddle_fails_necessary():
    run = run_conditions(saddle, [NEC_QC, SUF_SPC_M], grid_density=4)
    assert run.verdicts[NEC_QC].status is F
    assert run.verdicts[SUF_SPC_M].status is F


@pytest.mark.parametrize("fn, cid", [
    (check_necessary_quasiconvex, NEC_QC), (check_necessary_pseudoconvex, NEC_PC),
    (check_sufficient_mordukhovich, SUF_SPC_M), (check_sufficient_frechet_union, SUF_SQC),
    (check_sufficient_frechet_exists, SUF_SPC_F), (check_variant_11, VARIANT),
])
def test_single_condition_helpers(fn, cid):
    v = fn(get_fixture("ex4.8").spec)
    assert v.condition_id == cid
    expected = F if cid == SUF_SPC_F else H
    assert v.status is expected


def test_fixture_cells_at_zero():
    est = SetEstimator(get_fixture("ex3.5").spec, seed=7)
    assert evaluate_cell(est, [0.0], [1.0], NEC_PC).status is F
    assert evaluate_cell(est, [0.0], [-1.0], SUF_SPC_F).status is F
    assert evaluate_cell(est, [0.0], [1.0], SUF_SQC).status is H
    est = SetEstimator(get_fixture("ex4.9").spec, seed=7)
    cell = evaluate_cell(est, [0.0], [1.0], SUF_SPC_M)
    assert cell.status is F and cell.witness.z[0] == pytest.approx(-0.5, abs=1e-2)
    assert evaluate_cell(est, [0.0], [1.0], SUF_SPC_F).status is H


def test_witness_replay():
    v = check_necessary_pseudoconvex(get_fixture("ex3.5").spec, seed=7)
    assert replay_witness(get_fixture("ex3.5").spec, v.witness, NEC_PC, seed=7)
    v = check_necessary_quasiconvex(neg_sq)
    assert replay_witness(neg_sq, v.witness, NEC_QC)
    # a witness moved off the orthogonality constraint does not replay
    moved = type(v.witness).make(0.5, u=1.0, z=-2.0, inner_product=-2.0,
                                 kind=v.witness.kind, context=v.witness.context)
    assert not replay_witness(neg_sq, moved, NEC_QC)


def test_verdict_dict_shape():
    d = check_variant_11(bowl, grid_density=3).to_dict()
    assert set(d) == {"condition_id", "status", "witness", "points_checked",
                      "directions_per_point", "cells", "note"}
    assert d["condition_id"] in CONDITION_IDS


def test_threads_do_not_change_results(monkeypatch):
    a = run_conditions(saddle, grid_density=3, seed=5, threads=1).verdicts
    b = run_conditions(saddle, grid_density=3, seed=5, threads=4).verdicts
    assert {k: v.to_dict() for k, v in a.items()} == {k: v.to_dict() for k, v in b.items()}
