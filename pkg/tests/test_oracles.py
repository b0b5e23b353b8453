import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _gen import lipschitz_scalar, polynomial
from gencvx.fixtures import get_fixture
from gencvx.model import FunctionSpec
from gencvx.oracles import (
    LocalMinStatus, MeanValueStatus, crouzeix_first_order_check, crouzeix_products, guided_pairs,
    local_min_check, mean_value_check, pair_sample, quasiconvex_oracle, run_oracles,
    segment_max_witness,
)
from gencvx.subdiff import from_callable
from gencvx.types import OracleStatus, Property

C, V = OracleStatus.CONSISTENT_SAMPLED, OracleStatus.VIOLATED
P = Property


def _f(name, value, grad, box=((-1, 1),)):
    return FunctionSpec.from_sources(name, value, [grad], 1, box)


cube = _f("cube", "x1^3", "3*x1^2")
const = _f("const", "1", "0")
sq = _f("sq", "x1^2", "2*x1")
neg_sq = _f("negsq", "-x1^2", "-2*x1")


def _statuses(f, **kw):
    return {p: v.status for p, v in run_oracles(f, pair_count=400, **kw).items()}


def test_cube():
    # the violating pairs start exactly at the critical point 0
    s = _statuses(cube, critical_points=[[0.0]])
    assert s[P.QUASICONVEX] is C and s[P.STRICT_QUASICONVEX] is C
    assert s[P.PSEUDOCONVEX] is V and s[P.STRICT_PSEUDOCONVEX] is V


def test_constant():
    s = _statuses(const)
    assert s[P.QUASICONVEX] is C and s[P.PSEUDOCONVEX] is C
    assert s[P.STRICT_QUASICONVEX] is V and s[P.STRICT_PSEUDOCONVEX] is V


def test_square_is_consistent():
    assert set(_statuses(sq).values()) == {C}
    assert crouzeix_first_order_check(sq, pair_count=400).status is C


def test_concave_is_violated_everywhere():
    assert set(_statuses(neg_sq).values()) == {V}
    w = crouzeix_first_order_check(neg_sq, pair_count=400).witness
    assert w is not None and w.inner_product > 0 and w.extra["reverse_product"] > 0


def test_crouzeix_fixture_pair():
    f = get_fixture("ex4.3a").spec
    a, b = crouzeix_products(f, [1 / math.pi], [-1 / math.pi])
    assert a == pytest.approx(4 / math.pi ** 3, abs=1e-9)
    assert b == pytest.approx(4 / math.pi ** 3, abs=1e-9)
    v = crouzeix_first_order_check(f, pairs=[(1 / math.pi, -1 / math.pi)])
    assert v.status is V and v.pairs_checked == 1


def test_crouzeix_violation_implies_segment_violation():
    f = get_fixture("ex4.3a").spec
    w = crouzeix_first_order_check(f, pair_count=500, seed=2).witness
    s = pair_sample(f, 1, 256, 0, extra_pairs=[(w.x, w.y)])
    assert quasiconvex_oracle(f, sample=s).status is V


def test_segment_max():
    sm = segment_max_witness(neg_sq, [-1.0], [1.0])
    assert sm.t0 == pytest.approx(0.5, abs=1e-9)
    assert sm.value == pytest.approx(0.0, abs=1e-12)
    assert abs(sm.directional_derivative) < 1e-8
    assert segment_max_witness(sq, [-1.0], [1.0]) is None
    assert segment_max_witness(sq, [-1.0], [0.5]) is None


def test_guided_pairs_stay_in_box():
    pairs = guided_pairs(sq, [0.9], [1.0])
    assert pairs and all(sq.contains(a) and sq.contains(b) for a, b in pairs)
    assert all(abs((a + b)[0] / 2 - 0.9) < 1e-12 for a, b in pairs)


absy = from_callable(abs, lambda y: np.sign(y), lipschitz=1.0)


def test_mean_value():
    g = from_callable(lambda y: y * y, lambda y: 2 * y)
    r = mean_value_check(g, [0.0], [1.0])
    assert r.status is MeanValueStatus.FOUND and r.c[0] >= 0.5 - 1e-9
    assert mean_value_check(absy, [-1.0], [1.0]).status is MeanValueStatus.FOUND
    r = mean_value_check(absy, [-1.0], [0.0])
    assert r.status is MeanValueStatus.FOUND
    k = from_callable(lambda y: 2.0, lambda y: 0.0)
    assert mean_value_check(k, [0.0], [1.0]).status is MeanValueStatus.FOUND


def test_mean_value_needs_limiting_set():
    # rise comes entirely from the kink at 0; gradients elsewhere point down
    g = from_callable(lambda y: -abs(y) + 3 * max(y, 0), lambda y: -np.sign(y) + 3 * (y > 0))
    r = mean_value_check(g, [-1.0], [1.0], scan_count=2)
    assert r.status is MeanValueStatus.FOUND


@pytest.mark.parametrize("seed", range(10))
def test_mean_value_random(seed):
    g, a, b = lipschitz_scalar(seed)
    assert mean_value_check(g, [a], [b]).status is MeanValueStatus.FOUND


def test_local_min():
    assert local_min_check(cube, [0.0]).status is LocalMinStatus.NOT_MIN
    assert local_min_check(sq, [0.0]).status is LocalMinStatus.STRICT_LOCAL_MIN
    assert local_min_check(const, [0.0]).status is LocalMinStatus.LOCAL_MIN
    r = local_min_check(neg_sq, [0.0])
    assert r.status is LocalMinStatus.NOT_MIN and r.value_gap < 0
    assert local_min_check(get_fixture("ex4.3a").spec, [0.0]).status is LocalMinStatus.NOT_MIN


_lattice = [(P.STRICT_QUASICONVEX, P.QUASICONVEX), (P.STRICT_PSEUDOCONVEX, P.PSEUDOCONVEX),
            (P.PSEUDOCONVEX, P.QUASICONVEX)]


@given(st.integers(0, 500), st.integers(0, 3))
@settings(max_examples=25)
def test_oracle_lattice(seed, sample_seed):
    # a violated weaker property must show up as a violated stronger one
    res = run_oracles(polynomial(seed), pair_count=150, lambda_grid=16, seed=sample_seed)
    for strong, weak in _lattice:
        if res[weak].violated:
            assert res[strong].violated, (strong, weak)


@pytest.mark.parametrize("name", ["ex3.3", "ex3.5", "ex4.3a", "ex4.3b", "ex4.8", "ex4.9"])
def test_oracle_lattice_fixtures(name):
    res = run_oracles(get_fixture(name).spec, pair_count=300, seed=7)
    for strong, weak in _lattice:
        assert not res[weak].violated or res[strong].violated


def test_oracles_seeded():
    a = run_oracles(get_fixture("ex4.9").spec, pair_count=200, seed=3)
    b = run_oracles(get_fixture("ex4.9").spec, pair_count=200, seed=3)
    assert {k: v.to_dict() for k, v in a.items()} == {k: v.to_dict() for k, v in b.items()}
