import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from gencvx.fixtures import get_fixture
from gencvx.model import FunctionSpec
from gencvx.subdiff import (
    SetEstimator, cluster, frechet_membership, from_callable, hausdorff_1d, hausdorff_points,
    limiting_subdiff_estimate, richardson, scalarize, second_order_frechet,
    second_order_mordukhovich,
)
from gencvx.types import Membership

absy = from_callable(abs, lambda y: np.sign(y), lipschitz=1.0, name="abs")


def _g(name, u):
    return scalarize(get_fixture(name).spec, [u])


@pytest.mark.parametrize("g, z, status", [
    (absy, 0.0, Membership.VERIFIED),
    (absy, 0.99, Membership.VERIFIED),
    (absy, 1.2, Membership.REJECTED),
    (_g("ex3.5", 1.0), -1.0, Membership.VERIFIED),
    (_g("ex3.5", -1.0), 0.0, Membership.REJECTED),
    (_g("ex3.5", -1.0), -1.0, Membership.REJECTED),
    (_g("ex4.9", 1.0), 0.5, Membership.VERIFIED),
    (_g("ex4.9", 1.0), 1.4, Membership.REJECTED),
    (_g("ex4.9", 1.0), -0.4, Membership.REJECTED),
])
def test_membership_examples(g, z, status):
    res = frechet_membership(g, [0.0], [z])
    assert res.status is status
    if status is Membership.REJECTED:
        assert res.direction is not None


def test_limiting_set_of_abs():
    est = limiting_subdiff_estimate(absy, [0.0])
    lo, hi = est.hull_1d
    assert lo == pytest.approx(-1, abs=1e-2) and hi == pytest.approx(1, abs=1e-2)
    # no gaps wider than the clustering scale
    v = np.sort(est.cloud[:, 0])
    assert np.max(np.diff(v)) < 0.05


def test_linear_function():
    g = from_callable(lambda y: 3.0 * y, lambda y: 3.0, lipschitz=3.0)
    est = limiting_subdiff_estimate(g, [0.3])
    # a singleton up to the membership resolution
    assert np.all(np.abs(est.cloud - 3.0) <= est.resolution + 1e-12)
    assert est.resolution < 1e-4


def test_schedule_validation():
    with pytest.raises(ValueError):
        limiting_subdiff_estimate(absy, [0.0], schedule=[1e-3, 1e-2])


@pytest.mark.parametrize("name, u", [("ex3.5", 1.0), ("ex3.5", -1.0), ("ex4.8", 1.0),
                                     ("ex4.8", -1.0), ("ex4.9", 1.0), ("ex4.3b", 1.0)])
def test_frechet_inside_limiting(name, u):
    f = get_fixture(name).spec
    fr = second_order_frechet(f, [0.0], [u])
    lim = second_order_mordukhovich(f, [0.0], [u])
    if fr.is_empty:
        return
    assert hausdorff_points(fr.cloud, lim.cloud) < np.inf
    for z in fr.cloud:
        assert np.min(np.abs(lim.cloud[:, 0] - z[0])) < 2e-2 * (1 + abs(z[0]))


def test_positive_homogeneity():
    f = get_fixture("ex4.8").spec
    a = second_order_mordukhovich(f, [0.0], [1.0]).hull_1d
    b = second_order_mordukhovich(f, [0.0], [2.0]).hull_1d
    assert b[0] == pytest.approx(2 * a[0], rel=1e-2, abs=1e-2)
    assert b[1] == pytest.approx(2 * a[1], rel=1e-2, abs=1e-2)


def test_zero_direction():
    f = get_fixture("ex3.5").spec
    for est in (second_order_frechet(f, [0.0], [0.0]), second_order_mordukhovich(f, [0.0], [0.0])):
        assert np.allclose(est.cloud, 0.0)


def test_empty_is_certified():
    est = second_order_frechet(get_fixture("ex4.8").spec, [0.0], [-1.0])
    assert est.is_empty and est.is_certified_empty


def test_smooth_point_is_singleton():
    f = FunctionSpec.from_sources("q", "x1^2 + x1*x2 + 2*x2^2", ["2*x1 + x2", "x1 + 4*x2"], 2)
    est = SetEstimator(f)
    A = np.array([[2.0, 1.0], [1.0, 4.0]])
    for u in ([1.0, 0.0], [0.3, -0.7]):
        got = est.mordukhovich([0.2, -0.1], u).cloud
        assert np.allclose(got, A @ np.array(u), atol=1e-9)
        assert np.allclose(est.frechet([0.2, -0.1], u).cloud, A @ np.array(u), atol=1e-9)


def test_estimator_cache_is_deterministic():
    f = get_fixture("ex4.9").spec
    a = SetEstimator(f, seed=3).mordukhovich([0.0], [1.0]).cloud
    b = SetEstimator(f, seed=3).mordukhovich([0.0], [1.0]).cloud
    assert np.array_equal(a, b)


def test_richardson_linear_exact():
    radii = np.array([1e-2, 5e-3, 2.5e-3])
    m = 2.0 + 3.0 * radii
    assert np.allclose(richardson(m, radii), 2.0)


# -- clustering and distances --------------------------------------------------

_pts = st.integers(1, 3).flatmap(
    lambda n: hnp.arrays(np.float64, st.tuples(st.integers(1, 60), st.just(n)),
                         elements=st.floats(-10, 10)))


@given(_pts, st.floats(1e-3, 2.0))
@settings(max_examples=150)
def test_cluster_covers_input(P, eps):
    reps = cluster(P, eps)
    assert 1 <= len(reps) <= len(P)
    d = np.linalg.norm(P[:, None, :] - reps[None, :, :], axis=2).min(axis=1)
    assert np.all(d <= eps * (1 + 1e-9) + 1e-12)
    assert np.all(reps.min(axis=0) >= P.min(axis=0) - 1e-9)
    assert np.all(reps.max(axis=0) <= P.max(axis=0) + 1e-9)


def test_cluster_drops_non_finite():
    P = np.array([[0.0], [np.nan], [np.inf], [0.001]])
    assert np.allclose(cluster(P, 0.01), [[0.0005]])


_ivals = st.lists(st.tuples(st.floats(-5, 5), st.floats(0, 3)).map(lambda t: (t[0], t[0] + t[1])),
                  min_size=1, max_size=4)


@given(_ivals, _ivals, _ivals)
@settings(max_examples=200)
def test_hausdorff_metric(A, B, C):
    assert hausdorff_1d(A, A) == 0
    ab = hausdorff_1d(A, B)
    assert ab == hausdorff_1d(B, A)
    assert ab <= hausdorff_1d(A, C) + hausdorff_1d(C, B) + 1e-9


@given(_ivals, _ivals)
@settings(max_examples=100)
def test_hausdorff_matches_dense_sampling(A, B):
    def dense(S):
        return np.concatenate([np.linspace(lo, hi, 400) for lo, hi in S])[:, None]
    approx = hausdorff_points(dense(A), dense(B))
    width = max(hi - lo for lo, hi in A + B)
    assert abs(hausdorff_1d(A, B) - approx) <= width / 399 + 1e-9


def test_hausdorff_empty():
    assert hausdorff_1d([], []) == 0.0
    assert hausdorff_1d([], [(0, 1)]) == np.inf
    assert hausdorff_1d([(0, 1)], [(2, 2)]) == 2.0
    assert hausdorff_1d([(0, 1), (5, 6)], [(0, 6)]) == 2.0
