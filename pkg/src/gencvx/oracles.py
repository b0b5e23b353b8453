"""Brute-force checks of the convexity definitions on sampled pairs."""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from .model import FunctionSpec
from .settings import DEFAULT_TOLERANCES, Tolerances
from .subdiff import ScalarFunction, limiting_subdiff_estimate, sphere_directions
from .types import OracleStatus, Property, Witness, WitnessKind

DEFAULT_PAIRS = 2000
DEFAULT_LAMBDA = 64


@dataclass
class OracleVerdict:
    property: Property
    status: OracleStatus
    witness: Optional[Witness] = None
    pairs_checked: int = 0
    lambda_grid: int = 0

    @property
    def violated(self) -> bool:
        return self.status is OracleStatus.VIOLATED

    def to_dict(self) -> dict:
        return {
            "property": self.property.value,
            "status": self.status.value,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "pairs_checked": self.pairs_checked,
            "lambda_grid": self.lambda_grid,
        }


# --------------------------------------------------------------------------
# pair sampling
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PairSample:
    X: np.ndarray        # (P, n)
    Y: np.ndarray        # (P, n)
    lam: np.ndarray      # (g + 1,)
    Z: np.ndarray        # (P, g + 1, n) segment points, Z[:, 0] = X, Z[:, -1] = Y
    V: np.ndarray        # (P, g + 1) values
    G: np.ndarray        # (P, g + 1, n) gradients

    @property
    def fx(self):
        return self.V[:, 0]

    @property
    def fy(self):
        return self.V[:, -1]

    @property
    def gx(self):
        return self.G[:, 0]

    @property
    def gy(self):
        return self.G[:, -1]


def _concentrated(rng, f: FunctionSpec, centers: np.ndarray, count: int) -> tuple:
    n = f.dimension
    half = 0.5 * (f.upper - f.lower)
    c = centers[np.arange(count) % len(centers)]

    def around(k):
        d = rng.normal(size=(k, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = 10.0 ** rng.uniform(-2, 0, size=(k, 1))
        return d * r * half

    X = c + around(count)
    X[: count // 3] = c[: count // 3]
    Y = c + around(count)
    return np.clip(X, f.lower, f.upper), np.clip(Y, f.lower, f.upper)


@functools.lru_cache(maxsize=64)
def _pair_sample(f: FunctionSpec, pair_count: int, lambda_grid: int, seed: int,
                 centers: tuple, extra: tuple = ()) -> PairSample:
    n = f.dimension
    rng = np.random.default_rng([seed, 7331])
    sep = 1e-3 * f.diameter
    n_uniform = pair_count - pair_count // 2 if centers else pair_count
    X = rng.uniform(f.lower, f.upper, size=(n_uniform, n))
    Y = rng.uniform(f.lower, f.upper, size=(n_uniform, n))
    for _ in range(50):
        close = np.linalg.norm(X - Y, axis=1) < sep
        if not close.any():
            break
        Y[close] = rng.uniform(f.lower, f.upper, size=(int(close.sum()), n))
    if centers:
        Xc, Yc = _concentrated(rng, f, np.array(centers), pair_count - n_uniform)
        for _ in range(50):
            close = np.linalg.norm(Xc - Yc, axis=1) < sep
            if not close.any():
                break
            Xc2, Yc2 = _concentrated(rng, f, np.array(centers), int(close.sum()))
            Yc[close] = Yc2
        X = np.concatenate([X, Xc])
        Y = np.concatenate([Y, Yc])
    keep = np.linalg.norm(X - Y, axis=1) >= sep
    X, Y = X[keep], Y[keep]
    if extra:
        E = np.array(extra, dtype=float).reshape(len(extra), 2, n)
        X = np.concatenate([X, E[:, 0]])
        Y = np.concatenate([Y, E[:, 1]])
    lam = np.arange(lambda_grid + 1) / lambda_grid
    Z = (1 - lam)[None, :, None] * X[:, None, :] + lam[None, :, None] * Y[:, None, :]
    Z[:, 0] = X
    Z[:, -1] = Y
    flat = Z.reshape(-1, n)
    V = f.values(flat).reshape(Z.shape[:2])
    G = f.gradients(flat).reshape(Z.shape)
    return PairSample(X, Y, lam, Z, V, G)


def pair_sample(f: FunctionSpec, pair_count: int = DEFAULT_PAIRS, lambda_grid: int = DEFAULT_LAMBDA,
                seed: int = 0, critical_points=(), extra_pairs=()) -> PairSample:
    """Seeded pairs: half uniform in the box, half around the critical points.

    ``extra_pairs`` (x, y) are appended verbatim, e.g. from ``guided_pairs``.
    """
    centers = tuple(tuple(float(c) for c in np.atleast_1d(p)) for p in critical_points)
    extra = tuple(
        (tuple(float(c) for c in np.atleast_1d(x)), tuple(float(c) for c in np.atleast_1d(y)))
        for x, y in extra_pairs
    )
    return _pair_sample(f, int(pair_count), int(lambda_grid), int(seed), centers, extra)


def guided_pairs(f: FunctionSpec, x, u, steps: int = 12) -> list:
    """Symmetric pairs (x - t u, x + t u) over geometric t, kept inside the box.

    A negative second-order product along u at x puts x above both ends of
    the short segments, which a uniform pair sample rarely hits.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    u = u / np.linalg.norm(u)
    out = []
    for k in range(steps):
        t = 0.1 * f.diameter * 2.0 ** (-k)
        a, b = x - t * u, x + t * u
        if f.contains(a) and f.contains(b) and t >= 1e-3 * f.diameter:
            out.append((a, b))
    return out


def _eps(tol: Tolerances, scale) -> np.ndarray:
    return tol.eps_strict * (1.0 + np.abs(scale))


def _tie(tol: Tolerances, scale) -> np.ndarray:
    return tol.eps_tie * (1.0 + np.abs(scale))


def _verdict(prop, s: PairSample, witness) -> OracleVerdict:
    status = OracleStatus.VIOLATED if witness is not None else OracleStatus.CONSISTENT_SAMPLED
    return OracleVerdict(prop, status, witness, len(s.X), len(s.lam) - 1)


# --------------------------------------------------------------------------
# the four definitions
# --------------------------------------------------------------------------

def _qc_gap(s: PairSample, tol: Tolerances):
    top = np.maximum(s.fx, s.fy)
    return s.V - top[:, None] - _eps(tol, top)[:, None]


def quasiconvex_oracle(f: FunctionSpec, pair_count: int = DEFAULT_PAIRS,
                       lambda_grid: int = DEFAULT_LAMBDA, seed: int = 0, critical_points=(),
                       tol: Tolerances = DEFAULT_TOLERANCES, sample: Optional[PairSample] = None
                       ) -> OracleVerdict:
    s = sample or pair_sample(f, pair_count, lambda_grid, seed, critical_points)
    gap = _qc_gap(s, tol)
    if np.nanmax(gap) > 0:
        i, j = np.unravel_index(int(np.nanargmax(gap)), gap.shape)
        top = max(s.fx[i], s.fy[i])
        w = Witness.make(s.X[i], y=s.Y[i], lam=s.lam[j], inner_product=s.V[i, j] - top,
                         kind=WitnessKind.DEFINITION_VIOLATION,
                         context="value on the segment exceeds max of the endpoint values",
                         margin=gap[i, j])
        return _verdict(Property.QUASICONVEX, s, w)
    return _verdict(Property.QUASICONVEX, s, None)


def _interior(s: PairSample):
    return slice(1, len(s.lam) - 1)


def strict_quasiconvex_oracle(f: FunctionSpec, pair_count: int = DEFAULT_PAIRS,
                              lambda_grid: int = DEFAULT_LAMBDA, seed: int = 0,
                              critical_points=(), tol: Tolerances = DEFAULT_TOLERANCES,
                              sample: Optional[PairSample] = None) -> OracleVerdict:
    s = sample or pair_sample(f, pair_count, lambda_grid, seed, critical_points)
    sep_ok = np.linalg.norm(s.X - s.Y, axis=1) > tol.eps_sep
    top = np.maximum(s.fx, s.fy)
    inner = s.V[:, _interior(s)]
    gap = inner - (top - _tie(tol, top))[:, None]
    gap[~sep_ok] = -np.inf
    if np.nanmax(gap) >= 0:
        i, j = np.unravel_index(int(np.nanargmax(gap)), gap.shape)
        j += 1
        w = Witness.make(s.X[i], y=s.Y[i], lam=s.lam[j], inner_product=s.V[i, j] - top[i],
                         kind=WitnessKind.DEFINITION_VIOLATION,
                         context="interior value is not below max of the endpoint values",
                         margin=gap[i, j - 1])
        return _verdict(Property.STRICT_QUASICONVEX, s, w)
    return _verdict(Property.STRICT_QUASICONVEX, s, None)


def _pc_candidates(s: PairSample):
    """(x, y, f(x), f(y), grad f(x)) triples: both pair orders plus segment pairs."""
    P, L, n = s.Z.shape
    inner = _interior(s)
    Zi = s.Z[:, inner].reshape(-1, n)
    Vi = s.V[:, inner].reshape(-1)
    Gi = s.G[:, inner].reshape(-1, n)
    Xr = np.repeat(s.X, L - 2, axis=0)
    Yr = np.repeat(s.Y, L - 2, axis=0)
    fxr = np.repeat(s.fx, L - 2)
    fyr = np.repeat(s.fy, L - 2)
    direct = (
        np.concatenate([s.X, s.Y]), np.concatenate([s.Y, s.X]),
        np.concatenate([s.fx, s.fy]), np.concatenate([s.fy, s.fx]),
        np.concatenate([s.gx, s.gy]),
    )
    segment = (
        np.concatenate([Zi, Zi]), np.concatenate([Xr, Yr]),
        np.concatenate([Vi, Vi]), np.concatenate([fxr, fyr]),
        np.concatenate([Gi, Gi]),
    )
    return direct, segment


def _pc_witness(prop, x, y, fx, fy, gx, gap, dd, context):
    return Witness.make(x, y=y, inner_product=dd, kind=WitnessKind.DEFINITION_VIOLATION,
                        context=context, margin=gap, value_x=fx, value_y=fy)


def pseudoconvex_oracle(f: FunctionSpec, pair_count: int = DEFAULT_PAIRS,
                        lambda_grid: int = DEFAULT_LAMBDA, seed: int = 0, critical_points=(),
                        tol: Tolerances = DEFAULT_TOLERANCES, sample: Optional[PairSample] = None
                        ) -> OracleVerdict:
    """phi(x) > phi(y) must force <grad phi(x), y - x> < 0."""
    s = sample or pair_sample(f, pair_count, lambda_grid, seed, critical_points)
    for X, Y, fx, fy, gx in _pc_candidates(s):
        scale = np.maximum(np.abs(fx), np.abs(fy))
        dd = np.einsum("ij,ij->i", gx, Y - X)
        # the gradient side uses the tie tolerance: with a value gap of order
        # eps, curvature alone can push the pairing up to -eps
        bad = (fx > fy + _eps(tol, scale)) & (dd >= -_tie(tol, np.abs(dd)))
        if bad.any():
            gap = np.where(bad, fx - fy, -np.inf)
            i = int(np.argmax(gap))
            w = _pc_witness(Property.PSEUDOCONVEX, X[i], Y[i], fx[i], fy[i], gx[i], gap[i], dd[i],
                            "phi(x) > phi(y) but <grad phi(x), y - x> >= 0")
            return _verdict(Property.PSEUDOCONVEX, s, w)
    return _verdict(Property.PSEUDOCONVEX, s, None)


def strict_pseudoconvex_oracle(f: FunctionSpec, pair_count: int = DEFAULT_PAIRS,
                               lambda_grid: int = DEFAULT_LAMBDA, seed: int = 0,
                               critical_points=(), tol: Tolerances = DEFAULT_TOLERANCES,
                               sample: Optional[PairSample] = None) -> OracleVerdict:
    """x != y and phi(x) >= phi(y) must force <grad phi(x), y - x> < 0."""
    s = sample or pair_sample(f, pair_count, lambda_grid, seed, critical_points)
    direct, segment = _pc_candidates(s)
    for (X, Y, fx, fy, gx), loose in ((direct, True), (segment, False)):
        scale = np.maximum(np.abs(fx), np.abs(fy))
        # sampled pairs use the strict tolerance; segment pairs use the tie
        # tolerance so they sit on the same footing as the strict segment test
        eps = _eps(tol, scale) if loose else _tie(tol, scale)
        dd = np.einsum("ij,ij->i", gx, Y - X)
        sep = np.linalg.norm(X - Y, axis=1) > tol.eps_sep
        bad = sep & (fx >= fy - eps) & (dd >= -_tie(tol, np.abs(dd)))
        if bad.any():
            gap = np.where(bad, fx - fy, -np.inf)
            i = int(np.argmax(gap))
            w = _pc_witness(Property.STRICT_PSEUDOCONVEX, X[i], Y[i], fx[i], fy[i], gx[i], gap[i],
                            dd[i], "phi(x) >= phi(y), x != y, but <grad phi(x), y - x> >= 0")
            return _verdict(Property.STRICT_PSEUDOCONVEX, s, w)
    return _verdict(Property.STRICT_PSEUDOCONVEX, s, None)


def run_oracles(f: FunctionSpec, pair_count: int = DEFAULT_PAIRS, lambda_grid: int = DEFAULT_LAMBDA,
                seed: int = 0, critical_points=(), tol: Tolerances = DEFAULT_TOLERANCES,
                extra_pairs=()) -> dict:
    s = pair_sample(f, pair_count, lambda_grid, seed, critical_points, extra_pairs)
    kw = dict(tol=tol, sample=s)
    return {
        Property.QUASICONVEX: quasiconvex_oracle(f, **kw),
        Property.STRICT_QUASICONVEX: strict_quasiconvex_oracle(f, **kw),
        Property.PSEUDOCONVEX: pseudoconvex_oracle(f, **kw),
        Property.STRICT_PSEUDOCONVEX: strict_pseudoconvex_oracle(f, **kw),
    }


# --------------------------------------------------------------------------
# first-order pair test
# --------------------------------------------------------------------------

def crouzeix_products(f: FunctionSpec, x, y) -> tuple[float, float]:
    """(<grad phi(x), y - x>, <grad phi(y), x - y>)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    G = f.gradients(np.stack([x, y]))
    return float(G[0] @ (y - x)), float(G[1] @ (x - y))


def crouzeix_first_order_check(f: FunctionSpec, pair_count: int = DEFAULT_PAIRS, seed: int = 0,
                               critical_points=(), tol: Tolerances = DEFAULT_TOLERANCES,
                               pairs=None, lambda_grid: int = DEFAULT_LAMBDA) -> OracleVerdict:
    """Both <grad phi(x), y - x> > 0 and <grad phi(y), x - y> > 0 rules out quasiconvexity."""
    if pairs is not None:
        X = np.array([np.atleast_1d(p[0]) for p in pairs], dtype=float)
        Y = np.array([np.atleast_1d(p[1]) for p in pairs], dtype=float)
        G = f.gradients(np.concatenate([X, Y]))
        gx, gy = G[: len(X)], G[len(X):]
        checked, grid = len(X), 0
    else:
        s = pair_sample(f, pair_count, lambda_grid, seed, critical_points)
        X, Y, gx, gy = s.X, s.Y, s.gx, s.gy
        checked, grid = len(X), len(s.lam) - 1
    a = np.einsum("ij,ij->i", gx, Y - X)
    b = np.einsum("ij,ij->i", gy, X - Y)
    eps = tol.eps_strict
    bad = (a > eps) & (b > eps)
    witness = None
    if bad.any():
        i = int(np.argmax(np.where(bad, np.minimum(a, b), -np.inf)))
        witness = Witness.make(X[i], y=Y[i], inner_product=a[i], kind=WitnessKind.DEFINITION_VIOLATION,
                               context="CROUZEIX: <grad phi(x), y - x> > 0 and <grad phi(y), x - y> > 0",
                               reverse_product=b[i])
    status = OracleStatus.VIOLATED if witness else OracleStatus.CONSISTENT_SAMPLED
    return OracleVerdict(Property.QUASICONVEX, status, witness, checked, grid)


# --------------------------------------------------------------------------
# segment maximum, mean value inequality, local minima
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentMax:
    t0: float
    value: float
    directional_derivative: float


def segment_max_witness(f: FunctionSpec, x1, x2, grid: int = 256,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> Optional[SegmentMax]:
    """Interior maximiser of t -> phi(x1 + t (x2 - x1)) when it reaches the endpoint values.

    The grid maximiser is refined by bounded golden-section search.  Returns
    None when the maximum over the segment sits only at an endpoint.
    """
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    d = x2 - x1
    t = np.linspace(0.0, 1.0, grid + 1)
    vals = f.values(x1 + t[:, None] * d)
    ends = max(vals[0], vals[-1])
    tie = float(_tie(tol, ends))
    inner = vals[1:-1]
    if inner.max() < ends - tie:
        return None
    top = max(inner.max(), ends)
    near = np.flatnonzero(inner >= top - tie) + 1
    # prefer the strict maximiser, else the tied index closest to the middle
    j = near[np.argmin(np.abs(t[near] - 0.5))] if inner.max() <= ends + tie else int(np.argmax(inner)) + 1

    def neg(s):
        return -float(f.values((x1 + s * d)[None, :])[0])

    res = optimize.minimize_scalar(neg, bounds=(t[j - 1], t[j + 1]), method="bounded",
                                   options={"xatol": 1e-12, "maxiter": 500})
    t0, v0 = float(res.x), -float(res.fun)
    if v0 < vals[j]:
        t0, v0 = float(t[j]), float(vals[j])
    if not 0.0 < t0 < 1.0 or v0 < ends - tie:
        return None
    dd = float(f.gradients((x1 + t0 * d)[None, :])[0] @ d)
    return SegmentMax(t0, v0, dd)


class MeanValueStatus(str, enum.Enum):
    FOUND = "FOUND"
    NOT_FOUND = "NOT_FOUND"


@dataclass(frozen=True)
class MeanValueResult:
    status: MeanValueStatus
    c: Optional[np.ndarray] = None
    subgradient: Optional[np.ndarray] = None


def mean_value_check(g: ScalarFunction, a, b, scan_count: int = 200, seed: int = 0,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> MeanValueResult:
    """Find c in [a, b) and x* in the limiting subdifferential at c with
    <x*, b - a> >= g(b) - g(a).

    Gradients at the scan points are tried first; limiting set estimates are
    computed only at the most promising scan points when that fails.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    d = b - a
    rise = g(b) - g(a)
    eps = tol.eps_strict * (1 + abs(rise))
    C = a + (np.arange(scan_count) / scan_count)[:, None] * d
    grads = g.gradients(C)
    score = grads @ d
    ok = np.flatnonzero(np.isfinite(score) & (score >= rise - eps))
    if ok.size:
        i = int(ok[0])
        return MeanValueResult(MeanValueStatus.FOUND, C[i], grads[i])
    order = np.argsort(-np.nan_to_num(score, nan=-np.inf), kind="stable")[:10]
    for i in sorted(order):
        est = limiting_subdiff_estimate(g, C[i], seed=seed, tol=tol)
        s = est.cloud @ d
        if s.size and s.max() >= rise - eps:
            k = int(np.argmax(s))
            return MeanValueResult(MeanValueStatus.FOUND, C[i], est.cloud[k])
    return MeanValueResult(MeanValueStatus.NOT_FOUND)


class LocalMinStatus(str, enum.Enum):
    STRICT_LOCAL_MIN = "STRICT_LOCAL_MIN"
    LOCAL_MIN = "LOCAL_MIN"
    NOT_MIN = "NOT_MIN"


@dataclass(frozen=True)
class LocalMinResult:
    status: LocalMinStatus
    witness: Optional[np.ndarray] = None
    value_gap: float = 0.0


def local_min_check(f: FunctionSpec, x_critical, radii=None, seed: int = 0,
                    tol: Tolerances = DEFAULT_TOLERANCES) -> LocalMinResult:
    x = np.atleast_1d(np.asarray(x_critical, dtype=float))
    radii = np.asarray(radii if radii is not None else [0.1 * 2.0 ** (-k) for k in range(6)])
    D = sphere_directions(f.dimension, 64, seed)
    fx = float(f.values(x[None, :])[0])
    eps = tol.eps_strict * (1 + abs(fx))
    Y = (x[None, None, :] + radii[:, None, None] * D[None, :, :])
    V = f.values(Y.reshape(-1, f.dimension)).reshape(len(radii), len(D))
    low = V < fx - eps
    if low.any():
        k, j = np.unravel_index(int(np.argmin(np.where(low, V, np.inf))), V.shape)
        return LocalMinResult(LocalMinStatus.NOT_MIN, Y[k, j], float(V[k, j] - fx))
    r = radii.min()
    if np.all(V[int(np.argmin(radii))] > fx + eps * r * r):
        return LocalMinResult(LocalMinStatus.STRICT_LOCAL_MIN)
    return LocalMinResult(LocalMinStatus.LOCAL_MIN)
