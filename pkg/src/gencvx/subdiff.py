"""Sampled Frechet and limiting subdifferentials of scalarized gradients.

For a C^{1,1} function phi and a direction u, the second-order sets at x are
the first-order sets of g(y) = <u, grad phi(y)> at x.  The limiting set is
approximated by clustering gradients of g sampled in shrinking balls around
x; the Frechet set by testing candidate vectors z against the liminf of the
difference quotient of g on shrinking spheres.
"""

from __future__ import annotations

import functools
import zlib
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateSampling
from .model import FunctionSpec
from .settings import DEFAULT_SAMPLING, DEFAULT_TOLERANCES, SamplingConfig, Tolerances
from .types import Membership

# multiplier on the local Lipschitz constant of g in the O(r) quotient allowance
ALLOWANCE_FACTOR = 4.0
CLOUD_CAP = 40
STABLE_REL = 1e-3


# --------------------------------------------------------------------------
# scalarization
# --------------------------------------------------------------------------

class ScalarFunction:
    """Handle for a locally Lipschitz scalar function g on R^n.

    Built either from a FunctionSpec and a direction (``scalarize``) or from
    plain batch callables.  ``values`` and ``gradients`` take ``(m, n)``
    arrays.
    """

    def __init__(self, values: Callable, gradients: Optional[Callable] = None,
                 dimension: int = 1, lipschitz: Optional[float] = None, name: str = "g"):
        self._values = values
        self._gradients = gradients
        self.dimension = dimension
        self.lipschitz = lipschitz
        self.name = name
        self.spec: Optional[FunctionSpec] = None
        self.u: Optional[np.ndarray] = None

    def values(self, Y) -> np.ndarray:
        return np.asarray(self._values(np.asarray(Y, dtype=float)), dtype=float)

    def gradients(self, Y) -> np.ndarray:
        Y = np.asarray(Y, dtype=float)
        if self._gradients is not None:
            return np.asarray(self._gradients(Y), dtype=float).reshape(len(Y), self.dimension)
        # central differences for callables without a derivative
        h = 1e-7 * np.maximum(1.0, np.abs(Y))
        out = np.empty_like(Y)
        for i in range(self.dimension):
            e = np.zeros_like(Y)
            e[:, i] = h[:, i]
            out[:, i] = (self.values(Y + e) - self.values(Y - e)) / (2 * h[:, i])
        return out

    def __call__(self, y) -> float:
        return float(self.values(np.atleast_2d(np.asarray(y, dtype=float)))[0])

    @property
    def is_zero(self) -> bool:
        return self.u is not None and not np.any(self.u)


def scalarize(f: FunctionSpec, u) -> ScalarFunction:
    """The map y -> <u, grad phi(y)>, differentiated by forward-mode AD."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (f.dimension,):
        raise ValueError(f"direction must have dimension {f.dimension}")

    def values(Y):
        return f.gradients(Y) @ u

    def gradients(Y):
        _, J = f.gradient_jacobians(Y)
        return np.einsum("i,mij->mj", u, J)

    g = ScalarFunction(values, gradients, f.dimension, None, name=f"<u, grad {f.name}>")
    g.spec = f
    g.u = u
    return g


def from_callable(fun: Callable, grad: Optional[Callable] = None, dimension: int = 1,
                  lipschitz: Optional[float] = None, name: str = "g") -> ScalarFunction:
    """Wrap a pointwise function ``fun(y) -> float`` (and optional gradient)."""

    def values(Y):
        return np.array([float(fun(y if dimension > 1 else y[0])) for y in Y])

    gradients = None
    if grad is not None:
        def gradients(Y):
            return np.array([np.atleast_1d(grad(y if dimension > 1 else y[0])) for y in Y], dtype=float)

    return ScalarFunction(values, gradients, dimension, lipschitz, name)


# --------------------------------------------------------------------------
# results
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MembershipResult:
    status: Membership
    margin: float
    liminf: float
    direction: Optional[tuple] = None


@dataclass
class SetEstimate:
    cloud: np.ndarray
    frechet_part: np.ndarray
    radius_schedule: tuple
    is_certified_empty: bool = False
    kind: str = "mordukhovich"
    inconclusive: int = 0
    one_sided: Optional[tuple] = None
    eps_cluster: float = 0.0
    lipschitz: float = 0.0
    # how far outside the true set a retained point may sit
    resolution: float = 0.0

    @property
    def dimension(self) -> int:
        return self.cloud.shape[1]

    @property
    def hull_1d(self) -> Optional[tuple]:
        if self.cloud.shape[1] != 1 or len(self.cloud) == 0:
            return None
        return (float(self.cloud[:, 0].min()), float(self.cloud[:, 0].max()))

    @property
    def is_empty(self) -> bool:
        return len(self.cloud) == 0

    @property
    def scale(self) -> float:
        if self.is_empty:
            return 0.0
        return float(np.max(np.linalg.norm(self.cloud, axis=1)))

    def products(self, u) -> np.ndarray:
        return self.cloud @ np.atleast_1d(np.asarray(u, dtype=float))

    def to_dict(self, max_points: int = 12) -> dict:
        pts = _spread_subset(self.cloud, max_points)
        d = {
            "kind": self.kind,
            "size": int(len(self.cloud)),
            "points": [[float(c) for c in p] for p in pts],
            "frechet_size": int(len(self.frechet_part)),
            "certified_empty": bool(self.is_certified_empty),
            "inconclusive_candidates": int(self.inconclusive),
            "radius_min": float(min(self.radius_schedule)),
            "radius_max": float(max(self.radius_schedule)),
        }
        hull = self.hull_1d
        d["hull_1d"] = None if hull is None else [hull[0], hull[1]]
        if self.one_sided is not None:
            d["one_sided"] = [float(v) for v in self.one_sided]
        return d


def _spread_subset(P: np.ndarray, k: int) -> np.ndarray:
    """Deterministic farthest-point subset of at most ``k`` rows."""
    if len(P) <= k:
        return P
    if P.shape[1] == 1:
        order = np.argsort(P[:, 0], kind="stable")
        idx = np.unique(np.round(np.linspace(0, len(P) - 1, k)).astype(int))
        return P[order[idx]]
    chosen = [int(np.argmin(np.linalg.norm(P - P.mean(axis=0), axis=1)))]
    dist = np.linalg.norm(P - P[chosen[0]], axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(P - P[nxt], axis=1))
    return P[sorted(chosen)]


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------

def _safe_eval(fn: Callable, Y: np.ndarray, width: Optional[int] = None) -> np.ndarray:
    """Batch evaluation; rows that raise or are non-finite come back as NaN."""
    try:
        out = np.asarray(fn(Y), dtype=float)
    except (ArithmeticError, ValueError):
        rows = []
        for y in Y:
            try:
                rows.append(np.asarray(fn(y[None, :]), dtype=float)[0])
            except (ArithmeticError, ValueError):
                rows.append(np.full(width, np.nan) if width else np.nan)
        out = np.array(rows, dtype=float)
    return out


def _point_seed(seed: int, x: np.ndarray, salt: int = 0) -> np.random.Generator:
    h = zlib.crc32(np.ascontiguousarray(x, dtype=float).tobytes())
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, h, salt])


def ball_samples(rng, n: int, r: float, count: int) -> np.ndarray:
    if n == 1:
        return rng.uniform(-r, r, size=(count, 1))
    d = rng.normal(size=(count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    rad = r * rng.uniform(size=(count, 1)) ** (1.0 / n)
    return d * rad


def sphere_directions(n: int, per_dim: int, seed: int = 0) -> np.ndarray:
    """Unit directions: +-axes, plus seeded random ones when n > 1."""
    eye = np.eye(n)
    axes = np.concatenate([eye, -eye])
    if n == 1:
        return axes
    rng = np.random.default_rng([seed, n, 17])
    d = rng.normal(size=(per_dim * n, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return np.concatenate([axes, d])


def richardson(m: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Linear extrapolation to r = 0 from consecutive radii (last axis)."""
    rho = radii[:-1] / radii[1:]
    return (rho * m[..., 1:] - m[..., :-1]) / (rho - 1.0)


def cluster(points: np.ndarray, eps: float) -> np.ndarray:
    """Representatives of clusters no wider than eps (1-D runs, n-D grid cells)."""
    P = points[np.all(np.isfinite(points), axis=1)]
    if len(P) == 0:
        return P.reshape(0, points.shape[1])
    if P.shape[1] == 1:
        v = np.sort(P[:, 0])
        reps = []
        i = 0
        while i < len(v):
            j = int(np.searchsorted(v, v[i] + eps, side="right"))
            reps.append(0.5 * (v[i] + v[j - 1]))
            i = j
        return np.array(reps)[:, None]
    # n-D: bucket on a grid of cell width eps / sqrt(n), so every cluster has
    # diameter at most eps; representatives are bucket means in first-seen order
    cell = eps / np.sqrt(P.shape[1]) if eps > 0 else np.finfo(float).tiny
    keys = np.floor(P / cell)
    _, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inv = inv.reshape(-1)
    sums = np.zeros((len(first), P.shape[1]))
    np.add.at(sums, inv, P)
    means = sums / np.bincount(inv)[:, None]
    return means[np.argsort(first, kind="stable")]


def _unique_rows(points: np.ndarray) -> np.ndarray:
    """Exact duplicates removed, first occurrence order kept."""
    if len(points) == 0:
        return points
    _, first = np.unique(points, axis=0, return_index=True)
    return points[np.sort(first)]


# --------------------------------------------------------------------------
# per-point sampling (shared between directions)
# --------------------------------------------------------------------------

@dataclass
class _Samples:
    cloud_radii: np.ndarray
    cloud_grads: np.ndarray        # (R, S, n) gradients of g, or of grad phi per u
    sphere_radii: np.ndarray
    directions: np.ndarray          # (D, n)
    sphere_values: np.ndarray       # (R', D) values of g on spheres
    center_value: float
    center_grad: np.ndarray
    failures: int
    total: int


@functools.lru_cache(maxsize=512)
def _spec_samples(f: FunctionSpec, x: tuple, radii: tuple, per_dim: int,
                  sphere_radii: tuple, dirs_per_dim: int, seed: int):
    """Direction-independent samples of grad phi and its Jacobian around x."""
    x = np.array(x)
    n = f.dimension
    rng = _point_seed(seed, x)
    count = per_dim * n
    offsets = np.concatenate([ball_samples(rng, n, r, count) for r in radii])
    Y = x + offsets

    def jac(Yb):
        return f.gradient_jacobians(Yb)[1]

    try:
        J = jac(Y)
    except (ArithmeticError, ValueError):
        J = np.full((len(Y), n, n), np.nan)
        for i, y in enumerate(Y):
            try:
                J[i] = jac(y[None, :])[0]
            except (ArithmeticError, ValueError):
                pass
    J = J.reshape(len(radii), count, n, n)

    D = sphere_directions(n, dirs_per_dim, seed)
    S = x + np.asarray(sphere_radii)[:, None, None] * D[None, :, :]
    G = _safe_eval(f.gradients, S.reshape(-1, n), width=n).reshape(len(sphere_radii), len(D), n)
    G0, J0 = f.gradient_jacobians(x[None, :])
    return J, D, G, G0[0], J0[0]


def _collect(g: ScalarFunction, x: np.ndarray, sampling: SamplingConfig, seed: int) -> _Samples:
    radii = np.asarray(sampling.radii, dtype=float)
    sradii = np.asarray(sampling.membership_radii, dtype=float)
    n = g.dimension
    if g.spec is not None:
        J, D, G, G0, J0 = _spec_samples(
            g.spec, tuple(float(c) for c in x), tuple(sampling.radii), sampling.samples_per_dim,
            tuple(sampling.membership_radii), sampling.sphere_dirs_per_dim, seed,
        )
        grads = np.einsum("i,rsij->rsj", g.u, J)
        svals = G @ g.u
        c_val = float(G0 @ g.u)
        c_grad = g.u @ J0
    else:
        rng = _point_seed(seed, x)
        count = sampling.samples_per_dim * n
        offsets = np.concatenate([ball_samples(rng, n, r, count) for r in radii])
        grads = _safe_eval(g.gradients, x + offsets, width=n).reshape(len(radii), count, n)
        D = sphere_directions(n, sampling.sphere_dirs_per_dim, seed)
        S = (x + sradii[:, None, None] * D[None, :, :]).reshape(-1, n)
        svals = _safe_eval(g.values, S).reshape(len(sradii), len(D))
        c_val = g(x)
        c_grad = _safe_eval(g.gradients, x[None, :], width=n)[0]
    bad = ~np.all(np.isfinite(grads), axis=2)
    return _Samples(radii, grads, sradii, D, svals, c_val, np.asarray(c_grad, dtype=float),
                    int(bad.sum()), int(bad.size))


# --------------------------------------------------------------------------
# Frechet membership
# --------------------------------------------------------------------------

def _tail(k: int) -> slice:
    return slice(k // 2, k)


def _membership_batch(s: _Samples, Z: np.ndarray, lip: float, tol: Tolerances):
    """Vectorised membership test for candidate rows of Z.

    Returns (status list, margins, liminf estimates, witness direction indices).
    """
    radii = s.sphere_radii
    tail = _tail(len(radii))
    r = radii[tail]
    V = s.sphere_values[tail]                                   # (T, D)
    Q = (V - s.center_value) / r[:, None]                       # (T, D)
    dz = Z @ s.directions.T                                     # (C, D)
    M = Q[None, :, :] - dz[:, None, :]                          # (C, T, D)
    with np.errstate(invalid="ignore"):
        m = np.nanmin(M, axis=2) if np.all(np.isfinite(V)) else np.min(M, axis=2)
    R = richardson(m, r)                                        # (C, T-1)
    scale = np.abs(s.center_value) + np.nanmax(np.abs(V), axis=1)
    rho = r[:-1] / r[1:]
    noise = 8 * np.finfo(float).eps * scale / r
    noise = (rho + 1) / (rho - 1) * np.maximum(noise[:-1], noise[1:])
    allow = ALLOWANCE_FACTOR * lip * r[:-1] + noise
    viol = np.min(R + allow[None, :], axis=1)
    k_worst = np.argmin(R + allow[None, :], axis=1)
    liminf = R[:, -1]
    eps = tol.eps_memb * (1.0 + np.linalg.norm(Z, axis=1))
    with np.errstate(invalid="ignore"):
        code = np.where(~np.isfinite(viol), 1, np.where(viol >= -eps, 0, np.where(viol >= -10 * eps, 1, 2)))
    kinds = (Membership.VERIFIED, Membership.INCONCLUSIVE, Membership.REJECTED)
    status = [kinds[c] for c in code]
    rows = M[np.arange(len(Z)), k_worst + 1]                    # (C, D)
    finite = np.all(np.isfinite(rows), axis=1)
    dir_idx = np.where(finite, np.argmin(np.where(np.isfinite(rows), rows, np.inf), axis=1), 0)
    return status, viol, liminf, dir_idx


def _local_lipschitz(s: _Samples, g: ScalarFunction) -> float:
    norms = np.linalg.norm(s.cloud_grads, axis=2)
    est = float(np.nanmax(norms)) if np.any(np.isfinite(norms)) else 0.0
    if est == 0.0 and g.lipschitz is not None:
        est = float(g.lipschitz)
    return max(est, 1e-12)


def frechet_membership(g: ScalarFunction, x, z, radii: Optional[Sequence[float]] = None,
                       seed: int = 0, tol: Tolerances = DEFAULT_TOLERANCES,
                       sampling: SamplingConfig = DEFAULT_SAMPLING) -> MembershipResult:
    """Decide whether z is a Frechet subgradient of g at x.

    The liminf of [g(y) - g(x) - <z, y - x>] / |y - x| is estimated by the
    minimum over sphere directions at each radius, extrapolated to r = 0 and
    relaxed by an O(r) allowance from the local Lipschitz constant of g.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if radii is not None:
        sampling = SamplingConfig(radii=sampling.radii, membership_radii=tuple(radii),
                                  samples_per_dim=sampling.samples_per_dim,
                                  sphere_dirs_per_dim=sampling.sphere_dirs_per_dim)
    s = _collect(g, x, sampling, seed)
    lip = _local_lipschitz(s, g)
    status, viol, liminf, di = _membership_batch(s, z[None, :], lip, tol)
    d = None
    if status[0] is Membership.REJECTED:
        d = tuple(float(c) for c in s.directions[di[0]])
    return MembershipResult(status[0], float(viol[0]), float(liminf[0]), d)


# --------------------------------------------------------------------------
# set estimates
# --------------------------------------------------------------------------

@dataclass
class _Analysis:
    mordukhovich: SetEstimate
    frechet: SetEstimate
    candidates: np.ndarray
    statuses: list
    margins: np.ndarray


def _one_sided(s: _Samples, lip: float, tol: Tolerances):
    """1-D one-sided slope data from the sphere values at +-r."""
    r_all = s.sphere_radii
    tail = _tail(len(r_all))
    r = r_all[tail]
    V = s.sphere_values[tail]
    D = s.directions[:, 0]
    right = (V[:, D > 0][:, 0] - s.center_value) / r
    left = (V[:, D < 0][:, 0] - s.center_value) / (-r)
    Rr = richardson(right, r)
    Rl = richardson(left, r)
    allow = ALLOWANCE_FACTOR * lip * r[:-1]
    lower_left = float(np.max(Rl - allow))      # lower estimate of limsup of left quotients
    upper_right = float(np.min(Rr + allow))     # upper estimate of liminf of right quotients

    def stable(R):
        last = R[-1]
        spread = np.abs(R[-3:] - last)
        return bool(np.all(spread <= STABLE_REL * (1 + abs(last)) + allow[-3:]))

    return float(Rl[-1]), float(Rr[-1]), stable(Rl), stable(Rr), lower_left, upper_right


def _analyse(g: ScalarFunction, x: np.ndarray, seed: int, tol: Tolerances,
             sampling: SamplingConfig, candidate_grid=None) -> _Analysis:
    n = g.dimension
    radii = tuple(sampling.radii)
    if g.is_zero:
        zero = np.zeros((1, n))
        m = SetEstimate(zero, zero.copy(), radii, kind="mordukhovich")
        fr = SetEstimate(zero, zero.copy(), radii, kind="frechet")
        return _Analysis(m, fr, zero, [Membership.VERIFIED], np.zeros(1))

    s = _collect(g, x, sampling, seed)
    if s.failures > 0.5 * s.total:
        raise DegenerateSampling(f"{s.failures} of {s.total} samples failed to evaluate near {x.tolist()}")
    lip = _local_lipschitz(s, g)
    eps_cluster = tol.cluster_factor * min(radii) * lip

    tail = _tail(len(radii))
    grads = s.cloud_grads[tail].reshape(-1, n)
    clusters = cluster(grads, eps_cluster)

    one_sided = None
    extra = [s.center_grad] if np.all(np.isfinite(s.center_grad)) else []
    injected = []
    if n == 1:
        gl, gr, sl, sr, lower_left, upper_right = _one_sided(s, lip, tol)
        one_sided = (gl, gr)
        extra += [np.array([gl]), np.array([gr])]
        injected = [np.array([v]) for v, ok in ((gl, sl), (gr, sr)) if ok and np.isfinite(v)]
    base = np.concatenate([clusters] + [p[None, :] for p in injected]) if injected else clusters

    if candidate_grid is not None:
        cands = np.atleast_2d(np.asarray(candidate_grid, dtype=float)).reshape(-1, n)
    elif n == 1:
        lo, hi = float(base[:, 0].min()), float(base[:, 0].max())
        pad = 2 * eps_cluster
        cands = np.linspace(lo - pad, hi + pad, sampling.candidate_grid)[:, None]
    else:
        pts = _spread_subset(base, CLOUD_CAP)
        i, j = np.triu_indices(len(pts), 1)
        cands = np.concatenate([pts, 0.5 * (pts[i] + pts[j])])
    extra = [e for e in extra if np.all(np.isfinite(e))]
    if extra:
        cands = np.concatenate([cands, np.array(extra).reshape(-1, n)])

    statuses, margins, _, _ = _membership_batch(s, cands, lip, tol)
    verified = cands[[st is Membership.VERIFIED for st in statuses]]
    verified = _unique_rows(verified) if len(verified) else verified.reshape(0, n)
    n_inconclusive = sum(st is Membership.INCONCLUSIVE for st in statuses)

    all_rejected = all(st is Membership.REJECTED for st in statuses)
    if n == 1:
        gap = lower_left - upper_right
        certified = all_rejected and gap > tol.eps_memb * (1 + abs(lower_left) + abs(upper_right))
    else:
        certified = all_rejected

    # limiting cloud: clusters and stable one-sided limits, with verified
    # Frechet points kept exactly and nearby cluster representatives dropped
    if len(verified):
        d2 = ((base[:, None, :] - verified[None, :, :]) ** 2).sum(axis=2)
        far = np.sqrt(d2.min(axis=1)) > eps_cluster
        base = base[far] if len(base) else base
    cloud = np.concatenate([base, verified]) if len(verified) else base
    if n == 1:
        cloud = cloud[np.argsort(cloud[:, 0], kind="stable")]

    res_f = (ALLOWANCE_FACTOR * lip * min(sampling.membership_radii)
             + tol.eps_memb * (1 + float(np.max(np.linalg.norm(cands, axis=1)))))
    res_m = max(res_f, eps_cluster)
    m = SetEstimate(cloud, verified.copy(), radii, False, "mordukhovich", n_inconclusive,
                    one_sided, eps_cluster, lip, res_m)
    fr = SetEstimate(verified.copy(), verified.copy(), tuple(sampling.membership_radii), certified,
                     "frechet", n_inconclusive, one_sided, eps_cluster, lip, res_f)
    return _Analysis(m, fr, cands, statuses, margins)


class SetEstimator:
    """Caches the joint Frechet/limiting analysis per (x, u)."""

    def __init__(self, f: FunctionSpec, seed: int = 0, tol: Tolerances = DEFAULT_TOLERANCES,
                 sampling: SamplingConfig = DEFAULT_SAMPLING):
        self.f = f
        self.seed = seed
        self.tol = tol
        self.sampling = sampling
        self._cache: dict = {}

    def analyse(self, x, u) -> _Analysis:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        u = np.atleast_1d(np.asarray(u, dtype=float))
        key = (x.tobytes(), u.tobytes())
        hit = self._cache.get(key)
        if hit is None:
            hit = _analyse(scalarize(self.f, u), x, self.seed, self.tol, self.sampling)
            self._cache[key] = hit
        return hit

    def frechet(self, x, u) -> SetEstimate:
        return self.analyse(x, u).frechet

    def mordukhovich(self, x, u) -> SetEstimate:
        return self.analyse(x, u).mordukhovich


def limiting_subdiff_estimate(g: ScalarFunction, x, schedule: Optional[Sequence[float]] = None,
                              samples_per_radius: Optional[int] = None, seed: int = 0,
                              tol: Tolerances = DEFAULT_TOLERANCES,
                              sampling: SamplingConfig = DEFAULT_SAMPLING) -> SetEstimate:
    """Limiting subdifferential of g at x as a finite cloud.

    Raises:
        DegenerateSampling: more than half the sampled gradients failed.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if schedule is not None or samples_per_radius is not None:
        sched = tuple(schedule) if schedule is not None else sampling.radii
        if any(a <= b for a, b in zip(sched, sched[1:])) or min(sched) <= 0:
            raise ValueError("schedule must be strictly decreasing and positive")
        spr = samples_per_radius if samples_per_radius is not None else sampling.samples_per_dim * g.dimension
        sampling = SamplingConfig(radii=sched, membership_radii=sampling.membership_radii,
                                  samples_per_dim=max(1, spr // g.dimension),
                                  sphere_dirs_per_dim=sampling.sphere_dirs_per_dim,
                                  candidate_grid=sampling.candidate_grid)
    return _analyse(g, x, seed, tol, sampling).mordukhovich


def second_order_frechet(f: FunctionSpec, x, u, candidate_grid=None, seed: int = 0,
                         tol: Tolerances = DEFAULT_TOLERANCES,
                         sampling: SamplingConfig = DEFAULT_SAMPLING) -> SetEstimate:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return _analyse(scalarize(f, u), x, seed, tol, sampling, candidate_grid).frechet


def second_order_mordukhovich(f: FunctionSpec, x, u, seed: int = 0,
                              tol: Tolerances = DEFAULT_TOLERANCES,
                              sampling: SamplingConfig = DEFAULT_SAMPLING) -> SetEstimate:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return _analyse(scalarize(f, u), x, seed, tol, sampling).mordukhovich


# --------------------------------------------------------------------------
# set distances
# --------------------------------------------------------------------------

def _directed_1d(A: list, B: list) -> float:
    """sup over a in A of dist(a, B) for unions of closed intervals."""
    B = sorted(B)
    worst = 0.0
    for a0, a1 in A:
        probes = [a0, a1]
        for (_, e0), (s1, _) in zip(B, B[1:]):
            mid = 0.5 * (e0 + s1)
            if a0 <= mid <= a1:
                probes.append(mid)
        for p in probes:
            d = min(0.0 if lo <= p <= hi else min(abs(p - lo), abs(p - hi)) for lo, hi in B)
            worst = max(worst, d)
    return worst


def hausdorff_1d(A: list, B: list) -> float:
    """Hausdorff distance between finite unions of intervals ``[(lo, hi), ...]``.

    Returns 0 when both are empty and inf when exactly one is.
    """
    if not A and not B:
        return 0.0
    if not A or not B:
        return float("inf")
    return max(_directed_1d(A, B), _directed_1d(B, A))


def hausdorff_points(P: np.ndarray, Q: np.ndarray) -> float:
    P = np.atleast_2d(P)
    Q = np.atleast_2d(Q)
    if len(P) == 0 and len(Q) == 0:
        return 0.0
    if len(P) == 0 or len(Q) == 0:
        return float("inf")
    d = np.linalg.norm(P[:, None, :] - Q[None, :, :], axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def estimate_intervals(est: SetEstimate) -> list:
    return [(float(v), float(v)) for v in est.cloud[:, 0]]
