"""Second-order conditions evaluated over scanned points and orthogonal directions."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy import optimize

from .errors import DegenerateSampling
from .model import FunctionSpec
from .settings import DEFAULT_SAMPLING, DEFAULT_TOLERANCES, SamplingConfig, Tolerances
from .subdiff import SetEstimator, frechet_membership, scalarize
from .types import ConditionStatus, Membership, Witness, WitnessKind

NEC_QC = "NEC_QC_3.2"
NEC_PC = "NEC_PC_3.4"
SUF_SPC_M = "SUF_SPC_4.2"
SUF_SQC = "SUF_SQC_4.4"
SUF_SPC_F = "SUF_SPC_4.6"
VARIANT = "VARIANT_11"

CONDITION_IDS = (NEC_QC, NEC_PC, SUF_SPC_M, SUF_SQC, SUF_SPC_F, VARIANT)
NECESSARY = (NEC_QC, NEC_PC)
SUFFICIENT = (SUF_SPC_M, SUF_SQC, SUF_SPC_F, VARIANT)

NOTES = {
    SUF_SPC_M: "strictly pseudoconvex (sampled evidence)",
    SUF_SQC: "strictly quasiconvex (sampled evidence)",
    SUF_SPC_F: "strictly pseudoconvex (sampled evidence)",
    VARIANT: "diagnostic only: this condition is NOT sufficient for quasiconvexity",
}

_RANK = {ConditionStatus.HOLDS_SAMPLED: 0, ConditionStatus.INCONCLUSIVE: 1, ConditionStatus.FAILS: 2}


def default_density(n: int) -> int:
    return {1: 41, 2: 7, 3: 4}.get(n, 3)


def default_direction_count(n: int) -> int:
    return max(8, 4 * n)


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("GENCVX_THREADS", "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# points and directions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanPoint:
    point: np.ndarray
    gradient: np.ndarray
    is_critical: bool


def _lattice(f: FunctionSpec, density: int) -> np.ndarray:
    # cell centres: the conditions only speak about interior points
    frac = (np.arange(density) + 0.5) / density
    axes = [lo + (hi - lo) * frac for lo, hi in f.domain_box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _grad_norm(f: FunctionSpec, X: np.ndarray) -> np.ndarray:
    return np.linalg.norm(f.gradients(X), axis=1)


def _refine_1d(f: FunctionSpec, nodes: np.ndarray, grads: np.ndarray, eps_crit: float) -> list:
    out = []
    g = grads[:, 0]

    def gfun(t):
        return float(f.gradients(np.array([[t]]))[0, 0])

    for i in range(len(nodes) - 1):
        a, b = nodes[i], nodes[i + 1]
        if g[i] * g[i + 1] < 0:
            try:
                root = optimize.brentq(gfun, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
                out.append(root)
            except (ValueError, RuntimeError, ArithmeticError):
                pass
    absg = np.abs(g)
    for i in range(1, len(nodes) - 1):
        if absg[i] <= absg[i - 1] and absg[i] <= absg[i + 1] and absg[i] > eps_crit:
            try:
                res = optimize.minimize_scalar(
                    lambda t: abs(gfun(t)), bounds=(nodes[i - 1], nodes[i + 1]),
                    method="bounded", options={"xatol": 1e-14, "maxiter": 500},
                )
                out.append(float(res.x))
            except (ValueError, ArithmeticError):
                pass
    return out


def _refine_nd(f: FunctionSpec, lattice: np.ndarray, norms: np.ndarray, density: int,
               eps_crit: float) -> list:
    n = f.dimension
    grid = norms.reshape((density,) * n)
    out = []
    for idx in np.ndindex(*grid.shape):
        v = grid[idx]
        if v <= eps_crit:
            continue
        neigh = []
        for ax in range(n):
            for step in (-1, 1):
                j = list(idx)
                j[ax] += step
                if 0 <= j[ax] < density:
                    neigh.append(grid[tuple(j)])
        if neigh and v <= min(neigh):
            x0 = lattice[np.ravel_multi_index(idx, grid.shape)]
            try:
                res = optimize.least_squares(
                    lambda x: f.gradients(x[None, :])[0], x0, bounds=(f.lower, f.upper),
                    xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200,
                )
                out.append(res.x)
            except (ValueError, ArithmeticError):
                pass
    return out


def scan_points(f: FunctionSpec, grid_density: Optional[int] = None, seed: int = 0,
                tol: Tolerances = DEFAULT_TOLERANCES, random_count: Optional[int] = None) -> list:
    """Lattice plus seeded random points, with refined critical points appended.

    Points are ordered: critical points first (sorted), then the rest in
    lattice-then-random order.
    """
    density = grid_density if grid_density is not None else default_density(f.dimension)
    if density < 2:
        raise ValueError("grid_density must be at least 2")
    n = f.dimension
    lattice = _lattice(f, density)
    rng = np.random.default_rng([seed, 101])
    if random_count is None:
        random_count = density if n == 1 else 2 * n
    rand = rng.uniform(f.lower, f.upper, size=(random_count, n))
    X = np.concatenate([lattice, rand])
    G = f.gradients(X)
    norms = np.linalg.norm(G, axis=1)

    if n == 1:
        extra = [np.array([t]) for t in _refine_1d(f, lattice[:, 0], G[:density], tol.eps_crit)]
    else:
        extra = _refine_nd(f, lattice, norms[: len(lattice)], density, tol.eps_crit)
    extra = [e for e in extra if np.all(e > f.lower) and np.all(e < f.upper)]
    if extra:
        E = np.array(extra).reshape(-1, n)
        EG = f.gradients(E)
        X = np.concatenate([X, E])
        G = np.concatenate([G, EG])
        norms = np.linalg.norm(G, axis=1)

    crit = norms <= tol.eps_crit
    # drop duplicates among critical points, keeping the smallest gradient
    merge = 1e-6 * f.diameter
    keep_crit = []
    for i in np.argsort(norms, kind="stable"):
        if not crit[i]:
            continue
        if all(np.linalg.norm(X[i] - X[j]) > merge for j in keep_crit):
            keep_crit.append(i)
    keep_crit.sort(key=lambda i: tuple(X[i]))
    lat_rand = [i for i in range(len(lattice) + random_count) if not crit[i]]
    out = [ScanPoint(X[i].copy(), G[i].copy(), True) for i in keep_crit]
    out += [ScanPoint(X[i].copy(), G[i].copy(), False) for i in lat_rand]
    return out


def orth_directions(gradient, count: int, seed: int = 0,
                    tol: Tolerances = DEFAULT_TOLERANCES) -> list:
    """Unit directions u with <gradient, u> = 0 (all of the sphere at critical points)."""
    if count < 1:
        raise ValueError("count must be positive")
    g = np.atleast_1d(np.asarray(gradient, dtype=float))
    n = g.size
    gn = float(np.linalg.norm(g))
    rng = np.random.default_rng([seed, n, 29])
    eye = np.eye(n)
    if gn <= tol.eps_crit:
        if n == 1:
            return [np.array([1.0]), np.array([-1.0])]
        dirs = [e for k in range(n) for e in (eye[k], -eye[k])]
        while len(dirs) < count:
            d = rng.normal(size=n)
            dirs.append(d / np.linalg.norm(d))
        return dirs
    if n == 1:
        return []
    ghat = g / gn
    dirs = []
    for k in range(n):
        for s in (1.0, -1.0):
            d = s * eye[k] - s * ghat[k] * ghat
            nd = np.linalg.norm(d)
            if nd > 1e-8:
                dirs.append(d / nd)
    while len(dirs) < count:
        d = rng.normal(size=n)
        d -= (d @ ghat) * ghat
        nd = np.linalg.norm(d)
        if nd > 1e-8:
            dirs.append(d / nd)
    out = []
    for d in dirs:
        d = d - (d @ ghat) * ghat
        out.append(d / np.linalg.norm(d))
    return out


# --------------------------------------------------------------------------
# verdicts
# --------------------------------------------------------------------------

@dataclass
class ConditionVerdict:
    condition_id: str
    status: ConditionStatus
    witness: Optional[Witness] = None
    points_checked: int = 0
    directions_per_point: int = 0
    cells: int = 0
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "condition_id": self.condition_id,
            "status": self.status.value,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "points_checked": self.points_checked,
            "directions_per_point": self.directions_per_point,
            "cells": self.cells,
            "note": self.note,
        }


@dataclass
class _CellResult:
    status: ConditionStatus
    witness: Optional[Witness] = None


def eps_strict(tol: Tolerances, u: np.ndarray, scale: float) -> float:
    return tol.eps_strict * (1.0 + float(np.linalg.norm(u)) * max(scale, 1.0))


def _wit(cid, x, u, z, ip, context, **extra):
    kind = WitnessKind.NEC_VIOLATION if cid in NECESSARY else WitnessKind.SUF_VIOLATION
    return Witness.make(x, u=u, z=z, inner_product=ip, kind=kind, context=context, **extra)


def evaluate_cell(est: SetEstimator, x, u, cid: str) -> _CellResult:
    """One condition at one (x, u)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    tol = est.tol
    try:
        a = est.analyse(x, u)
        if cid in (SUF_SQC,):
            b = est.analyse(x, -u)
    except DegenerateSampling:
        return _CellResult(ConditionStatus.INCONCLUSIVE)
    M, F = a.mordukhovich, a.frechet
    scale = max(M.scale, F.scale)
    # points of an estimate may sit up to its resolution outside the true set
    res = max(M.resolution, F.resolution) * float(np.linalg.norm(u))
    eps = eps_strict(tol, u, scale) + res
    H = ConditionStatus.HOLDS_SAMPLED

    def inconclusive_products():
        mask = np.array([s is Membership.INCONCLUSIVE for s in a.statuses], dtype=bool)
        return a.candidates[mask] @ u

    if cid == NEC_QC:
        p = M.products(u)
        if len(p) == 0:
            return _CellResult(ConditionStatus.INCONCLUSIVE)
        k = int(np.argmax(p))
        if p[k] >= -eps:
            return _CellResult(H)
        return _CellResult(ConditionStatus.FAILS, _wit(
            cid, x, u, M.cloud[k], p[k], f"{cid}: every limiting estimate has <z,u> < 0",
            eps_strict=eps))

    if cid == NEC_PC:
        p = F.products(u)
        if len(p):
            k = int(np.argmin(p))
            if p[k] < -eps:
                return _CellResult(ConditionStatus.FAILS, _wit(
                    cid, x, u, F.cloud[k], p[k], f"{cid}: Frechet subgradient with <z,u> < 0",
                    eps_strict=eps))
        if np.any(inconclusive_products() < -eps):
            return _CellResult(ConditionStatus.INCONCLUSIVE)
        return _CellResult(H)

    if cid == SUF_SPC_M:
        p = M.products(u)
        if len(p) == 0:
            return _CellResult(ConditionStatus.INCONCLUSIVE)
        k = int(np.argmin(p))
        if p[k] > eps:
            return _CellResult(H)
        return _CellResult(ConditionStatus.FAILS, _wit(
            cid, x, u, M.cloud[k], p[k], f"{cid}: limiting subgradient with <z,u> <= 0",
            eps_strict=eps))

    if cid == VARIANT:
        p = M.products(u)
        if len(p) == 0:
            return _CellResult(ConditionStatus.INCONCLUSIVE)
        k = int(np.argmax(p))
        if p[k] > eps:
            return _CellResult(H)
        return _CellResult(ConditionStatus.FAILS, _wit(
            cid, x, u, M.cloud[k], p[k], f"{cid}: no limiting subgradient with <z,u> > 0",
            eps_strict=eps))

    if cid == SUF_SPC_F:
        p = F.products(u)
        if len(p) and p.max() > eps:
            return _CellResult(H)
        if F.is_certified_empty:
            return _CellResult(ConditionStatus.FAILS, _wit(
                cid, x, u, None, 0.0, f"{cid}: Frechet set certified empty", certified_empty=1))
        if np.any(inconclusive_products() > eps) or len(p) == 0:
            return _CellResult(ConditionStatus.INCONCLUSIVE)
        k = int(np.argmax(p))
        return _CellResult(ConditionStatus.FAILS, _wit(
            cid, x, u, F.cloud[k], p[k], f"{cid}: no Frechet subgradient with <z,u> > 0",
            eps_strict=eps))

    if cid == SUF_SQC:
        Fm = b.frechet
        union = np.concatenate([F.cloud, -Fm.cloud])
        p = union @ u
        eps = eps_strict(tol, u, max(scale, Fm.scale)) + res + Fm.resolution * float(np.linalg.norm(u))
        if len(p) and p.max() > eps:
            return _CellResult(H)
        if F.is_certified_empty and Fm.is_certified_empty:
            return _CellResult(ConditionStatus.FAILS, _wit(
                cid, x, u, None, 0.0, f"{cid}: both Frechet sets certified empty", certified_empty=1))
        neg = np.array([s is Membership.INCONCLUSIVE for s in b.statuses], dtype=bool)
        if (np.any(inconclusive_products() > eps) or np.any(-(b.candidates[neg] @ u) > eps)
                or len(p) == 0):
            return _CellResult(ConditionStatus.INCONCLUSIVE)
        k = int(np.argmax(p))
        return _CellResult(ConditionStatus.FAILS, _wit(
            cid, x, u, union[k], p[k], f"{cid}: no z in the union set with <z,u> > 0",
            eps_strict=eps))

    raise KeyError(cid)


def _aggregate(cid: str, results: list, points_checked: int, dpp: int) -> ConditionVerdict:
    status = ConditionStatus.HOLDS_SAMPLED
    witness = None
    for r in results:
        if _RANK[r.status] > _RANK[status]:
            status = r.status
        if r.status is ConditionStatus.FAILS and witness is None:
            witness = r.witness
    note = NOTES.get(cid, "")
    if cid != VARIANT and status is not ConditionStatus.HOLDS_SAMPLED and cid in SUFFICIENT:
        note = ""
    return ConditionVerdict(cid, status, witness, points_checked, dpp, len(results), note)


@dataclass
class ConditionRun:
    points: list
    cells: list
    verdicts: dict
    estimator: SetEstimator = field(repr=False)


def build_cells(f: FunctionSpec, points: Iterable[ScanPoint], direction_count: int, seed: int,
                tol: Tolerances) -> list:
    cells = []
    for p in points:
        for u in orth_directions(p.gradient, direction_count, seed, tol):
            cells.append((p.point, u))
    return cells


def run_conditions(f: FunctionSpec, ids: Iterable[str] = CONDITION_IDS, grid_density=None,
                   seed: int = 0, direction_count=None, tol: Tolerances = DEFAULT_TOLERANCES,
                   sampling: SamplingConfig = DEFAULT_SAMPLING, points=None,
                   estimator: Optional[SetEstimator] = None, threads: Optional[int] = None,
                   random_count: Optional[int] = None) -> ConditionRun:
    ids = [i for i in CONDITION_IDS if i in set(ids)]
    if points is None:
        points = scan_points(f, grid_density, seed, tol, random_count)
    dc = direction_count if direction_count is not None else default_direction_count(f.dimension)
    est = estimator or SetEstimator(f, seed, tol, sampling)
    cells = build_cells(f, points, dc, seed, tol)
    threads = threads or thread_count()

    def work(cell):
        x, u = cell
        return [evaluate_cell(est, x, u, cid) for cid in ids]

    if threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, cells))
    else:
        rows = [work(c) for c in cells]

    used = {tuple(x) for x, _ in cells}
    dpp = max((sum(1 for x, _ in cells if tuple(x) == p) for p in used), default=0)
    verdicts = {}
    for j, cid in enumerate(ids):
        verdicts[cid] = _aggregate(cid, [r[j] for r in rows], len(used), dpp)
    return ConditionRun(points, cells, verdicts, est)


def refine_verdict(verdict: ConditionVerdict, est: SetEstimator, cells: list) -> ConditionVerdict:
    """Fold extra (x, u) cells into an existing verdict."""
    if not cells:
        return verdict
    prior = _CellResult(verdict.status, verdict.witness)
    fresh = [evaluate_cell(est, x, u, verdict.condition_id) for x, u in cells]
    out = _aggregate(verdict.condition_id, [prior] + fresh, verdict.points_checked + len(cells),
                     verdict.directions_per_point)
    out.cells = verdict.cells + len(cells)
    return out


def targeted_cells(f: FunctionSpec, x, y, tol: Tolerances = DEFAULT_TOLERANCES) -> list:
    """Cells suggested by a definition-violation pair (x, y).

    The direction y - x is projected onto the gradient's orthogonal
    complement at x and at the segment maximiser, where the gradient is
    orthogonal to the segment.
    """
    from .oracles import segment_max_witness

    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = y - x
    anchors = [x]
    sm = segment_max_witness(f, x, y, tol=tol)
    if sm is not None:
        anchors.append(x + sm.t0 * d)
    cells = []
    for p in anchors:
        if not (np.all(p > f.lower) and np.all(p < f.upper)):
            continue
        g = f.gradients(p[None, :])[0]
        gn = float(np.linalg.norm(g))
        u = d if gn <= tol.eps_crit else d - (d @ g) / gn ** 2 * g
        un = float(np.linalg.norm(u))
        if un <= 1e-12 * float(np.linalg.norm(d)):
            continue
        if gn > tol.eps_crit and f.dimension == 1:
            continue
        u = u / un
        cells += [(p, u), (p, -u)]
    return cells


def _check(cid, f, points=None, directions=None, **kw) -> ConditionVerdict:
    if directions is not None:
        kw.setdefault("direction_count", directions)
    return run_conditions(f, [cid], points=points, **kw).verdicts[cid]


def check_necessary_quasiconvex(f, points=None, directions=None, **kw) -> ConditionVerdict:
    return _check(NEC_QC, f, points, directions, **kw)


def check_necessary_pseudoconvex(f, points=None, directions=None, **kw) -> ConditionVerdict:
    return _check(NEC_PC, f, points, directions, **kw)


def check_sufficient_mordukhovich(f, points=None, directions=None, **kw) -> ConditionVerdict:
    return _check(SUF_SPC_M, f, points, directions, **kw)


def check_sufficient_frechet_union(f, points=None, directions=None, **kw) -> ConditionVerdict:
    return _check(SUF_SQC, f, points, directions, **kw)


def check_sufficient_frechet_exists(f, points=None, directions=None, **kw) -> ConditionVerdict:
    return _check(SUF_SPC_F, f, points, directions, **kw)


def check_variant_11(f, points=None, directions=None, **kw) -> ConditionVerdict:
    return _check(VARIANT, f, points, directions, **kw)


# --------------------------------------------------------------------------
# witness replay
# --------------------------------------------------------------------------

def replay_witness(f: FunctionSpec, w: Witness, cid: str, seed: int = 0,
                   tol: Tolerances = DEFAULT_TOLERANCES,
                   sampling: SamplingConfig = DEFAULT_SAMPLING) -> bool:
    """Recompute a condition failure from scratch; True if it reproduces."""
    x = np.array(w.x)
    u = np.array(w.u)
    grad = f.gradients(x[None, :])[0]
    gn = float(np.linalg.norm(grad))
    if abs(float(grad @ u)) > max(tol.eps_orth * gn * np.linalg.norm(u), tol.eps_crit):
        return False
    est = SetEstimator(f, seed, tol, sampling)
    if cid == NEC_PC:
        z = np.array(w.z)
        res = frechet_membership(scalarize(f, u), x, z, seed=seed, tol=tol, sampling=sampling)
        a = est.analyse(x, u)
        eps = eps_strict(tol, u, a.mordukhovich.scale) + a.frechet.resolution * float(np.linalg.norm(u))
        return res.status is Membership.VERIFIED and float(z @ u) < -eps
    fresh = evaluate_cell(est, x, u, cid)
    if fresh.status is not ConditionStatus.FAILS:
        return False
    if w.z is None:
        return fresh.witness.z is None
    if fresh.witness.z is None:
        return False
    if cid in NECESSARY:
        return fresh.witness.inner_product < -fresh.witness.extra.get("eps_strict", 0.0)
    return abs(fresh.witness.inner_product - w.inner_product) <= 1e-6 * (1 + abs(w.inner_product))
