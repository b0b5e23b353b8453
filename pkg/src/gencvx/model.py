"""Candidate functions: value and gradient expressions on a box."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import expr as E
from .errors import ConfigError, DomainError, GradientMismatch
from .settings import DEFAULT_TOLERANCES

DEFAULT_HALF_WIDTH = 2.0


@dataclass(frozen=True, eq=False)
class FunctionSpec:
    """A C^{1,1} candidate phi with a user supplied gradient.

    ``domain_box`` is a tuple of ``(lo, hi)`` pairs, one per coordinate.
    """

    name: str
    dimension: int
    value: E.Expr
    gradient: tuple
    domain_box: tuple
    grad_lipschitz: Optional[float] = None
    value_source: str = ""
    gradient_sources: tuple = ()
    quad_tol: float = DEFAULT_TOLERANCES.quad_tol
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise ConfigError("dimension must be a positive integer")
        if len(self.gradient) != self.dimension:
            raise ConfigError(
                f"{self.name}: expected {self.dimension} gradient components, got {len(self.gradient)}"
            )
        if len(self.domain_box) != self.dimension:
            raise ConfigError(f"{self.name}: domain box does not match the dimension")
        for lo, hi in self.domain_box:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ConfigError(f"{self.name}: invalid domain interval [{lo}, {hi}]")
        for e in (self.value, *self.gradient):
            if E.max_variable_index(e) >= self.dimension:
                raise ConfigError(f"{self.name}: expression uses a variable beyond x{self.dimension}")
        if self.grad_lipschitz is not None and not self.grad_lipschitz > 0:
            raise ConfigError("grad_lipschitz must be positive")

    @classmethod
    def from_sources(
        cls,
        name: str,
        value: str,
        gradient: Sequence[str],
        dimension: Optional[int] = None,
        domain_box=None,
        grad_lipschitz: Optional[float] = None,
    ) -> "FunctionSpec":
        if dimension is None:
            dimension = len(gradient)
        if domain_box is None:
            domain_box = tuple((-DEFAULT_HALF_WIDTH, DEFAULT_HALF_WIDTH) for _ in range(dimension))
        return cls(
            name=name,
            dimension=dimension,
            value=E.parse(value, dimension),
            gradient=tuple(E.parse(g, dimension) for g in gradient),
            domain_box=tuple((float(lo), float(hi)) for lo, hi in domain_box),
            grad_lipschitz=grad_lipschitz,
            value_source=value,
            gradient_sources=tuple(gradient),
        )

    # -- box helpers ---------------------------------------------------------
    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.domain_box])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.domain_box])

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def _point(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dimension,):
            raise ValueError(f"{self.name}: expected a point of dimension {self.dimension}")
        if not self.contains(x):
            raise DomainError(f"{self.name}: point {x.tolist()} is outside the domain box")
        return x

    # -- batch evaluation (no box check) ------------------------------------
    def values(self, X) -> np.ndarray:
        return E.evaluate_batch(self.value, np.asarray(X, dtype=float), self.quad_tol)

    def gradients(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        cols = [E.evaluate_batch(g, X, self.quad_tol) for g in self.gradient]
        return np.stack(cols, axis=1)

    def gradient_jacobians(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Gradients ``(m, n)`` and their forward-mode Jacobians ``(m, n, n)``."""
        X = np.asarray(X, dtype=float)
        vals, jacs = zip(*(E.evaluate_with_gradient(g, X, self.quad_tol) for g in self.gradient))
        return np.stack(vals, axis=1), np.stack(jacs, axis=1)

    # -- point evaluation ---------------------------------------------------
    def value_at(self, x) -> float:
        return float(self.values(self._point(x)[None, :])[0])

    def gradient_at(self, x) -> np.ndarray:
        return self.gradients(self._point(x)[None, :])[0]

    # -- Lipschitz constant of the gradient -----------------------------------
    def lipschitz(self) -> float:
        if self.grad_lipschitz is not None:
            return float(self.grad_lipschitz)
        with self._lock:
            if "lip" not in self._cache:
                self._cache["lip"] = estimate_lipschitz(self)
            return self._cache["lip"]


def value_at(f: FunctionSpec, x) -> float:
    return f.value_at(x)


def gradient_at(f: FunctionSpec, x) -> np.ndarray:
    return f.gradient_at(x)


def interior_samples(f: FunctionSpec, count: int, seed: int, margin: float = 1e-3) -> np.ndarray:
    rng = np.random.default_rng(seed)
    lo, hi = f.lower, f.upper
    pad = margin * (hi - lo)
    return rng.uniform(lo + pad, hi - pad, size=(count, f.dimension))


def estimate_lipschitz(f: FunctionSpec, pairs: int = 2000, seed: int = 0) -> float:
    """max ||grad(x) - grad(y)|| / ||x - y|| over seeded pairs, some of them close."""
    rng = np.random.default_rng(seed)
    X = interior_samples(f, pairs, seed)
    far = interior_samples(f, pairs // 2, seed + 1)
    scale = f.diameter
    steps = rng.normal(size=(pairs - pairs // 2, f.dimension))
    steps *= (scale * 10.0 ** rng.uniform(-4, -1, size=(len(steps), 1))) / np.linalg.norm(
        steps, axis=1, keepdims=True
    )
    near = np.clip(X[pairs // 2:] + steps, f.lower, f.upper)
    Y = np.concatenate([far, near])
    gx, gy = f.gradients(X), f.gradients(Y)
    dist = np.linalg.norm(X - Y, axis=1)
    ok = dist > 0
    ratio = np.linalg.norm(gx - gy, axis=1)[ok] / dist[ok]
    ratio = ratio[np.isfinite(ratio)]
    est = float(ratio.max()) if ratio.size else 0.0
    return max(est, 1e-12)


def check_gradient(f: FunctionSpec, count: int = 200, seed: int = 0, h: float = 1e-7) -> float:
    """Compare the gradient expressions with central differences of the value.

    Returns the largest violation ratio (<= 1 passes).

    Raises:
        GradientMismatch: some point exceeds max(1e-6, 1e-4 * |grad|).
    """
    X = interior_samples(f, count, seed)
    rng = np.random.default_rng(seed + 7)
    U = rng.normal(size=X.shape)
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    # both shifts in one batch so quadrature segments are shared
    vals = f.values(np.concatenate([X + h * U, X - h * U]))
    fd = (vals[:count] - vals[count:]) / (2 * h)
    G = f.gradients(X)
    exact = np.einsum("ij,ij->i", G, U)
    tol = np.maximum(1e-6, 1e-4 * np.linalg.norm(G, axis=1))
    ratio = np.abs(fd - exact) / tol
    worst = int(np.argmax(ratio))
    if not np.isfinite(ratio[worst]) or ratio[worst] > 1.0:
        raise GradientMismatch(
            f"{f.name}: gradient check failed at x={X[worst].tolist()} "
            f"(difference quotient {fd[worst]!r}, gradient {exact[worst]!r})"
        )
    return float(ratio[worst])
