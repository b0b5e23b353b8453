"""Seeded generators for random test functions, written as DSL sources."""

import itertools

import numpy as np

from gencvx.model import FunctionSpec
from gencvx.subdiff import ScalarFunction


def _num(c: float) -> str:
    return f"({float(c)!r})"


def quadratic(seed: int, n: int):
    """phi(x) = 1/2 <Ax, x> + <b, x>; returns (spec, A, b)."""
    rng = np.random.default_rng([seed, n, 4])
    M = rng.normal(size=(n, n))
    A = np.round((M + M.T) / 2, 6)
    b = np.round(rng.normal(size=n), 6)
    xs = [f"x{i + 1}" for i in range(n)]
    terms = [f"0.5*{_num(A[i, j])}*{xs[i]}*{xs[j]}" for i in range(n) for j in range(n)]
    terms += [f"{_num(b[i])}*{xs[i]}" for i in range(n)]
    grads = [" + ".join(f"{_num(A[i, j])}*{xs[j]}" for j in range(n)) + f" + {_num(b[i])}"
             for i in range(n)]
    box = tuple((-1.0, 1.0) for _ in range(n))
    return FunctionSpec.from_sources(f"quad{seed}", " + ".join(terms), grads, n, box), A, b


def _monomials(n: int, deg: int):
    return [e for d in range(1, deg + 1) for e in itertools.product(range(d + 1), repeat=n)
            if sum(e) == d]


def _term(c: float, e) -> str:
    parts = [_num(c)] + [f"x{i + 1}^{k}" if k > 1 else f"x{i + 1}" for i, k in enumerate(e) if k]
    return "*".join(parts)


def polynomial_sources(seed: int):
    """Random polynomial of degree 2..4 in 1 or 2 variables, with exact gradient.

    Even seeds get a convexifying sum of x_i^2 and x_i^4 terms so the suite
    mixes convex and non-convex cases.
    """
    rng = np.random.default_rng([seed, 20])
    n = int(rng.integers(1, 3))
    deg = int(rng.integers(2, 5))
    terms = {}
    for e in _monomials(n, deg):
        if rng.random() < 0.6:
            terms[e] = float(np.round(rng.normal(), 3))
    if seed % 2 == 0:
        for i in range(n):
            for k, c in ((2, 2.0), (4, 1.0)):
                e = tuple(k if j == i else 0 for j in range(n))
                terms[e] = terms.get(e, 0.0) + c
    terms = {e: c for e, c in terms.items() if c != 0} or {tuple([2] + [0] * (n - 1)): 1.0}
    value = " + ".join(_term(c, e) for e, c in terms.items())
    grads = []
    for i in range(n):
        parts = []
        for e, c in terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                parts.append(_term(c * e[i], e2) if sum(e2) else _num(c * e[i]))
        grads.append(" + ".join(parts) or "0")
    return n, value, tuple(grads)


def polynomial(seed: int) -> FunctionSpec:
    n, value, grads = polynomial_sources(seed)
    return FunctionSpec.from_sources(f"poly{seed}", value, list(grads), n,
                                     tuple((-1.0, 1.0) for _ in range(n)))


def lipschitz_scalar(seed: int):
    """Random 1-D Lipschitz function: kinks plus a smooth part; returns (g, a, b)."""
    rng = np.random.default_rng([seed, 55])
    k = int(rng.integers(1, 4))
    w = rng.normal(size=k)
    c = rng.uniform(-1, 1, size=k)
    s, om = rng.normal(), rng.uniform(0.5, 4.0)
    a, b = np.sort(rng.uniform(-1.5, 1.5, size=2))
    if rng.random() < 0.3:
        b = -a if a < 0 else a + 1.0

    def values(Y):
        y = Y[:, 0]
        return (np.abs(y[:, None] - c[None, :]) @ w) + s * np.sin(om * y)

    def gradients(Y):
        y = Y[:, 0]
        d = (np.sign(y[:, None] - c[None, :]) @ w) + s * om * np.cos(om * y)
        return d[:, None]

    lip = float(np.abs(w).sum() + abs(s) * om)
    return ScalarFunction(values, gradients, 1, lip, f"lip{seed}"), float(a), float(b)
