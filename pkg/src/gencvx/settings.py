"""Numerical tolerances and sampling defaults shared by the analysis modules."""

from __future__ import annotations

from dataclasses import dataclass, field, replace


def geometric_radii(r0: float, count: int) -> tuple[float, ...]:
    return tuple(r0 * 2.0 ** (-k) for k in range(count))


@dataclass(frozen=True)
class Tolerances:
    # relative floor for strict inequalities; scaled by (1 + |u| * hull scale)
    eps_strict: float = 1e-7
    # relative cluster merge factor: eps_cluster = factor * r_min * L
    cluster_factor: float = 10.0
    eps_memb: float = 1e-6
    eps_set: float = 1e-2
    eps_crit: float = 1e-8
    eps_orth: float = 1e-9
    eps_sep: float = 1e-6
    eps_fermat: float = 1e-5
    # ties in the strict oracles; see segment tests
    eps_tie: float = 1e-12
    quad_tol: float = 1e-10

    def with_overrides(self, **kw) -> "Tolerances":
        bad = {k: v for k, v in kw.items() if v is not None and not v > 0}
        if bad:
            raise ValueError(f"tolerance overrides must be positive: {bad}")
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


@dataclass(frozen=True)
class SamplingConfig:
    radii: tuple[float, ...] = field(default_factory=lambda: geometric_radii(0.1, 17))
    # sphere radii for the Frechet liminf quotients
    membership_radii: tuple[float, ...] = field(default_factory=lambda: geometric_radii(0.1, 17))
    samples_per_dim: int = 64
    sphere_dirs_per_dim: int = 64
    candidate_grid: int = 101


DEFAULT_TOLERANCES = Tolerances()
DEFAULT_SAMPLING = SamplingConfig()
