"""Curvature-ratio coefficient bounds, the phi correspondence, and theta.

For a density with negative curvature, the coefficient envelope at r is
r^2 times the inf/sup over t in (0,1] of s''(rt)/s''(t).  The scan truncates
at t_min and carries one-sided grid error; divergence (ratios growing without
bound toward 0) is evidenced via probe trends and a magnitude threshold, not
proved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .densities import Density, canonical_grid
from .numerics import OptResult, scan_extrema

__all__ = [
    "BoundsConfig",
    "CoefficientBounds",
    "PhiFunction",
    "ThetaConfig",
    "coefficient_bounds",
    "phi_from_density",
    "theta_phi",
    "bounds_to_csv",
]


@dataclass(frozen=True)
class BoundsConfig:
    t_min: float = 1e-6
    grid_n: int = 2048
    refine: bool = True
    geometric_k: int = 40
    divergence_threshold: float = 1e12


@dataclass(frozen=True)
class CoefficientBounds:
    """Envelope (lower, upper) = r^2 (inf, sup) of the curvature ratio at r.

    lower/upper carry the scan metadata; est_error lives there on the ratio
    scale, so the f-scale slack is r^2 * meta.est_error.
    """

    r: float
    lower: float
    upper: float
    lower_meta: OptResult
    upper_meta: OptResult
    divergent: bool


def coefficient_bounds(d: Density, r: float, cfg: BoundsConfig | None = None) -> CoefficientBounds:
    """Scan t -> s''(r t)/s''(t) over (0, 1] and scale by r^2.

    Requires the concave flag (negative curvature keeps the ratio positive
    and the envelope meaningful).  divergent is set when any probe breaches
    the magnitude threshold or a probe family trends away without slowing.
    """
    cfg = cfg or BoundsConfig()
    if not d.concave:
        raise ValueError(f"density {d.label!r} lacks the concave flag")
    if d.eval_s2 is None:
        raise ValueError(f"density {d.label!r} has no curvature evaluator")
    if not 0.0 < r <= 1.0 + 1e-12:
        raise ValueError(f"r must lie in (0, 1], got {r!r}")
    r = min(float(r), 1.0)  # marginals carry float dust one ulp above 1
    s2 = d.eval_s2

    def ratio(t):
        t = np.asarray(t, dtype=np.float64)
        return np.asarray(s2(r * t)) / np.asarray(s2(t))

    inf_res, sup_res = scan_extrema(
        ratio,
        t_min=cfg.t_min,
        grid_n=cfg.grid_n,
        probe_points=d.probe_points,
        geometric_k=cfg.geometric_k,
        refine=cfg.refine,
    )
    divergent = inf_res.diverging or sup_res.diverging
    if math.isfinite(sup_res.probe_max) and abs(sup_res.probe_max) > cfg.divergence_threshold:
        divergent = True
    return CoefficientBounds(
        r=float(r),
        lower=r * r * inf_res.value,
        upper=r * r * sup_res.value,
        lower_meta=inf_res,
        upper_meta=sup_res,
        divergent=divergent,
    )


def bounds_to_csv(rows: list[CoefficientBounds]) -> str:
    lines = ["r,lower,upper,arg_inf,arg_sup,divergent"]
    for b in rows:
        lines.append(
            f"{b.r!r},{b.lower!r},{b.upper!r},"
            f"{b.lower_meta.arg!r},{b.upper_meta.arg!r},{int(b.divergent)}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# phi = -1/s'' and the growth index theta
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiFunction:
    """Positive nondecreasing deformation profile on (0, inf).

    Given by -1/s'' on (0, 1] and continued linearly (continuous, with the
    one-sided slope at 1) beyond 1.
    """

    eval_phi: Callable
    label: str
    domain_note: str = "-1/s'' on (0,1]; linear continuation beyond 1"


def phi_from_density(d: Density) -> PhiFunction:
    """Deformation profile phi = -1/s''; rejects curvature that is not
    negative or a profile that fails to be nondecreasing on the sample grid."""
    if d.eval_s2 is None:
        raise ValueError(f"density {d.label!r} has no curvature evaluator")
    s2 = d.eval_s2
    grid = canonical_grid()
    vals = np.asarray(s2(grid), dtype=np.float64)
    if not np.all(vals < 0.0):
        t_bad = float(grid[np.argmax(vals >= 0.0)])
        raise ValueError(f"s'' >= 0 at t={t_bad}; phi undefined")

    phi_at_1 = float(-1.0 / np.asarray(s2(1.0)))
    h = 1e-5
    # one-sided O(h^2) slope of phi at 1 for the linear continuation
    p0 = phi_at_1
    p1 = float(-1.0 / np.asarray(s2(1.0 - h)))
    p2 = float(-1.0 / np.asarray(s2(1.0 - 2 * h)))
    slope = (3.0 * p0 - 4.0 * p1 + p2) / (2.0 * h)

    def eval_phi(r):
        r = np.asarray(r, dtype=np.float64)
        inner = -1.0 / np.asarray(s2(np.minimum(r, 1.0)))
        outer = phi_at_1 + slope * (r - 1.0)
        out = np.where(r <= 1.0, inner, outer)
        return float(out) if out.ndim == 0 else out

    sample = np.concatenate([grid, 1.0 + np.linspace(0.01, 9.0, 64)])
    pv = eval_phi(sample)
    if not np.all(pv > 0.0):
        raise ValueError("phi not positive on the sample grid")
    if np.any(np.diff(pv) < -1e-10):
        raise ValueError("phi not nondecreasing on the sample grid")
    return PhiFunction(eval_phi=eval_phi, label=f"phi[{d.label}]")


@dataclass(frozen=True)
class ThetaConfig:
    r_min: float = 1e-4
    r_max: float = 1e4
    grid_n: int = 2001  # odd count keeps r = 1 exactly on the log grid
    eps_seq: tuple[float, ...] = (1e-4, 1e-5, 1e-6)  # steps relative to r


def theta_phi(phi: PhiFunction, cfg: ThetaConfig | None = None) -> float:
    """Growth index: sup over r of (r/phi(r)) times the upper forward
    difference quotient of phi, the quotient maximized over an eps-ladder
    of steps eps*r (equals r phi'/phi for differentiable phi).

    Steps must scale with r: an absolute step is not small against the low
    end of the r grid and would inflate the quotient for convex profiles.
    Returns math.inf on overflow or non-finite quotients.
    """
    cfg = cfg or ThetaConfig()
    rs = np.geomspace(cfg.r_min, cfg.r_max, cfg.grid_n)
    base = np.asarray(phi.eval_phi(rs), dtype=np.float64)
    if not np.all(base > 0.0):
        return math.inf
    best = np.full(rs.shape, -np.inf)
    for eps in cfg.eps_seq:
        shifted = rs * (1.0 + eps)
        h_eff = shifted - rs  # exactly representable step
        quot = (np.asarray(phi.eval_phi(shifted)) - base) / h_eff
        best = np.maximum(best, quot)
    theta = (rs / base) * best
    if not np.all(np.isfinite(theta)):
        return math.inf
    return float(theta.max())
