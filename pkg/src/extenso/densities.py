"""Density catalog: scalar functions s on [0,1] and entropy evaluation.

A functional S(p) = sum_j s(p_j) is determined by its density s.  Densities
carry evaluators for s, s', s'' (vectorized: float or ndarray in, matching
shape out) plus regularity flags consumed by the verification layers.

Catalog kinds (also the JSON wire tokens): "bg", "tsallis", "remark2",
"remark5".  The latter two are integral-defined stress densities: remark2 has
curvature -r(|cos(1/r)|+r), whose curvature half-ratio blows up along
t_k = 1/((k+1/2)pi); remark5 integrates -log sin((pi/4) t), whose curvature
half-ratio stays pinned inside [2, 1+sqrt(2)].
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

from . import _kernels
from .simplex import SimplexVector

__all__ = [
    "Density",
    "EntropyFunctional",
    "DensityDomainError",
    "bg_density",
    "tsallis_density",
    "remark2_density",
    "remark5_density",
    "shifted_density",
    "entropy",
    "numeric_derivative_fallback",
    "density_from_spec",
    "canonical_grid",
]

QUARTER_PI = _kernels.QUARTER_PI


class DensityDomainError(ValueError):
    """Density evaluated outside its declared domain (e.g. s(0) undefined)."""


def _scalarize(out: np.ndarray):
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Density:
    """Scalar density with derivatives and regularity flags.

    eval_s covers [0,1]; eval_s1/eval_s2 cover (0,1] and may be None until
    filled by numeric_derivative_fallback.  Evaluators must be pure and
    reentrant; instances are immutable and safe to share across threads.
    """

    label: str
    eval_s: Callable
    eval_s1: Callable | None = None
    eval_s2: Callable | None = None
    s0_zero: bool = False
    s1_zero: bool = False
    concave: bool = False
    params: Mapping[str, float] = field(default_factory=dict)
    # extra t-values worth sampling in curvature-ratio scans (stress points)
    probe_points: tuple[float, ...] = ()


@dataclass(frozen=True)
class EntropyFunctional:
    density: Density

    def value(self, p: SimplexVector) -> float:
        return entropy(self, p)


def canonical_grid(n: int = 2048) -> np.ndarray:
    """The sampling grid {k/n : 1 <= k <= n} over (0, 1]."""
    return np.arange(1, n + 1, dtype=np.float64) / n


def entropy(F: EntropyFunctional, p: SimplexVector) -> float:
    """S(p) = sum_j s(p_j), compensated accumulation.

    Zero entries require the s0_zero flag (the s(0) = 0 convention).
    """
    d = F.density
    if not d.s0_zero and np.any(p.entries == 0.0):
        raise DensityDomainError(f"density {d.label!r} has no s(0) convention")
    vals = np.asarray(d.eval_s(p.entries), dtype=np.float64)
    return math.fsum(vals.tolist())


# ---------------------------------------------------------------------------
# closed-form catalog entries
# ---------------------------------------------------------------------------


def bg_density() -> Density:
    """s(r) = -r log r with s(0) = 0; s'(r) = -log r - 1; s''(r) = -1/r."""

    def eval_s(r):
        r = np.asarray(r, dtype=np.float64)
        safe = np.where(r > 0.0, r, 1.0)
        return _scalarize(np.where(r > 0.0, -safe * np.log(safe), 0.0))

    def eval_s1(r):
        r = np.asarray(r, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return _scalarize(-np.log(r) - 1.0)

    def eval_s2(r):
        r = np.asarray(r, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return _scalarize(-1.0 / r)

    return Density(
        label="bg",
        eval_s=eval_s,
        eval_s1=eval_s1,
        eval_s2=eval_s2,
        s0_zero=True,
        s1_zero=True,
        concave=True,
    )


def tsallis_density(q: float) -> Density:
    """Per-coordinate density s(r) = (r - r^q)/(q - 1), q > 0, q != 1.

    Summed over a probability vector this equals (1 - sum p_j^q)/(q - 1)
    because the entries sum to 1, and it satisfies s(0) = s(1) = 0.
    s''(r) = -q r^(q-2).
    """
    q = float(q)
    if not q > 0.0 or q == 1.0:
        raise ValueError(f"q must be > 0 and != 1, got {q!r}")

    def eval_s(r):
        r = np.asarray(r, dtype=np.float64)
        return _scalarize((r - r**q) / (q - 1.0))

    def eval_s1(r):
        r = np.asarray(r, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return _scalarize((1.0 - q * r ** (q - 1.0)) / (q - 1.0))

    def eval_s2(r):
        r = np.asarray(r, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return _scalarize(-q * r ** (q - 2.0))

    return Density(
        label=f"tsallis(q={q:g})",
        eval_s=eval_s,
        eval_s1=eval_s1,
        eval_s2=eval_s2,
        s0_zero=True,
        s1_zero=True,
        concave=True,
        params={"q": q},
    )


# ---------------------------------------------------------------------------
# remark5: s(r) = -int_0^r log sin((pi/4) t) dt + C r
# ---------------------------------------------------------------------------

_REMARK5_C: float | None = None


def _remark5_logsin_integral(r):
    """Integral over [0, r] of log sin((pi/4) t).

    Split off the exact log part: log sin(at) = log(at) + log(sin(at)/(at)),
    whose first term integrates to r log(a r) - r and whose second term is
    analytic on [0, 1] (the log-singularity treatment at 0).
    """
    r = np.asarray(r, dtype=np.float64)
    safe = np.where(r > 0.0, r, 1.0)
    exact = safe * np.log(QUARTER_PI * safe) - safe
    smooth = _kernels.logsinc_integral(safe)
    return np.where(r > 0.0, exact + smooth, 0.0)


def _remark5_constant() -> float:
    global _REMARK5_C
    if _REMARK5_C is None:
        _REMARK5_C = float(_remark5_logsin_integral(1.0))
    return _REMARK5_C


def remark5_density() -> Density:
    """Catalog density with curvature s''(r) = -(pi/4) cot((pi/4) r).

    s(0) = s(1) = 0 and s'(1) < 0; the curvature half-ratio s''(t/2)/s''(t)
    spans exactly [2, 1 + sqrt(2)] over t in (0, 1].
    """
    C = _remark5_constant()

    def eval_s(r):
        r = np.asarray(r, dtype=np.float64)
        return _scalarize(-_remark5_logsin_integral(r) + C * r)

    def eval_s1(r):
        r = np.asarray(r, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return _scalarize(-np.log(np.sin(QUARTER_PI * r)) + C)

    def eval_s2(r):
        r = np.asarray(r, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return _scalarize(-QUARTER_PI / np.tan(QUARTER_PI * r))

    return Density(
        label="remark5",
        eval_s=eval_s,
        eval_s1=eval_s1,
        eval_s2=eval_s2,
        s0_zero=True,
        s1_zero=True,
        concave=True,
    )


# ---------------------------------------------------------------------------
# remark2: s''(r) = -r(|cos(1/r)| + r); s', s by quadrature ladders
# ---------------------------------------------------------------------------

# Panel ladder: breakpoints 2/(j pi) are exactly the zeros (odd j) and extrema
# (even j) of cos(1/u), so |cos(1/u)| is smooth inside every panel.  The ladder
# stops where the breakpoints drop below 1e-6; the remaining tail obeys
# |integrand| <= u(1+u) and is folded in via the 2/pi mean of |cos|,
# an absolute error well under 1e-12.
_LADDER_CUTOFF = 1e-6
_MEAN_ABS_COS = 2.0 / math.pi
_REMARK2_TABLES: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None


def _remark2_tables() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(breaks, G_prefix, H_prefix) with G = int u|cos(1/u)|, H = int u^2|cos(1/u)|.

    breaks is ascending, ending at 1.0; prefix[i] holds the integral from 0 to
    breaks[i], panel integrals evaluated in chunks to bound memory.
    """
    global _REMARK2_TABLES
    if _REMARK2_TABLES is not None:
        return _REMARK2_TABLES
    j_max = int(math.floor(2.0 / (math.pi * _LADDER_CUTOFF)))
    j = np.arange(j_max, 0, -1, dtype=np.float64)
    breaks = np.concatenate([2.0 / (j * math.pi), [1.0]])
    lo, hi = breaks[:-1], breaks[1:]
    g_panels = np.empty(lo.size)
    h_panels = np.empty(lo.size)
    chunk = 200_000
    for start in range(0, lo.size, chunk):
        sl = slice(start, min(start + chunk, lo.size))
        g_panels[sl], h_panels[sl] = _kernels.osc_panel_moments(lo[sl], hi[sl])
    b0 = breaks[0]
    g_prefix = np.concatenate([[0.0], np.cumsum(g_panels)]) + _MEAN_ABS_COS * b0 * b0 / 2.0
    h_prefix = np.concatenate([[0.0], np.cumsum(h_panels)]) + _MEAN_ABS_COS * b0**3 / 3.0
    _REMARK2_TABLES = (breaks, g_prefix, h_prefix)
    return _REMARK2_TABLES


def _remark2_moments(r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """G(r), H(r) for array r in [0, 1]: ladder prefix plus a partial panel."""
    breaks, g_prefix, h_prefix = _remark2_tables()
    r = np.asarray(r, dtype=np.float64)
    flat = np.atleast_1d(r).ravel()
    G = np.empty(flat.shape)
    H = np.empty(flat.shape)
    below = flat < breaks[0]
    if below.any():
        rb = flat[below]
        G[below] = _MEAN_ABS_COS * rb * rb / 2.0
        H[below] = _MEAN_ABS_COS * rb**3 / 3.0
    above = ~below
    if above.any():
        ra = flat[above]
        idx = np.searchsorted(breaks, ra, side="right") - 1
        pg, ph = _kernels.osc_panel_moments(breaks[idx], ra)
        G[above] = g_prefix[idx] + pg
        H[above] = h_prefix[idx] + ph
    return G.reshape(np.shape(r)), H.reshape(np.shape(r))


def remark2_density() -> Density:
    """Catalog density with curvature s''(r) = -r(|cos(1/r)| + r).

    s' and s come from the panel-ladder quadrature of s'' (absolute error
    <= 1e-9; in practice ~1e-12), using s(r) = r s'(r) - int_0^r u s''(u) du.
    The curvature half-ratio grows without bound along t_k = 1/((k+1/2) pi),
    which the probe_points expose to extremum scans.
    """

    def eval_s2(r):
        r = np.asarray(r, dtype=np.float64)
        safe = np.where(r > 0.0, r, 1.0)
        return _scalarize(np.where(r > 0.0, -safe * (np.abs(np.cos(1.0 / safe)) + safe), 0.0))

    def eval_s1(r):
        r = np.asarray(r, dtype=np.float64)
        G, _ = _remark2_moments(r)
        return _scalarize(-(G + r**3 / 3.0))

    def eval_s(r):
        r = np.asarray(r, dtype=np.float64)
        G, H = _remark2_moments(r)
        s1 = -(G + r**3 / 3.0)
        M = -(H + r**4 / 4.0)
        return _scalarize(r * s1 - M)

    k = np.arange(1, 65, dtype=np.float64)
    probes = tuple((1.0 / ((k + 0.5) * math.pi)).tolist())

    return Density(
        label="remark2",
        eval_s=eval_s,
        eval_s1=eval_s1,
        eval_s2=eval_s2,
        s0_zero=True,
        s1_zero=False,
        concave=True,
        probe_points=probes,
    )


# ---------------------------------------------------------------------------
# combinators
# ---------------------------------------------------------------------------


def shifted_density(d: Density) -> Density:
    """r -> s(r) - s(1) r: kills the value at 1, keeps the curvature.

    Joint-minus-marginal entropy differences are invariant under this shift.
    """
    s1_val = float(np.asarray(d.eval_s(1.0), dtype=np.float64))

    def eval_s(r):
        r = np.asarray(r, dtype=np.float64)
        return _scalarize(np.asarray(d.eval_s(r)) - s1_val * r)

    eval_s1 = None
    if d.eval_s1 is not None:

        def eval_s1(r):  # noqa: F811 - conditional definition
            return _scalarize(np.asarray(d.eval_s1(r)) - s1_val)

    return Density(
        label=f"shifted({d.label})",
        eval_s=eval_s,
        eval_s1=eval_s1,
        eval_s2=d.eval_s2,
        s0_zero=d.s0_zero,
        s1_zero=True,
        concave=d.concave,
        params=dict(d.params, shift=s1_val),
        probe_points=d.probe_points,
    )


def numeric_derivative_fallback(d: Density) -> Density:
    """Fill missing eval_s1/eval_s2 by finite differences of eval_s.

    First derivatives use the h = max(1e-6, 1e-6 r) step; second derivatives
    use a wider ~eps^(1/4) step, below which float64 cancellation would
    swamp the estimate.  Stencils go one-sided near r = 1.
    """
    s = d.eval_s

    def _h1(r):
        return np.maximum(1e-6, 1e-6 * r)

    def eval_s1(r):
        r = np.asarray(r, dtype=np.float64)
        h = _h1(r)
        centered = (np.asarray(s(r + h)) - np.asarray(s(r - h))) / (2.0 * h)
        backward = (3.0 * np.asarray(s(r)) - 4.0 * np.asarray(s(r - h)) + np.asarray(s(r - 2 * h))) / (2.0 * h)
        return _scalarize(np.where(r + h > 1.0, backward, centered))

    def eval_s2(r):
        r = np.asarray(r, dtype=np.float64)
        h = np.maximum(1.2e-4, 1.2e-4 * r)
        sr = np.asarray(s(r))
        centered = (np.asarray(s(r + h)) - 2.0 * sr + np.asarray(s(r - h))) / (h * h)
        backward = (
            2.0 * sr
            - 5.0 * np.asarray(s(r - h))
            + 4.0 * np.asarray(s(r - 2 * h))
            - np.asarray(s(r - 3 * h))
        ) / (h * h)
        return _scalarize(np.where(r + h > 1.0, backward, centered))

    return replace(
        d,
        eval_s1=d.eval_s1 if d.eval_s1 is not None else eval_s1,
        eval_s2=d.eval_s2 if d.eval_s2 is not None else eval_s2,
    )


# ---------------------------------------------------------------------------
# JSON density specs: {"kind": "...", "params": {...}}
# ---------------------------------------------------------------------------

_CATALOG = {
    "bg": lambda params: bg_density(),
    "tsallis": lambda params: tsallis_density(params["q"]),
    "remark2": lambda params: remark2_density(),
    "remark5": lambda params: remark5_density(),
}


def density_from_spec(spec: str | Mapping) -> Density:
    """Resolve a density spec (JSON text or mapping) to a catalog density."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    kind = spec.get("kind")
    if kind not in _CATALOG:
        raise ValueError(f"unknown density kind {kind!r}; expected one of {sorted(_CATALOG)}")
    params = spec.get("params", {}) or {}
    try:
        return _CATALOG[kind](params)
    except KeyError as e:
        raise ValueError(f"density kind {kind!r} missing parameter {e}") from e
