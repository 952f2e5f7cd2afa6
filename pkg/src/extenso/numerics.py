"""Shared numerical kernels: quadrature, finite differences, 1-d extrema.

The extremum scanner works on (0, 1] truncated at a configurable t_min.  Grid
minima overestimate the true infimum and grid maxima underestimate the true
supremum; consumers receive est_error and must apply it as slack, which keeps
one-sided-error reasoning sound.  Limit behavior toward 0 is probed on a
geometric ladder (plus caller-declared points) and only reported as a trend,
never asserted as an attained extremum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NoConvergenceError",
    "OptResult",
    "adaptive_quadrature",
    "midpoint_richardson",
    "finite_difference",
    "global_extremum",
    "scan_extrema",
    "scan_to_csv",
]


class NoConvergenceError(ArithmeticError):
    """Quadrature hit its depth cap; carries the partial estimate."""

    def __init__(self, message: str, partial: float):
        super().__init__(message)
        self.partial = partial


def _finite(x: float) -> bool:
    return math.isfinite(x)


# ---------------------------------------------------------------------------
# adaptive Simpson with singular-endpoint shells
# ---------------------------------------------------------------------------


def _simpson(fa: float, fm: float, fb: float, width: float) -> float:
    return width * (fa + 4.0 * fm + fb) / 6.0


def _adaptive_core(g, a: float, b: float, abs_tol: float, max_depth: int) -> float:
    """Classic adaptive Simpson on a finite integrand; iterative stack."""
    m = 0.5 * (a + b)
    fa, fm, fb = float(g(a)), float(g(m)), float(g(b))
    for x, fx in ((a, fa), (m, fm), (b, fb)):
        if not _finite(fx):
            raise ValueError(f"integrand non-finite at x={x!r}")
    whole = _simpson(fa, fm, fb, b - a)
    stack = [(a, m, b, fa, fm, fb, whole, abs_tol, 0)]
    total = 0.0
    while stack:
        a0, m0, b0, f0, f1, f2, s0, tol, depth = stack.pop()
        lm = 0.5 * (a0 + m0)
        rm = 0.5 * (m0 + b0)
        flm, frm = float(g(lm)), float(g(rm))
        if not (_finite(flm) and _finite(frm)):
            bad = lm if not _finite(flm) else rm
            raise ValueError(f"integrand non-finite at x={bad!r}")
        left = _simpson(f0, flm, f1, m0 - a0)
        right = _simpson(f1, frm, f2, b0 - m0)
        err = left + right - s0
        if abs(err) <= 15.0 * tol or (b0 - a0) <= 1e-15 * (abs(a0) + abs(b0) + 1.0):
            total += left + right + err / 15.0
            continue
        if depth >= max_depth:
            partial = total + left + right + err / 15.0
            partial += math.fsum(item[6] for item in stack)
            raise NoConvergenceError(
                f"adaptive Simpson exceeded depth {max_depth} on [{a0!r}, {b0!r}]",
                partial=partial,
            )
        stack.append((a0, lm, m0, f0, flm, f1, left, tol / 2.0, depth + 1))
        stack.append((m0, rm, b0, f1, frm, f2, right, tol / 2.0, depth + 1))
    return total


def _shells(g, a: float, b: float, abs_tol: float, max_depth: int, singular_left: bool) -> float:
    """Geometric approach to one singular endpoint; integrable singularities only.

    Shell k covers offsets [width 2^-(k+1), width 2^-k] from the singular end.
    Stops when a shell's contribution falls below the tolerance or the shell
    edge reaches float resolution at the endpoint; the remaining tail is
    extrapolated from the observed geometric shell ratio.
    """
    width = b - a
    if singular_left:
        seg = lambda lo, hi: (a + lo, a + hi)
        edge = a
    else:
        seg = lambda lo, hi: (b - hi, b - lo)
        edge = b
    granularity = 8.0 * np.finfo(np.float64).eps * max(1.0, abs(edge))
    lo_off, hi_off = 0.5 * width, width
    x0, x1 = seg(lo_off, hi_off)
    total = _adaptive_core(g, x0, x1, abs_tol / 4.0, max_depth)
    prev = math.inf
    rho = 0.5
    max_shells = 400
    for k in range(1, max_shells + 1):
        hi_off = lo_off
        lo_off = 0.5 * lo_off
        if lo_off <= granularity:
            # the rest of the approach is below float resolution: the tail
            # from the current shell onward is prev * (rho + rho^2 + ...)
            last = prev if math.isfinite(prev) else 0.0
            return total + last * rho / (1.0 - rho)
        x0, x1 = seg(lo_off, hi_off)
        tol_k = max(abs_tol * 2.0 ** (-k - 2), 1e-18)
        piece = _adaptive_core(g, x0, x1, tol_k, max_depth)
        total += piece
        if math.isfinite(prev) and prev != 0.0:
            ratio = piece / prev
            if 0.0 < ratio < 0.95:
                rho = ratio
        if k >= 4 and abs(piece) <= abs_tol / 8.0:
            return total + piece * rho / (1.0 - rho)
        prev = piece
    raise NoConvergenceError(
        f"singular-endpoint shells did not contract after {max_shells} levels",
        partial=total,
    )


def adaptive_quadrature(g, a: float, b: float, abs_tol: float = 1e-10, max_depth: int = 60) -> float:
    """Integral of g over [a, b] to absolute tolerance abs_tol.

    Non-finite values at an endpoint trigger a geometric-shell split toward
    that endpoint, which converges for integrable singularities (log, inverse
    square root, ...).  Raises NoConvergenceError (with .partial) if the depth
    cap or shell budget is exhausted.
    """
    if not abs_tol > 0.0:
        raise ValueError("abs_tol must be > 0")
    a = float(a)
    b = float(b)
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_quadrature(g, b, a, abs_tol, max_depth)
    fa, fb = float(g(a)), float(g(b))
    sing_a, sing_b = not _finite(fa), not _finite(fb)
    if sing_a and sing_b:
        m = 0.5 * (a + b)
        left = _shells(g, a, m, abs_tol / 2.0, max_depth, singular_left=True)
        right = _shells(g, m, b, abs_tol / 2.0, max_depth, singular_left=False)
        return left + right
    if sing_a:
        return _shells(g, a, b, abs_tol, max_depth, singular_left=True)
    if sing_b:
        return _shells(g, a, b, abs_tol, max_depth, singular_left=False)
    return _adaptive_core(g, a, b, abs_tol, max_depth)


# ---------------------------------------------------------------------------
# composite midpoint with Richardson extrapolation (independent second rule)
# ---------------------------------------------------------------------------


def _eval_vectorized(g, xs: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(g(xs), dtype=np.float64)
        if vals.shape == xs.shape:
            return vals
    except Exception:
        pass
    return np.array([float(g(x)) for x in xs], dtype=np.float64)


def midpoint_richardson(
    g, a: float, b: float, abs_tol: float = 1e-10, max_level: int = 16, n0: int = 8
) -> float:
    """Composite midpoint rule refined by halving plus a Richardson table.

    Never evaluates the endpoints, so it tolerates endpoint singularities.
    The table assumes an error series in all powers of h (factors 2^j):
    integrable endpoint singularities contribute odd powers that the usual
    h^2-only table cannot cancel, while for smooth integrands the odd
    coefficients vanish and the extra columns are harmless.
    """
    if not abs_tol > 0.0:
        raise ValueError("abs_tol must be > 0")
    a = float(a)
    b = float(b)
    if a == b:
        return 0.0
    rows: list[list[float]] = []
    for level in range(max_level + 1):
        n = n0 * 2**level
        h = (b - a) / n
        xs = a + (np.arange(n) + 0.5) * h
        m = float(h * math.fsum(_eval_vectorized(g, xs).tolist()))
        row = [m]
        if rows:
            prev = rows[-1]
            for j in range(1, len(prev) + 1):
                factor = 2.0**j
                row.append((factor * row[j - 1] - prev[j - 1]) / (factor - 1.0))
        rows.append(row)
        if level >= 2 and abs(row[-1] - rows[-2][-1]) <= abs_tol:
            return row[-1]
    raise NoConvergenceError(
        f"midpoint/Richardson did not reach {abs_tol} after {max_level} levels",
        partial=rows[-1][-1],
    )


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------


def finite_difference(
    g,
    r: float,
    order: int,
    h_step: float | None = None,
    domain: tuple[float, float] = (0.0, 1.0),
) -> float:
    """Centered O(h^2) stencil for g' or g''; one-sided when the stencil
    would leave the domain.

    Default steps balance truncation against float64 cancellation:
    ~eps^(1/3) for first derivatives, ~eps^(1/4) for second.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    lo, hi = domain
    if not lo < r < hi:
        raise ValueError(f"r={r!r} not interior to {domain}")
    if h_step is None:
        h_step = 6e-6 if order == 1 else 1.2e-4
    h = float(h_step)
    # exact representable step
    h = (r + h) - r

    if r + h <= hi and r - (3 * h if order == 2 else h) >= lo:
        if order == 1:
            return (g(r + h) - g(r - h)) / (2.0 * h)
        return (g(r + h) - 2.0 * g(r) + g(r - h)) / (h * h)

    if r + h > hi:  # backward stencils, still O(h^2)
        if order == 1:
            return (3.0 * g(r) - 4.0 * g(r - h) + g(r - 2 * h)) / (2.0 * h)
        return (2.0 * g(r) - 5.0 * g(r - h) + 4.0 * g(r - 2 * h) - g(r - 3 * h)) / (h * h)

    # forward stencils near the lower edge
    if order == 1:
        return (-3.0 * g(r) + 4.0 * g(r + h) - g(r + 2 * h)) / (2.0 * h)
    return (2.0 * g(r) - 5.0 * g(r + h) + 4.0 * g(r + 2 * h) - g(r + 3 * h)) / (h * h)


# ---------------------------------------------------------------------------
# global extrema on (0, 1]
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptResult:
    """Result of a 1-d extremum scan.

    est_error is the neighbor-cell value gap at the winning grid cell: the
    scan's resolution, to be applied as slack by consumers.  diverging is set
    when a probe family trends away without slowing, or a value breaches the
    caller's magnitude threshold; attainment toward t=0 is never asserted.
    """

    value: float
    arg: float
    grid_points: int
    refined: bool
    est_error: float
    diverging: bool = False
    probe_trend: str = "none"
    probe_max: float = math.nan
    offending_t: float | None = None


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, a: float, b: float, iters: int = 48) -> tuple[float, float]:
    """Golden-section minimizer on [a, b]; returns (arg, value)."""
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    best_x, best_f = (x1, f1) if f1 <= f2 else (x2, f2)
    for _ in range(iters):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        if f1 < best_f:
            best_x, best_f = x1, f1
        if f2 < best_f:
            best_x, best_f = x2, f2
        if b - a <= 1e-14 * (abs(a) + abs(b)):
            break
    return best_x, best_f


def _trend_label(values: np.ndarray, mode: str, window: int = 8) -> str:
    """Trend of h along a probe family ordered by decreasing t.

    'diverging' means the last `window` values move monotonically in the
    unbounded direction for the given mode and the move has not slowed below
    5% of scale: the limit-style growth a fixed grid would miss.
    """
    v = values[np.isfinite(values)]
    if v.size < window + 1:
        return "short"
    w = v[-window:]
    d = np.diff(w)
    span = abs(w[-1] - w[0])
    threshold = max(1e-9, 0.05 * abs(w[0]))
    if np.all(d > 0):
        if mode == "sup" and span > threshold:
            return "diverging"
        return "increasing"
    if np.all(d < 0):
        # a positive decreasing sequence is bounded below; only a genuinely
        # negative-heading tail counts as divergence for the infimum
        if mode == "inf" and span > threshold and w[-1] < 0:
            return "diverging"
        return "decreasing"
    if np.all(np.abs(d) <= 1e-12 * (1.0 + np.abs(w[:-1]))):
        return "flat"
    return "mixed"


def scan_extrema(
    h,
    t_min: float = 1e-6,
    grid_n: int = 2048,
    probe_points: tuple[float, ...] = (),
    geometric_k: int = 40,
    refine: bool = True,
) -> tuple[OptResult, OptResult]:
    """One grid scan of h over [t_min, 1] yielding both inf and sup results.

    Log-spaced coarse grid, golden-section refinement in the bracketing cell,
    then limit diagnostics on a geometric ladder t = 2^-k (k <= geometric_k)
    and on any caller-declared probe points, each family judged separately.
    """
    if grid_n < 256:
        raise ValueError("grid_n must be >= 256")
    if not 0.0 < t_min < 1.0:
        raise ValueError("t_min must lie in (0, 1)")
    ts = np.geomspace(t_min, 1.0, grid_n)
    ts[0], ts[-1] = t_min, 1.0
    vs = _eval_vectorized(h, ts)

    offending = None
    finite = np.isfinite(vs)
    if not finite.all():
        offending = float(ts[~finite][0])

    # probe families: geometric ladder toward 0, then declared points
    families: list[np.ndarray] = []
    if geometric_k > 0:
        families.append(2.0 ** -np.arange(1, geometric_k + 1, dtype=np.float64))
    if len(probe_points):
        pts = np.sort(np.asarray(probe_points, dtype=np.float64))[::-1]
        families.append(pts[pts > 0.0])
    probe_vals = [_eval_vectorized(h, fam) for fam in families]
    probe_max = math.nan
    if probe_vals:
        allv = np.concatenate(probe_vals)
        allv = allv[np.isfinite(allv)]
        if allv.size:
            probe_max = float(allv.max())

    results = []
    for mode in ("inf", "sup"):
        sign = 1.0 if mode == "inf" else -1.0
        work = np.where(finite, sign * vs, np.inf)
        i = int(np.argmin(work))
        value = float(vs[i])
        arg = float(ts[i])
        gaps = []
        if i > 0 and finite[i - 1]:
            gaps.append(abs(vs[i] - vs[i - 1]))
        if i + 1 < grid_n and finite[i + 1]:
            gaps.append(abs(vs[i] - vs[i + 1]))
        est_error = float(max(gaps)) if gaps else math.inf

        refined_flag = False
        if refine:
            lo = ts[max(i - 1, 0)]
            hi = ts[min(i + 1, grid_n - 1)]
            gx, gv = _golden_min(lambda t: sign * float(h(t)), float(lo), float(hi))
            if gv < sign * value:
                value = float(sign * gv)
                arg = float(gx)
            # the t_min edge is an artificial truncation: the true extremum
            # may sit below it, so refinement there is not trusted
            refined_flag = i > 0

        trends = [_trend_label(pv, mode) for pv in probe_vals]
        diverging = "diverging" in trends
        if offending is not None:
            inf_dir = np.isposinf(vs[~finite]).any() if mode == "sup" else np.isneginf(vs[~finite]).any()
            diverging = diverging or bool(inf_dir)
        trend = "none"
        if trends:
            trend = "diverging" if diverging else trends[0]

        results.append(
            OptResult(
                value=value,
                arg=arg,
                grid_points=grid_n,
                refined=refined_flag,
                est_error=est_error,
                diverging=diverging,
                probe_trend=trend,
                probe_max=probe_max,
                offending_t=offending,
            )
        )
    return results[0], results[1]


def global_extremum(
    h,
    mode: str,
    t_min: float = 1e-6,
    grid_n: int = 2048,
    probe_points: tuple[float, ...] = (),
    geometric_k: int = 40,
    refine: bool = True,
) -> OptResult:
    """Infimum or supremum estimate of h over (0, 1] truncated at t_min."""
    if mode not in ("inf", "sup"):
        raise ValueError("mode must be 'inf' or 'sup'")
    lo, hi = scan_extrema(h, t_min, grid_n, probe_points, geometric_k, refine)
    return lo if mode == "inf" else hi


def scan_to_csv(ts: np.ndarray, values: np.ndarray) -> str:
    """Grid dump as CSV with columns (t, h)."""
    lines = ["t,h"]
    for t, v in zip(np.asarray(ts), np.asarray(values)):
        lines.append(f"{float(t)!r},{float(v)!r}")
    return "\n".join(lines) + "\n"
