"""Extensivity residuals, the two-sided sandwich verifier, power-law
coefficient recovery, and the axiom property suite.

The residual measures how far a coefficient function f is from satisfying the
chain rule S(joint) = S(marginal) + sum_j f(p_j) S(conditional_j).  The
sandwich verifier checks the curvature-ratio envelope against the measured
joint-minus-marginal difference, widening the verdict by the scan's one-sided
grid error so a pass stays sound.  Coefficient recovery probes whether the
chain rule can hold for any f at all: consistency of the candidate
f(r; x) = r^2 s''(rx)/s''(x) across base points x forces a power law, whose
exponent and closed-form reconstruction are then reported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bounds import BoundsConfig, CoefficientBounds, coefficient_bounds
from .densities import Density, EntropyFunctional, entropy
from .simplex import JointMatrix, SimplexVector, conditional, marginal, uniform_vector

__all__ = [
    "SandwichReport",
    "PowerRecovery",
    "Reconstruction",
    "RecoveryConfig",
    "AxiomReport",
    "extensivity_residual",
    "sandwich_check",
    "iff_lhs",
    "recover_f",
    "check_twice_equation",
    "three_by_two_family",
    "iff_counterexample_matrix",
    "axiom_suite",
    "monotonicity_check",
    "power_coefficient",
    "batch_report",
]


def power_coefficient(q: float) -> Callable[[float], float]:
    """The coefficient function f(r) = r^q on (0, 1]."""
    q = float(q)

    def f(r: float) -> float:
        return float(r) ** q

    return f


def _matrix_entropy(F: EntropyFunctional, P: JointMatrix) -> float:
    # the flattened grid is itself a point of the mn-simplex
    return entropy(F, SimplexVector(P.entries.ravel()))


def extensivity_residual(F: EntropyFunctional, P: JointMatrix, f: Callable[[float], float]) -> float:
    """S(P) - S(marginal) - sum_j f(p_j) S(conditional_j).

    Zero within float noise iff f is the density's matching coefficient
    function; the value itself is the defect otherwise.
    """
    p = marginal(P)
    pieces = [_matrix_entropy(F, P), -entropy(F, p)]
    for j in range(1, P.n + 1):
        pieces.append(-f(float(p.entries[j - 1])) * entropy(F, conditional(P, j)))
    return math.fsum(pieces)


# ---------------------------------------------------------------------------
# sandwich verifier
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SandwichReport:
    """Two-sided envelope check for one joint matrix.

    verdict is 'pass' iff both slacks clear -tolerance, 'divergent' when any
    column's coefficient bounds are flagged divergent (check skipped).
    """

    diff: float
    lower: float
    upper: float
    slack_lower: float
    slack_upper: float
    tolerance: float
    verdict: str
    divergent: bool

    def to_dict(self) -> dict:
        return {
            "diff": self.diff,
            "lower": self.lower,
            "upper": self.upper,
            "slack_lower": self.slack_lower,
            "slack_upper": self.slack_upper,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "divergent": self.divergent,
        }


def _require_sandwich_flags(d: Density) -> None:
    missing = [
        name
        for name, ok in (("s0_zero", d.s0_zero), ("s1_zero", d.s1_zero), ("concave", d.concave))
        if not ok
    ]
    if missing:
        raise ValueError(f"density {d.label!r} lacks flags required here: {missing}")


def _sandwich_core(
    F: EntropyFunctional, P: JointMatrix, cfg: BoundsConfig | None
) -> tuple[float, float, float, bool, float]:
    """(lower, upper, tolerance, divergent, s1_at_1) for the envelope sums."""
    d = F.density
    _require_sandwich_flags(d)
    p = marginal(P)
    s1_at_1 = float(np.asarray(d.eval_s1(1.0)))
    cond_entropies = [entropy(F, conditional(P, j)) for j in range(1, P.n + 1)]
    per_col: list[CoefficientBounds] = [
        coefficient_bounds(d, float(pj), cfg) for pj in p.entries
    ]
    divergent = any(cb.divergent for cb in per_col)

    lower_terms = []
    upper_terms = []
    gap_terms = []
    tol_terms = [1e-9]
    for cb, Sj in zip(per_col, cond_entropies):
        lower_terms.append(cb.lower * Sj)
        upper_terms.append(cb.upper * Sj)
        gap_terms.append(cb.upper - cb.lower)
        # one-sided grid errors, propagated linearly on the f scale
        err = cb.r * cb.r * (cb.lower_meta.est_error + cb.upper_meta.est_error)
        tol_terms.append(err * (abs(Sj) + abs(s1_at_1)))
    gap = math.fsum(gap_terms)
    lower = math.fsum(lower_terms) + s1_at_1 * gap
    upper = math.fsum(upper_terms) - s1_at_1 * gap
    return lower, upper, math.fsum(tol_terms), divergent, s1_at_1


def sandwich_check(
    F: EntropyFunctional,
    P: JointMatrix,
    cfg: BoundsConfig | None = None,
    tolerance: float | None = None,
) -> SandwichReport:
    """Verify lower <= S(P) - S(marginal) <= upper within propagated slack.

    Requires s(0) = 0, s(1) = 0 and negative curvature (the envelope's
    hypotheses).  An explicit tolerance overrides the propagated one.
    """
    lower, upper, auto_tol, divergent, _ = _sandwich_core(F, P, cfg)
    tol = auto_tol if tolerance is None else float(tolerance)
    diff = _matrix_entropy(F, P) - entropy(F, marginal(P))
    slack_lower = diff - lower
    slack_upper = upper - diff
    if divergent:
        verdict = "divergent"
    elif slack_lower >= -tol and slack_upper >= -tol:
        verdict = "pass"
    else:
        verdict = "fail"
    return SandwichReport(
        diff=diff,
        lower=lower,
        upper=upper,
        slack_lower=slack_lower,
        slack_upper=slack_upper,
        tolerance=tol,
        verdict=verdict,
        divergent=divergent,
    )


def iff_lhs(F: EntropyFunctional, P: JointMatrix, cfg: BoundsConfig | None = None) -> float:
    """The envelope's lower line: sum_j lower_j S_j + s'(1) sum_j (upper_j - lower_j).

    The two-sided estimate only sharpens the trivial monotonicity bound when
    this is nonnegative; it can go negative (see iff_counterexample_matrix).
    """
    lower, _, _, _, _ = _sandwich_core(F, P, cfg)
    return lower


def iff_counterexample_matrix(x: float) -> JointMatrix:
    """The 2x2 family (column 1 fixed at (1/2, 0), column 2 = (x, 1-x)/2).

    As x drops to 0 the envelope's lower line tends to s'(1)(sqrt(2)-1)/2,
    which is negative for the remark5 density.
    """
    if not 0.0 < x < 1.0:
        raise ValueError(f"x must lie in (0, 1), got {x!r}")
    return JointMatrix([[0.5, 0.5 * x], [0.0, 0.5 * (1.0 - x)]])


# ---------------------------------------------------------------------------
# power-law coefficient recovery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecoveryConfig:
    r_grid: tuple[float, ...] = tuple(np.linspace(0.1, 0.9, 17).tolist())
    x_probes: tuple[float, ...] = (0.125, 0.25, 0.375, 0.5)
    consistency_tol: float = 1e-4
    multiplicativity_tol: float = 1e-6
    q_one_window: float = 1e-3
    recon_grid_n: int = 256


@dataclass(frozen=True)
class Reconstruction:
    """Closed-form density rebuilt from (q, s(1), s'(1), s''(1)).

    branch 'log' is the q = 1 form k r log r + a r + b; branch 'power' is
    k (r^q - r)/(q - 1) + a r + b.  max_abs_err compares against eval_s on
    the recovery grid.
    """

    k_q: float
    a_q: float
    b_q: float
    branch: str
    max_abs_err: float


@dataclass(frozen=True)
class PowerRecovery:
    q_est: float
    consistency: float
    multiplicativity_defect: float
    verdict: str
    reconstruction: Reconstruction | None

    def to_dict(self) -> dict:
        out = {
            "q_est": self.q_est,
            "consistency": self.consistency,
            "multiplicativity_defect": self.multiplicativity_defect,
            "verdict": self.verdict,
        }
        if self.reconstruction is not None:
            out["reconstruction"] = {
                "k_q": self.reconstruction.k_q,
                "a_q": self.reconstruction.a_q,
                "b_q": self.reconstruction.b_q,
                "branch": self.reconstruction.branch,
                "max_abs_err": self.reconstruction.max_abs_err,
            }
        return out


def recover_f(d: Density, cfg: RecoveryConfig | None = None) -> PowerRecovery:
    """Probe whether any coefficient function can satisfy the chain rule.

    Candidates f(r; x) = r^2 s''(rx)/s''(x) must agree across base points x;
    agreement plus multiplicativity f(r1) f(r2) = f(r1 r2) forces f(r) = r^q
    with q > 0, in which case the density itself is rebuilt in closed form
    from s(1), s'(1), s''(1) and compared to eval_s.
    """
    cfg = cfg or RecoveryConfig()
    if not d.concave or d.eval_s2 is None:
        raise ValueError(f"density {d.label!r} lacks a negative-curvature evaluator")
    s2 = d.eval_s2
    rs = np.asarray(cfg.r_grid, dtype=np.float64)
    xs = np.asarray(cfg.x_probes, dtype=np.float64)
    cand = rs[:, None] ** 2 * np.asarray(s2(rs[:, None] * xs[None, :])) / np.asarray(s2(xs))[None, :]
    if not np.all(np.isfinite(cand)):
        return PowerRecovery(math.nan, math.nan, math.nan, "inconclusive", None)
    consistency = float((cand.max(axis=1) - cand.min(axis=1)).max())

    def f_hat(r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=np.float64)
        vals = r[..., None] ** 2 * np.asarray(s2(r[..., None] * xs)) / np.asarray(s2(xs))
        return vals.mean(axis=-1)

    pair_rs = rs[::3]
    r1, r2 = np.meshgrid(pair_rs, pair_rs)
    defect = float(
        np.abs(f_hat(r1) * f_hat(r2) - f_hat(r1 * r2)).max()
    )
    f_on_grid = f_hat(rs)
    if np.any(f_on_grid <= 0.0):
        return PowerRecovery(math.nan, consistency, defect, "not_power", None)
    q_est = float(np.mean(np.log(f_on_grid) / np.log(rs)))

    if consistency > cfg.consistency_tol or defect > cfg.multiplicativity_tol or q_est <= 0.0:
        return PowerRecovery(q_est, consistency, defect, "not_power", None)

    s_1 = float(np.asarray(d.eval_s(1.0)))
    s1_1 = float(np.asarray(d.eval_s1(1.0)))
    s2_1 = float(np.asarray(s2(1.0)))
    grid = np.arange(1, cfg.recon_grid_n + 1, dtype=np.float64) / cfg.recon_grid_n
    if abs(q_est - 1.0) < cfg.q_one_window:
        k = s2_1
        a = -s2_1 + s1_1
        b = s2_1 - s1_1 + s_1
        rebuilt = k * grid * np.log(grid) + a * grid + b
        branch = "log"
    else:
        k = s2_1 / q_est
        a = -s2_1 / q_est + s1_1
        b = s2_1 / q_est - s1_1 + s_1
        rebuilt = k * (grid**q_est - grid) / (q_est - 1.0) + a * grid + b
        branch = "power"
    max_err = float(np.abs(rebuilt - np.asarray(d.eval_s(grid))).max())
    recon = Reconstruction(k_q=k, a_q=a, b_q=b, branch=branch, max_abs_err=max_err)
    return PowerRecovery(q_est, consistency, defect, "power", recon)


def three_by_two_family(r: float, xi: float, x: float) -> JointMatrix:
    """The 3x2 construction behind the twice-differentiated relation.

    Column 1 holds (rx, r(xi - x), r(1 - xi)); column 2 is uniform mass
    (1-r)/3.  Differentiating the chain rule twice in x over this family
    isolates the curvature relation tested by check_twice_equation.
    """
    if not (0.0 < x < xi <= 1.0):
        raise ValueError(f"need 0 < x < xi <= 1, got x={x!r}, xi={xi!r}")
    if not 0.0 < r < 1.0:
        raise ValueError(f"need r in (0, 1), got {r!r}")
    col2 = (1.0 - r) / 3.0
    return JointMatrix(
        [
            [r * x, col2],
            [r * (xi - x), col2],
            [r * (1.0 - xi), col2],
        ]
    )


def check_twice_equation(
    d: Density, f_candidate: Callable[[float], float], r: float, xi: float, x: float
) -> float:
    """Residual of r^2 {s''(rx) + s''(r(xi-x))} = f(r) {s''(x) + s''(xi-x)}.

    Vanishes for all admissible (r, xi, x) iff f_candidate matches the
    density's coefficient law; x = xi/2 reduces it to the single-ratio form
    f(r)/r^2 = s''(r xi/2)/s''(xi/2).
    """
    if not (0.0 < x < xi <= 1.0):
        raise ValueError(f"need 0 < x < xi <= 1, got x={x!r}, xi={xi!r}")
    if not 0.0 < r < 1.0:
        raise ValueError(f"need r in (0, 1), got {r!r}")
    s2 = d.eval_s2
    lhs = r * r * (float(np.asarray(s2(r * x))) + float(np.asarray(s2(r * (xi - x)))))
    rhs = f_candidate(r) * (float(np.asarray(s2(x))) + float(np.asarray(s2(xi - x))))
    return lhs - rhs


# ---------------------------------------------------------------------------
# axiom property suite and monotonicity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    continuity: bool
    maximality: bool
    expandability: bool
    modulus: dict
    worst_maximality_gap: float

    @property
    def all_pass(self) -> bool:
        return self.continuity and self.maximality and self.expandability

    def to_dict(self) -> dict:
        return {
            "continuity": self.continuity,
            "maximality": self.maximality,
            "expandability": self.expandability,
            "modulus": dict(self.modulus),
            "worst_maximality_gap": self.worst_maximality_gap,
            "all_pass": self.all_pass,
        }


def _random_simplex(rng: np.random.Generator, n: int) -> SimplexVector:
    g = rng.gamma(shape=1.0, scale=1.0, size=n)
    total = math.fsum(g.tolist())
    if total <= 0.0:
        g = np.full(n, 1.0)
        total = float(n)
    return SimplexVector(g / total)


def axiom_suite(
    F: EntropyFunctional,
    sizes: Sequence[int] = tuple(range(2, 9)),
    seed: int = 0,
    trials: int = 200,
    eps_seq: tuple[float, ...] = (1e-3, 1e-5, 1e-7),
) -> AxiomReport:
    """Empirical check of continuity, maximality, and expandability.

    Continuity: mixing p toward another simplex point by weight eps moves
    every coordinate by at most eps; the observed modulus L(eps) must be
    finite, shrink along the eps ladder, and end below 1e-2.  Maximality:
    S(p) <= S(uniform) + 1e-12.  Expandability: appending a zero coordinate
    changes nothing, exactly.
    """
    if not F.density.s0_zero:
        raise ValueError("axiom suite needs the s(0) = 0 convention")
    rng = np.random.default_rng(seed)
    modulus = {eps: 0.0 for eps in eps_seq}
    maximality_ok = True
    expandability_ok = True
    worst_gap = -math.inf

    for n in sizes:
        u_val = entropy(F, uniform_vector(n))
        for _ in range(trials):
            p = _random_simplex(rng, n)
            sp = entropy(F, p)

            gap = sp - u_val
            worst_gap = max(worst_gap, gap)
            if gap > 1e-12:
                maximality_ok = False

            q = _random_simplex(rng, n)
            for eps in eps_seq:
                mixed = SimplexVector((1.0 - eps) * p.entries + eps * q.entries)
                delta = abs(entropy(F, mixed) - sp)
                if delta > modulus[eps]:
                    modulus[eps] = delta

            expanded = SimplexVector(np.append(p.entries, 0.0))
            if entropy(F, expanded) != sp:
                expandability_ok = False

    levels = [modulus[eps] for eps in eps_seq]
    continuity_ok = (
        all(math.isfinite(v) for v in levels)
        and all(b <= a for a, b in zip(levels, levels[1:]))
        and levels[-1] <= 1e-2
    )
    return AxiomReport(
        continuity=continuity_ok,
        maximality=maximality_ok,
        expandability=expandability_ok,
        modulus={f"{eps:g}": v for eps, v in modulus.items()},
        worst_maximality_gap=worst_gap,
    )


def monotonicity_check(F: EntropyFunctional, P: JointMatrix) -> bool:
    """S(P) >= S(marginal) - 1e-10 (holds for concave densities with s(0)=0)."""
    d = F.density
    if not (d.s0_zero and d.concave):
        raise ValueError("monotonicity check needs s(0) = 0 and concavity")
    return _matrix_entropy(F, P) - entropy(F, marginal(P)) >= -1e-10


# ---------------------------------------------------------------------------
# batch report schema shared with the CLI
# ---------------------------------------------------------------------------


def batch_report(
    density_label: str,
    check: str,
    seed: int,
    outcomes: Sequence[str],
    slacks: Sequence[float],
) -> dict:
    """Summary dict in the stable report schema.

    outcomes are per-instance verdict strings ('pass'/'fail'/'divergent');
    worst_slack is the minimum slack across instances (nan when empty).
    """
    outcomes = list(outcomes)
    finite_slacks = [s for s in slacks if math.isfinite(s)]
    return {
        "density": density_label,
        "check": check,
        "instances": len(outcomes),
        "pass_count": sum(1 for o in outcomes if o == "pass"),
        "fail_count": sum(1 for o in outcomes if o == "fail"),
        "divergent_count": sum(1 for o in outcomes if o == "divergent"),
        "worst_slack": min(finite_slacks) if finite_slacks else math.nan,
        "seed": seed,
    }
