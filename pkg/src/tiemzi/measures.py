"""Complementarity measures and the inequalities that bound them."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

from .interferometry import DetectorModel, tie_fringe
from .states import SpinState, TieInput, balanced_tie, overlap

TIGHT_TOL = 1e-9


class Verdict(str, enum.Enum):
    SATISFIED = "satisfied"
    TIGHT = "tight"
    VIOLATED = "violated"


@dataclass(frozen=True)
class DualityReport:
    inequality: str
    lhs: float
    bound: float
    tol: float = TIGHT_TOL

    @property
    def slack(self) -> float:
        return self.bound - self.lhs

    @property
    def verdict(self) -> Verdict:
        if abs(self.slack) <= self.tol:
            return Verdict.TIGHT
        return Verdict.SATISFIED if self.slack > 0 else Verdict.VIOLATED

    def as_dict(self) -> dict:
        return {
            "inequality": self.inequality,
            "lhs": self.lhs,
            "bound": self.bound,
            "slack": self.slack,
            "verdict": self.verdict.value,
        }


def _check_unit(name: str, x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


def distinguishability_from_overlap(ov: complex) -> float:
    """D = sqrt(1 - |ov|^2)."""
    m = abs(ov)
    if m > 1.0 + 1e-12:
        raise ValueError(f"|overlap| = {m} exceeds 1")
    return math.sqrt(max(0.0, 1.0 - m * m))


def tie_distinguishability(tie: TieInput, L_AB: float) -> float:
    return min(1.0, 2.0 * math.sqrt(tie.p1 * tie.p2) * abs(math.sin(tie.delta_k * L_AB / 2.0)))


def purity(psi_A: SpinState, psi_B: SpinState) -> float:
    """|<psi_B|psi_A>|, the coherence left in the path state."""
    return min(abs(overlap(psi_B, psi_A)), 1.0)


def ww_probability(D: float) -> float:
    _check_unit("D", D)
    return 0.5 * (1.0 + D)


def wp_probability(V: float, mode: str = "orthogonal", k_delta_L: float | None = None) -> float:
    """Correct-guess probability for the phase.

    ``mode="orthogonal"`` is the best case for two orthogonal phase outputs;
    ``mode="discrete"`` guesses the sign of a shift +/-|delta L| around a
    working point k*L0 at an odd multiple of pi/2.
    """
    _check_unit("V", V)
    if mode == "orthogonal":
        return 0.5 * (1.0 + V)
    if mode == "discrete":
        if k_delta_L is None:
            raise ValueError("discrete mode needs k_delta_L")
        return 0.5 + 0.5 * V * math.sin(abs(k_delta_L))
    raise ValueError(f"unknown mode {mode!r}")


def sensitivity(tie: TieInput, L_AB: float) -> float:
    """Fringe slope normalized to the shortest wavelength, (2/k_max)|dP/dL_AB|."""
    slope = tie.p1 * tie.k1 * math.sin(tie.k1 * L_AB) + tie.p2 * tie.k2 * math.sin(tie.k2 * L_AB)
    return abs(slope) / tie.k_max


def standard_sensitivity(V: float, phi: float) -> float:
    _check_unit("V", V)
    return V * abs(math.sin(phi))


@dataclass(frozen=True)
class SmallShift:
    k1_delta_L: float
    P_WW_approx: float
    P_WP_approx: float
    P_WW_exact: float
    P_WP_exact: float


def tie_small_shift(k1: float, delta_L: float, tie: TieInput | None = None) -> SmallShift:
    """WW and WP probabilities for kappa = 3, p1 = 1/2 around k1*L0 = pi/2.

    The shift sign is unknown to the guesser, so only |delta_L| matters.
    """
    if tie is None:
        tie = balanced_tie(3.0, 0.5, k1)
    if abs(tie.kappa - 3.0) > 1e-12 or abs(tie.p1 - 0.5) > 1e-12 or abs(tie.k1 - k1) > 1e-12 * k1:
        raise ValueError("small-shift expansion requires kappa = 3, p1 = 1/2 and matching k1")
    eps = abs(k1 * delta_L)
    if eps > 0.3:
        raise ValueError(f"|k1 delta_L| = {eps} is outside the small-shift regime (<= 0.3)")
    if eps > 0.1:
        warnings.warn(f"|k1 delta_L| = {eps} > 0.1; expansion is loose", stacklevel=2)
    L_AB = (math.pi / 2.0 + eps) / k1
    P_WW_exact = ww_probability(tie_distinguishability(tie, L_AB))
    P_WP_exact = tie_fringe(tie, L_AB)[0]
    return SmallShift(eps, 1.0 - eps * eps / 4.0, 0.5 * (1.0 + eps), P_WW_exact, P_WP_exact)


def standard_wp_bound(det: DetectorModel, k: float, delta_L: float) -> tuple[float, float]:
    """Largest sign-guess probability a phase-independent detector allows.

    Returns (exact, small-parameter) forms.
    """
    alpha = det.detector_alpha
    s = abs(k * delta_L)
    return 0.5 * (1.0 + abs(math.sin(alpha)) * math.sin(s)), 0.5 * (1.0 + s * abs(alpha))


def standard_ww_small_alpha(alpha: float) -> float:
    return 1.0 - alpha * alpha / 4.0


def duality_audit(
    P_WW: float, P_WP: float, mode: str = "orthogonal", k_delta_L: float | None = None
) -> DualityReport:
    for name, p in (("P_WW", P_WW), ("P_WP", P_WP)):
        if not 0.5 - 1e-12 <= p <= 1.0 + 1e-12:
            raise ValueError(f"{name} must lie in [1/2, 1], got {p}")
    ww = (2.0 * P_WW - 1.0) ** 2
    if mode == "orthogonal":
        return DualityReport("duality_orthogonal", ww + (2.0 * P_WP - 1.0) ** 2, 1.0)
    if mode == "discrete":
        if k_delta_L is None or math.sin(abs(k_delta_L)) == 0.0:
            raise ValueError("discrete mode needs a nonzero k_delta_L")
        wp = ((2.0 * P_WP - 1.0) / math.sin(abs(k_delta_L))) ** 2
        return DualityReport("duality_discrete", ww + wp, 1.0)
    raise ValueError(f"unknown mode {mode!r}")


def sd_ellipse_bound(S: float, D: float, kappa: float) -> DualityReport:
    """Sensitivity-distinguishability ellipse; kappa = 1 is the circle, inf the limit."""
    _check_unit("S", S)
    _check_unit("D", D)
    if math.isinf(kappa) and kappa > 0:
        center, half_axis, name = 0.5, 0.5, "sd_ellipse_inf"
    elif kappa >= 1.0:
        center = (kappa - 1.0) / (2.0 * kappa)
        half_axis = (kappa + 1.0) / (2.0 * kappa)
        name = "sd_circle" if kappa == 1.0 else "sd_ellipse"
    else:
        raise ValueError(f"kappa must be >= 1 or inf, got {kappa}")
    return DualityReport(name, ((S - center) / half_axis) ** 2 + D * D, 1.0)


def max_distinguishability_lengths(tie: TieInput, periods: int = 1) -> list[float]:
    """Path differences L_AB > 0 where D peaks, (2n+1)pi/delta_k, n < 2*periods."""
    if tie.delta_k == 0:
        return []
    return [(2 * n + 1) * math.pi / abs(tie.delta_k) for n in range(2 * periods)]


def ellipse_upper_sensitivity(D: float, kappa: float) -> float:
    """Largest S the ellipse admits at distinguishability D (its upper branch)."""
    _check_unit("D", D)
    if math.isinf(kappa):
        center = half_axis = 0.5
    elif kappa >= 1.0:
        center, half_axis = (kappa - 1.0) / (2.0 * kappa), (kappa + 1.0) / (2.0 * kappa)
    else:
        raise ValueError(f"kappa must be >= 1 or inf, got {kappa}")
    return center + half_axis * math.sqrt(max(0.0, 1.0 - D * D))


def ellipse_at_max_distinguishability(tie: TieInput, periods: int = 4) -> DualityReport:
    """Compare the largest sensitivity found at the D maxima with the ellipse's upper branch.

    The ellipse bounds the maximal S at given D, so only S above the upper
    branch counts as a violation; S below the lower branch is allowed. This
    is the form used for kappa where no equality case is derived.
    """
    points = max_distinguishability_lengths(tie, periods)
    if not points:
        S, D = sensitivity(tie, 0.0), 0.0
    else:
        S = max(sensitivity(tie, L) for L in points)
        D = min(tie_distinguishability(tie, points[0]), 1.0)
    return DualityReport("sd_ellipse_upper", S, ellipse_upper_sensitivity(D, tie.kappa))
