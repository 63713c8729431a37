"""Internal-state bookkeeping for atoms with translational-internal entanglement.

Units are hbar = M = 1 throughout. Lengths only ever appear multiplied by a
wavenumber, so callers are free to measure them in units of 1/k1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-9


@dataclass(frozen=True)
class SpinState:
    """Normalized two-level internal state a1|1> + a2|2>."""

    a1: complex
    a2: complex

    def __post_init__(self) -> None:
        norm = abs(self.a1) ** 2 + abs(self.a2) ** 2
        if not math.isfinite(norm) or norm == 0.0:
            raise ValueError("spin state has zero or non-finite norm")
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"spin state is not normalized (norm^2 = {norm!r})")

    @classmethod
    def normalized(cls, a1: complex, a2: complex) -> "SpinState":
        n = math.sqrt(abs(a1) ** 2 + abs(a2) ** 2)
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(complex(a1) / n, complex(a2) / n)

    def as_array(self) -> np.ndarray:
        return np.array([self.a1, self.a2], dtype=complex)


@dataclass(frozen=True)
class TieInput:
    """Bichromatic input c1|k1>|1> + c2|k2>|2>.

    The amplitudes are renormalized on construction by :func:`make_tie_input`;
    constructing the dataclass directly requires them to already be normalized.
    """

    c1: complex
    c2: complex
    k1: float
    k2: float
    p1: float = field(init=False)
    p2: float = field(init=False)

    def __post_init__(self) -> None:
        if not (self.k1 > 0 and self.k2 > 0) or not (math.isfinite(self.k1) and math.isfinite(self.k2)):
            raise ValueError(f"wavenumbers must be positive and finite, got k1={self.k1}, k2={self.k2}")
        p1 = abs(self.c1) ** 2
        p2 = abs(self.c2) ** 2
        if abs(p1 + p2 - 1.0) > 1e-12:
            raise ValueError(f"|c1|^2 + |c2|^2 = {p1 + p2!r}, expected 1")
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p2", p2)

    @property
    def kappa(self) -> float:
        return self.k2 / self.k1

    @property
    def delta_k(self) -> float:
        return self.k2 - self.k1

    @property
    def k_max(self) -> float:
        return max(self.k1, self.k2)

    @property
    def relative_phase(self) -> float:
        """arg(c1* c2) on the branch (-pi, pi]."""
        if self.c1 == 0 or self.c2 == 0:
            return 0.0
        phi = cmath.phase(self.c1.conjugate() * self.c2)
        return math.pi if phi == -math.pi else phi


@dataclass(frozen=True)
class PhysicalParams:
    E: float
    eps1: float
    eps2: float
    M: float = 1.0


def make_tie_input(c1: complex, c2: complex, k1: float, k2: float) -> TieInput:
    """Validate and build a :class:`TieInput`.

    Amplitudes within 1e-9 of unit norm are renormalized exactly; anything
    further off is rejected rather than silently rescaled.
    """
    c1, c2 = complex(c1), complex(c2)
    norm2 = abs(c1) ** 2 + abs(c2) ** 2
    if norm2 == 0.0:
        raise ValueError("TIE amplitudes have zero total norm")
    if abs(norm2 - 1.0) > NORM_TOL:
        raise ValueError(f"|c1|^2 + |c2|^2 = {norm2!r} is not within {NORM_TOL} of 1")
    n = math.sqrt(norm2)
    return TieInput(c1 / n, c2 / n, float(k1), float(k2))


def balanced_tie(kappa: float, p1: float = 0.5, k1: float = 1.0) -> TieInput:
    """Real-amplitude TIE state with k2 = kappa*k1 and weight p1 on level 1."""
    if not 0.0 <= p1 <= 1.0:
        raise ValueError(f"p1 must lie in [0, 1], got {p1}")
    return make_tie_input(math.sqrt(p1), math.sqrt(1.0 - p1), k1, kappa * k1)


def momenta_from_energy(params: PhysicalParams) -> tuple[float, float]:
    """Wavenumbers that put both internal levels on the same total energy."""
    if params.M <= 0:
        raise ValueError("mass must be positive")
    if params.E < params.eps1 or params.E < params.eps2:
        raise ValueError(
            f"total energy {params.E} lies below an internal level "
            f"({params.eps1}, {params.eps2}); no real momentum"
        )
    k1 = math.sqrt(2.0 * params.M * (params.E - params.eps1))
    k2 = math.sqrt(2.0 * params.M * (params.E - params.eps2))
    return k1, k2


def internal_state_at(tie: TieInput, x: float) -> SpinState:
    """Spin state locked to position x inside the field region."""
    return SpinState.normalized(tie.c1 * cmath.exp(1j * tie.k1 * x), tie.c2 * cmath.exp(1j * tie.k2 * x))


def arm_states(tie: TieInput, L_A: float, L_B: float) -> tuple[SpinState, SpinState]:
    return internal_state_at(tie, L_A), internal_state_at(tie, L_B)


def ww_basis(tie: TieInput, L_A_ref: float, L_B_ref: float) -> tuple[SpinState, SpinState]:
    """Orthonormal pair used to read the path off the internal state.

    Built from the arm lengths the measuring party believes in. When those
    equal the true lengths the basis is the optimal one; otherwise it is the
    sub-optimal basis keyed to the nominal lengths.
    """
    chi = tie.delta_k * (L_A_ref + L_B_ref) / 2.0 + tie.relative_phase
    rot = 1j * cmath.exp(1j * chi) / math.sqrt(2.0)
    s = 1.0 / math.sqrt(2.0)
    return SpinState(s, rot), SpinState(s, -rot)


def overlap(a: SpinState, b: SpinState) -> complex:
    """<a|b>, antilinear in the first argument."""
    return a.a1.conjugate() * b.a1 + a.a2.conjugate() * b.a2


def overlap_arg(psi_A: SpinState, psi_B: SpinState) -> float:
    """Argument of <psi_B|psi_A>, the phase offset of the field-free fringe.

    Kept distinct from the detector parameter ``detector_alpha``. Returns 0
    for orthogonal states, where the phase is undefined.
    """
    o = overlap(psi_B, psi_A)
    return cmath.phase(o) if o != 0 else 0.0
