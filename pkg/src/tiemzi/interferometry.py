"""Output-port statistics of a balanced Mach-Zehnder interferometer.

The merger maps |A> -> (|+> + |->)/sqrt(2) and |B> -> (|+> - |->)/sqrt(2), so an
arm-resolved state (psi_A|A> + psi_B|B>)/sqrt(2) leaves port +/- with amplitude
(psi_A +/- psi_B)/2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .states import SpinState, TieInput, arm_states, overlap, overlap_arg

PROB_TOL = 1e-12


def _check_visibility(V: float) -> None:
    if not 0.0 <= V <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {V}")


@dataclass(frozen=True)
class ArmGeometry:
    """Nominal arm lengths plus a signed shift of their difference.

    The shift is split antisymmetrically, L_A = L_A0 + delta_L/2 and
    L_B = L_B0 - delta_L/2, which keeps L_A + L_B at its nominal value.
    """

    L_A0: float
    L_B0: float
    delta_L: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.L_A0, self.L_B0, self.delta_L)):
            raise ValueError("arm geometry must be finite")

    @classmethod
    def from_difference(cls, L_AB0: float, delta_L: float = 0.0) -> "ArmGeometry":
        return cls(L_AB0 / 2.0, -L_AB0 / 2.0, delta_L)

    @property
    def L_AB0(self) -> float:
        return self.L_A0 - self.L_B0

    @property
    def L_AB(self) -> float:
        return self.L_AB0 + self.delta_L

    @property
    def L_A(self) -> float:
        return self.L_A0 + self.delta_L / 2.0

    @property
    def L_B(self) -> float:
        return self.L_B0 - self.delta_L / 2.0


@dataclass(frozen=True)
class DetectorModel:
    """Which-way detector described only by <d_A|d_B>."""

    overlap_dAdB: complex

    def __post_init__(self) -> None:
        if abs(self.overlap_dAdB) > 1.0 + 1e-12:
            raise ValueError(f"|<d_A|d_B>| = {abs(self.overlap_dAdB)} exceeds 1")

    @classmethod
    def from_alpha(cls, alpha: float, phase: float = 0.0) -> "DetectorModel":
        """Detector with D = |cos alpha|, i.e. |<d_A|d_B>| = |sin alpha|."""
        return cls(abs(math.sin(alpha)) * cmath.exp(1j * phase))

    @classmethod
    def from_distinguishability(cls, D: float, phase: float = 0.0) -> "DetectorModel":
        if not 0.0 <= D <= 1.0:
            raise ValueError(f"D must lie in [0, 1], got {D}")
        return cls(math.sqrt(1.0 - D * D) * cmath.exp(1j * phase))

    @property
    def visibility(self) -> float:
        return min(abs(self.overlap_dAdB), 1.0)

    @property
    def distinguishability(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.visibility**2))

    @property
    def detector_alpha(self) -> float:
        """Representative in [0, pi/2] with |cos alpha| = D."""
        return math.acos(min(self.distinguishability, 1.0))

    @property
    def fringe_phase(self) -> float:
        """Phase offset of the fringes, arg<d_B|d_A>."""
        return -cmath.phase(self.overlap_dAdB) if self.overlap_dAdB != 0 else 0.0


@dataclass(frozen=True)
class PolychromaticPacket:
    c: tuple[complex, ...]
    k: tuple[float, ...]
    omega: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (len(self.c) == len(self.k) == len(self.omega)) or not self.c:
            raise ValueError("packet needs equally many amplitudes, wavenumbers and frequencies")
        if abs(sum(abs(x) ** 2 for x in self.c) - 1.0) > 1e-12:
            raise ValueError("packet amplitudes are not normalized")
        if any(kj <= 0 for kj in self.k):
            raise ValueError("packet wavenumbers must be positive")

    @classmethod
    def normalized(cls, c: Sequence[complex], k: Sequence[float], omega: Sequence[float]) -> "PolychromaticPacket":
        arr = np.asarray(c, dtype=complex)
        arr = arr / np.linalg.norm(arr)
        return cls(tuple(complex(x) for x in arr), tuple(float(x) for x in k), tuple(float(x) for x in omega))

    @property
    def weights(self) -> np.ndarray:
        return np.abs(np.asarray(self.c)) ** 2

    def amplitude(self, x: float, t: float | np.ndarray) -> complex | np.ndarray:
        """f(x, t) = sum_j c_j exp(i(k_j x - omega_j t))."""
        c = np.asarray(self.c)[:, None]
        k = np.asarray(self.k)[:, None]
        w = np.asarray(self.omega)[:, None]
        t = np.atleast_1d(np.asarray(t, dtype=float))[None, :]
        f = (c * np.exp(1j * (k * x - w * t))).sum(axis=0)
        return f if f.size > 1 else complex(f[0])

    def slowest_beat_period(self) -> float:
        w = np.asarray(self.omega)
        if w.size < 2:
            return math.inf
        gaps = np.abs(np.subtract.outer(w, w))[~np.eye(w.size, dtype=bool)]
        if np.any(gaps == 0):
            raise ValueError("repeated frequencies in packet")
        return 2.0 * math.pi / float(gaps.min())


@dataclass(frozen=True)
class FieldFreeGeometry:
    theta: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")


@dataclass(frozen=True)
class DensityMatrix2:
    """Reduced path state in the |A>, |B> basis."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("density matrix must be 2x2")
        if not np.allclose(m, m.conj().T, atol=1e-12, rtol=0):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > 1e-12:
            raise ValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(m).min() < -1e-12:
            raise ValueError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        """Tr(rho^2)."""
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def standard_fringe(V: float, phi: float) -> tuple[float, float]:
    _check_visibility(V)
    p = 0.5 * V * math.cos(phi)
    return 0.5 + p, 0.5 - p


def unbalanced_fringe(V: float, k: float, L0: float, delta_L: float) -> tuple[float, float]:
    _check_visibility(V)
    p = 0.5 * V * math.cos(k * (L0 + delta_L))
    return 0.5 + p, 0.5 - p


def polychromatic_instant(
    packet: PolychromaticPacket, geom: ArmGeometry, det: DetectorModel, t: float | np.ndarray
) -> tuple[float | np.ndarray, float | np.ndarray]:
    """Detection probabilities at time t for a packet with a which-way detector.

    The packet is normalized on time average (sum |c_j|^2 = 1), so the two
    values sum to (|f(L_A,t)|^2 + |f(L_B,t)|^2)/2: exactly 1 for a single
    component and 1 on time average otherwise.
    """
    fA = packet.amplitude(geom.L_A, t)
    fB = packet.amplitude(geom.L_B, t)
    same = (np.abs(fA) ** 2 + np.abs(fB) ** 2) / 4.0
    cross = np.real(np.conj(fB) * fA * np.conj(det.overlap_dAdB)) / 2.0
    return same + cross, same - cross


def polychromatic_time_average(
    packet: PolychromaticPacket,
    geom: ArmGeometry,
    det: DetectorModel,
    beats: int = 1000,
    samples_per_beat: int = 200,
) -> tuple[float, float]:
    """Trapezoidal time average of :func:`polychromatic_instant` over many beat periods."""
    period = packet.slowest_beat_period()
    if not math.isfinite(period):
        p_plus, p_minus = polychromatic_instant(packet, geom, det, 0.0)
        return float(p_plus), float(p_minus)
    T = beats * period
    # the fastest beat must also be resolved
    w = np.asarray(packet.omega)
    fastest = 2.0 * math.pi / float(w.max() - w.min())
    n = int(max(beats * samples_per_beat, 20 * T / fastest)) + 1
    t = np.linspace(0.0, T, n)
    p_plus, p_minus = polychromatic_instant(packet, geom, det, t)
    return float(np.trapezoid(p_plus, t) / T), float(np.trapezoid(p_minus, t) / T)


def polychromatic_avg(packet: PolychromaticPacket, L_AB: float, det: DetectorModel) -> tuple[float, float]:
    """Closed-form long-time average of the port probabilities."""
    packet.slowest_beat_period()  # rejects repeated frequencies
    w = packet.weights
    fringe = _clip_unit(det.visibility * float(np.sum(w * np.cos(np.asarray(packet.k) * L_AB + det.fringe_phase))))
    return 0.5 * (1.0 + fringe), 0.5 * (1.0 - fringe)


def _clip_unit(c: float) -> float:
    return min(1.0, max(-1.0, c))


def tie_fringe(tie: TieInput, L_AB: float) -> tuple[float, float]:
    c = _clip_unit(tie.p1 * math.cos(tie.k1 * L_AB) + tie.p2 * math.cos(tie.k2 * L_AB))
    return 0.5 * (1.0 + c), 0.5 * (1.0 - c)


def tie_fringe_array(tie: TieInput, L_AB: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    L_AB = np.asarray(L_AB, dtype=float)
    c = np.clip(tie.p1 * np.cos(tie.k1 * L_AB) + tie.p2 * np.cos(tie.k2 * L_AB), -1.0, 1.0)
    return 0.5 * (1.0 + c), 0.5 * (1.0 - c)


def _is_orthonormal(basis: tuple[SpinState, SpinState], tol: float = 1e-9) -> bool:
    return abs(overlap(basis[0], basis[1])) <= tol


def joint_distribution_from_states(
    psi_A: np.ndarray, psi_B: np.ndarray, basis: Sequence[np.ndarray]
) -> np.ndarray:
    """P(port, outcome) for arbitrary arm-conditioned marker states.

    Returns a 2x2 array indexed [port, outcome] with port 0 = '+', 1 = '-'
    and outcome m = index into ``basis``.
    """
    a = np.array([[np.vdot(m, psi_A), np.vdot(m, psi_B)] for m in basis])  # [outcome, arm]
    plus = np.abs(a[:, 0] + a[:, 1]) ** 2 / 4.0
    minus = np.abs(a[:, 0] - a[:, 1]) ** 2 / 4.0
    return np.vstack([plus, minus])


def joint_outcome_dist(
    tie: TieInput, geom: ArmGeometry, basis: tuple[SpinState, SpinState]
) -> dict[tuple[str, str], float]:
    """Joint law of output port (+/-) and internal outcome (A/B)."""
    if not _is_orthonormal(basis):
        raise ValueError("measurement basis is not orthonormal")
    psi_A, psi_B = arm_states(tie, geom.L_A, geom.L_B)
    P = joint_distribution_from_states(psi_A.as_array(), psi_B.as_array(), [b.as_array() for b in basis])
    return {
        (s, m): float(P[i, j])
        for i, s in enumerate("+-")
        for j, m in enumerate("AB")
    }


def reduced_density(psi_A: SpinState, psi_B: SpinState, ff: FieldFreeGeometry) -> DensityMatrix2:
    """Path state after tracing out the spin; theta is the extra phase of arm A."""
    o = overlap(psi_B, psi_A) * cmath.exp(1j * ff.theta)
    return DensityMatrix2(0.5 * np.array([[1.0, o], [o.conjugate(), 1.0]], dtype=complex))


def field_free_fringe(psi_A: SpinState, psi_B: SpinState, ff: FieldFreeGeometry) -> tuple[float, float]:
    c = _clip_unit(abs(overlap(psi_B, psi_A)) * math.cos(ff.theta + overlap_arg(psi_A, psi_B)))
    return 0.5 * (1.0 + c), 0.5 * (1.0 - c)
