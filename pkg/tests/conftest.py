"""Shared independent oracles and the acceptance summary hook."""

import math

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)


# --- oracles: written against raw numpy, never through the package ----------


def brute_arm_vectors(c1, c2, k1, k2, L_A, L_B):
    """Spin vectors at the merger, straight from the position-locked phase."""
    vA = np.array([c1 * np.exp(1j * k1 * L_A), c2 * np.exp(1j * k2 * L_A)])
    vB = np.array([c1 * np.exp(1j * k1 * L_B), c2 * np.exp(1j * k2 * L_B)])
    return vA / np.linalg.norm(vA), vB / np.linalg.norm(vB)


def brute_joint(vA, vB, basis):
    """Full path (x) spin state through a Hadamard-like merger, projected cell by cell.

    Returns array [port, outcome].
    """
    psi = np.concatenate([vA, vB]) / math.sqrt(2.0)  # path-major ordering |A>|s>, |B>|s>
    merger = np.kron(np.array([[1, 1], [1, -1]]) / math.sqrt(2.0), np.eye(2))
    out = merger @ psi
    P = np.empty((2, 2))
    for s in range(2):
        for m, b in enumerate(basis):
            P[s, m] = abs(np.vdot(b, out[2 * s : 2 * s + 2])) ** 2
    return P


def binomial_upper_tail(n: int, p: float, threshold_twice: int) -> float:
    """P(2X > threshold_twice) for X ~ Bin(n, p), summed term by term in log space."""
    ks = np.arange(n + 1)
    logpmf = (
        np.array([math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) for k in ks])
        + ks * math.log(p)
        + (n - ks) * math.log1p(-p)
    )
    pmf = np.exp(logpmf)
    return float(pmf[2 * ks > threshold_twice].sum())


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
