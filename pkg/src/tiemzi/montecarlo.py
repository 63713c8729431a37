"""Atom-by-atom simulation of sign estimation and path guessing.

RNG contract
------------
Every random number is drawn from a Philox4x64 stream whose key is
``SeedSequence([seed, stream_index]).generate_state(2, uint64)``. For the
phase experiment ``stream_index`` is the repetition index; inside that stream
atom ``i`` consumes the ``i``-th 64-bit output, mapped to a double in [0, 1)
by the top 53 bits. Any range of atoms can therefore be regenerated on its own
(see :func:`atom_uniforms`), and repetitions can be farmed out to workers in
any partition without changing a single draw. Game trials reuse the same
scheme with the trial index; the chooser's actions come from the dedicated
stream index :data:`CHOOSER_STREAM`.

Each atom is drawn from the exact joint law of (output port, internal
outcome) and additionally carries the arm it took as a simulator-only label.
Given the cell (s, m), the arm is A with probability
|<m|psi_A>|^2 / (|<m|psi_A>|^2 + |<m|psi_B>|^2). Summed over ports this makes
P(arm, outcome) = |<m|psi_arm>|^2 / 2, the which-way statistics of a direct
path measurement, while leaving the observable (port, outcome) law untouched.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .interferometry import ArmGeometry, DetectorModel, joint_distribution_from_states
from .measures import tie_distinguishability
from .states import arm_states, balanced_tie, ww_basis

CHOOSER_STREAM = 2**63 - 1
_INV_2_53 = 1.0 / 9007199254740992.0


def _stream(seed: int, index: int) -> np.random.Philox:
    key = np.random.SeedSequence([int(seed), int(index)]).generate_state(2, np.uint64)
    return np.random.Philox(key=key)


def atom_uniforms(seed: int, stream_index: int, start: int, stop: int) -> np.ndarray:
    """Uniforms for atoms ``start..stop-1`` of one stream, independent of any other range."""
    if not 0 <= start <= stop:
        raise ValueError("need 0 <= start <= stop")
    bg = _stream(seed, stream_index)
    bg.advance(start // 4)
    skip = start % 4
    raw = bg.random_raw(stop - start + skip)[skip:]
    return (raw >> np.uint64(11)).astype(np.float64) * _INV_2_53


# --- analytic predictions -------------------------------------------------


def required_atoms(k_max_delta_L: float, S: float) -> int:
    """Smallest atom count whose signal beats the shot noise, ceil(1/(k_max dL S)^2)."""
    if k_max_delta_L <= 0 or S <= 0:
        raise ValueError("k_max*delta_L and S must be positive")
    v = 1.0 / (k_max_delta_L * S) ** 2
    nearest = round(v)
    if abs(v - nearest) <= 1e-9 * v:
        return int(nearest)
    return math.ceil(v)


def expected_wrong(
    mode: str,
    *,
    kappa: float | None = None,
    S: float | None = None,
    k_max_delta_L: float | None = None,
    D: float | None = None,
    n_in: float | None = None,
) -> float:
    """Expected number of wrongly inferred paths.

    ``"tie"`` needs kappa and S, ``"standard_floor"`` needs k_max_delta_L,
    ``"standard"`` needs D and n_in.
    """
    if mode == "tie":
        if kappa is None or S is None or S <= 0 or kappa < 1:
            raise ValueError("tie mode needs kappa >= 1 and S > 0")
        return ((kappa - 1.0) / kappa) ** 2 / (16.0 * S * S)
    if mode == "standard_floor":
        if not k_max_delta_L:
            raise ValueError("standard_floor mode needs a nonzero k_max_delta_L")
        return 1.0 / (4.0 * k_max_delta_L * k_max_delta_L)
    if mode == "standard":
        if D is None or n_in is None or not 0.0 <= D <= 1.0:
            raise ValueError("standard mode needs D in [0, 1] and n_in")
        return 0.5 * (1.0 - D) * n_in
    raise ValueError(f"unknown mode {mode!r}")


# --- configuration ---------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "tie"
    kappa: float = 3.0
    p1: float = 0.5
    detector_alpha: float = 0.0
    k_max_delta_L: float = 0.01
    sign: int = 1
    n_in: int = 90_000
    k1_L0: float = math.pi / 2
    seed: int = 0
    repetitions: int = 1

    def __post_init__(self) -> None:
        if self.mode not in ("tie", "standard"):
            raise ValueError(f"mode must be 'tie' or 'standard', got {self.mode!r}")
        if self.n_in < 1:
            raise ValueError("n_in must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not abs(self.k_max_delta_L) < math.pi / 2:
            raise ValueError("|k_max*delta_L| must be below pi/2")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.mode == "tie":
            if self.kappa < 1:
                raise ValueError("kappa must be >= 1")
            if not 0.0 <= self.p1 <= 1.0:
                raise ValueError("p1 must lie in [0, 1]")

    @property
    def delta_L(self) -> float:
        """Signed shift in units where k1 = 1."""
        k_max = self.kappa if self.mode == "tie" else 1.0
        return self.sign * abs(self.k_max_delta_L) / k_max


@dataclass(frozen=True)
class _Setup:
    """Arm-conditioned marker states and readout basis as plain arrays."""

    psi_A: np.ndarray
    psi_B: np.ndarray
    basis: tuple[np.ndarray, np.ndarray]
    slope_sign: int
    D: float
    L_AB: float


def _marker_setup(
    mode: str, kappa: float, p1: float, detector_alpha: float, k1_L0: float, delta_L: float
) -> _Setup:
    geom = ArmGeometry.from_difference(k1_L0, delta_L)
    if mode == "tie":
        tie = balanced_tie(kappa, p1)
        a, b = arm_states(tie, geom.L_A, geom.L_B)
        basis = ww_basis(tie, geom.L_A0, geom.L_B0)
        L0 = geom.L_AB0
        slope = -(tie.p1 * tie.k1 * math.sin(tie.k1 * L0) + tie.p2 * tie.k2 * math.sin(tie.k2 * L0))
        return _Setup(
            a.as_array(),
            b.as_array(),
            (basis[0].as_array(), basis[1].as_array()),
            1 if slope >= 0 else -1,
            tie_distinguishability(tie, geom.L_AB),
            geom.L_AB,
        )
    # standard: explicit detector vectors with the requested overlap, read out
    # in the symmetric basis that is optimal for two equiprobable pure states
    det = DetectorModel.from_alpha(detector_alpha)
    beta = 0.5 * math.acos(min(det.visibility, 1.0))
    d_A = np.array([math.cos(beta), math.sin(beta)], dtype=complex)
    d_B = np.array([math.cos(beta), -math.sin(beta)], dtype=complex)
    r = 1.0 / math.sqrt(2.0)
    basis = (np.array([r, r], dtype=complex), np.array([r, -r], dtype=complex))
    slope = -det.visibility * math.sin(geom.L_AB0)
    return _Setup(
        np.exp(1j * geom.L_A) * d_A,
        np.exp(1j * geom.L_B) * d_B,
        basis,
        1 if slope >= 0 else -1,
        det.distinguishability,
        geom.L_AB,
    )


def cell_probabilities(setup: _Setup) -> np.ndarray:
    """Probabilities of the 8 cells indexed [port, outcome, arm]."""
    P = joint_distribution_from_states(setup.psi_A, setup.psi_B, setup.basis)
    w = np.array([[abs(np.vdot(m, setup.psi_A)) ** 2, abs(np.vdot(m, setup.psi_B)) ** 2] for m in setup.basis])
    tot = w.sum(axis=1, keepdims=True)
    share = np.divide(w, tot, out=np.full_like(w, 0.5), where=tot > 0)
    return P[:, :, None] * share[None, :, :]


def _sample_cells(cells: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(cells.ravel())
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    counts = np.bincount(np.minimum(idx, cdf.size - 1), minlength=cdf.size)
    return counts.reshape(cells.shape)


# --- phase experiment ------------------------------------------------------


@dataclass
class ExperimentSummary:
    config: ExperimentConfig
    n_plus: list[int] = field(default_factory=list)
    n_minus: list[int] = field(default_factory=list)
    n_outcome_A: list[int] = field(default_factory=list)
    n_outcome_B: list[int] = field(default_factory=list)
    sign_guess: list[int] = field(default_factory=list)
    sign_correct: list[bool] = field(default_factory=list)
    tie_broken: list[bool] = field(default_factory=list)
    wrong_path: list[int] = field(default_factory=list)
    P_plus: float = float("nan")
    D: float = float("nan")

    @property
    def mean_wrong(self) -> float:
        return float(np.mean(self.wrong_path))

    @property
    def std_wrong(self) -> float:
        return float(np.std(self.wrong_path, ddof=1)) if len(self.wrong_path) > 1 else 0.0

    @property
    def success_rate(self) -> float:
        return float(np.mean(self.sign_correct))

    def as_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "repetitions": {
                "n_plus": self.n_plus,
                "n_minus": self.n_minus,
                "n_outcome_A": self.n_outcome_A,
                "n_outcome_B": self.n_outcome_B,
                "sign_guess": self.sign_guess,
                "sign_correct": self.sign_correct,
                "tie_broken": self.tie_broken,
                "wrong_path": self.wrong_path,
            },
            "aggregate": {
                "mean_wrong": self.mean_wrong,
                "std_wrong": self.std_wrong,
                "sign_success_rate": self.success_rate,
                "ties_broken": int(sum(self.tie_broken)),
            },
            "analytic": {"P_plus": self.P_plus, "D": self.D},
        }


def _setup_for(cfg: ExperimentConfig) -> _Setup:
    return _marker_setup(cfg.mode, cfg.kappa, cfg.p1, cfg.detector_alpha, cfg.k1_L0, cfg.delta_L)


def _guess_sign(n_plus: int, n_in: int, slope_sign: int) -> tuple[int, bool]:
    excess = 2 * n_plus - n_in
    if excess == 0:
        return 1, True
    return (1 if excess * slope_sign > 0 else -1), False


def _run_reps(cfg: ExperimentConfig, reps: list[int]) -> list[tuple[int, int, int, int, int, bool, int]]:
    setup = _setup_for(cfg)
    cells = cell_probabilities(setup)
    out = []
    for r in reps:
        counts = _sample_cells(cells, atom_uniforms(cfg.seed, r, 0, cfg.n_in))
        n_plus = int(counts[0].sum())
        n_A = int(counts[:, 0, :].sum())
        wrong = int(counts[:, 0, 1].sum() + counts[:, 1, 0].sum())
        guess, tied = _guess_sign(n_plus, cfg.n_in, setup.slope_sign)
        out.append((n_plus, cfg.n_in - n_plus, n_A, cfg.n_in - n_A, guess, tied, wrong))
    return out


def run_phase_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentSummary:
    """Repeat the sign-estimation run ``cfg.repetitions`` times.

    ``workers > 1`` spreads repetitions over processes; the result is identical
    to the serial run.
    """
    reps = list(range(cfg.repetitions))
    if workers <= 1:
        rows = _run_reps(cfg, reps)
    else:
        chunks = [reps[i::workers] for i in range(workers) if reps[i::workers]]
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(_run_reps, [cfg] * len(chunks), chunks))
        by_rep = {}
        for chunk, part in zip(chunks, parts):
            by_rep.update(zip(chunk, part))
        rows = [by_rep[r] for r in reps]

    setup = _setup_for(cfg)
    P = joint_distribution_from_states(setup.psi_A, setup.psi_B, setup.basis)
    summary = ExperimentSummary(cfg, P_plus=float(P[0].sum()), D=setup.D)
    for n_plus, n_minus, n_A, n_B, guess, tied, wrong in rows:
        summary.n_plus.append(n_plus)
        summary.n_minus.append(n_minus)
        summary.n_outcome_A.append(n_A)
        summary.n_outcome_B.append(n_B)
        summary.sign_guess.append(guess)
        summary.sign_correct.append(guess == cfg.sign)
        summary.tie_broken.append(tied)
        summary.wrong_path.append(wrong)
    return summary


# --- verification game -----------------------------------------------------

ACTIONS = ("shift_plus", "shift_minus", "block_A", "block_B")


@dataclass(frozen=True)
class GameConfig:
    trials: int = 200
    mix: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    seed: int = 0
    mode: str = "tie"
    kappa: float = 3.0
    p1: float = 0.5
    detector_alpha: float = 0.0
    k_max_delta_L: float = 0.01
    k1_L0: float = math.pi / 2
    n_in: int = 90_000
    atoms_per_block: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "mix", tuple(float(x) for x in self.mix))
        if len(self.mix) != 4 or any(x < 0 for x in self.mix) or abs(sum(self.mix) - 1.0) > 1e-9:
            raise ValueError("mix must be four non-negative probabilities summing to 1")
        if self.trials < 1 or self.atoms_per_block < 1:
            raise ValueError("trials and atoms_per_block must be >= 1")
        # reuse the experiment validation for the physical parameters
        self.experiment(1)

    def experiment(self, sign: int) -> ExperimentConfig:
        return ExperimentConfig(
            mode=self.mode,
            kappa=self.kappa,
            p1=self.p1,
            detector_alpha=self.detector_alpha,
            k_max_delta_L=self.k_max_delta_L,
            sign=sign,
            n_in=self.n_in,
            k1_L0=self.k1_L0,
            seed=self.seed,
        )


@dataclass
class GameSummary:
    config: GameConfig
    actions: list[str] = field(default_factory=list)
    trials_per_action: dict[str, int] = field(default_factory=dict)
    correct_per_action: dict[str, int] = field(default_factory=dict)
    guesses_per_action: dict[str, int] = field(default_factory=dict)

    def rate(self, category: str) -> float:
        """Correct-guess rate for 'shift', 'block' or a single action name."""
        names = [a for a in ACTIONS if a.startswith(category)] if category in ("shift", "block") else [category]
        n = sum(self.guesses_per_action.get(a, 0) for a in names)
        c = sum(self.correct_per_action.get(a, 0) for a in names)
        return c / n if n else float("nan")

    def as_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg["mix"] = list(self.config.mix)
        return {
            "config": cfg,
            "actions": self.actions,
            "trials_per_action": self.trials_per_action,
            "guesses_per_action": self.guesses_per_action,
            "correct_per_action": self.correct_per_action,
            "rates": {
                "shift_sign": self.rate("shift"),
                "block_path": self.rate("block"),
                **{a: self.rate(a) for a in ACTIONS},
            },
        }


def run_game(cfg: GameConfig) -> GameSummary:
    """Chooser picks shifts or blocks a path; the guesser answers each trial.

    Shift trials send ``n_in`` atoms and the guesser names the sign. Block
    trials send ``atoms_per_block`` atoms through the open arm, with a shift of
    random sign in force, and the guesser names the arm from each atom's
    internal outcome.
    """
    chooser = np.random.Generator(_stream(cfg.seed, CHOOSER_STREAM)).random((cfg.trials, 2))
    cdf = np.cumsum(cfg.mix)
    summary = GameSummary(cfg)
    for a in ACTIONS:
        summary.trials_per_action[a] = 0
        summary.correct_per_action[a] = 0
        summary.guesses_per_action[a] = 0

    setups = {s: _setup_for(cfg.experiment(s)) for s in (1, -1)}
    cells = {s: cell_probabilities(setups[s]) for s in (1, -1)}
    for t in range(cfg.trials):
        action = ACTIONS[min(int(np.searchsorted(cdf, chooser[t, 0], side="right")), 3)]
        summary.actions.append(action)
        summary.trials_per_action[action] += 1
        if action.startswith("shift"):
            sign = 1 if action == "shift_plus" else -1
            counts = _sample_cells(cells[sign], atom_uniforms(cfg.seed, t, 0, cfg.n_in))
            guess, _ = _guess_sign(int(counts[0].sum()), cfg.n_in, setups[sign].slope_sign)
            summary.guesses_per_action[action] += 1
            summary.correct_per_action[action] += int(guess == sign)
        else:
            sign = 1 if chooser[t, 1] < 0.5 else -1
            setup = setups[sign]
            open_state = setup.psi_A if action == "block_A" else setup.psi_B
            p_A = abs(np.vdot(setup.basis[0], open_state)) ** 2
            u = atom_uniforms(cfg.seed, t, 0, cfg.atoms_per_block)
            said_A = int(np.count_nonzero(u < p_A))
            correct = said_A if action == "block_A" else cfg.atoms_per_block - said_A
            summary.guesses_per_action[action] += cfg.atoms_per_block
            summary.correct_per_action[action] += correct
    return summary
