"""Command-line front end.

Every command writes its output file plus ``<output>.manifest.json``. Passing
that manifest back through ``--config`` replays the run.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .interferometry import DetectorModel, tie_fringe
from .measures import (
    Verdict,
    duality_audit,
    ellipse_at_max_distinguishability,
    purity,
    sd_ellipse_bound,
    sensitivity,
    standard_sensitivity,
    tie_distinguishability,
    ww_probability,
    wp_probability,
)
from .montecarlo import (
    ExperimentConfig,
    GameConfig,
    expected_wrong,
    required_atoms,
    run_game,
    run_phase_experiment,
)
from .states import arm_states, balanced_tie

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    """Round-trip-exact decimal with 17 significant digits."""
    return format(float(x), ".17g")


def parse_kappa(raw: Any) -> float:
    if isinstance(raw, str) and raw.strip().lower() in ("inf", "infinity", "∞"):
        return math.inf
    k = float(raw)
    if not (k >= 1.0):
        raise ConfigError(f"kappa must be >= 1 or 'inf', got {raw!r}")
    return k


def _kappa_json(k: float) -> float | str:
    return "inf" if math.isinf(k) else k


# --- output helpers --------------------------------------------------------


def _write_csv(path: Path, header: list[str], rows: list[list[float]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _dump_json(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def _write_manifest(command: str, params: dict, out: Path) -> None:
    _dump_json(
        manifest_path(out),
        {
            "command": command,
            "params": params,
            "seed": params.get("seed"),
            "version": __version__,
            "outputs": [str(out)],
            "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        },
    )


# --- commands ---------------------------------------------------------------


def fringe_rows(kappa: float, p1: float, grid_min: float, grid_max: float, points: int) -> list[list[float]]:
    tie = balanced_tie(kappa, p1)
    rows = []
    for x in np.linspace(grid_min, grid_max, points):
        x = float(x)
        P_plus, P_minus = tie_fringe(tie, x)
        a, b = arm_states(tie, x, 0.0)
        rows.append([x, P_plus, P_minus, tie_distinguishability(tie, x), sensitivity(tie, x), purity(a, b)])
    return rows


def cmd_fringes(p: dict) -> tuple[Path, dict]:
    if p["points"] < 2 or not p["grid_max"] > p["grid_min"]:
        raise ConfigError("need points >= 2 and grid_max > grid_min")
    if not 0.0 <= p["p1"] <= 1.0:
        raise ConfigError("p1 must lie in [0, 1]")
    out = Path(p["out"])
    rows = fringe_rows(p["kappa"], p["p1"], p["grid_min"], p["grid_max"], p["points"])
    _write_csv(out, ["k1_L_AB", "P_plus", "P_minus", "D", "S", "purity"], rows)
    return out, p


def ellipse_rows(kappas: list[float], points: int) -> list[list[float]]:
    """Sweep p1 at k1*L_AB = pi/2 for every kappa.

    kappa = 1 has no path marking of its own, so its row set is the standard
    detector of the same D = 2 sqrt(p1 p2) read at the steepest fringe point
    (S = sqrt(1 - D^2)). kappa = inf is the limit of the TIE values,
    S = 1 - p1.
    """
    rows = []
    for kappa in kappas:
        for p1 in np.linspace(0.0, 1.0, points):
            p1 = float(p1)
            D = 2.0 * math.sqrt(p1 * (1.0 - p1))
            if math.isinf(kappa):
                S = 1.0 - p1
            elif kappa == 1.0:
                S = math.sqrt(max(0.0, 1.0 - D * D))
            else:
                tie = balanced_tie(kappa, p1)
                L = math.pi / 2.0
                S, D = sensitivity(tie, L), tie_distinguishability(tie, L)
            rep = sd_ellipse_bound(min(S, 1.0), min(D, 1.0), kappa)
            rows.append([kappa, p1, S, D, rep.lhs, rep.slack])
    return rows


def cmd_ellipse(p: dict) -> tuple[Path, dict]:
    if p["points"] < 2:
        raise ConfigError("points must be >= 2")
    kappas = [parse_kappa(k) for k in p["kappa_list"]]
    out = Path(p["out"])
    _write_csv(out, ["kappa", "p1", "S", "D", "ellipse_lhs", "slack"], ellipse_rows(kappas, p["points"]))
    return out, {**p, "kappa_list": [_kappa_json(k) for k in kappas]}


PRESETS = {
    "tie": dict(mode="tie", kappa=3.0, p1=0.5, k_max_delta_L=0.01, n_in=90_000, repetitions=500),
    "standard": dict(
        mode="standard", detector_alpha=math.acos(0.9), k_max_delta_L=0.01, n_in=52_632, repetitions=200
    ),
}


def experiment_payload(cfg: ExperimentConfig, workers: int = 1) -> dict:
    summary = run_phase_experiment(cfg, workers=workers)
    if cfg.mode == "tie":
        tie = balanced_tie(cfg.kappa, cfg.p1)
        S = sensitivity(tie, cfg.k1_L0)
        predicted_wrong = expected_wrong("tie", kappa=cfg.kappa, S=S) if S > 0 else math.inf
        floor = None
    else:
        det = DetectorModel.from_alpha(cfg.detector_alpha)
        S = standard_sensitivity(det.visibility, cfg.k1_L0)
        predicted_wrong = expected_wrong("standard", D=det.distinguishability, n_in=cfg.n_in)
        floor = expected_wrong("standard_floor", k_max_delta_L=cfg.k_max_delta_L)
    predicted_n_in = required_atoms(abs(cfg.k_max_delta_L), S) if S > 0 and cfg.k_max_delta_L else None
    body = summary.as_dict()
    body["prediction"] = {
        "sensitivity": S,
        "required_atoms": predicted_n_in,
        "predicted_wrong": predicted_wrong,
        "predicted_wrong_at_D": 0.5 * (1.0 - summary.D) * cfg.n_in,
        "standard_floor_wrong": floor,
    }
    body["empirical"] = {
        "n_in": cfg.n_in,
        "mean_wrong": summary.mean_wrong,
        "std_wrong": summary.std_wrong,
        "sign_success_rate": summary.success_rate,
    }
    return body


def cmd_experiment(p: dict) -> tuple[Path, dict]:
    fields = {k: p[k] for k in ExperimentConfig.__dataclass_fields__ if k in p and p[k] is not None}
    try:
        cfg = ExperimentConfig(**fields)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"experiment config: {e}") from e
    out = Path(p["out"])
    _dump_json(out, experiment_payload(cfg, workers=p.get("workers") or 1))
    return out, p


def cmd_game(p: dict) -> tuple[Path, dict]:
    fields = {k: p[k] for k in GameConfig.__dataclass_fields__ if k in p and p[k] is not None}
    if "mix" in fields:
        fields["mix"] = tuple(fields["mix"])
    try:
        cfg = GameConfig(**fields)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"game config: {e}") from e
    out = Path(p["out"])
    _dump_json(out, run_game(cfg).as_dict())
    return out, p


def audit_report(trials: int, seed: int) -> dict:
    """Randomized sweep of every inequality over standard- and TIE-generated inputs."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    counts: dict[str, dict[str, dict[str, int]]] = {"standard": {}, "tie": {}}

    def tally(cls: str, rep) -> None:
        c = counts[cls].setdefault(rep.inequality, {v.value: 0 for v in Verdict})
        c[rep.verdict.value] += 1

    for _ in range(trials):
        alpha = rng.uniform(0.0, math.pi / 2)
        phi = rng.uniform(0.0, 2 * math.pi)
        kdl = rng.uniform(1e-6, 0.5)
        det = DetectorModel.from_alpha(alpha)
        D, V = det.distinguishability, det.visibility
        P_WW = ww_probability(D)
        tally("standard", duality_audit(P_WW, wp_probability(V, "orthogonal")))
        tally("standard", duality_audit(P_WW, wp_probability(V, "discrete", kdl), "discrete", kdl))
        tally("standard", sd_ellipse_bound(standard_sensitivity(V, phi), D, 1.0))

        eps = rng.uniform(0.0, 0.1)
        if eps == 0.0:
            eps = 0.1
        tie = balanced_tie(3.0, 0.5)
        L = math.pi / 2 + eps
        P_WW_t = ww_probability(tie_distinguishability(tie, L))
        P_WP_t = tie_fringe(tie, L)[0]
        tally("tie", duality_audit(P_WW_t, P_WP_t, "discrete", eps))
        tally("tie", sd_ellipse_bound(min(sensitivity(tie, L), 1.0), tie_distinguishability(tie, L), 1.0))
        tie_r = balanced_tie(3.0, rng.uniform(0.0, 1.0))
        tally("tie", ellipse_at_max_distinguishability(tie_r, periods=1))
    return {"trials": trials, "seed": seed, "counts": counts}


def cmd_audit(p: dict) -> tuple[Path, dict]:
    out = Path(p["out"])
    _dump_json(out, audit_report(p["trials"], p["seed"]))
    return out, p


# --- argument handling -------------------------------------------------------

COMMANDS: dict[str, Callable[[dict], tuple[Path, dict]]] = {
    "fringes": cmd_fringes,
    "ellipse": cmd_ellipse,
    "experiment": cmd_experiment,
    "game": cmd_game,
    "audit": cmd_audit,
}

DEFAULTS: dict[str, dict[str, Any]] = {
    "fringes": dict(kappa=3.0, p1=0.5, grid_min=0.0, grid_max=2 * math.pi, points=1001, out="fringes.csv"),
    "ellipse": dict(kappa_list=["1", "3", "inf"], points=101, out="ellipse.csv"),
    "experiment": dict(
        preset=None, mode="tie", kappa=3.0, p1=0.5, detector_alpha=0.0, k_max_delta_L=0.01, sign=1,
        n_in=90_000, k1_L0=math.pi / 2, seed=0, repetitions=1, workers=1, out="experiment.json",
    ),
    "game": dict(
        trials=200, mix=[0.25, 0.25, 0.25, 0.25], seed=0, mode="tie", kappa=3.0, p1=0.5,
        detector_alpha=0.0, k_max_delta_L=0.01, k1_L0=math.pi / 2, n_in=90_000, atoms_per_block=1,
        out="game.json",
    ),
    "audit": dict(trials=10_000, seed=0, out="audit.json"),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tiemzi", description="Mach-Zehnder interferometry with TIE states.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", default=None, metavar="JSON", help="config file or manifest to replay")
        sp.add_argument("--out", default=None, metavar="PATH")

    sp = sub.add_parser("fringes", help="TIE fringe pattern, D, S and purity versus k1*L_AB")
    common(sp)
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--p1", type=float)
    sp.add_argument("--grid-min", dest="grid_min", type=float)
    sp.add_argument("--grid-max", dest="grid_max", type=float)
    sp.add_argument("--points", type=int)

    sp = sub.add_parser("ellipse", help="S-D bound sweep over p1 at the D maximum")
    common(sp)
    sp.add_argument("--kappa-list", dest="kappa_list", type=lambda s: [x.strip() for x in s.split(",")])
    sp.add_argument("--points", type=int)

    for name in ("experiment", "game"):
        sp = sub.add_parser(name, help="shot-noise sign estimation" if name == "experiment" else "verification game")
        common(sp)
        sp.add_argument("--mode", choices=["tie", "standard"])
        sp.add_argument("--kappa", type=float)
        sp.add_argument("--p1", type=float)
        sp.add_argument("--detector-alpha", dest="detector_alpha", type=float)
        sp.add_argument("--k-max-delta-L", dest="k_max_delta_L", type=float)
        sp.add_argument("--k1-L0", dest="k1_L0", type=float)
        sp.add_argument("--n-in", dest="n_in", type=int)
        sp.add_argument("--seed", type=int)
        if name == "experiment":
            sp.add_argument("--preset", choices=sorted(PRESETS))
            sp.add_argument("--sign", type=int, choices=[1, -1])
            sp.add_argument("--repetitions", type=int)
            sp.add_argument("--workers", type=int)
        else:
            sp.add_argument("--trials", type=int)
            sp.add_argument("--mix", type=lambda s: [float(x) for x in s.split(",")])
            sp.add_argument("--atoms-per-block", dest="atoms_per_block", type=int)

    sp = sub.add_parser("audit", help="randomized inequality audit")
    common(sp)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)
    return parser


def _load_config(path: str, command: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path}: top level must be an object")
    if "params" in raw and "command" in raw:
        if raw["command"] != command:
            raise ConfigError(f"manifest is for '{raw['command']}', not '{command}'")
        raw = raw["params"]
    unknown = sorted(set(raw) - set(DEFAULTS[command]))
    if unknown:
        raise ConfigError(f"config {path}: unknown field(s) {', '.join(unknown)}")
    return raw


def resolve_params(command: str, args: argparse.Namespace) -> dict:
    """Defaults < preset < config file < flags."""
    params = dict(DEFAULTS[command])
    file_params = _load_config(args.config, command) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None}
    preset = flags.get("preset", file_params.get("preset"))
    if preset:
        params.update(PRESETS[preset])
    params.update(file_params)
    params.update(flags)
    for key in ("points", "n_in", "repetitions", "trials", "seed", "sign", "workers", "atoms_per_block"):
        if key in params and params[key] is not None:
            value = params[key]
            if isinstance(value, bool) or not float(value).is_integer():
                raise ConfigError(f"{command}.{key}: expected an integer, got {value!r}")
            params[key] = int(value)
    if command == "fringes":
        params["kappa"] = parse_kappa(params["kappa"])
    return params


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        params = resolve_params(args.command, args)
        out, recorded = COMMANDS[args.command](params)
        _write_manifest(args.command, recorded, out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    print(str(out))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
