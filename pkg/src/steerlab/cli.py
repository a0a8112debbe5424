"""Command-line front end: sweeps, phase scans, witness reports, self-checks.

Subcommands
-----------
sweep        evaluate the three steering tests over an alpha grid, emitting
             plot-ready CSV files (fig3a/fig3b/fig4b) and a JSON report
fisher-scan  simulate the phase scan at one alpha and emit the per-phase
             conditional Fisher information curves (fig4a)
witness      evaluate all tests at one alpha, print and store a JSON report
validate     run the oracle-equivalence and invariant self-checks

Configuration is a JSON document mirroring RunConfig (snake_case); flags
override file values.  All outputs are deterministic for a fixed config and
seed: files are written atomically, floats with 9 significant digits, LF line
endings.  Exit codes: 0 success, 1 failed checks, 2 usage or config errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import expsim, witnesses
from .assemblage import optimize_fisher, optimize_variance
from .expsim import ScanConfig
from .qcore import AXIS_X, AXIS_Y, AXIS_Z, purity
from .source import SourceConfig, prepare
from .validate import run_all_checks
from .witnesses import reid_check, s_witness, yfg_check

__all__ = ["RunConfig", "load_config", "main"]

_AXES = {"X": AXIS_X, "Y": AXIS_Y, "Z": AXIS_Z}

ALL_FIGURES = ("fig3a", "fig3b", "fig4a", "fig4b", "report")


class ConfigError(ValueError):
    """Unusable configuration (missing file, bad field, bad value)."""


def default_alpha_grid() -> tuple[float, ...]:
    return tuple(np.linspace(0.0, math.pi / 6, 27))


@dataclass(frozen=True)
class RunConfig:
    source: SourceConfig = field(default_factory=lambda: SourceConfig(alpha=math.pi / 6))
    scan: ScanConfig = field(default_factory=ScanConfig)
    alpha_grid: tuple[float, ...] = field(default_factory=default_alpha_grid)
    output_dir: str = "out"
    emit: tuple[str, ...] = ("fig3a", "fig3b", "fig4b", "report")
    mc_runs: int = 100
    noiseless: bool = False

    def __post_init__(self):
        if not self.alpha_grid:
            raise ConfigError("alpha_grid must not be empty")
        for a in self.alpha_grid:
            if not 0.0 <= a < math.pi / 4:
                raise ConfigError(f"alpha_grid values must lie in [0, pi/4), got {a}")
        for name in self.emit:
            if name not in ALL_FIGURES:
                raise ConfigError(f"unknown emit target {name!r}")
        if self.mc_runs < 1:
            raise ConfigError("mc_runs must be positive")


def _parse_setting(value):
    if isinstance(value, str):
        try:
            return _AXES[value.upper()].copy()
        except KeyError:
            raise ConfigError(f"unknown measurement axis {value!r}") from None
    arr = np.asarray(value, dtype=float)
    return arr / np.linalg.norm(arr)


def _setting_to_json(setting) -> list[float]:
    return [float(x) for x in np.asarray(setting)]


def load_config(path: str | None) -> RunConfig:
    """RunConfig from a JSON file; defaults when no path is given."""
    if path is None:
        return RunConfig()
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None

    try:
        src = SourceConfig(**raw.get("source", {"alpha": math.pi / 6}))
        scan_raw = dict(raw.get("scan", {}))
        for key in ("conditioning", "generator", "readout"):
            if key in scan_raw:
                scan_raw[key] = _parse_setting(scan_raw[key])
        if "thetas" in scan_raw:
            scan_raw["thetas"] = tuple(float(t) for t in scan_raw["thetas"])
        scan = ScanConfig(**scan_raw)
        kwargs = {}
        for key in ("alpha_grid", "emit"):
            if key in raw:
                kwargs[key] = tuple(raw[key])
        for key in ("output_dir", "mc_runs", "noiseless"):
            if key in raw:
                kwargs[key] = raw[key]
        return RunConfig(source=src, scan=scan, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config: {exc}") from None


def _config_to_json(config: RunConfig) -> dict:
    return {
        "source": dataclasses.asdict(config.source),
        "scan": {
            "thetas": list(config.scan.thetas),
            "shots_per_setting": config.scan.shots_per_setting,
            "seed": int(config.scan.seed),
            "conditioning": _setting_to_json(config.scan.conditioning),
            "generator": _setting_to_json(config.scan.generator),
            "readout": _setting_to_json(config.scan.readout),
        },
        "alpha_grid": list(config.alpha_grid),
        "output_dir": config.output_dir,
        "emit": list(config.emit),
        "mc_runs": config.mc_runs,
        "noiseless": config.noiseless,
    }


def _fmt(x: float) -> str:
    return f"{float(x):.9g}"


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: Path, header: list[str], rows: list[list[float]]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(x) for x in row) for row in rows)
    _write_atomic(path, "\n".join(lines) + "\n")


def _row_seeds(master_seed: int, row: int, n: int = 4) -> list[int]:
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(row,))
    return [int(s) for s in ss.generate_state(n, dtype=np.uint64)]


def _fisher_simulated(state, scan: ScanConfig, mc_runs: int, seed: int):
    """(central estimate, MC sigma) of the fit-based conditional Fisher estimate."""
    cfg = dataclasses.replace(scan, seed=seed)
    central = expsim.conditional_fisher_estimate(state, cfg)
    probs = expsim.scan_probabilities(state, cfg)

    def run(run_seed: int) -> float:
        data = expsim.sample_counts(probs, cfg.shots_per_setting, run_seed)
        fits = [expsim.fit_fringe(data, d) for d in range(2)]
        return float(np.dot(probs.p_alice, [expsim.max_fisher(f) for f in fits]))

    mc = expsim.monte_carlo_errors(run, n_runs=mc_runs, seed=seed)
    return central, mc


def cmd_sweep(config: RunConfig) -> int:
    out = Path(config.output_dir)
    shots = config.scan.shots_per_setting
    simulate = not config.noiseless

    rows_3a, rows_3b, rows_4b, report_rows = [], [], [], []
    for i, alpha in enumerate(config.alpha_grid):
        state = prepare(dataclasses.replace(config.source, alpha=alpha))
        s_rep = s_witness(state.rho)
        r_rep = reid_check(state.rho)
        y_rep = yfg_check(
            state.rho, config.scan.conditioning, config.scan.generator
        )

        row3a = [alpha, s_rep.value, s_rep.bound]
        row3b = [alpha, r_rep.value, r_rep.bound]
        row4b = [alpha, y_rep.bound, y_rep.value]
        entry = {
            "alpha_rad": alpha,
            "success_probability": state.success_probability,
            "ideal": {
                "S": s_rep.to_dict(),
                "Reid": r_rep.to_dict(),
                "YFG": y_rep.to_dict(),
            },
        }

        if simulate:
            seeds = _row_seeds(config.scan.seed, i)
            s_sim = expsim.simulated_s_witness(state.rho, shots, seeds[0])
            r_sim = expsim.simulated_reid_check(state.rho, shots, seeds[1])
            fisher_central, fisher_mc = _fisher_simulated(
                state, config.scan, config.mc_runs, seeds[2]
            )
            rng = np.random.default_rng(seeds[3])
            e_yy, s_yy = expsim.measure_correlator(
                state.rho, AXIS_Y, config.scan.generator, shots, rng
            )
            row3a += [s_sim.value, s_sim.sigma_value]
            row3b += [r_sim.value, r_sim.sigma_value, r_sim.bound, r_sim.sigma_bound]
            row4b += [
                4.0 * (1.0 - e_yy),
                4.0 * s_yy,
                fisher_central.value,
                fisher_mc.sigma,
            ]
            entry["simulated"] = {
                "S": s_sim.to_dict(),
                "Reid": r_sim.to_dict(),
                "fisher_cond": fisher_central.value,
                "fisher_cond_sigma": fisher_mc.sigma,
                "four_var_est": 4.0 * (1.0 - e_yy),
                "four_var_est_sigma": 4.0 * s_yy,
            }
        rows_3a.append(row3a)
        rows_3b.append(row3b)
        rows_4b.append(row4b)
        report_rows.append(entry)

    sim3a = ["s_sim", "s_sigma"] if simulate else []
    sim3b = (
        ["reid_product", "reid_product_sigma", "reid_bound", "reid_bound_sigma"]
        if simulate
        else []
    )
    sim4b = (
        ["four_var_est", "four_var_est_sigma", "fisher_cond", "fisher_cond_sigma"]
        if simulate
        else []
    )
    if "fig3a" in config.emit:
        _write_csv(out / "fig3a.csv", ["alpha_rad", "s_ideal", "bound"] + sim3a, rows_3a)
    if "fig3b" in config.emit:
        _write_csv(
            out / "fig3b.csv",
            ["alpha_rad", "reid_product_ideal", "reid_bound_ideal"] + sim3b,
            rows_3b,
        )
    if "fig4b" in config.emit:
        _write_csv(
            out / "fig4b.csv",
            ["alpha_rad", "four_var_est_ideal", "fisher_cond_ideal"] + sim4b,
            rows_4b,
        )
    if "report" in config.emit:
        doc = {"config": _config_to_json(config), "rows": report_rows}
        _write_atomic(out / "sweep_report.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_fisher_scan(config: RunConfig, alpha: float) -> int:
    out = Path(config.output_dir)
    state = prepare(dataclasses.replace(config.source, alpha=alpha))
    scan = config.scan
    probs = expsim.scan_probabilities(state, scan)
    thetas = probs.thetas

    if config.noiseless:
        fits = [expsim.fit_cosine(thetas, probs.p_first[:, d]) for d in range(2)]
        curves = [
            [expsim.fisher_from_fit(fits[d], t) for t in thetas] for d in range(2)
        ]
        header = ["theta_deg", "f_d", "f_a"]
        rows = [
            [math.degrees(t), curves[0][i], curves[1][i]] for i, t in enumerate(thetas)
        ]
        sigmas = None
    else:
        data = expsim.sample_counts(probs, scan.shots_per_setting, scan.seed)
        fits = [expsim.fit_fringe(data, d) for d in range(2)]
        curves = [
            [expsim.fisher_from_fit(fits[d], t) for t in thetas] for d in range(2)
        ]

        samples = {0: [], 1: []}
        for i in range(config.mc_runs):
            run_data = expsim.sample_counts(
                probs, scan.shots_per_setting, int(scan.seed) ^ (i + 1)
            )
            for d in range(2):
                try:
                    fit = expsim.fit_fringe(run_data, d)
                except expsim.UnfittableError:
                    continue
                samples[d].append([expsim.fisher_from_fit(fit, t) for t in thetas])
        sigmas = [
            np.std(np.asarray(samples[d]), axis=0, ddof=1) if len(samples[d]) > 1 else np.zeros(len(thetas))
            for d in range(2)
        ]
        header = ["theta_deg", "f_d", "f_d_sigma", "f_a", "f_a_sigma"]
        rows = [
            [math.degrees(t), curves[0][i], sigmas[0][i], curves[1][i], sigmas[1][i]]
            for i, t in enumerate(thetas)
        ]

    _write_csv(out / "fig4a.csv", header, rows)
    doc = {
        "config": _config_to_json(config),
        "alpha_rad": alpha,
        "p_alice": _setting_to_json(probs.p_alice),
        "fits": {
            label: {
                "v": fits[d].v,
                "theta0": fits[d].theta0,
                "residual_rms": fits[d].residual_rms,
                "converged": fits[d].converged,
            }
            for d, label in enumerate(expsim.ALICE_LABELS)
        },
        "max_fisher": [expsim.max_fisher(f) for f in fits],
    }
    _write_atomic(out / "fisher_scan_report.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_witness(config: RunConfig, alpha: float) -> int:
    out = Path(config.output_dir)
    state = prepare(dataclasses.replace(config.source, alpha=alpha))
    scan = config.scan

    var_opt, var_setting = optimize_variance(state.rho, scan.generator)
    fisher_opt, fisher_setting = optimize_fisher(state.rho, scan.generator)

    doc = {
        "config": _config_to_json(config),
        "alpha_rad": alpha,
        "state": {
            "success_probability": state.success_probability,
            "purity": purity(state.rho),
        },
        "ideal": {
            "S": s_witness(state.rho).to_dict(),
            "Reid": reid_check(state.rho).to_dict(),
            "YFG": yfg_check(state.rho, scan.conditioning, scan.generator).to_dict(),
            "optimized": {
                "conditional_variance_min": var_opt,
                "conditional_variance_setting": _setting_to_json(var_setting),
                "conditional_fisher_max": fisher_opt,
                "conditional_fisher_setting": _setting_to_json(fisher_setting),
            },
        },
    }

    if not config.noiseless:
        seeds = _row_seeds(scan.seed, 0)
        shots = scan.shots_per_setting
        s_sim = expsim.simulated_s_witness(state.rho, shots, seeds[0])
        r_sim = expsim.simulated_reid_check(state.rho, shots, seeds[1])
        y_sim, _ = expsim.simulated_yfg_check(
            state, dataclasses.replace(scan, seed=seeds[2]), n_runs=config.mc_runs
        )
        data = expsim.sample_counts(
            expsim.scan_probabilities(state, scan), shots, seeds[3]
        )
        fits = {
            label: expsim.fit_fringe(data, d)
            for d, label in enumerate(expsim.ALICE_LABELS)
        }
        doc["simulated"] = {
            "S": s_sim.to_dict(),
            "Reid": r_sim.to_dict(),
            "YFG": y_sim.to_dict(),
            "fits": {
                label: {"v": f.v, "theta0": f.theta0, "v_sigma": f.v_sigma}
                for label, f in fits.items()
            },
        }

    text = json.dumps(doc, indent=2, sort_keys=True)
    _write_atomic(out / "witness_report.json", text + "\n")
    print(text)
    return 0


def cmd_validate() -> int:
    results = run_all_checks()
    failed = [r for r in results if not r.passed]
    for res in results:
        line = f"[{'PASS' if res.passed else 'FAIL'}] {res.name}" + (
            f": {res.detail}" if res.detail else ""
        )
        print(line, file=sys.stderr if not res.passed else sys.stdout)
    return 1 if failed else 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steerlab",
        description="Steering tests on simulated two-photon states",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_alpha in (
        ("sweep", False),
        ("fisher-scan", True),
        ("witness", True),
        ("validate", False),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", default=None)
        p.add_argument("--seed", type=int, default=None, metavar="N")
        p.add_argument("--shots", type=int, default=None, metavar="N")
        p.add_argument("--out", default=None, metavar="DIR")
        p.add_argument("--noiseless", action="store_true")
        if needs_alpha:
            p.add_argument("--alpha", type=float, default=None, metavar="RAD")
    return parser


def _apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    scan = config.scan
    if args.seed is not None:
        scan = dataclasses.replace(scan, seed=args.seed)
    if args.shots is not None:
        scan = dataclasses.replace(scan, shots_per_setting=args.shots)
    kwargs = {"scan": scan}
    if args.out is not None:
        kwargs["output_dir"] = args.out
    if args.noiseless:
        kwargs["noiseless"] = True
    return dataclasses.replace(config, **kwargs)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _apply_overrides(load_config(args.config), args)
        if args.command == "validate":
            return cmd_validate()
        if args.command == "sweep":
            return cmd_sweep(config)
        alpha = args.alpha if args.alpha is not None else config.source.alpha
        if args.command == "fisher-scan":
            return cmd_fisher_scan(config, alpha)
        return cmd_witness(config, alpha)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
