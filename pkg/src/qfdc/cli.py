"""Command-line front end: ``qfdc calibrate | run | validate``.

Configuration is a single JSON document (schema documented in the README);
unknown keys are rejected so typos fail loudly. Scenario runs write one CSV
per figure with a fixed column schema and full round-trip float precision.

Exit codes: 0 success, 1 usage/configuration error, 2 model infeasibility.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .calibration import (
    CalibrationContext,
    CalibrationResult,
    CalibrationTargets,
    calibrate,
    calibrated_chain,
    residuals_within_tolerance,
)
from .detector import DetectorSpec
from .experiment import (
    DEFAULT_GATES_PER_POINT,
    DEFAULT_N_PHI,
    DEFAULT_N_SLOTS,
    ChainParams,
    ScanResult,
    run_fig4a,
    run_fig4b,
    run_fig5,
    run_fig6,
)

OUTPUT_DIR_ENV = "QFDC_OUTPUT_DIR"

SCENARIOS = ("fig4a", "fig4b", "fig5", "fig6")

DEFAULT_SEED = 20260810

DEFAULT_POWER_GRID_MW = [0.0, 3.0, 6.0, 9.0, 12.0, 15.0, 18.0, 21.0, 24.0, 27.0]
DEFAULT_FIG4B_MU_GRID = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 125.0]
DEFAULT_FIG6_MU_GRID = [0.01, 0.03, 0.09, 0.2, 0.45, 0.7, 1.5, 3.0, 7.0, 15.0, 45.0]

CSV_SCHEMAS = {
    "fig4a": ["power_mw", "efficiency", "eff_sigma", "noise_per_gate", "noise_sigma"],
    "fig4b": ["mu", "p_raw", "sigma", "p_subtracted", "sigma", "fit_line"],
    "fig5": ["phi_rad", "rate_per_s", "sigma"],
    "fig6": ["mu", "v_raw", "sigma", "v_sub", "sigma", "v_analytic"],
}


class ConfigError(Exception):
    """Configuration file problem; the message names the offending key."""


def _check_keys(section: dict, allowed, path: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}{key!r}")


def _number(section: dict, key: str, default, path: str, minimum=None):
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key {path}{key!r} must be a number")
    if minimum is not None and value < minimum:
        raise ConfigError(f"key {path}{key!r} must be >= {minimum}")
    return value


def _grid(section: dict, key: str, default, path: str) -> list[float]:
    values = section.get(key, default)
    if not isinstance(values, list) or not values or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
    ):
        raise ConfigError(f"key {path}{key!r} must be a non-empty list of numbers")
    return [float(v) for v in values]


@dataclass
class ScenarioSettings:
    power_mw: list[float] = field(default_factory=lambda: list(DEFAULT_POWER_GRID_MW))
    fig4a_mu: float = 125.0
    fig4a_gates: int = DEFAULT_GATES_PER_POINT
    fig4b_mu: list[float] = field(default_factory=lambda: list(DEFAULT_FIG4B_MU_GRID))
    fig4b_gates: int = 100_000_000
    fig5_mu: float = 0.7
    fig5_n_phi: int = DEFAULT_N_PHI
    fig5_gates: int = DEFAULT_GATES_PER_POINT
    fig5_control: bool = False
    fig6_mu: list[float] = field(default_factory=lambda: list(DEFAULT_FIG6_MU_GRID))
    fig6_n_phi: int = DEFAULT_N_PHI
    fig6_gates: int = DEFAULT_GATES_PER_POINT


@dataclass
class ScenarioConfig:
    """Validated run description: chain source, grids, seed, output."""

    seed: int = DEFAULT_SEED
    n_slots: int = DEFAULT_N_SLOTS
    workers: int = 1
    output_dir: str | None = None
    scenario: str | None = None
    targets: CalibrationTargets = field(default_factory=CalibrationTargets)
    context: CalibrationContext = field(default_factory=CalibrationContext)
    chain_params: dict[str, float] | None = None
    chain_from_report: str | None = None
    settings: ScenarioSettings = field(default_factory=ScenarioSettings)


_TOP_KEYS = {
    "seed", "n_slots", "workers", "output_dir", "scenario",
    "targets", "apparatus", "chain", "chain_from_report", "scenarios",
}
_TARGET_KEYS = {f.name for f in fields(CalibrationTargets)}
_APPARATUS_KEYS = {
    "eta_nor_per_w", "leak_fraction", "oob_suppression_db",
    "signal_wavelength_nm", "pump_wavelength_nm", "detector",
}
_DETECTOR_KEYS = {"efficiency", "dark_prob_per_gate", "gate_rate_hz"}
_CHAIN_KEYS = {
    "system_transmission", "noise_coeff_beta",
    "transmission_product", "intrinsic_visibility_v0",
}
_SCENARIO_SECTION_KEYS = {
    "fig4a": {"power_mw", "mu", "gates_per_point"},
    "fig4b": {"mu", "gates_per_point"},
    "fig5": {"mu", "n_phi", "gates_per_point", "control"},
    "fig6": {"mu", "n_phi", "gates_per_point"},
}


def load_config(path: str | Path) -> ScenarioConfig:
    """Parse and fully validate a configuration file."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(raw, _TOP_KEYS, "")

    cfg = ScenarioConfig()
    cfg.seed = int(_number(raw, "seed", DEFAULT_SEED, "", minimum=0))
    cfg.n_slots = int(_number(raw, "n_slots", DEFAULT_N_SLOTS, "", minimum=2))
    cfg.workers = int(_number(raw, "workers", 1, "", minimum=1))

    output_dir = raw.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError("key 'output_dir' must be a string")
    cfg.output_dir = output_dir

    scenario = raw.get("scenario")
    if scenario is not None and scenario not in SCENARIOS:
        raise ConfigError(f"key 'scenario' must be one of {SCENARIOS}, got {scenario!r}")
    cfg.scenario = scenario

    targets_raw = raw.get("targets", {})
    if not isinstance(targets_raw, dict):
        raise ConfigError("key 'targets' must be an object")
    _check_keys(targets_raw, _TARGET_KEYS, "targets.")
    try:
        cfg.targets = replace(CalibrationTargets(), **targets_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid targets: {exc}") from exc

    apparatus_raw = raw.get("apparatus", {})
    if not isinstance(apparatus_raw, dict):
        raise ConfigError("key 'apparatus' must be an object")
    _check_keys(apparatus_raw, _APPARATUS_KEYS, "apparatus.")
    detector_raw = apparatus_raw.get("detector", {})
    if not isinstance(detector_raw, dict):
        raise ConfigError("key 'apparatus.detector' must be an object")
    _check_keys(detector_raw, _DETECTOR_KEYS, "apparatus.detector.")
    try:
        detector = replace(DetectorSpec(), **detector_raw)
        context_kwargs = {k: v for k, v in apparatus_raw.items() if k != "detector"}
        cfg.context = replace(CalibrationContext(), detector=detector, **context_kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid apparatus: {exc}") from exc

    chain_raw = raw.get("chain")
    if chain_raw is not None:
        if not isinstance(chain_raw, dict):
            raise ConfigError("key 'chain' must be an object")
        _check_keys(chain_raw, _CHAIN_KEYS, "chain.")
        missing = _CHAIN_KEYS - set(chain_raw)
        if missing:
            raise ConfigError(f"key 'chain' is missing {sorted(missing)}")
        cfg.chain_params = {k: _number(chain_raw, k, None, "chain.") for k in _CHAIN_KEYS}

    report_path = raw.get("chain_from_report")
    if report_path is not None and not isinstance(report_path, str):
        raise ConfigError("key 'chain_from_report' must be a string path")
    cfg.chain_from_report = report_path

    scenarios_raw = raw.get("scenarios", {})
    if not isinstance(scenarios_raw, dict):
        raise ConfigError("key 'scenarios' must be an object")
    _check_keys(scenarios_raw, set(_SCENARIO_SECTION_KEYS), "scenarios.")
    s = cfg.settings
    for name, section in scenarios_raw.items():
        if not isinstance(section, dict):
            raise ConfigError(f"key 'scenarios.{name}' must be an object")
        prefix = f"scenarios.{name}."
        _check_keys(section, _SCENARIO_SECTION_KEYS[name], prefix)
        if name == "fig4a":
            s.power_mw = _grid(section, "power_mw", s.power_mw, prefix)
            s.fig4a_mu = float(_number(section, "mu", s.fig4a_mu, prefix, minimum=0))
            s.fig4a_gates = int(_number(section, "gates_per_point", s.fig4a_gates, prefix, minimum=1))
        elif name == "fig4b":
            s.fig4b_mu = _grid(section, "mu", s.fig4b_mu, prefix)
            s.fig4b_gates = int(_number(section, "gates_per_point", s.fig4b_gates, prefix, minimum=1))
        elif name == "fig5":
            s.fig5_mu = float(_number(section, "mu", s.fig5_mu, prefix, minimum=0))
            s.fig5_n_phi = int(_number(section, "n_phi", s.fig5_n_phi, prefix, minimum=4))
            s.fig5_gates = int(_number(section, "gates_per_point", s.fig5_gates, prefix, minimum=1))
            control = section.get("control", s.fig5_control)
            if not isinstance(control, bool):
                raise ConfigError(f"key {prefix}'control' must be a boolean")
            s.fig5_control = control
        else:
            s.fig6_mu = _grid(section, "mu", s.fig6_mu, prefix)
            s.fig6_n_phi = int(_number(section, "n_phi", s.fig6_n_phi, prefix, minimum=4))
            s.fig6_gates = int(_number(section, "gates_per_point", s.fig6_gates, prefix, minimum=1))
    return cfg


def _chain_from_config(cfg: ScenarioConfig, with_interferometer: bool) -> ChainParams:
    """Resolve the four chain parameters: explicit > report file > calibration."""
    if cfg.chain_params is not None:
        fitted = cfg.chain_params
    elif cfg.chain_from_report is not None:
        try:
            report = json.loads(Path(cfg.chain_from_report).read_text())
            fitted = {k: float(report["fitted"][k]) for k in _CHAIN_KEYS}
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(
                f"cannot load chain parameters from report {cfg.chain_from_report!r}: {exc}"
            ) from exc
    else:
        result = calibrate(cfg.targets, cfg.context)
        if not result.feasible:
            raise ConfigError(
                f"calibration from the configured targets is infeasible: {result.message}"
            )
        fitted = result.fitted()
    result = CalibrationResult(**fitted)
    try:
        return calibrated_chain(result, cfg.targets, cfg.context, with_interferometer)
    except ValueError as exc:
        raise ConfigError(f"invalid chain parameters: {exc}") from exc


def _output_path(cfg: ScenarioConfig, out_arg: str | None, default_name: str) -> Path:
    if out_arg:
        return Path(out_arg)
    base = cfg.output_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    return Path(base) / default_name


def _format(value: float) -> str:
    return repr(float(value))


def _write_csv(path: Path, header: list[str], rows: list[list[float]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines += [",".join(_format(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _scan_rows(scenario: str, scan: ScanResult) -> list[list[float]]:
    n = len(scan.abscissa)
    if scenario == "fig4a":
        c = scan.columns
        return [
            [scan.abscissa[i], c["efficiency"][i], c["eff_sigma"][i],
             c["noise_per_gate"][i], c["noise_sigma"][i]]
            for i in range(n)
        ]
    if scenario == "fig4b":
        assert scan.raw is not None and scan.corrected is not None
        return [
            [scan.abscissa[i], scan.raw[i].p_click, scan.raw[i].sigma_p,
             scan.corrected[i].p, scan.corrected[i].sigma, scan.columns["fit_line"][i]]
            for i in range(n)
        ]
    if scenario == "fig5":
        return [
            [scan.abscissa[i], scan.columns["rate_per_s"][i], scan.columns["rate_sigma"][i]]
            for i in range(n)
        ]
    c = scan.columns
    return [
        [scan.abscissa[i], c["v_raw"][i], c["v_raw_sigma"][i],
         c["v_sub"][i], c["v_sub_sigma"][i], c["v_analytic"][i]]
        for i in range(n)
    ]


def run_scenario(
    scenario: str, cfg: ScenarioConfig, seed: int, control_override: bool = False
) -> ScanResult:
    s = cfg.settings
    if scenario == "fig4a":
        chain = _chain_from_config(cfg, with_interferometer=False)
        return run_fig4a(chain, [p * 1e-3 for p in s.power_mw], mu=s.fig4a_mu,
                         gates_per_point=s.fig4a_gates, seed=seed,
                         n_slots=cfg.n_slots, workers=cfg.workers)
    if scenario == "fig4b":
        chain = _chain_from_config(cfg, with_interferometer=False)
        return run_fig4b(chain, s.fig4b_mu, gates_per_point=s.fig4b_gates,
                         seed=seed, n_slots=cfg.n_slots, workers=cfg.workers)
    if scenario == "fig5":
        control = s.fig5_control or control_override
        chain = _chain_from_config(cfg, with_interferometer=True)
        phis = np.linspace(0.0, 2.0 * math.pi, s.fig5_n_phi, endpoint=False)
        return run_fig5(chain, s.fig5_mu, phis, gates_per_point=s.fig5_gates,
                        seed=seed, n_slots=cfg.n_slots, workers=cfg.workers,
                        control=control)
    chain = _chain_from_config(cfg, with_interferometer=True)
    return run_fig6(chain, s.fig6_mu, n_phi=s.fig6_n_phi,
                    gates_per_point=s.fig6_gates, seed=seed,
                    n_slots=cfg.n_slots, workers=cfg.workers)


def cmd_validate(args) -> int:
    try:
        load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{args.config}: OK")
    return 0


def cmd_calibrate(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    result = calibrate(cfg.targets, cfg.context)
    ok = result.feasible and residuals_within_tolerance(result, cfg.targets)
    report = {
        "fitted": result.fitted(),
        "predictions": result.predictions,
        "residuals": result.residuals,
        "feasible": result.feasible,
        "within_tolerance": ok,
        "message": result.message,
        "targets": {f.name: getattr(cfg.targets, f.name) for f in fields(cfg.targets)},
    }
    path = _output_path(cfg, args.out, "calibration.json")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(report, indent=2) + "\n")
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return 1
    status = "ok" if ok else ("infeasible" if not result.feasible else "out of tolerance")
    print(f"calibration {status}; report written to {path}")
    for name, value in result.residuals.items():
        print(f"  residual {name}: {value:+.3e}")
    if result.message:
        print(f"  note: {result.message}")
    return 0 if ok else 2


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.no_interferometer and args.scenario != "fig5":
            raise ConfigError("--no-interferometer is only meaningful for fig5")
        seed = cfg.seed if args.seed is None else args.seed
        scan = run_scenario(args.scenario, cfg, seed, control_override=args.no_interferometer)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    path = _output_path(cfg, args.out, f"{args.scenario}.csv")
    try:
        _write_csv(path, CSV_SCHEMAS[args.scenario], _scan_rows(args.scenario, scan))
    except OSError as exc:
        print(f"error: cannot write CSV: {exc}", file=sys.stderr)
        return 1
    print(f"{args.scenario}: {len(scan.abscissa)} points written to {path}")
    for name, value in scan.fit.items():
        print(f"  {name}: {value:.6g}")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qfdc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_cal = sub.add_parser("calibrate", help="fit chain parameters to the configured targets")
    p_cal.add_argument("config")
    p_cal.add_argument("--out", help="report path (default <output_dir>/calibration.json)")
    p_cal.set_defaults(func=cmd_calibrate)

    p_run = sub.add_parser("run", help="run a scenario and write its CSV")
    p_run.add_argument("scenario", choices=SCENARIOS)
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", help="CSV path (default <output_dir>/<scenario>.csv)")
    p_run.add_argument("--no-interferometer", action="store_true",
                       help="fig5 control run with the interferometer removed")
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate", help="check a configuration file")
    p_val.add_argument("config")
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
