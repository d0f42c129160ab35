"""Command-line frontend.

Runs are described by a TOML config with sections [medium], [grid],
[scheme], [scenario], [output] (plus [sweep] for parameter sweeps); every
run writes back its fully resolved configuration so the record can be
re-executed bit-identically.  Subcommands: run, reverse, predict, sweep,
converge.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 sweep finished with failed rows.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import diagnostics, scenarios
from .medium import Medium, Material, law_from_config, ly_medium, c_hat, c_eff, s_eff, s_eff_relative
from .solver import BlowUpError, DegenerateWaveError, SolverConfig, write_snapshot

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PARTIAL = 4


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


_SECTION_KEYS = {
    "medium": {"z_b", "period", "layers"},
    "grid": {"cells_per_layer", "x_lo", "x_hi"},
    "scheme": {"name", "limiter", "cfl", "order", "weno_cfl"},
    "scenario": {"name", "t_end", "entropy_interval", "snapshot_interval",
                 "amplitude", "width", "center", "z_b", "sigma_l", "sigma_r",
                 "transition_width", "x_jump", "t_forward", "eps0", "tau",
                 "x0", "T", "t_early", "grids", "domain_length", "rebase_time"},
    "output": {"dir"},
    "sweep": {"rho_b", "k_b", "pairing", "sigma_l", "t_forward",
              "shock_tol", "cells_per_layer"},
}

_LAYER_KEYS = {"width", "rho", "law", "K", "gamma", "beta"}


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")
    validate_config(cfg, str(path))
    return cfg


def validate_config(cfg: dict, where: str = "config"):
    for section, body in cfg.items():
        if section not in _SECTION_KEYS:
            raise ConfigError(f"{where}: unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"{where}: [{section}] must be a table")
        for key in body:
            if key not in _SECTION_KEYS[section]:
                raise ConfigError(f"{where}: unknown key {section}.{key}")
    for i, layer in enumerate(cfg.get("medium", {}).get("layers", [])):
        if not isinstance(layer, dict):
            raise ConfigError(f"{where}: medium.layers[{i}] must be a table")
        for key in layer:
            if key not in _LAYER_KEYS:
                raise ConfigError(f"{where}: unknown key medium.layers[{i}].{key}")


def medium_from_config(cfg: dict) -> Medium:
    med = cfg.get("medium", {})
    period = float(med.get("period", 1.0))
    if "layers" in med:
        if "z_b" in med:
            raise ConfigError("medium: give either z_b or layers, not both")
        layers = []
        for i, spec in enumerate(med["layers"]):
            spec = dict(spec)
            try:
                width = float(spec.pop("width"))
                rho = float(spec.pop("rho"))
                law_name = spec.pop("law")
            except KeyError as exc:
                raise ConfigError(f"medium.layers[{i}]: missing key {exc}")
            try:
                law = law_from_config(law_name, spec)
                layers.append((width, Material(rho, law)))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"medium.layers[{i}]: {exc}")
        try:
            return Medium(period, tuple(layers))
        except ValueError as exc:
            raise ConfigError(f"medium: {exc}")
    if "z_b" in med:
        return ly_medium(float(med["z_b"]), period=period)
    raise ConfigError("medium: need either z_b or a layers list")


def medium_to_config(medium: Medium) -> dict:
    layers = []
    for lay in medium.layers:
        entry = {"width": lay.width, "rho": lay.material.rho,
                 "law": lay.material.law.name}
        entry.update(lay.material.law.config_params)
        layers.append(entry)
    return {"period": medium.period, "layers": layers}


def solver_config_from(cfg: dict) -> SolverConfig:
    sch = cfg.get("scheme", {})
    try:
        return SolverConfig(cfl_target=float(sch.get("cfl", 0.9)),
                            limiter=sch.get("limiter", "vanleer"),
                            order=int(sch.get("order", 2)))
    except ValueError as exc:
        raise ConfigError(f"scheme: {exc}")


def scheme_name_from(cfg: dict) -> str:
    name = cfg.get("scheme", {}).get("name", scenarios.SCHEME_WAVE_PROP)
    if name not in (scenarios.SCHEME_WAVE_PROP, scenarios.SCHEME_WENO):
        raise ConfigError(f"scheme.name must be '{scenarios.SCHEME_WAVE_PROP}' "
                          f"or '{scenarios.SCHEME_WENO}', got {name!r}")
    return name


def scenario_from_config(cfg: dict) -> scenarios.Scenario:
    sc = cfg.get("scenario", {})
    name = sc.get("name")
    if name is None:
        raise ConfigError("scenario: missing name")
    cpl = int(cfg.get("grid", {}).get("cells_per_layer", 24))
    try:
        if name == "gaussian":
            medium = medium_from_config(cfg)
            scen = scenarios.gaussian_pulse_scenario(
                medium,
                amplitude=float(sc.get("amplitude", 0.2)),
                width=float(sc.get("width", 5.0)),
                center=float(sc.get("center", 0.0)),
                t_end=float(sc.get("t_end", 250.0)))
        elif name == "ly_stegoton":
            z_b = sc.get("z_b", cfg.get("medium", {}).get("z_b"))
            if z_b is None:
                raise ConfigError("ly_stegoton needs scenario.z_b or medium.z_b")
            scen = scenarios.ly_stegoton_scenario(
                float(z_b), cells_per_layer=cpl,
                t_end=float(sc.get("t_end", 200.0)),
                domain_length=float(sc.get("domain_length", 200.0)),
                rebase_time=float(sc.get("rebase_time", 40.0)),
                config=solver_config_from(cfg))
        elif name == "smooth_riemann":
            medium = medium_from_config(cfg)
            scen = scenarios.smooth_riemann_scenario(
                medium, sigma_l=float(sc["sigma_l"]),
                sigma_r=float(sc.get("sigma_r", 0.0)),
                transition_width=sc.get("transition_width"),
                x_jump=float(sc.get("x_jump", 30.0)),
                t_forward=float(sc.get("t_forward", 100.0)))
        elif name == "effective_shock":
            medium = medium_from_config(cfg)
            scen = scenarios.effective_shock_scenario(
                medium, sigma_l=float(sc["sigma_l"]),
                x_jump=float(sc.get("x_jump", 30.0)),
                t_end=float(sc.get("t_end", 100.0)))
        elif name == "rarefaction_reversal":
            medium = medium_from_config(cfg)
            scen = scenarios.rarefaction_reversal_scenario(
                medium, eps0=float(sc["eps0"]), tau=float(sc["tau"]),
                x0=float(sc["x0"]), cells_per_layer=cpl,
                config=solver_config_from(cfg))
        else:
            raise ConfigError(f"scenario: unknown name {name!r}")
    except KeyError as exc:
        raise ConfigError(f"scenario {name!r}: missing key {exc}")
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"scenario {name!r}: {exc}")

    grid_sec = cfg.get("grid", {})
    if "x_lo" in grid_sec or "x_hi" in grid_sec:
        from dataclasses import replace
        scen = replace(scen,
                       x_lo=float(grid_sec.get("x_lo", scen.x_lo)),
                       x_hi=float(grid_sec.get("x_hi", scen.x_hi)))
    if "t_end" in sc and name not in ("gaussian", "ly_stegoton", "effective_shock"):
        from dataclasses import replace
        scen = replace(scen, t_end=float(sc["t_end"]))
    return scen


# ---------------------------------------------------------------------------
# TOML emission (restricted to the value shapes this config uses)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isinf(v) or math.isnan(v):
            return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        r = repr(v)
        return r if ("." in r or "e" in r or "E" in r) else r + ".0"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, dict):
        inner = ", ".join(f"{k} = {_toml_value(val)}" for k, val in v.items())
        return "{" + inner + "}"
    raise TypeError(f"cannot serialise {type(v).__name__} to TOML")


def write_toml(path, cfg: dict):
    lines = []
    for section in sorted(cfg):
        lines.append(f"[{section}]")
        for key in sorted(cfg[section]):
            lines.append(f"{key} = {_toml_value(cfg[section][key])}")
        lines.append("")
    Path(path).write_text("\n".join(lines), encoding="utf-8")


def resolve_config(cfg: dict, args) -> dict:
    """Apply CLI overrides and fill defaults; returns the canonical record."""
    out = {sec: dict(body) for sec, body in cfg.items()}
    grid = out.setdefault("grid", {})
    if args.cells_per_layer is not None:
        grid["cells_per_layer"] = int(args.cells_per_layer)
    grid.setdefault("cells_per_layer", 24)
    scheme = out.setdefault("scheme", {})
    if args.scheme is not None:
        scheme["name"] = args.scheme
    if args.limiter is not None:
        scheme["limiter"] = args.limiter
    scheme.setdefault("name", scenarios.SCHEME_WAVE_PROP)
    scheme.setdefault("limiter", "vanleer")
    scheme.setdefault("cfl", 0.9)
    scheme.setdefault("order", 2)
    scheme.setdefault("weno_cfl", scenarios.highorder.DEFAULT_WENO_CFL)
    output = out.setdefault("output", {})
    if args.out is not None:
        output["dir"] = str(args.out)
    output.setdefault("dir", os.environ.get("STRATAWAVE_OUT", "out"))
    # Canonicalise the z_b medium shorthand into explicit layers, keeping
    # a scenario-level z_b so ly_stegoton records stay re-runnable.
    med = out.get("medium", {})
    scen = out.get("scenario", {})
    if "z_b" in med:
        if scen.get("name") == "ly_stegoton" and "z_b" not in scen:
            scen["z_b"] = float(med["z_b"])
        out["medium"] = medium_to_config(medium_from_config(out))
    validate_config(out, "resolved config")
    return out


# ---------------------------------------------------------------------------
# Subcommands


def _outdir(resolved) -> Path:
    path = Path(resolved["output"]["dir"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_run(resolved: dict) -> int:
    scen = scenario_from_config(resolved)
    cfg = solver_config_from(resolved)
    scheme = scheme_name_from(resolved)
    sc = resolved.get("scenario", {})
    t_end = float(sc.get("t_end", scen.t_end))
    entropy_interval = sc.get("entropy_interval", max(t_end / 500.0, 1e-12))
    snap_int = sc.get("snapshot_interval")
    if snap_int:
        n = int(math.floor(t_end / float(snap_int) + 1e-9))
        snapshot_times = [0.0] + [i * float(snap_int) for i in range(1, n + 1)]
    else:
        snapshot_times = [0.0, t_end]

    cpl = int(resolved["grid"]["cells_per_layer"])
    result = scenarios.run_scenario(
        scen, cells_per_layer=cpl, config=cfg, scheme=scheme,
        weno_cfl=float(resolved["scheme"]["weno_cfl"]), t_end=t_end,
        entropy_interval=float(entropy_interval),
        snapshot_times=snapshot_times)

    outdir = _outdir(resolved)
    write_toml(outdir / "run_config.toml", resolved)
    result.entropy.write_csv(outdir / "entropy.csv")
    with open(outdir / "snapshots.csv", "w", encoding="utf-8") as fh:
        fh.write("index,t,path\n")
        for i, (t, state) in enumerate(result.snapshots):
            name = f"snapshot_{i:04d}.csv"
            write_snapshot(outdir / name, result.grid, state)
            fh.write(f"{i},{t:.17g},{name}\n")
    print(f"run complete: t={result.final.t:.17g}, wrote {len(result.snapshots)} "
          f"snapshots to {outdir}")
    return EXIT_OK


def _reversal_rows(resolved: dict, grids) -> list:
    scen = scenario_from_config(resolved)
    cfg = solver_config_from(resolved)
    scheme = scheme_name_from(resolved)
    sc = resolved.get("scenario", {})
    T = sc.get("T")
    if T is None:
        raise ConfigError("scenario: reversal needs key T")
    t_early = sc.get("t_early")
    rows = []
    for n in grids:
        rep = diagnostics.reversal_experiment(
            scen, float(T), cells_per_layer=int(n), config=cfg, scheme=scheme,
            t_early=float(t_early) if t_early is not None else None)
        rows.append(rep)
    return rows


def cmd_reverse(resolved: dict) -> int:
    cpl = int(resolved["grid"]["cells_per_layer"])
    rows = _reversal_rows(resolved, [cpl])
    outdir = _outdir(resolved)
    write_toml(outdir / "run_config.toml", resolved)
    table = diagnostics.convergence_rates([(cpl, rows[0].discrepancy)])
    table.write_csv(outdir / "reversal.csv",
                    extra={cpl: (rows[0].entropy_early, rows[0].entropy_late)})
    rep = rows[0]
    print(f"T={rep.T:g} N={rep.cells_per_layer} E={rep.discrepancy:.6e} "
          f"dS={rep.delta_entropy:.3e}")
    return EXIT_OK


def cmd_converge(resolved: dict) -> int:
    sc = resolved.get("scenario", {})
    grids = sc.get("grids")
    if not grids:
        raise ConfigError("scenario: converge needs key grids = [N1, N2, ...]")
    grids = [int(n) for n in grids]
    rows = _reversal_rows(resolved, grids)
    table = diagnostics.convergence_rates(
        [(n, rep.discrepancy) for n, rep in zip(grids, rows)])
    outdir = _outdir(resolved)
    write_toml(outdir / "run_config.toml", resolved)
    table.write_csv(outdir / "reversal.csv",
                    extra={n: (rep.entropy_early, rep.entropy_late)
                           for n, rep in zip(grids, rows)})
    for n, e, rate in table.rows:
        rate_s = f"{rate:.2f}" if rate is not None else "-"
        print(f"N={n:<5d} E={e:.6e}  rate={rate_s}")
    return EXIT_OK


def cmd_predict(resolved: dict, sigma_l, sigma_r) -> int:
    medium = medium_from_config(resolved)
    sc = resolved.get("scenario", {})
    if sigma_l is None:
        sigma_l = sc.get("sigma_l")
    if sigma_l is None:
        raise ConfigError("predict needs sigma_l (flag --sigma-l or scenario.sigma_l)")
    sigma_l = float(sigma_l)
    sigma_r = float(sc.get("sigma_r", 0.0) if sigma_r is None else sigma_r)
    ch = c_hat(medium, sigma_r)
    ce = c_eff(medium, sigma_r)
    se = s_eff(medium, sigma_l, sigma_r)
    rel = s_eff_relative(medium, sigma_l, sigma_r)
    verdict = "shock" if rel > 1.0 else "no shock"
    print(f"c_hat   = {ch:.17g}")
    print(f"c_eff   = {ce:.17g}")
    print(f"s_eff   = {se:.17g}")
    print(f"S_eff   = {rel:.17g}")
    print(f"verdict = {verdict}")
    return EXIT_OK


def cmd_sweep(resolved: dict, workers: int) -> int:
    sw = resolved.get("sweep", {})
    rho_b = sw.get("rho_b", [1.5, 2.0, 4.0])
    k_b = sw.get("k_b", rho_b)
    sigma_l = sw.get("sigma_l", [0.1, 0.5, 1.0, 2.0, 4.0])
    pairing = sw.get("pairing", "zip")
    pairs = scenarios.sweep_material_pairs(rho_b, k_b, pairing)
    cpl = int(sw.get("cells_per_layer", resolved["grid"]["cells_per_layer"]))
    result = scenarios.seff_sweep(
        pairs, sigma_l, cells_per_layer=cpl,
        config=solver_config_from(resolved),
        t_forward=float(sw.get("t_forward", 100.0)),
        shock_tol=float(sw.get("shock_tol", scenarios.DEFAULT_SWEEP_SHOCK_TOL)),
        scheme=scheme_name_from(resolved), workers=workers)
    outdir = _outdir(resolved)
    write_toml(outdir / "run_config.toml", resolved)
    result.write_csv(outdir / "sweep.csv")
    n_fail = sum(1 for r in result.rows if r.error is not None)
    agree = sum(1 for r in result.rows
                if r.error is None and r.shock == (r.s_eff_rel > 1.0))
    print(f"sweep: {len(result.rows)} rows, {agree} agree with S_eff>1, "
          f"{n_fail} failed -> {outdir / 'sweep.csv'}")
    if n_fail:
        for r in result.rows:
            if r.error is not None:
                print(f"  failed: rho_B={r.rho_b} K_B={r.k_b} "
                      f"sigma_l={r.sigma_l}: {r.error}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stratawave",
        description="1D nonlinear waves in layered periodic media: "
                    "simulation, time-reversal and entropy diagnostics, "
                    "and effective-medium shock prediction.")
    parser.add_argument("--config", type=Path, help="TOML run configuration")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker processes for sweeps")
    parser.add_argument("--scheme", choices=[scenarios.SCHEME_WAVE_PROP,
                                             scenarios.SCHEME_WENO])
    parser.add_argument("--limiter",
                        choices=["none", "minmod", "superbee", "mc", "vanleer"])
    parser.add_argument("--cells-per-layer", type=int)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", help="run a scenario, write snapshots and entropy")
    sub.add_parser("reverse", help="time-reversal experiment at one grid")
    sub.add_parser("converge", help="reversal convergence table over dyadic grids")
    pred = sub.add_parser("predict", help="effective-medium shock prediction")
    pred.add_argument("--sigma-l", type=float)
    pred.add_argument("--sigma-r", type=float)
    sub.add_parser("sweep", help="S_eff validation sweep")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else {}
        resolved = resolve_config(cfg, args)
        if args.command == "run":
            return cmd_run(resolved)
        if args.command == "reverse":
            return cmd_reverse(resolved)
        if args.command == "converge":
            return cmd_converge(resolved)
        if args.command == "predict":
            return cmd_predict(resolved, args.sigma_l, args.sigma_r)
        if args.command == "sweep":
            return cmd_sweep(resolved, args.workers)
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowUpError, DegenerateWaveError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
