"""Command-line front-end: simulation, sweeps, calibration fits, trace batch
analysis, and shear-capacity frequency response, all writing deterministic
CSV/JSON artifacts plus a run manifest.

Exit codes: 0 success, 1 runtime failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, config as config_io, dynamics, estimators, traces
from .config import ConfigError
from .numerics import NumericalError

_FLOAT_FMT = "%.8e"  # 9 significant digits, bit-stable across platforms


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _FLOAT_FMT % float(value)
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _load_config(args) -> tuple[dynamics.ClutchConfig, dict, dict]:
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError("<override>", f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        overrides[key] = config_io.parse_override_value(raw)
    if args.config in (None, "nominal"):
        doc = config_io.nominal_config_dict()
    else:
        doc = config_io.load_config_dict(args.config)
    if overrides:
        doc = config_io.apply_overrides(doc, overrides)
    return config_io.config_from_dict(doc), doc, overrides


def _prepare_out(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, args, doc: dict, overrides: dict, outputs: list[str]) -> None:
    manifest = {
        "tool": "eaclutch",
        "version": __version__,
        "command": args.command,
        "config_path": str(args.config) if getattr(args, "config", None) else "nominal",
        "config_hash": config_io.config_hash(doc),
        "overrides": overrides,
        "seed": getattr(args, "seed", None),
        "outputs": sorted(outputs),
    }
    _write_json(out / "run_manifest.json", manifest)


def _sim_trace_rows(result: dynamics.SimResult):
    for i in range(len(result.t)):
        row = [
            result.t[i],
            result.gap[i],
            result.gap_vel[i],
            result.shear[i],
            result.voltage[i],
            result.kappa_eff[i],
        ]
        if result.x_lc is not None:
            row.append(result.x_lc[i])
        yield row


def cmd_simulate(args) -> int:
    cfg, doc, overrides = _load_config(args)
    out = _prepare_out(args)
    if args.kind == "engage":
        result = dynamics.simulate_engagement(cfg)
    else:
        result = dynamics.simulate_release(cfg, force_ratio=args.force_ratio)
    header = ["t_s", "gap_m", "gapvel_mps", "shear_n", "voltage_v", "kappa_eff"]
    if result.x_lc is not None:
        header.append("loadcell_x_m")
    trace_path = out / f"{args.kind}_trace.csv"
    write_csv(trace_path, header, _sim_trace_rows(result))
    summary_path = out / f"{args.kind}_summary.json"
    _write_json(summary_path, result.summary())
    _write_manifest(out, args, doc, overrides, [trace_path.name, summary_path.name])
    print(json.dumps(result.summary(), default=_json_default))
    return 0


def _parse_axes(axis_args: list[str]) -> dict[str, list]:
    axes: dict[str, list] = {}
    for item in axis_args:
        if "=" not in item:
            raise ConfigError("<axis>", f"--axis expects path=v1,v2,..., got {item!r}")
        key, _, raw = item.partition("=")
        values = [config_io.parse_override_value(v) for v in raw.split(",") if v != ""]
        if not values:
            raise ConfigError("<axis>", f"axis {key!r} has an empty grid")
        axes[key] = values
    if not axes:
        raise ConfigError("<axis>", "at least one --axis is required")
    return axes


def cmd_sweep(args) -> int:
    cfg, doc, overrides = _load_config(args)
    out = _prepare_out(args)
    axes = _parse_axes(args.axis or [])
    rows = dynamics.parameter_sweep(cfg, axes, metric=args.metric, workers=args.workers)
    names = sorted(axes)
    header = names + ["metric_s", "termination_reason", "error"]
    csv_path = out / f"sweep_{args.metric}.csv"
    write_csv(csv_path, header, ([r[k] for k in header] for r in rows))
    _write_manifest(out, args, doc, overrides, [csv_path.name])
    n_err = sum(1 for r in rows if r["error"])
    print(f"{len(rows)} cells, {n_err} failed -> {csv_path}")
    return 0 if n_err == 0 else 1


def _read_two_column_csv(path: Path, col_x: str, col_y: str) -> np.ndarray:
    with open(path, newline="") as fh:
        header = fh.readline().strip().split(",")
        cols = [h.strip() for h in header]
        for name in (col_x, col_y):
            if name not in cols:
                raise ConfigError("<data>", f"{path}: missing required column '{name}'")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return np.column_stack([data[:, cols.index(col_x)], data[:, cols.index(col_y)]])


def cmd_fit(args) -> int:
    out = _prepare_out(args)
    data_path = Path(args.data)
    result: dict = {"kind": args.kind}
    if args.kind == "cole_cole":
        arr = _read_two_column_csv(data_path, "frequency_hz", "kappa_real")
        est = estimators.ColeColeFit(kappa_inf=args.kappa_inf).fit(arr[:, 0], arr[:, 1])
        result.update(
            kappa_inf=est.kappa_inf,
            kappa_s=est.kappa_s_,
            tau_s=est.tau_,
            alpha=est.alpha_,
            stderr=est.stderr_,
            residual_norm=est.residual_norm_,
        )
        model_y = est.predict(arr[:, 0])
        curve_header = ["frequency_hz", "kappa_real_data", "kappa_real_model"]
    elif args.kind == "contact":
        cfg, doc, overrides = _load_config(args)
        arr = _read_two_column_csv(data_path, "normal_force_n", "capacitance_f")
        est = estimators.ContactFit(geometry=cfg.geometry, kappa=cfg.dielectric.kappa_s)
        est.fit(arr[:, 0], arr[:, 1])
        result.update(
            stiffness_k_n_m35=est.stiffness_k_,
            sigma_d_m=est.sigma_d_,
            stderr_log_params=est.stderr_log_params_,
            gaps_monotone_in_force=est.gaps_monotone_,
        )
        model_y = est.capacitance_pred_
        curve_header = ["normal_force_n", "capacitance_f_data", "capacitance_f_model"]
    elif args.kind == "lambda":
        cfg, doc, overrides = _load_config(args)
        arr = _read_two_column_csv(data_path, "voltage_v", "f_shear_max_n")
        est = estimators.LambdaLawFit(config=cfg).fit(arr[:, 0], arr[:, 1])
        result.update(
            intercept=est.intercept_,
            slope_per_v=est.slope_,
            stderr=est.stderr_,
            lambdas=est.lambdas_,
        )
        model_y = est.predict(arr[:, 0])
        curve_header = ["voltage_v", "f_shear_max_n_data", "lambda_model"]
    elif args.kind == "voltage_exponent":
        arr = _read_two_column_csv(data_path, "voltage_v", "f_shear_max_n")
        est = estimators.VoltageExponentFit().fit(arr[:, 0], arr[:, 1])
        result.update(
            prefactor=est.prefactor_,
            exponent=est.exponent_,
            stderr=est.stderr_,
            residual_norm=est.residual_norm_,
        )
        model_y = est.predict(arr[:, 0])
        curve_header = ["voltage_v", "f_shear_max_n_data", "f_shear_max_n_model"]
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError("<kind>", f"unknown fit kind {args.kind}")

    params_path = out / f"fit_{args.kind}.json"
    _write_json(params_path, result)
    curve_path = out / f"fit_{args.kind}_curve.csv"
    write_csv(curve_path, curve_header, np.column_stack([arr, model_y]))
    if args.kind in ("contact", "lambda"):
        _write_manifest(out, args, doc, overrides, [params_path.name, curve_path.name])
    else:
        _write_manifest(out, args, {"data": str(data_path)}, {}, [params_path.name, curve_path.name])
    print(json.dumps(result, default=_json_default))
    return 0


def cmd_analyze(args) -> int:
    if not args.trace:
        print("error: no trace files given", file=sys.stderr)
        return 2
    cfg, doc, overrides = _load_config(args)
    out = _prepare_out(args)
    header = [
        "file",
        "engagement_s",
        "release90_s",
        "release10_s",
        "slip_pct",
        "preload_n",
        "engagement_ok",
        "error",
    ]
    rows = []
    metrics: dict[str, list[float]] = {k: [] for k in header[1:6]}
    n_failed = 0
    for path in args.trace:
        row = {"file": Path(path).name, "error": ""}
        try:
            trace = traces.load_trace(path)
            if args.threshold is not None:
                row["release90_s"] = traces.extract_release_time(trace, threshold=args.threshold)
            analysis = traces.analyze_trace(trace, cfg)
            row.update({k: analysis.get(k) for k in header[1:7] if k not in row})
        except Exception as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
            n_failed += 1
        rows.append(row)
        for k in metrics:
            v = row.get(k)
            if v is not None and v != "":
                metrics[k].append(float(v))
    csv_path = out / "analysis.csv"
    write_csv(csv_path, header, ([r.get(k, "") for k in header] for r in rows))
    summary = {
        k: {
            "count": len(vals),
            "mean": float(np.mean(vals)) if vals else None,
            "std": float(np.std(vals, ddof=1)) if len(vals) > 1 else None,
        }
        for k, vals in metrics.items()
    }
    summary_path = out / "analysis_summary.json"
    _write_json(summary_path, summary)
    _write_manifest(out, args, doc, overrides, [csv_path.name, summary_path.name])
    print(json.dumps(summary, default=_json_default))
    return 0 if n_failed == 0 else 1


def cmd_bode(args) -> int:
    cfg, doc, overrides = _load_config(args)
    out = _prepare_out(args)
    if args.freqs:
        freqs = [float(f) for f in args.freqs.split(",")]
    else:
        freqs = list(np.geomspace(args.fmin, args.fmax, args.points))
    rows = dynamics.capacity_vs_frequency(cfg, freqs)
    ref = dynamics.dc_capacity(cfg)
    f3db = dynamics.minus_3db_frequency(
        [r["frequency_hz"] for r in rows], [r["capacity_n"] for r in rows], ref
    )
    header = ["frequency_hz", "capacity_n", "mean_f_k_n", "mean_f_ea_adj_n", "mean_gap_m", "settled"]
    csv_path = out / "capacity_vs_frequency.csv"
    write_csv(csv_path, header, ([r[k] for k in header] for r in rows))
    summary = {"dc_capacity_n": ref, "minus_3db_hz": f3db, "n_frequencies": len(rows)}
    summary_path = out / "bode_summary.json"
    _write_json(summary_path, summary)
    _write_manifest(out, args, doc, overrides, [csv_path.name, summary_path.name])
    print(json.dumps(summary, default=_json_default))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eaclutch",
        description="Electroadhesive clutch dynamics: simulate, calibrate, analyze.",
    )
    parser.add_argument("--version", action="version", version=f"eaclutch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="config JSON path, or 'nominal' for the bundled setup")
            p.add_argument(
                "--set",
                action="append",
                metavar="KEY=VALUE",
                help="dot-path config override, e.g. drive.amplitude_v=250",
            )
        p.add_argument("--out", help="output directory (default: current directory)")
        p.add_argument("--seed", type=int, help="seed recorded in the run manifest")

    p_sim = sub.add_parser("simulate", help="run an engagement or release simulation")
    p_sim.add_argument("kind", choices=["engage", "release"])
    p_sim.add_argument(
        "--force-ratio", type=float, default=None, help="F_shear(t_r)/F_shear,max for release"
    )
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="cross-product parameter sweep")
    p_sweep.add_argument("--axis", action="append", metavar="PATH=V1,V2,...", required=True)
    p_sweep.add_argument("--metric", choices=["engage", "release"], required=True)
    p_sweep.add_argument("--workers", type=int, default=1)
    common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_fit = sub.add_parser("fit", help="calibration fits")
    p_fit.add_argument("kind", choices=["cole_cole", "contact", "lambda", "voltage_exponent"])
    p_fit.add_argument("--data", required=True, help="input CSV")
    p_fit.add_argument("--kappa-inf", type=float, default=4.0, help="fixed kappa_inf (cole_cole)")
    common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_an = sub.add_parser("analyze", help="batch trace analysis")
    p_an.add_argument("trace", nargs="*", help="trace CSV files")
    p_an.add_argument("--threshold", type=float, default=None, help="release threshold fraction")
    common(p_an)
    p_an.set_defaults(func=cmd_analyze)

    p_bode = sub.add_parser("bode", help="shear capacity vs drive frequency")
    p_bode.add_argument("--fmin", type=float, default=10.0)
    p_bode.add_argument("--fmax", type=float, default=40000.0)
    p_bode.add_argument("--points", type=int, default=12)
    p_bode.add_argument("--freqs", help="explicit comma-separated frequency list [Hz]")
    common(p_bode)
    p_bode.set_defaults(func=cmd_bode)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, dynamics.NoEquilibriumError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
