"""Command-line harness: rate tables, single points, sweeps, figure data, oracle checks.

Exit codes: 0 success, 1 usage or config error, 2 physics-validity failure,
3 oracle deviation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .model import TWO_PI, PhysicalParams, Status, derive_rates, resonance_frequencies, reference_params, validate_regime
from .oracle import compare, oracle_output_cov
from .output import WindowOverlapError
from .propagators import NoTransferOptimum
from .protocol import figure_schedule, run_point
from .sweeps import ROW_FIELDS, SchedulePolicy, SweepParameter, SweepSpec, figure_summary, reproduce_figure, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_PHYSICS, EXIT_ORACLE = 0, 1, 2, 3

#: generator hook applied by the ``oracle`` subcommand (negative controls in tests)
ORACLE_GENERATOR_HOOK = None

_UNITS = {
    "value": "swept quantity (s, Hz or dimensionless)",
    "E_N": "logarithmic negativity (natural log)",
    "eta_minus": "smallest symplectic eigenvalue of the partial transpose (vacuum = 0.5)",
    "xi_EPR": "EPR variance (vacuum = 1)",
    "nbar1": "intracavity photons at the end of pulse 1",
    "nbar2": "intracavity photons at the end of pulse 2",
    "alpha": "output-mode weight of the intracavity field",
    "Tm": "measurement window (s)",
    "dT2opt": "optimal transfer duration (s)",
    "warnings": "number of warnings raised",
    "status": "ok or failed: reason",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    """Fixed 12-significant-digit rendering used in every CSV cell."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, complex):
        if x.imag == 0:
            return fmt(x.real)
        return f"{x.real:.12g}{x.imag:+.12g}j"
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, complex):
        return _jsonable(x.real) if x.imag == 0 else {"re": x.real, "im": x.imag}
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if math.isnan(x) else x
    if isinstance(x, np.integer):
        return int(x)
    return x


def csv_table(fields, rows, comments=()) -> str:
    lines = [f"# {c}" for c in comments]
    lines += [f"# {f}: {_UNITS[f]}" for f in fields if f in _UNITS]
    lines.append(",".join(fields))
    lines += [",".join(fmt(row[f]) for f in fields) for row in rows]
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _render(payload: dict, fields, rows, fmt_name: str, comments=()) -> str:
    if fmt_name == "json":
        return json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n"
    return csv_table(fields, rows, comments)


# ---------------------------------------------------------------------------
# inputs


def _load_params(args) -> PhysicalParams:
    params = load_config(args.config) if args.config else reference_params()
    if args.delta1_sign is not None:
        sign = -1.0 if args.delta1_sign == "negative" else 1.0
        params = params.with_(delta1=sign * abs(params.delta1))
    return params


def _parse_tm(text: str) -> float | None:
    if text == "auto":
        return None
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--tm expects 'auto' or seconds, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("--tm must be positive")
    return value


def _rates(args, params):
    return derive_rates(params, chi_level=args.chi, noiseless=args.noiseless)


def _schedule(args, rates):
    return figure_schedule(rates, args.T1, dark=args.dark, transfer_ratio=args.ratio)


# ---------------------------------------------------------------------------
# subcommands


def _rate_rows(params, rates):
    rows = []
    for f in fields(rates):
        if f.name in ("params", "chi_level", "noiseless"):
            continue
        name, value = f.name, complex(getattr(rates, f.name))
        if name.startswith("kbar"):
            rows.append({"name": name, "value": value, "unit": "sqrt(rad/s)"})
        else:
            rows.append({"name": name, "value": value / TWO_PI, "unit": "Hz"})
    d1, d2 = resonance_frequencies(params, rates)
    rows.append({"name": "laser_cavity_detuning_1", "value": complex(d1 / TWO_PI), "unit": "Hz"})
    rows.append({"name": "laser_cavity_detuning_2", "value": complex(d2 / TWO_PI), "unit": "Hz"})
    return rows


def _diagnostic_rows(diags):
    return [{"check": d.name, "status": d.status.value, "ratio": d.ratio, "detail": d.message} for d in diags]


def cmd_rates(args) -> int:
    params = _load_params(args)
    rates = _rates(args, params)
    diags = validate_regime(params, rates)
    rows = _rate_rows(params, rates)
    if args.format == "json":
        payload = {"chi_level": rates.chi_level.value, "noiseless": args.noiseless,
                   "rates": rows, "diagnostics": _diagnostic_rows(diags)}
        text = _render(payload, (), (), "json")
    else:
        lines = ["# rates as ordinary frequencies (value / 2 pi) except the kbar noise amplitudes",
                 "# complex values written as re+imj", "name,value,unit"]
        lines += [f"{r['name']},{fmt(r['value'])},{r['unit']}" for r in rows]
        lines += [f"# check {d.name}: {d.status.value} ({d.message})" for d in diags]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_PHYSICS if any(d.status is Status.FAIL for d in diags) else EXIT_OK


def cmd_point(args) -> int:
    params = _load_params(args)
    rates = _rates(args, params)
    schedule = _schedule(args, rates)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = run_point(params, schedule, Tm=args.tm, rates=rates)
    rep = res.report
    row = {"E_N": rep.E_N, "eta_minus": rep.eta_minus, "xi_EPR": rep.xi_EPR, "nbar1": rep.nbar_pulse1,
           "nbar2": rep.nbar_pulse2, "alpha": res.window.alpha, "Tm": res.window.Tm, "dT2opt": res.transfer_optimum,
           "warnings": len(res.warnings)}
    columns = list(row)
    for i in range(4):
        for j in range(4):
            row[f"V{i + 1}{j + 1}"] = res.V_out[i, j]
    payload = {**{k: row[k] for k in columns}, "T1": schedule.T1, "T": schedule.T, "T2": schedule.T2,
               "Tm_clamped": res.window.clamped, "simon_lhs": rep.simon_lhs, "simon_rhs": rep.simon_rhs,
               "entangled": rep.entangled, "physical": res.physical, "V_out": res.V_out,
               "rates": _rate_rows(params, rates),
               "diagnostics": _diagnostic_rows(res.diagnostics), "warning_messages": res.warnings}
    comments = [f"schedule T1={fmt(schedule.T1)} s, T={fmt(schedule.T)} s, T2={fmt(schedule.T2)} s",
                f"chi level {rates.chi_level.value}, noiseless {str(args.noiseless).lower()}"]
    comments += [f"rate {r['name']} = {fmt(r['value'])} {r['unit']}" for r in _rate_rows(params, rates)]
    comments += [f"check {d.name}: {d.status.value}" for d in res.diagnostics]
    comments += [f"warning: {w}" for w in res.warnings]
    comments.append("V_ij: output covariance matrix in (X1, P1, X2, P2), vacuum = I/2")
    text = _render(payload, columns + [f"V{i}{j}" for i in range(1, 5) for j in range(1, 5)], [row],
                   args.format, comments)
    _emit(text, args.out)
    if not res.physical or res.failed_checks:
        return EXIT_PHYSICS
    return EXIT_OK


def _spec_from_args(args) -> SweepSpec:
    try:
        return SweepSpec(args.parameter, args.start, args.stop, args.steps, args.policy,
                         T1=args.T1, dark=args.dark, transfer_ratio=args.ratio)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _rows_payload(rows):
    return [r.as_dict() for r in rows]


def cmd_sweep(args) -> int:
    params = _load_params(args)
    spec = _spec_from_args(args)
    rows = run_sweep(params, spec, chi_level=args.chi, noiseless=args.noiseless, Tm=args.tm, workers=args.workers)
    comments = [f"sweep {spec.parameter.value} from {fmt(spec.start)} to {fmt(spec.stop)} in {spec.steps} steps, "
                f"policy {spec.schedule_policy.value}"]
    text = _render({"spec": asdict(spec), "rows": _rows_payload(rows)}, ROW_FIELDS, _rows_payload(rows),
                   args.format, comments)
    _emit(text, args.out)
    return EXIT_PHYSICS if any(r.failed for r in rows) else EXIT_OK


def cmd_figure(args) -> int:
    params = _load_params(args)
    curves = reproduce_figure(args.which, base=params, chi_level=args.chi, workers=args.workers,
                              include_noiseless=not args.no_reference)
    summary = figure_summary(args.which, curves)
    ext = "json" if args.format == "json" else "csv"
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for c in curves:
            rows = _rows_payload(c.rows)
            comments = [f"figure {args.which} curve {c.label}", f"kappa = {fmt(c.kappa_hz)} Hz",
                        f"noiseless comparison curve: {str(c.noiseless).lower()}",
                        f"policy {c.spec.schedule_policy.value}, swept {c.spec.parameter.value}"]
            payload = {"label": c.label, "kappa_hz": c.kappa_hz, "noiseless": c.noiseless, "rows": rows}
            (outdir / f"fig{args.which}_{c.label}.{ext}").write_text(
                _render(payload, ROW_FIELDS, rows, args.format, comments))
        (outdir / f"fig{args.which}_summary.json").write_text(json.dumps(_jsonable(summary), indent=2) + "\n")
    else:
        chunks = []
        for c in curves:
            rows = _rows_payload(c.rows)
            if args.format == "json":
                chunks.append({"label": c.label, "kappa_hz": c.kappa_hz, "noiseless": c.noiseless, "rows": rows})
            else:
                chunks.append(csv_table(ROW_FIELDS, rows, [f"curve {c.label}"]))
        if args.format == "json":
            sys.stdout.write(json.dumps(_jsonable({"curves": chunks, "summary": summary}), indent=2) + "\n")
        else:
            sys.stdout.write("".join(chunks))
    return EXIT_PHYSICS if any(r.failed for c in curves for r in c.rows) else EXIT_OK


def cmd_oracle(args) -> int:
    params = _load_params(args)
    rates = _rates(args, params)
    schedule = _schedule(args, rates)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = run_point(params, schedule, Tm=args.tm, rates=rates)
    V_oracle = oracle_output_cov(rates, schedule, res.window.Tm, generator_hook=ORACLE_GENERATOR_HOOK)
    cmp = compare(res.V_out, V_oracle)
    i, j = cmp.worst_index
    row = {"max_rel_err": cmp.max_rel_err, "worst_row": i + 1, "worst_col": j + 1,
           "analytic": cmp.V_analytic[i, j], "oracle": cmp.V_oracle[i, j], "passed": cmp.passed}
    if args.format == "json":
        text = _render({**row, "V_analytic": cmp.V_analytic, "V_oracle": cmp.V_oracle}, (), (), "json")
    else:
        lines = [f"# {cmp.report()}", ",".join(row), ",".join(fmt(v) for v in row.values())]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    if not cmp.passed:
        print(cmp.report(), file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value parameter file (Hz, radians, seconds)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output file (directory for 'figure'); default stdout")
    common.add_argument("--tm", type=_parse_tm, default=None, metavar="auto|SECONDS",
                        help="measurement window; 'auto' uses the optimum")
    common.add_argument("--noiseless", action="store_true",
                        help="switch off scattering and heating (comparison curves)")
    common.add_argument("--chi", choices=("exact", "leading"), default="leading",
                        help="Raman coupling formula (default leading order)")
    common.add_argument("--delta1-sign", choices=("negative", "positive"), default=None,
                        help="override the sign of delta1, keeping its magnitude")

    schedule = argparse.ArgumentParser(add_help=False)
    schedule.add_argument("--T1", type=float, default=40e-6, help="first-pulse duration (s)")
    schedule.add_argument("--dark", type=float, default=None,
                          help="T - T1 (s); default two cavity lifetimes 2/(kappa + kappa_L)")
    schedule.add_argument("--ratio", type=float, default=1.0,
                          help="(T2 - T) in units of the optimal transfer duration")

    parser = _Parser(prog="entangled-pulses", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("rates", parents=[common], help="derived rates and regime checks")
    p.set_defaults(func=cmd_rates)
    p = sub.add_parser("point", parents=[common, schedule], help="entanglement of one schedule")
    p.set_defaults(func=cmd_point)
    p = sub.add_parser("sweep", parents=[common, schedule], help="sweep one quantity")
    p.add_argument("--parameter", required=True, choices=[e.value for e in SweepParameter])
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--policy", choices=[e.value for e in SchedulePolicy], default="custom")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("figure", parents=[common], help="regenerate reference curve data")
    p.add_argument("which", type=int, choices=(3, 4, 5))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-reference", action="store_true", help="omit the noiseless comparison curve")
    p.set_defaults(func=cmd_figure)
    p = sub.add_parser("oracle", parents=[common, schedule], help="compare against the moment-equation integrator")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError, WindowOverlapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoTransferOptimum, ValueError, ArithmeticError) as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
