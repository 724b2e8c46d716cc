"""Command-line entry point: ``colorloss <subcommand> [options]``.

Exit codes: 0 success, 2 usage or configuration error, 3 runtime failure.
``COLORLOSS_OUTPUT_DIR`` and ``COLORLOSS_THREADS`` provide defaults for
``--output-dir`` and ``--threads``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import shlex
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .coeffs import LatticeTooSmall, NoBracket, analytic_threshold, coefficient_tables, minimal_size
from .lattice import COLORS, Color, Geometry, UnsupportedSize, build, string_distance, validate
from .montecarlo import InsufficientPoints, estimate_r_all, scaling_fit, summarize, threshold_samples
from .percolation import r_c_constant
from .protocol import DegenerateCode

log = logging.getLogger("colorloss")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3


class ConfigError(ValueError):
    pass


def frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s: str) -> Fraction:
    num, den = s.split("/")
    return Fraction(int(num), int(den))


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"not a comma-separated list of numbers: {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"not a comma-separated list of integers: {text!r}") from exc


def _geometries(value: str) -> list[Geometry]:
    if value == "all":
        return list(Geometry)
    try:
        return [Geometry.parse(v) for v in value.split(",")]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _colors(value: str) -> list[Color]:
    if value == "all":
        return list(COLORS)
    try:
        return [Color.parse(v) for v in value.split(",")]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _config(args: argparse.Namespace) -> dict:
    skip = {"func", "output", "output_dir", "threads", "verbose"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def command_line(args: argparse.Namespace) -> str:
    """Shell command that regenerates an output from its recorded config."""
    cfg = _config(args)
    argv = ["colorloss", cfg.pop("command")]
    if "mode" in cfg:
        argv.append(cfg.pop("mode"))
    for key, value in cfg.items():
        flag = "--" + key.replace("_", "-")
        if value is None or value is False:
            continue
        argv.extend([flag] if value is True else [flag, str(value)])
    return shlex.join(argv)


# -- output -----------------------------------------------------------------


def _emit(args, text: str, default_name: str) -> None:
    out_dir = args.output_dir
    target = args.output
    if target is None and out_dir:
        target = default_name
    if target is None or target == "-":
        sys.stdout.write(text)
        return
    path = Path(target)
    if out_dir and not path.is_absolute():
        path = Path(out_dir) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    log.info("wrote %s", path)


def _csv_text(args, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(f"# colorloss {__version__}\n")
    buf.write(f"# config: {json.dumps(_config(args), sort_keys=True)}\n")
    buf.write(f"# command: {command_line(args)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(args, schema: str, payload: dict) -> str:
    doc = {"schema": schema, "version": __version__, "config": _config(args), "command": command_line(args)}
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# -- subcommands ------------------------------------------------------------


def cmd_lattice(args) -> int:
    (geometry,) = _geometries(args.geometry)
    lat = build(geometry, args.L)
    report = validate(lat)
    payload = {
        "summary": {"geometry": geometry.value, "L": args.L, "n_qubits": lat.n_qubits, "string_distance": string_distance(lat)},
        "lattice": lat.to_dict(),
        "validation": [{"kind": v.kind, "ids": list(v.ids), "message": v.message} for v in report],
    }
    _emit(args, _json_text(args, "colorloss.lattice-dump/1", payload), f"lattice_{geometry.value}_L{args.L}.json")
    return EXIT_OK if not report else EXIT_RUNTIME


def _tables(geometry: Geometry, lmax: int, L: int | None):
    size = L if L is not None else minimal_size(geometry, lmax)
    return coefficient_tables(build(geometry, size), lmax)


COEFF_COLUMNS = ["geometry", "color", "ell", "I", "R_bar", "E_bar", "alpha", "R_bar_decimal", "E_bar_decimal", "alpha_decimal"]


def cmd_coeffs(args) -> int:
    if args.lmax < 1:
        raise ConfigError("--lmax must be at least 1")
    rows, tables = [], []
    for g in _geometries(args.geometry):
        all_tables = _tables(g, args.lmax, args.L)
        for c in _colors(args.color):
            t = all_tables[c]
            entries = []
            for r in t.rows:
                rows.append([g.value, c.label, r.ell, r.I, frac(r.R_bar), frac(r.E_bar), frac(r.alpha),
                             f"{float(r.R_bar):.10f}", f"{float(r.E_bar):.10f}", f"{float(r.alpha):.10f}"])
                entries.append({
                    "ell": r.ell, "I": r.I,
                    "R_bar": frac(r.R_bar), "E_bar": frac(r.E_bar), "alpha": frac(r.alpha),
                    "R_bar_decimal": float(r.R_bar), "E_bar_decimal": float(r.E_bar), "alpha_decimal": float(r.alpha),
                })
            tables.append({"geometry": g.value, "color": c.label, "rows": entries})
    if args.format == "csv":
        text = _csv_text(args, COEFF_COLUMNS, rows)
    else:
        text = _json_text(args, "colorloss.coeffs/1", {"tables": tables})
    _emit(args, text, f"coeffs_lmax{args.lmax}.{args.format}")
    return EXIT_OK


def cmd_thresholds(args) -> int:
    rows = []
    for g in _geometries(args.geometry):
        all_tables = _tables(g, args.lmax, None)
        for c in _colors(args.color):
            rc = r_c_constant(g, c)
            pc = analytic_threshold(all_tables[c], rc.value)
            rows.append({"geometry": g.value, "color": c.label, "expression": rc.expression, "r_c": rc.value, "p_c": pc})
    if args.format == "csv":
        text = _csv_text(args, ["geometry", "color", "expression", "r_c", "p_c"],
                         [[r["geometry"], r["color"], r["expression"], f"{r['r_c']:.10f}", f"{r['p_c']:.10f}"] for r in rows])
    else:
        text = _json_text(args, "colorloss.thresholds/1", {"thresholds": rows})
    _emit(args, text, f"thresholds.{args.format}")
    return EXIT_OK


def cmd_constants(args) -> int:
    rows = [r_c_constant(g, c).to_record() for g in Geometry for c in COLORS]
    _emit(args, _json_text(args, "colorloss.constants/1", {"constants": rows}), "constants.json")
    return EXIT_OK


def _mc_r_curve(args) -> int:
    (g,) = _geometries(args.geometry)
    (L,) = _ints(args.L)
    colors = _colors(args.color)
    rows, records = [], []
    for p in _floats(args.p):
        if not 0.0 <= p < 1.0:
            raise ConfigError(f"p must lie in [0, 1), got {p}")
        est = estimate_r_all(g, L, p, args.samples, args.seed, args.threads, args.strict)
        for c in colors:
            rows.append([c.label, p, f"{est.mean[c]:.8f}", f"{est.stderr[c]:.8f}", est.n, est.degenerate])
            records.append({"color": c.label, "p": p, "mean": est.mean[c], "stderr": est.stderr[c], "n": est.n, "degenerate": est.degenerate})
    if args.format == "csv":
        text = _csv_text(args, ["color", "p", "mean_r", "stderr", "n", "degenerate"], rows)
    else:
        text = _json_text(args, "colorloss.r-curve/1", {"points": records})
    _emit(args, text, f"rcurve_{g.value}_L{L}.{args.format}")
    return EXIT_OK


def _mc_thresholds(args, kind: str) -> int:
    (g,) = _geometries(args.geometry)
    sizes = _ints(args.L)
    colors = _colors(args.color) if kind == "pc" else [None]
    points: dict = {c: [] for c in colors}
    degenerate = 0
    for L in sizes:
        samples = threshold_samples(g, L, args.samples, args.seed, pf=(kind == "pf"), workers=args.threads)
        degenerate += sum(s.degenerate for s in samples)
        for c in colors:
            values = [s.pf if c is None else s.pc[c] for s in samples]
            points[c].append(summarize(values, L))
    rows, fits = [], []
    for c in colors:
        label = "all" if c is None else c.label
        for p in points[c]:
            rows.append([label, p.L, f"{p.mean:.8f}", f"{p.stderr:.8f}", p.n])
        if len(set(sizes)) >= 3:
            fit = scaling_fit(points[c], args.nu)
            fits.append({"color": label, **fit.to_record()})
    if args.format == "csv":
        text = _csv_text(args, ["color", "L", "threshold", "stderr", "n"], rows)
    else:
        text = _json_text(args, f"colorloss.{kind}-scaling/1", {"fits": fits, "isolated_pairs": degenerate, "points": [
            {"color": r[0], "L": r[1], "mean": float(r[2]), "stderr": float(r[3]), "n": r[4]} for r in rows]})
    _emit(args, text, f"{kind}_{g.value}.{args.format}")
    return EXIT_OK


def _mc_scaling(args) -> int:
    """Fit a (L, threshold[, stderr, n]) CSV, optionally grouped by a color column."""
    groups: dict[str, list] = {}
    with open(args.input) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    for row in csv.DictReader(lines):
        try:
            point = (int(row["L"]), float(row["threshold"]), float(row.get("stderr") or "nan"), int(row.get("n") or 0))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad scaling input row {row}: {exc}") from exc
        groups.setdefault(row.get("color", "all"), []).append(point)
    fits = [{"color": k, **scaling_fit(v, args.nu).to_record()} for k, v in sorted(groups.items())]
    if args.format == "csv":
        text = _csv_text(args, ["color", "intercept", "intercept_stderr", "slope", "nu"],
                         [[f["color"], f"{f['intercept']:.8f}", f"{f['intercept_stderr']:.8f}", f"{f['slope']:.8f}", f["nu"]] for f in fits])
    else:
        text = _json_text(args, "colorloss.scaling-fit/1", {"fits": fits})
    _emit(args, text, f"scaling.{args.format}")
    return EXIT_OK


def cmd_mc(args) -> int:
    if getattr(args, "samples", 1) < 1:
        raise ConfigError("--samples must be positive")
    if args.mode == "r-curve":
        return _mc_r_curve(args)
    if args.mode in ("pc", "pf"):
        return _mc_thresholds(args, args.mode)
    return _mc_scaling(args)


# -- parser -----------------------------------------------------------------


def _common(p: argparse.ArgumentParser, fmt_default: str = "json", formats=("csv", "json")) -> None:
    p.add_argument("--output", "-o", help="output file ('-' for stdout)")
    p.add_argument("--output-dir", default=os.environ.get("COLORLOSS_OUTPUT_DIR"), help="directory for outputs")
    if formats:
        p.add_argument("--format", choices=formats, default=fmt_default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colorloss", description="Qubit-loss tolerance of color codes.")
    parser.add_argument("--version", action="version", version=f"colorloss {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lattice", help="build, validate and dump a lattice")
    p.add_argument("--geometry", required=True)
    p.add_argument("--L", type=int, required=True)
    _common(p, formats=("json",))
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("coeffs", help="exact series coefficients")
    p.add_argument("--geometry", default="all")
    p.add_argument("--color", default="all")
    p.add_argument("--lmax", type=int, default=3)
    p.add_argument("--L", type=int, default=None, help="lattice size (default: smallest that fits)")
    _common(p, "csv")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("thresholds", help="analytic critical loss rates")
    p.add_argument("--geometry", default="all")
    p.add_argument("--color", default="all")
    p.add_argument("--lmax", type=int, default=3)
    _common(p, "csv")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("constants", help="percolation threshold constants")
    _common(p, formats=("json",))
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("mc", help="Monte Carlo estimates")
    msub = p.add_subparsers(dest="mode", required=True)
    threads_default = os.environ.get("COLORLOSS_THREADS")
    for mode, help_text in (("r-curve", "erased-edge fraction vs p"), ("pc", "percolation onset p_c(L)"), ("pf", "fundamental threshold p_f(L)")):
        m = msub.add_parser(mode, help=help_text)
        m.add_argument("--geometry", required=True)
        m.add_argument("--L", required=True, help="size, or comma-separated sizes for pc/pf")
        m.add_argument("--samples", type=int, default=1000)
        m.add_argument("--seed", type=int, default=0)
        m.add_argument("--threads", type=int, default=int(threads_default) if threads_default else None)
        m.add_argument("--nu", type=float, default=4.0 / 3.0)
        if mode == "r-curve":
            m.add_argument("--p", default="0.1,0.2,0.3,0.4")
            m.add_argument("--color", default="all")
            m.add_argument("--strict", action="store_true", help="drop samples that meet an isolated pair")
        elif mode == "pc":
            m.add_argument("--color", default="all")
        _common(m, "csv")
        m.set_defaults(func=cmd_mc)
    m = msub.add_parser("scaling", help="finite-size fit of a threshold CSV")
    m.add_argument("--input", required=True)
    m.add_argument("--nu", type=float, default=4.0 / 3.0)
    _common(m)
    m.set_defaults(func=cmd_mc)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UnsupportedSize, LatticeTooSmall, InsufficientPoints, FileNotFoundError) as exc:
        print(f"colorloss: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateCode, NoBracket, RuntimeError) as exc:
        print(f"colorloss: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
