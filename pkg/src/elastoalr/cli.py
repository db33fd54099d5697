"""Command-line front end.

Exit codes: 0 ok, 1 usage or configuration error, 2 numerical failure
(unresolved near-singular solve), 3 invariant failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .checks import run_checks
from .config import DEFAULT_CONFIG, OUTPUT_ENV, ConfigError, RunConfig, parse_config
from .errors import BoundViolationError, ConvexityError, NearSingularError
from .mode_solver import configuration_field
from .plasmon_waves import SHELL_INSIDE, SHELL_OUTSIDE, base_V_hat, base_v_hat, perfect_wave
from .resonance_lab import EnergySweep, Thresholds, classify, critical_radius_scan, sweep
from .threed_check import pooled_proportionality_test, proportionality_test
from .variational import duality_table

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_INVARIANT = 0, 1, 2, 3

COMMANDS = ("verify", "sweep", "classify", "critical-radius", "bounds", "plasmon-field", "threed-check")
FIELD_KINDS = ("perfect-wave", "perfect-wave-inside", "v-hat", "V-hat", "solution")

CSV_HELP = """\
CSV outputs (all with a header row):
  sweep, classify     delta, energy, dominant_k, trunc_bound
  bounds              delta, J, E, I
  critical-radius     q, verdict, p, gamma_verdict, gamma_p, tuned_verdict, tuned_p
  threed-check        n, m, best_c, residual
  plasmon-field       r, theta, u1_re, u1_im, u2_re, u2_im
Each run also writes <command>.manifest.json next to the CSV.
Output directory: --out, else [output] dir, else $%s, else ./elastoalr-out.
""" % OUTPUT_ENV


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="elastoalr",
        description="Resonance laboratory for layered plasmonic elastic disks.",
        epilog=CSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--version", action="version", version=f"elastoalr {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("--config", type=Path, help="INI configuration file (default: built-in no-core config)")
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE", help="override a config value")
        sp.add_argument("--out", type=Path, help="output directory")
        sp.add_argument("--workers", type=int, help="maximum parallelism (overrides [sweep] workers)")
        if name == "classify":
            sp.add_argument("--replay", type=Path, help="classify a prior sweep CSV instead of solving")
        if name in ("classify", "critical-radius"):
            sp.add_argument("--p-min", type=float, default=0.5)
            sp.add_argument("--variation-max", type=float, default=0.2)
            sp.add_argument("--variation", choices=("upward", "total"), default="upward")
    return p


def _out_dir(args, cfg: RunConfig) -> Path:
    d = args.out or (Path(cfg.output_dir) if cfg.output_dir else None) or os.environ.get(OUTPUT_ENV) or "elastoalr-out"
    path = Path(d)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write(path: Path, text: str) -> dict:
    path.write_text(text, encoding="utf-8")
    return {"path": str(path), "sha256": hashlib.sha256(text.encode()).hexdigest()}


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def _manifest(out: Path, command: str, cfg: RunConfig | None, start: float, outputs, **extra) -> Path:
    data = {
        "tool": "elastoalr",
        "tool_version": __version__,
        "command": command,
        "config_hash": cfg.config_hash() if cfg is not None else None,
        "config": cfg.canonical() if cfg is not None else None,
        "wall_time_s": round(time.perf_counter() - start, 6),
        "outputs": outputs,
    }
    data.update(extra)
    path = out / f"{command}.manifest.json"
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=repr) + "\n", encoding="utf-8")
    return path


def _thresholds(args) -> Thresholds:
    return Thresholds(p_min=args.p_min, variation_max=args.variation_max, variation=args.variation)


def _load_config(args) -> RunConfig:
    text = args.config.read_text(encoding="utf-8") if args.config else DEFAULT_CONFIG
    cfg = parse_config(text, args.set)
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg.workers = args.workers
    return cfg


def _field_samples(cfg: RunConfig):
    params = cfg.params
    kind = cfg.field_kind
    if kind == "perfect-wave":
        fld = perfect_wave(cfg.field_k, cfg.R, params, SHELL_OUTSIDE)
    elif kind == "perfect-wave-inside":
        fld = perfect_wave(cfg.field_k, cfg.R, params, SHELL_INSIDE)
    elif kind == "v-hat":
        fld = base_v_hat(cfg.field_k, cfg.R, cfg.q, params)
    elif kind == "V-hat":
        fld = base_V_hat(cfg.field_k, cfg.R, cfg.q, params)
    elif kind == "solution":
        fld = configuration_field(cfg.profile(cfg.field_delta), params, cfg.source())
    else:
        raise ConfigError(f"field kind must be one of {', '.join(FIELD_KINDS)}")
    r_max = cfg.r_max if cfg.r_max is not None else 2.0 * cfg.q
    rows = []
    for r in np.linspace(r_max / cfg.nr, r_max, cfg.nr):
        for th in np.linspace(0.0, 2 * np.pi, cfg.ntheta, endpoint=False):
            ux, uy = fld(float(r), float(th))
            rows.append((float(r), float(th), float(np.real(ux)), float(np.imag(ux)), float(np.real(uy)), float(np.imag(uy))))
    return rows


def run_command(command: str, cfg: RunConfig, args=None, stream=None) -> int:
    """Execute one command; returns the exit code."""
    stream = stream or sys.stdout
    if args is None:
        args = build_parser().parse_args([command])
    start = time.perf_counter()
    params = cfg.params

    if command == "verify":
        results = run_checks(cfg)
        for r in results:
            print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}" + (f" ({r.detail})" if r.detail else ""), file=stream)
        failed = sum(not r.passed for r in results)
        print(f"{len(results)} checks, {failed} failed", file=stream)
        return EXIT_INVARIANT if failed else EXIT_OK

    out = _out_dir(args, cfg)

    if command == "sweep" or (command == "classify" and not getattr(args, "replay", None)):
        sw = sweep(cfg.profile(), params, cfg.source(), cfg.delta_grid(), workers=cfg.workers)
        csv_info = _write(out / f"{command}.csv", sw.to_csv())
        if command == "sweep":
            _manifest(out, command, cfg, start, [csv_info])
            print(f"wrote {csv_info['path']}", file=stream)
            return EXIT_OK
        cls = classify(sw, _thresholds(args))
        _manifest(out, command, cfg, start, [csv_info], verdict=cls.verdict, p=cls.p,
                  thresholds=_thresholds(args).as_dict(), diagnostics=cls.diagnostics)
        print(f"verdict={cls.verdict} p={cls.p:.6g}", file=stream)
        return EXIT_OK

    if command == "classify":
        sw = EnergySweep.from_csv(args.replay.read_text(encoding="utf-8"))
        cls = classify(sw, _thresholds(args))
        src_hash = hashlib.sha256(args.replay.read_bytes()).hexdigest()
        _manifest(out, command, None, start, [{"path": str(args.replay), "sha256": src_hash, "role": "replay input"}],
                  verdict=cls.verdict, p=cls.p, thresholds=_thresholds(args).as_dict(), diagnostics=cls.diagnostics)
        print(f"verdict={cls.verdict} p={cls.p:.6g}", file=stream)
        return EXIT_OK

    if command == "critical-radius":
        res = critical_radius_scan(cfg.profile(), params, None, cfg.q_grid(), cfg.delta_grid(),
                                   thresholds=_thresholds(args), workers=cfg.workers)
        rows = [(r.q, r.verdict, r.p, r.gamma_verdict, r.gamma_p, r.tuned_verdict, r.tuned_p) for r in res.rows]
        info = _write(out / "critical-radius.csv",
                      _csv(("q", "verdict", "p", "gamma_verdict", "gamma_p", "tuned_verdict", "tuned_p"), rows))
        _manifest(out, command, cfg, start, [info], transition=res.transition, r_star=res.r_star,
                  verdicts=[r.verdict for r in res.rows], exponents=[r.p for r in res.rows],
                  thresholds=_thresholds(args).as_dict())
        if res.transition is None:
            print("no transition found (no Resonant row followed by a NonResonant row)", file=stream)
        else:
            print(f"transition={res.transition:.6g} R*={res.r_star:.6g} rel_err={res.relative_error:.3g}", file=stream)
        return EXIT_OK

    if command == "bounds":
        rows = duality_table(cfg.profile(), params, cfg.source(), cfg.delta_grid())
        info = _write(out / "bounds.csv", _csv(("delta", "J", "E", "I"), [(r.delta, r.J, r.E, r.I) for r in rows]))
        ok = all(r.ok for r in rows)
        _manifest(out, command, cfg, start, [info], sandwich_ok=ok,
                  trials={"lower": rows[0].lower_trial, "upper": rows[0].upper_trial})
        if not ok:
            bad = next(r for r in rows if not r.ok)
            raise BoundViolationError(f"sandwich violated at delta={bad.delta:g}: J={bad.J}, E={bad.E}, I={bad.I}")
        print(f"wrote {info['path']} (sandwich holds on {len(rows)} rows)", file=stream)
        return EXIT_OK

    if command == "plasmon-field":
        rows = _field_samples(cfg)
        info = _write(out / "plasmon-field.csv", _csv(("r", "theta", "u1_re", "u1_im", "u2_re", "u2_im"), rows))
        _manifest(out, command, cfg, start, [info], kind=cfg.field_kind)
        print(f"wrote {info['path']}", file=stream)
        return EXIT_OK

    if command == "threed-check":
        rows = []
        for n in cfg.n_values:
            for m in range(-n, n + 1):
                rep = proportionality_test(params, n, m, cfg.samples, cfg.seed)
                rows.append((n, m, rep.best_fit_c, rep.relative_residual))
        pooled = pooled_proportionality_test(params, cfg.n_values, cfg.samples, cfg.seed)
        info = _write(out / "threed-check.csv", _csv(("n", "m", "best_c", "residual"), rows))
        _manifest(out, command, cfg, start, [info],
                  pooled={"best_c": pooled.best_fit_c, "residual": pooled.relative_residual})
        print(f"wrote {info['path']}; pooled residual over n={list(cfg.n_values)}: {pooled.relative_residual:.4g}", file=stream)
        return EXIT_OK

    raise ConfigError(f"unknown command {command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        return run_command(args.command, cfg, args)
    except (ConfigError, ConvexityError, OSError) as exc:
        print(f"elastoalr: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NearSingularError as exc:
        print(f"elastoalr: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BoundViolationError as exc:
        print(f"elastoalr: invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"elastoalr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
